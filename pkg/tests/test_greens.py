import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metabic.errors import DomainError
from metabic.greens import (
    EmitterConfig,
    RateSet,
    free_space_rates,
    kappa_tensor,
    lateral_zz_maxima,
    lateral_zz_profile,
    tau_tensor,
)

LAM = 552e-9


def _complex_green(R, lam):
    # Independent route: the full dyadic bracket times exp(i theta)/theta.
    r = np.linalg.norm(R)
    th = 2 * math.pi * r / lam
    u = np.asarray(R) / r
    rr = np.outer(u, u)
    g = ((1 + 1j / th - 1 / th**2) * np.eye(3) + (-1 - 3j / th + 3 / th**2) * rr) * np.exp(1j * th) / th
    return g


def _tau_quadrature(R, lam, n=200):
    # tau = (1/4pi) int dOmega (I - kk) cos(k.R)
    th = 2 * math.pi * np.linalg.norm(R) / lam
    u = np.asarray(R) / np.linalg.norm(R)
    x, wx = np.polynomial.legendre.leggauss(n)
    phis = np.linspace(0, 2 * math.pi, 2 * n, endpoint=False)
    out = np.zeros((3, 3))
    for ct, w in zip(x, wx):
        st_ = math.sqrt(1 - ct * ct)
        for ph in phis:
            k = np.array([st_ * math.cos(ph), st_ * math.sin(ph), ct])
            out += w * (math.pi / n) * (np.eye(3) - np.outer(k, k)) * math.cos(th * k @ u)
    return out / (4 * math.pi)


@pytest.mark.parametrize("R", [(300e-9, 0, 0), (100e-9, 200e-9, -50e-9), (0, 0, 1.1e-6)])
def test_tau_kappa_against_complex_form(R):
    g = _complex_green(R, LAM)
    assert np.allclose(tau_tensor(R, LAM), g.imag, atol=1e-13)
    assert np.allclose(kappa_tensor(R, LAM), -g.real, atol=1e-12)


def test_tau_against_angular_quadrature():
    R = (250e-9, 120e-9, 80e-9)
    assert np.allclose(tau_tensor(R, LAM), _tau_quadrature(R, LAM, 60), atol=1e-9)


def test_tau_limits():
    assert np.allclose(tau_tensor((0, 0, 0), LAM), 2 / 3 * np.eye(3))
    near = tau_tensor((1e-16, 0, 0), LAM)
    assert np.allclose(near, 2 / 3 * np.eye(3), atol=1e-12)


def test_series_branch_is_continuous():
    lo = 0.999e-3 * LAM / (2 * math.pi)
    hi = 1.001e-3 * LAM / (2 * math.pi)
    assert np.allclose(tau_tensor((lo, 0, 0), LAM), tau_tensor((hi, 0, 0), LAM), atol=1e-8)


def test_kappa_diverges_at_contact():
    with pytest.raises(DomainError, match="coincident"):
        kappa_tensor((0, 0, 0), LAM)


def test_rates_symmetric_and_parallel_limit():
    e1 = EmitterConfig((0, 0, 0), (0, 0, 1), 1e-29, LAM)
    e2 = EmitterConfig((1e-12, 0, 0), (0, 0, 1), 1e-29, LAM)
    r = free_space_rates(e1, e2)
    assert r.gamma12 / r.gamma0 == pytest.approx(1.0, abs=1e-9)
    r21 = free_space_rates(e2, e1)
    assert r21.gamma12 == pytest.approx(r.gamma12)
    assert r21.omega12 == pytest.approx(r.omega12)


def test_perpendicular_collinear_dipoles_do_not_couple():
    e1 = EmitterConfig((0, 0, 0), (1, 0, 0), 1e-29, LAM)
    e2 = EmitterConfig((0, 0, 500e-9), (0, 1, 0), 1e-29, LAM)
    r = free_space_rates(e1, e2)
    assert abs(r.gamma12) < 1e-20 and abs(r.omega12) < 1e-20


def test_emitter_validation():
    with pytest.raises(DomainError):
        EmitterConfig((0, 0, 0), (0, 0, 2), 1e-29, LAM)
    with pytest.raises(DomainError):
        EmitterConfig((0, 0, 0), (0, 0, 1), -1, LAM)
    e = EmitterConfig.oriented((0, 0, 0), (0, 0, 5), 1e-29, LAM)
    assert e.orientation == (0.0, 0.0, 1.0)


def test_mismatched_wavelengths_rejected():
    e1 = EmitterConfig((0, 0, 0), (0, 0, 1), 1e-29, LAM)
    e2 = EmitterConfig((1e-6, 0, 0), (0, 0, 1), 1e-29, 600e-9)
    with pytest.raises(DomainError):
        free_space_rates(e1, e2)


def test_rateset_allows_zero_rates_and_warns_on_bound():
    RateSet(0.0, 0.0, 0.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        RateSet(-1.0, 1.0, 0.0, 0.0, 1.0)
    with pytest.warns(RuntimeWarning):
        assert not RateSet(1.0, 1.0, 1.1, 0.0, 1.0).check_bound()


def test_lateral_profile_matches_tensor():
    th = np.linspace(0.01, 30, 50)
    prof = lateral_zz_profile(th)
    for t, v in zip(th, prof):
        R = (t * LAM / (2 * math.pi), 0, 0)
        # the near-field terms cancel to ~eps/theta^2
        assert v == pytest.approx(1.5 * tau_tensor(R, LAM)[2, 2], abs=1e-15 / t**2 + 1e-14)


def test_lateral_maxima_are_stationary():
    pts = lateral_zz_maxima(4)
    assert pts[0] == (0.0, 1.0)
    for th, v in pts[1:]:
        h = 1e-5
        assert lateral_zz_profile(th + h) <= v and lateral_zz_profile(th - h) <= v
    vals = [v for _, v in pts]
    assert vals == sorted(vals, reverse=True)


@settings(max_examples=200, deadline=None)
@given(
    st.tuples(*[st.floats(-3e-6, 3e-6)] * 3),
    st.tuples(*[st.floats(-1, 1)] * 3),
    st.tuples(*[st.floats(-1, 1)] * 3),
)
def test_cauchy_schwarz_property(R, o1, o2):
    if np.linalg.norm(R) < 1e-12 or np.linalg.norm(o1) < 1e-3 or np.linalg.norm(o2) < 1e-3:
        return
    e1 = EmitterConfig.oriented((0, 0, 0), o1, 1e-29, LAM)
    e2 = EmitterConfig.oriented(R, o2, 2e-29, LAM)
    r = free_space_rates(e1, e2)
    assert abs(r.gamma12) <= math.sqrt(r.gamma11 * r.gamma22) * (1 + 1e-12)
