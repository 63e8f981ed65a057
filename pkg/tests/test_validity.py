import math

import numpy as np
import pytest

from metabic.constants import C, DEBYE, gamma0
from metabic.errors import DomainError
from metabic.validity import (
    bic_linewidth_rate,
    coupling_constant,
    full_threshold,
    max_dipole_moment,
    q_factor,
    regime_report,
    simplified_threshold,
)

ED = dict(purcell=46.9, lambda_bic=552e-9, fwhm=2e-9)
MD = dict(purcell=13.7, lambda_bic=708.9e-9, fwhm=0.05e-9)


def test_q_factor():
    assert q_factor(552e-9, 2e-9) == pytest.approx(276)
    assert q_factor(708.9e-9, 0.05e-9) == pytest.approx(14178)
    assert q_factor(1.0, 1.0) == 1.0
    with pytest.raises(DomainError):
        q_factor(552e-9, 0.0)


def test_linewidth_rate():
    assert bic_linewidth_rate(552e-9, 276) == pytest.approx(2 * math.pi * C / (552e-9 * 276))
    assert bic_linewidth_rate(552e-9, 552) == pytest.approx(0.5 * bic_linewidth_rate(552e-9, 276))
    with pytest.raises(DomainError):
        bic_linewidth_rate(-1.0, 3.0)


def test_coupling_constant_inverts_purcell():
    g0, gb = 1e8, 1e13
    g = coupling_constant(46.9, g0, gb)
    assert 4 * g * g / (g0 * gb) == pytest.approx(46.9)


def test_p_max_values():
    ed = max_dipole_moment(46.9, 552e-9, 276)
    md = max_dipole_moment(13.7, 708.9e-9, q_factor(708.9e-9, 0.05e-9))
    assert ed == pytest.approx(90e-29, rel=0.15)
    assert md == pytest.approx(30e-29, rel=0.15)
    assert ed / DEBYE == pytest.approx(270, rel=0.15)
    assert md / DEBYE == pytest.approx(90, rel=0.15)


def test_p_max_solves_simplified_equality():
    for fp, lam, q in ((46.9, 552e-9, 276), (13.7, 708.9e-9, 14178), (3.0, 1e-6, 50)):
        pm = max_dipole_moment(fp, lam, q)
        assert simplified_threshold(gamma0(pm, lam), lam, q) == pytest.approx(fp, rel=1e-10)


def test_p_max_scaling():
    base = max_dipole_moment(10, 600e-9, 100)
    assert max_dipole_moment(40, 600e-9, 100) == pytest.approx(base / 2)
    assert max_dipole_moment(10, 600e-9, 400) == pytest.approx(base / 2)


def test_report_examples():
    rep = regime_report(1e-29, **ED)
    assert rep.regime == "weak"
    assert rep.margin == pytest.approx(1 / 90, rel=0.15)
    assert regime_report(2 * rep.p_max, **ED).regime == "strong"
    assert regime_report(3 * DEBYE, **ED).regime == "weak"


@pytest.mark.parametrize("params", [ED, MD])
def test_full_and_simplified_agree_for_paper_sets(params):
    pm = regime_report(1e-30, **params).p_max
    for p in np.geomspace(1e-3 * pm, 10 * pm, 41):
        assert regime_report(p, **params).criteria_agree


@pytest.mark.parametrize("params", [ED, MD])
def test_single_crossing_and_margin(params):
    pm = regime_report(1e-30, **params).p_max
    ps = np.geomspace(1e-2 * pm, 10 * pm, 400)
    strong = [regime_report(p, **params).regime == "strong" for p in ps]
    assert sum(a != b for a, b in zip(strong, strong[1:])) == 1
    for p, s in zip(ps, strong):
        assert s == (p / pm > 1)


def test_full_criterion_reverts_for_broad_emitters():
    # once the emitter linewidth dominates, the neglected term wins
    rep = regime_report(1e-29, **ED)
    p_far = rep.p_max * 4 * ED["purcell"]
    far = regime_report(p_far, **ED)
    assert far.simplified_strong and not far.full_strong and not far.criteria_agree


def test_full_threshold_exceeds_simplified():
    assert full_threshold(1e9, 552e-9, 276) > simplified_threshold(1e9, 552e-9, 276)
