"""Acceptance criteria, one test per criterion (or per independent half).

Each test records its measured values; the terminal summary prints one
PASS/FAIL line per test.
"""
import math
import time
import warnings

import numpy as np
import pytest
from scipy import optimize

from metabic.cdos import preset
from metabic.dynamics import DickeState, SimulationGrid, closed_form_evolve, integrate
from metabic.entanglement import (
    ConcurrenceTrace,
    c_max_analytic,
    dicke_concurrence,
    sinh_concurrence,
    wootters_concurrence,
)
from metabic.fitting import fit_cdos, fit_purcell, synthetic_cdos_series, synthetic_purcell_series
from metabic.greens import EmitterConfig, RateSet, free_space_rates, lateral_zz_maxima
from metabic.lattice import LatticeParams, ed_cosine_coefficients, md_cosine_coefficients
from metabic.validity import max_dipole_moment, q_factor, regime_report

A = 400e-9


def test_criterion_1_ed_lattice_coefficients(report):
    t0 = time.perf_counter()
    c = ed_cosine_coefficients(LatticeParams(A, 552.0e-9, 104e-9)).c_n
    dt = time.perf_counter() - t0
    target = (0.273, 0.516, 0.160, 0.048)
    rel = [abs(c[i] / t - 1) for i, t in enumerate(target)]
    report(f"c0..c3 = {', '.join(f'{v:.4f}' for v in c[:4])}; worst rel err {max(rel):.3f} (tol 0.05); {dt:.3f} s")
    assert max(rel) < 0.05
    assert dt < 1.0


def test_criterion_1_md_lattice_coefficients(report):
    t0 = time.perf_counter()
    c = md_cosine_coefficients(LatticeParams(A, 708.9e-9, 104e-9, x0=0.164 * A)).c_n
    dt = time.perf_counter() - t0
    rel0 = abs(c[0] / 0.642 - 1)
    rel1 = abs(c[1] / 0.351 - 1)
    abs2 = abs(c[2] - 0.005)
    report(
        f"c0={c[0]:.4f} (rel {rel0:.3f}), c1={c[1]:.4f} (rel {rel1:.3f}), "
        f"c2={c[2]:.4f} (abs {abs2:.4f}, tol 0.003); {dt:.3f} s"
    )
    assert rel0 < 0.05 and rel1 < 0.05 and abs2 < 0.003
    assert dt < 1.0


@pytest.mark.parametrize(
    "row, rates, c_target, c_tol, t_target, t_tol",
    [
        ("MD", (13.7, 8.8, 7.9, -0.2), 0.25, 0.03, 0.10, 0.03),
        ("ED", (46.9, 42.4, 15.3, -2.6), 0.13, 0.02, 0.02, 0.01),
    ],
)
def test_criterion_2_concurrence_pipeline(report, row, rates, c_target, c_tol, t_target, t_tol):
    t0 = time.perf_counter()
    r = RateSet.from_normalized(*rates, 1.0)
    traj = integrate(DickeState.excited_ground(), r, SimulationGrid(0.5, 2000, "rk45_adaptive"))
    tr = ConcurrenceTrace.from_trajectory(traj)
    dt = time.perf_counter() - t0
    report(f"{row}: c_max={tr.c_max:.4f} at t_max={tr.t_max:.4f}/gamma0; {dt:.3f} s")
    assert abs(tr.c_max - c_target) <= c_tol
    assert abs(tr.t_max - t_target) <= t_tol
    assert dt < 1.0


def test_criterion_3_sinh_maximum(report):
    worst = 0.0
    for b in np.round(np.arange(0.1, 1.0, 0.1), 1):
        res = optimize.minimize_scalar(
            lambda t: -sinh_concurrence(t, b, 1.0, 1.0), bounds=(0.0, 20.0), method="bounded",
            options={"xatol": 1e-12},
        )
        worst = max(worst, abs(-res.fun - c_max_analytic(b)))
    report(f"max |c_max_analytic - max_t C_sinh| = {worst:.2e} (tol 1e-10)")
    assert worst < 1e-10


def test_criterion_3_unit_beta_limit(report):
    v = c_max_analytic(0.9999)
    report(f"c_max_analytic(0.9999) = {v:.6f}; |0.5 - C| = {abs(0.5 - v):.2e} (tol 1e-4)")
    assert abs(v - 0.5) < 1e-4


def test_criterion_4_closed_form_vs_rk45(report):
    r = RateSet.from_normalized(1.0, 1.0, 0.63, -0.41, 1.0)
    s0 = DickeState.excited_ground()
    grid = SimulationGrid(10.0 / r.mean_gamma, 1000, "rk45_adaptive")
    traj = integrate(s0, r, grid)
    exact = np.array([closed_form_evolve(s0, r, t).as_vector() for t in traj.times])
    dev = float(np.max(np.abs(traj.states - exact)))
    report(f"max trajectory deviation {dev:.2e} (tol 1e-8)")
    assert dev < 1e-8


def test_criterion_4_dicke_vs_wootters(report):
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        p = rng.dirichlet([1, 1, 1, 1])
        z = rng.uniform() * math.sqrt(p[1] * p[2]) * np.exp(1j * rng.uniform(0, 2 * math.pi))
        s = DickeState(*p, z)
        worst = max(worst, abs(wootters_concurrence(s.computational_matrix()) - dicke_concurrence(s)))
    report(f"max |C_dicke - C_wootters| over 1000 states = {worst:.2e} (tol 1e-10)")
    assert worst < 1e-10


def test_criterion_5_free_space_baseline(report):
    theta, v = lateral_zz_maxima(4)[-1]
    lam = 552e-9
    rng = np.random.default_rng(7)
    violations = 0
    for _ in range(10_000):
        R = rng.uniform(-3, 3, 3) * lam
        e1 = EmitterConfig.oriented((0, 0, 0), rng.standard_normal(3), rng.uniform(0.5, 2) * 1e-29, lam)
        e2 = EmitterConfig.oriented(tuple(R), rng.standard_normal(3), rng.uniform(0.5, 2) * 1e-29, lam)
        r = free_space_rates(e1, e2)
        if abs(r.gamma12) > math.sqrt(r.gamma11 * r.gamma22) * (1 + 1e-12):
            violations += 1
    report(f"4th maximum {v:.5f} at d = {theta / (2 * math.pi):.4f} lambda; bound violations {violations}/10000")
    assert abs(v - 0.0736) <= 0.0005
    assert violations == 0


@pytest.mark.parametrize("name", ["ed_infinite", "md_infinite", "ed_finite", "md_finite"])
def test_criterion_6_cdos_fit_recovery(report, name):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        m = preset(name)
    d = np.linspace(m.validity_distance, 50 * m.a, 300)
    clean = fit_cdos(synthetic_cdos_series(m, d), m)
    noisy = fit_cdos(synthetic_cdos_series(m, d, noise=0.01, seed=12345), m)
    e_clean = max(abs(clean.params["beta"] / m.beta - 1), abs(clean.params["k_res"] / m.k_res - 1))
    e_noisy = max(abs(noisy.params["beta"] / m.beta - 1), abs(noisy.params["k_res"] / m.k_res - 1))
    report(f"{name}: noiseless rel err {e_clean:.1e} (tol 1e-6), 1% noise rel err {e_noisy:.4f} (tol 0.02)")
    assert e_clean < 1e-6 and e_noisy < 0.02


@pytest.mark.parametrize("a_true, b_true", [(51.80, 16.05), (15.47, 16.97)])
def test_criterion_6_purcell_fit_recovery(report, a_true, b_true):
    h = np.linspace(2e-9, 120e-9, 60)
    clean = fit_purcell(synthetic_purcell_series(a_true, b_true, A, 100e-9, h), A, 100e-9)
    noisy = fit_purcell(synthetic_purcell_series(a_true, b_true, A, 100e-9, h, 0.01, seed=12345), A, 100e-9)
    e_clean = max(abs(clean.params["A"] / a_true - 1), abs(clean.params["B"] / b_true - 1))
    e_noisy = max(abs(noisy.params["A"] / a_true - 1), abs(noisy.params["B"] / b_true - 1))
    report(f"A={a_true}, B={b_true}: noiseless rel err {e_clean:.1e}, 1% noise rel err {e_noisy:.4f}")
    assert e_clean < 1e-6 and e_noisy < 0.02


def test_criterion_7_strong_coupling_thresholds(report):
    ed = max_dipole_moment(46.9, 552e-9, 276)
    md = max_dipole_moment(13.7, 708.9e-9, 14178)
    agree = all(
        regime_report(p, fp, lam, lam / q).criteria_agree
        for fp, lam, q, pm in ((46.9, 552e-9, 276, ed), (13.7, 708.9e-9, 14178, md))
        for p in (0.1 * pm, 0.5 * pm, 0.99 * pm, 1.01 * pm, 2 * pm, 10 * pm)
    )
    report(f"p_max ED {ed / 1e-29:.1f}e-29 C m, MD {md / 1e-29:.1f}e-29 C m; full/simplified agree: {agree}")
    assert abs(ed / 90e-29 - 1) <= 0.15
    assert abs(md / 30e-29 - 1) <= 0.15
    assert agree


def test_criterion_8_conservation_positivity(report):
    rng = np.random.default_rng(99)
    worst_trace = 0.0
    worst_pop = 0.0
    c_lo, c_hi = 1.0, 0.0
    for _ in range(1000):
        g11, g22 = rng.uniform(0.1, 50, 2)
        g12 = rng.uniform(-1, 1) * math.sqrt(g11 * g22)
        r = RateSet.from_normalized(g11, g22, g12, rng.uniform(-5, 5), 1.0)
        traj = integrate(DickeState.excited_ground(), r, SimulationGrid(20 / r.mean_gamma, 200))
        worst_trace = max(worst_trace, float(np.max(np.abs(traj.trace - 1))))
        worst_pop = min(worst_pop, float(traj.states[:, :4].min()))
        c = ConcurrenceTrace.from_trajectory(traj).concurrence
        c_lo, c_hi = min(c_lo, c.min()), max(c_hi, c.max())
    report(f"max |tr-1| {worst_trace:.1e}, min population {worst_pop:.1e}, C in [{c_lo:.3g}, {c_hi:.3g}]")
    assert worst_trace < 1e-9
    assert worst_pop >= -1e-9
    assert 0 <= c_lo and c_hi <= 1
