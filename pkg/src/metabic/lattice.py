"""Evanescent lattice sums for the cosine expansion of the BIC-mediated CDOS.

Below the diffraction limit every non-zero diffraction order (l, p) of a
square lattice is evanescent with decay constant
``kz(l, p) = sqrt((2 pi / a)**2 (l**2 + p**2) - k**2)``. Folding the
four-quadrant sums (+-l, +-p) into cosines gives the Fourier coefficients
of the lattice Green function along a line cut; normalising them to unit
sum yields the ``c_n`` of the single-mode CDOS model.

The folding weights are those of an exact four-quadrant sum: orders with
p = 0 appear once, orders with p >= 1 twice. The summed (transverse) index
is extended by doubling until the coefficients are stable to 1e-8.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError

CONVERGENCE_RTOL = 1e-8
DIVERGENCE_RTOL = 1e-4


@dataclass(frozen=True)
class LatticeParams:
    """Square-lattice geometry; all lengths in m.

    ``z`` is the height of source and observation points above the lattice
    plane (sphere centres). ``x0`` is the lateral offset used for the MD
    line cut. ``l_max``/``p_max`` truncate the cosine order and the
    transverse order respectively.
    """

    a: float
    lambda_bic: float
    z: float
    x0: float = 0.0
    l_max: int = 8
    p_max: int = 64

    def __post_init__(self):
        if not (self.a > 0 and self.lambda_bic > 0):
            raise DomainError("a and lambda_bic must be positive")
        if self.lambda_bic <= self.a:
            raise DomainError(
                f"lattice is above the diffraction limit (lambda_bic={self.lambda_bic!r} <= a={self.a!r})"
            )
        if self.z <= 0:
            raise DomainError("z must be positive")
        if self.l_max < 1 or self.p_max < 1:
            raise DomainError("truncation orders must be >= 1")

    @property
    def k(self):
        return 2.0 * math.pi / self.lambda_bic


@dataclass(frozen=True)
class CosineExpansion:
    gamma_raw: tuple
    c_n: tuple
    n_terms: int
    truncation_delta: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def ratios(self, ref=0):
        """Raw coefficients divided by coefficient ``ref``."""
        g = np.asarray(self.gamma_raw)
        return tuple(g / g[ref])


def evanescent_kz(l, p, k, a):
    """Decay constant (1/m) of the evanescent diffraction order (l, p)."""
    if l == 0 and p == 0:
        raise DomainError("propagating order, not evanescent")
    q2 = (2.0 * math.pi / a) ** 2 * (l * l + p * p)
    if q2 <= k * k:
        raise DomainError(f"order ({l}, {p}) is propagating at k={k!r}")
    return math.sqrt(q2 - k * k)


def _kz_grid(ls, ps, k, a):
    q2 = (2.0 * math.pi / a) ** 2 * (ls[:, None] ** 2 + ps[None, :] ** 2)
    with np.errstate(invalid="ignore"):
        return np.sqrt(q2 - k * k)


def _ed_raw(params: LatticeParams, l_max, p_max):
    k, a, z = params.k, params.a, params.z
    ls = np.arange(0, l_max + 1, dtype=float)
    ps = np.arange(0, p_max + 1, dtype=float)
    kz = _kz_grid(ls, ps, k, a)
    kz[0, 0] = 1.0  # propagating order, zeroed below
    term = (1.0 / (a * a * kz)) * (1.0 + (kz / k) ** 2) * np.exp(-kz * z)
    term[0, 0] = 0.0
    weight = np.where(ps == 0, 1.0, 2.0)
    gam = np.empty(l_max + 1)
    gam[0] = np.sum(term[0, 1:])
    gam[1:] = np.sum(term[1:, :] * weight[None, :], axis=1)
    return gam


def _md_raw(params: LatticeParams, l_max, p_max):
    # Here l is the row index along x (summed) and p the cosine order in y.
    k, a, z, x0 = params.k, params.a, params.z, params.x0
    ls = np.arange(1, l_max + 1, dtype=float)
    ps = np.arange(0, p_max + 1, dtype=float)
    kz = _kz_grid(ls, ps, k, a)
    amp = (2.0 * math.pi * ls / (a * k)) * np.sin(2.0 * math.pi * ls * x0 / a)
    term = amp[:, None] * np.exp(-kz * z) / (a * a * kz)
    weight = np.where(ps == 0, 1.0, 2.0)
    return np.sum(term, axis=0) * weight


def normalize(gamma_raw, n_terms=None):
    """Scale coefficients to unit sum, preserving signs."""
    g = np.asarray(gamma_raw, dtype=float)
    total = float(np.sum(g))
    if total == 0.0 or not np.isfinite(total):
        raise DomainError("cannot normalise coefficients with zero sum")
    c = g / total
    return CosineExpansion(tuple(g), tuple(c), int(n_terms if n_terms is not None else g.size))


def _converged(raw_fn, params, inner_start, outer, inner_cap=4096):
    # Double the summed (inner) truncation until every coefficient is
    # stable to CONVERGENCE_RTOL; give up with an error past the cap.
    inner = inner_start
    base = raw_fn(params, *outer(inner))
    while True:
        doubled = raw_fn(params, *outer(2 * inner))
        scale = np.maximum(np.abs(doubled), 1e-300)
        delta = float(np.max(np.abs(doubled - base) / scale))
        inner *= 2
        if delta < CONVERGENCE_RTOL:
            return doubled, delta, inner
        if inner >= inner_cap:
            if delta > DIVERGENCE_RTOL:
                raise ConvergenceError(
                    f"lattice sum not converged: doubling the truncation to {inner} changes "
                    f"coefficients by {delta:.3e} (relative); increase z or the truncation"
                )
            return doubled, delta, inner
        base = doubled


def ed_cosine_coefficients(params: LatticeParams) -> CosineExpansion:
    """Cosine expansion along x of the ED-BIC lattice Green function.

    ``gamma_0`` collects the l = 0 column; for l >= 1,
    ``gamma_l = g0(z, l) + 2 g(z, l)`` where ``g0`` is the p = 0 order
    and ``g`` the sum over p >= 1. Every folded coefficient carries a
    common factor 2 that is dropped; only the normalized ``c_n`` matter.
    """
    raw, delta, inner = _converged(_ed_raw, params, params.p_max, lambda pm: (params.l_max, pm))
    exp = normalize(raw)
    return CosineExpansion(
        exp.gamma_raw, exp.c_n, exp.n_terms, delta, {"kind": "ED", "params": params, "p_used": inner}
    )


def md_cosine_coefficients(params: LatticeParams) -> CosineExpansion:
    """Cosine expansion along y (at offset x0) of the MD-BIC lattice function.

    The coefficient of ``cos(2 pi p y / a)`` sums over rows l >= 1 of
    ``(2 pi l / (a k)) sin(2 pi l x0 / a) exp(-kz z) / (a**2 kz)``. Here
    ``p_max`` truncates the cosine order and ``l_max`` the row sum.
    """
    meta = {"kind": "MD", "params": params}
    if math.sin(2.0 * math.pi * params.x0 / params.a) == 0.0 or params.x0 == 0.0:
        # x0 on a lattice line: every sin(2 pi l x0 / a) vanishes
        raw = np.zeros(params.p_max + 1)
        return CosineExpansion(tuple(raw), tuple(raw), raw.size, 0.0, meta)
    raw, delta, inner = _converged(_md_raw, params, params.l_max, lambda lm: (lm, params.p_max))
    exp = normalize(raw)
    meta["l_used"] = inner
    return CosineExpansion(exp.gamma_raw, exp.c_n, exp.n_terms, delta, meta)
