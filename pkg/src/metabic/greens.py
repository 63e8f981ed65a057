"""Free-space dyadic Green tensor and the resulting two-emitter rates.

The free-space Green tensor at angular frequency w is split as
``G = (w / 4 pi c) (-kappa + i tau)`` with dimensionless tensors ``tau``
(dissipative part) and ``kappa`` (dispersive part) of the reduced
distance ``theta = 2 pi |R| / lambda``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .constants import gamma0 as _gamma0
from .errors import DomainError

SERIES_THRESHOLD = 1e-3


@dataclass(frozen=True)
class EmitterConfig:
    """A two-level emitter: position (m), unit dipole orientation, dipole
    magnitude p (C m) and transition wavelength (m)."""

    position: tuple
    orientation: tuple
    p: float
    lambda0: float

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float)
        ori = np.asarray(self.orientation, dtype=float)
        if pos.shape != (3,) or ori.shape != (3,):
            raise DomainError("position and orientation must be 3-vectors")
        if abs(np.linalg.norm(ori) - 1.0) > 1e-12:
            raise DomainError(f"orientation must be a unit vector (|o| = {np.linalg.norm(ori)!r})")
        if not (self.p > 0 and self.lambda0 > 0):
            raise DomainError("p and lambda0 must be positive")
        object.__setattr__(self, "position", tuple(pos))
        object.__setattr__(self, "orientation", tuple(ori))

    @classmethod
    def oriented(cls, position, direction, p, lambda0):
        """Build an emitter, normalising ``direction`` to unit length."""
        d = np.asarray(direction, dtype=float)
        return cls(tuple(position), tuple(d / np.linalg.norm(d)), p, lambda0)


@dataclass(frozen=True)
class RateSet:
    """Master-equation coefficients in 1/s, plus the free-space reference rate."""

    gamma11: float
    gamma22: float
    gamma12: float
    omega12: float
    gamma0: float

    def __post_init__(self):
        if self.gamma11 < 0 or self.gamma22 < 0:
            raise DomainError("single-emitter decay rates must be non-negative")
        if self.gamma0 <= 0:
            raise DomainError("gamma0 must be positive")

    @classmethod
    def from_normalized(cls, g11, g22, g12, w12, gamma0):
        """Rates given in units of ``gamma0``."""
        return cls(g11 * gamma0, g22 * gamma0, g12 * gamma0, w12 * gamma0, gamma0)

    def normalized(self):
        g = self.gamma0
        return (self.gamma11 / g, self.gamma22 / g, self.gamma12 / g, self.omega12 / g)

    def as_array(self):
        return np.array([self.gamma11, self.gamma22, self.gamma12, self.omega12])

    @property
    def mean_gamma(self):
        return 0.5 * (self.gamma11 + self.gamma22)

    def is_symmetric(self, rtol=1e-9):
        return abs(self.gamma11 - self.gamma22) < rtol * max(self.gamma11, self.gamma22, 1e-300)

    def check_bound(self, slack=1e-12):
        """Warn when |gamma12| exceeds sqrt(gamma11 gamma22).

        Externally supplied rates may violate the bound marginally through
        truncation, so this warns rather than raises. Returns whether the
        bound holds.
        """
        bound = math.sqrt(self.gamma11 * self.gamma22) + slack * self.gamma0
        ok = abs(self.gamma12) <= bound
        if not ok:
            warnings.warn(
                f"|gamma12| = {abs(self.gamma12):.6g} exceeds sqrt(gamma11*gamma22) = "
                f"{math.sqrt(self.gamma11 * self.gamma22):.6g}",
                RuntimeWarning,
                stacklevel=2,
            )
        return ok


def _unit_and_theta(R, lam):
    if lam <= 0:
        raise DomainError("wavelength must be positive")
    R = np.asarray(R, dtype=float)
    r = float(np.linalg.norm(R))
    theta = 2.0 * math.pi * r / lam
    rhat = R / r if r > 0 else np.zeros(3)
    return rhat, theta


def _sinc_series(theta):
    # sin(t)/t
    t2 = theta * theta
    return 1.0 - t2 / 6.0 + t2**2 / 120.0 - t2**3 / 5040.0 + t2**4 / 362880.0


def _near_series(theta):
    # cos(t)/t^2 - sin(t)/t^3
    t2 = theta * theta
    return -1.0 / 3.0 + t2 / 30.0 - t2**2 / 840.0 + t2**3 / 45360.0 - t2**4 / 3991680.0


def tau_tensor(R, lam):
    """Dissipative free-space Green tensor (imaginary part), dimensionless.

    Below ``theta = 1e-3`` a five-term Taylor series replaces the direct
    formula; at ``R = 0`` the limit ``(2/3) I`` is returned.
    """
    rhat, theta = _unit_and_theta(R, lam)
    if theta == 0.0:
        return (2.0 / 3.0) * np.eye(3)
    if theta < SERIES_THRESHOLD:
        far = _sinc_series(theta)
        near = _near_series(theta)
    else:
        s, c = math.sin(theta), math.cos(theta)
        far = s / theta
        near = c / theta**2 - s / theta**3
    rr = np.outer(rhat, rhat)
    eye = np.eye(3)
    return (eye - rr) * far + (eye - 3.0 * rr) * near


def kappa_tensor(R, lam):
    """Dispersive free-space Green tensor (minus the real part), dimensionless."""
    rhat, theta = _unit_and_theta(R, lam)
    if theta == 0.0:
        raise DomainError("coincident emitters: dipole-dipole shift diverges")
    s, c = math.sin(theta), math.cos(theta)
    rr = np.outer(rhat, rhat)
    eye = np.eye(3)
    return -(eye - rr) * (c / theta) + (eye - 3.0 * rr) * (s / theta**2 + c / theta**3)


def free_space_rates(e1: EmitterConfig, e2: EmitterConfig) -> RateSet:
    """Single and collective rates of two emitters in vacuum.

    ``gamma12 = gamma0 * 3/2 * p1.tau.p2`` and
    ``omega12 = gamma0 * 3/4 * p1.kappa.p2``; the prefactors make gamma12
    tend to gamma0 for parallel dipoles at zero separation.
    """
    if e1.lambda0 != e2.lambda0:
        raise DomainError("emitters must share the transition wavelength")
    lam = e1.lambda0
    R = np.subtract(e1.position, e2.position)
    if not np.any(R):
        raise DomainError("coincident emitters: omega12 undefined")
    p1 = np.asarray(e1.orientation)
    p2 = np.asarray(e2.orientation)
    g11 = _gamma0(e1.p, lam)
    g22 = _gamma0(e2.p, lam)
    g_cross = math.sqrt(g11 * g22)
    g12 = g_cross * 1.5 * float(p1 @ tau_tensor(R, lam) @ p2)
    w12 = g_cross * 0.75 * float(p1 @ kappa_tensor(R, lam) @ p2)
    return RateSet(g11, g22, g12, w12, g11)


def lateral_zz_profile(theta):
    """gamma12/gamma0 for parallel z dipoles separated in the xy plane.

    Vectorised over ``theta``; uses the series below the threshold.
    """
    th = np.atleast_1d(np.asarray(theta, dtype=float))
    out = np.empty_like(th)
    small = th < SERIES_THRESHOLD
    ts = th[small]
    out[small] = _sinc_series(ts) + _near_series(ts)
    tl = th[~small]
    out[~small] = np.sin(tl) / tl + np.cos(tl) / tl**2 - np.sin(tl) / tl**3
    out *= 1.5
    return out if np.ndim(theta) else float(out[0])


def _golden_max(f, a, b, tol):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def lateral_zz_maxima(count, tol=1e-10, theta_max=None):
    """Local maxima of the lateral z-dipole collective rate.

    The contact point ``theta = 0`` counts as the first maximum, so
    ``lateral_zz_maxima(4)[-1]`` is the fourth maximum. Each interior
    maximum is bracketed on a coarse grid and refined by golden-section
    search to ``tol`` in theta. Returns a list of ``(theta, gamma12/gamma0)``.
    """
    if count < 1:
        raise DomainError("count must be >= 1")
    out = [(0.0, 1.0)]
    theta_max = theta_max or (2.0 * math.pi * (count + 2))
    grid = np.linspace(SERIES_THRESHOLD, theta_max, int(200 * theta_max) + 1)
    vals = lateral_zz_profile(grid)
    idx = np.nonzero((vals[1:-1] > vals[:-2]) & (vals[1:-1] >= vals[2:]))[0] + 1
    for i in idx[: count - 1]:
        out.append(_golden_max(lateral_zz_profile, grid[i - 1], grid[i + 1], tol))
    if len(out) < count:
        raise DomainError("theta_max too small to reach the requested maximum")
    return out
