"""Two-emitter master-equation dynamics in the Dicke basis.

Basis: ``|e> = |ee>``, ``|s> = (|eg> + |ge>)/sqrt(2)``,
``|a> = (|eg> - |ge>)/sqrt(2)``, ``|g> = |gg>``. The supported states are
diagonal in ``ee`` and ``gg`` with a single coherence ``rho_as = <a|rho|s>``
inside the one-excitation block; the dynamics never leaves that sector.

Vectors are laid out as ``[ee, ss, aa, gg, Re(rho_as), Im(rho_as)]``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError
from .greens import RateSet

TOL = 1e-9
SYMMETRY_RTOL = 1e-9
METHODS = ("closed_form", "rk4", "rk45_adaptive")
_ALIASES = {"rk45": "rk45_adaptive", "closed": "closed_form"}

_S2 = 1.0 / math.sqrt(2.0)
# Columns are |e>, |s>, |a>, |g> written in the computational basis
# (|ee>, |eg>, |ge>, |gg>).
DICKE_TO_COMPUTATIONAL = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, _S2, _S2, 0.0],
        [0.0, _S2, -_S2, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]
)


@dataclass(frozen=True)
class DickeState:
    rho_ee: float
    rho_ss: float
    rho_aa: float
    rho_gg: float
    rho_as: complex = 0j

    def __post_init__(self):
        pops = (self.rho_ee, self.rho_ss, self.rho_aa, self.rho_gg)
        if not all(math.isfinite(p) for p in pops) or not np.isfinite(self.rho_as):
            raise DomainError("state contains non-finite entries")
        tr = math.fsum(pops)
        if abs(tr - 1.0) > TOL:
            raise DomainError(f"trace is {tr!r}, expected 1")
        for name, p in zip(("rho_ee", "rho_ss", "rho_aa", "rho_gg"), pops):
            if p < -TOL or p > 1.0 + TOL:
                raise DomainError(f"{name}={p!r} outside [0, 1]")
        if abs(self.rho_as) ** 2 > self.rho_ss * self.rho_aa + TOL:
            raise DomainError("|rho_as|^2 exceeds rho_ss*rho_aa: single-excitation block not positive")
        object.__setattr__(self, "rho_as", complex(self.rho_as))

    @classmethod
    def excited_ground(cls):
        """|e1 g2>: the uncorrelated start used throughout."""
        return cls(0.0, 0.5, 0.5, 0.0, 0.5 + 0j)

    @classmethod
    def ground(cls):
        return cls(0.0, 0.0, 0.0, 1.0, 0j)

    @classmethod
    def from_vector(cls, v, check=True):
        v = [float(x) for x in v]
        if check:
            return cls(v[0], v[1], v[2], v[3], complex(v[4], v[5]))
        obj = object.__new__(cls)
        for name, val in zip(("rho_ee", "rho_ss", "rho_aa", "rho_gg"), v[:4]):
            object.__setattr__(obj, name, val)
        object.__setattr__(obj, "rho_as", complex(v[4], v[5]))
        return obj

    def as_vector(self):
        return np.array(
            [self.rho_ee, self.rho_ss, self.rho_aa, self.rho_gg, self.rho_as.real, self.rho_as.imag]
        )

    @property
    def trace(self):
        return self.rho_ee + self.rho_ss + self.rho_aa + self.rho_gg

    def dicke_matrix(self):
        """4x4 density matrix in the (e, s, a, g) basis."""
        m = np.zeros((4, 4), dtype=complex)
        m[0, 0] = self.rho_ee
        m[1, 1] = self.rho_ss
        m[2, 2] = self.rho_aa
        m[3, 3] = self.rho_gg
        m[2, 1] = self.rho_as
        m[1, 2] = self.rho_as.conjugate()
        return m

    def computational_matrix(self):
        """4x4 density matrix in the (ee, eg, ge, gg) basis."""
        u = DICKE_TO_COMPUTATIONAL
        return u @ self.dicke_matrix() @ u.T

    @classmethod
    def from_computational(cls, rho, tol=TOL):
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (4, 4):
            raise DomainError("expected a 4x4 matrix")
        u = DICKE_TO_COMPUTATIONAL
        m = u.T @ rho @ u
        mask = np.ones((4, 4), dtype=bool)
        np.fill_diagonal(mask, False)
        mask[1, 2] = mask[2, 1] = False
        if np.max(np.abs(m[mask])) > tol:
            raise DomainError("state has coherences outside the supported Dicke sector")
        if abs(m[1, 2] - m[2, 1].conjugate()) > tol:
            raise DomainError("matrix is not Hermitian")
        d = m.diagonal().real
        return cls(d[0], d[1], d[2], d[3], complex(m[2, 1]))


@dataclass(frozen=True)
class SimulationGrid:
    """Output grid on [0, t_end] with ``n_steps`` intervals."""

    t_end: float
    n_steps: int = 1000
    method: str = "rk45_adaptive"
    rtol: float = 1e-10
    atol: float = 1e-10
    substeps: int = 1

    def __post_init__(self):
        method = _ALIASES.get(self.method, self.method)
        if method not in METHODS:
            raise DomainError(f"unknown method {self.method!r} (choose from {', '.join(METHODS)})")
        object.__setattr__(self, "method", method)
        if not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise DomainError("t_end must be positive")
        if int(self.n_steps) != self.n_steps or self.n_steps < 2:
            raise DomainError("n_steps must be an integer >= 2")
        if self.substeps < 1:
            raise DomainError("substeps must be >= 1")

    @property
    def times(self):
        return np.linspace(0.0, self.t_end, self.n_steps + 1)


def _rates(r: RateSet):
    return np.array([r.gamma11, r.gamma22, r.gamma12, r.omega12], dtype=float)


def dicke_derivative(s: DickeState, r: RateSet):
    """Time derivative as a 6-vector in the state layout."""
    return kernels.dicke_rhs(s.as_vector(), _rates(r))


def _phi(x, t):
    # (1 - exp(-x t)) / x, which tends to t as x -> 0
    t = np.asarray(t, dtype=float)
    if x == 0.0:
        return t
    return -np.expm1(-x * t) / x


def _check_symmetric(r: RateSet):
    if abs(r.gamma11 - r.gamma22) > SYMMETRY_RTOL * max(r.gamma11, r.gamma22):
        raise DomainError(
            "closed form needs gamma11 == gamma22; use integrate() with rk4 or rk45_adaptive"
        )


def closed_form_states(s0: DickeState, r: RateSet, times):
    """Closed-form states at each time, as an (n, 6) array."""
    _check_symmetric(r)
    t = np.asarray(times, dtype=float)
    g = r.mean_gamma
    gp = g + r.gamma12
    gm = g - r.gamma12
    w = r.omega12
    ee0 = s0.rho_ee
    ee = ee0 * np.exp(-2.0 * g * t)
    ss = np.exp(-gp * t) * (s0.rho_ss + gp * ee0 * _phi(gm, t))
    aa = np.exp(-gm * t) * (s0.rho_aa + gm * ee0 * _phi(gp, t))
    z = s0.rho_as * np.exp((-g + 2j * w) * t)
    gg = 1.0 - ee - ss - aa
    return np.stack([ee, ss, aa, gg, np.real(z), np.imag(z)], axis=-1)


def closed_form_evolve(s0: DickeState, r: RateSet, t):
    """State at time ``t`` for symmetric rates (gamma11 == gamma22)."""
    return DickeState.from_vector(closed_form_states(s0, r, float(t)), check=False)


class Trajectory:
    """Sampled solution; iterates as ``(t, DickeState)`` pairs."""

    columns = ("t", "rho_ee", "rho_ss", "rho_aa", "rho_gg", "re_rho_as", "im_rho_as")

    def __init__(self, times, states, method, stats=None):
        self.times = np.asarray(times, dtype=float)
        self.states = np.asarray(states, dtype=float)
        self.method = method
        self.stats = dict(stats or {})

    def __len__(self):
        return self.times.size

    def __iter__(self):
        for t, v in zip(self.times, self.states):
            yield float(t), DickeState.from_vector(v, check=False)

    def __getitem__(self, i):
        return float(self.times[i]), DickeState.from_vector(self.states[i], check=False)

    @property
    def trace(self):
        return self.states[:, :4].sum(axis=1)

    def column(self, name):
        if name == "t":
            return self.times
        return self.states[:, self.columns.index(name) - 1]

    def write_csv(self, fh, header_lines=()):
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(self.columns)
        for t, v in zip(self.times, self.states):
            w.writerow([repr(float(t))] + [repr(float(x)) for x in v])


def integrate(s0: DickeState, r: RateSet, grid: SimulationGrid) -> Trajectory:
    y0 = s0.as_vector()
    if grid.method == "closed_form":
        t = grid.times
        return Trajectory(t, closed_form_states(s0, r, t), grid.method)
    if grid.method == "rk4":
        t, y = kernels.dicke_rk4(y0, _rates(r), grid.t_end, grid.n_steps, grid.substeps)
        return Trajectory(t, y, grid.method, {"substeps": grid.substeps})
    t, y, n_acc, n_rej = kernels.dicke_rk45(
        y0, _rates(r), grid.t_end, grid.n_steps, grid.rtol, grid.atol
    )
    return Trajectory(t, y, grid.method, {"accepted": n_acc, "rejected": n_rej})
