"""Two-qubit concurrence: the general Wootters formula, the Dicke-sector
closed form, and the sinh approximation with its maximum."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .cdos import BicMode, effective_beta
from .dynamics import DickeState, Trajectory, closed_form_states, _check_symmetric
from .errors import DomainError
from .greens import RateSet

PHYS_TOL = 1e-9
EIG_CLAMP = 1e-12
_SY = np.array([[0.0, -1j], [1j, 0.0]])
SPIN_FLIP = np.kron(_SY, _SY)


def _embed(h):
    # Complex Hermitian n x n -> real symmetric 2n x 2n with the same
    # spectrum, each eigenvalue doubled.
    return np.block([[h.real, -h.imag], [h.imag, h.real]])


def _unembed(m):
    n = m.shape[0] // 2
    return m[:n, :n] + 1j * m[n:, :n]


def hermitian_eigvalsh(h):
    """Eigenvalues (ascending) of a Hermitian matrix via cyclic Jacobi."""
    w, _ = kernels.jacobi_eigh(_embed(np.asarray(h, dtype=complex)))
    return w[::2]


def hermitian_sqrt(h, clamp=EIG_CLAMP):
    """Square root of a positive semidefinite Hermitian matrix."""
    w, v = kernels.jacobi_eigh(_embed(np.asarray(h, dtype=complex)))
    w = np.where(np.abs(w) < clamp, 0.0, w)
    if np.any(w < 0):
        raise DomainError("matrix is not positive semidefinite")
    return _unembed((v * np.sqrt(w)) @ v.T)


def check_density_matrix(rho, tol=PHYS_TOL):
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise DomainError("density matrix must be 4x4")
    if not np.all(np.isfinite(rho)):
        raise DomainError("density matrix has non-finite entries")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise DomainError("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise DomainError(f"density matrix trace is {tr!r}, expected 1")
    lam_min = hermitian_eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if lam_min < -tol:
        raise DomainError(f"density matrix is not positive semidefinite (min eigenvalue {lam_min:.3e})")
    return rho


def wootters_concurrence(rho):
    """Concurrence of a two-qubit density matrix in the (ee, eg, ge, gg) basis.

    The spectrum of rho * rho_tilde is taken from the Hermitian matrix
    sqrt(rho) rho_tilde sqrt(rho), which has the same eigenvalues.
    """
    rho = check_density_matrix(rho)
    rho = 0.5 * (rho + rho.conj().T)
    flipped = SPIN_FLIP @ rho.conj() @ SPIN_FLIP
    root = hermitian_sqrt(rho)
    m = root @ flipped @ root
    lam = hermitian_eigvalsh(0.5 * (m + m.conj().T))
    lam = np.where(np.abs(lam) < EIG_CLAMP, 0.0, lam)
    s = np.sort(np.sqrt(np.clip(lam, 0.0, None)))[::-1]
    return float(min(1.0, max(0.0, s[0] - s[1] - s[2] - s[3])))


def _dicke_concurrence_vec(v):
    v = np.asarray(v, dtype=float)
    ee, ss, aa, gg, im = v[..., 0], v[..., 1], v[..., 2], v[..., 3], v[..., 5]
    coh = np.sqrt((ss - aa) ** 2 + 4.0 * im**2)
    pair = 2.0 * np.sqrt(np.clip(ee * gg, 0.0, None))
    return np.clip(coh - pair, 0.0, 1.0)


def dicke_concurrence(s: DickeState):
    """Closed-form concurrence of a Dicke-sector state.

    ``C = max(0, sqrt((rho_ss - rho_aa)**2 + 4 Im(rho_as)**2) - 2 sqrt(rho_ee rho_gg))``.
    Only the imaginary part of the coherence separates the two emitters'
    excitation, so Re(rho_as) does not enter.
    """
    return float(_dicke_concurrence_vec(s.as_vector()))


def _parabolic_peak(t, c, i):
    if i == 0 or i == len(c) - 1:
        return float(t[i])
    y0, y1, y2 = c[i - 1], c[i], c[i + 1]
    den = y0 - 2.0 * y1 + y2
    if den >= 0:
        return float(t[i])
    h = t[i + 1] - t[i]
    return float(t[i] + 0.5 * h * (y0 - y2) / den)


@dataclass(frozen=True)
class ConcurrenceTrace:
    """Concurrence samples with the sample maximum and its refined time."""

    times: np.ndarray
    concurrence: np.ndarray
    t_max: float
    c_max: float

    @classmethod
    def from_samples(cls, times, values):
        t = np.asarray(times, dtype=float)
        c = np.asarray(values, dtype=float)
        if c.size and (np.min(c) < 0 or np.max(c) > 1):
            raise DomainError("concurrence samples must lie in [0, 1]")
        i = int(np.argmax(c))
        return cls(t, c, _parabolic_peak(t, c, i), float(c[i]))

    @classmethod
    def from_trajectory(cls, traj: Trajectory):
        return cls.from_samples(traj.times, _dicke_concurrence_vec(traj.states))

    def write_csv(self, fh, header_lines=()):
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("t", "C"))
        for t, c in zip(self.times, self.concurrence):
            w.writerow((repr(float(t)), repr(float(c))))

    def summary(self, **extra):
        out = {"t_max": self.t_max, "c_max": self.c_max}
        out.update(extra)
        return out

    def summary_json(self, **extra):
        return json.dumps(self.summary(**extra), indent=2, sort_keys=True)


def sinh_concurrence(t, beta_bar, purcell, gamma0):
    """sinh(beta_bar x) exp(-x) with x = purcell * gamma0 * t, overflow-safe."""
    x = purcell * gamma0 * np.asarray(t, dtype=float)
    out = 0.5 * (np.exp((beta_bar - 1.0) * x) - np.exp(-(beta_bar + 1.0) * x))
    return float(out) if np.ndim(out) == 0 else out


def long_time_concurrence(t, beta_bar, purcell, gamma0):
    x = purcell * gamma0 * np.asarray(t, dtype=float)
    out = 0.5 * np.exp(-(1.0 - beta_bar) * x)
    return float(out) if np.ndim(out) == 0 else out


def concurrence_sinh(t, d, mode: BicMode, gamma0):
    """Approximate concurrence at separation ``d`` from the BIC model."""
    return sinh_concurrence(t, effective_beta(d, mode), mode.purcell, gamma0)


def concurrence_long_time(t, d, mode: BicMode, gamma0):
    """Late-time form: the surviving antisymmetric population."""
    return long_time_concurrence(t, effective_beta(d, mode), mode.purcell, gamma0)


def _check_beta(beta_bar):
    if not 0.0 < beta_bar < 1.0:
        raise DomainError(f"beta_bar must lie in (0, 1), got {beta_bar!r}")


def t_max_analytic(beta_bar, purcell, gamma0):
    """Time of the sinh-form maximum, ln((1+b)/(1-b)) / (2 F_p gamma0 b)."""
    _check_beta(beta_bar)
    # ln((1+b)/(1-b)) / 2 == atanh(b), which stays accurate as b -> 0
    return math.atanh(beta_bar) / (beta_bar * purcell * gamma0)


def c_max_analytic(beta_bar):
    """Peak of the sinh form: b / sqrt(1 - b^2) * ((1+b)/(1-b))**(-1/(2b))."""
    _check_beta(beta_bar)
    b = beta_bar
    return b / math.sqrt(1.0 - b * b) * math.exp(-math.atanh(b) / b)


def exact_concurrence_symmetric(t, r: RateSet):
    """Concurrence from |e1 g2> for gamma11 == gamma22."""
    _check_symmetric(r)
    t = np.asarray(t, dtype=float)
    g = r.mean_gamma
    diff = np.exp(-(g + r.gamma12) * t) - np.exp(-(g - r.gamma12) * t)
    osc = 4.0 * np.exp(-2.0 * g * t) * np.sin(2.0 * r.omega12 * t) ** 2
    out = 0.5 * np.sqrt(diff**2 + osc)
    return float(out) if np.ndim(out) == 0 else out


def symmetric_trace(r: RateSet, times):
    """ConcurrenceTrace of the closed-form trajectory from |e1 g2>."""
    states = closed_form_states(DickeState.excited_ground(), r, times)
    return ConcurrenceTrace.from_samples(times, _dicke_concurrence_vec(states))
