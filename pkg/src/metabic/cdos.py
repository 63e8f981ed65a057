"""Single-mode BIC model of the cross density of states.

``gamma12(d) = gamma11 * beta * J0(k_res |d|) * sum_n c_n cos(2 pi n d / a)``:
a lattice-periodic oscillation times a Bessel envelope set by the detuning
from the BIC frequency.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, replace
from importlib import resources

import numpy as np

from . import kernels
from .errors import DomainError

SUM_TOL = 1e-6
# Distances (in lattice constants) below which the single-mode model is
# not expected to hold.
VALIDITY_LATTICE_UNITS = {"ED": 5.0, "MD": 2.0}


@dataclass(frozen=True)
class BicMode:
    """BIC-mode parameters. Lengths in m, ``k_res`` in rad/m."""

    lambda_bic: float
    a: float
    purcell: float
    beta: float
    k_res: float
    c_n: tuple
    q_factor: float = float("nan")
    fwhm: float = float("nan")
    kind: str = "ED"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not (self.lambda_bic > 0 and self.a > 0):
            raise DomainError("lambda_bic and a must be positive")
        if not 0.0 <= self.beta <= 1.0:
            raise DomainError(f"beta must lie in [0, 1], got {self.beta!r}")
        if self.purcell < 1.0:
            raise DomainError(f"purcell must be >= 1, got {self.purcell!r}")
        if self.k_res < 0:
            raise DomainError("k_res must be non-negative")
        if self.kind not in VALIDITY_LATTICE_UNITS:
            raise DomainError(f"kind must be ED or MD, got {self.kind!r}")
        c = tuple(float(v) for v in self.c_n)
        if not c:
            raise DomainError("c_n must not be empty")
        object.__setattr__(self, "c_n", c)
        total = sum(c)
        if abs(total - 1.0) > SUM_TOL:
            warnings.warn(
                f"cosine coefficients sum to {total:.6g}, not 1; use renormalized() to rescale",
                RuntimeWarning,
                stacklevel=3,
            )

    @property
    def c_sum(self):
        return math.fsum(self.c_n)

    @property
    def validity_distance(self):
        return VALIDITY_LATTICE_UNITS[self.kind] * self.a

    def renormalized(self):
        """Copy with ``c_n`` scaled to unit sum."""
        s = self.c_sum
        if s == 0.0:
            raise DomainError("cannot renormalize coefficients with zero sum")
        return replace(self, c_n=tuple(v / s for v in self.c_n))


def _load_json(name):
    return json.loads(resources.files("metabic").joinpath("data", name).read_text())


def preset(name, renormalize=False):
    """Bundled mode: ``ed_finite``, ``md_finite``, ``ed_infinite`` or ``md_infinite``.

    The tabulated coefficients sum to 0.998 for both kinds and are kept
    as tabulated, so loading a preset warns unless ``renormalize`` is set.
    """
    table = _load_json("modes.json")
    if name not in table or name.startswith("_"):
        known = ", ".join(k for k in table if not k.startswith("_"))
        raise KeyError(f"unknown mode preset {name!r} (known: {known})")
    e = table[name]
    lam = e["lambda_bic_nm"] * 1e-9
    fwhm = e["fwhm_nm"] * 1e-9
    fields = dict(
        lambda_bic=lam,
        a=e["a_nm"] * 1e-9,
        purcell=e["purcell"],
        beta=e["beta"],
        k_res=e["k_res_per_um"] * 1e6,
        c_n=tuple(e["c_n"]),
        q_factor=lam / fwhm,
        fwhm=fwhm,
        kind=e["kind"],
        meta={"preset": name, **({"source": e["source"]} if "source" in e else {})},
    )
    if renormalize:
        s = math.fsum(fields["c_n"])
        fields["c_n"] = tuple(v / s for v in fields["c_n"])
    return BicMode(**fields)


def preset_names():
    return [k for k in _load_json("modes.json") if not k.startswith("_")]


def bessel_j0(x):
    """J0, scalar or array."""
    if np.ndim(x) == 0:
        return kernels.j0(float(x))
    return kernels.j0_array(np.asarray(x, dtype=float))


def oscillation(d, mode: BicMode):
    d = np.asarray(d, dtype=float)
    n = np.arange(len(mode.c_n))
    c = np.asarray(mode.c_n)
    return np.cos(2.0 * math.pi * np.multiply.outer(d, n) / mode.a) @ c


def envelope(d, mode: BicMode):
    return bessel_j0(mode.k_res * np.abs(np.asarray(d, dtype=float)))


def effective_beta(d, mode: BicMode):
    """beta * osc(d) * env(d); negative where the CDOS dips below zero."""
    out = mode.beta * oscillation(d, mode) * envelope(d, mode)
    return float(out) if np.ndim(out) == 0 else out


def cdos(d, mode: BicMode, gamma11):
    """Collective decay rate gamma12(d) in the units of ``gamma11``."""
    out = gamma11 * mode.beta * oscillation(d, mode) * envelope(d, mode)
    return float(out) if np.ndim(out) == 0 else out


def in_validity_range(d, mode: BicMode):
    """True where |d| reaches the model's validity distance (5a ED, 2a MD)."""
    return np.abs(np.asarray(d, dtype=float)) >= mode.validity_distance * (1 - 1e-12)
