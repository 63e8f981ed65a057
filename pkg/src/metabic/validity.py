"""Weak- versus strong-coupling check for an emitter on a BIC resonance.

With coupling constant g, BIC linewidth rate gamma_bic and emitter rate
gamma0, strong coupling needs ``4 g**2 > (gamma0**2 + gamma_bic**2) / 2``.
Using ``F_p = 4 g**2 / (gamma0 gamma_bic)`` and
``gamma_bic = 2 pi c / (lambda Q)`` this reads

    F_p > gamma0 lambda Q / (4 pi c) + pi c / (gamma0 lambda Q).

The first term is usually dropped; both forms are evaluated here.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

from .constants import C, EPS0, HBAR, angular_frequency, gamma0, to_debye
from .errors import DomainError


def _positive(**kw):
    for name, v in kw.items():
        try:
            ok = math.isfinite(float(v)) and float(v) > 0
        except (TypeError, ValueError):
            ok = False
        if not ok:
            raise DomainError(f"{name} must be positive, got {v!r}")


def q_factor(lambda_bic, fwhm):
    _positive(lambda_bic=lambda_bic, fwhm=fwhm)
    return lambda_bic / fwhm


def bic_linewidth_rate(lambda_bic, q):
    """Energy decay rate of the BIC, 2 pi c / (lambda Q), in 1/s."""
    _positive(lambda_bic=lambda_bic, q=q)
    return 2.0 * math.pi * C / (lambda_bic * q)


def coupling_constant(purcell, gamma0_rate, gamma_bic):
    """g from F_p = 4 g^2 / (gamma0 gamma_bic)."""
    _positive(purcell=purcell, gamma0_rate=gamma0_rate, gamma_bic=gamma_bic)
    return math.sqrt(purcell * gamma0_rate * gamma_bic / 4.0)


def max_dipole_moment(purcell, lambda_bic, q):
    """Dipole moment (C m) at which the simplified strong-coupling bound is met.

    Setting F_p = pi c / (gamma0 lambda Q) with
    gamma0 = w^3 p^2 / (3 pi eps0 hbar c^3) gives
    p^2 = 3 pi^2 eps0 hbar c^4 / (F_p w^3 lambda Q).
    """
    _positive(purcell=purcell, lambda_bic=lambda_bic, q=q)
    w = angular_frequency(lambda_bic)
    return math.sqrt(3.0 * math.pi**2 * EPS0 * HBAR * C**4 / (purcell * w**3 * lambda_bic * q))


def full_threshold(gamma0_rate, lambda_bic, q):
    """Right-hand side of the full strong-coupling inequality."""
    x = gamma0_rate * lambda_bic * q
    return x / (4.0 * math.pi * C) + math.pi * C / x


def simplified_threshold(gamma0_rate, lambda_bic, q):
    return math.pi * C / (gamma0_rate * lambda_bic * q)


@dataclass(frozen=True)
class CouplingRegimeReport:
    p: float
    purcell: float
    lambda_bic: float
    q_factor: float
    gamma0: float
    gamma_bic: float
    g: float
    p_max: float
    p_max_debye: float
    margin: float
    full_strong: bool
    simplified_strong: bool
    criteria_agree: bool
    regime: str

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def regime_report(p, purcell, lambda_bic, fwhm):
    """Classify the coupling regime of dipole moment ``p`` (C m).

    ``regime`` follows the full inequality, ``margin`` is p / p_max from the
    simplified one. Note the full inequality also turns weak again once the
    emitter linewidth itself exceeds about 2 F_p gamma_bic.
    """
    _positive(p=p, purcell=purcell)
    q = q_factor(lambda_bic, fwhm)
    g0 = float(gamma0(p, lambda_bic))
    gb = bic_linewidth_rate(lambda_bic, q)
    pm = max_dipole_moment(purcell, lambda_bic, q)
    full = purcell > full_threshold(g0, lambda_bic, q)
    simple = purcell > simplified_threshold(g0, lambda_bic, q)
    return CouplingRegimeReport(
        p=p,
        purcell=purcell,
        lambda_bic=lambda_bic,
        q_factor=q,
        gamma0=g0,
        gamma_bic=gb,
        g=coupling_constant(purcell, g0, gb),
        p_max=pm,
        p_max_debye=float(to_debye(pm)),
        margin=p / pm,
        full_strong=bool(full),
        simplified_strong=bool(simple),
        criteria_agree=bool(full == simple),
        regime="strong" if full else "weak",
    )
