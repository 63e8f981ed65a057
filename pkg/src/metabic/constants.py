"""Physical constants (CODATA 2018, SI) and the free-space emission rate."""
from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

C = 299_792_458.0  # m/s, exact
HBAR = 1.054_571_817e-34  # J s
EPS0 = 8.854_187_8128e-12  # F/m
DEBYE = 3.33564e-30  # C m per debye


def angular_frequency(wavelength):
    """Vacuum angular frequency 2*pi*c/lambda in rad/s."""
    return 2.0 * math.pi * C / wavelength


def gamma0(p, lambda0):
    """Free-space spontaneous emission rate of a two-level dipole.

    Parameters
    ----------
    p : float or array
        Transition dipole magnitude in C m.
    lambda0 : float or array
        Transition wavelength in m.

    Returns
    -------
    Rate in 1/s, ``w**3 p**2 / (3 pi eps0 hbar c**3)``.
    """
    p_arr = np.asarray(p, dtype=float)
    lam_arr = np.asarray(lambda0, dtype=float)
    if np.any(p_arr <= 0) or np.any(lam_arr <= 0) or not (
        np.all(np.isfinite(p_arr)) and np.all(np.isfinite(lam_arr))
    ):
        raise DomainError("gamma0 requires p > 0 and lambda0 > 0")
    w = 2.0 * math.pi * C / lam_arr
    out = w**3 * p_arr**2 / (3.0 * math.pi * EPS0 * HBAR * C**3)
    return float(out) if out.ndim == 0 else out


def to_debye(p):
    return p / DEBYE


def from_debye(p_debye):
    return p_debye * DEBYE
