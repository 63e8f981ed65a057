import math

import numpy as np
import pytest

from metabic.constants import C, DEBYE, EPS0, HBAR, angular_frequency, from_debye, gamma0, to_debye
from metabic.errors import DomainError


def test_gamma0_matches_direct_formula():
    p, lam = 1e-29, 552e-9
    w = 2 * math.pi * C / lam
    expected = w**3 * p**2 / (3 * math.pi * EPS0 * HBAR * C**3)
    assert gamma0(p, lam) == pytest.approx(expected, rel=1e-14)


def test_gamma0_scaling():
    assert gamma0(2e-29, 600e-9) == pytest.approx(4 * gamma0(1e-29, 600e-9))
    assert gamma0(1e-29, 300e-9) == pytest.approx(8 * gamma0(1e-29, 600e-9))


def test_gamma0_vectorised():
    out = gamma0(np.array([1e-29, 2e-29]), 552e-9)
    assert out.shape == (2,)


@pytest.mark.parametrize("p, lam", [(0.0, 552e-9), (1e-29, -1.0), (float("nan"), 552e-9)])
def test_gamma0_rejects_bad_input(p, lam):
    with pytest.raises(DomainError):
        gamma0(p, lam)


def test_debye_round_trip():
    assert to_debye(from_debye(3.0)) == pytest.approx(3.0)
    assert from_debye(1.0) == DEBYE


def test_angular_frequency():
    assert angular_frequency(C) == pytest.approx(2 * math.pi)
