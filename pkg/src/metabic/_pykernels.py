"""Pure-Python implementations of the hot numerical kernels.

These mirror ``_ckernels.pyx`` function for function and are used when the
compiled extension is unavailable or ``METABIC_PURE_PYTHON=1`` is set.

Dicke state vectors are laid out as ``[ee, ss, aa, gg, Re(as), Im(as)]``;
rate vectors as ``[gamma11, gamma22, gamma12, omega12]``.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import ConvergenceError

_SERIES_MAX = 8.0
_ASYMPTOTIC_MIN = 25.0


def _j0_series(x):
    q = -0.25 * x * x
    term = 1.0
    total = 1.0
    k = 1
    while True:
        term *= q / (k * k)
        total += term
        if abs(term) < 1e-17 * max(1.0, abs(total)):
            return total
        k += 1


def _j0_miller(x):
    # Backward recurrence J_{n-1} = (2n/x) J_n - J_{n+1}, normalised with
    # J0 + 2*sum(J_2k) = 1.
    n_start = 2 * ((int(x) + 40) // 2)
    j_next = 0.0
    j_cur = 1e-300
    norm = 0.0
    j0 = 0.0
    for n in range(n_start, 0, -1):
        j_prev = (2.0 * n / x) * j_cur - j_next
        j_next = j_cur
        j_cur = j_prev
        if (n - 1) % 2 == 0 and n - 1 > 0:
            norm += 2.0 * j_cur
        if abs(j_cur) > 1e250:
            j_cur *= 1e-250
            j_next *= 1e-250
            norm *= 1e-250
    j0 = j_cur
    norm += j0
    return j0 / norm


def _j0_asymptotic(x):
    # Hankel expansion: J0 = sqrt(2/(pi x)) (P cos chi - Q sin chi).
    inv8x = 1.0 / (8.0 * x)
    p_sum = 1.0
    q_sum = 0.0
    term = 1.0
    k = 1
    prev = float("inf")
    while k < 200:
        term *= -((2 * k - 1) ** 2) * inv8x / k
        if abs(term) > prev:
            break
        prev = abs(term)
        if k % 2 == 1:
            q_sum += term if (k // 2) % 2 == 0 else -term
        else:
            p_sum += term if (k // 2) % 2 == 0 else -term
        if abs(term) < 1e-17:
            break
        k += 1
    chi = x - 0.25 * math.pi
    return math.sqrt(2.0 / (math.pi * x)) * (p_sum * math.cos(chi) - q_sum * math.sin(chi))


def j0(x):
    """Bessel function of the first kind, order zero."""
    x = abs(float(x))
    if x < _SERIES_MAX:
        return _j0_series(x)
    if x < _ASYMPTOTIC_MIN:
        return _j0_miller(x)
    return _j0_asymptotic(x)


def j0_array(x):
    xs = np.asarray(x, dtype=float)
    flat = xs.ravel()
    out = np.empty_like(flat)
    for i in range(flat.size):
        out[i] = j0(flat[i])
    return out.reshape(xs.shape)


def _deriv(y, g11, g22, g12, w12):
    ee, ss, aa, gg, re, im = y
    gam = 0.5 * (g11 + g22)
    dl = 0.25 * (g11 - g22)
    gp = gam + g12
    gm = gam - g12
    return (
        -2.0 * gam * ee,
        -gp * ss - 2.0 * dl * re + gp * ee,
        -gm * aa - 2.0 * dl * re + gm * ee,
        gp * ss + gm * aa + 4.0 * dl * re,
        -gam * re - 2.0 * w12 * im - dl * (ss + aa + 2.0 * ee),
        -gam * im + 2.0 * w12 * re,
    )


def dicke_rhs(y, rates):
    g11, g22, g12, w12 = (float(r) for r in rates)
    return np.array(_deriv(tuple(float(v) for v in y), g11, g22, g12, w12))


def _axpy(y, h, *pairs):
    out = list(y)
    for c, k in pairs:
        hc = h * c
        for i in range(6):
            out[i] += hc * k[i]
    return out


def dicke_rk4(y0, rates, t_end, n_steps, substeps=1):
    g11, g22, g12, w12 = (float(r) for r in rates)
    y = [float(v) for v in y0]
    times = np.linspace(0.0, t_end, n_steps + 1)
    states = np.empty((n_steps + 1, 6))
    states[0] = y
    h = t_end / (n_steps * substeps)
    for i in range(1, n_steps + 1):
        for _ in range(substeps):
            k1 = _deriv(y, g11, g22, g12, w12)
            k2 = _deriv(_axpy(y, h, (0.5, k1)), g11, g22, g12, w12)
            k3 = _deriv(_axpy(y, h, (0.5, k2)), g11, g22, g12, w12)
            k4 = _deriv(_axpy(y, h, (1.0, k3)), g11, g22, g12, w12)
            y = _axpy(y, h, (1 / 6, k1), (1 / 3, k2), (1 / 3, k3), (1 / 6, k4))
        states[i] = y
    return times, states


# Dormand-Prince 5(4) tableau
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))


def dicke_rk45(y0, rates, t_end, n_out, rtol=1e-10, atol=1e-10, h_min=0.0):
    """Adaptive Dormand-Prince integration sampled on a uniform grid.

    Steps are clipped so every output time is hit exactly. Returns
    ``(times, states, n_accepted, n_rejected)``.
    """
    g11, g22, g12, w12 = (float(r) for r in rates)
    times = np.linspace(0.0, t_end, n_out + 1)
    states = np.empty((n_out + 1, 6))
    y = [float(v) for v in y0]
    states[0] = y
    scale = abs(0.5 * (g11 + g22)) + abs(g12) + 2.0 * abs(w12)
    h = 0.01 / scale if scale > 0 else t_end
    if h_min <= 0.0:
        h_min = 1e-14 * t_end
    t = 0.0
    n_acc = 0
    n_rej = 0
    k1 = _deriv(y, g11, g22, g12, w12)
    for i in range(1, n_out + 1):
        t_target = times[i]
        while t < t_target:
            last = False
            if t + h >= t_target:
                h_try = t_target - t
                last = True
            else:
                h_try = h
            ks = [k1]
            for s in range(1, 7):
                ys = _axpy(y, h_try, *zip(_A[s], ks))
                ks.append(_deriv(ys, g11, g22, g12, w12))
            y_new = _axpy(y, h_try, *zip(_B5, ks))
            err = 0.0
            for j in range(6):
                e = 0.0
                for c, k in zip(_E, ks):
                    e += c * k[j]
                e *= h_try
                sc = atol + rtol * max(abs(y[j]), abs(y_new[j]))
                err = max(err, abs(e) / sc)
            if err <= 1.0:
                t = t_target if last else t + h_try
                y = y_new
                k1 = ks[6]
                n_acc += 1
                fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
                if not last or fac < 1.0:
                    h = h_try * fac
            else:
                n_rej += 1
                h = h_try * max(0.2, 0.9 * err ** -0.2)
                if h < h_min:
                    raise ConvergenceError(f"step size underflow at t={t:.6e} s (h={h:.3e})")
        states[i] = y
    return times, states, n_acc, n_rej


def jacobi_eigh(a, tol=1e-14, max_sweeps=100):
    """Cyclic Jacobi eigen-decomposition of a real symmetric matrix.

    Returns eigenvalues (ascending) and the matching column eigenvectors.
    Sweeps stop once the off-diagonal Frobenius norm falls below
    ``tol`` times the matrix norm.
    """
    m = np.array(a, dtype=float)
    n = m.shape[0]
    v = np.eye(n)
    norm = math.sqrt(float(np.sum(m * m))) or 1.0
    for _ in range(max_sweeps):
        off = math.sqrt(float(np.sum((m - np.diag(np.diag(m))) ** 2)))
        if off <= tol * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p, q]
                if apq == 0.0:
                    continue
                theta = (m[q, q] - m[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                mp = m[:, p].copy()
                mq = m[:, q].copy()
                m[:, p] = c * mp - s * mq
                m[:, q] = s * mp + c * mq
                mp = m[p, :].copy()
                mq = m[q, :].copy()
                m[p, :] = c * mp - s * mq
                m[q, :] = s * mp + c * mq
                m[p, q] = m[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise ConvergenceError("Jacobi sweeps did not converge")
    w = np.diag(m).copy()
    order = np.argsort(w)
    return w[order], v[:, order]
