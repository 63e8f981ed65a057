# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot kernels (see ``_pykernels`` for the reference)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, cos, sin, pow, M_PI, copysign

from .errors import ConvergenceError

cnp.import_array()

cdef double SERIES_MAX = 8.0
cdef double ASYMPTOTIC_MIN = 25.0


cdef double _j0_series(double x) nogil:
    cdef double q = -0.25 * x * x
    cdef double term = 1.0
    cdef double total = 1.0
    cdef int k = 1
    while True:
        term *= q / (k * k)
        total += term
        if fabs(term) < 1e-17 * (fabs(total) if fabs(total) > 1.0 else 1.0):
            return total
        k += 1


cdef double _j0_miller(double x) nogil:
    cdef int n_start = 2 * ((<int> x + 40) // 2)
    cdef double j_next = 0.0
    cdef double j_cur = 1e-300
    cdef double j_prev
    cdef double norm = 0.0
    cdef int n
    for n in range(n_start, 0, -1):
        j_prev = (2.0 * n / x) * j_cur - j_next
        j_next = j_cur
        j_cur = j_prev
        if (n - 1) % 2 == 0 and n - 1 > 0:
            norm += 2.0 * j_cur
        if fabs(j_cur) > 1e250:
            j_cur *= 1e-250
            j_next *= 1e-250
            norm *= 1e-250
    norm += j_cur
    return j_cur / norm


cdef double _j0_asymptotic(double x) nogil:
    cdef double inv8x = 1.0 / (8.0 * x)
    cdef double p_sum = 1.0
    cdef double q_sum = 0.0
    cdef double term = 1.0
    cdef double prev = 1e300
    cdef int k = 1
    cdef double chi
    while k < 200:
        term *= -((2 * k - 1) * (2 * k - 1)) * inv8x / k
        if fabs(term) > prev:
            break
        prev = fabs(term)
        if k % 2 == 1:
            if (k // 2) % 2 == 0:
                q_sum += term
            else:
                q_sum -= term
        else:
            if (k // 2) % 2 == 0:
                p_sum += term
            else:
                p_sum -= term
        if fabs(term) < 1e-17:
            break
        k += 1
    chi = x - 0.25 * M_PI
    return sqrt(2.0 / (M_PI * x)) * (p_sum * cos(chi) - q_sum * sin(chi))


cdef double _j0(double x) nogil:
    x = fabs(x)
    if x < SERIES_MAX:
        return _j0_series(x)
    if x < ASYMPTOTIC_MIN:
        return _j0_miller(x)
    return _j0_asymptotic(x)


def j0(double x):
    return _j0(x)


def j0_array(x):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] flat
    xs = np.asarray(x, dtype=np.float64)
    flat = np.ascontiguousarray(xs.ravel())
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(flat.shape[0])
    cdef Py_ssize_t i
    for i in range(flat.shape[0]):
        out[i] = _j0(flat[i])
    return out.reshape(xs.shape)


cdef inline void _deriv(double* y, double* r, double* dy) nogil:
    cdef double gam = 0.5 * (r[0] + r[1])
    cdef double dl = 0.25 * (r[0] - r[1])
    cdef double gp = gam + r[2]
    cdef double gm = gam - r[2]
    dy[0] = -2.0 * gam * y[0]
    dy[1] = -gp * y[1] - 2.0 * dl * y[4] + gp * y[0]
    dy[2] = -gm * y[2] - 2.0 * dl * y[4] + gm * y[0]
    dy[3] = gp * y[1] + gm * y[2] + 4.0 * dl * y[4]
    dy[4] = -gam * y[4] - 2.0 * r[3] * y[5] - dl * (y[1] + y[2] + 2.0 * y[0])
    dy[5] = -gam * y[5] + 2.0 * r[3] * y[4]


def dicke_rhs(y, rates):
    cdef double yy[6]
    cdef double rr[4]
    cdef double dy[6]
    cdef int i
    for i in range(6):
        yy[i] = y[i]
    for i in range(4):
        rr[i] = rates[i]
    _deriv(yy, rr, dy)
    return np.array([dy[i] for i in range(6)])


def dicke_rk4(y0, rates, double t_end, int n_steps, int substeps=1):
    cdef double y[6]
    cdef double tmp[6]
    cdef double k1[6]
    cdef double k2[6]
    cdef double k3[6]
    cdef double k4[6]
    cdef double rr[4]
    cdef int i, j, s
    for j in range(6):
        y[j] = y0[j]
    for j in range(4):
        rr[j] = rates[j]
    times = np.linspace(0.0, t_end, n_steps + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] states = np.empty((n_steps + 1, 6))
    for j in range(6):
        states[0, j] = y[j]
    cdef double h = t_end / (n_steps * substeps)
    for i in range(1, n_steps + 1):
        for s in range(substeps):
            _deriv(y, rr, k1)
            for j in range(6):
                tmp[j] = y[j] + 0.5 * h * k1[j]
            _deriv(tmp, rr, k2)
            for j in range(6):
                tmp[j] = y[j] + 0.5 * h * k2[j]
            _deriv(tmp, rr, k3)
            for j in range(6):
                tmp[j] = y[j] + h * k3[j]
            _deriv(tmp, rr, k4)
            for j in range(6):
                y[j] += h * (k1[j] / 6.0 + k2[j] / 3.0 + k3[j] / 3.0 + k4[j] / 6.0)
        for j in range(6):
            states[i, j] = y[j]
    return times, states


cdef double A[7][6]
cdef double E[7]
cdef double B5[7]

A[1][0] = 1.0 / 5
A[2][0] = 3.0 / 40; A[2][1] = 9.0 / 40
A[3][0] = 44.0 / 45; A[3][1] = -56.0 / 15; A[3][2] = 32.0 / 9
A[4][0] = 19372.0 / 6561; A[4][1] = -25360.0 / 2187; A[4][2] = 64448.0 / 6561; A[4][3] = -212.0 / 729
A[5][0] = 9017.0 / 3168; A[5][1] = -355.0 / 33; A[5][2] = 46732.0 / 5247; A[5][3] = 49.0 / 176; A[5][4] = -5103.0 / 18656
A[6][0] = 35.0 / 384; A[6][1] = 0.0; A[6][2] = 500.0 / 1113; A[6][3] = 125.0 / 192; A[6][4] = -2187.0 / 6784; A[6][5] = 11.0 / 84
B5[0] = 35.0 / 384; B5[1] = 0.0; B5[2] = 500.0 / 1113; B5[3] = 125.0 / 192; B5[4] = -2187.0 / 6784; B5[5] = 11.0 / 84; B5[6] = 0.0
E[0] = 35.0 / 384 - 5179.0 / 57600
E[1] = 0.0
E[2] = 500.0 / 1113 - 7571.0 / 16695
E[3] = 125.0 / 192 - 393.0 / 640
E[4] = -2187.0 / 6784 + 92097.0 / 339200
E[5] = 11.0 / 84 - 187.0 / 2100
E[6] = -1.0 / 40


def dicke_rk45(y0, rates, double t_end, int n_out, double rtol=1e-10, double atol=1e-10,
               double h_min=0.0):
    cdef double y[6]
    cdef double y_new[6]
    cdef double tmp[6]
    cdef double ks[7][6]
    cdef double rr[4]
    cdef int i, j, s, m
    cdef double t = 0.0, h, h_try, err, e, sc, fac, t_target, a_ym, a_yn
    cdef bint last
    cdef long n_acc = 0, n_rej = 0
    for j in range(6):
        y[j] = y0[j]
    for j in range(4):
        rr[j] = rates[j]
    times = np.linspace(0.0, t_end, n_out + 1)
    cdef double[:] tv = times
    cdef cnp.ndarray[cnp.float64_t, ndim=2] states = np.empty((n_out + 1, 6))
    for j in range(6):
        states[0, j] = y[j]
    cdef double scale = fabs(0.5 * (rr[0] + rr[1])) + fabs(rr[2]) + 2.0 * fabs(rr[3])
    h = 0.01 / scale if scale > 0 else t_end
    if h_min <= 0.0:
        h_min = 1e-14 * t_end
    _deriv(y, rr, ks[0])
    for i in range(1, n_out + 1):
        t_target = tv[i]
        while t < t_target:
            if t + h >= t_target:
                h_try = t_target - t
                last = True
            else:
                h_try = h
                last = False
            for s in range(1, 7):
                for j in range(6):
                    tmp[j] = y[j]
                    for m in range(s):
                        tmp[j] += h_try * A[s][m] * ks[m][j]
                _deriv(tmp, rr, ks[s])
            err = 0.0
            for j in range(6):
                y_new[j] = y[j]
                e = 0.0
                for m in range(7):
                    y_new[j] += h_try * B5[m] * ks[m][j]
                    e += E[m] * ks[m][j]
                e *= h_try
                a_ym = fabs(y[j])
                a_yn = fabs(y_new[j])
                sc = atol + rtol * (a_ym if a_ym > a_yn else a_yn)
                if fabs(e) / sc > err:
                    err = fabs(e) / sc
            if err <= 1.0:
                if last:
                    t = t_target
                else:
                    t = t + h_try
                for j in range(6):
                    y[j] = y_new[j]
                    ks[0][j] = ks[6][j]
                n_acc += 1
                if err == 0.0:
                    fac = 5.0
                else:
                    fac = 0.9 * pow(err, -0.2)
                    if fac > 5.0:
                        fac = 5.0
                    if fac < 0.2:
                        fac = 0.2
                if (not last) or fac < 1.0:
                    h = h_try * fac
            else:
                n_rej += 1
                fac = 0.9 * pow(err, -0.2)
                if fac < 0.2:
                    fac = 0.2
                h = h_try * fac
                if h < h_min:
                    raise ConvergenceError(f"step size underflow at t={t:.6e} s (h={h:.3e})")
        for j in range(6):
            states[i, j] = y[j]
    return times, states, n_acc, n_rej


def jacobi_eigh(a, double tol=1e-14, int max_sweeps=100):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] m = np.array(a, dtype=np.float64)
    cdef int n = m.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] v = np.eye(n)
    cdef int p, q, k, sweep
    cdef double apq, theta, t, c, s, mkp, mkq, off, total, norm
    total = 0.0
    for p in range(n):
        for q in range(n):
            total += m[p, q] * m[p, q]
    norm = sqrt(total) if total > 0 else 1.0
    cdef bint done = False
    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n):
            for q in range(n):
                if p != q:
                    off += m[p, q] * m[p, q]
        if sqrt(off) <= tol * norm:
            done = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p, q]
                if apq == 0.0:
                    continue
                theta = (m[q, q] - m[p, p]) / (2.0 * apq)
                t = copysign(1.0, theta) / (fabs(theta) + sqrt(theta * theta + 1.0))
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    mkp = m[k, p]
                    mkq = m[k, q]
                    m[k, p] = c * mkp - s * mkq
                    m[k, q] = s * mkp + c * mkq
                for k in range(n):
                    mkp = m[p, k]
                    mkq = m[q, k]
                    m[p, k] = c * mkp - s * mkq
                    m[q, k] = s * mkp + c * mkq
                m[p, q] = 0.0
                m[q, p] = 0.0
                for k in range(n):
                    mkp = v[k, p]
                    mkq = v[k, q]
                    v[k, p] = c * mkp - s * mkq
                    v[k, q] = s * mkp + c * mkq
    if not done:
        raise ConvergenceError("Jacobi sweeps did not converge")
    w = np.diag(m).copy()
    order = np.argsort(w)
    return w[order], v[:, order]
