# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled chain kernels; see ``_pykernels`` for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, tanh, fabs, fmax, nextafter, INFINITY

cnp.import_array()

DEF SCALAR_TOL = 1e-13


cdef void _merge(double[:, ::1] x, double[::1] count, double[::1] mean,
                 double[:, ::1] m2, double[::1] mb, double[::1] delta) noexcept nogil:
    cdef Py_ssize_t N = x.shape[0], n = x.shape[1], i, j, k
    cdef double na = count[0], nb = <double>N, tot
    for j in range(n):
        mb[j] = 0.0
    for i in range(N):
        for j in range(n):
            mb[j] += x[i, j]
    for j in range(n):
        mb[j] /= nb
    tot = na + nb
    for j in range(n):
        delta[j] = mb[j] - mean[j]
    for i in range(N):
        for j in range(n):
            for k in range(n):
                m2[j, k] += (x[i, j] - mb[j]) * (x[i, k] - mb[k])
    for j in range(n):
        for k in range(n):
            m2[j, k] += delta[j] * delta[k] * (na * nb / tot)
        mean[j] += delta[j] * (nb / tot)
    count[0] = tot


def affine_chain(double[:, ::1] x, const double[::1] mu, const double[:, ::1] A,
                 const double[:, ::1] B, const double[:, :, ::1] noise,
                 const unsigned char[::1] accumulate, const long long[::1] record,
                 double[:, :, ::1] traj, double[::1] count, double[::1] mean,
                 double[:, ::1] m2, C=None, D=None, E=None):
    cdef Py_ssize_t S = noise.shape[0], N = x.shape[0], n = x.shape[1]
    cdef Py_ssize_t s, i, j, k
    cdef bint check = C is not None
    cdef double[:, ::1] Cm, Dm, Em
    cdef double[::1] y = np.empty(n), new = np.empty(n)
    cdef double[::1] mb = np.empty(n), delta = np.empty(n)
    cdef double acc, r2, worst = 0.0
    if check:
        Cm = np.ascontiguousarray(C, dtype=np.float64)
        Dm = np.ascontiguousarray(D, dtype=np.float64)
        Em = np.ascontiguousarray(E, dtype=np.float64)
    with nogil:
        for s in range(S):
            for i in range(N):
                for j in range(n):
                    y[j] = x[i, j] - mu[j]
                for j in range(n):
                    acc = 0.0
                    for k in range(n):
                        acc = acc + A[j, k] * y[k]
                    for k in range(n):
                        acc = acc + B[j, k] * noise[s, i, k]
                    new[j] = acc
                if check:
                    r2 = 0.0
                    for j in range(n):
                        acc = 0.0
                        for k in range(n):
                            acc = acc + Cm[j, k] * new[k] - Dm[j, k] * y[k] - Em[j, k] * noise[s, i, k]
                        r2 = r2 + acc * acc
                    worst = fmax(worst, sqrt(r2))
                for j in range(n):
                    x[i, j] = mu[j] + new[j]
            if accumulate[s]:
                _merge(x, count, mean, m2, mb, delta)
            if record[s] >= 0:
                for i in range(N):
                    for j in range(n):
                        traj[record[s], i, j] = x[i, j]
    return worst


cdef int _solve_scalar(double r, double eps, double a_sq, double* out) noexcept nogil:
    # (1 + eps) v - eps a_sq tanh(v) = r, bracketed Newton with bisection fallback
    cdef double slope_min = 1.0 + eps - eps * a_sq
    cdef double b1 = r / (1.0 + eps), b2 = r / slope_min
    cdef double lo = b1 if b1 < b2 else b2
    cdef double hi = b2 if b1 < b2 else b1
    cdef double v = 0.5 * (lo + hi), g, dg, vn, ch, scale = 1.0 + fabs(r)
    cdef int it
    for it in range(200):
        g = (1.0 + eps) * v - eps * a_sq * tanh(v) - r
        if fabs(g) <= SCALAR_TOL * scale:
            out[0] = v
            return 0
        if g < 0:
            lo = v
        else:
            hi = v
        ch = tanh(v)
        dg = 1.0 + eps - eps * a_sq * (1.0 - ch * ch)
        vn = v - g / dg
        if not (vn > lo and vn < hi):
            vn = 0.5 * (lo + hi)
        v = vn
        if hi - lo <= 4.0 * (nextafter(fmax(fabs(lo), fabs(hi)), INFINITY) - fmax(fabs(lo), fabs(hi))):
            out[0] = v
            return 0
    out[0] = v
    return 1


def mixture_chain(double[:, ::1] x, const double[::1] a, double eps, int scheme,
                  const double[:, :, ::1] noise, const unsigned char[::1] accumulate,
                  const long long[::1] record, double[:, :, ::1] traj,
                  double[::1] count, double[::1] mean, double[:, ::1] m2):
    cdef Py_ssize_t S = noise.shape[0], N = x.shape[0], n = x.shape[1]
    cdef Py_ssize_t s, i, j
    cdef double a_sq = 0.0, t, p, v, r2, acc, worst = 0.0
    cdef double c2 = sqrt(2.0 * eps), c4 = sqrt(4.0 * eps)
    cdef double[::1] w = np.empty(n)
    cdef double[::1] mb = np.empty(n), delta = np.empty(n)
    cdef int failed = 0
    for j in range(n):
        a_sq += a[j] * a[j]
    if scheme == 1 and 1.0 + eps - eps * a_sq <= 0:
        raise ValueError("scalar map is not increasing: need eps*|a|^2 < 1 + eps")
    with nogil:
        for s in range(S):
            for i in range(N):
                p = 0.0
                for j in range(n):
                    p = p + x[i, j] * a[j]
                t = tanh(p)
                if scheme == 0:
                    for j in range(n):
                        x[i, j] = (1.0 - eps) * x[i, j] + eps * t * a[j] + c2 * noise[s, i, j]
                    continue
                p = 0.0
                for j in range(n):
                    w[j] = (1.0 - eps) * x[i, j] + eps * t * a[j] + c4 * noise[s, i, j]
                    p = p + w[j] * a[j]
                if a_sq == 0.0:
                    v = 0.0
                elif _solve_scalar(p, eps, a_sq, &v) != 0:
                    failed = 1
                t = tanh(v)
                p = 0.0
                for j in range(n):
                    x[i, j] = (w[j] + eps * t * a[j]) / (1.0 + eps)
                    p = p + x[i, j] * a[j]
                t = tanh(p)
                r2 = 0.0
                for j in range(n):
                    acc = (1.0 + eps) * x[i, j] - eps * t * a[j] - w[j]
                    r2 = r2 + acc * acc
                worst = fmax(worst, sqrt(r2))
            if accumulate[s]:
                _merge(x, count, mean, m2, mb, delta)
            if record[s] >= 0:
                for i in range(N):
                    for j in range(n):
                        traj[record[s], i, j] = x[i, j]
    if failed:
        from .prox import ProxConvergenceError
        raise ProxConvergenceError("scalar root-finder did not converge", worst)
    return worst
