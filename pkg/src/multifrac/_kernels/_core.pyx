# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the kernels in ``_fallback.py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport pow, fabs, log, exp, sin, cos, M_PI

cnp.import_array()


def holder_sup(values, times, alpha):
    cdef const double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef const double[::1] t = np.ascontiguousarray(times, dtype=np.float64)
    cdef const double[::1] a = np.ascontiguousarray(alpha, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0], i, j
    cdef double best = 0.0, q, e
    with nogil:
        for i in range(n - 1):
            for j in range(i + 1, n):
                e = a[i] if a[i] > a[j] else a[j]
                q = fabs(v[j] - v[i]) / pow(t[j] - t[i], e)
                if q > best:
                    best = q
    return best


def power_row_weights(beta_rows, double dt, gx_in, gw_in):
    cdef const double[::1] beta = np.ascontiguousarray(beta_rows, dtype=np.float64)
    cdef const double[::1] gx = np.ascontiguousarray(gx_in, dtype=np.float64)
    cdef const double[::1] gw = np.ascontiguousarray(gw_in, dtype=np.float64)
    cdef Py_ssize_t n = beta.shape[0] - 1, Q = gx.shape[0]
    out = np.zeros((n + 1, n + 1))
    cdef double[:, ::1] W = out
    cdef Py_ssize_t i, k, q
    cdef double e, scale, p, val, s_lo, s_hi
    with nogil:
        for i in range(1, n + 1):
            e = beta[i]
            scale = pow(dt, 1.0 - e)
            W[i, i - 1] += scale / (2.0 - e)
            W[i, i] += scale * (1.0 / (1.0 - e) - 1.0 / (2.0 - e))
            for k in range(i - 1):
                p = <double>(i - 1 - k)
                s_lo = 0.0
                s_hi = 0.0
                for q in range(Q):
                    val = gw[q] * pow(p + gx[q], -e) * scale
                    s_lo += val * gx[q]
                    s_hi += val * (1.0 - gx[q])
                W[i, k] += s_lo
                W[i, k + 1] += s_hi
    return out


def varexp_weights(e_nodes_in, c_nodes_in, e_mid_in, c_mid_in, double dt, gx_in, gw_in, bint drop_end):
    cdef const double[:, ::1] e_nodes = np.ascontiguousarray(e_nodes_in, dtype=np.float64)
    cdef const double[:, ::1] c_nodes = np.ascontiguousarray(c_nodes_in, dtype=np.float64)
    cdef const double[::1] e_mid = np.ascontiguousarray(e_mid_in, dtype=np.float64)
    cdef const double[::1] c_mid = np.ascontiguousarray(c_mid_in, dtype=np.float64)
    cdef const double[::1] gx = np.ascontiguousarray(gx_in, dtype=np.float64)
    cdef const double[::1] gw = np.ascontiguousarray(gw_in, dtype=np.float64)
    cdef Py_ssize_t n = e_nodes.shape[0], Q = gx.shape[0]
    out = np.zeros((n + 1, n + 1))
    cdef double[:, ::1] W = out
    cdef Py_ssize_t i, k, q
    cdef double e, scale, p, val, s_lo, s_hi
    with nogil:
        for i in range(1, n + 1):
            k = i - 1
            e = e_mid[k]
            scale = c_mid[k] * pow(dt, 1.0 - e)
            W[i, k] += scale / (2.0 - e)
            if not drop_end:
                W[i, i] += scale * (1.0 / (1.0 - e) - 1.0 / (2.0 - e))
            for k in range(i - 1):
                p = <double>(i - 1 - k)
                s_lo = 0.0
                s_hi = 0.0
                for q in range(Q):
                    val = gw[q] * c_nodes[k, q] * pow((p + gx[q]) * dt, -e_nodes[k, q]) * dt
                    s_lo += val * gx[q]
                    s_hi += val * (1.0 - gx[q])
                W[i, k] += s_lo
                W[i, k + 1] += s_hi
    return out


def volterra_march(G_in, W_in):
    G = np.asarray(G_in, dtype=np.float64)
    squeeze = G.ndim == 1
    cdef const double[:, ::1] G2 = np.ascontiguousarray(np.atleast_2d(G))
    cdef const double[:, ::1] W = np.ascontiguousarray(W_in, dtype=np.float64)
    cdef Py_ssize_t m = G2.shape[0], n1 = G2.shape[1], r, i, j
    out = np.zeros((m, n1))
    cdef double[:, ::1] f = out
    cdef double acc
    with nogil:
        for r in range(m):
            f[r, 0] = G2[r, 0] / (1.0 - W[0, 0])
            for i in range(1, n1):
                acc = 0.0
                for j in range(i):
                    acc += f[r, j] * W[i, j]
                f[r, i] = (G2[r, i] + acc) / (1.0 - W[i, i])
    return out[0] if squeeze else out


cdef inline double _sigmoid(double z) nogil:
    cdef double ez
    if z >= 0:
        return 1.0 / (1.0 + exp(-z))
    ez = exp(z)
    return ez / (1.0 + ez)


cdef inline double _alpha(int code, const double[::1] p, double y) nogil:
    if code == 0:
        return p[0]
    if code == 1:
        return p[0] + p[1] * y
    if code == 2:
        return p[0] + p[1] * sin(2.0 * M_PI * p[2] * y + p[3])
    return p[0] + (p[1] - p[0]) * _sigmoid(p[3] * (y - p[2]))


cdef inline double _alpha_prime(int code, const double[::1] p, double y) nogil:
    cdef double s, w
    if code == 0:
        return 0.0
    if code == 1:
        return p[1]
    if code == 2:
        w = 2.0 * M_PI * p[2]
        return p[1] * w * cos(w * y + p[3])
    s = _sigmoid(p[3] * (y - p[2]))
    return (p[1] - p[0]) * p[3] * s * (1.0 - s)


def kernel_f_pairs(int code, params, s_in, x_in, tau_in, omt_in, wts_in):
    cdef const double[::1] p = np.ascontiguousarray(params, dtype=np.float64)
    cdef const double[::1] s = np.ascontiguousarray(s_in, dtype=np.float64)
    cdef const double[::1] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef const double[::1] tau = np.ascontiguousarray(tau_in, dtype=np.float64)
    cdef const double[::1] omt = np.ascontiguousarray(omt_in, dtype=np.float64)
    cdef const double[::1] w = np.ascontiguousarray(wts_in, dtype=np.float64)
    cdef Py_ssize_t P = s.shape[0], Q = tau.shape[0], r, q
    logit_arr = np.empty(Q)
    cdef double[::1] logit = logit_arr
    for q in range(Q):
        logit[q] = log(tau[q]) - log(omt[q])
    out = np.empty(P)
    cdef double[::1] F = out
    cdef double acc, y, a, da
    with nogil:
        for r in range(P):
            acc = 0.0
            for q in range(Q):
                y = s[r] + tau[q] * (x[r] - s[r])
                da = _alpha_prime(code, p, y)
                if da != 0.0:
                    a = _alpha(code, p, y)
                    acc += w[q] * da * logit[q] * exp(a * logit[q])
            F[r] = acc
    return out
