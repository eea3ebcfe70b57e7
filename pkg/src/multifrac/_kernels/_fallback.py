"""Pure numpy implementations of the hot kernels.

Every function here has a twin with the same signature in ``_core.pyx``.
The two are kept numerically equivalent (same panel ordering, same Gauss
nodes); the test suite checks agreement to 1e-12 relative.
"""
import numpy as np


def holder_sup(values, times, alpha):
    v = np.ascontiguousarray(values, dtype=float)
    t = np.ascontiguousarray(times, dtype=float)
    a = np.ascontiguousarray(alpha, dtype=float)
    best = 0.0
    for i in range(v.size - 1):
        dv = np.abs(v[i + 1:] - v[i])
        dt = t[i + 1:] - t[i]
        q = dv / np.power(dt, np.maximum(a[i], a[i + 1:]))
        if q.size:
            best = max(best, float(q.max()))
    return best


def power_row_weights(beta_rows, dt, gx, gw):
    """Row i: product weights for int_0^{t_i} f(t) (t_i - t)^(-beta_i) dt.

    The exponent is constant along each row.  Returns an (n+1, n+1)
    lower-triangular matrix; row 0 is zero.
    """
    beta_rows = np.asarray(beta_rows, dtype=float)
    n = beta_rows.size - 1
    W = np.zeros((n + 1, n + 1))
    for i in range(1, n + 1):
        e = beta_rows[i]
        scale = dt ** (1.0 - e)
        W[i, i - 1] += scale / (2.0 - e)
        W[i, i] += scale * (1.0 / (1.0 - e) - 1.0 / (2.0 - e))
        if i > 1:
            p = np.arange(i - 1, 0, -1, dtype=float)  # p for panels k = 0 .. i-2
            vals = gw[None, :] * np.power(p[:, None] + gx[None, :], -e) * scale
            W[i, : i - 1] += (vals * gx[None, :]).sum(axis=1)
            W[i, 1:i] += (vals * (1.0 - gx[None, :])).sum(axis=1)
    return W


def varexp_weights(e_nodes, c_nodes, e_mid, c_mid, dt, gx, gw, drop_end):
    """Row i: weights for int_0^{t_i} c(t) X(t) (t_i - t)^(-e(t)) dt.

    X is interpolated piecewise-linearly.  Panel k has Gauss nodes at
    t_{k+1} - gx * dt with exponent/coefficient given by ``e_nodes[k]`` and
    ``c_nodes[k]``; the panel ending at t_i is done in closed form with the
    midpoint values ``e_mid[k]``, ``c_mid[k]``.  With ``drop_end`` the
    weight on X(t_i) from that panel is omitted (X(t_i) = 0 is assumed,
    which lets the exponent exceed 1).
    """
    e_nodes = np.asarray(e_nodes, dtype=float)
    c_nodes = np.asarray(c_nodes, dtype=float)
    n = e_nodes.shape[0]
    W = np.zeros((n + 1, n + 1))
    for i in range(1, n + 1):
        k = i - 1
        e = e_mid[k]
        scale = c_mid[k] * dt ** (1.0 - e)
        W[i, k] += scale / (2.0 - e)
        if not drop_end:
            W[i, i] += scale * (1.0 / (1.0 - e) - 1.0 / (2.0 - e))
        if i > 1:
            p = np.arange(i - 1, 0, -1, dtype=float)
            u = (p[:, None] + gx[None, :]) * dt
            vals = gw[None, :] * c_nodes[: i - 1] * np.power(u, -e_nodes[: i - 1]) * dt
            W[i, : i - 1] += (vals * gx[None, :]).sum(axis=1)
            W[i, 1:i] += (vals * (1.0 - gx[None, :])).sum(axis=1)
    return W


def volterra_march(G, W):
    """Solve f_i = G_i + sum_{j<=i} W_ij f_j row by row (rhs may be 2-D)."""
    G = np.asarray(G, dtype=float)
    squeeze = G.ndim == 1
    G2 = np.atleast_2d(G)
    m, n1 = G2.shape
    f = np.zeros_like(G2)
    f[:, 0] = G2[:, 0] / (1.0 - W[0, 0])
    for i in range(1, n1):
        acc = G2[:, i] + f[:, :i] @ W[i, :i]
        f[:, i] = acc / (1.0 - W[i, i])
    return f[0] if squeeze else f


def _alpha(code, p, y):
    if code == 0:
        return np.full_like(y, p[0])
    if code == 1:
        return p[0] + p[1] * y
    if code == 2:
        return p[0] + p[1] * np.sin(2.0 * np.pi * p[2] * y + p[3])
    z = p[3] * (y - p[2])
    s = np.where(z >= 0, 1.0 / (1.0 + np.exp(-np.abs(z))), np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))))
    return p[0] + (p[1] - p[0]) * s


def _alpha_prime(code, p, y):
    if code == 0:
        return np.zeros_like(y)
    if code == 1:
        return np.full_like(y, p[1])
    if code == 2:
        w = 2.0 * np.pi * p[2]
        return p[1] * w * np.cos(w * y + p[3])
    z = p[3] * (y - p[2])
    s = np.where(z >= 0, 1.0 / (1.0 + np.exp(-np.abs(z))), np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))))
    return (p[1] - p[0]) * p[3] * s * (1.0 - s)


def kernel_f_pairs(code, params, s, x, tau, one_minus_tau, wts):
    """F(s, x) = int_0^1 alpha'(y) logit(tau) (tau/(1-tau))^alpha(y) dtau, y = s + tau (x - s)."""
    s = np.asarray(s, dtype=float)
    x = np.asarray(x, dtype=float)
    logit = np.log(tau) - np.log(one_minus_tau)
    out = np.empty(s.size)
    chunk = max(1, 2_000_000 // max(1, tau.size))
    for lo in range(0, s.size, chunk):
        ss = s[lo:lo + chunk, None]
        xx = x[lo:lo + chunk, None]
        y = ss + tau[None, :] * (xx - ss)
        a = _alpha(code, params, y)
        da = _alpha_prime(code, params, y)
        out[lo:lo + chunk] = (wts[None, :] * da * logit[None, :] * np.exp(a * logit[None, :])).sum(axis=1)
    return out
