"""Variable-order Riemann-Liouville integral and its inverse.

The derivative D^alpha g is the solution f of the second-kind Volterra
equation

    f(x) = G0(g)(x) + int_0^x f(s) Fhat(s, x) ds,
    Fhat(s, x) = -F(s, x) / B(alpha(x), 1 - alpha(x)),

where F(s, x) = int_0^1 alpha'(y) logit(tau) (tau / (1 - tau))^alpha(y) dtau
with y = s + tau (x - s), and

    G0(g)(x) = [g(x) M'(x) + J(x)] / B(alpha(x), 1 - alpha(x)),
    M'(x)    = Gamma(alpha(0)) x^-alpha(0)
               - int_0^x u^-alpha(x-u) alpha'(x-u) Gamma(alpha(x-u)) (ln u - psi(alpha(x-u))) du,
    J(x)     = int_0^x alpha(t) Gamma(alpha(t)) (g(x) - g(t)) (x - t)^(-alpha(t) - 1) dt.

On a uniform grid every operator here is a fixed matrix (the schemes are
exactly linear).  Matrices are built once per (alpha, T, n, kernel grid)
and cached.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.interpolate import RectBivariateSpline
from scipy.linalg import solve_triangular

from multifrac import _kernels
from multifrac.errors import (ArgumentError, ConfigError, ConvergenceError, DomainError,
                              PreconditionError)
from multifrac.regularity import RegularityFunction, SampledPath
from multifrac.special import (GRADED, beta_complement, digamma_fn, gamma_fn, gauss_legendre_unit,
                               graded_rule)

SOLVERS = ("volterra_march", "picard_series")
_GAUSS_ORDER = 10


@dataclass(frozen=True)
class DerivativeConfig:
    """Settings for D^alpha.

    ``epsilon`` of None means min(0.1, (1 - alpha^*) / 2), resolved by
    :meth:`validated`.  ``kernel_grid`` is the side of the square grid on
    which F is tabulated before bicubic interpolation onto finer grids.
    """

    n: int = 1024
    epsilon: float | None = None
    p: float = 2.0
    solver: str = "volterra_march"
    series_tol: float = 1e-14
    max_terms: int = 200
    kernel_grid: int = 129

    def __post_init__(self):
        errs = []
        if int(self.n) != self.n or self.n < 2:
            errs.append("n must be an integer >= 2")
        if self.epsilon is not None and not self.epsilon > 0:
            errs.append("epsilon must be > 0")
        if not self.p > 1:
            errs.append("p must be > 1")
        if self.solver not in SOLVERS:
            errs.append(f"solver must be one of {SOLVERS}")
        if not self.series_tol > 0:
            errs.append("series_tol must be > 0")
        if self.max_terms < 1:
            errs.append("max_terms must be >= 1")
        if self.kernel_grid < 8:
            errs.append("kernel_grid must be >= 8")
        if errs:
            raise ConfigError("; ".join(errs))

    def violations(self, alpha: RegularityFunction) -> list[str]:
        lo, hi = alpha.range_bounds()
        eps = self.epsilon if self.epsilon is not None else default_epsilon(alpha)
        a0 = float(alpha(0.0))
        out = []
        if not eps < 1.0 - hi:
            out.append(f"epsilon={eps:g} must be < 1 - alpha^* = {1.0 - hi:g}")
        if not (lo + eps - a0) * self.p > -1.0:
            out.append(f"(alpha_* + epsilon - alpha(0)) * p = {(lo + eps - a0) * self.p:g} must be > -1")
        return out

    def validated(self, alpha: RegularityFunction) -> "DerivativeConfig":
        """Copy with epsilon resolved; ConfigError listing every violation."""
        errs = self.violations(alpha)
        if errs:
            raise ConfigError("; ".join(errs))
        if self.epsilon is None:
            return replace(self, epsilon=default_epsilon(alpha))
        return self

    def to_dict(self) -> dict:
        return {"n": self.n, "epsilon": self.epsilon, "p": self.p, "solver": self.solver,
                "series_tol": self.series_tol, "max_terms": self.max_terms,
                "kernel_grid": self.kernel_grid}


def default_epsilon(alpha: RegularityFunction) -> float:
    return min(0.1, (1.0 - alpha.range_bounds()[1]) / 2.0)


@dataclass(frozen=True)
class OperatorResult:
    path: SampledPath
    diagnostics: dict = field(default_factory=dict)
    solver: str = ""
    term_norms: tuple = ()


# ---------------------------------------------------------------------------
# helpers

def _check_grid(path: SampledPath, alpha: RegularityFunction):
    if not isinstance(path, SampledPath):
        raise ArgumentError("expected a SampledPath")
    if not math.isclose(path.T, alpha.T, rel_tol=1e-12):
        raise ArgumentError(f"grid horizon {path.T} does not match alpha horizon {alpha.T}")


def l2_norm(values, dt: float) -> float:
    """Discrete L2 norm sqrt(dt * sum v^2)."""
    v = np.asarray(values, dtype=float)
    return float(math.sqrt(dt * np.dot(v, v)))


def _check_g0(g: SampledPath):
    scale = max(1.0, float(np.max(np.abs(g.values))))
    if abs(g.values[0]) > 1e-12 * scale:
        raise PreconditionError(f"g(0) must vanish, got {g.values[0]:.3g}")


# ---------------------------------------------------------------------------
# kernel F

def _tau_rule(alpha: RegularityFunction):
    hi = alpha.range_bounds()[1]
    tau, w, _, omt = graded_rule(0.0, 1.0, "both", GRADED, exponent_bound=hi)
    return tau, omt, w


def _kernel_pairs(alpha: RegularityFunction, s, x):
    s = np.ascontiguousarray(s, dtype=float).ravel()
    x = np.ascontiguousarray(x, dtype=float).ravel()
    if alpha.is_constant:
        return np.zeros(s.size)
    tau, omt, w = _tau_rule(alpha)
    return _kernels.kernel_f_pairs(alpha.code, alpha.param_array, s, x, tau, omt, w)


def kernel_F(alpha: RegularityFunction, s, x):
    """F(s, x) for 0 <= s <= x <= T (scalars or broadcastable arrays)."""
    s_arr, x_arr = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(x, dtype=float))
    if np.any(s_arr > x_arr):
        raise ArgumentError("kernel_F needs s <= x")
    slack = 1e-12 * alpha.T
    if np.any(s_arr < -slack) or np.any(x_arr > alpha.T + slack):
        raise DomainError("kernel_F arguments must lie in [0, T]")
    out = _kernel_pairs(alpha, s_arr, x_arr).reshape(s_arr.shape)
    return float(out) if out.ndim == 0 else out


def volterra_kernel(alpha: RegularityFunction, s, x):
    """Fhat(s, x) = -F(s, x) / B(alpha(x), 1 - alpha(x)), the kernel actually solved with."""
    F = kernel_F(alpha, s, x)
    return -F / beta_complement(alpha(np.asarray(x, dtype=float)))


def _neg_log_power_moment(c: float, a: float) -> float:
    # int_0^c (-ln t) t^a dt for a > -1
    return c ** (a + 1.0) / (a + 1.0) * (-math.log(c) + 1.0 / (a + 1.0))


def kernel_F_majorants(alpha: RegularityFunction) -> dict:
    """The four majorants (without the C1-norm factor) bounding int |U| dtau."""
    lo, hi = alpha.range_bounds()
    ln2 = math.log(2.0)
    return {
        "I1": 2.0 ** hi * _neg_log_power_moment(0.5, lo),
        "I2": 2.0 ** hi * ln2 * 0.5 ** (lo + 1.0) / (lo + 1.0),
        "I3": 2.0 ** hi * ln2 * 0.5 ** (1.0 - hi) / (1.0 - hi),
        "I4": _neg_log_power_moment(0.5, -hi),
    }


def kernel_F_bound(alpha: RegularityFunction) -> float:
    """||alpha||_C1 * (I1 + I2 + I3 + I4): a uniform bound on |F(s, x)|."""
    return alpha.c1_norm() * sum(kernel_F_majorants(alpha).values())


def kernel_F_pieces(alpha: RegularityFunction, s: float, x: float) -> dict:
    """Directly integrated pieces of int |U| dtau split as in the majorants.

    I1, I2 use |ln tau| and |ln(1 - tau)| on [0, 1/2]; I3, I4 the same on
    [1/2, 1].  Each is compared against ||alpha||_C1 times its majorant.
    """
    if s > x:
        raise ArgumentError("need s <= x")
    hi = alpha.range_bounds()[1]
    tau, w, _, omt = graded_rule(0.0, 1.0, "both", GRADED, exponent_bound=hi)
    y = s + tau * (x - s)
    da = np.abs(alpha.deriv(y))
    pw = np.exp(alpha(y) * (np.log(tau) - np.log(omt)))
    left = tau < 0.5
    lt, lo_ = np.abs(np.log(tau)), np.abs(np.log(omt))
    return {
        "I1": float(np.sum((w * da * lt * pw)[left])),
        "I2": float(np.sum((w * da * lo_ * pw)[left])),
        "I3": float(np.sum((w * da * lt * pw)[~left])),
        "I4": float(np.sum((w * da * lo_ * pw)[~left])),
    }


# ---------------------------------------------------------------------------
# operator matrices

class OperatorMatrices:
    """Discrete operators on the grid t_k = k T / n.

    ``integral``  I^alpha as a matrix (row 0 zero),
    ``forcing``   G0 as a matrix (row 0 extrapolated linearly),
    ``volterra``  trapezoid weights W with W_ij = dt w_j Fhat(t_j, t_i),
    ``derivative`` (lazy) (Id - W)^-1 forcing.
    """

    def __init__(self, alpha: RegularityFunction, n: int, kernel_grid: int = 129):
        self.alpha = alpha
        self.n = int(n)
        self.T = alpha.T
        self.dt = self.T / self.n
        self.grid = np.linspace(0.0, self.T, self.n + 1)
        self.kernel_grid = int(kernel_grid)
        self.gx, self.gw = gauss_legendre_unit(_GAUSS_ORDER)
        self.a_grid = alpha(self.grid)
        self.integral = self._build_integral()
        self.m_prime = self._build_m_prime()
        self.forcing = self._build_forcing()
        self.fhat_grid, self.kernel_spline = self._build_fhat()
        self.volterra = self._build_volterra()
        self._derivative = None

    def _build_integral(self):
        W = _kernels.power_row_weights(1.0 - self.a_grid, self.dt, self.gx, self.gw)
        W[1:] /= gamma_fn(self.a_grid[1:])[:, None]
        return W

    def _build_m_prime(self):
        alpha = self.alpha
        x = self.grid[1:]
        a0 = float(alpha(0.0))
        out = gamma_fn(a0) * np.power(x, -a0)
        if alpha.is_constant:
            return np.concatenate([[np.inf], out])
        ref = graded_rule(0.0, 1.0, "left", GRADED, exponent_bound=alpha.range_bounds()[1])
        ux, uw = ref[0], ref[1]
        m2 = np.empty_like(x)
        chunk = max(1, 400_000 // ux.size)
        for lo in range(0, x.size, chunk):
            xx = x[lo:lo + chunk, None]
            u = xx * ux[None, :]
            t = np.maximum(xx - u, 0.0)
            a = alpha(t)
            vals = -np.exp(-a * np.log(u)) * alpha.deriv(t) * gamma_fn(a) * (np.log(u) - digamma_fn(a))
            m2[lo:lo + chunk] = (vals * uw[None, :]).sum(axis=1) * x[lo:lo + chunk]
        return np.concatenate([[np.inf], out + m2])

    def _build_forcing(self):
        alpha, dt, n = self.alpha, self.dt, self.n
        # Gauss nodes on panel k at t_{k+1} - gx dt
        t_nodes = (np.arange(1, n + 1)[:, None] - self.gx[None, :]) * dt
        a_nodes = alpha(t_nodes.ravel()).reshape(t_nodes.shape)
        c_nodes = a_nodes * gamma_fn(a_nodes.ravel()).reshape(a_nodes.shape)
        a_mid = alpha((np.arange(n) + 0.5) * dt)
        c_mid = a_mid * gamma_fn(a_mid)
        Wv = _kernels.varexp_weights(a_nodes + 1.0, c_nodes, a_mid + 1.0, c_mid, dt,
                                     self.gx, self.gw, True)
        # J_i(g) = sum_j Wv_ij (g_i - g_j)
        G = -Wv
        G[np.diag_indices(n + 1)] += Wv.sum(axis=1)
        idx = np.arange(1, n + 1)
        G[idx, idx] += self.m_prime[1:]
        G[1:] /= beta_complement(self.a_grid[1:])[:, None]
        G[0] = 2.0 * G[1] - G[2]
        return G

    def _build_fhat(self):
        alpha, n = self.alpha, self.n
        if alpha.is_constant:
            return np.zeros((n + 1, n + 1)), False
        K = self.kernel_grid
        if n + 1 <= K:
            S, X = np.meshgrid(self.grid, self.grid, indexing="ij")
            F = _kernel_pairs(alpha, S.ravel(), X.ravel()).reshape(S.shape)
            spline = False
        else:
            coarse = np.linspace(0.0, self.T, K)
            S, X = np.meshgrid(coarse, coarse, indexing="ij")
            Fc = _kernel_pairs(alpha, S.ravel(), X.ravel()).reshape(S.shape)
            F = RectBivariateSpline(coarse, coarse, Fc, kx=3, ky=3)(self.grid, self.grid)
            spline = True
        # F[s_idx, x_idx] -> Fhat
        return -F / beta_complement(self.a_grid)[None, :], spline

    def _build_volterra(self):
        n = self.n
        W = self.dt * np.tril(self.fhat_grid.T)
        W[0, 0] = 0.0
        W[1:, 0] *= 0.5
        idx = np.arange(1, n + 1)
        W[idx, idx] *= 0.5
        return W

    @property
    def fhat_max(self) -> float:
        return float(np.max(np.abs(np.tril(self.fhat_grid.T))))

    @property
    def derivative(self) -> np.ndarray:
        """(Id - W)^-1 G0 with row 0 replaced by linear extrapolation."""
        if self._derivative is None:
            A = np.eye(self.n + 1) - self.volterra
            D = solve_triangular(A, self.forcing, lower=True)
            D[0] = 2.0 * D[1] - D[2]
            self._derivative = D
        return self._derivative


@lru_cache(maxsize=6)
def operator_matrices(alpha: RegularityFunction, n: int, kernel_grid: int = 129) -> OperatorMatrices:
    return OperatorMatrices(alpha, n, kernel_grid)


def _ops_for(path: SampledPath, alpha: RegularityFunction, cfg: DerivativeConfig | None):
    _check_grid(path, alpha)
    kg = cfg.kernel_grid if cfg is not None else DerivativeConfig.kernel_grid
    return operator_matrices(alpha, path.n, kg)


# ---------------------------------------------------------------------------
# public operators

def mf_integral(f: SampledPath, alpha: RegularityFunction) -> SampledPath:
    """I^alpha f on the grid of f (value 0 at t = 0)."""
    ops = _ops_for(f, alpha, None)
    return SampledPath(f.grid, ops.integral @ f.values)


def g0_path(g: SampledPath, alpha: RegularityFunction, cfg: DerivativeConfig | None = None) -> SampledPath:
    """G0(g) on the grid; the value at 0 is a linear extrapolation."""
    _check_g0(g)
    ops = _ops_for(g, alpha, cfg)
    return SampledPath(g.grid, ops.forcing @ g.values)


def g0(g: SampledPath, alpha: RegularityFunction, x: float, cfg: DerivativeConfig | None = None) -> float:
    """G0(g)(x) at a grid point x in (0, T]."""
    if not x > 0:
        raise DomainError("G0 is evaluated on (0, T] only")
    _check_g0(g)
    k = int(round(x / g.dt))
    if k > g.n or abs(k * g.dt - x) > 1e-9 * max(1.0, x):
        raise ArgumentError("x must be a grid point of g")
    ops = _ops_for(g, alpha, cfg)
    return float(ops.forcing[k] @ g.values)


def _diagnostics(ops: OperatorMatrices, f, terms: int) -> dict:
    return {
        "series_terms": float(terms),
        "max_kernel_value": ops.fhat_max,
        "quadrature_panels": float(ops.n),
        "kernel_grid": float(ops.kernel_grid if ops.kernel_spline else ops.n + 1),
        "kernel_interpolated": float(ops.kernel_spline),
        "g0_extrapolated_at_zero": 1.0,
        "l2_norm": l2_norm(f, ops.dt),
    }


def _prepare(g, alpha, cfg):
    cfg = (cfg or DerivativeConfig(n=g.n)).validated(alpha)
    _check_g0(g)
    ops = _ops_for(g, alpha, cfg)
    return cfg, ops


def mf_derivative(g: SampledPath, alpha: RegularityFunction, cfg: DerivativeConfig | None = None) -> OperatorResult:
    """D^alpha g, with the solver named in ``cfg``."""
    cfg, ops = _prepare(g, alpha, cfg)
    if cfg.solver == "picard_series":
        return mf_derivative_series(g, alpha, cfg)
    G = ops.forcing @ g.values
    f = _kernels.volterra_march(G, ops.volterra)
    f[0] = 2.0 * f[1] - f[2]
    return OperatorResult(SampledPath(g.grid, f), _diagnostics(ops, f, 1), "volterra_march")


def mf_derivative_series(g: SampledPath, alpha: RegularityFunction,
                         cfg: DerivativeConfig | None = None) -> OperatorResult:
    """D^alpha g as G0(g) + V G0(g) + V^2 G0(g) + ..., V the discrete Volterra operator."""
    cfg, ops = _prepare(g, alpha, cfg)
    term = ops.forcing @ g.values
    total = term.copy()
    ref = l2_norm(term, ops.dt)
    norms = [ref]
    stop = cfg.series_tol * max(ref, 1e-300)
    m = 1
    while norms[-1] > stop and ref > 0:
        if m >= cfg.max_terms:
            diag = _diagnostics(ops, total, m)
            raise ConvergenceError(f"series did not converge in {cfg.max_terms} terms", diag)
        term = ops.volterra @ term
        total += term
        norms.append(l2_norm(term, ops.dt))
        m += 1
    total[0] = 2.0 * total[1] - total[2]
    return OperatorResult(SampledPath(g.grid, total), _diagnostics(ops, total, m),
                          "picard_series", tuple(norms))


# ---------------------------------------------------------------------------
# callable forms (reference computations)

def _inc(g, x, u):
    if hasattr(g, "increment"):
        return g.increment(x, u)
    from multifrac.catalog import secant_increment
    return secant_increment(g, x, u)


def raw_integral(g, alpha: RegularityFunction, x: float) -> float:
    """A(x) = int_0^x Gamma(alpha(t)) g(t) (x - t)^-alpha(t) dt by the graded rule."""
    if not 0 < x <= alpha.T * (1 + 1e-12):
        raise DomainError("need 0 < x <= T")
    t, w, _, u = graded_rule(0.0, x, "both", GRADED, exponent_bound=alpha.range_bounds()[1])
    a = alpha(t)
    return float(np.dot(w, gamma_fn(a) * np.asarray(g(t), dtype=float) * np.exp(-a * np.log(u))))


def g0_decomposed(g, alpha: RegularityFunction, x: float) -> dict:
    """Pieces of d/dx A(x): g(x) M1, g(x) M2 and the increment integral J."""
    if not 0 < x <= alpha.T * (1 + 1e-12):
        raise DomainError("need 0 < x <= T")
    hi = alpha.range_bounds()[1]
    gx = float(np.asarray(g(np.array([x])))[0])
    a0 = float(alpha(0.0))
    m1 = gamma_fn(a0) * x ** (-a0)
    m2 = 0.0
    if not alpha.is_constant:
        u, w, _, _ = graded_rule(0.0, x, "left", GRADED, exponent_bound=hi)
        t = np.maximum(x - u, 0.0)
        a = alpha(t)
        m2 = float(np.dot(w, -np.exp(-a * np.log(u)) * alpha.deriv(t) * gamma_fn(a)
                          * (np.log(u) - digamma_fn(a))))
    t, w, _, u = graded_rule(0.0, x, "both", GRADED, exponent_bound=hi)
    a = alpha(t)
    J = float(np.dot(w, a * gamma_fn(a) * _inc(g, x, u) * np.exp(-(a + 1.0) * np.log(u))))
    return {"gM1": gx * m1, "gM2": gx * m2, "J": J, "B": beta_complement(float(alpha(x)))}


def g0_reference(g, alpha: RegularityFunction, x: float) -> float:
    """G0(g)(x) for a callable g, from the decomposition with graded quadrature."""
    p = g0_decomposed(g, alpha, x)
    return (p["gM1"] + p["gM2"] + p["J"]) / p["B"]


def appendix_identity_check(g, alpha: RegularityFunction, x: float, delta: float = 1e-4):
    """(lhs, rhs, gap): centred difference of A against the decomposition."""
    if not (x - delta > 0 and x + delta <= alpha.T * (1 + 1e-12)):
        raise ArgumentError("need 0 < x - delta and x + delta <= T")
    if not delta > 0:
        raise ArgumentError("delta must be positive")
    g0v = float(np.asarray(g(np.array([0.0])))[0])
    if abs(g0v) > 1e-14:
        raise ArgumentError("g(0) must vanish")
    probe = np.asarray(g(np.linspace(0.0, alpha.T, 33)), dtype=float)
    if not np.any(probe != 0.0):
        return 0.0, 0.0, 0.0
    lhs = (raw_integral(g, alpha, x + delta) - raw_integral(g, alpha, x - delta)) / (2.0 * delta)
    p = g0_decomposed(g, alpha, x)
    rhs = p["gM1"] + p["gM2"] + p["J"]
    return lhs, rhs, abs(lhs - rhs)


def richardson_orders(deltas, gaps) -> list[float]:
    """Observed orders log(gap_k / gap_{k+1}) / log(delta_k / delta_{k+1})."""
    out = []
    for k in range(len(deltas) - 1):
        if gaps[k + 1] <= 0 or gaps[k] <= 0:
            out.append(float("inf"))
        else:
            out.append(math.log(gaps[k] / gaps[k + 1]) / math.log(deltas[k] / deltas[k + 1]))
    return out
