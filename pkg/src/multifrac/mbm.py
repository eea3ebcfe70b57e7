"""Riemann-Liouville multifractional Brownian motion.

    B^h_t = 1/Gamma(h_t + 1/2) int_0^t (t - s)^(h_t - 1/2) dB_s

Covariance, for s <= t,

    R(t, s) = 1/(Gamma(h_t + 1/2) Gamma(h_s + 1/2)) int_0^s (t - r)^(h_t - 1/2) (s - r)^(h_s - 1/2) dr.

Randomness comes from :class:`GaussianDriver`.  Every path index owns an
independent PCG64 stream derived from (seed, stream tag, index), and work
is split into fixed-size blocks, so results do not depend on the number
of threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import hyp2f1

from multifrac.errors import ArgumentError, ConfigError, NumericError
from multifrac.regularity import RegularityFunction, SampledPath
from multifrac.special import GRADED, gamma_fn, graded_rule, power_singular_integral

BLOCK = 256
JITTER_BUDGET = 1e-10

# substream tags
STREAM_BROWNIAN = 0
STREAM_CHOLESKY = 1
STREAM_RESIDUAL = 2


class GaussianDriver:
    """Seeded source of Gaussian variates with one substream per path.

    ``m`` is the number of fine-grid intervals on [0, T] used by
    :meth:`increments`.
    """

    def __init__(self, seed: int, T: float = 1.0, m: int = 1024, threads: int = 1):
        if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or seed < 0:
            raise ArgumentError("seed must be a non-negative integer")
        if m < 1:
            raise ArgumentError("fine grid needs m >= 1")
        if threads < 1:
            raise ArgumentError("threads must be >= 1")
        self.seed = int(seed)
        self.T = float(T)
        self.m = int(m)
        self.threads = int(threads)

    @property
    def dt(self) -> float:
        return self.T / self.m

    def rng(self, index: int, stream: int = STREAM_BROWNIAN) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(int(stream), int(index)))
        return np.random.Generator(np.random.PCG64(ss))

    def normals(self, index: int, size: int, stream: int = STREAM_BROWNIAN) -> np.ndarray:
        return self.rng(index, stream).standard_normal(size)

    def increments(self, index: int, stream: int = STREAM_BROWNIAN) -> np.ndarray:
        """Brownian increments on the fine grid, variance T/m each."""
        return math.sqrt(self.dt) * self.normals(index, self.m, stream)

    def normals_block(self, start: int, stop: int, size: int, stream: int) -> np.ndarray:
        return np.stack([self.normals(k, size, stream) for k in range(start, stop)])

    def map_blocks(self, func, npaths: int, offset: int = 0):
        """Apply func(start, stop) to fixed blocks of path indices; results in index order."""
        starts = list(range(offset, offset + npaths, BLOCK))
        spans = [(a, min(a + BLOCK, offset + npaths)) for a in starts]
        if self.threads == 1 or len(spans) == 1:
            return [func(a, b) for a, b in spans]
        with ThreadPoolExecutor(max_workers=self.threads) as ex:
            return list(ex.map(lambda ab: func(*ab), spans))

    def to_dict(self) -> dict:
        return {"seed": self.seed, "T": self.T, "m": self.m}


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    grid: np.ndarray
    matrix: np.ndarray
    stderr: np.ndarray | None = None
    jitter: float = 0.0
    _factor: list = field(default_factory=list, repr=False)

    @property
    def n(self) -> int:
        return self.grid.size - 1

    def factor(self) -> np.ndarray:
        """Lower Cholesky factor of the block without t = 0 (jitter applied)."""
        if not self._factor:
            L, jit = _cholesky_with_jitter(self.matrix[1:, 1:])
            object.__setattr__(self, "jitter", jit)
            self._factor.append(L)
        return self._factor[0]


def _cholesky_with_jitter(C: np.ndarray):
    tr = float(np.trace(C))
    if tr <= 0:
        raise NumericError("covariance has non-positive trace")
    jit = 0.0
    eye = np.eye(C.shape[0])
    while True:
        try:
            return np.linalg.cholesky(C + jit * eye), jit
        except np.linalg.LinAlgError:
            jit = 1e-16 * tr if jit == 0.0 else jit * 10.0
            if jit > JITTER_BUDGET * tr:
                raise NumericError("covariance not positive definite within the jitter budget")


def _residual_factor(cov: np.ndarray, explained: np.ndarray):
    """Cholesky factor of cov - explained without the t = 0 row; zero when it vanishes."""
    resid = cov - explained
    resid = 0.5 * (resid + resid.T)[1:, 1:]
    if np.abs(resid).max() <= 1e-13 * np.abs(cov).max():
        # kernel constant on each panel (h = 1/2): nothing left to sample
        return np.zeros_like(resid), 0.0
    return _cholesky_with_jitter(resid)


# ---------------------------------------------------------------------------
# covariance

def covariance_oracle(h: RegularityFunction, s: float, t: float) -> float:
    """R^h(t, s) from the defining integral."""
    if s > t:
        s, t = t, s
    if s < 0 or t > h.T * (1 + 1e-12):
        raise ArgumentError("times must lie in [0, T]")
    if s == 0.0:
        return 0.0
    hs, ht = float(h(s)), float(h(t))
    norm = gamma_fn(ht + 0.5) * gamma_fn(hs + 0.5)
    if s == t:
        return s ** (hs + ht) / (hs + ht) / norm
    d = t - s

    def f(r):
        return np.power(d + (s - r), ht - 0.5)

    val = power_singular_integral(f, 0.5 - hs, s, GRADED)
    return val / norm


def covariance_hypergeometric(h: RegularityFunction, s: float, t: float) -> float:
    """Closed form with argument s/t (s <= t)."""
    if s > t:
        s, t = t, s
    if s == 0.0:
        return 0.0
    hs, ht = float(h(s)), float(h(t))
    val = (t ** (ht - 0.5) * s ** (hs + 0.5) / (gamma_fn(ht + 0.5) * gamma_fn(hs + 1.5))
           * hyp2f1(1.0, 0.5 - ht, hs + 1.5, s / t))
    return float(val)


def covariance_matrix(h: RegularityFunction, grid) -> CovarianceMatrix:
    """R^h on all grid pairs (row and column for t = 0 are zero)."""
    grid = np.asarray(grid, dtype=float)
    if grid[0] != 0.0:
        raise ArgumentError("grid must start at 0")
    n1 = grid.size
    hv = h(grid)
    g = gamma_fn(hv + 0.5)
    C = np.zeros((n1, n1))
    lo, hi = h.range_bounds()
    ref_t, ref_w, _, ref_u = graded_rule(0.0, 1.0, "both", GRADED, exponent_bound=max(0.5 - lo, 0.5))
    for j in range(1, n1):
        s = grid[j]
        C[j, j] = s ** (2 * hv[j]) / (2 * hv[j]) / (g[j] * g[j])
        i = np.arange(j + 1, n1)
        if i.size == 0:
            continue
        u = s * ref_u  # distance r -> s
        d = grid[i] - s
        base = d[:, None] + u[None, :]
        vals = np.exp((hv[i, None] - 0.5) * np.log(base)) * np.exp((hv[j] - 0.5) * np.log(u))[None, :]
        C[i, j] = s * (vals @ ref_w) / (g[i] * g[j])
        C[j, i] = C[i, j]
    tr = float(np.trace(C))
    ev = np.linalg.eigvalsh(C[1:, 1:])
    if ev.min() < -JITTER_BUDGET * tr:
        raise NumericError(f"covariance indefinite: min eigenvalue {ev.min():.3g}")
    return CovarianceMatrix(grid, C)


# ---------------------------------------------------------------------------
# sampling

@dataclass(frozen=True, eq=False)
class PathBundle:
    """npaths x (n+1) array of paths on a common grid."""

    grid: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, k) -> SampledPath:
        return SampledPath(self.grid, self.values[k])

    def __iter__(self):
        return (self[k] for k in range(len(self)))


def kernel_weights(h: RegularityFunction, out_grid, fine_dt: float, m: int) -> np.ndarray:
    """W[i, j] with B^h(t_i) = sum_j W[i, j] dB_j on the fine grid.

    W[i, j] = (1/dt) int_{s_j}^{s_{j+1}} (t_i - s)^(h_i - 1/2) ds / Gamma(h_i + 1/2), zero for s_j >= t_i.
    """
    t = np.asarray(out_grid, dtype=float)
    hv = h(t)
    e1 = hv + 0.5
    s = np.arange(m + 1) * fine_dt
    W = np.zeros((t.size, m))
    for i in range(1, t.size):
        k = int(round(t[i] / fine_dt))
        hi_d = t[i] - s[:k]
        lo_d = t[i] - s[1:k + 1]
        lo_d[-1] = 0.0
        W[i, :k] = (np.power(hi_d, e1[i]) - np.power(lo_d, e1[i])) / (e1[i] * fine_dt)
        W[i] /= gamma_fn(e1[i])
    return W


def kernel_bias(h: RegularityFunction, grid, m: int) -> np.ndarray:
    """Covariance of the raw kernel scheme minus the exact covariance."""
    grid = np.asarray(grid, dtype=float)
    W = kernel_weights(h, grid, h.T / m, m)
    return (h.T / m) * W @ W.T - covariance_matrix(h, grid).matrix


def sample_rlmbm(h: RegularityFunction, grid, driver: GaussianDriver, npaths: int,
                 method: str = "cholesky", offset: int = 0, residual: bool = True) -> PathBundle:
    """Sample B^h on ``grid`` for path indices offset .. offset + npaths - 1.

    ``cholesky`` draws the exact finite-dimensional law.  ``kernel`` forms
    sum_j W[i, j] dB_j from fine-grid Brownian increments; with ``residual``
    the part of B^h not explained by the fine increments, a Gaussian vector
    with covariance C - dt W W^T independent of them, is added so the law is
    exact.  Without it the scheme underestimates the variance by
    O(dt^(2 h_*)).
    """
    grid = np.asarray(grid, dtype=float)
    n = grid.size - 1
    if npaths < 1:
        raise ArgumentError("npaths must be >= 1")
    if not math.isclose(grid[-1], h.T, rel_tol=1e-12):
        raise ArgumentError("grid must span [0, T] of h")
    if method == "cholesky":
        L = covariance_matrix(h, grid)
        F = L.factor()

        def block(a, b):
            z = driver.normals_block(a, b, n, STREAM_CHOLESKY)
            out = np.zeros((b - a, n + 1))
            out[:, 1:] = z @ F.T
            return out
        meta = {"jitter": L.jitter}
    elif method == "kernel":
        r = driver.m / n
        if driver.m < 4 * n or abs(r - round(r)) > 1e-9 or not math.isclose(driver.T, h.T):
            raise ConfigError(f"kernel method needs a fine grid that is a multiple >= 4 of n={n} (got m={driver.m})")
        W = kernel_weights(h, grid, driver.dt, driver.m)
        Lr, jit = None, 0.0
        if residual:
            Lr, jit = _residual_factor(covariance_matrix(h, grid).matrix, driver.dt * W @ W.T)

        def block(a, b):
            dB = math.sqrt(driver.dt) * driver.normals_block(a, b, driver.m, STREAM_BROWNIAN)
            out = dB @ W.T
            if Lr is not None:
                out[:, 1:] += driver.normals_block(a, b, n, STREAM_RESIDUAL) @ Lr.T
            return out
        meta = {"fine_m": driver.m, "residual": residual, "jitter": jit}
    else:
        raise ArgumentError(f"unknown method {method!r}")
    vals = np.concatenate(driver.map_blocks(block, npaths, offset))
    vals[:, 0] = 0.0
    meta.update({"method": method, "seed": driver.seed, "npaths": npaths, "offset": offset})
    return PathBundle(grid, vals, meta)


class JointSampler:
    """Exact joint law of (dB, B^h) on a uniform grid with n intervals.

    B^h = W dB + R where W[i, j] = (1/dt) int over panel j of the kernel
    (so Cov(B^h_i, dB_j) = dt W[i, j]) and R ~ N(0, C - dt W W^T) is
    independent of dB.  Row i of W only involves panels before t_i.
    """

    def __init__(self, h: RegularityFunction, n: int):
        self.h = h
        self.n = int(n)
        self.grid = np.linspace(0.0, h.T, self.n + 1)
        self.dt = h.T / self.n
        cov = covariance_matrix(h, self.grid)
        self.W = kernel_weights(h, self.grid, self.dt, self.n)
        self.resid_factor, self.jitter = _residual_factor(cov.matrix, self.dt * self.W @ self.W.T)

    def sample(self, driver: GaussianDriver, start: int, stop: int):
        """(dB, Bh) arrays of shapes (k, n) and (k, n+1) for path indices start..stop-1."""
        n = self.n
        dB = math.sqrt(self.dt) * driver.normals_block(start, stop, n, STREAM_BROWNIAN)
        z = driver.normals_block(start, stop, n, STREAM_RESIDUAL)
        Bh = dB @ self.W.T
        Bh[:, 1:] += z @ self.resid_factor.T
        Bh[:, 0] = 0.0
        return dB, Bh


# ---------------------------------------------------------------------------
# statistics

def _as_values(paths):
    vals = paths.values if isinstance(paths, PathBundle) else np.asarray(
        [p.values if isinstance(p, SampledPath) else p for p in paths], dtype=float)
    if vals.ndim != 2:
        raise ArgumentError("paths must form a 2-D array")
    return vals


def empirical_covariance(paths, grid=None) -> CovarianceMatrix:
    """Unbiased sample covariance with per-entry CLT standard errors."""
    X = _as_values(paths)
    N = X.shape[0]
    if N < 100:
        raise ArgumentError("need at least 100 paths")
    if not np.all(np.isfinite(X)):
        raise ArgumentError("paths contain non-finite values")
    if grid is None:
        grid = paths.grid if isinstance(paths, PathBundle) else np.arange(X.shape[1], dtype=float)
    Y = X - X.mean(axis=0)
    C = Y.T @ Y / (N - 1)
    # Var of the product Y_i Y_j estimated from the sample
    sq = (Y * Y).T @ (Y * Y) / N
    se = np.sqrt(np.maximum(sq - (Y.T @ Y / N) ** 2, 0.0) / N)
    return CovarianceMatrix(np.asarray(grid, dtype=float), C, se)


def covariance_gate(emp: CovarianceMatrix, ref: np.ndarray, nsigma: float = 3.0):
    """(pass, max |z|) for entrywise |emp - ref| <= nsigma * se (exact match where se = 0)."""
    diff = np.abs(emp.matrix - ref)
    se = emp.stderr
    ok_zero = diff[se == 0] <= 1e-12
    z = np.where(se > 0, diff / np.where(se > 0, se, 1.0), 0.0)
    return bool(np.all(z <= nsigma) and np.all(ok_zero)), float(z.max())


def holder_exponent_estimate(paths, t: float, lags, nbatch: int = 10):
    """Slope of log E|B(t + u) - B(t)| against log u.

    ``lags`` are integer multiples of the grid step.  The standard error
    comes from the spread of the slope over ``nbatch`` path batches.
    """
    X = _as_values(paths)
    grid = paths.grid if isinstance(paths, PathBundle) else None
    if grid is None:
        raise ArgumentError("paths must carry their grid")
    lags = [int(k) for k in lags]
    if len(lags) < 3:
        raise ArgumentError("need at least 3 lags")
    dt = grid[1] - grid[0]
    i0 = int(round(t / dt))
    if i0 <= 0 or i0 + max(lags) > grid.size - 1 or min(lags) < 1:
        raise ArgumentError("t must be interior and t + lag within the grid")
    logu = np.log(np.array(lags) * dt)

    def slope(rows):
        m = [np.mean(np.abs(rows[:, i0 + k] - rows[:, i0])) for k in lags]
        return float(np.polyfit(logu, np.log(m), 1)[0])

    est = slope(X)
    batches = np.array_split(np.arange(X.shape[0]), nbatch)
    bs = np.array([slope(X[b]) for b in batches])
    return est, float(bs.std(ddof=1) / math.sqrt(nbatch))


def gaussianity_check(paths, nsigma: float = 4.0) -> dict:
    """Skewness and excess kurtosis per grid point against 0 (points with zero variance skipped)."""
    X = _as_values(paths)
    N = X.shape[0]
    Y = X - X.mean(axis=0)
    var = (Y * Y).mean(axis=0)
    live = var > 0
    sk = np.zeros(X.shape[1])
    ku = np.zeros(X.shape[1])
    sk[live] = (Y[:, live] ** 3).mean(axis=0) / var[live] ** 1.5
    ku[live] = (Y[:, live] ** 4).mean(axis=0) / var[live] ** 2 - 3.0
    se_s, se_k = math.sqrt(6.0 / N), math.sqrt(24.0 / N)
    ok = bool(np.all(np.abs(sk) <= nsigma * se_s) and np.all(np.abs(ku) <= nsigma * se_k))
    return {"skewness": sk, "excess_kurtosis": ku, "se_skew": se_s, "se_kurt": se_k, "pass": ok}


def holder_quotient_max(paths, exponent: float) -> np.ndarray:
    """Per path: max over grid pairs of |B_t - B_s| / |t - s|^exponent."""
    X = _as_values(paths)
    grid = paths.grid
    out = np.zeros(X.shape[0])
    for lag in range(1, grid.size):
        d = np.abs(X[:, lag:] - X[:, :-lag]).max(axis=1) / (lag * (grid[1] - grid[0])) ** exponent
        out = np.maximum(out, d)
    return out
