"""Girsanov transform for RL mBm and the drifted equation X = x + int b(s, X) ds + B^h.

For h < 1/2 the density

    Z(T) = exp(int_0^T v dB - 1/2 int_0^T v^2 dr),   v = D^{h+1/2}(int_0^. u ds),

turns B^h into B^h - int u ds.  Paths are drawn from the exact joint law
of the Brownian increments and B^h on the solution grid (see
:class:`multifrac.mbm.JointSampler`), so the discrete Z is an exact
martingale whenever v is adapted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from multifrac import mfcalc
from multifrac.errors import ArgumentError, ConfigError, NumericError
from multifrac.mbm import GaussianDriver, JointSampler, PathBundle
from multifrac.regularity import RegularityFunction, SampledPath

DRIFT_KINDS = {
    "constant": "bounded_smooth",
    "sin": "bounded_smooth",
    "linear": "linear_growth",
    "sign": "discontinuous_bounded",
    "step": "discontinuous_bounded",
}
_GROWTH_SAMPLES = 10_000


@dataclass(frozen=True, eq=False)
class DriftSpec:
    """Drift b(t, x) with declared growth constant |b| <= growth (1 + |x|).

    ``sup_norm`` is inf for unbounded drifts and ``lipschitz`` is None for
    discontinuous ones.  Construction checks the growth bound on 10^4
    random points of [0, T] x [-10, 10].
    """

    kind: str
    params: tuple
    func: Callable = field(repr=False, default=None)
    growth: float = 0.0
    sup_norm: float = math.inf
    lipschitz: float | None = None
    family: str = ""
    T: float = 1.0

    def __post_init__(self):
        if self.func is None:
            raise ArgumentError("drift needs a callable")
        self.verify_growth()

    def __call__(self, t, x):
        t, x = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
        return np.asarray(self.func(t, x), dtype=float) * np.ones(t.shape)

    def verify_growth(self, seed: int = 12345):
        rng = np.random.default_rng(seed)
        t = rng.uniform(0.0, self.T, _GROWTH_SAMPLES)
        x = rng.uniform(-10.0, 10.0, _GROWTH_SAMPLES)
        b = self(t, x)
        if not np.all(np.isfinite(b)):
            raise ConfigError("drift is not finite on the test box")
        excess = np.abs(b) - self.growth * (1.0 + np.abs(x))
        if excess.max() > 1e-12 * max(1.0, self.growth):
            raise ConfigError(f"declared growth constant {self.growth} violated by {excess.max():.3g}")

    @property
    def is_zero(self) -> bool:
        return self.kind == "constant" and self.params[0] == 0.0

    # -- families ---------------------------------------------------------
    @classmethod
    def make(cls, kind: str, params=(), T: float = 1.0) -> "DriftSpec":
        params = tuple(float(p) for p in params)
        if kind == "constant":
            (c,) = params or (0.0,)
            return cls("constant", (c,), lambda t, x: np.full_like(x, c), abs(c), abs(c), 0.0,
                       DRIFT_KINDS[kind], T)
        if kind == "sin":
            a, w = (list(params) + [1.0, 1.0][len(params):])[:2]
            return cls("sin", (a, w), lambda t, x: a * np.sin(w * x), abs(a), abs(a), abs(a * w),
                       DRIFT_KINDS[kind], T)
        if kind == "linear":
            a, c = params if len(params) == 2 else (params[0], 0.0)
            return cls("linear", (a, c), lambda t, x: a * x + c, max(abs(a), abs(c)), math.inf,
                       abs(a), DRIFT_KINDS[kind], T)
        if kind == "sign":
            (a,) = params or (1.0,)
            return cls("sign", (a,), lambda t, x: a * np.sign(x), abs(a), abs(a), None,
                       DRIFT_KINDS[kind], T)
        if kind == "step":
            a, lvl = params
            return cls("step", (a, lvl), lambda t, x: np.where(x >= lvl, a, 0.0), abs(a), abs(a),
                       None, DRIFT_KINDS[kind], T)
        raise ArgumentError(f"unknown drift kind {kind!r}; expected one of {sorted(DRIFT_KINDS)}")

    @classmethod
    def constant(cls, c: float, T: float = 1.0):
        return cls.make("constant", (c,), T)

    @classmethod
    def sine(cls, amplitude: float = 1.0, freq: float = 1.0, T: float = 1.0):
        return cls.make("sin", (amplitude, freq), T)

    @classmethod
    def linear(cls, slope: float, intercept: float = 0.0, T: float = 1.0):
        return cls.make("linear", (slope, intercept), T)

    @classmethod
    def from_dict(cls, spec: dict, T: float = 1.0):
        return cls.make(spec["kind"], spec.get("params", ()), T)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": list(self.params)}


@dataclass(frozen=True, eq=False)
class GirsanovRun:
    """One Monte Carlo experiment: h, drift, start point, grid and sample size.

    ``n`` is the number of intervals of the solution grid.  Path indices
    [0, npaths) feed the reweighted mBm side, [npaths, 2 npaths) the direct
    Euler side.
    """

    h: RegularityFunction
    drift: DriftSpec
    x0: float = 0.0
    n: int = 64
    npaths: int = 10_000
    seed: int = 0
    threads: int = 1
    cfg: mfcalc.DerivativeConfig | None = None
    lam: float = 0.05
    strict: bool = True

    def __post_init__(self):
        lo, hi = self.h.range_bounds()
        limit = 0.5 if self.strict else 1.0
        if not hi < limit:
            raise ConfigError(f"h must stay strictly below {limit} (sup h = {hi:g})")
        if self.n < 2 or self.npaths < 1:
            raise ConfigError("need n >= 2 and npaths >= 1")
        if not math.isclose(self.drift.T, self.h.T):
            object.__setattr__(self, "drift", DriftSpec.make(self.drift.kind, self.drift.params, self.h.T))
        if self.strict:
            cfg = self.cfg or mfcalc.DerivativeConfig(n=self.n)
            object.__setattr__(self, "cfg", replace_n(cfg, self.n).validated(self.alpha))

    @property
    def T(self) -> float:
        return self.h.T

    @property
    def dt(self) -> float:
        return self.T / self.n

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.n + 1)

    @property
    def alpha(self) -> RegularityFunction:
        return self.h.shifted(0.5)

    def driver(self) -> GaussianDriver:
        return GaussianDriver(self.seed, self.T, self.n, self.threads)

    def with_(self, **kw) -> "GirsanovRun":
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d.update(kw)
        return GirsanovRun(**d)


def replace_n(cfg, n):
    from dataclasses import replace
    return cfg if cfg.n == n else replace(cfg, n=n)


@lru_cache(maxsize=8)
def _joint(h: RegularityFunction, n: int) -> JointSampler:
    return JointSampler(h, n)


def _derivative_matrix(run: GirsanovRun) -> np.ndarray:
    ops = mfcalc.operator_matrices(run.alpha, run.n, run.cfg.kernel_grid)
    return ops.derivative


# ---------------------------------------------------------------------------
# single-path operations

def cumulative_trapezoid(values, dt: float) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    out = np.zeros_like(v)
    out[..., 1:] = np.cumsum(0.5 * dt * (v[..., 1:] + v[..., :-1]), axis=-1)
    return out


def drift_integral_path(b: DriftSpec, X: SampledPath) -> SampledPath:
    """t -> int_0^t b(s, X_s) ds by the cumulative trapezoid (0 at t = 0)."""
    return SampledPath(X.grid, cumulative_trapezoid(b(X.grid, X.values), X.dt))


def girsanov_v(U: SampledPath, h: RegularityFunction, cfg: mfcalc.DerivativeConfig | None = None) -> mfcalc.OperatorResult:
    """v = D^{h+1/2} U.  v(0) is set to 0 so that v stays adapted."""
    if abs(U.values[0]) > 0.0:
        raise ArgumentError("U must start at 0")
    alpha = h.shifted(0.5)
    cfg = replace_n(cfg or mfcalc.DerivativeConfig(n=U.n), U.n)
    res = mfcalc.mf_derivative(U, alpha, cfg)
    v = res.path.values.copy()
    v[0] = 0.0
    diag = dict(res.diagnostics)
    diag["l2_norm"] = mfcalc.l2_norm(v, U.dt)
    diag["v0_zeroed"] = 1.0
    return mfcalc.OperatorResult(SampledPath(U.grid, v), diag, res.solver, res.term_norms)


def girsanov_weight(v, dB) -> float:
    """Z = exp(sum v_i dB_i - 1/2 sum v_i^2 dt), left-point sums."""
    vals = v.values if isinstance(v, SampledPath) else np.asarray(v, dtype=float)
    dB = np.asarray(dB, dtype=float)
    if vals.size != dB.size + 1:
        raise ArgumentError("v needs one more grid point than dB")
    if not np.all(np.isfinite(vals)):
        raise NumericError("v is not finite")
    dt = v.dt if isinstance(v, SampledPath) else None
    if dt is None:
        raise ArgumentError("v must be a SampledPath")
    return float(np.exp(log_weights(vals[None, :], dB[None, :], dt))[0])


def log_weights(V, dB, dt):
    V = np.asarray(V)
    left = V[:, :-1]
    return (left * dB).sum(axis=1) - 0.5 * dt * (left * left).sum(axis=1)


# ---------------------------------------------------------------------------
# Monte Carlo pipeline

@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    npaths: int

    def within(self, target: float, nsigma: float = 3.0) -> bool:
        return abs(self.mean - target) <= nsigma * self.stderr


def _estimate(x) -> Estimate:
    x = np.asarray(x, dtype=float)
    n = x.size
    se = float(x.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return Estimate(float(x.mean()), se, n)


def _weighted_block(run: GirsanovRun, a: int, b: int, driver: GaussianDriver):
    js = _joint(run.h, run.n)
    dB, Bh = js.sample(driver, a, b)
    if run.drift.is_zero:
        V = np.zeros_like(Bh)
    else:
        u = run.drift(run.grid[None, :], run.x0 + Bh)
        U = cumulative_trapezoid(u, run.dt)
        V = U @ _derivative_matrix(run).T
        V[:, 0] = 0.0
    if not np.all(np.isfinite(V)):
        raise NumericError("non-finite v")
    return dB, Bh, V, log_weights(V, dB, run.dt)


def weighted_paths(run: GirsanovRun, offset: int = 0, npaths: int | None = None):
    """(Bh, V, Z) for path indices offset .. offset + npaths - 1."""
    npaths = run.npaths if npaths is None else npaths
    driver = run.driver()
    parts = driver.map_blocks(lambda a, b: _weighted_block(run, a, b, driver), npaths, offset)
    Bh = np.concatenate([p[1] for p in parts])
    V = np.concatenate([p[2] for p in parts])
    logZ = np.concatenate([p[3] for p in parts])
    with np.errstate(over="ignore"):
        Z = np.exp(logZ)
    if not np.all(np.isfinite(Z)):
        raise NumericError("Girsanov weight overflowed")
    return Bh, V, Z


def mc_mean_weight(run: GirsanovRun) -> Estimate:
    """Monte Carlo E[Z(T)] with standard error."""
    _, _, Z = weighted_paths(run)
    return _estimate(Z)


def novikov_check(run: GirsanovRun, lam: float | None = None, points: int = 8) -> dict:
    """sup_t E[exp(lam v_t^2)] on a coarse t-grid from two disjoint path batches."""
    lam = run.lam if lam is None else lam
    half = max(1, run.npaths // 2)
    idx = np.unique(np.linspace(0, run.n, points + 1).round().astype(int))
    out = {"lambda": lam, "times": run.grid[idx].tolist()}
    sups = []
    for name, off in (("batch_a", 0), ("batch_b", half)):
        _, V, _ = weighted_paths(run, off, half)
        with np.errstate(over="ignore"):
            est = np.exp(lam * V[:, idx] ** 2).mean(axis=0)
        out[name] = est.tolist()
        sups.append(float(est.max()))
    finite = all(math.isfinite(s) for s in sups)
    out["sup_a"], out["sup_b"] = sups
    out["sup_estimate"] = max(sups) if finite else math.inf
    out["stable"] = bool(finite and abs(sups[0] - sups[1]) <= 0.5 * max(sups))
    return out


def _euler_block(run: GirsanovRun, a: int, b: int, driver: GaussianDriver, drift=None):
    drift = drift or run.drift
    _, Bh = _joint(run.h, run.n).sample(driver, a, b)
    return Bh, euler_from_noise(drift, run.x0, Bh, run.dt)


def euler_from_noise(drift: DriftSpec, x0: float, Bh: np.ndarray, dt: float) -> np.ndarray:
    """X_i = x0 + Bh_i + dt sum_{k<i} b(t_k, X_k) for each row of Bh."""
    k, n1 = Bh.shape
    X = np.empty_like(Bh)
    acc = np.zeros(k)
    X[:, 0] = x0 + Bh[:, 0]
    for i in range(n1 - 1):
        acc = acc + dt * drift(i * dt, X[:, i])
        X[:, i + 1] = x0 + Bh[:, i + 1] + acc
    return X


def gronwall_envelope(drift: DriftSpec, x0: float, Bh: np.ndarray, T: float) -> np.ndarray:
    """(|x0| + C T + |B^h|_inf) exp(C T) per path."""
    C = drift.growth
    return (abs(x0) + C * T + np.abs(Bh).max(axis=1)) * math.exp(C * T)


def euler_weak_solution(run: GirsanovRun, offset: int | None = None, npaths: int | None = None) -> PathBundle:
    """Euler solutions driven by exact mBm increments; checks the Grönwall envelope per path."""
    offset = run.npaths if offset is None else offset
    npaths = run.npaths if npaths is None else npaths
    driver = run.driver()
    parts = driver.map_blocks(lambda a, b: _euler_block(run, a, b, driver), npaths, offset)
    Bh = np.concatenate([p[0] for p in parts])
    X = np.concatenate([p[1] for p in parts])
    env = gronwall_envelope(run.drift, run.x0, Bh, run.T)
    sup = np.abs(X).max(axis=1)
    bad = sup > env * (1.0 + 1e-12)
    if bad.any():
        raise NumericError(f"Grönwall envelope violated on {int(bad.sum())} paths")
    return PathBundle(run.grid, X, {"offset": offset, "seed": run.seed, "npaths": npaths,
                                    "envelope_margin_min": float((env - sup).min()),
                                    "Bh": Bh})


# ---------------------------------------------------------------------------
# law equivalence

@dataclass(frozen=True)
class PathFunctional:
    """Bounded functional of paths: func(W, grid) -> values per row, |values| <= bound."""

    name: str
    func: Callable
    bound: float | None = None

    def __call__(self, W, grid):
        return np.asarray(self.func(np.atleast_2d(W), grid), dtype=float)


def _at(W, grid, t):
    return W[:, int(round(t / (grid[1] - grid[0])))]


PHI_BATTERY = (
    PathFunctional("tanh_terminal", lambda W, g: np.tanh(W[:, -1]), 1.0),
    # threshold 0 is the median of the zero-drift law
    PathFunctional("indicator_terminal_nonneg", lambda W, g: (W[:, -1] >= 0.0).astype(float), 1.0),
    PathFunctional("tanh_two_marginal", lambda W, g: np.tanh(_at(W, g, g[-1] / 2)) * np.tanh(W[:, -1]), 1.0),
)


@dataclass(frozen=True)
class LawResult:
    name: str
    lhs: Estimate
    rhs: Estimate
    gap: float
    stderr: float

    @property
    def passed(self) -> bool:
        return self.gap <= 3.0 * self.stderr


def law_equivalence_test(run: GirsanovRun, phis=PHI_BATTERY, _cache=None) -> list[LawResult]:
    """Compare E[phi(X - x0)] (direct Euler) with E[phi(B^h) Z] on independent path sets."""
    if isinstance(phis, PathFunctional):
        phis = (phis,)
    for phi in phis:
        if phi.bound is None or not math.isfinite(phi.bound):
            raise ArgumentError(f"functional {phi.name!r} must declare a finite bound")
    if _cache is None:
        Bh, _, Z = weighted_paths(run)
        X = euler_weak_solution(run).values
    else:
        Bh, Z, X = _cache
    out = []
    for phi in phis:
        r = phi(Bh, run.grid)
        l = phi(X - run.x0, run.grid)
        if np.abs(r).max() > phi.bound * (1 + 1e-12) or np.abs(l).max() > phi.bound * (1 + 1e-12):
            raise ArgumentError(f"functional {phi.name!r} exceeds its declared bound")
        lhs, rhs = _estimate(l), _estimate(r * Z)
        se = math.hypot(lhs.stderr, rhs.stderr)
        out.append(LawResult(phi.name, lhs, rhs, abs(lhs.mean - rhs.mean), se))
    return out


# ---------------------------------------------------------------------------
# Krylov-type estimate

@dataclass(frozen=True)
class KrylovTest:
    """Nonnegative g(t, x) with a closed-form int int g^rho dx dt."""

    name: str
    func: Callable
    rho_mass: Callable  # rho, T -> int_0^T int_R g^rho dx dt

    def __call__(self, t, x):
        return self.func(t, x)


def box_indicator(x_lo: float, x_hi: float, t_lo: float = 0.0, t_hi: float | None = None) -> KrylovTest:
    def f(t, x):
        th = math.inf if t_hi is None else t_hi
        return ((x >= x_lo) & (x <= x_hi) & (t >= t_lo) & (t <= th)).astype(float)

    def mass(rho, T):
        th = T if t_hi is None else min(t_hi, T)
        return (x_hi - x_lo) * max(th - t_lo, 0.0)

    return KrylovTest(f"box[{x_lo},{x_hi}]", f, mass)


def gaussian_bump(center: float = 0.0, width: float = 0.5) -> KrylovTest:
    def f(t, x):
        return np.exp(-0.5 * ((x - center) / width) ** 2)

    def mass(rho, T):
        return T * width * math.sqrt(2.0 * math.pi / rho)

    return KrylovTest(f"bump({center},{width})", f, mass)


def zero_test() -> KrylovTest:
    return KrylovTest("zero", lambda t, x: np.zeros_like(x), lambda rho, T: 0.0)


KRYLOV_BATTERY = (box_indicator(-1.0, 1.0), box_indicator(0.0, 0.5, 0.5, 1.0), gaussian_bump(0.0, 0.5),
                  gaussian_bump(0.5, 0.2))


def krylov_ratio(run: GirsanovRun, g: KrylovTest, rho: float, X=None) -> float:
    """E[int_0^T g(t, X_t) dt] / (int int g^rho)^(1/rho) over Euler paths (0/0 := 0)."""
    if not rho > run.h.range_bounds()[1] + 1.0:
        raise ConfigError(f"rho={rho} must exceed sup h + 1")
    if X is None:
        X = euler_weak_solution(run).values
    vals = g(run.grid[None, :], X)
    num = float(np.mean(cumulative_trapezoid(vals, run.dt)[:, -1]))
    den = g.rho_mass(rho, run.T) ** (1.0 / rho)
    if den == 0.0:
        if num == 0.0:
            return 0.0
        raise ArgumentError("test function has zero mass but positive occupation")
    return num / den


def krylov_report(run: GirsanovRun, rho: float, battery=KRYLOV_BATTERY) -> dict:
    """Ratios over the battery on two disjoint path batches (non-gating)."""
    half = max(1, run.npaths // 2)
    Xa = euler_weak_solution(run, run.npaths, half).values
    Xb = euler_weak_solution(run, run.npaths + half, half).values
    rows = []
    for g in battery:
        ra, rb = krylov_ratio(run, g, rho, Xa), krylov_ratio(run, g, rho, Xb)
        stable = abs(ra - rb) <= 0.5 * max(abs(ra), abs(rb)) if max(ra, rb) > 0 else True
        rows.append({"name": g.name, "batch_a": ra, "batch_b": rb, "stable": bool(stable)})
    mx = [max(r["batch_a"], r["batch_b"]) for r in rows]
    ma, mb = max(r["batch_a"] for r in rows), max(r["batch_b"] for r in rows)
    return {"rho": rho, "rows": rows, "max_ratio": max(mx),
            "stable": bool(abs(ma - mb) <= 0.5 * max(ma, mb)) if max(ma, mb) > 0 else True}


# ---------------------------------------------------------------------------
# mollified lattice

_PHI_NODES = 96


def _bump(z):
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    inside = np.abs(z) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - z[inside] ** 2))
    return out


@lru_cache(maxsize=1)
def _bump_rule():
    x, w = np.polynomial.legendre.leggauss(_PHI_NODES)
    phi = _bump(x)
    mass = float(np.dot(w, phi))
    return x, w * phi / mass, 1.0 / mass


def bump_cdf(z):
    """int_{-1}^z phi for the normalised bump phi."""
    z = np.clip(np.asarray(z, dtype=float), -1.0, 1.0)
    x, w = np.polynomial.legendre.leggauss(_PHI_NODES)
    _, _, norm = _bump_rule()
    half = 0.5 * (z + 1.0)
    nodes = -1.0 + half[..., None] * (x + 1.0)
    return half * (_bump(nodes) @ w) * norm


def bump_peak() -> float:
    """phi(0); int |phi'| = 2 phi(0) for the unimodal bump."""
    return _bump_rule()[2] * math.exp(-1.0)


def truncated(b: DriftSpec, R: float) -> DriftSpec:
    """b_R(t, x) = b(t, clip(x, -R, R))."""
    if not R > 0:
        raise ArgumentError("R must be positive")
    sup = min(b.sup_norm, b.growth * (1.0 + R))
    return DriftSpec(f"{b.kind}_R", b.params + (R,), lambda t, x: b.func(t, np.clip(x, -R, R)),
                     b.growth, sup, b.lipschitz, b.family, b.T)


def mollified(b: DriftSpec, R: float, j: int) -> DriftSpec:
    """b_{R,j}(t, x) = int b_R(t, x - z/j) phi(z) dz."""
    if j < 1 or int(j) != j:
        raise ArgumentError("mollification index j must be an integer >= 1")
    bR = truncated(b, R)
    lip_bound = j * bR.sup_norm * 2.0 * bump_peak()
    lip = lip_bound if b.lipschitz is None else min(b.lipschitz, lip_bound)
    if b.kind in ("sign", "step") and (b.kind == "sign" or abs(b.params[1]) < R):
        # exact convolution of a jump with the bump
        a = b.params[0]
        if b.kind == "sign":
            func = lambda t, x: a * (2.0 * bump_cdf(j * np.asarray(x)) - 1.0)
        else:
            lvl = b.params[1]
            func = lambda t, x: a * bump_cdf(j * (np.asarray(x) - lvl))
    else:
        z, w, _ = _bump_rule()

        def func(t, x):
            x = np.asarray(x, dtype=float)
            t = np.broadcast_to(np.asarray(t, dtype=float), x.shape)
            shifted = x[..., None] - z / j
            return (bR.func(t[..., None], shifted) * np.ones_like(shifted)) @ w

    return DriftSpec(f"{b.kind}_R_j", b.params + (R, j), func, bR.growth, bR.sup_norm, lip,
                     b.family, b.T)


def lattice_min(b: DriftSpec, R: float, n: int, k: int) -> DriftSpec:
    """Running minimum of b_{R,j} over j = n .. k."""
    if not (1 <= n <= k):
        raise ArgumentError("need 1 <= n <= k")
    parts = [mollified(b, R, j) for j in range(n, k + 1)]

    def func(t, x):
        out = parts[0](t, x)
        for p in parts[1:]:
            out = np.minimum(out, p(t, x))
        return out

    lip = max(p.lipschitz for p in parts)
    return DriftSpec(f"{b.kind}_min", b.params + (R, n, k), func, parts[0].growth,
                     parts[0].sup_norm, lip, b.family, b.T)


def mollified_drift_lattice(b: DriftSpec, R: float, j: int) -> dict:
    """b_R, b_{R,j} and a constructor for running minima (see :func:`lattice_min`)."""
    return {"b_R": truncated(b, R), "b_Rj": mollified(b, R, j),
            "minimum": lambda n, k: lattice_min(b, R, n, k)}


def comparison_monotonicity_check(b: DriftSpec, R: float, n: int, kmax: int, run: GirsanovRun) -> dict:
    """Euler solutions for b~_{R,n,k}, k = n..kmax, and b~_{R,m,kmax}, m = 1..n, on shared noise.

    The Euler map x -> x + dt b(x) is nondecreasing when dt L <= 1, so the
    ordering of the drifts carries over to the solutions exactly; the
    tolerance only absorbs rounding.
    """
    if not (1 <= n <= kmax):
        raise ArgumentError("need 1 <= n <= kmax")
    driver = run.driver()
    parts = driver.map_blocks(lambda a, c: _joint(run.h, run.n).sample(driver, a, c)[1], run.npaths, 0)
    Bh = np.concatenate(parts)
    sols_k = {k: euler_from_noise(lattice_min(b, R, n, k), run.x0, Bh, run.dt) for k in range(n, kmax + 1)}
    sols_n = {m: euler_from_noise(lattice_min(b, R, m, kmax), run.x0, Bh, run.dt) for m in range(1, n + 1)}
    L = lattice_min(b, R, 1, kmax).lipschitz
    scale = 1.0 + max(float(np.abs(x).max()) for x in sols_k.values())
    tol = 1e-12 * scale * run.n
    viol_k = max([float((sols_k[k + 1] - sols_k[k]).max()) for k in range(n, kmax)] + [0.0])
    viol_n = max([float((sols_n[m] - sols_n[m + 1]).max()) for m in range(1, n)] + [0.0])
    cauchy = [float(np.abs(sols_n[m + 1] - sols_n[m]).max()) for m in range(1, n)]
    bounded = all(np.all(np.isfinite(x)) for x in sols_k.values())
    return {
        "dt_lipschitz": run.dt * L,
        "exact_regime": bool(run.dt * L <= 1.0),
        "tolerance": tol,
        "max_violation_k": viol_k,
        "max_violation_n": viol_n,
        "monotone_k": bool(viol_k <= tol),
        "monotone_n": bool(viol_n <= tol),
        "cauchy_sup_diffs": cauchy,
        "bounded": bool(bounded),
        "pass": bool(viol_k <= tol and viol_n <= tol and bounded),
    }
