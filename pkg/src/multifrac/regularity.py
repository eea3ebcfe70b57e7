"""Regularity functions and sampled paths.

A regularity function is a C^1 map from [0, T] into a compact subset of
(0, 1).  Four closed-form families are provided so that the derivative,
the range and the C^1 norm are exact rather than numerically estimated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from multifrac import _kernels
from multifrac.errors import ArgumentError, DomainError

FAMILIES = ("constant", "affine", "sinusoidal", "logistic")

_PARAM_NAMES = {
    "constant": ("value",),
    "affine": ("intercept", "slope"),
    "sinusoidal": ("mean", "amplitude", "frequency", "phase"),
    "logistic": ("low", "high", "center", "rate"),
}

# dense grid used to validate declared ranges at construction
_CHECK_POINTS = 10_001
_DOMAIN_SLACK = 1e-12


@dataclass(frozen=True)
class RegularityFunction:
    """Closed-form order function alpha(t) on [0, T].

    ``params`` per family:

    * constant   -- (value,)
    * affine     -- (intercept, slope):            a + b t
    * sinusoidal -- (mean, amplitude, frequency[, phase]):
                    m + A sin(2 pi f t + phase)
    * logistic   -- (low, high, center, rate):
                    low + (high - low) / (1 + exp(-rate (t - center)))

    ``declared_range`` defaults to the exact range of the function.
    """

    family: str
    params: tuple
    T: float = 1.0
    declared_range: tuple | None = None
    _code: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ArgumentError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        params = tuple(float(p) for p in self.params)
        names = _PARAM_NAMES[self.family]
        if self.family == "sinusoidal" and len(params) == 3:
            params = params + (0.0,)
        if len(params) != len(names):
            raise ArgumentError(
                f"{self.family} expects parameters {names}, got {len(params)} values"
            )
        if not all(math.isfinite(p) for p in params):
            raise ArgumentError("parameters must be finite")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ArgumentError("horizon T must be positive and finite")
        if self.family == "logistic" and params[3] == 0.0:
            raise ArgumentError("logistic rate must be nonzero")
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "_code", FAMILIES.index(self.family))

        lo, hi = self.range_bounds()
        if self.declared_range is None:
            object.__setattr__(self, "declared_range", (lo, hi))
        a, b = (float(v) for v in self.declared_range)
        object.__setattr__(self, "declared_range", (a, b))
        if not (0.0 < a <= b < 1.0):
            raise DomainError(f"declared range ({a}, {b}) must satisfy 0 < a <= b < 1")
        grid = np.linspace(0.0, self.T, _CHECK_POINTS)
        vals = self(grid)
        if vals.min() < a - 1e-12 or vals.max() > b + 1e-12:
            raise DomainError(
                f"{self.family} function leaves declared range ({a}, {b}): "
                f"observed [{vals.min():.6g}, {vals.max():.6g}]"
            )

    # -- construction helpers -------------------------------------------------
    @classmethod
    def constant(cls, value: float, T: float = 1.0, **kw) -> "RegularityFunction":
        return cls("constant", (value,), T, **kw)

    @classmethod
    def affine(cls, intercept: float, slope: float, T: float = 1.0, **kw) -> "RegularityFunction":
        return cls("affine", (intercept, slope), T, **kw)

    @classmethod
    def sinusoidal(cls, mean, amplitude, frequency=1.0, phase=0.0, T=1.0, **kw):
        return cls("sinusoidal", (mean, amplitude, frequency, phase), T, **kw)

    @classmethod
    def logistic(cls, low, high, center, rate, T=1.0, **kw):
        return cls("logistic", (low, high, center, rate), T, **kw)

    @classmethod
    def from_dict(cls, spec: dict) -> "RegularityFunction":
        rng = spec.get("range")
        return cls(spec["family"], tuple(spec["params"]), spec.get("T", 1.0),
                   tuple(rng) if rng is not None else None)

    def to_dict(self) -> dict:
        return {"family": self.family, "params": list(self.params), "T": self.T,
                "range": list(self.declared_range)}

    @property
    def code(self) -> int:
        """Integer family code understood by the compiled kernels."""
        return self._code

    @property
    def param_array(self) -> np.ndarray:
        return np.asarray(self.params + (0.0,) * (4 - len(self.params)), dtype=float)

    def shifted(self, offset: float) -> "RegularityFunction":
        """Return ``alpha + offset`` (used for the order h + 1/2)."""
        p = list(self.params)
        if self.family == "constant":
            p[0] += offset
        elif self.family == "affine":
            p[0] += offset
        elif self.family == "sinusoidal":
            p[0] += offset
        else:
            p[0] += offset
            p[1] += offset
        lo, hi = self.declared_range
        return RegularityFunction(self.family, tuple(p), self.T, (lo + offset, hi + offset))

    # -- evaluation -----------------------------------------------------------
    def _check_domain(self, t: np.ndarray) -> None:
        slack = _DOMAIN_SLACK * max(1.0, self.T)
        if t.size and (np.min(t) < -slack or np.max(t) > self.T + slack):
            raise DomainError(f"t outside [0, {self.T}]")

    def __call__(self, t):
        return self.eval(t)

    def eval(self, t):
        """alpha(t); scalar in, scalar out."""
        arr = np.asarray(t, dtype=float)
        self._check_domain(arr)
        out = _eval_family(self._code, self.params, arr)
        return float(out) if np.ndim(t) == 0 else out

    def deriv(self, t):
        """Exact derivative alpha'(t)."""
        arr = np.asarray(t, dtype=float)
        self._check_domain(arr)
        out = _deriv_family(self._code, self.params, arr)
        return float(out) if np.ndim(t) == 0 else out

    # -- global quantities ----------------------------------------------------
    def range_bounds(self) -> tuple[float, float]:
        """Exact (inf, sup) of alpha over [0, T]."""
        T = self.T
        p = self.params
        if self.family == "constant":
            return p[0], p[0]
        if self.family in ("affine", "logistic"):
            # both families are monotone
            ends = _eval_family(self._code, p, np.array([0.0, T]))
            return float(ends.min()), float(ends.max())
        m, A, f, ph = p
        cands = [0.0, T]
        if f != 0.0 and A != 0.0:
            cands += _sine_critical_points(f, ph, T, offset=math.pi / 2)
        vals = _eval_family(self._code, p, np.array(cands))
        return float(vals.min()), float(vals.max())

    def deriv_bounds(self) -> tuple[float, float]:
        """Exact (inf, sup) of alpha' over [0, T]."""
        T = self.T
        p = self.params
        if self.family == "constant":
            return 0.0, 0.0
        if self.family == "affine":
            return p[1], p[1]
        cands = [0.0, T]
        if self.family == "sinusoidal":
            m, A, f, ph = p
            if f != 0.0 and A != 0.0:
                cands += _sine_critical_points(f, ph, T, offset=0.0)
        else:
            low, high, c, r = p
            if 0.0 <= c <= T:
                cands.append(c)
        vals = _deriv_family(self._code, p, np.array(cands))
        return float(vals.min()), float(vals.max())

    def c1_norm(self) -> float:
        """sup|alpha| + sup|alpha'| over [0, T]."""
        lo, hi = self.range_bounds()
        dlo, dhi = self.deriv_bounds()
        return max(abs(lo), abs(hi)) + max(abs(dlo), abs(dhi))

    @property
    def is_constant(self) -> bool:
        dlo, dhi = self.deriv_bounds()
        return dlo == 0.0 and dhi == 0.0


def _sine_critical_points(f, ph, T, offset):
    # solutions of 2 pi f t + ph = offset + k pi inside [0, T]
    w = 2.0 * math.pi * f
    k_lo = math.floor((min(ph, w * T + ph) - offset) / math.pi) - 1
    k_hi = math.ceil((max(ph, w * T + ph) - offset) / math.pi) + 1
    out = []
    for k in range(k_lo, k_hi + 1):
        t = (offset + k * math.pi - ph) / w
        if 0.0 <= t <= T:
            out.append(t)
    return out


def _eval_family(code: int, p: Sequence[float], t: np.ndarray) -> np.ndarray:
    if code == 0:
        return np.full_like(t, p[0], dtype=float)
    if code == 1:
        return p[0] + p[1] * t
    if code == 2:
        return p[0] + p[1] * np.sin(2.0 * np.pi * p[2] * t + p[3])
    z = -p[3] * (t - p[2])
    return p[0] + (p[1] - p[0]) * _expit(-z)


def _deriv_family(code: int, p: Sequence[float], t: np.ndarray) -> np.ndarray:
    if code == 0:
        return np.zeros_like(t, dtype=float)
    if code == 1:
        return np.full_like(t, p[1], dtype=float)
    if code == 2:
        w = 2.0 * np.pi * p[2]
        return p[1] * w * np.cos(w * t + p[3])
    s = _expit(p[3] * (t - p[2]))
    return (p[1] - p[0]) * p[3] * s * (1.0 - s)


def _expit(z):
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


# ---------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class SampledPath:
    """Values of a function or process on the uniform grid t_k = k T / n."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        grid = np.array(self.grid, dtype=float)
        values = np.array(self.values, dtype=float)
        if grid.ndim != 1 or grid.size < 3:
            raise ArgumentError("a sampled path needs at least n = 2 intervals")
        if values.shape != grid.shape:
            raise ArgumentError("grid and values must have the same length")
        if grid[0] != 0.0:
            raise ArgumentError("grid must start at 0")
        n = grid.size - 1
        dt = grid[-1] / n
        if not np.allclose(np.diff(grid), dt, rtol=1e-9, atol=1e-14 * grid[-1]):
            raise ArgumentError("grid must be uniform")
        grid.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @classmethod
    def uniform_grid(cls, T: float, n: int) -> np.ndarray:
        if n < 2:
            raise ArgumentError("n must be at least 2")
        return np.linspace(0.0, T, n + 1)

    @classmethod
    def from_function(cls, func: Callable, T: float, n: int) -> "SampledPath":
        grid = cls.uniform_grid(T, n)
        return cls(grid, np.asarray(func(grid), dtype=float) * np.ones_like(grid))

    @property
    def n(self) -> int:
        return self.grid.size - 1

    @property
    def T(self) -> float:
        return float(self.grid[-1])

    @property
    def dt(self) -> float:
        return self.T / self.n

    def same_grid(self, other: "SampledPath") -> bool:
        return self.n == other.n and math.isclose(self.T, other.T, rel_tol=1e-12)

    def __len__(self) -> int:
        return self.grid.size


def holder_norm_variable(path: SampledPath, rf: RegularityFunction) -> float:
    """Discrete variable-order Hölder norm over all grid pairs.

    |f(0)| + max_{i<j} |f_j - f_i| / |t_j - t_i|^max(alpha_i, alpha_j)
    """
    if path.n < 2:
        raise ArgumentError("need n >= 2")
    if not math.isclose(path.T, rf.T, rel_tol=1e-12):
        raise ArgumentError("path and regularity function must share the horizon T")
    a = np.asarray(rf(path.grid), dtype=float)
    return abs(float(path.values[0])) + _kernels.holder_sup(path.values, path.grid, a)
