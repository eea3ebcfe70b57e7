"""Built-in test functions with known analytic structure.

Each entry evaluates on arrays and, where a cancellation-free form exists,
supplies the increment g(x) - g(x - u) directly.  Singular integrands of
the form (g(x) - g(t)) / (x - t)^(1 + a) need that increment for u far
below machine epsilon times x.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from multifrac.errors import ArgumentError

# below this distance (relative to x) generic increments switch to a secant
_SECANT_REL = 1e-6


@dataclass(frozen=True)
class TestFunction:
    name: str
    func: Callable
    exact_increment: Callable | None = None
    params: tuple = ()

    __test__ = False  # not a pytest class

    def __call__(self, t):
        return self.func(np.asarray(t, dtype=float))

    def increment(self, x: float, u):
        """g(x) - g(x - u) for u in [0, x]."""
        u = np.asarray(u, dtype=float)
        if self.exact_increment is not None:
            return self.exact_increment(x, u)
        return secant_increment(self.func, x, u)

    def to_dict(self) -> dict:
        return {"name": self.name, "params": list(self.params)}


def secant_increment(func: Callable, x: float, u):
    u = np.asarray(u, dtype=float)
    us = _SECANT_REL * max(abs(x), 1e-300)
    gx = float(func(np.array([x]))[0])
    out = np.empty_like(u)
    big = u >= us
    out[big] = gx - func(x - u[big])
    slope = (gx - float(func(np.array([x - us]))[0])) / us
    out[~big] = slope * u[~big]
    return out


def monomial(gamma: float) -> TestFunction:
    """t^gamma (gamma > 0)."""
    if gamma <= 0:
        raise ArgumentError("monomial exponent must be positive")

    def f(t):
        return np.power(np.maximum(t, 0.0), gamma)

    def inc(x, u):
        with np.errstate(divide="ignore"):
            return -(x ** gamma) * np.expm1(gamma * np.log1p(-u / x))

    return TestFunction("monomial", f, inc, (gamma,))


def cosine(freq: float = 1.0) -> TestFunction:
    """cos(freq t)."""

    def f(t):
        return np.cos(freq * t)

    def inc(x, u):
        return -2.0 * np.sin(freq * (x - 0.5 * u)) * np.sin(0.5 * freq * u)

    return TestFunction("cos", f, inc, (freq,))


def _bump_ratio(z):
    # smooth transition: 0 for z <= -1, 1 for z >= 1, C-infinity between
    z = np.asarray(z, dtype=float)
    a = z + 1.0
    b = 1.0 - z
    with np.errstate(divide="ignore", over="ignore"):
        ea = np.where(a > 0, np.exp(-1.0 / np.where(a > 0, a, 1.0)), 0.0)
        eb = np.where(b > 0, np.exp(-1.0 / np.where(b > 0, b, 1.0)), 0.0)
    return ea / (ea + eb)


def mollified_step(center: float = 0.5, width: float = 0.1, height: float = 1.0) -> TestFunction:
    """Step from 0 to ``height`` smoothed over [center - width, center + width]."""
    if width <= 0:
        raise ArgumentError("width must be positive")

    def f(t):
        return height * _bump_ratio((np.asarray(t, dtype=float) - center) / width)

    return TestFunction("mollified_step", f, None, (center, width, height))


def order_power(alpha, offset: float) -> TestFunction:
    """t^(alpha(t) + offset): the canonical member of C_0^{alpha + eps}."""

    def f(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        pos = t > 0
        out[pos] = np.exp((alpha(t[pos]) + offset) * np.log(t[pos]))
        return out

    return TestFunction("order_power", f, None, (offset,))


def constant(value: float) -> TestFunction:
    def f(t):
        return np.full_like(np.asarray(t, dtype=float), value)

    return TestFunction("constant", f, lambda x, u: np.zeros_like(u), (value,))


def zero() -> TestFunction:
    return constant(0.0)


CATALOG = {
    "monomial": monomial,
    "cos": cosine,
    "mollified_step": mollified_step,
    "constant": constant,
}


def from_dict(spec: dict, alpha=None) -> TestFunction:
    name = spec.get("name")
    params = spec.get("params", [])
    if name == "order_power":
        if alpha is None:
            raise ArgumentError("order_power needs the regularity function")
        return order_power(alpha, *params)
    if name not in CATALOG:
        raise ArgumentError(f"unknown test function {name!r}; known: {sorted(CATALOG) + ['order_power']}")
    return CATALOG[name](*params)
