"""Compiled and pure-Python backends must agree to 1e-12 relative."""
import json
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from multifrac import _kernels
from multifrac.regularity import RegularityFunction
from multifrac.special import gauss_legendre_unit, graded_rule, GRADED

IMPLS = _kernels.implementations()
needs_compiled = pytest.mark.skipif("compiled" not in IMPLS, reason="extension not built")


def close(a, b, rtol=1e-12):
    a, b = np.asarray(a), np.asarray(b)
    scale = max(1.0, float(np.max(np.abs(b))))
    return float(np.max(np.abs(a - b))) <= rtol * scale


def test_backend_is_reported():
    assert _kernels.BACKEND in IMPLS


@needs_compiled
@settings(max_examples=30, deadline=None)
@given(st.integers(3, 60), st.floats(0.05, 0.95), st.integers(0, 2**31))
def test_holder_sup_agrees(n, a, seed):
    rng = np.random.default_rng(seed)
    t = np.linspace(0, 1, n + 1)
    v = np.cumsum(rng.standard_normal(n + 1))
    al = a + 0.04 * np.sin(7 * t)
    py, cc = IMPLS["python"].holder_sup(v, t, al), IMPLS["compiled"].holder_sup(v, t, al)
    assert close(cc, py)


@needs_compiled
@settings(max_examples=20, deadline=None)
@given(st.integers(2, 80), st.floats(0.05, 0.95), st.floats(-0.3, 0.3))
def test_power_row_weights_agree(n, b0, slope):
    beta = np.clip(b0 + slope * np.linspace(0, 1, n + 1), 0.01, 0.99)
    gx, gw = gauss_legendre_unit(10)
    args = (beta, 1.0 / n, gx, gw)
    assert close(IMPLS["compiled"].power_row_weights(*args), IMPLS["python"].power_row_weights(*args))


@needs_compiled
@settings(max_examples=20, deadline=None)
@given(st.integers(2, 60), st.floats(1.05, 1.95), st.booleans(), st.integers(0, 2**31))
def test_varexp_weights_agree(n, e0, drop_end, seed):
    rng = np.random.default_rng(seed)
    gx, gw = gauss_legendre_unit(10)
    e_nodes = np.clip(e0 + 0.02 * rng.standard_normal((n, 10)), 1.01, 1.99)
    if not drop_end:
        e_nodes = e_nodes - 1.0
    c_nodes = rng.uniform(0.5, 2.0, (n, 10))
    e_mid, c_mid = e_nodes.mean(axis=1), c_nodes.mean(axis=1)
    args = (e_nodes, c_nodes, e_mid, c_mid, 1.0 / n, gx, gw, drop_end)
    assert close(IMPLS["compiled"].varexp_weights(*args), IMPLS["python"].varexp_weights(*args))


@needs_compiled
@settings(max_examples=20, deadline=None)
@given(st.integers(2, 100), st.integers(0, 2**31))
def test_volterra_march_agrees(n, seed):
    rng = np.random.default_rng(seed)
    W = np.tril(rng.uniform(-1, 1, (n + 1, n + 1))) / (n + 1)
    G = rng.standard_normal(n + 1)
    assert close(IMPLS["compiled"].volterra_march(G, W), IMPLS["python"].volterra_march(G, W))
    G2 = rng.standard_normal((3, n + 1))
    assert close(IMPLS["compiled"].volterra_march(G2, W), IMPLS["python"].volterra_march(G2, W))


@needs_compiled
@pytest.mark.parametrize("rf", [RegularityFunction.constant(0.4), RegularityFunction.affine(0.3, 0.4),
                                RegularityFunction.sinusoidal(0.5, 0.2, 1.5, 0.3),
                                RegularityFunction.logistic(0.3, 0.7, 0.5, -9.0)],
                         ids=["constant", "affine", "sine", "logistic"])
def test_kernel_f_pairs_agree(rf):
    tau, w, _, omt = graded_rule(0.0, 1.0, "both", GRADED, exponent_bound=rf.range_bounds()[1])
    rng = np.random.default_rng(1)
    x = rng.uniform(0, 1, 200)
    s = x * rng.uniform(0, 1, 200)
    args = (rf.code, rf.param_array, s, x, tau, omt, w)
    assert close(IMPLS["compiled"].kernel_f_pairs(*args), IMPLS["python"].kernel_f_pairs(*args))


SCRIPT = """
import json, numpy as np
from multifrac import _kernels, catalog, mfcalc
from multifrac.regularity import RegularityFunction, SampledPath
a = RegularityFunction.sinusoidal(0.5, 0.2, 1.0)
g = SampledPath.from_function(catalog.monomial(0.9), 1.0, 200)
print(json.dumps({"backend": _kernels.BACKEND,
                  "D": mfcalc.mf_derivative(g, a).path.values.tolist(),
                  "I": mfcalc.mf_integral(g, a).values.tolist()}))
"""


def _run(pure):
    env = dict(os.environ, MULTIFRAC_PURE_PYTHON="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


@needs_compiled
def test_environment_switch_and_end_to_end_agreement():
    py, cc = _run(True), _run(False)
    assert py["backend"] == "python" and cc["backend"] == "compiled"
    assert close(cc["D"], py["D"]) and close(cc["I"], py["I"])
