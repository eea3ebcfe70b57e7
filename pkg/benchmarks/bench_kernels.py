"""Compiled vs pure-Python kernel timings.

    python benchmarks/bench_kernels.py [--repeat 5] [--n 512] [--csv out.csv]

Each kernel is timed on both backends with identical inputs (best of
``--repeat``), and the end-to-end multifractional derivative is timed in a
subprocess per backend since the backend is fixed at import.
"""
import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from multifrac import _kernels
from multifrac.regularity import RegularityFunction
from multifrac.special import GRADED, gauss_legendre_unit, graded_rule


def cases(n: int):
    rng = np.random.default_rng(0)
    t = np.linspace(0.0, 1.0, n + 1)
    gx, gw = gauss_legendre_unit(10)
    rf = RegularityFunction.sinusoidal(0.5, 0.2, 1.0)
    tau, w, _, omt = graded_rule(0.0, 1.0, "both", GRADED, exponent_bound=rf.range_bounds()[1])
    x = rng.uniform(0, 1, 4 * n)
    e_nodes = np.clip(1.5 + 0.02 * rng.standard_normal((n, 10)), 1.01, 1.99)
    c_nodes = rng.uniform(0.5, 2.0, (n, 10))
    return {
        "holder_sup": (np.cumsum(rng.standard_normal(n + 1)), t, 0.4 + 0.04 * np.sin(7 * t)),
        "power_row_weights": (0.3 + 0.4 * t, 1.0 / n, gx, gw),
        "varexp_weights": (e_nodes, c_nodes, e_nodes.mean(axis=1), c_nodes.mean(axis=1), 1.0 / n, gx, gw, True),
        "volterra_march": (rng.standard_normal(n + 1), np.tril(rng.uniform(-1, 1, (n + 1, n + 1))) / (n + 1)),
        "kernel_f_pairs": (rf.code, rf.param_array, x * rng.uniform(0, 1, x.size), x, tau, omt, w),
    }


END_TO_END = """
import json, time
from multifrac import _kernels, catalog, mfcalc
from multifrac.regularity import RegularityFunction, SampledPath
a = RegularityFunction.sinusoidal(0.5, 0.2, 1.0)
g = SampledPath.from_function(catalog.monomial(0.9), 1.0, {n})
t0 = time.perf_counter()
mfcalc.mf_derivative(g, a)
print(json.dumps({{"backend": _kernels.BACKEND, "seconds": time.perf_counter() - t0}}))
"""


def end_to_end(n: int, pure: bool) -> float:
    env = dict(os.environ, MULTIFRAC_PURE_PYTHON="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", END_TO_END.format(n=n)], env=env, capture_output=True,
                         text=True, check=True)
    return json.loads(out.stdout)["seconds"]


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=512)
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--csv", default=None)
    args = p.parse_args(argv)

    impls = _kernels.implementations()
    if "compiled" not in impls:
        print("compiled extension not built; only the python backend is timed")
    rows = []
    for name, inputs in cases(args.n).items():
        times = {}
        for backend, mod in impls.items():
            fn = getattr(mod, name)
            times[backend] = min(timeit.repeat(lambda: fn(*inputs), number=1, repeat=args.repeat))
        rows.append((name, times.get("python"), times.get("compiled")))
    rows.append((f"mf_derivative n={args.n} (end to end)", end_to_end(args.n, True),
                 end_to_end(args.n, False) if "compiled" in impls else None))

    print(f"{'kernel':<40} {'python [s]':>12} {'compiled [s]':>13} {'speedup':>9}")
    for name, py, cc in rows:
        sp = f"{py / cc:9.1f}" if cc else f"{'-':>9}"
        print(f"{name:<40} {py:12.3e} {cc if cc is not None else float('nan'):13.3e} {sp}")
    if args.csv:
        from multifrac import io
        io.write_csv(args.csv, ["kernel", "python_seconds", "compiled_seconds"],
                     [[r[0], r[1], r[2] if r[2] is not None else float("nan")] for r in rows])


if __name__ == "__main__":
    main()
