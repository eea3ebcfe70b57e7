"""Exit criteria 1-11 at their stated tolerances, each with a fixed seed.

Every test records a one-line PASS/FAIL verdict, printed again in the
pytest terminal summary.
"""
import json
import math
import os
import time

import numpy as np
import pytest

from multifrac import catalog, cli, girsanov as gs, mbm, mfcalc
from multifrac.regularity import RegularityFunction, SampledPath
from multifrac.special import gamma_fn

pytestmark = [pytest.mark.acceptance, pytest.mark.slow]

AFFINE_ALPHA = RegularityFunction.affine(0.3, 0.4)
SINE_ALPHA = RegularityFunction.sinusoidal(0.5, 0.2, 1.0)
LOGISTIC_ALPHA = RegularityFunction.logistic(0.3, 0.7, 0.5, 8.0)
H_GIRSANOV = RegularityFunction.affine(0.2, 0.1)


def _max_rel(a, b, mask):
    return float(np.max(np.abs(a[mask] - b[mask]) / np.abs(b[mask])))


def test_1_constant_order_reduction(acceptance_report):
    t0 = time.perf_counter()
    n = 2048
    grid = SampledPath.uniform_grid(1.0, n)
    mask = grid >= 0.1
    errs = {}
    for H in (0.3, 0.5, 0.7):
        a = RegularityFunction.constant(H)
        one = mfcalc.mf_integral(SampledPath(grid, np.ones(n + 1)), a).values
        lin = mfcalc.mf_integral(SampledPath(grid, grid.copy()), a).values
        errs[f"I_one_{H}"] = _max_rel(one, grid ** H / gamma_fn(1 + H), mask)
        errs[f"I_x_{H}"] = _max_rel(lin, grid ** (1 + H) / gamma_fn(2 + H), mask)
    for H in (0.3, 0.45):
        h = RegularityFunction.constant(H)
        v = gs.girsanov_v(SampledPath(grid, grid.copy()), h).path.values
        errs[f"D_x_{H}+1/2"] = _max_rel(v, grid ** (0.5 - H) / gamma_fn(1.5 - H), mask)
    elapsed = time.perf_counter() - t0
    worst = max(errs, key=errs.get)
    ok = errs[worst] <= 1e-3 and elapsed < 10.0
    acceptance_report(1, ok, f"max rel err {errs[worst]:.2e} ({worst}) <= 1e-3, {elapsed:.1f}s < 10s")
    assert ok, errs


def test_2_kernel_degeneration(acceptance_report):
    g = np.linspace(0.0, 1.0, 64)
    S, X = np.meshgrid(g, g, indexing="ij")
    lower = S <= X
    worst = 0.0
    for H in (0.1, 0.3, 0.5, 0.7, 0.9):
        F = mfcalc.kernel_F(RegularityFunction.constant(H), S[lower], X[lower])
        worst = max(worst, float(np.max(np.abs(F))))
    ok = worst <= 1e-12
    acceptance_report(2, ok, f"max |F| {worst:.2e} <= 1e-12 on 64x64")
    assert ok


def test_3_inverse_property(acceptance_report):
    t0 = time.perf_counter()
    n = 2048
    grid = SampledPath.uniform_grid(1.0, n)
    mask = grid >= 0.1
    errs = {}
    for aname, alpha in (("affine", AFFINE_ALPHA), ("sine", SINE_ALPHA)):
        for f in (catalog.cosine(), catalog.monomial(0.9), catalog.mollified_step()):
            f0 = SampledPath(grid, f(grid))
            back = mfcalc.mf_derivative(mfcalc.mf_integral(f0, alpha), alpha).path.values
            dt = grid[1]
            errs[f"{aname}/{f.name}"] = (mfcalc.l2_norm((back - f0.values)[mask], dt)
                                         / mfcalc.l2_norm(f0.values[mask], dt))
    elapsed = time.perf_counter() - t0
    worst = max(errs, key=errs.get)
    ok = errs[worst] <= 1e-2 and elapsed < 120.0
    acceptance_report(3, ok, f"max rel L2 {errs[worst]:.2e} ({worst}) <= 1e-2, {elapsed:.1f}s < 120s")
    assert ok, errs


def test_4_solver_agreement(acceptance_report):
    n = 512
    grid = SampledPath.uniform_grid(1.0, n)
    worst, decay_ok = 0.0, True
    for alpha in (AFFINE_ALPHA, SINE_ALPHA, LOGISTIC_ALPHA):
        fmax = mfcalc.operator_matrices(alpha, n).fhat_max
        for f in (catalog.monomial(1.0), catalog.monomial(0.9), catalog.mollified_step()):
            g = SampledPath(grid, f(grid))
            a = mfcalc.mf_derivative(g, alpha).path.values
            r = mfcalc.mf_derivative_series(g, alpha)
            worst = max(worst, mfcalc.l2_norm(a - r.path.values, grid[1]) / mfcalc.l2_norm(a, grid[1]))
            norms = r.term_norms
            for m in range(1, len(norms)):
                bound = norms[0] * (fmax * alpha.T) ** m / math.factorial(m)
                decay_ok &= norms[m] <= bound * (1 + 1e-12)
    ok = worst <= 1e-6 and decay_ok
    acceptance_report(4, ok, f"march vs series rel {worst:.2e} <= 1e-6, term norms under |F|^m T^m/m!: {decay_ok}")
    assert ok


def test_5_appendix_identity(acceptance_report):
    deltas = [1e-2, 1e-3, 1e-4]
    gaps = [mfcalc.appendix_identity_check(catalog.monomial(0.9), AFFINE_ALPHA, 0.5, d)[2] for d in deltas]
    orders = mfcalc.richardson_orders(deltas, gaps)
    ok = all(np.diff(gaps) < 0) and min(orders) >= 1.0 and gaps[-1] <= 1e-3
    acceptance_report(5, ok, f"gaps {', '.join(f'{g:.1e}' for g in gaps)}, min order {min(orders):.2f} >= 1")
    assert ok


def test_6_covariance(acceptance_report):
    t0 = time.perf_counter()
    grid = SampledPath.uniform_grid(1.0, 16)
    zmax, ok = {}, True
    for name, h in (("affine", RegularityFunction.affine(0.2, 0.6)), ("brownian", RegularityFunction.constant(0.5))):
        C = mbm.covariance_matrix(h, grid).matrix
        P = mbm.sample_rlmbm(h, grid, mbm.GaussianDriver(2024, 1.0, 16), 100_000, "cholesky")
        passed, z = mbm.covariance_gate(mbm.empirical_covariance(P), C, 3.0)
        zmax[name] = z
        ok &= passed
    bm = mbm.covariance_matrix(RegularityFunction.constant(0.5), grid).matrix
    minst = float(np.max(np.abs(bm - np.minimum.outer(grid, grid))))
    elapsed = time.perf_counter() - t0
    ok = ok and minst <= 1e-12 and elapsed < 300
    acceptance_report(6, ok, f"max z {max(zmax.values()):.2f} <= 3, |C_1/2 - min(s,t)| {minst:.1e}, "
                             f"{elapsed:.1f}s < 300s")
    assert ok


def test_7_girsanov_mean(acceptance_report):
    t0 = time.perf_counter()
    parts, ok = [], True
    for drift in (gs.DriftSpec.constant(0.0), gs.DriftSpec.constant(0.5), gs.DriftSpec.sine()):
        run = gs.GirsanovRun(H_GIRSANOV, drift, x0=0.5, n=64, npaths=10_000, seed=3)
        est = gs.mc_mean_weight(run)
        z = abs(est.mean - 1.0) / est.stderr if est.stderr > 0 else abs(est.mean - 1.0)
        ok &= est.within(1.0, 3.0)
        parts.append(f"{drift.kind}{list(drift.params)} {est.mean:.4f}+-{est.stderr:.4f} (z {z:.2f})")
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 600
    acceptance_report(7, ok, "; ".join(parts) + f", {elapsed:.1f}s")
    assert ok


def test_8_law_equivalence(acceptance_report):
    t0 = time.perf_counter()
    run = gs.GirsanovRun(H_GIRSANOV, gs.DriftSpec.sine(), x0=0.5, n=64, npaths=10_000, seed=3)
    res = gs.law_equivalence_test(run)
    elapsed = time.perf_counter() - t0
    ok = all(r.passed for r in res) and elapsed < 600
    ratio = max(r.gap / r.stderr for r in res)
    acceptance_report(8, ok, f"max gap/stderr {ratio:.2f} <= 3 over {len(res)} functionals, {elapsed:.1f}s")
    assert ok


def test_9_comparison_lattice(acceptance_report):
    t0 = time.perf_counter()
    ok, worst = True, 0.0
    for kind, params in (("linear", (1.0, 0.0)), ("sign", (1.0,)), ("step", (-1.0, 0.3)), ("sin", (1.0, 3.0))):
        run = gs.GirsanovRun(H_GIRSANOV, gs.DriftSpec.constant(0.0), x0=0.1, n=64, npaths=100, seed=9)
        rep = gs.comparison_monotonicity_check(gs.DriftSpec.make(kind, params), 2.0, 4, 8, run)
        ok &= rep["pass"]
        worst = max(worst, rep["max_violation_k"], rep["max_violation_n"])
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 300
    acceptance_report(9, ok, f"max ordering violation {worst:.1e} (k and n), 100 paths, n <= 8, {elapsed:.1f}s")
    assert ok


def test_10_stability_reports(acceptance_report):
    run = gs.GirsanovRun(H_GIRSANOV, gs.DriftSpec.sine(), x0=0.5, n=64, npaths=10_000, seed=3)
    nov = gs.novikov_check(run)
    kr = gs.krylov_report(run, H_GIRSANOV.range_bounds()[1] + 1.5)
    reported = math.isfinite(nov["sup_estimate"]) and math.isfinite(kr["max_ratio"])
    acceptance_report(10, reported,
                      f"non-gating: novikov sup {nov['sup_estimate']:.4f} stable={nov['stable']}, "
                      f"krylov max ratio {kr['max_ratio']:.3f} stable={kr['stable']}")
    assert reported


def _cli_csvs(tmp, command, cfg, threads):
    p = tmp / f"{command}.json"
    p.write_text(json.dumps(cfg))
    out = tmp / f"{command}_t{threads}"
    code = cli.main([command, "--config", str(p), "--out", str(out), "--threads", str(threads)])
    return code, {f: (out / f).read_bytes() for f in sorted(os.listdir(out)) if f.endswith(".csv")}


def test_11_determinism(tmp_path, acceptance_report):
    cases = {
        "mbm": {"schema_version": 1, "h": {"family": "affine", "params": [0.2, 0.6]}, "n": 16,
                "npaths": 5000, "method": "both", "seed": 11},
        "girsanov": {"schema_version": 1, "h": {"family": "affine", "params": [0.2, 0.1]}, "n": 32,
                     "npaths": 1000, "seed": 11},
        "operator": {"schema_version": 1, "task": "inverse_check", "n": 256,
                     "alpha": {"family": "affine", "params": [0.3, 0.4]}, "function": {"name": "cos"}},
    }
    same, nfiles = True, 0
    for command, cfg in cases.items():
        ref = None
        for threads in (1, 2, 4):
            _, csvs = _cli_csvs(tmp_path, command, cfg, threads)
            nfiles += len(csvs)
            if ref is None:
                ref = csvs
            same &= csvs == ref and len(csvs) > 0
    acceptance_report(11, same, f"CSV bytes identical across threads 1/2/4 ({nfiles} files compared)")
    assert same
