"""Command line driver.

    multifrac <operator|mbm|girsanov|report> --config FILE --out DIR [--seed N] [--threads N]

Exit codes: 0 every gate passed, 1 a gate failed, 2 usage or config error.
Each output directory gets the fully materialised ``config.json`` and a
``manifest.json`` tying every file to it.
"""
from __future__ import annotations

import argparse
import copy
import json
import math
import os
import sys

import jsonschema
import numpy as np

from multifrac import catalog, io
from multifrac.errors import MultifracError
from multifrac.regularity import RegularityFunction, SampledPath
from multifrac.special import gamma_fn

SCHEMA_VERSION = 1
EXIT_OK, EXIT_GATE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# schemas and defaults

_NUM = {"type": "number"}
_POSINT = {"type": "integer", "minimum": 1}
_REG = {
    "type": "object",
    "additionalProperties": False,
    "required": ["family", "params"],
    "properties": {
        "family": {"enum": ["constant", "affine", "sinusoidal", "logistic"]},
        "params": {"type": "array", "items": _NUM, "minItems": 1, "maxItems": 4},
        "T": {"type": "number", "exclusiveMinimum": 0},
        "range": {"type": ["array", "null"], "items": _NUM, "minItems": 2, "maxItems": 2},
    },
}
_FUNC = {
    "type": "object",
    "additionalProperties": False,
    "required": ["name"],
    "properties": {"name": {"enum": sorted(catalog.CATALOG) + ["order_power"]},
                   "params": {"type": "array", "items": _NUM}},
}
_DRIFT = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {"kind": {"enum": ["constant", "sin", "linear", "sign", "step"]},
                   "params": {"type": "array", "items": _NUM}},
}
_DERIV = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "epsilon": {"type": ["number", "null"], "exclusiveMinimum": 0},
        "p": {"type": "number", "exclusiveMinimum": 1},
        "solver": {"enum": ["volterra_march", "picard_series"]},
        "series_tol": {"type": "number", "exclusiveMinimum": 0},
        "max_terms": _POSINT,
        "kernel_grid": {"type": "integer", "minimum": 8},
    },
}
_DERIV_DEFAULTS = {"epsilon": None, "p": 2.0, "solver": "volterra_march", "series_tol": 1e-14,
                   "max_terms": 200, "kernel_grid": 129}


def _schema(props: dict, required=()) -> dict:
    base = {"schema_version": {"const": SCHEMA_VERSION}, "seed": {"type": "integer", "minimum": 0}}
    base.update(props)
    return {"type": "object", "additionalProperties": False, "required": ["schema_version", *required],
            "properties": base}


SCHEMAS = {
    "operator": _schema({
        "task": {"enum": ["integral", "derivative", "inverse_check", "appendix_check", "solver_check"]},
        "alpha": _REG,
        "function": _FUNC,
        "n": {"type": "integer", "minimum": 8},
        "derivative": _DERIV,
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
        "window_start": {"type": "number", "minimum": 0, "maximum": 1},
        "appendix": {"type": "object", "additionalProperties": False,
                     "properties": {"x": _NUM, "deltas": {"type": "array", "items": _NUM, "minItems": 3},
                                    "max_gap": _NUM, "min_order": _NUM}},
    }, ["task", "alpha", "function"]),
    "mbm": _schema({
        "h": _REG,
        "n": {"type": "integer", "minimum": 2},
        "npaths": {"type": "integer", "minimum": 100},
        "method": {"enum": ["cholesky", "kernel", "both"]},
        "fine_factor": {"type": "integer", "minimum": 4},
        "residual": {"type": "boolean"},
        "nsigma": {"type": "number", "exclusiveMinimum": 0},
        "export_paths": {"type": "integer", "minimum": 0},
        "holder": {"type": ["object", "null"], "additionalProperties": False,
                   "properties": {"t": _NUM, "lags": {"type": "array", "items": _POSINT, "minItems": 3}}},
    }, ["h"]),
    "girsanov": _schema({
        "h": _REG,
        "x0": _NUM,
        "n": {"type": "integer", "minimum": 4},
        "npaths": {"type": "integer", "minimum": 100},
        "drifts": {"type": "array", "items": _DRIFT, "minItems": 1},
        "law_drift": _DRIFT,
        "phi": {"type": "array", "items": {"enum": ["tanh_terminal", "indicator_terminal_nonneg",
                                                     "tanh_two_marginal"]}},
        "derivative": _DERIV,
        "nsigma": {"type": "number", "exclusiveMinimum": 0},
        "lattice": {"type": ["object", "null"], "additionalProperties": False,
                    "properties": {"drift": _DRIFT, "R": {"type": "number", "exclusiveMinimum": 0},
                                   "n": _POSINT, "kmax": _POSINT, "npaths": _POSINT}},
        "novikov_lambda": {"type": "number", "exclusiveMinimum": 0},
        "krylov_rho": {"type": "number"},
    }, ["h"]),
    "report": _schema({
        "inputs": {"type": "array", "items": {"type": "string"}},
        "plots": {"type": "boolean"},
    }, ["inputs"]),
}

DEFAULTS = {
    "operator": {"seed": 0, "n": 2048, "derivative": _DERIV_DEFAULTS, "tolerance": None,
                 "window_start": 0.1, "appendix": {"x": 0.5, "deltas": [1e-2, 1e-3, 1e-4],
                                                   "max_gap": 1e-3, "min_order": 1.0}},
    "mbm": {"seed": 0, "n": 16, "npaths": 100_000, "method": "cholesky", "fine_factor": 4,
            "residual": True, "nsigma": 3.0, "export_paths": 100, "holder": None},
    "girsanov": {"seed": 0, "x0": 0.5, "n": 64, "npaths": 10_000,
                 "drifts": [{"kind": "constant", "params": [0.0]}, {"kind": "constant", "params": [0.5]},
                            {"kind": "sin", "params": [1.0, 1.0]}],
                 "law_drift": {"kind": "sin", "params": [1.0, 1.0]},
                 "phi": ["tanh_terminal", "indicator_terminal_nonneg", "tanh_two_marginal"],
                 "derivative": _DERIV_DEFAULTS, "nsigma": 3.0,
                 "lattice": {"drift": {"kind": "linear", "params": [1.0, 0.0]}, "R": 2.0, "n": 4, "kmax": 8,
                             "npaths": 100},
                 "novikov_lambda": 0.05, "krylov_rho": None},
    "report": {"seed": 0, "plots": True},
}


def _merge(defaults, cfg):
    out = copy.deepcopy(defaults)
    for k, v in cfg.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def load_config(command: str, path: str, seed: int | None = None) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}")
    try:
        jsonschema.validate(raw, SCHEMAS[command])
    except jsonschema.ValidationError as exc:
        loc = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise UsageError(f"config error at {loc}: {exc.message}")
    cfg = _merge(DEFAULTS[command], raw)
    if seed is not None:
        cfg["seed"] = seed
    return cfg


def _reg(spec: dict) -> RegularityFunction:
    return RegularityFunction.from_dict(spec)


def _deriv_cfg(block: dict, n: int):
    from multifrac.mfcalc import DerivativeConfig
    return DerivativeConfig(n=n, **block)


def check_config(command: str, cfg: dict) -> None:
    """Semantic checks that need the model objects; raise before any output is written."""
    try:
        if command == "operator":
            alpha = _reg(cfg["alpha"])
            func = catalog.from_dict(cfg["function"], alpha)
            if cfg["task"] in ("derivative", "solver_check", "appendix_check") and abs(float(func(0.0))) > 0:
                raise UsageError("the derivative needs a function with g(0) = 0")
            if cfg["task"] != "integral" and cfg["task"] != "appendix_check":
                _deriv_cfg(cfg["derivative"], cfg["n"]).validated(alpha)
        elif command == "mbm":
            _reg(cfg["h"])
        elif command == "girsanov":
            from multifrac import girsanov as G
            h = _reg(cfg["h"])
            if not h.range_bounds()[1] < 0.5:
                raise UsageError(f"h must stay strictly below 1/2 (sup h = {h.range_bounds()[1]:g})")
            _deriv_cfg(cfg["derivative"], cfg["n"]).validated(h.shifted(0.5))
            for d in cfg["drifts"] + [cfg["law_drift"]] + ([cfg["lattice"]["drift"]] if cfg["lattice"] else []):
                G.DriftSpec.from_dict(d, h.T)
            if cfg["lattice"] and not 1 <= cfg["lattice"]["n"] <= cfg["lattice"]["kmax"]:
                raise UsageError("lattice needs 1 <= n <= kmax")
            rho = cfg["krylov_rho"]
            if rho is not None and not rho > h.range_bounds()[1] + 1.0:
                raise UsageError(f"krylov_rho={rho} must exceed sup h + 1")
        elif command == "report":
            if not cfg["inputs"]:
                raise UsageError("report needs at least one input directory")
            for d in cfg["inputs"]:
                if not os.path.isfile(os.path.join(d, "summary.json")):
                    raise UsageError(f"no summary.json in {d}")
    except MultifracError as exc:
        raise UsageError(str(exc))


def _gate(name, estimate, stderr, threshold, passed, gating=True):
    return {"name": name, "estimate": float(estimate), "stderr": float(stderr),
            "threshold": float(threshold), "pass": bool(passed), "gating": bool(gating)}


def _finish(out: str, cfg: dict, command: str, gates: list, files: list, extra: dict) -> int:
    io.write_csv(os.path.join(out, "gates.csv"), ["name", "estimate", "stderr", "threshold", "pass", "gating"],
                 [[g["name"], g["estimate"], g["stderr"], g["threshold"], g["pass"], g["gating"]] for g in gates])
    ok = all(g["pass"] for g in gates if g["gating"])
    summary = {"command": command, "config": cfg, "gates": gates, "all_gates_pass": ok}
    summary.update(extra)
    io.write_json(os.path.join(out, "summary.json"), summary)
    io.write_json(os.path.join(out, "config.json"), cfg)
    io.write_manifest(out, files + ["gates.csv", "summary.json"])
    return EXIT_OK if ok else EXIT_GATE


# ---------------------------------------------------------------------------
# operator

def _closed_form(task, alpha, func, grid):
    """Constant-order closed form for monomials / constants, or None."""
    if not alpha.is_constant or func.name not in ("monomial", "constant"):
        return None
    H = alpha.params[0]
    if func.name == "constant":
        c = func.params[0]
        if task == "integral":
            return c * grid ** H / gamma_fn(1.0 + H)
        return None
    g = func.params[0]
    with np.errstate(divide="ignore"):
        if task == "integral":
            return gamma_fn(g + 1.0) / gamma_fn(g + 1.0 + H) * grid ** (g + H)
        if g + 1.0 - H <= 0:
            return None
        return gamma_fn(g + 1.0) / gamma_fn(g + 1.0 - H) * grid ** (g - H)


def cmd_operator(cfg: dict, out: str, threads: int) -> int:
    from multifrac import mfcalc

    alpha = _reg(cfg["alpha"])
    func = catalog.from_dict(cfg["function"], alpha)
    n = cfg["n"]
    dcfg = _deriv_cfg(cfg["derivative"], n)
    grid = SampledPath.uniform_grid(alpha.T, n)
    task = cfg["task"]
    tol = cfg["tolerance"]
    gates, files, extra = [], [], {}
    if task in ("integral", "derivative"):
        path = SampledPath(grid, func(grid))
        if task == "integral":
            res = mfcalc.mf_integral(path, alpha)
            diag = {"quadrature_panels": float(n)}
        else:
            r = mfcalc.mf_derivative(path, alpha, dcfg)
            res, diag = r.path, r.diagnostics
        cf = _closed_form(task, alpha, func, grid)
        header = ["t", "input", "output"] + (["closed_form"] if cf is not None else [])
        rows = [[grid[i], path.values[i], res.values[i]] + ([cf[i]] if cf is not None else [])
                for i in range(n + 1)]
        io.write_csv(os.path.join(out, "operator.csv"), header, rows)
        files.append("operator.csv")
        if cf is not None:
            m = grid >= cfg["window_start"] * alpha.T
            rel = float(np.max(np.abs(res.values[m] - cf[m]) / np.abs(cf[m])))
            gates.append(_gate(f"{task}_closed_form_rel", rel, 0.0, tol or 1e-3, rel <= (tol or 1e-3), False))
        io.write_json(os.path.join(out, "diagnostics.json"), diag)
        files.append("diagnostics.json")
    elif task in ("inverse_check", "solver_check"):
        f0 = SampledPath(grid, func(grid))
        if task == "inverse_check":
            g = mfcalc.mf_integral(f0, alpha)
            target = f0.values
        else:
            g = SampledPath(grid, func(grid))
        r1 = mfcalc.mf_derivative(g, alpha, dcfg)
        if task == "inverse_check":
            m = grid >= cfg["window_start"] * alpha.T
            err = mfcalc.l2_norm((r1.path.values - target)[m], g.dt) / mfcalc.l2_norm(target[m], g.dt)
            gates.append(_gate("inverse_l2_rel", err, 0.0, tol or 1e-2, err <= (tol or 1e-2)))
            io.write_csv(os.path.join(out, "operator.csv"), ["t", "f0", "I_f0", "D_I_f0"],
                         [[grid[i], target[i], g.values[i], r1.path.values[i]] for i in range(n + 1)])
        else:
            from dataclasses import replace
            r2 = mfcalc.mf_derivative_series(g, alpha, replace(dcfg, solver="picard_series"))
            rel = mfcalc.l2_norm(r1.path.values - r2.path.values, g.dt) / mfcalc.l2_norm(r1.path.values, g.dt)
            gates.append(_gate("solver_agreement_rel", rel, 0.0, tol or 1e-6, rel <= (tol or 1e-6)))
            io.write_csv(os.path.join(out, "operator.csv"), ["t", "g", "march", "series"],
                         [[grid[i], g.values[i], r1.path.values[i], r2.path.values[i]] for i in range(n + 1)])
            extra["term_norms"] = list(r2.term_norms)
        files.append("operator.csv")
        io.write_json(os.path.join(out, "diagnostics.json"), r1.diagnostics)
        files.append("diagnostics.json")
    else:  # appendix_check
        ap = cfg["appendix"]
        deltas = ap["deltas"]
        res = [mfcalc.appendix_identity_check(func, alpha, ap["x"], d) for d in deltas]
        gaps = [r[2] for r in res]
        orders = mfcalc.richardson_orders(deltas, gaps)
        io.write_csv(os.path.join(out, "appendix.csv"), ["delta", "lhs", "rhs", "gap"],
                     [[d, *r] for d, r in zip(deltas, res)])
        files.append("appendix.csv")
        gates.append(_gate("appendix_final_gap", gaps[-1], 0.0, ap["max_gap"], gaps[-1] <= ap["max_gap"]))
        mo = min(orders)
        gates.append(_gate("appendix_min_order", mo, 0.0, ap["min_order"], mo >= ap["min_order"]))
        extra["orders"] = orders
    return _finish(out, cfg, "operator", gates, files, extra)


# ---------------------------------------------------------------------------
# mbm

def cmd_mbm(cfg: dict, out: str, threads: int) -> int:
    from multifrac import mbm

    h = _reg(cfg["h"])
    n = cfg["n"]
    grid = SampledPath.uniform_grid(h.T, n)
    C = mbm.covariance_matrix(h, grid)
    methods = ["cholesky", "kernel"] if cfg["method"] == "both" else [cfg["method"]]
    nsig = cfg["nsigma"]
    gates, files, emp, bundles = [], [], {}, {}
    for k, meth in enumerate(methods):
        m = n * cfg["fine_factor"] if meth == "kernel" else n
        drv = mbm.GaussianDriver(cfg["seed"], h.T, m, threads)
        P = mbm.sample_rlmbm(h, grid, drv, cfg["npaths"], meth, residual=cfg["residual"])
        bundles[meth] = P
        E = mbm.empirical_covariance(P)
        emp[meth] = E
        ref = C.matrix
        if meth == "kernel" and not cfg["residual"]:
            ref = C.matrix + mbm.kernel_bias(h, grid, m)
        ok, zmax = mbm.covariance_gate(E, ref, nsig)
        gates.append(_gate(f"covariance_{meth}_max_z", zmax, 0.0, nsig, ok))
        ga = mbm.gaussianity_check(P)
        zs = max(float(np.max(np.abs(ga["skewness"]))) / ga["se_skew"],
                 float(np.max(np.abs(ga["excess_kurtosis"]))) / ga["se_kurt"])
        gates.append(_gate(f"gaussianity_{meth}_max_z", zs, 0.0, 4.0, ga["pass"]))
        if cfg["holder"]:
            est, se = mbm.holder_exponent_estimate(P, cfg["holder"]["t"], cfg["holder"]["lags"])
            target = float(h(cfg["holder"]["t"]))
            gates.append(_gate(f"holder_{meth}", est, se, target, abs(est - target) <= 0.07, False))
    if len(methods) == 2:
        a, b = emp["cholesky"], emp["kernel"]
        se = np.sqrt(a.stderr ** 2 + b.stderr ** 2)
        diff = np.abs(a.matrix - b.matrix)
        z = np.where(se > 0, diff / np.where(se > 0, se, 1.0), 0.0)
        ok = bool(np.all(z <= nsig) and np.all(diff[se == 0] <= 1e-12))
        gates.append(_gate("cholesky_vs_kernel_max_z", float(z.max()), 0.0, nsig, ok))
    first = bundles[methods[0]]
    k = min(cfg["export_paths"], len(first))
    io.write_csv(os.path.join(out, "paths.csv"), ["path"] + [io.fmt(t) for t in grid],
                 [[i, *first.values[i]] for i in range(k)])
    files.append("paths.csv")
    header = ["i", "j", "t_i", "t_j", "oracle"]
    for meth in methods:
        header += [f"empirical_{meth}", f"se_{meth}", f"z_{meth}"]
    rows = []
    for i in range(n + 1):
        for j in range(i + 1):
            row = [i, j, grid[i], grid[j], C.matrix[i, j]]
            for meth in methods:
                e, s = emp[meth].matrix[i, j], emp[meth].stderr[i, j]
                row += [e, s, abs(e - C.matrix[i, j]) / s if s > 0 else 0.0]
            rows.append(row)
    io.write_csv(os.path.join(out, "covariance.csv"), header, rows)
    files.append("covariance.csv")
    extra = {"stamp": {"seed": cfg["seed"], "npaths": cfg["npaths"], "methods": methods},
             "jitter": {m: bundles[m].meta.get("jitter", 0.0) for m in methods}}
    return _finish(out, cfg, "mbm", gates, files, extra)


# ---------------------------------------------------------------------------
# girsanov

def cmd_girsanov(cfg: dict, out: str, threads: int) -> int:
    from multifrac import girsanov as G

    h = _reg(cfg["h"])
    dcfg = _deriv_cfg(cfg["derivative"], cfg["n"])
    nsig = cfg["nsigma"]
    base = dict(h=h, x0=cfg["x0"], n=cfg["n"], npaths=cfg["npaths"], seed=cfg["seed"], threads=threads,
                cfg=dcfg, lam=cfg["novikov_lambda"])
    gates, files, extra = [], [], {}
    zcols, znames = [], []
    for k, d in enumerate(cfg["drifts"]):
        run = G.GirsanovRun(drift=G.DriftSpec.from_dict(d, h.T), **base)
        _, _, Z = G.weighted_paths(run)
        est = G._estimate(Z)
        name = f"EZ_{d['kind']}_{'_'.join(io.fmt(p) for p in d.get('params', []))}".rstrip("_")
        gates.append(_gate(name, est.mean, est.stderr, 1.0, est.within(1.0, nsig)))
        zcols.append(Z)
        znames.append(name)
    io.write_csv(os.path.join(out, "weights.csv"), ["path"] + znames,
                 [[i, *[c[i] for c in zcols]] for i in range(cfg["npaths"])])
    files.append("weights.csv")

    run = G.GirsanovRun(drift=G.DriftSpec.from_dict(cfg["law_drift"], h.T), **base)
    phis = [p for p in G.PHI_BATTERY if p.name in cfg["phi"]]
    try:
        X = G.euler_weak_solution(run)
        env_ok, margin = True, X.meta["envelope_margin_min"]
        for r in G.law_equivalence_test(run, phis):
            gates.append(_gate(f"law_{r.name}", r.gap, r.stderr, nsig * r.stderr, r.gap <= nsig * r.stderr))
    except MultifracError as exc:
        if "envelope" not in str(exc):
            raise
        env_ok, margin = False, -1.0
    gates.append(_gate("gronwall_envelope_min_margin", margin, 0.0, 0.0, env_ok))

    if cfg["lattice"]:
        lat = cfg["lattice"]
        lrun = G.GirsanovRun(drift=G.DriftSpec.from_dict(lat["drift"], h.T),
                             **{**base, "npaths": lat["npaths"]})
        rep = G.comparison_monotonicity_check(G.DriftSpec.from_dict(lat["drift"], h.T), lat["R"], lat["n"],
                                              lat["kmax"], lrun)
        gates.append(_gate("lattice_monotone_k", rep["max_violation_k"], 0.0, rep["tolerance"], rep["monotone_k"]))
        gates.append(_gate("lattice_monotone_n", rep["max_violation_n"], 0.0, rep["tolerance"], rep["monotone_n"]))
        extra["lattice"] = rep

    nov = G.novikov_check(run)
    gates.append(_gate("novikov_sup", nov["sup_estimate"], abs(nov["sup_a"] - nov["sup_b"]), 0.5, nov["stable"],
                       False))
    rho = cfg["krylov_rho"] or (h.range_bounds()[1] + 1.5)
    kr = G.krylov_report(run, rho)
    gates.append(_gate("krylov_max_ratio", kr["max_ratio"], 0.0, 0.5, kr["stable"], False))
    extra.update({"novikov": nov, "krylov": kr})
    return _finish(out, cfg, "girsanov", gates, files, extra)


# ---------------------------------------------------------------------------
# report

def cmd_report(cfg: dict, out: str, threads: int) -> int:
    runs = []
    for d in cfg["inputs"]:
        p = os.path.join(d, "summary.json")
        if not os.path.isfile(p):
            raise UsageError(f"no summary.json in {d}")
        with open(p) as fh:
            runs.append((d, json.load(fh)))
    if not runs:
        raise UsageError("report needs at least one input directory")
    rows, files = [], []
    for d, s in runs:
        for g in s["gates"]:
            rows.append([os.path.basename(os.path.normpath(d)), s["command"], g["name"], g["estimate"],
                         g["stderr"], g["threshold"], g["pass"], g["gating"]])
    io.write_csv(os.path.join(out, "summary.csv"),
                 ["source", "command", "name", "estimate", "stderr", "threshold", "pass", "gating"], rows)
    files.append("summary.csv")
    plots = []
    if cfg["plots"]:
        for d, s in runs:
            tag = os.path.basename(os.path.normpath(d))
            plots += _plots_for(d, s, out, tag)
    files += plots
    gates = [_gate(f"{r[0]}:{r[2]}", r[3], r[4], r[5], r[6] == "true" or r[6] is True, r[7] == "true" or r[7] is True)
             for r in rows]
    return _finish(out, cfg, "report", gates, files, {"plots": plots})


def _plots_for(d, s, out, tag):
    made = []
    cmd = s["command"]
    if cmd == "mbm":
        hdr, rows = io.read_csv(os.path.join(d, "paths.csv"))
        t = np.array([float(v) for v in hdr[1:]])
        series = {f"path {r[0]}": [float(v) for v in r[1:]] for r in rows[:10]}
        if series:
            name = f"{tag}_paths.svg"
            io.svg_lines(os.path.join(out, name), t, series, "sample paths", "t", "B^h")
            made.append(name)
        hdr, rows = io.read_csv(os.path.join(d, "covariance.csv"))
        diag = [r for r in rows if r[0] == r[1]]
        t = [float(r[2]) for r in diag]
        series = {"oracle": [float(r[4]) for r in diag]}
        for k, col in enumerate(hdr):
            if col.startswith("empirical_"):
                series[col] = [float(r[k]) for r in diag]
        name = f"{tag}_covariance_diagonal.svg"
        io.svg_lines(os.path.join(out, name), t, series, "variance", "t", "Var")
        made.append(name)
    elif cmd == "operator" and os.path.isfile(os.path.join(d, "operator.csv")):
        hdr, rows = io.read_csv(os.path.join(d, "operator.csv"))
        t = [float(r[0]) for r in rows]
        series = {hdr[k]: [float(r[k]) for r in rows] for k in range(1, len(hdr))}
        name = f"{tag}_operator.svg"
        io.svg_lines(os.path.join(out, name), t, series, "operator paths", "t", "")
        made.append(name)
    if s["gates"]:
        g = s["gates"]
        name = f"{tag}_gates.svg"
        io.svg_errorbars(os.path.join(out, name), [x["name"] for x in g], [x["estimate"] for x in g],
                         [x["stderr"] for x in g], None, "gate estimates")
        made.append(name)
    return made


# ---------------------------------------------------------------------------

COMMANDS = {"operator": cmd_operator, "mbm": cmd_mbm, "girsanov": cmd_girsanov, "report": cmd_report}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="multifrac", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.threads < 1 or (args.seed is not None and args.seed < 0):
        print("error: --threads must be >= 1 and --seed >= 0", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = load_config(args.command, args.config, args.seed)
        check_config(args.command, cfg)
        os.makedirs(args.out, exist_ok=True)
        return COMMANDS[args.command](cfg, args.out, args.threads)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MultifracError, ValueError, KeyError, TypeError) as exc:
        if isinstance(exc, MultifracError) and type(exc).__name__ in ("NumericError", "ConvergenceError"):
            print(f"gate failure: {exc}", file=sys.stderr)
            return EXIT_GATE
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
