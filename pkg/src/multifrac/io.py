"""Output helpers: CSV with 17 significant digits, canonical JSON, static SVG."""
from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from html import escape

import numpy as np


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


def write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])


def read_csv(path: str):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, np.ndarray):
        return [_jsonable(v) for v in o.tolist()]
    if isinstance(o, (np.bool_, bool)):
        return bool(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (float, np.floating)):
        f = float(o)
        return f if math.isfinite(f) else str(f)
    return o


def write_json(path: str, obj) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def sha256(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def write_manifest(out_dir: str, files, config_name: str = "config.json") -> None:
    entries = [{"file": f, "sha256": sha256(os.path.join(out_dir, f)), "config": config_name}
               for f in sorted(files)]
    write_json(os.path.join(out_dir, "manifest.json"), {"files": entries})


# ---------------------------------------------------------------------------
# SVG

_W, _H, _PAD = 640, 400, 48
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


class _Frame:
    def __init__(self, xs, ys):
        xs = np.asarray([v for v in xs if math.isfinite(v)], dtype=float)
        ys = np.asarray([v for v in ys if math.isfinite(v)], dtype=float)
        self.x0, self.x1 = (float(xs.min()), float(xs.max())) if xs.size else (0.0, 1.0)
        self.y0, self.y1 = (float(ys.min()), float(ys.max())) if ys.size else (0.0, 1.0)
        if self.x1 == self.x0:
            self.x1 = self.x0 + 1.0
        if self.y1 == self.y0:
            self.y0, self.y1 = self.y0 - 0.5, self.y1 + 0.5

    def px(self, x):
        return _PAD + (x - self.x0) / (self.x1 - self.x0) * (_W - 2 * _PAD)

    def py(self, y):
        return _H - _PAD - (y - self.y0) / (self.y1 - self.y0) * (_H - 2 * _PAD)


def _axes(fr: _Frame, title: str, xlabel: str, ylabel: str):
    out = [f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
           f'<line x1="{_PAD}" y1="{_H - _PAD}" x2="{_W - _PAD}" y2="{_H - _PAD}" stroke="black"/>',
           f'<line x1="{_PAD}" y1="{_PAD}" x2="{_PAD}" y2="{_H - _PAD}" stroke="black"/>',
           f'<text x="{_W / 2}" y="{_PAD / 2}" text-anchor="middle" font-size="14">{escape(title)}</text>',
           f'<text x="{_W / 2}" y="{_H - 10}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>',
           f'<text x="14" y="{_H / 2}" text-anchor="middle" font-size="12" '
           f'transform="rotate(-90 14 {_H / 2})">{escape(ylabel)}</text>']
    for v, anchor in ((fr.x0, "start"), (fr.x1, "end")):
        out.append(f'<text x="{fr.px(v):.2f}" y="{_H - _PAD + 14}" text-anchor="{anchor}" '
                   f'font-size="10">{v:.4g}</text>')
    for v in (fr.y0, fr.y1):
        out.append(f'<text x="{_PAD - 4}" y="{fr.py(v):.2f}" text-anchor="end" font-size="10">{v:.4g}</text>')
    return out


def _doc(body) -> str:
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
            f'viewBox="0 0 {_W} {_H}">\n' + "\n".join(body) + "\n</svg>\n")


def svg_lines(path: str, x, series: dict, title: str = "", xlabel: str = "t", ylabel: str = "") -> None:
    """Polyline plot; ``series`` maps label -> y values on x."""
    x = np.asarray(x, dtype=float)
    fr = _Frame(x, np.concatenate([np.asarray(v, dtype=float) for v in series.values()]))
    body = _axes(fr, title, xlabel, ylabel)
    for k, (label, y) in enumerate(series.items()):
        pts = " ".join(f"{fr.px(a):.2f},{fr.py(b):.2f}" for a, b in zip(x, y) if math.isfinite(b))
        c = _COLORS[k % len(_COLORS)]
        body.append(f'<polyline fill="none" stroke="{c}" stroke-width="1" points="{pts}"/>')
        if len(series) <= 8:
            body.append(f'<text x="{_W - _PAD + 2}" y="{_PAD + 14 * k}" font-size="10" fill="{c}">'
                        f'{escape(str(label))}</text>')
    with open(path, "w") as fh:
        fh.write(_doc(body))


def svg_errorbars(path: str, labels, est, err, ref=None, title: str = "") -> None:
    """Point estimates with +-err bars; optional reference values as ticks."""
    est = np.asarray(est, dtype=float)
    err = np.asarray(err, dtype=float)
    k = len(labels)
    ys = np.concatenate([est - err, est + err] + ([np.asarray(ref, dtype=float)] if ref is not None else []))
    fr = _Frame([-0.5, k - 0.5], ys)
    body = _axes(fr, title, "gate", "estimate")
    for i in range(k):
        x = fr.px(i)
        body.append(f'<line x1="{x:.2f}" y1="{fr.py(est[i] - err[i]):.2f}" x2="{x:.2f}" '
                    f'y2="{fr.py(est[i] + err[i]):.2f}" stroke="black"/>')
        body.append(f'<circle cx="{x:.2f}" cy="{fr.py(est[i]):.2f}" r="3" fill="{_COLORS[0]}"/>')
        if ref is not None and math.isfinite(ref[i]):
            body.append(f'<line x1="{x - 6:.2f}" y1="{fr.py(ref[i]):.2f}" x2="{x + 6:.2f}" '
                        f'y2="{fr.py(ref[i]):.2f}" stroke="{_COLORS[1]}"/>')
        body.append(f'<text x="{x:.2f}" y="{_H - _PAD + 26}" text-anchor="middle" font-size="8">'
                    f'{escape(str(labels[i]))[:24]}</text>')
    with open(path, "w") as fh:
        fh.write(_doc(body))
