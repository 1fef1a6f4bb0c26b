"""CSV tables, dependency-free SVG charts and the run manifest."""
from __future__ import annotations

import csv
import hashlib
import json
import math
from collections import OrderedDict
from pathlib import Path
from xml.sax.saxutils import escape

from . import __version__
from .experiments import SweepRow

COLUMNS = {
    "fig1": ("beta", "sim_bin_lo", "sim_bin_hi", "mean_reward", "stderr", "n_episodes"),
    "exp1": ("patch_w", "patch_h", "strategy", "lambda", "mean_return", "stderr", "cost_bits",
             "return_norm", "cost_norm", "u_prime"),
    "exp2": ("rho", "strategy", "lambda", "mean_return", "stderr", "cost_bits", "return_norm",
             "cost_norm", "u_prime"),
}
_ATTR = {"lambda": "lam", "mean_reward": "mean_return"}


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".9g")
    return str(value)


def row_values(row: SweepRow, experiment: str) -> list[str]:
    return [_fmt(getattr(row, _ATTR.get(c, c))) for c in COLUMNS[experiment]]


def write_csv(rows: list[SweepRow], path, experiment: str | None = None) -> None:
    if experiment is None:
        if not rows:
            raise ValueError("experiment must be given for an empty table")
        experiment = rows[0].experiment
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COLUMNS[experiment])
        for row in rows:
            writer.writerow(row_values(row, experiment))


def read_csv(path) -> list[dict[str, str]]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


# ---------------------------------------------------------------------------
# SVG

WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 170, 40, 60
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2",
           "#7f7f7f", "#bcbd22", "#17becf")

PLOTS = {
    "fig1": dict(x=lambda r: 0.5 * (r.sim_bin_lo + r.sim_bin_hi), y=lambda r: r.mean_return,
                 series=lambda r: f"beta={r.beta:g}", labels=("similarity", "mean reward", "beta")),
    "exp1": dict(x=lambda r: r.lam, y=lambda r: r.u_prime,
                 series=lambda r: r.strategy if r.patch_w is None else f"{r.patch_w}x{r.patch_h}",
                 labels=("lambda", "cost-adjusted utility", "patch")),
    "exp2": dict(x=lambda r: r.lam, y=lambda r: r.u_prime,
                 series=lambda r: f"{r.strategy} rho={r.rho:g}", labels=("lambda", "cost-adjusted utility", "rho")),
}
HEATMAPS = {
    "fig1": dict(x=lambda r: 0.5 * (r.sim_bin_lo + r.sim_bin_hi), y=lambda r: r.beta, value=lambda r: r.mean_return,
                 labels=("similarity", "beta", "mean reward")),
    "exp1": dict(x=lambda r: r.lam, y=lambda r: -1 if r.patch_w is None else r.patch_w,
                 value=lambda r: r.u_prime, labels=("lambda", "patch width (-1 = baseline)", "U'")),
    "exp2": dict(x=lambda r: r.rho, y=lambda r: r.lam, value=lambda r: r.u_prime,
                 labels=("rho", "lambda", "U'")),
}


def _n(v: float) -> str:
    return format(round(v, 2), "g")


def _scale(lo, hi, a, b):
    if hi == lo:
        return lambda v: 0.5 * (a + b)
    return lambda v: a + (v - lo) / (hi - lo) * (b - a)


def _axes(out, xlo, xhi, ylo, yhi, xlabel, ylabel, title):
    x0, x1, y0, y1 = LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP
    out.append(f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" fill="none" stroke="#333"/>')
    sx, sy = _scale(xlo, xhi, x0, x1), _scale(ylo, yhi, y0, y1)
    for i in range(5):
        xv = xlo + (xhi - xlo) * i / 4
        yv = ylo + (yhi - ylo) * i / 4
        out.append(f'<line x1="{_n(sx(xv))}" y1="{y0}" x2="{_n(sx(xv))}" y2="{y0 + 5}" stroke="#333"/>')
        out.append(f'<text x="{_n(sx(xv))}" y="{y0 + 18}" text-anchor="middle">{xv:.3g}</text>')
        out.append(f'<line x1="{x0 - 5}" y1="{_n(sy(yv))}" x2="{x0}" y2="{_n(sy(yv))}" stroke="#333"/>')
        out.append(f'<text x="{x0 - 8}" y="{_n(sy(yv) + 4)}" text-anchor="end">{yv:.3g}</text>')
    out.append(f'<text x="{(x0 + x1) // 2}" y="{HEIGHT - 20}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="18" y="{(y0 + y1) // 2}" text-anchor="middle" '
               f'transform="rotate(-90 18 {(y0 + y1) // 2})">{escape(ylabel)}</text>')
    out.append(f'<text x="{(x0 + x1) // 2}" y="24" text-anchor="middle" font-weight="bold">{escape(title)}</text>')
    return sx, sy


def _finite(v) -> bool:
    return v is not None and math.isfinite(v)


def _line_svg(rows, spec, title):
    pts = OrderedDict()
    for r in rows:
        x, y = spec["x"](r), spec["y"](r)
        if _finite(x) and _finite(y):
            pts.setdefault(spec["series"](r), []).append((x, y))
    if not pts:
        raise ValueError("no finite points to plot")
    xs = [p[0] for s in pts.values() for p in s]
    ys = [p[1] for s in pts.values() for p in s]
    out = []
    sx, sy = _axes(out, min(xs), max(xs), min(ys), max(ys), spec["labels"][0], spec["labels"][1], title)
    for i, (name, series) in enumerate(pts.items()):
        color = PALETTE[i % len(PALETTE)]
        coords = " ".join(f"{_n(sx(x))},{_n(sy(y))}" for x, y in series)
        if len(series) > 1:
            out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for x, y in series:
            out.append(f'<circle cx="{_n(sx(x))}" cy="{_n(sy(y))}" r="2.5" fill="{color}"/>')
        ly = TOP + 14 * i + 6
        lx = WIDTH - RIGHT + 12
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 16}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 20}" y="{ly + 4}">{escape(str(name))}</text>')
    return out


def _color(t: float) -> str:
    # dark blue -> yellow
    a, b = (68, 1, 84), (253, 231, 37)
    t = min(max(t, 0.0), 1.0)
    return "#" + "".join(f"{round(p + (q - p) * t):02x}" for p, q in zip(a, b))


def _heatmap_svg(rows, spec, title):
    cells = OrderedDict()
    for r in rows:
        v = spec["value"](r)
        if _finite(v):
            cells.setdefault((spec["x"](r), spec["y"](r)), []).append(v)
    if not cells:
        raise ValueError("no finite cells to plot")
    xs = sorted({k[0] for k in cells})
    ys = sorted({k[1] for k in cells})
    vals = {k: sum(v) / len(v) for k, v in cells.items()}
    vlo, vhi = min(vals.values()), max(vals.values())
    x0, x1, y0, y1 = LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP
    cw, ch = (x1 - x0) / len(xs), (y0 - y1) / len(ys)
    out = [f'<text x="{(x0 + x1) // 2}" y="24" text-anchor="middle" font-weight="bold">{escape(title)}</text>']
    for (x, y), v in sorted(vals.items()):
        i, j = xs.index(x), ys.index(y)
        t = 0.5 if vhi == vlo else (v - vlo) / (vhi - vlo)
        out.append(f'<rect class="cell" x="{_n(x0 + i * cw)}" y="{_n(y0 - (j + 1) * ch)}" width="{_n(cw)}" '
                   f'height="{_n(ch)}" fill="{_color(t)}"><title>{x:g}, {y:g}: {v:.4g}</title></rect>')
    for i, x in enumerate(xs):
        out.append(f'<text x="{_n(x0 + (i + 0.5) * cw)}" y="{y0 + 18}" text-anchor="middle">{x:.3g}</text>')
    for j, y in enumerate(ys):
        out.append(f'<text x="{x0 - 8}" y="{_n(y0 - (j + 0.5) * ch + 4)}" text-anchor="end">{y:.3g}</text>')
    out.append(f'<text x="{(x0 + x1) // 2}" y="{HEIGHT - 20}" text-anchor="middle">{escape(spec["labels"][0])}</text>')
    out.append(f'<text x="18" y="{(y0 + y1) // 2}" text-anchor="middle" '
               f'transform="rotate(-90 18 {(y0 + y1) // 2})">{escape(spec["labels"][1])}</text>')
    lx = WIDTH - RIGHT + 20
    for k in range(11):
        out.append(f'<rect x="{lx}" y="{_n(y0 - (k + 1) * (y0 - y1) / 11)}" width="16" '
                   f'height="{_n((y0 - y1) / 11)}" fill="{_color(k / 10)}"/>')
    out.append(f'<text x="{lx + 22}" y="{y0}">{vlo:.3g}</text>')
    out.append(f'<text x="{lx + 22}" y="{y1 + 10}">{vhi:.3g}</text>')
    out.append(f'<text x="{lx}" y="{y1 - 8}">{escape(spec["labels"][2])}</text>')
    return out


def render_svg(rows: list[SweepRow], kind: str, path, title: str | None = None) -> None:
    """Write a standalone line chart or heatmap; output depends only on ``rows``."""
    if not rows:
        raise ValueError("cannot render an empty table")
    experiment = rows[0].experiment
    if kind == "line":
        body = _line_svg(rows, PLOTS[experiment], title or experiment)
    elif kind == "heatmap":
        body = _heatmap_svg(rows, HEATMAPS[experiment], title or experiment)
    else:
        raise ValueError(f"kind must be 'line' or 'heatmap', got {kind!r}")
    svg = "\n".join([
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        *body,
        "</svg>",
        "",
    ])
    Path(path).write_text(svg)


# ---------------------------------------------------------------------------
# Manifest

def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out_dir, command: str, config: dict, outputs: list[str], normalization: dict) -> Path:
    out_dir = Path(out_dir)
    manifest = {
        "tool": "sociorepr",
        "version": __version__,
        "command": command,
        "master_seed": config["master_seed"],
        "config": config,
        "normalization": normalization,
        "outputs": {name: sha256_file(out_dir / name) for name in sorted(outputs)},
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path
