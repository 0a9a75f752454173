"""Dependency-free SVG plots for trace and sweep CSV files."""

from __future__ import annotations

import csv
import math
from pathlib import Path

from .experiments import SWEEP_COLUMNS

TRACE_COLUMNS = ("iter", "gap", "calls")
W, H, PAD = 640, 420, 60


class CsvFormatError(ValueError):
    def __init__(self, path, line, message):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


def read_table(path):
    """Read a trace or sweep CSV; returns (schema, header, rows)."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(path, 1, "empty file") from None
        if tuple(header) == TRACE_COLUMNS:
            schema, numeric = "trace", TRACE_COLUMNS
        elif tuple(header) == SWEEP_COLUMNS:
            schema, numeric = "sweep", ("d", "epsilon", "gamma", "delta", "final_gap", "oracle_calls")
        else:
            raise CsvFormatError(path, 1, f"unrecognized header {header}")
        rows = []
        for line_no, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(header):
                raise CsvFormatError(path, line_no, f"expected {len(header)} fields, got {len(rec)}")
            row = dict(zip(header, rec))
            try:
                for k in numeric:
                    row[k] = float(row[k])
            except ValueError:
                raise CsvFormatError(path, line_no, f"non-numeric value in column {k!r}") from None
            rows.append(row)
    if not rows:
        raise CsvFormatError(path, 2, "no data rows")
    return schema, header, rows


def _scale(vals, log):
    if log:
        vals = [math.log10(v) for v in vals]
    lo, hi = min(vals), max(vals)
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    return lambda v: ((math.log10(v) if log else v) - lo) / (hi - lo), lo, hi


def _frame(title, xlabel, ylabel, xr, yr, xlog, ylog):
    def tick(v, log):
        return f"1e{v:.2g}" if log else f"{v:.3g}"

    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2}" y="24" text-anchor="middle" font-size="16">{title}</text>',
        f'<line x1="{PAD}" y1="{H - PAD}" x2="{W - PAD}" y2="{H - PAD}" stroke="black"/>',
        f'<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{H - PAD}" stroke="black"/>',
        f'<text x="{W / 2}" y="{H - 15}" text-anchor="middle" font-size="13">{xlabel}</text>',
        f'<text x="18" y="{H / 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 18 {H / 2})">{ylabel}</text>',
        f'<text x="{PAD}" y="{H - PAD + 16}" font-size="11">{tick(xr[0], xlog)}</text>',
        f'<text x="{W - PAD}" y="{H - PAD + 16}" text-anchor="end" font-size="11">{tick(xr[1], xlog)}</text>',
        f'<text x="{PAD - 4}" y="{H - PAD}" text-anchor="end" font-size="11">{tick(yr[0], ylog)}</text>',
        f'<text x="{PAD - 4}" y="{PAD + 4}" text-anchor="end" font-size="11">{tick(yr[1], ylog)}</text>',
    ]


def _px(fx, fy, x, y):
    return PAD + fx(x) * (W - 2 * PAD), H - PAD - fy(y) * (H - 2 * PAD)


def trace_svg(rows) -> str:
    xs = [r["iter"] for r in rows]
    ys = [r["gap"] for r in rows]
    ylog = all(y > 0 for y in ys)
    fx, *xr = _scale(xs, False)
    fy, *yr = _scale(ys, ylog)
    out = _frame("optimality gap", "iteration", "gap (log10)" if ylog else "gap", xr, yr, False, ylog)
    pts = " ".join(f"{px:.2f},{py:.2f}" for px, py in (_px(fx, fy, x, y) for x, y in zip(xs, ys)))
    out.append(f'<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{pts}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def sweep_svg(rows) -> str:
    """Final gap against Δ on log axes; Δ = 0 rows sit one decade left of the
    smallest positive Δ and are drawn hollow."""
    pos = [r["delta"] for r in rows if r["delta"] > 0]
    floor = min(pos) / 10.0 if pos else 1.0
    xs = [r["delta"] if r["delta"] > 0 else floor for r in rows]
    ys = [max(r["final_gap"], 1e-300) for r in rows]
    fx, *xr = _scale(xs, True)
    fy, *yr = _scale(ys, True)
    out = _frame("final gap vs noise level", "delta (log10)", "final gap (log10)", xr, yr, True, True)
    for r, x, y in zip(rows, xs, ys):
        px, py = _px(fx, fy, x, y)
        fill = "white" if r["delta"] == 0 else "firebrick"
        out.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="3.5" fill="{fill}" stroke="firebrick"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(csv_path, svg_path) -> Path:
    """Render a trace or sweep CSV to a standalone SVG. Nothing is written on error."""
    schema, _, rows = read_table(csv_path)
    text = trace_svg(rows) if schema == "trace" else sweep_svg(rows)
    svg_path = Path(svg_path)
    svg_path.write_text(text, encoding="utf-8")
    return svg_path
