"""CSV and SVG output for study results.

Both writers are deterministic: floats are written with ``repr`` in the CSV
(exact round trip) and with fixed precision in the SVG.
"""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from ..errors import QclmcError

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


class ExportError(QclmcError, OSError):
    pass


def _cell(v: Any) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def csv_text(rows: Iterable[Mapping[str, Any]], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c, "")) for c in columns])
    return buf.getvalue()


def write_csv(path: str | Path, rows: Iterable[Mapping[str, Any]], columns: Sequence[str]) -> Path:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            fh.write(csv_text(rows, columns))
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc}") from exc
    return path


def _parse(v: str) -> Any:
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    return v


def read_csv(path: str | Path) -> list[dict[str, Any]]:
    """Read a CSV written by :func:`write_csv`, converting numeric cells."""
    try:
        with Path(path).open(newline="") as fh:
            return [{k: _parse(v) for k, v in row.items()} for row in csv.DictReader(fh)]
    except OSError as exc:
        raise ExportError(f"cannot read {path}: {exc}") from exc


def _ticks(lo: float, hi: float) -> list[float]:
    a, b = math.floor(lo), math.ceil(hi)
    if b == a:
        b = a + 1
    return [float(e) for e in range(a, b + 1)]


def svg_loglog(
    curves: Mapping[str, tuple[Sequence[float], Sequence[float]]],
    title: str = "",
    xlabel: str = "M",
    ylabel: str = "",
    width: int = 480,
    height: int = 360,
) -> str:
    """Log-log line chart with one polyline and markers per curve."""
    pts = {
        name: [(math.log10(x), math.log10(y)) for x, y in zip(xs, ys) if x > 0 and y > 0]
        for name, (xs, ys) in curves.items()
    }
    allp = [p for ps in pts.values() for p in ps]
    ml, mr, mt, mb = 64, 16, 28, 44
    pw, ph = width - ml - mr, height - mt - mb
    if allp:
        xt = _ticks(min(p[0] for p in allp), max(p[0] for p in allp))
        yt = _ticks(min(p[1] for p in allp), max(p[1] for p in allp))
    else:
        xt, yt = [0.0, 1.0], [0.0, 1.0]
    x0, x1, y0, y1 = xt[0], xt[-1], yt[0], yt[-1]

    def sx(v: float) -> float:
        return ml + (v - x0) / (x1 - x0) * pw

    def sy(v: float) -> float:
        return mt + ph - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in xt:
        out.append(f'<line x1="{sx(t):.2f}" y1="{mt + ph}" x2="{sx(t):.2f}" y2="{mt + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{sx(t):.2f}" y="{mt + ph + 16}" text-anchor="middle">1e{int(t)}</text>')
    for t in yt:
        out.append(f'<line x1="{ml - 4}" y1="{sy(t):.2f}" x2="{ml}" y2="{sy(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{ml - 6}" y="{sy(t) + 4:.2f}" text-anchor="end">1e{int(t)}</text>')
    if title:
        out.append(f'<text x="{width / 2:.1f}" y="16" text-anchor="middle">{_esc(title)}</text>')
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 8}" text-anchor="middle">{_esc(xlabel)}</text>')
    if ylabel:
        out.append(
            f'<text x="14" y="{mt + ph / 2:.1f}" text-anchor="middle" '
            f'transform="rotate(-90 14 {mt + ph / 2:.1f})">{_esc(ylabel)}</text>'
        )
    for i, (name, ps) in enumerate(pts.items()):
        color = _COLORS[i % len(_COLORS)]
        if len(ps) > 1:
            coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in ps)
            out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for x, y in ps:
            out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="{color}"/>')
        ly = mt + 14 + 14 * i
        out.append(f'<text x="{ml + pw - 6}" y="{ly}" text-anchor="end" fill="{color}">{_esc(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def export_plot_data(result, out_dir: str | Path, stem: str, formats: Sequence[str] = ("csv", "svg")) -> list[Path]:
    """Write ``result`` (anything with ``rows()``, ``columns`` and ``curves()``).

    Returns the paths written.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ExportError(f"cannot create {out}: {exc}") from exc
    written = []
    if "csv" in formats:
        written.append(write_csv(out / f"{stem}.csv", result.rows(), result.columns))
    if "svg" in formats:
        path = out / f"{stem}.svg"
        text = svg_loglog(result.curves(), title=stem, ylabel=getattr(result, "ylabel", ""))
        try:
            path.write_text(text)
        except OSError as exc:
            raise ExportError(f"cannot write {path}: {exc}") from exc
        written.append(path)
    return written
