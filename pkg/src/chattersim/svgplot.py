"""Grouped bar charts of bench CSV columns as plain, byte-stable SVG."""
from __future__ import annotations

from xml.sax.saxutils import escape

from .bench import CSV_COLUMNS

PALETTE = ("#4e79a7", "#e15759", "#f28e2b", "#76b7b2", "#59a14f", "#edc948", "#b07aa1",
           "#ff9da7")
NUMERIC_COLUMNS = tuple(c for c in CSV_COLUMNS if c not in ("protocol", "rtt_ms", "p", "q"))


def grouped_bar_svg(rows: list[dict], metric: str, *, width=720, height=360) -> str:
    """Render one group per (rtt, p, q) cell and one bar per protocol."""
    if not rows:
        raise ValueError("no rows to plot")
    if metric not in NUMERIC_COLUMNS:
        raise KeyError(f"unknown metric column {metric!r}")

    groups: dict[tuple, dict[str, float]] = {}
    protocols: list[str] = []
    for r in rows:
        cell = (r["rtt_ms"], r["p"], r["q"])
        groups.setdefault(cell, {})[r["protocol"]] = float(r[metric])
        if r["protocol"] not in protocols:
            protocols.append(r["protocol"])

    left, right, top, bottom = 60, 130, 30, 50
    plot_w = width - left - right
    plot_h = height - top - bottom
    vmax = max(max(g.values()) for g in groups.values())
    vmax = vmax * 1.1 if vmax > 0 else 1.0
    group_w = plot_w / len(groups)
    bar_w = group_w * 0.8 / len(protocols)

    def y(v):
        return top + plot_h * (1 - v / vmax)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="13">'
        f'{escape(metric)}</text>',
        f'<line x1="{left}" y1="{top + plot_h}" x2="{left + plot_w}" y2="{top + plot_h}" '
        'stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" stroke="black"/>',
    ]
    for k in range(5):
        v = vmax * k / 4
        out.append(f'<text x="{left - 6}" y="{y(v) + 4:.1f}" text-anchor="end">{v:.3g}</text>')
        out.append(f'<line x1="{left}" y1="{y(v):.1f}" x2="{left + plot_w}" y2="{y(v):.1f}" '
                   'stroke="#dddddd"/>')
    for gi, (cell, values) in enumerate(groups.items()):
        x0 = left + gi * group_w + group_w * 0.1
        for pi, proto in enumerate(protocols):
            if proto not in values:
                continue
            v = values[proto]
            out.append(
                f'<rect x="{x0 + pi * bar_w:.1f}" y="{y(v):.1f}" width="{bar_w:.1f}" '
                f'height="{top + plot_h - y(v):.1f}" fill="{PALETTE[pi % len(PALETTE)]}">'
                f'<title>{escape(proto)}: {v:.4g}</title></rect>')
        rtt, p, q = cell
        label = f"rtt {rtt}" + ("" if p == "trace" else f" p={p} q={q}")
        out.append(f'<text x="{left + (gi + 0.5) * group_w:.1f}" y="{top + plot_h + 18}" '
                   f'text-anchor="middle">{escape(label)}</text>')
    for pi, proto in enumerate(protocols):
        ly = top + 10 + pi * 18
        out.append(f'<rect x="{left + plot_w + 15}" y="{ly - 9}" width="12" height="12" '
                   f'fill="{PALETTE[pi % len(PALETTE)]}"/>')
        out.append(f'<text x="{left + plot_w + 32}" y="{ly + 1}">{escape(proto)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
