"""Minimal deterministic SVG 1.1 renderer for the plot geometries.

Output is a pure function of the input geometry and style: floats are
formatted with fixed precision and no timestamps or ids are embedded, so a
given plot renders byte-identically.
"""

from __future__ import annotations

from .plots import CurveGeometry, ForestGeometry

ROC_SIZE = 560
MARGIN = 64


def _f(v: float) -> str:
    return f"{v:.2f}"


def _esc(text: str) -> str:
    return (
        str(text)
        .replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


class _Canvas:
    def __init__(self, width: int, height: int):
        self.width = width
        self.height = height
        self.parts: list[str] = [
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" '
            f'height="{height}" viewBox="0 0 {width} {height}">',
            f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        ]

    def line(self, x1, y1, x2, y2, stroke="black", width=1.0, dash=None):
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
            f'stroke="{stroke}" stroke-width="{_f(width)}"{dash_attr}/>'
        )

    def polyline(self, pts, stroke="black", width=1.5, dash=None, fill="none", opacity=None):
        coords = " ".join(f"{_f(x)},{_f(y)}" for x, y in pts)
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        op = f' fill-opacity="{opacity}"' if opacity is not None else ""
        self.parts.append(
            f'<polyline points="{coords}" fill="{fill}"{op} stroke="{stroke}" '
            f'stroke-width="{_f(width)}"{dash_attr}/>'
        )

    def circle(self, x, y, r, stroke="black", fill="none"):
        self.parts.append(
            f'<circle cx="{_f(x)}" cy="{_f(y)}" r="{_f(r)}" stroke="{stroke}" fill="{fill}"/>'
        )

    def rect(self, x, y, w, h, fill="black"):
        self.parts.append(
            f'<rect x="{_f(x)}" y="{_f(y)}" width="{_f(w)}" height="{_f(h)}" fill="{fill}"/>'
        )

    def text(self, x, y, content, size=12, anchor="start", rotate=None, color="black"):
        rot = f' transform="rotate({rotate} {_f(x)} {_f(y)})"' if rotate is not None else ""
        self.parts.append(
            f'<text x="{_f(x)}" y="{_f(y)}" font-family="sans-serif" font-size="{size}" '
            f'fill="{color}" text-anchor="{anchor}"{rot}>{_esc(content)}</text>'
        )

    def star(self, x, y, r, color="black"):
        self.line(x - r, y, x + r, y, stroke=color, width=1.5)
        self.line(x, y - r, x, y + r, stroke=color, width=1.5)
        self.line(x - 0.7 * r, y - 0.7 * r, x + 0.7 * r, y + 0.7 * r, stroke=color, width=1.2)
        self.line(x - 0.7 * r, y + 0.7 * r, x + 0.7 * r, y - 0.7 * r, stroke=color, width=1.2)

    def render(self) -> bytes:
        return ("\n".join(self.parts) + "\n</svg>\n").encode("utf-8")


def _roc_transform():
    span = ROC_SIZE - 2 * MARGIN

    def to_px(x: float, y: float) -> tuple[float, float]:
        return MARGIN + x * span, ROC_SIZE - MARGIN - y * span

    return to_px


def _roc_axes(canvas: _Canvas, title: str | None):
    to_px = _roc_transform()
    x0, y0 = to_px(0.0, 0.0)
    x1, y1 = to_px(1.0, 1.0)
    canvas.line(x0, y0, x1, y0)
    canvas.line(x0, y0, x0, y1)
    for tick in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0):
        tx, ty = to_px(tick, 0.0)
        canvas.line(tx, y0, tx, y0 + 5)
        canvas.text(tx, y0 + 20, f"{tick:.1f}", anchor="middle")
        tx, ty = to_px(0.0, tick)
        canvas.line(x0 - 5, ty, x0, ty)
        canvas.text(x0 - 10, ty + 4, f"{tick:.1f}", anchor="end")
    canvas.text((x0 + x1) / 2, ROC_SIZE - 16, "1-Specificity", anchor="middle", size=14)
    canvas.text(18, (y0 + y1) / 2, "Sensitivity", anchor="middle", size=14, rotate=-90)
    if title:
        canvas.text((x0 + x1) / 2, MARGIN - 24, title, anchor="middle", size=15)


def _draw_geometry(canvas: _Canvas, geom: CurveGeometry):
    to_px = _roc_transform()
    color = geom.style.get("color", "black")
    pts = [to_px(x, y) for x, y in geom.points]
    if geom.kind == "sroc_line":
        canvas.polyline(pts, stroke=color, width=2.0)
    elif geom.kind in ("credible_region", "prediction_region"):
        canvas.polyline(pts, stroke=color, width=1.5, dash="6,4")
    elif geom.kind == "summary_point":
        for x, y in pts:
            canvas.star(x, y, 7, color=color)
    elif geom.kind == "data_bubble":
        sizes = geom.style.get("sizes", [1.0] * len(pts))
        smax = max(sizes) if sizes else 1.0
        for (x, y), s in zip(pts, sizes):
            canvas.circle(x, y, 3.0 + 12.0 * (s / smax) ** 0.5, stroke=color)
    elif geom.kind == "crosshair":
        (x1, y1), (x2, y2), (x3, y3), (x4, y4) = pts
        canvas.line(x1, y1, x2, y2, stroke=color, width=1.5)
        canvas.line(x3, y3, x4, y4, stroke=color, width=1.5)
    else:
        canvas.polyline(pts, stroke=color)


def render_roc_svg(geometries: list[CurveGeometry], style: dict | None = None) -> bytes:
    if not geometries:
        raise ValueError("nothing to draw: empty geometry list")
    style = style or {}
    canvas = _Canvas(ROC_SIZE, ROC_SIZE)
    _roc_axes(canvas, style.get("title"))
    for geom in geometries:
        _draw_geometry(canvas, geom)
    return canvas.render()


def render_forest_svg(forest: ForestGeometry, style: dict | None = None) -> bytes:
    style = style or {}
    rows = forest.rows
    if not rows:
        raise ValueError("nothing to draw: empty forest")
    width = 840
    row_h = 26
    top = 70
    left_text = 20
    plot_x0, plot_x1 = 330, 640
    height = top + row_h * (len(rows) + 2) + 40
    canvas = _Canvas(width, height)
    canvas.text(width / 2, 28, style.get("title", forest.label), anchor="middle", size=15)
    lo, hi = forest.cut
    span = hi - lo if hi > lo else 1.0

    def to_px(v: float) -> float:
        return plot_x0 + (min(max(v, lo), hi) - lo) / span * (plot_x1 - plot_x0)

    flags = forest.flags
    if flags.get("dataShow"):
        canvas.text((left_text + 130 + plot_x0) / 2 + 0, 54, "TP FP TN FN", anchor="middle", size=11)
    y = top
    last_level = object()
    for row in rows:
        if row.level is not None and row.level != last_level:
            canvas.text(left_text, y + 4, str(row.level), size=13, color="gray")
            y += row_h
            last_level = row.level
        if flags.get("nameShow", True):
            canvas.text(left_text, y + 4, row.label, size=12)
        if flags.get("dataShow", True) and row.data_text:
            canvas.text((130 + plot_x0) / 2 + 40, y + 4, row.data_text, anchor="middle", size=11)
        x_lo, x_hi, x_est = to_px(row.lo), to_px(row.hi), to_px(row.estimate)
        canvas.line(x_lo, y, x_hi, y, stroke="black", width=1.2)
        if row.is_summary:
            canvas.polyline(
                [(x_est - 6, y), (x_est, y - 5), (x_est + 6, y), (x_est, y + 5), (x_est - 6, y)],
                stroke="black",
                fill="black",
            )
        else:
            half = 3.0 * row.size
            canvas.rect(x_est - half, y - half, 2 * half, 2 * half, fill="black")
        if flags.get("ciShow", True):
            canvas.text(
                plot_x1 + 16,
                y + 4,
                f"{row.estimate:.3f} [{row.lo:.3f}, {row.hi:.3f}]",
                size=11,
            )
        y += row_h
    axis_y = y + 10
    canvas.line(plot_x0, axis_y, plot_x1, axis_y)
    for tick in (lo, (lo + hi) / 2, hi):
        canvas.line(to_px(tick), axis_y, to_px(tick), axis_y + 5)
        canvas.text(to_px(tick), axis_y + 20, f"{tick:.2f}", anchor="middle", size=11)
    return canvas.render()


def render_svg(geometry, style: dict | None = None) -> bytes:
    """Render a ForestGeometry or a list of ROC-space geometries to SVG."""
    if isinstance(geometry, ForestGeometry):
        return render_forest_svg(geometry, style)
    if isinstance(geometry, CurveGeometry):
        geometry = [geometry]
    return render_roc_svg(list(geometry), style)
