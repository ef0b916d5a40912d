"""Deterministic SVG emitter.

Scenes are built with a small ``Canvas`` and serialised with fixed number
formatting and insertion order, so identical states give identical bytes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from xml.sax.saxutils import escape, quoteattr

CELL = 48
THICK = 4
THIN = 1
MARGIN = 32

PALETTE = {
    "ink": "#111111",
    "grid": "#888888",
    "paper": "#ffffff",
    "shade": "#333333",
    "water": "#6fa8dc",
    "given": "#111111",
    "accent": "#cc0000",
    "start": "#2e9e44",
    "goal": "#cc0000",
    "apple": "#d62728",
    "snake": "#2ca02c",
    "head": "#145a32",
    "box": "#b8860b",
    "target": "#e6b800",
    "tree": "#1b7f3b",
    "bar": "#4a78b5",
    "node": "#f4f4f4",
}


def fmt(v: float) -> str:
    if isinstance(v, int):
        return str(v)
    s = f"{v:.2f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


@dataclass
class Canvas:
    width: float
    height: float
    items: list[str] = field(default_factory=list)

    def _attrs(self, **kw) -> str:
        parts = []
        for k, v in kw.items():
            if v is None:
                continue
            name = "class" if k == "cls" else k.replace("_", "-")
            parts.append(f"{name}={quoteattr(fmt(v) if isinstance(v, (int, float)) else str(v))}")
        return " ".join(parts)

    def rect(self, x, y, w, h, fill="none", stroke=PALETTE["ink"], sw=THIN, cls=None):
        self.items.append(f"<rect {self._attrs(cls=cls, x=x, y=y, width=w, height=h, fill=fill, stroke=stroke, stroke_width=sw)}/>")

    def line(self, x1, y1, x2, y2, stroke=PALETTE["ink"], sw=THIN, cls=None):
        self.items.append(f"<line {self._attrs(cls=cls, x1=x1, y1=y1, x2=x2, y2=y2, stroke=stroke, stroke_width=sw, stroke_linecap='square')}/>")

    def circle(self, cx, cy, r, fill="none", stroke=PALETTE["ink"], sw=THIN, cls=None):
        self.items.append(f"<circle {self._attrs(cls=cls, cx=cx, cy=cy, r=r, fill=fill, stroke=stroke, stroke_width=sw)}/>")

    def text(self, x, y, s, size=20, fill=PALETTE["ink"], anchor="middle", cls=None):
        self.items.append(
            f"<text {self._attrs(cls=cls, x=x, y=y, font_size=size, fill=fill, text_anchor=anchor, dominant_baseline='central', font_family='monospace')}>"
            f"{escape(str(s))}</text>"
        )

    def cross(self, cx, cy, r, stroke=PALETTE["goal"], sw=THICK, cls=None):
        self.line(cx - r, cy - r, cx + r, cy + r, stroke, sw, cls)
        self.line(cx - r, cy + r, cx + r, cy - r, stroke, sw, cls)

    def polyline(self, pts, stroke=PALETTE["ink"], sw=THIN, cls=None):
        p = " ".join(f"{fmt(x)},{fmt(y)}" for x, y in pts)
        self.items.append(f"<polyline {self._attrs(cls=cls, points=p, fill='none', stroke=stroke, stroke_width=sw)}/>")

    def to_svg(self) -> bytes:
        head = (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{fmt(self.width)}" '
            f'height="{fmt(self.height)}" viewBox="0 0 {fmt(self.width)} {fmt(self.height)}">\n'
            f'<rect x="0" y="0" width="{fmt(self.width)}" height="{fmt(self.height)}" fill="{PALETTE["paper"]}"/>\n'
        )
        return (head + "\n".join(self.items) + "\n</svg>\n").encode("utf-8")


# -- reusable scene pieces ---------------------------------------------------


def grid_canvas(rows: int, cols: int, left: int = 0, top: int = 0, right: int = 0,
                bottom: int = 0) -> Canvas:
    """Canvas sized for a rows x cols board plus label margins (in cells)."""
    return Canvas(2 * MARGIN + (cols + left + right) * CELL, 2 * MARGIN + (rows + top + bottom) * CELL)


def cell_xy(r: int, c: int, left: int = 0, top: int = 0) -> tuple[int, int]:
    return MARGIN + (c + left) * CELL, MARGIN + (r + top) * CELL


def cell_center(r: int, c: int, left: int = 0, top: int = 0) -> tuple[int, int]:
    x, y = cell_xy(r, c, left, top)
    return x + CELL // 2, y + CELL // 2


def draw_cells(cv: Canvas, rows: int, cols: int, left: int = 0, top: int = 0, fills=None):
    for r in range(rows):
        for c in range(cols):
            x, y = cell_xy(r, c, left, top)
            fill = fills(r, c) if fills else "none"
            cv.rect(x, y, CELL, CELL, fill=fill or "none", stroke=PALETTE["grid"], sw=THIN, cls="cell")
    x, y = cell_xy(0, 0, left, top)
    cv.rect(x, y, cols * CELL, rows * CELL, stroke=PALETTE["ink"], sw=THICK, cls="border")


def draw_values(cv: Canvas, grid, left: int = 0, top: int = 0, blank=0, size=22):
    for r, row in enumerate(grid):
        for c, v in enumerate(row):
            if v != blank:
                cx, cy = cell_center(r, c, left, top)
                cv.text(cx, cy, v, size=size)


def draw_region_borders(cv: Canvas, regions, left: int = 0, top: int = 0):
    """Thick lines between cells of different regions."""
    rows, cols = len(regions), len(regions[0])
    for r in range(rows):
        for c in range(cols):
            x, y = cell_xy(r, c, left, top)
            if c + 1 < cols and regions[r][c] != regions[r][c + 1]:
                cv.line(x + CELL, y, x + CELL, y + CELL, sw=THICK, cls="region")
            if r + 1 < rows and regions[r][c] != regions[r + 1][c]:
                cv.line(x, y + CELL, x + CELL, y + CELL, sw=THICK, cls="region")


def draw_side_labels(cv: Canvas, rows_lbl=None, cols_lbl=None, n_rows=0, n_cols=0,
                     left: int = 0, top: int = 0, right_side=True, bottom_side=True):
    if rows_lbl is not None:
        for r, v in enumerate(rows_lbl):
            cx, cy = cell_center(r, n_cols if right_side else -1, left, top)
            cv.text(cx, cy, v, size=18, cls="clue")
    if cols_lbl is not None:
        for c, v in enumerate(cols_lbl):
            cx, cy = cell_center(n_rows if bottom_side else -1, c, left, top)
            cv.text(cx, cy, v, size=18, cls="clue")


def draw_bars(values, label_values=True) -> Canvas:
    """Bar chart with value labels above each bar."""
    n = len(values)
    top = max(values + [1])
    unit = 24
    cv = Canvas(2 * MARGIN + n * CELL, 2 * MARGIN + (top + 2) * unit)
    base = MARGIN + (top + 1) * unit
    cv.line(MARGIN, base, MARGIN + n * CELL, base, sw=2, cls="axis")
    for i, v in enumerate(values):
        x = MARGIN + i * CELL
        if v:
            cv.rect(x + 4, base - v * unit, CELL - 8, v * unit, fill=PALETTE["bar"], stroke=PALETTE["ink"], cls="bar")
        if label_values:
            cv.text(x + CELL // 2, base - v * unit - 10, v, size=14, cls="value")
        cv.text(x + CELL // 2, base + 14, i, size=12, fill=PALETTE["grid"], cls="index")
    return cv


def circle_layout(n: int, radius: float, cx: float, cy: float) -> list[tuple[float, float]]:
    import math

    pts = []
    for i in range(n):
        a = -math.pi / 2 + 2 * math.pi * i / max(n, 1)
        pts.append((round(cx + radius * math.cos(a), 2), round(cy + radius * math.sin(a), 2)))
    return pts


def draw_graph(cv: Canvas, n: int, edges, pos, directed=False, labels=None, highlight=(),
               node_r=16):
    import math

    for e in edges:
        u, v = e[0], e[1]
        (x1, y1), (x2, y2) = pos[u], pos[v]
        if directed:
            dx, dy = x2 - x1, y2 - y1
            d = math.hypot(dx, dy) or 1.0
            x2b, y2b = x2 - dx / d * node_r, y2 - dy / d * node_r
            cv.line(x1, y1, x2b, y2b, sw=2, cls="edge")
            ax, ay = -dx / d, -dy / d
            for sgn in (1, -1):
                wx = ax * 0.94 - sgn * ay * 0.34
                wy = ay * 0.94 + sgn * ax * 0.34
                cv.line(x2b, y2b, round(x2b + wx * 10, 2), round(y2b + wy * 10, 2), sw=2, cls="arrow")
        else:
            cv.line(x1, y1, x2, y2, sw=2, cls="edge")
        if labels is not None:
            lbl = labels(e)
            if lbl is not None:
                mx, my = round((x1 + x2) / 2, 2), round((y1 + y2) / 2, 2)
                cv.rect(mx - 12, my - 9, 24, 18, fill=PALETTE["paper"], stroke="none", cls="label-bg")
                cv.text(mx, my, lbl, size=13, fill=PALETTE["accent"], cls="label")
    for i in range(n):
        x, y = pos[i]
        fill = PALETTE["accent"] if i in highlight else PALETTE["node"]
        cv.circle(x, y, node_r, fill=fill, stroke=PALETTE["ink"], sw=2, cls="node")
        cv.text(x, y, i, size=14)
