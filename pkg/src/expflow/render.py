"""SVG pictures of suspensions and billiard paths.

Presentation only: coordinates are converted to floats here and nowhere
else.  Every picture uses a 0 0 400 400 viewBox with y pointing up.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

from .billiard import RationalPolygon, Trajectory
from .suspension import SuspensionComplex

SIZE = 400
PAD = 20
_COLOURS = ("#1b6ca8", "#c0392b", "#27ae60", "#8e44ad", "#d35400", "#16a085", "#2c3e50")


def _fit(points):
    xs = [float(x) for x, _ in points]
    ys = [float(y) for _, y in points]
    lo_x, lo_y = min(xs), min(ys)
    span = max(max(xs) - lo_x, max(ys) - lo_y) or 1.0
    k = (SIZE - 2 * PAD) / span

    def tr(p):
        return PAD + (float(p[0]) - lo_x) * k, SIZE - PAD - (float(p[1]) - lo_y) * k
    return tr


def _doc(body: list[str], title: str) -> str:
    return "\n".join([
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {SIZE} {SIZE}" '
        f'width="{SIZE}" height="{SIZE}">',
        f"<title>{escape(title)}</title>",
        *body,
        "</svg>",
    ]) + "\n"


def _poly(pts, **attrs) -> str:
    path = " ".join(f"{x:.3f},{y:.3f}" for x, y in pts)
    extra = " ".join(f'{k.replace("_", "-")}="{v}"' for k, v in attrs.items())
    return f'<polygon points="{path}" {extra}/>'


def suspension_svg(c: SuspensionComplex) -> str:
    """The 2n-gon with corners coloured by vertex class."""
    pts = c.polygon_points()
    tr = _fit(pts)
    screen = [tr(p) for p in pts]
    body = [_poly(screen, fill="#eef3f8", stroke="#333", stroke_width="1.5")]
    cls = {}
    for k, group in enumerate(c.classes):
        for i in group:
            cls[i] = k
    for i, (x, y) in enumerate(screen):
        colour = _COLOURS[cls[i] % len(_COLOURS)]
        body.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="5" fill="{colour}"/>')
    for i, (lab, side) in enumerate(c.edges):
        (x0, y0), (x1, y1) = screen[i], screen[(i + 1) % len(screen)]
        body.append(f'<text x="{(x0 + x1) / 2:.3f}" y="{(y0 + y1) / 2:.3f}" font-size="12" '
                    f'text-anchor="middle">{lab}</text>')
    return _doc(body, f"suspension, permutation {list(c.base.permutation)}")


def billiard_svg(p: RationalPolygon, path: Trajectory | None = None) -> str:
    if p.vertices is None:
        raise ValueError("the polygon has no coordinates to draw")
    pts = [(float(getattr(x, "mid", x)), float(getattr(y, "mid", y))) for x, y in p.vertices]
    tr = _fit(pts)
    body = [_poly([tr(q) for q in pts], fill="#fbf7ee", stroke="#333", stroke_width="1.5")]
    if path is not None:
        line = [tr((float(getattr(x, "mid", x)), float(getattr(y, "mid", y))))
                for x, y in path.points]
        d = " ".join(f"{x:.3f},{y:.3f}" for x, y in line)
        body.append(f'<polyline points="{d}" fill="none" stroke="#c0392b" stroke-width="0.8"/>')
        x, y = line[0]
        body.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="3" fill="#1b6ca8"/>')
    return _doc(body, f"billiard, angles {[str(a) for a in p.angles]}")
