"""Deterministic SVG rendering of covering frameworks.

Draws the covering of a gain graph at a random symmetric placement: bars as
segments, joints as circles (filled for the fixed orbit, hollow for free
orbits), the mirror line dashed for a reflection and the origin marked for
a rotation.  When the chosen representation block has more kernel than its
trivial motions, one non-trivial flex is drawn as velocity arrows: the
kernel basis vector of largest norm after projecting out the trivial
subspace (ties broken by first index), normalized so the longest arrow is
10% of the drawing diagonal.  Output bytes depend only on the graph, the
block index, and the seed.
"""

from __future__ import annotations

from .gains import GainGraph, lift
from .orbit import (
    kernel_basis,
    lift_kernel_vector,
    orbit_matrix,
    random_symmetric_config,
    trivial_motion_dims,
)

_SIZE = 480.0
_MARGIN = 40.0


def _fmt(x: float) -> str:
    out = f"{x:.2f}"
    return "0.00" if out == "-0.00" else out


def _re(z) -> float:
    return z.real if isinstance(z, complex) else float(z)


def _project_out(vecs: list, flat: list) -> list:
    """Project ``flat`` orthogonally off the span of ``vecs`` (complex)."""
    basis = []
    for v in vecs:
        w = list(v)
        for b in basis:
            coeff = sum(x.conjugate() * y for x, y in zip(b, w))
            w = [y - coeff * x for x, y in zip(b, w)]
        norm = sum(abs(x) ** 2 for x in w) ** 0.5
        if norm > 1e-9:
            basis.append([x / norm for x in w])
    out = list(flat)
    for b in basis:
        coeff = sum(x.conjugate() * y for x, y in zip(b, out))
        out = [y - coeff * x for x, y in zip(b, out)]
    return out


def _nontrivial_flex(g: GainGraph, j: int, config, order: list) -> list | None:
    """One covering flex with the trivial part removed, or None.

    ``order`` fixes the covering-vertex ordering used to flatten motions.
    The returned list holds one real (vx, vy) pair per covering vertex.
    """
    m = orbit_matrix(g, j, config)
    basis = kernel_basis(m)
    if len(basis) <= trivial_motion_dims(g.group, j):
        return None
    pts = [config.covering_point(cv) for cv in order]
    trivial = [
        [c for _pt in pts for c in (1.0 + 0j, 0j)],
        [c for _pt in pts for c in (0j, 1.0 + 0j)],
        [c for pt in pts for c in (complex(-_re(pt[1])), complex(_re(pt[0])))],
    ]
    best = None
    for idx, vec in enumerate(basis):
        motion = lift_kernel_vector(g, j, config, vec)
        flat = [complex(c) for cv in order for c in motion[cv]]
        proj = _project_out(trivial, flat)
        norm = sum(abs(x) ** 2 for x in proj) ** 0.5
        if best is None or norm > best[0] + 1e-12:
            best = (norm, idx, proj)
    norm, _idx, proj = best
    if norm <= 1e-9:
        return None
    real = [x.real for x in proj]
    if sum(x * x for x in real) ** 0.5 <= 1e-9 * norm:
        real = [x.imag for x in proj]
    return [(real[2 * i], real[2 * i + 1]) for i in range(len(order))]


def render_svg(g: GainGraph, j: int = 0, seed: int = 0) -> str:
    """Render the covering framework of ``g`` for block ``j`` as an SVG string."""
    config = random_symmetric_config(g, seed=seed, field="complex")
    cover = lift(g)
    order = sorted(cover.vertices, key=lambda cv: (str(cv[0]), cv[1]))
    pts = {
        cv: (_re(pt[0]), _re(pt[1]))
        for cv in order
        for pt in (config.covering_point(cv),)
    }

    xs = [p[0] for p in pts.values()] + [0.0]
    ys = [p[1] for p in pts.values()] + [0.0]
    lo_x, hi_x = min(xs), max(xs)
    lo_y, hi_y = min(ys), max(ys)
    span = max(hi_x - lo_x, hi_y - lo_y, 1e-6)
    cx, cy = (lo_x + hi_x) / 2.0, (lo_y + hi_y) / 2.0
    scale = (_SIZE - 2 * _MARGIN) / span

    def to_svg(pt) -> tuple:
        return (
            _SIZE / 2.0 + (pt[0] - cx) * scale,
            _SIZE / 2.0 - (pt[1] - cy) * scale,
        )

    flex = _nontrivial_flex(g, j, config, order)
    arrow_pts = None
    if flex is not None:
        longest = max((vx * vx + vy * vy) ** 0.5 for vx, vy in flex)
        diag = (_SIZE**2 + _SIZE**2) ** 0.5
        unit = 0.1 * diag / (longest * scale)
        arrow_pts = [
            (pts[cv][0] + unit * vx, pts[cv][1] + unit * vy)
            for cv, (vx, vy) in zip(order, flex)
        ]

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{int(_SIZE)}" '
        f'height="{int(_SIZE)}" viewBox="0 0 {int(_SIZE)} {int(_SIZE)}">',
        "<defs>",
        '<marker id="tip" markerWidth="8" markerHeight="8" refX="6" refY="3" orient="auto">',
        '<path d="M0,0 L6,3 L0,6 z" fill="#c0392b"/>',
        "</marker>",
        "</defs>",
        f'<rect width="{int(_SIZE)}" height="{int(_SIZE)}" fill="white"/>',
    ]

    if g.group.is_reflection:
        mx, _ = to_svg((0.0, 0.0))
        lines.append(
            f'<line x1="{_fmt(mx)}" y1="0" x2="{_fmt(mx)}" y2="{int(_SIZE)}" '
            'stroke="#888888" stroke-dasharray="6,4"/>'
        )
    else:
        ox, oy = to_svg((0.0, 0.0))
        lines.append(
            f'<path d="M{_fmt(ox - 6)},{_fmt(oy)} H{_fmt(ox + 6)} '
            f'M{_fmt(ox)},{_fmt(oy - 6)} V{_fmt(oy + 6)}" stroke="#888888"/>'
        )

    for ce in cover.edges:
        a, b = sorted(ce, key=lambda cv: (str(cv[0]), cv[1]))
        xa, ya = to_svg(pts[a])
        xb, yb = to_svg(pts[b])
        lines.append(
            f'<line x1="{_fmt(xa)}" y1="{_fmt(ya)}" x2="{_fmt(xb)}" y2="{_fmt(yb)}" '
            'stroke="#2c3e50" stroke-width="1.5"/>'
        )

    if arrow_pts is not None:
        for cv, tip in zip(order, arrow_pts):
            x0, y0 = to_svg(pts[cv])
            x1, y1 = to_svg(tip)
            if abs(x1 - x0) < 0.01 and abs(y1 - y0) < 0.01:
                continue
            lines.append(
                f'<line x1="{_fmt(x0)}" y1="{_fmt(y0)}" x2="{_fmt(x1)}" y2="{_fmt(y1)}" '
                'stroke="#c0392b" stroke-width="1.5" marker-end="url(#tip)"/>'
            )

    for cv in order:
        x, y = to_svg(pts[cv])
        if cv[0] in cover.fixed_orbits:
            lines.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="5" fill="#2c3e50"/>')
        else:
            lines.append(
                f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="5" fill="white" '
                'stroke="#2c3e50" stroke-width="1.5"/>'
            )

    note = (
        f"block {j}: one non-trivial flex shown"
        if arrow_pts is not None
        else f"block {j}: no non-trivial flex"
    )
    lines.append(
        f'<text x="10" y="{int(_SIZE) - 10}" font-family="monospace" '
        f'font-size="12" fill="#555555">{note} (seed {seed})</text>'
    )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
