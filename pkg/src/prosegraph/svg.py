"""Deterministic SVG snapshots of a laid-out document prefix.

Atomic nodes render as labeled rectangles, composites as gray enclosing
containers, relations as directed labeled edges. Output is byte-stable:
fixed header, sorted element order, fixed-precision coordinates.
"""

from __future__ import annotations

from .model import Document

PADDING = 40.0
FONT = "Helvetica, Arial, sans-serif"

HEADER = (
    '<?xml version="1.0" encoding="UTF-8"?>\n'
    '<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
    'viewBox="{x0} {y0} {w} {h}">\n'
    '<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" '
    'markerWidth="7" markerHeight="7" orient="auto-start-reverse">'
    '<path d="M 0 0 L 10 5 L 0 10 z" fill="#64748b"/></marker></defs>\n'
)


def _fmt(value: float) -> str:
    text = f"{value:.2f}"
    return "0.00" if text == "-0.00" else text


def _esc(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;").replace('"', "&quot;"))


def _clip_to_rect(cx, cy, tx, ty, rect):
    """Intersection of the ray (cx,cy)->(tx,ty) with the rectangle border."""
    dx, dy = tx - cx, ty - cy
    if dx == 0 and dy == 0:
        return cx, cy
    x0, y0, x1, y1 = rect
    best_t = 1.0
    candidates = []
    if dx:
        candidates += [(x0 - cx) / dx, (x1 - cx) / dx]
    if dy:
        candidates += [(y0 - cy) / dy, (y1 - cy) / dy]
    hits = []
    for t in candidates:
        if t <= 0:
            continue
        px, py = cx + t * dx, cy + t * dy
        if x0 - 1e-6 <= px <= x1 + 1e-6 and y0 - 1e-6 <= py <= y1 + 1e-6:
            hits.append(t)
    if hits:
        best_t = min(hits)
    return cx + best_t * dx, cy + best_t * dy


def render_svg(doc: Document, node_geometry: dict[str, dict],
               visible_edge_ids: set[str]) -> str:
    """Render the given geometry map (node id -> {x, y, w, h}) to SVG text.

    Composite vs atomic is decided per snapshot: a node is a container when
    one of its members is also present in the geometry map."""
    present = set(node_geometry)
    members_present = {
        m.parent: True for m in doc.memberships
        if m.parent in present and m.child in present
    }
    composites = sorted(n for n in present if members_present.get(n))
    atoms = sorted(n for n in present if n not in members_present)

    rects = {}
    for nid, g in node_geometry.items():
        rects[nid] = (g["x"] - g["w"] / 2, g["y"] - g["h"] / 2,
                      g["x"] + g["w"] / 2, g["y"] + g["h"] / 2)

    if rects:
        x0 = min(r[0] for r in rects.values()) - PADDING
        y0 = min(r[1] for r in rects.values()) - PADDING
        x1 = max(r[2] for r in rects.values()) + PADDING
        y1 = max(r[3] for r in rects.values()) + PADDING
    else:
        x0, y0, x1, y1 = 0.0, 0.0, 400.0, 200.0

    parts = [HEADER.format(w=_fmt(x1 - x0), h=_fmt(y1 - y0), x0=_fmt(x0), y0=_fmt(y0))]
    parts.append(
        f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(x1 - x0)}" '
        f'height="{_fmt(y1 - y0)}" fill="#ffffff"/>\n'
    )

    def depth(nid: str) -> int:
        parents = [m.parent for m in doc.memberships if m.child == nid and m.parent in present]
        return 0 if not parents else 1 + max(depth(p) for p in parents)

    for cid in sorted(composites, key=lambda c: (depth(c), c)):
        rx0, ry0, rx1, ry1 = rects[cid]
        label = _esc(doc.node(cid).label)
        parts.append(
            f'<g data-kind="composite" data-id="{_esc(cid)}">'
            f'<rect x="{_fmt(rx0)}" y="{_fmt(ry0)}" width="{_fmt(rx1 - rx0)}" '
            f'height="{_fmt(ry1 - ry0)}" fill="#e5e7eb" fill-opacity="0.55" '
            f'stroke="#9ca3af" stroke-width="1.5" rx="8"/>'
            f'<text x="{_fmt(rx0 + 6)}" y="{_fmt(ry0 + 14)}" font-size="11" '
            f'font-family="{FONT}" fill="#6b7280">{label}</text>'
            f'</g>\n'
        )

    for eid in sorted(visible_edge_ids):
        edge = next(e for e in doc.edges if e.id == eid)
        if edge.source not in rects or edge.target not in rects:
            continue
        sx0, sy0, sx1, sy1 = rects[edge.source]
        tx0, ty0, tx1, ty1 = rects[edge.target]
        scx, scy = (sx0 + sx1) / 2, (sy0 + sy1) / 2
        tcx, tcy = (tx0 + tx1) / 2, (ty0 + ty1) / 2
        ax, ay = _clip_to_rect(scx, scy, tcx, tcy, rects[edge.source])
        bx, by = _clip_to_rect(tcx, tcy, scx, scy, rects[edge.target])
        mx, my = (ax + bx) / 2, (ay + by) / 2
        label = _esc(edge.label)
        parts.append(
            f'<g data-kind="edge" data-id="{_esc(eid)}">'
            f'<line x1="{_fmt(ax)}" y1="{_fmt(ay)}" x2="{_fmt(bx)}" y2="{_fmt(by)}" '
            f'stroke="#64748b" stroke-width="1.5" marker-end="url(#arrow)"/>'
            f'<text x="{_fmt(mx)}" y="{_fmt(my - 4)}" font-size="10" '
            f'font-family="{FONT}" fill="#64748b" text-anchor="middle">{label}</text>'
            f'</g>\n'
        )

    for nid in atoms:
        rx0, ry0, rx1, ry1 = rects[nid]
        label = _esc(doc.node(nid).label)
        parts.append(
            f'<g data-kind="atomic" data-id="{_esc(nid)}">'
            f'<rect x="{_fmt(rx0)}" y="{_fmt(ry0)}" width="{_fmt(rx1 - rx0)}" '
            f'height="{_fmt(ry1 - ry0)}" fill="#f8fafc" stroke="#475569" '
            f'stroke-width="1.5" rx="6"/>'
            f'<text x="{_fmt((rx0 + rx1) / 2)}" y="{_fmt((ry0 + ry1) / 2 + 4)}" '
            f'font-size="12" font-family="{FONT}" fill="#1e293b" '
            f'text-anchor="middle">{label}</text>'
            f'</g>\n'
        )

    parts.append("</svg>\n")
    return "".join(parts)
