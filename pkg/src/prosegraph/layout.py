"""Structure-aware layout: recursive initial placement per nesting level,
then an iterative five-force optimization with composite co-movement,
pinning, and grid discretization.

Force model per node: springs along edges (any nesting level), a pull
keeping members near their composite's centroid, a push ejecting nodes from
composites they do not belong to, mutual repulsion between intersecting
atomic rectangles, and a vertical pull toward the node's sentence
centerline. Composite forces aggregate the mean of their direct members'
forces; moving a composite displaces everything inside it. After the
iteration stabilizes, positions snap to the grid and a bounded constraint
sweep clears any residual overlap or containment violation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import networkx as nx

from .model import ATOMIC, COMPOSITE, Document, LevelGraph, level_subgraph

# Atomic extents from label metrics; replace via the metrics argument of
# LayoutState.from_document for real font measurement.
ATOM_HEIGHT = 28.0
CHAR_WIDTH = 14.0
LABEL_PAD = 16.0

ROW_HEIGHT_FACTOR = 3.0   # sentence band spacing, in ideal link lengths
COLUMN_GAP_FACTOR = 5.0   # horizontal distance between sentence columns


def default_label_extent(label: str) -> tuple[float, float]:
    return (CHAR_WIDTH * len(label) + LABEL_PAD, ATOM_HEIGHT)


@dataclass(frozen=True)
class LayoutConfig:
    ideal_link_length: float = 120.0
    link_stiffness: float = 0.05
    inclusion_strength: float = 2.0
    exclusion_strength: float = 4.0
    sentence_strength: float = 1.5
    overlap_strength: float = 6.0
    grid_interval: float = 8.0
    damping: float = 0.85
    stabilize_epsilon: float = 0.5
    max_iterations: int = 500
    composite_padding: float = 16.0
    seed: int = 0

    def __post_init__(self):
        if min(self.link_stiffness, self.inclusion_strength, self.exclusion_strength,
               self.sentence_strength, self.overlap_strength) < 0:
            raise ValueError("force strengths must be >= 0")
        if self.grid_interval <= 0:
            raise ValueError("grid_interval must be > 0")
        if not (0 < self.damping < 1):
            raise ValueError("damping must be in (0, 1)")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")

    @property
    def row_height(self) -> float:
        return ROW_HEIGHT_FACTOR * self.ideal_link_length

    @property
    def column_gap(self) -> float:
        return COLUMN_GAP_FACTOR * self.ideal_link_length

    def to_dict(self) -> dict:
        return {
            "ideal_link_length": self.ideal_link_length,
            "link_stiffness": self.link_stiffness,
            "inclusion_strength": self.inclusion_strength,
            "exclusion_strength": self.exclusion_strength,
            "sentence_strength": self.sentence_strength,
            "overlap_strength": self.overlap_strength,
            "grid_interval": self.grid_interval,
            "damping": self.damping,
            "stabilize_epsilon": self.stabilize_epsilon,
            "max_iterations": self.max_iterations,
            "composite_padding": self.composite_padding,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LayoutConfig":
        return cls(**d)


class _Structure:
    """Immutable per-document indexes shared by all states of one layout run."""

    def __init__(self, doc: Document, metrics=default_label_extent):
        self.doc_id = doc.id
        self.atom_ids = tuple(sorted(n.id for n in doc.nodes if n.kind == ATOMIC))
        self.comp_ids = tuple(sorted(n.id for n in doc.nodes if n.kind == COMPOSITE))
        self.members = {c: tuple(doc.members_of(c)) for c in self.comp_ids}
        self.ancestors = {
            n.id: tuple(sorted(doc.ancestors_of(n.id))) for n in doc.nodes
        }
        self.closure: dict[str, frozenset[str]] = {}
        for c in self._topo_comps():
            inner: set[str] = set()
            for m in self.members[c]:
                inner.add(m)
                inner |= self.closure.get(m, frozenset())
            self.closure[c] = frozenset(inner)
        self.edges = tuple((e.source, e.target) for e in doc.edges)
        self.extents = {a: metrics(doc.node(a).label) for a in self.atom_ids}
        sentence_order = {s.id: s.order for s in doc.sentences}
        self.node_band: dict[str, int] = {}
        for n in doc.nodes:
            if n.kind != ATOMIC:
                continue
            orders = [sentence_order[sp.sentence_id] for sp in n.spans
                      if sp.sentence_id in sentence_order]
            # latest mention wins: continuity keeps a reused node in the band
            # where the reader last saw it
            self.node_band[n.id] = max(orders) if orders else n.first_sentence

    def _topo_comps(self) -> list[str]:
        """Composites ordered children before parents."""
        depth: dict[str, int] = {}

        def d(c: str) -> int:
            if c in depth:
                return depth[c]
            inner = [d(m) for m in self.members[c] if m in self.members]
            depth[c] = 1 + max(inner, default=0)
            return depth[c]

        return sorted(self.comp_ids, key=lambda c: (d(c), c))


@dataclass(frozen=True)
class LayoutState:
    """Per-node geometry on the canvas. Atomic nodes carry center positions;
    composite bounds are derived from their members plus padding."""

    positions: dict[str, tuple[float, float]]
    extents: dict[str, tuple[float, float]]
    pinned: frozenset[str]
    sentence_centerlines: dict[int, float]
    padding: float = 16.0
    converged: bool = True
    iterations: int = 0
    x_anchors: dict[str, float] | None = None
    structure: _Structure | None = field(default=None, compare=False, repr=False)

    @classmethod
    def from_document(cls, doc: Document, config: LayoutConfig,
                      positions: dict[str, tuple[float, float]],
                      pinned: frozenset[str] = frozenset(),
                      centerlines: dict[int, float] | None = None,
                      metrics=default_label_extent) -> "LayoutState":
        structure = _Structure(doc, metrics)
        return cls(
            positions=dict(positions),
            extents=dict(structure.extents),
            pinned=pinned,
            sentence_centerlines=centerlines or {},
            padding=config.composite_padding,
            structure=structure,
        )

    @property
    def bounds(self) -> dict[str, tuple[float, float, float, float]]:
        """Composite id -> (x0, y0, x1, y1), bounding members plus padding."""
        cached = self.__dict__.get("_bounds")
        if cached is None:
            cached = self._compute_bounds()
            object.__setattr__(self, "_bounds", cached)
        return cached

    def _compute_bounds(self) -> dict[str, tuple[float, float, float, float]]:
        st = self.structure
        if st is None:
            return {}
        pad = self.padding
        out: dict[str, tuple[float, float, float, float]] = {}
        for comp in st._topo_comps():
            rect = None
            for m in st.members[comp]:
                if m in self.positions:
                    x, y = self.positions[m]
                    w, h = self.extents.get(m, (0.0, 0.0))
                    r = (x - w / 2, y - h / 2, x + w / 2, y + h / 2)
                elif m in out:
                    r = out[m]
                else:
                    continue
                rect = r if rect is None else (
                    min(rect[0], r[0]), min(rect[1], r[1]),
                    max(rect[2], r[2]), max(rect[3], r[3]),
                )
            if rect is not None:
                out[comp] = (rect[0] - pad, rect[1] - pad, rect[2] + pad, rect[3] + pad)
        return out

    def center_of(self, node_id: str) -> tuple[float, float] | None:
        if node_id in self.positions:
            return self.positions[node_id]
        b = self.bounds.get(node_id)
        if b is None:
            return None
        return ((b[0] + b[2]) / 2, (b[1] + b[3]) / 2)

    def rect_of(self, node_id: str) -> tuple[float, float, float, float] | None:
        if node_id in self.positions:
            x, y = self.positions[node_id]
            w, h = self.extents[node_id]
            return (x - w / 2, y - h / 2, x + w / 2, y + h / 2)
        return self.bounds.get(node_id)

    def to_dict(self) -> dict:
        out: dict[str, dict] = {}
        for nid in sorted(self.positions):
            x, y = self.positions[nid]
            w, h = self.extents[nid]
            out[nid] = {"x": x, "y": y, "w": w, "h": h, "pinned": nid in self.pinned}
        for cid in sorted(self.bounds):
            x0, y0, x1, y1 = self.bounds[cid]
            out[cid] = {
                "x": (x0 + x1) / 2, "y": (y0 + y1) / 2,
                "w": x1 - x0, "h": y1 - y0, "pinned": False,
            }
        return out


# ---------------------------------------------------------------------------
# Initial layout


def find_longest_cycle(subgraph: LevelGraph) -> list[str]:
    """A longest simple directed cycle of the level, [] when acyclic. Ties
    break on the smallest lexicographic id sequence after rotating each cycle
    to start at its smallest node."""
    g = nx.DiGraph()
    g.add_nodes_from(subgraph.node_ids)
    g.add_edges_from((s, t) for s, t, _ in subgraph.edges)
    best: list[str] | None = None
    for cycle in nx.simple_cycles(g):
        rotated = _rotate_min(cycle)
        if best is None or len(rotated) > len(best) or (
            len(rotated) == len(best) and rotated < best
        ):
            best = rotated
    return best or []


def _rotate_min(cycle: list[str]) -> list[str]:
    k = cycle.index(min(cycle))
    return cycle[k:] + cycle[:k]


def _layer_assignment(node_ids, edges) -> dict[str, int]:
    """Longest-path layering from sources; raises on cycles."""
    preds: dict[str, list[str]] = {n: [] for n in node_ids}
    succs: dict[str, list[str]] = {n: [] for n in node_ids}
    indeg = {n: 0 for n in node_ids}
    for s, t in edges:
        preds[t].append(s)
        succs[s].append(t)
        indeg[t] += 1
    order = sorted(n for n in node_ids if indeg[n] == 0)
    layers: dict[str, int] = {}
    queue = list(order)
    while queue:
        n = queue.pop(0)
        layers[n] = max((layers[p] + 1 for p in preds[n] if p in layers), default=0)
        for t in sorted(succs[n]):
            indeg[t] -= 1
            if indeg[t] == 0:
                queue.append(t)
    if len(layers) != len(node_ids):
        raise ValueError("layer assignment needs an acyclic level")
    return layers


def initial_layout(subgraph: LevelGraph, config: LayoutConfig) -> dict[str, tuple[float, float]]:
    """Deterministic starting geometry for one nesting level.

    Acyclic levels get a longest-path layered layout, columns left to right
    at the ideal link length, nodes within a column stacked by id. Levels
    with cycles place the longest cycle on a regular polygon and layer the
    remaining nodes outward from their attachment to the cycle."""
    ids = list(subgraph.node_ids)
    if not ids:
        return {}
    if len(ids) == 1:
        return {ids[0]: (0.0, 0.0)}
    ideal = config.ideal_link_length
    v_gap = ideal / 2
    edge_pairs = [(s, t) for s, t, _ in subgraph.edges]

    cycle = find_longest_cycle(subgraph)
    if not cycle:
        layers = _layer_assignment(ids, edge_pairs)
        by_layer: dict[int, list[str]] = {}
        for n in ids:
            by_layer.setdefault(layers[n], []).append(n)
        out: dict[str, tuple[float, float]] = {}
        for layer, names in by_layer.items():
            names.sort()
            for i, n in enumerate(names):
                out[n] = (layer * ideal, (i - (len(names) - 1) / 2) * v_gap)
        return out

    out = {}
    m = len(cycle)
    for j, n in enumerate(cycle):
        angle = -math.pi / 2 + 2 * math.pi * j / m
        out[n] = (ideal * math.cos(angle), ideal * math.sin(angle))

    # layer the rest outward by hop distance from the cycle
    neighbors: dict[str, set[str]] = {n: set() for n in ids}
    for s, t in edge_pairs:
        neighbors[s].add(t)
        neighbors[t].add(s)
    dist: dict[str, int] = {n: 0 for n in cycle}
    anchor: dict[str, str] = {n: n for n in cycle}
    frontier = list(cycle)
    while frontier:
        nxt = []
        for n in frontier:
            for nb in sorted(neighbors[n]):
                if nb not in dist:
                    dist[nb] = dist[n] + 1
                    anchor[nb] = anchor[n]
                    nxt.append(nb)
        frontier = nxt
    grouped: dict[tuple[str, int], list[str]] = {}
    for n in ids:
        if n in out:
            continue
        if n in dist:
            grouped.setdefault((anchor[n], dist[n]), []).append(n)
    for (anc, d), names in sorted(grouped.items()):
        ax, ay = out[anc]
        base = math.atan2(ay, ax)
        radius = ideal * (1 + d)
        names.sort()
        for i, n in enumerate(names):
            angle = base + (i - (len(names) - 1) / 2) * (math.pi / 12)
            out[n] = (radius * math.cos(angle), radius * math.sin(angle))
    # anything disconnected from the cycle stacks to the right
    stray = sorted(n for n in ids if n not in out)
    for i, n in enumerate(stray):
        out[n] = (ideal * 3, (i - (len(stray) - 1) / 2) * v_gap)
    return out


# ---------------------------------------------------------------------------
# Forces


def compute_forces(state: LayoutState, doc: Document,
                   config: LayoutConfig) -> dict[str, tuple[float, float]]:
    """Net force per node: link + inclusion + exclusion + overlap + sentence
    for atomics, composites aggregate their own link/inclusion/exclusion
    contributions plus the mean of their direct members' forces. Pinned
    nodes receive zero net force."""
    st = state.structure
    if st is None:
        raise ValueError("state is not bound to a document structure")
    forces: dict[str, list[float]] = {
        n: [0.0, 0.0] for n in list(st.atom_ids) + list(st.comp_ids)
    }
    # Composite centers are the centroid of their direct members' centers,
    # children before parents. The centroid makes the inclusion pulls on a
    # composite's members sum to zero, so a composite cannot push itself
    # across the canvas through its own co-movement.
    centers: dict[str, tuple[float, float]] = {}
    for a in st.atom_ids:
        centers[a] = state.positions[a]
    bounds = state.bounds
    for c in st._topo_comps():
        pts = [centers[m] for m in st.members[c] if m in centers]
        if pts:
            centers[c] = (sum(p[0] for p in pts) / len(pts),
                          sum(p[1] for p in pts) / len(pts))
        else:
            centers[c] = (0.0, 0.0)

    # link springs, attached to centers regardless of nesting level. An edge
    # between a composite and a node it contains gets no spring: the
    # container's center follows its own member, so no rest length exists
    # and the pair would drag the whole layout sideways forever.
    stiffness = config.link_stiffness
    ideal = config.ideal_link_length
    half_of: dict[str, tuple[float, float]] = {}
    for a in st.atom_ids:
        w, h = state.extents[a]
        half_of[a] = (w / 2, h / 2)
    for c in st.comp_ids:
        b = bounds.get(c)
        half_of[c] = ((b[2] - b[0]) / 2, (b[3] - b[1]) / 2) if b else (0.0, 0.0)
    for s, t in st.edges:
        if s not in centers or t not in centers:
            continue
        if t in st.closure.get(s, frozenset()) or s in st.closure.get(t, frozenset()):
            continue
        sx, sy = centers[s]
        tx, ty = centers[t]
        dx, dy = tx - sx, ty - sy
        dist = math.hypot(dx, dy)
        if dist == 0.0:
            ux, uy = 1.0, 0.0
        else:
            ux, uy = dx / dist, dy / dist
        # the rest length grows to the rectangles' contact distance along the
        # current direction: a 120 px center spacing between two wide labels
        # would otherwise demand overlap at equilibrium
        hw = half_of[s][0] + half_of[t][0]
        hh = half_of[s][1] + half_of[t][1]
        contact = min(
            hw / abs(ux) if ux else math.inf,
            hh / abs(uy) if uy else math.inf,
        )
        rest = max(ideal, contact + config.grid_interval)
        mag = stiffness * (dist - rest)  # attracts when stretched
        forces[s][0] += mag * ux
        forces[s][1] += mag * uy
        forces[t][0] -= mag * ux
        forces[t][1] -= mag * uy

    # inclusion: members pulled toward each containing composite's center.
    # Full strength from one ideal link length out, proportional below so the
    # pull settles; the cap keeps distant members from squeezing the rest of
    # the cluster into each other harder than the overlap force can resist.
    inc = config.inclusion_strength
    for c in st.comp_ids:
        cx, cy = centers[c]
        for m in st.members[c]:
            if m not in centers:
                continue
            mx, my = centers[m]
            dx, dy = cx - mx, cy - my
            dist = math.hypot(dx, dy)
            if dist == 0.0:
                continue
            mag = inc * min(1.0, dist / ideal)
            forces[m][0] += mag * dx / dist
            forces[m][1] += mag * dy / dist

    # exclusion: push trespassers out of composites they do not belong to,
    # toward the nearest boundary. Full strength anywhere inside; a linear
    # decay over a short halo outside the boundary gives trespassers a
    # resting place outside instead of a flip-flop across the border.
    exc = config.exclusion_strength
    halo = 2 * config.grid_interval
    for c in st.comp_ids:
        b = bounds.get(c)
        if b is None:
            continue
        inside = st.closure[c]
        for n in forces:
            if n == c or n in inside or c in st.closure.get(n, frozenset()):
                continue
            # composites sharing content legitimately interleave: a composite
            # whose members partly live inside c can never fully leave c's
            # bounds, so pushing it is a permanent, unresolvable force
            if st.closure.get(n) and st.closure[n] & inside:
                continue
            nx_, ny_ = centers[n]
            d_out = max(b[0] - nx_, nx_ - b[2], b[1] - ny_, ny_ - b[3], 0.0)
            if d_out >= halo:
                continue
            if d_out > 0.0:
                ux = nx_ - min(max(nx_, b[0]), b[2])
                uy = ny_ - min(max(ny_, b[1]), b[3])
                norm = math.hypot(ux, uy)
                ux, uy = (ux / norm, uy / norm) if norm else (1.0, 0.0)
            else:
                # nearest exit; exact ties (including the singular center of
                # a square) fall back to +x
                exits = ((b[2] - nx_, 1.0, 0.0), (nx_ - b[0], -1.0, 0.0),
                         (b[3] - ny_, 0.0, 1.0), (ny_ - b[1], 0.0, -1.0))
                nearest = min(e[0] for e in exits)
                ux, uy = next((ex, ey) for d, ex, ey in exits if d == nearest)
            mag = exc * (1.0 - d_out / halo)
            forces[n][0] += mag * ux
            forces[n][1] += mag * uy
            # reaction: the composite yields ground instead of chasing the
            # trespasser across the canvas through connecting springs
            forces[c][0] -= mag * ux
            forces[c][1] -= mag * uy

    # overlap: mutual repulsion between intersecting atomic rectangles.
    # Rectangles are inflated by one grid interval per side so grid snapping
    # cannot reintroduce contact; the magnitude is capped by the penetration
    # itself so the pair separates without overshooting.
    ov = config.overlap_strength
    margin = config.grid_interval
    inflate = 2.0 * margin
    resolve_cap = 1.0 / (4.0 * config.damping)
    atoms = st.atom_ids
    half: dict[str, tuple[float, float]] = {
        a: (state.extents[a][0] / 2 + inflate, state.extents[a][1] / 2 + inflate)
        for a in atoms
    }
    for i, a in enumerate(atoms):
        ax, ay = centers[a]
        aw, ah = half[a]
        for b_ in atoms[i + 1:]:
            bx, by = centers[b_]
            bw, bh = half[b_]
            ox = aw + bw - abs(ax - bx)
            if ox <= 0:
                continue
            oy = ah + bh - abs(ay - by)
            if oy <= 0:
                continue
            depth = min(ox, oy)
            mag = min(ov * (1.0 + depth / margin), depth * resolve_cap)
            dx, dy = bx - ax, by - ay
            dist = math.hypot(dx, dy)
            if dist == 0.0:
                ux, uy = 1.0, 0.0
            else:
                ux, uy = dx / dist, dy / dist
            forces[a][0] -= mag * ux
            forces[a][1] -= mag * uy
            forces[b_][0] += mag * ux
            forces[b_][1] += mag * uy

    # sentence: vertical pull toward the node's sentence centerline,
    # px/step at one ideal link length of vertical offset. A quarter-strength
    # horizontal pull toward each node's reading-order starting x plays the
    # same role sideways: it anchors the one direction nothing else anchors,
    # so an unbalanced subsystem settles instead of sliding forever.
    sen = config.sentence_strength / ideal
    lines = state.sentence_centerlines
    anchors = state.x_anchors or {}
    for a in atoms:
        band = st.node_band.get(a)
        if band is not None and band in lines:
            dy = lines[band] - centers[a][1]
            if dy:
                forces[a][1] += sen * dy
        ax = anchors.get(a)
        if ax is not None:
            forces[a][0] += (sen / 4) * (ax - centers[a][0])

    for p in state.pinned:
        if p in forces:
            forces[p] = [0.0, 0.0]

    # composite aggregation: own contributions plus the mean of the direct
    # members' forces, bottom-up
    for c in st._topo_comps():
        members = [m for m in st.members[c] if m in forces]
        if members:
            fx = sum(forces[m][0] for m in members) / len(members)
            fy = sum(forces[m][1] for m in members) / len(members)
            forces[c][0] += fx
            forces[c][1] += fy
    return {n: (f[0], f[1]) for n, f in forces.items()}


def step(state: LayoutState, forces: dict[str, tuple[float, float]],
         config: LayoutConfig) -> LayoutState:
    """Advance one iteration: every unpinned atomic moves by damping times
    its own force plus damping times each ancestor composite's force. The
    per-iteration displacement is capped at half an ideal link length so
    transient force spikes cannot fling nodes across the canvas."""
    st = state.structure
    damping = config.damping
    cap = config.ideal_link_length / 2
    new_positions: dict[str, tuple[float, float]] = {}
    for a, (x, y) in state.positions.items():
        if a in state.pinned:
            new_positions[a] = (x, y)
            continue
        fx, fy = forces.get(a, (0.0, 0.0))
        for anc in (st.ancestors.get(a, ()) if st else ()):
            afx, afy = forces.get(anc, (0.0, 0.0))
            fx += afx
            fy += afy
        dx, dy = damping * fx, damping * fy
        norm = math.hypot(dx, dy)
        if norm > cap:
            dx, dy = dx * cap / norm, dy * cap / norm
        new_positions[a] = (x + dx, y + dy)
    return replace(state, positions=new_positions)


def snap(value: float, interval: float) -> float:
    """Nearest multiple of interval; exact ties round toward -inf."""
    return interval * math.ceil(value / interval - 0.5)


def _settle(state: LayoutState, config: LayoutConfig) -> tuple[LayoutState, bool]:
    """Bounded constraint sweep after discretization: separate overlapping
    atomic rectangles and eject non-member centers from composite bounds,
    moving unpinned nodes in whole grid steps. Force equilibria can wedge
    nodes into configurations the documented invariants forbid; this pass
    clears them deterministically. Returns (state, clean)."""
    st = state.structure
    if st is None:
        return state, True
    g = config.grid_interval
    positions = dict(state.positions)
    pinned = state.pinned
    atoms = sorted(positions)

    def rects():
        return {
            a: (positions[a][0] - state.extents[a][0] / 2,
                positions[a][1] - state.extents[a][1] / 2,
                positions[a][0] + state.extents[a][0] / 2,
                positions[a][1] + state.extents[a][1] / 2)
            for a in atoms
        }

    def grid_up(value: float) -> float:
        return g * math.ceil(value / g - 1e-9)

    clean = False
    eject_count: dict[str, int] = {}
    for _ in range(40):
        moved = False
        r = rects()
        # overlapping atomic pairs: separate along the axis of least
        # penetration, leaving one clear grid cell between them
        for i, a in enumerate(atoms):
            for b in atoms[i + 1:]:
                ra, rb = r[a], r[b]
                ox = min(ra[2], rb[2]) - max(ra[0], rb[0])
                oy = min(ra[3], rb[3]) - max(ra[1], rb[1])
                if ox <= 0 or oy <= 0:
                    continue
                if a in pinned and b in pinned:
                    continue
                axis = 0 if ox <= oy else 1
                need = grid_up((ox if axis == 0 else oy) + g)
                lo, hi = (a, b) if positions[a][axis] <= positions[b][axis] else (b, a)
                if lo in pinned:
                    shares = {hi: need}
                elif hi in pinned:
                    shares = {lo: -need}
                else:
                    half_steps = grid_up(need / 2)
                    shares = {lo: -half_steps, hi: need - half_steps}
                for node, delta in shares.items():
                    x, y = positions[node]
                    positions[node] = (x + delta, y) if axis == 0 else (x, y + delta)
                r = rects()
                moved = True
        # trespassers: a non-member center strictly inside composite bounds
        # steps out of the union of every violated rectangle in one jump, so
        # overlapping composites cannot bounce it back and forth between them
        bounds = replace(state, positions=positions).bounds
        for a in atoms:
            if a in pinned:
                continue
            x, y = positions[a]
            violated = [
                bounds[c] for c in sorted(bounds)
                if a not in st.closure[c]
                and bounds[c][0] < x < bounds[c][2] and bounds[c][1] < y < bounds[c][3]
            ]
            if not violated:
                continue
            exits = sorted((
                (max(b[2] - x for b in violated), 0, 1.0),
                (max(x - b[0] for b in violated), 0, -1.0),
                (max(b[3] - y for b in violated), 1, 1.0),
                (max(y - b[1] for b in violated), 1, -1.0),
            ))
            # a node bounced back repeatedly tries the other exits with
            # growing clearance, so eject/separate cycles cannot persist
            retry = eject_count.get(a, 0)
            eject_count[a] = retry + 1
            dist, axis, sign = exits[retry % 4]
            delta = sign * grid_up(dist + g * (1 + retry))
            positions[a] = (x + delta, y) if axis == 0 else (x, y + delta)
            bounds = replace(state, positions=positions).bounds
            moved = True
        if not moved:
            clean = True
            break
    return replace(state, positions=positions), clean


def discretize(state: LayoutState, config: LayoutConfig) -> LayoutState:
    g = config.grid_interval
    new_positions = {
        a: (x, y) if a in state.pinned else (snap(x, g), snap(y, g))
        for a, (x, y) in state.positions.items()
    }
    return replace(state, positions=new_positions)


# ---------------------------------------------------------------------------
# Full runs


def sentence_geometry(doc: Document, config: LayoutConfig) -> tuple[dict[int, float], dict[int, float]]:
    """Per-sentence centerline y and column x, from shared-entity columns."""
    from .timeline import assign_columns

    columns = assign_columns(doc)
    orders_by_column: dict[int, list[int]] = {}
    for order in sorted(columns):
        orders_by_column.setdefault(columns[order], []).append(order)
    centerlines: dict[int, float] = {}
    column_x: dict[int, float] = {}
    for col, orders in orders_by_column.items():
        for idx, order in enumerate(sorted(orders)):
            centerlines[order] = idx * config.row_height
            column_x[order] = col * config.column_gap
    return centerlines, column_x


def _recursive_initial(doc: Document, config: LayoutConfig,
                       anchors: dict[str, tuple[float, float]],
                       column_x: dict[int, float],
                       centerlines: dict[int, float]) -> dict[str, tuple[float, float]]:
    """Absolute initial positions for every node: sentence groups of root
    nodes go to their sentence band, composite interiors recurse, anchored at
    the composite's (possibly pre-split) center."""
    positions: dict[str, tuple[float, float]] = {}
    root = level_subgraph(doc)
    groups: dict[int, list[str]] = {}
    for nid in root.node_ids:
        groups.setdefault(doc.node(nid).first_sentence, []).append(nid)
    for order in sorted(groups):
        ids = sorted(groups[order])
        idset = set(ids)
        sub = LevelGraph(None, tuple(ids),
                         tuple(e for e in root.edges if e[0] in idset and e[1] in idset))
        rel = initial_layout(sub, config)
        xs = [p[0] for p in rel.values()]
        ys = [p[1] for p in rel.values()]
        ox = column_x.get(order, 0.0) - min(xs)
        oy = centerlines.get(order, order * config.row_height) - sum(ys) / len(ys)
        for nid, (x, y) in rel.items():
            positions[nid] = (x + ox, y + oy)

    def place_interior(comp: str, center: tuple[float, float]) -> None:
        sub = level_subgraph(doc, comp)
        rel = initial_layout(sub, config)
        if not rel:
            return
        cx = sum(p[0] for p in rel.values()) / len(rel)
        cy = sum(p[1] for p in rel.values()) / len(rel)
        for nid, (x, y) in sorted(rel.items()):
            positions[nid] = (center[0] + x - cx, center[1] + y - cy)
        for nid in sorted(rel):
            if doc.node(nid).kind == COMPOSITE:
                place_interior(nid, anchors.get(nid, positions[nid]))

    for nid in sorted(root.node_ids):
        if doc.node(nid).kind == COMPOSITE:
            center = anchors.get(nid, positions.get(nid, (0.0, 0.0)))
            place_interior(nid, center)
    return positions


def run_layout(doc: Document, prior_state: LayoutState | None,
               pinned: frozenset[str] | set[str], config: LayoutConfig,
               metrics=default_label_extent) -> LayoutState:
    """Lay out a document snapshot: keep prior positions, initialize unseen
    nodes into their sentence band, iterate forces until stable or the
    iteration budget runs out, then snap to the grid. Pinned nodes never
    move. Deterministic for identical inputs."""
    pinned = frozenset(pinned)
    centerlines, column_x = sentence_geometry(doc, config)
    atom_ids = [n.id for n in doc.nodes if n.kind == ATOMIC]
    if not atom_ids:
        return LayoutState({}, {}, pinned, centerlines,
                           padding=config.composite_padding, converged=True,
                           iterations=0, structure=_Structure(doc, metrics))

    anchors: dict[str, tuple[float, float]] = {}
    prior_positions = prior_state.positions if prior_state else {}
    for nid, pos in prior_positions.items():
        anchors[nid] = pos
    fresh = _recursive_initial(doc, config, anchors, column_x, centerlines)
    positions = {}
    for nid in sorted(atom_ids):
        if nid in prior_positions:
            positions[nid] = prior_positions[nid]
        else:
            positions[nid] = fresh.get(nid, (0.0, 0.0))

    state = LayoutState.from_document(doc, config, positions, pinned, centerlines, metrics)
    state = replace(state, x_anchors={a: xy[0] for a, xy in positions.items()})

    converged = False
    iterations = 0
    epsilon = config.stabilize_epsilon
    for iterations in range(1, config.max_iterations + 1):
        forces = compute_forces(state, doc, config)
        new_state = step(state, forces, config)
        max_disp = 0.0
        for a, (x, y) in state.positions.items():
            nx_, ny_ = new_state.positions[a]
            d = math.hypot(nx_ - x, ny_ - y)
            if d > max_disp:
                max_disp = d
        state = new_state
        if max_disp < epsilon:
            converged = True
            break
    state = discretize(state, config)
    state, clean = _settle(state, config)
    return replace(state, converged=converged and clean, iterations=iterations)
