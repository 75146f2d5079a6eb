"""Per-sentence progressive-rendering event sequences.

Each sentence compiles to one block: dim what is already on the canvas,
split open nodes whose sub-concepts the sentence reuses, move the shared
subgraph into the sentence's region, then reveal the new elements from the
outside in and left to right. Replaying all blocks in order reproduces the
final layout geometry exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

from .layout import LayoutConfig, LayoutState, initial_layout, snap
from .model import ATOMIC, COMPOSITE, Document, LevelGraph

SENTENCE_BEGIN = "sentence_begin"
SENTENCE_END = "sentence_end"
DIM_EXISTING = "dim_existing"
NODE_SPLIT = "node_split"
NODE_MOVE = "node_move"
REVEAL_NODE = "reveal_node"
REVEAL_EDGE = "reveal_edge"

DIM_OPACITY = 0.35
DIM_MS = 300
RECOLOR_MS = 300
MORPH_MS = 600
MOVE_MS = 600
REVEAL_MS = 150

_KIND_ORDER = {
    SENTENCE_BEGIN: 0,
    DIM_EXISTING: 1,
    NODE_SPLIT: 2,
    NODE_MOVE: 3,
    REVEAL_NODE: 4,
    REVEAL_EDGE: 4,
    SENTENCE_END: 5,
}


@dataclass(frozen=True)
class TimelineEvent:
    kind: str
    subjects: tuple[str, ...]
    geometry: dict
    duration_ms: int

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "subjects": list(self.subjects),
            "geometry": self.geometry,
            "duration_ms": self.duration_ms,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TimelineEvent":
        return cls(d["kind"], tuple(d["subjects"]), d["geometry"], d["duration_ms"])


@dataclass(frozen=True)
class TimelineBlock:
    sentence_order: int
    events: tuple[TimelineEvent, ...]

    def to_dict(self) -> dict:
        return {
            "sentence_order": self.sentence_order,
            "events": [e.to_dict() for e in self.events],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TimelineBlock":
        return cls(d["sentence_order"], tuple(TimelineEvent.from_dict(e) for e in d["events"]))


@dataclass(frozen=True)
class Timeline:
    document_id: str
    columns: dict[int, int]
    blocks: tuple[TimelineBlock, ...]

    def to_dict(self) -> dict:
        return {
            "document_id": self.document_id,
            "columns": {str(k): v for k, v in sorted(self.columns.items())},
            "blocks": [b.to_dict() for b in self.blocks],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Timeline":
        return cls(
            d["document_id"],
            {int(k): v for k, v in d["columns"].items()},
            tuple(TimelineBlock.from_dict(b) for b in d["blocks"]),
        )


@dataclass(frozen=True)
class PrefixSnapshot:
    """Document and layout after one more sentence has been merged."""

    document: Document
    state: LayoutState


def assign_columns(doc: Document) -> dict[int, int]:
    """Group sentences that share at least one entity (directly or
    transitively) into the same column; columns numbered in order of first
    appearance, reading order preserved inside each column."""
    orders = sorted(s.order for s in doc.sentences)
    order_of = {s.id: s.order for s in doc.sentences}
    adjacency: dict[int, set[int]] = {o: set() for o in orders}
    for node in doc.nodes:
        mentioned = sorted({order_of[sp.sentence_id] for sp in node.spans
                            if sp.sentence_id in order_of})
        for a, b in zip(mentioned, mentioned[1:]):
            adjacency[a].add(b)
            adjacency[b].add(a)
    columns: dict[int, int] = {}
    next_column = 0
    for start in orders:
        if start in columns:
            continue
        stack = [start]
        while stack:
            o = stack.pop()
            if o in columns:
                continue
            columns[o] = next_column
            stack.extend(adjacency[o] - columns.keys())
        next_column += 1
    return columns


def split_plan(doc: Document, node_id: str, prev_state: LayoutState,
               cur_state: LayoutState, config: LayoutConfig) -> list[TimelineEvent]:
    """Sub-events converting an atomic node into a composite container:
    recolor, morph of the old rectangle into the container bounds, placement
    of the new members at their initial positions inside it, then the
    internal edges."""
    node = doc.node(node_id)
    if node.kind != COMPOSITE:
        raise ValueError(f"node {node_id} was not refined into a composite")
    old_rect = prev_state.rect_of(node_id)
    if old_rect is None:
        raise ValueError(f"node {node_id} has no geometry before the split")
    new_bounds = cur_state.bounds.get(node_id)
    if new_bounds is None:
        raise ValueError(f"node {node_id} has no container bounds after the split")
    events = [
        TimelineEvent(NODE_SPLIT, (node_id,), {"phase": "recolor"}, RECOLOR_MS),
        TimelineEvent(
            NODE_SPLIT, (node_id,),
            {"phase": "morph", "before": list(old_rect), "after": list(new_bounds)},
            MORPH_MS,
        ),
    ]

    members = doc.members_of(node_id)
    new_members = [m for m in members if m not in prev_state.positions
                   and m not in prev_state.bounds]
    member_set = set(members)
    sub = LevelGraph(node_id, tuple(sorted(members)), tuple(
        (e.source, e.target, e.id) for e in doc.edges
        if e.source in member_set and e.target in member_set
    ))
    rel = initial_layout(sub, config)
    ox, oy = (old_rect[0] + old_rect[2]) / 2, (old_rect[1] + old_rect[3]) / 2
    cx = sum(p[0] for p in rel.values()) / len(rel)
    cy = sum(p[1] for p in rel.values()) / len(rel)
    placements = {m: (ox + rel[m][0] - cx, oy + rel[m][1] - cy) for m in rel}

    g = config.grid_interval
    ordered = sorted(new_members, key=lambda m: (snap(placements[m][0], g), m))
    visible = set(members) - set(new_members)
    for m in ordered:
        x, y = placements[m]
        w, h = cur_state.extents.get(m, (0.0, 0.0))
        events.append(TimelineEvent(
            NODE_SPLIT, (node_id, m),
            {"phase": "member", "at": [x, y], "size": [w, h]},
            REVEAL_MS,
        ))
        visible.add(m)
    internal = sorted(
        (e for e in doc.edges
         if e.source in member_set and e.target in member_set
         and (e.source in set(new_members) or e.target in set(new_members))),
        key=lambda e: e.id,
    )
    for e in internal:
        events.append(TimelineEvent(
            NODE_SPLIT, (node_id, e.id), {"phase": "edge"}, REVEAL_MS,
        ))
    return events


def _membership_depth(doc: Document) -> dict[str, int]:
    """Longest ancestor chain per node; children always deeper than parents."""
    depth: dict[str, int] = {}

    def d(nid: str) -> int:
        if nid in depth:
            return depth[nid]
        parents = doc.parents_of(nid)
        depth[nid] = 0 if not parents else 1 + max(d(p) for p in parents)
        return depth[nid]

    for n in doc.nodes:
        d(n.id)
    return depth


def compile_timeline(doc: Document, snapshots: list[PrefixSnapshot],
                     config: LayoutConfig | None = None) -> Timeline:
    """Compile one event block per sentence from the per-prefix snapshots."""
    config = config or LayoutConfig()
    orders = sorted(s.order for s in doc.sentences)
    if len(snapshots) != len(orders):
        raise ValueError(
            f"need one snapshot per sentence prefix: {len(orders)} sentences, "
            f"{len(snapshots)} snapshots"
        )
    sentences_by_order = {s.order: s for s in doc.sentences}
    blocks = []
    for idx, order in enumerate(orders):
        cur = snapshots[idx]
        prev = snapshots[idx - 1] if idx > 0 else None
        blocks.append(_compile_block(sentences_by_order[order], prev, cur, config))
    return Timeline(doc.id, assign_columns(doc), tuple(blocks))


def _compile_block(sentence, prev: PrefixSnapshot | None, cur: PrefixSnapshot,
                   config: LayoutConfig) -> TimelineBlock:
    cur_doc = cur.document
    prev_nodes = {n.id for n in prev.document.nodes} if prev else set()
    prev_edges = {e.id for e in prev.document.edges} if prev else set()
    prev_kinds = {n.id: n.kind for n in prev.document.nodes} if prev else {}
    events: list[TimelineEvent] = [
        TimelineEvent(SENTENCE_BEGIN, (sentence.id,), {}, 0)
    ]

    prior = sorted(prev_nodes) + sorted(prev_edges)
    if prior:
        events.append(TimelineEvent(
            DIM_EXISTING, tuple(prior), {"opacity": DIM_OPACITY}, DIM_MS
        ))

    # splits: atomic before, composite now
    split_ids = sorted(
        n.id for n in cur_doc.nodes
        if n.kind == COMPOSITE and prev_kinds.get(n.id) == ATOMIC
    )
    placements: dict[str, tuple[float, float]] = {}
    split_covered_nodes: set[str] = set()
    split_covered_edges: set[str] = set()
    for nid in split_ids:
        plan = split_plan(cur_doc, nid, prev.state, cur.state, config)
        for ev in plan:
            phase = ev.geometry.get("phase")
            if phase == "member":
                # a node shared by two splits is placed by the first one only
                if ev.subjects[1] in split_covered_nodes:
                    continue
                placements[ev.subjects[1]] = tuple(ev.geometry["at"])
                split_covered_nodes.add(ev.subjects[1])
            elif phase == "edge":
                if ev.subjects[1] in split_covered_edges:
                    continue
                split_covered_edges.add(ev.subjects[1])
            events.append(ev)

    # moves: anything already positioned (previous snapshot or a placement
    # just made by a split) that ends this block somewhere else
    known: dict[str, tuple[float, float]] = {}
    if prev:
        known.update(prev.state.positions)
    known.update(placements)
    for nid in sorted(known):
        if nid not in cur.state.positions:
            continue  # became composite; the morph carries its geometry
        before, after = known[nid], cur.state.positions[nid]
        if before != after:
            events.append(TimelineEvent(
                NODE_MOVE, (nid,),
                {"before": list(before), "after": list(after)}, MOVE_MS,
            ))

    # reveals: new elements not already covered by a split, outer to inner,
    # then left to right by snapped x
    new_nodes = [n for n in cur_doc.nodes
                 if n.id not in prev_nodes and n.id not in split_covered_nodes]
    new_edges = [e for e in cur_doc.edges
                 if e.id not in prev_edges and e.id not in split_covered_edges]
    depth = _membership_depth(cur_doc)
    g = config.grid_interval

    def reveal_key(node):
        center = cur.state.center_of(node.id) or (0.0, 0.0)
        return (depth[node.id], snap(center[0], g), node.id)

    visible = set(prev_nodes) | split_covered_nodes
    pending_edges = sorted(new_edges, key=lambda e: e.id)

    def flush_ready():
        nonlocal pending_edges
        remaining = []
        for e in pending_edges:
            if e.source in visible and e.target in visible:
                events.append(TimelineEvent(REVEAL_EDGE, (e.id,), {}, REVEAL_MS))
            else:
                remaining.append(e)
        pending_edges = remaining

    flush_ready()
    for node in sorted(new_nodes, key=reveal_key):
        if node.kind == ATOMIC:
            x, y = cur.state.positions[node.id]
            w, h = cur.state.extents[node.id]
            geometry = {"at": [x, y], "size": [w, h]}
        else:
            geometry = {"bounds": list(cur.state.bounds[node.id])}
        events.append(TimelineEvent(REVEAL_NODE, (node.id,), geometry, REVEAL_MS))
        visible.add(node.id)
        flush_ready()
    for e in pending_edges:  # endpoints all visible by now
        events.append(TimelineEvent(REVEAL_EDGE, (e.id,), {}, REVEAL_MS))

    events.append(TimelineEvent(SENTENCE_END, (sentence.id,), {"opacity": 1.0}, 0))
    return TimelineBlock(sentence.order, tuple(events))


def replay_geometry(timeline: Timeline) -> dict[str, tuple[float, float]]:
    """Apply every block in order; returns the reconstructed atomic centers."""
    positions: dict[str, tuple[float, float]] = {}
    for block in timeline.blocks:
        for ev in block.events:
            if ev.kind == NODE_SPLIT:
                phase = ev.geometry.get("phase")
                if phase == "morph":
                    positions.pop(ev.subjects[0], None)
                elif phase == "member":
                    positions[ev.subjects[1]] = tuple(ev.geometry["at"])
            elif ev.kind == NODE_MOVE:
                positions[ev.subjects[0]] = tuple(ev.geometry["after"])
            elif ev.kind == REVEAL_NODE and "at" in ev.geometry:
                positions[ev.subjects[0]] = tuple(ev.geometry["at"])
    return positions
