"""Nested (compound, possibly overlapping) graph documents.

A document holds the original text, its sentence segmentation, and a graph
of atomic/composite nodes connected by directed labeled edges. Containment
is a DAG: a node may belong to several composites, but membership must
never cycle. Documents are immutable after construction and safe to share.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

ROOT = None  # sentinel parent for level_subgraph

ATOMIC = "atomic"
COMPOSITE = "composite"


class UnknownIdError(KeyError):
    """Raised when an operation references an id the document does not hold."""


@dataclass(frozen=True)
class TextSpan:
    """Character range [start, end) inside one sentence's text."""

    sentence_id: str
    start: int
    end: int

    def to_dict(self) -> dict:
        return {"sentence_id": self.sentence_id, "start": self.start, "end": self.end}

    @classmethod
    def from_dict(cls, d: dict) -> "TextSpan":
        return cls(d["sentence_id"], d["start"], d["end"])


@dataclass(frozen=True)
class Sentence:
    id: str
    order: int
    start: int
    end: int

    def to_dict(self) -> dict:
        return {"id": self.id, "order": self.order, "start": self.start, "end": self.end}

    @classmethod
    def from_dict(cls, d: dict) -> "Sentence":
        return cls(d["id"], d["order"], d["start"], d["end"])


@dataclass(frozen=True)
class Node:
    id: str
    label: str
    kind: str  # ATOMIC or COMPOSITE
    spans: tuple[TextSpan, ...] = ()
    first_sentence: int = 0

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "label": self.label,
            "kind": self.kind,
            "spans": [s.to_dict() for s in self.spans],
            "first_sentence": self.first_sentence,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Node":
        return cls(
            d["id"],
            d["label"],
            d["kind"],
            tuple(TextSpan.from_dict(s) for s in d["spans"]),
            d["first_sentence"],
        )


@dataclass(frozen=True)
class Edge:
    id: str
    source: str
    target: str
    label: str
    sentence_id: str

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "source": self.source,
            "target": self.target,
            "label": self.label,
            "sentence_id": self.sentence_id,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Edge":
        return cls(d["id"], d["source"], d["target"], d["label"], d["sentence_id"])


@dataclass(frozen=True)
class Membership:
    parent: str
    child: str

    def to_dict(self) -> dict:
        return {"parent": self.parent, "child": self.child}

    @classmethod
    def from_dict(cls, d: dict) -> "Membership":
        return cls(d["parent"], d["child"])


@dataclass(frozen=True)
class Violation:
    severity: str  # "error" | "warning"
    code: str
    message: str
    subjects: tuple[str, ...] = ()


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def errors(self) -> list[Violation]:
        return [v for v in self.violations if v.severity == "error"]

    @property
    def warnings(self) -> list[Violation]:
        return [v for v in self.violations if v.severity == "warning"]

    @property
    def ok(self) -> bool:
        return not self.errors

    def __bool__(self) -> bool:
        return bool(self.violations)


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    sentences: tuple[Sentence, ...] = ()
    nodes: tuple[Node, ...] = ()
    edges: tuple[Edge, ...] = ()
    memberships: tuple[Membership, ...] = ()

    # -- lookups -------------------------------------------------------------

    def node(self, node_id: str) -> Node:
        try:
            return self._nodes_by_id[node_id]
        except KeyError:
            raise UnknownIdError(node_id) from None

    def sentence(self, sentence_id: str) -> Sentence:
        try:
            return self._sentences_by_id[sentence_id]
        except KeyError:
            raise UnknownIdError(sentence_id) from None

    def sentence_text(self, sentence_id: str) -> str:
        s = self.sentence(sentence_id)
        return self.text[s.start:s.end]

    @property
    def _nodes_by_id(self) -> dict[str, Node]:
        cache = self.__dict__.get("_nodes_cache")
        if cache is None:
            cache = {n.id: n for n in self.nodes}
            object.__setattr__(self, "_nodes_cache", cache)
        return cache

    @property
    def _sentences_by_id(self) -> dict[str, Sentence]:
        cache = self.__dict__.get("_sentences_cache")
        if cache is None:
            cache = {s.id: s for s in self.sentences}
            object.__setattr__(self, "_sentences_cache", cache)
        return cache

    def members_of(self, parent_id: str) -> list[str]:
        """Direct children of a composite, in membership insertion order."""
        return [m.child for m in self.memberships if m.parent == parent_id]

    def parents_of(self, child_id: str) -> list[str]:
        return [m.parent for m in self.memberships if m.child == child_id]

    def ancestors_of(self, node_id: str) -> set[str]:
        """All composites containing node_id, transitively (set semantics)."""
        seen: set[str] = set()
        stack = self.parents_of(node_id)
        while stack:
            p = stack.pop()
            if p not in seen:
                seen.add(p)
                stack.extend(self.parents_of(p))
        return seen

    def degree(self, node_id: str) -> int:
        return sum(1 for e in self.edges if e.source == node_id or e.target == node_id)

    # -- serialization ---------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "sentences": [s.to_dict() for s in sorted(self.sentences, key=lambda s: s.id)],
            "nodes": [n.to_dict() for n in sorted(self.nodes, key=lambda n: n.id)],
            "edges": [e.to_dict() for e in sorted(self.edges, key=lambda e: e.id)],
            "memberships": [
                m.to_dict() for m in sorted(self.memberships, key=lambda m: (m.parent, m.child))
            ],
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "Document":
        return cls(
            id=d["id"],
            text=d["text"],
            sentences=tuple(Sentence.from_dict(s) for s in d["sentences"]),
            nodes=tuple(Node.from_dict(n) for n in d["nodes"]),
            edges=tuple(Edge.from_dict(e) for e in d["edges"]),
            memberships=tuple(Membership.from_dict(m) for m in d["memberships"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "Document":
        return cls.from_dict(json.loads(text))


def canonical_json(obj) -> str:
    """Byte-stable JSON: sorted keys, no whitespace, raw UTF-8."""
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class LevelGraph:
    """One nesting level: the direct members of a parent and the edges among them."""

    parent: str | None
    node_ids: tuple[str, ...]
    edges: tuple[tuple[str, str, str], ...]  # (source, target, edge_id)


def validate_document(doc: Document) -> ValidationReport:
    """Check every structural invariant; violations are data, not failures."""
    out: list[Violation] = []

    def err(code: str, message: str, *subjects: str) -> None:
        out.append(Violation("error", code, message, tuple(subjects)))

    def warn(code: str, message: str, *subjects: str) -> None:
        out.append(Violation("warning", code, message, tuple(subjects)))

    node_ids = [n.id for n in doc.nodes]
    sentence_ids = [s.id for s in doc.sentences]
    for name, ids in (("node", node_ids), ("sentence", sentence_ids),
                      ("edge", [e.id for e in doc.edges])):
        seen: set[str] = set()
        for i in ids:
            if i in seen:
                err("duplicate_id", f"duplicate {name} id {i!r}", i)
            seen.add(i)
    nodes = set(node_ids)
    sentences = {s.id: s for s in doc.sentences}

    orders = sorted(s.order for s in doc.sentences)
    if orders != list(range(len(orders))):
        err("sentence_order_gap",
            f"sentence orders {orders} are not consecutive from 0")
    by_order = sorted(doc.sentences, key=lambda s: s.order)
    for a, b in zip(by_order, by_order[1:]):
        if not (a.start <= a.end <= b.start <= b.end):
            err("sentence_overlap",
                f"sentences {a.id} and {b.id} overlap or are out of order", a.id, b.id)
    for s in doc.sentences:
        if not (0 <= s.start <= s.end <= len(doc.text)):
            err("sentence_out_of_bounds",
                f"sentence {s.id} range [{s.start}, {s.end}) exceeds document text", s.id)

    member_index: dict[str, list[str]] = {}
    seen_pairs: set[tuple[str, str]] = set()
    for m in doc.memberships:
        if m.parent not in nodes or m.child not in nodes:
            err("membership_unknown_node",
                f"membership ({m.parent}, {m.child}) references a missing node",
                m.parent, m.child)
            continue
        if (m.parent, m.child) in seen_pairs:
            err("membership_duplicate",
                f"duplicate membership ({m.parent}, {m.child})", m.parent, m.child)
        seen_pairs.add((m.parent, m.child))
        member_index.setdefault(m.parent, []).append(m.child)

    cycle = _find_membership_cycle(member_index)
    if cycle:
        err("membership_cycle",
            "containment cycle through {" + ", ".join(sorted(cycle)) + "}",
            *sorted(cycle))

    for n in doc.nodes:
        members = member_index.get(n.id, [])
        if n.kind == ATOMIC and members:
            err("atomic_with_members", f"atomic node {n.id} has members", n.id)
        if n.kind == COMPOSITE and len(members) < 2:
            err("composite_too_few_members",
                f"composite node {n.id} has {len(members)} member(s), needs >= 2", n.id)
        effective = list(n.spans)
        if not effective and n.kind == COMPOSITE:
            effective = [sp for a in _closure(n.id, member_index) - {n.id}
                         for sp in doc._nodes_by_id.get(a, n).spans]
        if not effective:
            err("node_without_spans", f"node {n.id} has no text spans", n.id)
        for sp in n.spans:
            if sp.sentence_id not in sentences:
                err("span_unknown_sentence",
                    f"span of {n.id} references missing sentence {sp.sentence_id}",
                    n.id, sp.sentence_id)
            else:
                s = sentences[sp.sentence_id]
                if not (0 <= sp.start < sp.end <= s.end - s.start):
                    err("span_out_of_bounds",
                        f"span [{sp.start}, {sp.end}) of {n.id} exceeds sentence "
                        f"{sp.sentence_id}", n.id, sp.sentence_id)

    for e in doc.edges:
        if e.source == e.target:
            err("edge_self_loop", f"edge {e.id} connects {e.source} to itself", e.id)
        for endpoint in (e.source, e.target):
            if endpoint not in nodes:
                err("edge_unknown_endpoint",
                    f"edge {e.id} references missing node {endpoint}", e.id, endpoint)
        if e.sentence_id not in sentences:
            err("edge_unknown_sentence",
                f"edge {e.id} references missing sentence {e.sentence_id}", e.id)
        if e.source in nodes and e.target in nodes:
            for comp, other in ((e.source, e.target), (e.target, e.source)):
                if other in _closure(comp, member_index) - {comp}:
                    warn("edge_into_own_member",
                         f"edge {e.id} connects composite {comp} to contained node {other}",
                         e.id, comp, other)

    return ValidationReport(tuple(out))


def _closure(node_id: str, member_index: dict[str, list[str]]) -> set[str]:
    """node_id plus everything reachable through membership."""
    seen = {node_id}
    stack = [node_id]
    while stack:
        for child in member_index.get(stack.pop(), []):
            if child not in seen:
                seen.add(child)
                stack.append(child)
    return seen


def _find_membership_cycle(member_index: dict[str, list[str]]) -> set[str] | None:
    """Return the node set of one containment cycle, or None if acyclic."""
    WHITE, GRAY, BLACK = 0, 1, 2
    color: dict[str, int] = {}
    stack_path: list[str] = []

    def visit(u: str) -> set[str] | None:
        color[u] = GRAY
        stack_path.append(u)
        for v in member_index.get(u, []):
            c = color.get(v, WHITE)
            if c == GRAY:
                return set(stack_path[stack_path.index(v):])
            if c == WHITE:
                found = visit(v)
                if found:
                    return found
        stack_path.pop()
        color[u] = BLACK
        return None

    for u in sorted(member_index):
        if color.get(u, WHITE) == WHITE:
            found = visit(u)
            if found:
                return found
    return None


def descendant_atoms(doc: Document, node_id: str) -> set[str]:
    """Atomic nodes reachable from node_id through membership; atoms map to themselves."""
    node = doc.node(node_id)
    if node.kind == ATOMIC:
        return {node_id}
    out: set[str] = set()
    seen: set[str] = set()
    stack = [node_id]
    while stack:
        current = stack.pop()
        if current in seen:
            continue
        seen.add(current)
        for child in doc.members_of(current):
            if doc.node(child).kind == ATOMIC:
                out.add(child)
            else:
                stack.append(child)
    return out


def level_subgraph(doc: Document, parent: str | None = ROOT) -> LevelGraph:
    """Direct members of `parent` (all parentless nodes for the root) plus the
    edges whose endpoints both sit in that member set."""
    if parent is ROOT:
        children = {m.child for m in doc.memberships}
        member_ids = [n.id for n in doc.nodes if n.id not in children]
    else:
        doc.node(parent)  # raises UnknownIdError
        member_ids = doc.members_of(parent)
    member_set = set(member_ids)
    edges = tuple(
        (e.source, e.target, e.id)
        for e in doc.edges
        if e.source in member_set and e.target in member_set
    )
    return LevelGraph(parent, tuple(member_ids), edges)
