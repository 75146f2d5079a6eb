"""Post-reading exploration: entity ranking with propagated composite
degrees, hover neighborhoods, and text-offset to node lookup."""

from __future__ import annotations

from dataclasses import dataclass

from .model import ATOMIC, Document, Edge, TextSpan


@dataclass(frozen=True)
class EntityRank:
    node_id: str
    label: str
    score: int
    spans: tuple[TextSpan, ...]

    def to_dict(self) -> dict:
        return {
            "node_id": self.node_id,
            "label": self.label,
            "score": self.score,
            "spans": [s.to_dict() for s in self.spans],
        }


def rank_entities(doc: Document) -> list[EntityRank]:
    """Atomic nodes sorted by connectivity: own degree plus the degree of
    every containing composite, each ancestor counted once. Ties break on
    earliest first mention, then id."""
    ranks = []
    for node in doc.nodes:
        if node.kind != ATOMIC:
            continue
        score = doc.degree(node.id)
        score += sum(doc.degree(p) for p in doc.ancestors_of(node.id))
        ranks.append(EntityRank(node.id, node.label, score, node.spans))
    ranks.sort(key=lambda r: (-r.score, doc.node(r.node_id).first_sentence, r.node_id))
    return ranks


@dataclass(frozen=True)
class Neighborhood:
    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]
    spans: dict[str, tuple[TextSpan, ...]]

    def to_dict(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "edges": [e.to_dict() for e in self.edges],
            "spans": {n: [s.to_dict() for s in spans] for n, spans in sorted(self.spans.items())},
        }


def neighborhood(doc: Document, node_id: str) -> Neighborhood:
    """The node, its incident edges, the opposite endpoints, and the text
    spans of everything returned."""
    doc.node(node_id)
    nodes = {node_id}
    edges = []
    for e in doc.edges:
        if e.source == node_id or e.target == node_id:
            edges.append(e)
            nodes.add(e.source)
            nodes.add(e.target)
    ordered = tuple(sorted(nodes))
    spans = {n: doc.node(n).spans for n in ordered}
    return Neighborhood(ordered, tuple(sorted(edges, key=lambda e: e.id)), spans)


def node_for_span(doc: Document, sentence_id: str, offset: int) -> str | None:
    """The node whose text span covers the offset; nested spans resolve to
    the innermost (shortest) one. Inclusive start, exclusive end."""
    best: tuple[int, str] | None = None
    for node in doc.nodes:
        for sp in node.spans:
            if sp.sentence_id != sentence_id:
                continue
            if sp.start <= offset < sp.end:
                width = sp.end - sp.start
                if best is None or (width, node.id) < best:
                    best = (width, node.id)
    return best[1] if best else None
