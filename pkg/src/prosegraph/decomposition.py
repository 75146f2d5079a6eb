"""Per-sentence entity-relation extraction, repair, on-demand refinement,
and merging of sentence graphs into the growing document.

Extraction happens at the top level only; entities are refined into internal
subgraphs on demand, either because their label is structurally complex or
because a later sentence reuses one of their sub-concepts.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, replace
from decimal import ROUND_HALF_UP, Decimal
from typing import NamedTuple

from .backends import (
    INSTRUCTION_REFINE,
    INSTRUCTION_SELF_CORRECT,
    INSTRUCTION_TOP_LEVEL,
    ExtractionBackend,
)
from .model import (
    ATOMIC,
    COMPOSITE,
    Document,
    Edge,
    Membership,
    Node,
    TextSpan,
    canonical_json,
    validate_document,
)

ARTICLES = {"the", "a", "an"}

# Prepositions/subordinators that mark a structurally complex entity label.
FUNCTION_WORDS = ("of", "in", "that", "which", "to", "for", "with", "by")


class SpanResolutionError(ValueError):
    """An extracted entity's text cannot be located in its sentence."""


class RepairError(RuntimeError):
    def __init__(self, violations: list[str]):
        super().__init__("extraction still invalid after repair: " + "; ".join(violations))
        self.violations = violations


class MisalignedCorporaError(ValueError):
    pass


class MergeError(RuntimeError):
    pass


class MergeCycleError(MergeError):
    pass


# ---------------------------------------------------------------------------
# Triple types


@dataclass(frozen=True)
class TripleEntity:
    key: str
    label: str
    start: int | None = None
    end: int | None = None

    def to_dict(self) -> dict:
        d: dict = {"key": self.key, "label": self.label}
        if self.start is not None:
            d["start"] = self.start
            d["end"] = self.end
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TripleEntity":
        return cls(d["key"], d["label"], d.get("start"), d.get("end"))


@dataclass(frozen=True)
class TripleRelation:
    source: str
    target: str
    label: str

    def to_dict(self) -> dict:
        return {"source": self.source, "target": self.target, "label": self.label}

    @classmethod
    def from_dict(cls, d: dict) -> "TripleRelation":
        return cls(d["source"], d["target"], d["label"])


@dataclass(frozen=True)
class TripleSet:
    """Raw extraction output for one sentence, before merging."""

    sentence_id: str
    entities: tuple[TripleEntity, ...] = ()
    relations: tuple[TripleRelation, ...] = ()
    sentence_text: str = ""

    def entity(self, key: str) -> TripleEntity:
        for e in self.entities:
            if e.key == key:
                return e
        raise KeyError(key)

    def to_dict(self) -> dict:
        d = {
            "sentence_id": self.sentence_id,
            "entities": [e.to_dict() for e in self.entities],
            "relations": [r.to_dict() for r in self.relations],
        }
        if self.sentence_text:
            d["sentence_text"] = self.sentence_text
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TripleSet":
        return cls(
            d["sentence_id"],
            tuple(TripleEntity.from_dict(e) for e in d["entities"]),
            tuple(TripleRelation.from_dict(r) for r in d["relations"]),
            d.get("sentence_text", ""),
        )


@dataclass(frozen=True)
class Subgraph:
    """Internal structure of one refined entity; offsets are relative to its label."""

    entities: tuple[TripleEntity, ...] = ()
    relations: tuple[TripleRelation, ...] = ()


@dataclass(frozen=True)
class Metrics:
    total_gold: int
    total_extracted: int
    correct: int

    @property
    def precision(self) -> float:
        return self.correct / self.total_extracted if self.total_extracted else 0.0

    @property
    def recall(self) -> float:
        return self.correct / self.total_gold if self.total_gold else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def display(self) -> dict[str, str]:
        return {
            "precision": pct(self.precision),
            "recall": pct(self.recall),
            "f1": pct(self.f1),
        }


def pct(ratio: float) -> str:
    """Ratio as a percentage string, rounded half-up to one decimal."""
    q = Decimal(repr(ratio * 100)).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP)
    return str(q)


# ---------------------------------------------------------------------------
# Canonical entity keys


def canonical_key(label: str) -> str:
    """Lower-cased, article-stripped, whitespace-normalized label."""
    tokens = [t for t in _tokens(label) if t not in ARTICLES]
    return " ".join(tokens)


def _tokens(label: str) -> list[str]:
    out = []
    for raw in label.lower().split():
        tok = raw.strip(".,;:!?\"'()[]")
        if tok:
            out.append(tok)
    return out


def token_set(label: str) -> frozenset[str]:
    return frozenset(canonical_key(label).split())


@dataclass(frozen=True)
class ComplexityRule:
    """An entity label is complex when it has many content tokens or contains
    a preposition/subordinator, signalling internal structure."""

    min_content_tokens: int = 4
    function_words: tuple[str, ...] = FUNCTION_WORDS
    enabled: bool = True

    def is_complex(self, label: str) -> bool:
        if not self.enabled:
            return False
        toks = [t for t in _tokens(label) if t not in ARTICLES]
        content = [t for t in toks if t not in self.function_words]
        return len(content) >= self.min_content_tokens or any(
            t in self.function_words for t in toks
        )


# ---------------------------------------------------------------------------
# Extraction and repair


def resolve_span(text: str, needle: str) -> tuple[int, int]:
    """First case-insensitive occurrence of needle in text, as [start, end)."""
    idx = text.lower().find(needle.lower())
    if idx < 0:
        raise SpanResolutionError(f"entity text {needle!r} not found in {text!r}")
    return idx, idx + len(needle)


def _parse_payload(payload: dict, text: str | None) -> tuple[tuple[TripleEntity, ...], tuple[TripleRelation, ...]]:
    entities = []
    for e in payload.get("entities", []):
        start = end = None
        if text is not None:
            start, end = resolve_span(text, e["label"])
        entities.append(TripleEntity(e["key"], e["label"], start, end))
    relations = tuple(
        TripleRelation(r["source"], r["target"], r["label"])
        for r in payload.get("relations", [])
    )
    return tuple(entities), relations


def extract_top_level(sentence_id: str, text: str, backend: ExtractionBackend) -> TripleSet:
    """Ask the backend for top-level triples and resolve spans in the sentence."""
    if not text.strip():
        raise ValueError("cannot extract from empty sentence text")
    payload = backend.extract(text, INSTRUCTION_TOP_LEVEL)
    entities, relations = _parse_payload(payload, text)
    return TripleSet(sentence_id, entities, relations, text)


def repair_violations(ts: TripleSet) -> list[str]:
    """The two extraction error classes, detected locally and deterministically."""
    out = []
    keys = {e.key for e in ts.entities}
    related = {r.source for r in ts.relations} | {r.target for r in ts.relations}
    for r in ts.relations:
        for endpoint in (r.source, r.target):
            if endpoint not in keys:
                out.append(f"relation ({r.source}, {r.label}, {r.target}) names "
                           f"non-existent entity {endpoint!r}")
    for e in ts.entities:
        if e.key not in related:
            out.append(f"entity {e.key!r} ({e.label!r}) has no relation")
    return out


def repair_extraction(ts: TripleSet, backend: ExtractionBackend, max_rounds: int = 2) -> TripleSet:
    """Fix orphan entities and dangling relation endpoints via backend
    self-correction; only the fix rounds consult the backend."""
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    violations = repair_violations(ts)
    for _ in range(max_rounds):
        if not violations:
            return ts
        request = canonical_json({"triples": ts.to_dict(), "violations": violations})
        payload = backend.extract(request, INSTRUCTION_SELF_CORRECT)
        entities, relations = _parse_payload(payload, ts.sentence_text or None)
        ts = replace(ts, entities=entities, relations=relations)
        violations = repair_violations(ts)
    if violations:
        raise RepairError(violations)
    return ts


# ---------------------------------------------------------------------------
# Matching and refinement selection


class EntityMatch(NamedTuple):
    entity_key: str
    node_id: str
    kind: str  # "exact" | "subset"


def match_entities(doc: Document, ts: TripleSet) -> list[EntityMatch]:
    """Pair incoming entities with existing nodes: canonical-key equality, or
    proper token-set containment in either direction (sub-concept overlap)."""
    nodes = sorted(doc.nodes, key=lambda n: n.id)
    out: list[EntityMatch] = []
    for entity in ts.entities:
        canon = canonical_key(entity.label)
        if not canon:
            continue
        toks = token_set(entity.label)
        for node in nodes:
            node_canon = canonical_key(node.label)
            if canon == node_canon:
                out.append(EntityMatch(entity.key, node.id, "exact"))
                continue
            node_toks = frozenset(node_canon.split())
            if toks < node_toks or node_toks < toks:
                out.append(EntityMatch(entity.key, node.id, "subset"))
    return out


@dataclass(frozen=True)
class DecompositionTargets:
    entity_keys: frozenset[str] = frozenset()
    node_ids: frozenset[str] = frozenset()

    def __contains__(self, item: str) -> bool:
        return item in self.entity_keys or item in self.node_ids

    def __bool__(self) -> bool:
        return bool(self.entity_keys or self.node_ids)


def select_decomposition_targets(
    doc: Document,
    ts: TripleSet,
    matches: list[EntityMatch],
    rule: ComplexityRule | None = None,
) -> DecompositionTargets:
    """Entities to refine: complex incoming labels, plus both sides of every
    sub-concept match. Earlier nodes that are already composite are excluded
    (their refinement already happened)."""
    rule = rule or ComplexityRule()
    entity_keys = {e.key for e in ts.entities if rule.is_complex(e.label)}
    node_ids = set()
    for m in matches:
        if m.kind != "subset":
            continue
        entity_keys.add(m.entity_key)
        if doc.node(m.node_id).kind == ATOMIC:
            node_ids.add(m.node_id)
    return DecompositionTargets(frozenset(entity_keys), frozenset(node_ids))


def decompose_entity(label: str, backend: ExtractionBackend) -> Subgraph | None:
    """Refine a label into an internal subgraph. Returns None when the backend
    yields fewer than two internal entities (decomposition refused)."""
    payload = backend.extract(label, INSTRUCTION_REFINE)
    entities, relations = _parse_payload(payload, label)
    if len(entities) < 2:
        return None
    sub = Subgraph(entities, relations)
    violations = repair_violations(
        TripleSet("internal", entities, relations, label)
    )
    if violations:
        raise MergeError(f"refinement of {label!r} failed repair checks: {violations}")
    return sub


# ---------------------------------------------------------------------------
# Merging


def _node_id(canon: str, taken: dict[str, str]) -> str:
    """Deterministic readable node id for a canonical key."""
    slug = "n-" + re.sub(r"[^a-z0-9]+", "-", canon).strip("-")
    candidate = slug
    i = 2
    while candidate in taken and taken[candidate] != canon:
        candidate = f"{slug}-{i}"
        i += 1
    return candidate


class _MergeState:
    """Mutable builder over a document's tables during one sentence merge."""

    def __init__(self, doc: Document):
        self.doc = doc
        self.nodes: dict[str, Node] = {n.id: n for n in doc.nodes}
        self.edges: list[Edge] = list(doc.edges)
        self.edge_triples = {(e.source, e.target, e.label) for e in doc.edges}
        self.memberships: list[Membership] = list(doc.memberships)
        self.member_pairs = {(m.parent, m.child) for m in doc.memberships}
        self.canon_by_id = {n.id: canonical_key(n.label) for n in doc.nodes}
        self.id_by_canon = {c: i for i, c in self.canon_by_id.items()}

    def node_for(self, canon: str) -> str | None:
        return self.id_by_canon.get(canon)

    def add_node(self, label: str, kind: str, spans: list[TextSpan], order: int) -> str:
        canon = canonical_key(label)
        nid = _node_id(canon, self.canon_by_id)
        self.nodes[nid] = Node(nid, label, kind, tuple(spans), order)
        self.canon_by_id[nid] = canon
        self.id_by_canon[canon] = nid
        return nid

    def add_spans(self, node_id: str, spans: list[TextSpan], order: int) -> None:
        node = self.nodes[node_id]
        merged = list(node.spans)
        for sp in spans:
            if sp not in merged:
                merged.append(sp)
        self.nodes[node_id] = replace(
            node, spans=tuple(merged), first_sentence=min(node.first_sentence, order)
        )

    def add_membership(self, parent: str, child: str) -> None:
        if (parent, child) in self.member_pairs:
            return
        if parent == child or self._reaches(child, parent):
            raise MergeCycleError(
                f"membership ({parent}, {child}) would close a containment cycle"
            )
        self.memberships.append(Membership(parent, child))
        self.member_pairs.add((parent, child))

    def _reaches(self, start: str, goal: str) -> bool:
        stack = [start]
        seen = set()
        while stack:
            u = stack.pop()
            if u == goal:
                return True
            if u in seen:
                continue
            seen.add(u)
            stack.extend(c for p, c in self.member_pairs if p == u)
        return False

    def add_edge(self, source: str, target: str, label: str, sentence_id: str) -> None:
        if source == target:
            return
        if (source, target, label) in self.edge_triples:
            return
        eid = f"e{len(self.edges) + 1:04d}"
        self.edges.append(Edge(eid, source, target, label, sentence_id))
        self.edge_triples.add((source, target, label))

    def build(self) -> Document:
        return Document(
            id=self.doc.id,
            text=self.doc.text,
            sentences=self.doc.sentences,
            nodes=tuple(self.nodes.values()),
            edges=tuple(self.edges),
            memberships=tuple(self.memberships),
        )


def _member_spans(state: _MergeState, parent_spans: tuple[TextSpan, ...],
                  member_label: str) -> list[TextSpan]:
    """Locate a member's text inside each of a parent node's mention regions."""
    found = []
    for sp in parent_spans:
        sentence = state.doc.sentence(sp.sentence_id)
        region = state.doc.text[sentence.start + sp.start:sentence.start + sp.end]
        idx = region.lower().find(member_label.lower())
        if idx >= 0:
            found.append(TextSpan(sp.sentence_id, sp.start + idx, sp.start + idx + len(member_label)))
    return found


def _attach_subgraph(state: _MergeState, parent_id: str, sub: Subgraph,
                     sentence_id: str, order: int) -> None:
    parent = state.nodes[parent_id]
    key_to_node: dict[str, str] = {}
    for ent in sub.entities:
        canon = canonical_key(ent.label)
        spans = _member_spans(state, parent.spans, ent.label)
        existing = state.node_for(canon)
        if existing is not None:
            member_order = min(
                [state.nodes[existing].first_sentence]
                + [state.doc.sentence(sp.sentence_id).order for sp in spans]
            )
            state.add_spans(existing, spans, member_order)
            member = existing
        else:
            member_order = min(
                [order] + [state.doc.sentence(sp.sentence_id).order for sp in spans]
            )
            member = state.add_node(ent.label, ATOMIC, spans, member_order)
        state.add_membership(parent_id, member)
        key_to_node[ent.key] = member
    for rel in sub.relations:
        state.add_edge(key_to_node[rel.source], key_to_node[rel.target], rel.label, sentence_id)
    state.nodes[parent_id] = replace(state.nodes[parent_id], kind=COMPOSITE)


def merge_sentence(doc: Document, ts: TripleSet,
                   refinements: dict[str, Subgraph] | None = None) -> Document:
    """Fold one repaired sentence extraction into the document.

    Matched entities reuse existing node ids (gaining the new spans), refined
    nodes become composites with membership rows, and unmatched entities
    become fresh nodes. The result always validates cleanly; a merge that
    would close a containment cycle is rejected."""
    refinements = refinements or {}
    sentence = doc.sentence(ts.sentence_id)
    order = sentence.order
    state = _MergeState(doc)

    # refinements of earlier nodes (sub-concept reuse splits them open)
    for node_id in sorted(k for k in refinements if k in state.nodes):
        sub = refinements[node_id]
        if sub is None or state.nodes[node_id].kind == COMPOSITE:
            continue
        _attach_subgraph(state, node_id, sub, ts.sentence_id, order)

    # map incoming entities onto nodes
    mapping: dict[str, str] = {}
    for ent in ts.entities:
        canon = canonical_key(ent.label)
        span = None
        if ent.start is not None:
            span = TextSpan(ts.sentence_id, ent.start, ent.end)
        existing = state.node_for(canon)
        if existing is not None:
            state.add_spans(existing, [span] if span else [], order)
            mapping[ent.key] = existing
            continue
        sub = refinements.get(ent.key)
        kind = COMPOSITE if sub is not None else ATOMIC
        nid = state.add_node(ent.label, kind, [span] if span else [], order)
        mapping[ent.key] = nid
        if sub is not None:
            _attach_subgraph(state, nid, sub, ts.sentence_id, order)

    for rel in ts.relations:
        state.add_edge(mapping[rel.source], mapping[rel.target], rel.label, ts.sentence_id)

    merged = state.build()
    report = validate_document(merged)
    if not report.ok:
        raise MergeError(
            "merge produced an invalid document: "
            + "; ".join(v.message for v in report.errors)
        )
    return merged


# ---------------------------------------------------------------------------
# Scoring


def _entity_counter(ts: TripleSet) -> Counter:
    return Counter(canonical_key(e.label) for e in ts.entities)


def _relation_counter(ts: TripleSet) -> Counter:
    labels = {e.key: canonical_key(e.label) for e in ts.entities}
    return Counter(
        (labels.get(r.source, r.source), labels.get(r.target, r.target), canonical_key(r.label))
        for r in ts.relations
    )


def score_extraction(predicted: list[TripleSet], gold: list[TripleSet]) -> tuple[Metrics, Metrics]:
    """Count correct entities (canonical-key match) and relations
    (endpoint pair + label match) of a prediction corpus against gold."""
    pred_by_id = {ts.sentence_id: ts for ts in predicted}
    gold_by_id = {ts.sentence_id: ts for ts in gold}
    if set(pred_by_id) != set(gold_by_id) or len(pred_by_id) != len(predicted) \
            or len(gold_by_id) != len(gold):
        raise MisalignedCorporaError("corpora do not align by sentence id")

    ent = {"gold": 0, "extracted": 0, "correct": 0}
    rel = {"gold": 0, "extracted": 0, "correct": 0}
    for sid in sorted(gold_by_id):
        g, p = gold_by_id[sid], pred_by_id[sid]
        ge, pe = _entity_counter(g), _entity_counter(p)
        gr, pr = _relation_counter(g), _relation_counter(p)
        ent["gold"] += sum(ge.values())
        ent["extracted"] += sum(pe.values())
        ent["correct"] += sum((ge & pe).values())
        rel["gold"] += sum(gr.values())
        rel["extracted"] += sum(pr.values())
        rel["correct"] += sum((gr & pr).values())
    return (
        Metrics(ent["gold"], ent["extracted"], ent["correct"]),
        Metrics(rel["gold"], rel["extracted"], rel["correct"]),
    )
