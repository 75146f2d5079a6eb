"""Pipeline orchestration, bundle persistence, and the HTTP query API.

Ingestion runs per sentence: extract, repair, match, select refinement
targets, decompose, merge, then re-layout with shared nodes pinned into the
new sentence's region. The resulting bundle (document, per-prefix layouts,
timeline, entity ranking, provenance) is an immutable artifact persisted as
one JSON file named by content hash.
"""

from __future__ import annotations

import hashlib
import os
import tempfile
from dataclasses import dataclass, replace

from fastapi import FastAPI, HTTPException, Request, Response

from .backends import BackendError, ExtractionBackend, FixtureBackend
from .decomposition import (
    ComplexityRule,
    MergeError,
    RepairError,
    SpanResolutionError,
    TripleSet,
    decompose_entity,
    extract_top_level,
    match_entities,
    merge_sentence,
    repair_extraction,
    select_decomposition_targets,
)
from .layout import LayoutConfig, LayoutState, initial_layout, run_layout, sentence_geometry
from .model import COMPOSITE, Document, LevelGraph, Sentence, canonical_json, descendant_atoms
from .review import EntityRank, rank_entities
from .segment import segment_text
from .svg import render_svg
from .timeline import PrefixSnapshot, Timeline, compile_timeline

ENV_DATA_DIR = "PROSEGRAPH_DATA_DIR"


class IngestError(RuntimeError):
    def __init__(self, sentence_index: int, cause: Exception):
        super().__init__(f"ingestion failed at sentence {sentence_index}: {cause}")
        self.sentence_index = sentence_index
        self.cause = cause


@dataclass(frozen=True)
class IngestConfig:
    layout: LayoutConfig = LayoutConfig()
    complexity: ComplexityRule = ComplexityRule()
    max_repair_rounds: int = 2

    def to_dict(self) -> dict:
        return {
            "layout": self.layout.to_dict(),
            "complexity": {
                "min_content_tokens": self.complexity.min_content_tokens,
                "function_words": list(self.complexity.function_words),
                "enabled": self.complexity.enabled,
            },
            "max_repair_rounds": self.max_repair_rounds,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IngestConfig":
        comp = d.get("complexity", {})
        return cls(
            layout=LayoutConfig.from_dict(d["layout"]),
            complexity=ComplexityRule(
                comp.get("min_content_tokens", 4),
                tuple(comp.get("function_words", ())),
                comp.get("enabled", True),
            ),
            max_repair_rounds=d.get("max_repair_rounds", 2),
        )


@dataclass(frozen=True)
class StateRecord:
    """Serialized form of one prefix layout: node id -> {x, y, w, h, pinned}."""

    nodes: dict[str, dict]
    converged: bool
    iterations: int

    @classmethod
    def from_state(cls, state: LayoutState) -> "StateRecord":
        return cls(state.to_dict(), state.converged, state.iterations)

    def to_dict(self) -> dict:
        return {"nodes": self.nodes, "converged": self.converged,
                "iterations": self.iterations}

    @classmethod
    def from_dict(cls, d: dict) -> "StateRecord":
        return cls(d["nodes"], d["converged"], d["iterations"])


@dataclass(frozen=True)
class DocumentBundle:
    document: Document
    states: tuple[StateRecord, ...]
    timeline: Timeline
    entities: tuple[EntityRank, ...]
    config: IngestConfig
    provenance: dict

    @property
    def id(self) -> str:
        return self.document.id

    def to_dict(self) -> dict:
        return {
            "id": self.document.id,
            "document": self.document.to_dict(),
            "states": [s.to_dict() for s in self.states],
            "timeline": self.timeline.to_dict(),
            "entities": [r.to_dict() for r in self.entities],
            "config": self.config.to_dict(),
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict()) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "DocumentBundle":
        from .model import TextSpan

        entities = tuple(
            EntityRank(
                r["node_id"], r["label"], r["score"],
                tuple(TextSpan.from_dict(s) for s in r["spans"]),
            )
            for r in d["entities"]
        )
        return cls(
            document=Document.from_dict(d["document"]),
            states=tuple(StateRecord.from_dict(s) for s in d["states"]),
            timeline=Timeline.from_dict(d["timeline"]),
            entities=entities,
            config=IngestConfig.from_dict(d["config"]),
            provenance=d["provenance"],
        )


# ---------------------------------------------------------------------------
# Per-sentence layout orchestration


def _sentence_slots(doc: Document, sentence_id: str, order: int,
                    config: LayoutConfig) -> dict[str, tuple[float, float]]:
    """Initial-layout positions for the sentence's participants, offset into
    the sentence's column band."""
    ids = sorted({n.id for n in doc.nodes
                  if any(sp.sentence_id == sentence_id for sp in n.spans)})
    if not ids:
        return {}
    idset = set(ids)
    edges = tuple(
        (e.source, e.target, e.id) for e in doc.edges
        if e.sentence_id == sentence_id and e.source in idset and e.target in idset
    )
    rel = initial_layout(LevelGraph(None, tuple(ids), edges), config)
    centerlines, column_x = sentence_geometry(doc, config)
    xs = [p[0] for p in rel.values()]
    ys = [p[1] for p in rel.values()]
    ox = column_x.get(order, 0.0) - min(xs)
    oy = centerlines.get(order, order * config.row_height) - sum(ys) / len(ys)
    return {n: (x + ox, y + oy) for n, (x, y) in rel.items()}


def _shared_nodes(doc: Document, sentence_id: str, order: int) -> list[str]:
    """Nodes the sentence reuses: they gained a span here and were already
    mentioned by an earlier sentence."""
    order_of = {s.id: s.order for s in doc.sentences}
    shared = []
    for n in doc.nodes:
        orders = {order_of[sp.sentence_id] for sp in n.spans if sp.sentence_id in order_of}
        if order in orders and any(o < order for o in orders):
            shared.append(n.id)
    return sorted(shared)


def layout_sentence_step(doc: Document, sentence_id: str, order: int,
                         prior_state: LayoutState | None,
                         config: LayoutConfig) -> LayoutState:
    """Re-layout after merging one sentence: shared nodes are moved into the
    sentence's region and pinned there, everything else optimizes freely."""
    positions = dict(prior_state.positions) if prior_state else {}
    slots = _sentence_slots(doc, sentence_id, order, config)
    pinned: set[str] = set()
    shared = _shared_nodes(doc, sentence_id, order)
    composites = [n for n in shared if doc.node(n).kind == COMPOSITE]
    atoms = [n for n in shared if doc.node(n).kind != COMPOSITE]
    for nid in composites:
        if nid not in slots or prior_state is None:
            continue
        center = prior_state.center_of(nid)
        if center is None:
            continue
        dx = slots[nid][0] - center[0]
        dy = slots[nid][1] - center[1]
        for atom in sorted(descendant_atoms(doc, nid)):
            if atom in positions:
                positions[atom] = (positions[atom][0] + dx, positions[atom][1] + dy)
                pinned.add(atom)
    for nid in atoms:
        # shared nodes created by this very merge (split members reused by the
        # sentence) have no prior position yet; they still pin to their slot
        if nid in slots:
            positions[nid] = slots[nid]
            pinned.add(nid)
    prior = None
    if positions:
        prior = LayoutState(positions, {}, frozenset(), {})
    return run_layout(doc, prior, frozenset(pinned), config)


def layout_prefixes(steps: list[tuple[Document, str]],
                    config: LayoutConfig) -> list[PrefixSnapshot]:
    """Chain per-sentence layouts over growing document prefixes."""
    snapshots: list[PrefixSnapshot] = []
    prior: LayoutState | None = None
    for doc, sentence_id in steps:
        order = doc.sentence(sentence_id).order
        state = layout_sentence_step(doc, sentence_id, order, prior, config)
        snapshots.append(PrefixSnapshot(doc, state))
        prior = state
    return snapshots


# ---------------------------------------------------------------------------
# Ingestion


def document_id_for(text: str, config: IngestConfig, backend_mode: str) -> str:
    digest = hashlib.sha256(canonical_json({
        "text": text, "config": config.to_dict(), "backend": backend_mode,
    }).encode("utf-8")).hexdigest()
    return f"doc-{digest[:12]}"


def ingest(text: str, config: IngestConfig, backend: ExtractionBackend) -> DocumentBundle:
    """Run the full pipeline over a passage and assemble its bundle."""
    if not text or not text.strip():
        raise ValueError("cannot ingest empty text")
    offsets = segment_text(text)
    doc = Document(document_id_for(text, config, backend.mode), text)
    steps: list[tuple[Document, str]] = []
    for order, (start, end) in enumerate(offsets):
        sid = f"s{order}"
        doc = replace(doc, sentences=doc.sentences + (Sentence(sid, order, start, end),))
        sentence_text = text[start:end]
        try:
            ts = extract_top_level(sid, sentence_text, backend)
            ts = repair_extraction(ts, backend, config.max_repair_rounds)
            matches = match_entities(doc, ts)
            targets = select_decomposition_targets(doc, ts, matches, config.complexity)
            refinements = {}
            for node_id in sorted(targets.node_ids):
                sub = decompose_entity(doc.node(node_id).label, backend)
                if sub is not None:
                    refinements[node_id] = sub
            for key in sorted(targets.entity_keys):
                sub = decompose_entity(ts.entity(key).label, backend)
                if sub is not None:
                    refinements[key] = sub
            doc = merge_sentence(doc, ts, refinements)
        except (BackendError, RepairError, MergeError, SpanResolutionError, ValueError) as exc:
            raise IngestError(order, exc) from exc
        steps.append((doc, sid))

    snapshots = layout_prefixes(steps, config.layout)
    tl = compile_timeline(doc, snapshots, config.layout)
    ranks = tuple(rank_entities(doc))
    provenance: dict = {"backend_mode": backend.mode}
    if isinstance(backend, FixtureBackend):
        provenance["fixture_keys"] = sorted(set(backend.requested_keys))
    return DocumentBundle(
        document=doc,
        states=tuple(StateRecord.from_state(s.state) for s in snapshots),
        timeline=tl,
        entities=ranks,
        config=config,
        provenance=provenance,
    )


# ---------------------------------------------------------------------------
# SVG export


def export_svg(bundle: DocumentBundle, prefix: int) -> str:
    """Deterministic SVG of the first `prefix` sentences' graph."""
    total = len(bundle.document.sentences)
    if not (0 <= prefix <= total):
        raise ValueError(f"prefix {prefix} out of range 0..{total}")
    if prefix == 0:
        return render_svg(bundle.document, {}, set())
    record = bundle.states[prefix - 1]
    order_of = {s.id: s.order for s in bundle.document.sentences}
    visible_edges = {
        e.id for e in bundle.document.edges
        if order_of[e.sentence_id] < prefix
        and e.source in record.nodes and e.target in record.nodes
    }
    return render_svg(bundle.document, record.nodes, visible_edges)


# ---------------------------------------------------------------------------
# Persistence


class BundleStore:
    """One immutable JSON file per bundle; writes go through a temp file and
    an atomic rename so files are either absent or complete."""

    def __init__(self, data_dir: str):
        self.data_dir = data_dir
        os.makedirs(data_dir, exist_ok=True)

    def path_for(self, bundle_id: str) -> str:
        return os.path.join(self.data_dir, f"{bundle_id}.json")

    def save(self, bundle: DocumentBundle) -> str:
        path = self.path_for(bundle.id)
        fd, tmp = tempfile.mkstemp(dir=self.data_dir, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as f:
                f.write(bundle.to_json())
            os.replace(tmp, path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)
        return path

    def exists(self, bundle_id: str) -> bool:
        return os.path.exists(self.path_for(bundle_id))

    def load(self, bundle_id: str) -> DocumentBundle:
        import json

        with open(self.path_for(bundle_id), encoding="utf-8") as f:
            return DocumentBundle.from_dict(json.load(f))

    def ids(self) -> list[str]:
        return sorted(
            name[:-5] for name in os.listdir(self.data_dir) if name.endswith(".json")
        )


# ---------------------------------------------------------------------------
# HTTP API


def create_app(store: BundleStore, config: IngestConfig,
               backend_factory=None):
    """FastAPI app over a bundle store. backend_factory() supplies the
    extraction backend for POST /documents."""
    from .review import neighborhood, node_for_span

    app = FastAPI(title="prosegraph")
    cache: dict[str, DocumentBundle] = {}

    def get_bundle(doc_id: str) -> DocumentBundle:
        if doc_id in cache:
            return cache[doc_id]
        if not store.exists(doc_id):
            raise HTTPException(status_code=404, detail=f"no document {doc_id}")
        bundle = store.load(doc_id)
        cache[doc_id] = bundle
        return bundle

    @app.post("/documents")
    async def post_document(request: Request):
        body = (await request.body()).decode("utf-8")
        if not body.strip():
            raise HTTPException(status_code=400, detail="empty document text")
        if backend_factory is None:
            raise HTTPException(status_code=503, detail="no extraction backend configured")
        try:
            bundle = ingest(body, config, backend_factory())
        except (IngestError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        store.save(bundle)
        cache[bundle.id] = bundle
        return {"id": bundle.id}

    @app.get("/documents/{doc_id}")
    def get_document(doc_id: str):
        return get_bundle(doc_id).document.to_dict()

    @app.get("/documents/{doc_id}/timeline")
    def get_timeline(doc_id: str):
        return get_bundle(doc_id).timeline.to_dict()

    @app.get("/documents/{doc_id}/entities")
    def get_entities(doc_id: str):
        return [r.to_dict() for r in get_bundle(doc_id).entities]

    @app.get("/documents/{doc_id}/neighborhood/{node_id}")
    def get_neighborhood(doc_id: str, node_id: str):
        bundle = get_bundle(doc_id)
        try:
            return neighborhood(bundle.document, node_id).to_dict()
        except KeyError:
            raise HTTPException(status_code=404, detail=f"no node {node_id}") from None

    @app.get("/documents/{doc_id}/span")
    def get_span(doc_id: str, sentence: str, offset: int):
        bundle = get_bundle(doc_id)
        return {"node": node_for_span(bundle.document, sentence, offset)}

    @app.get("/documents/{doc_id}/svg")
    def get_svg(doc_id: str, prefix: int):
        bundle = get_bundle(doc_id)
        try:
            svg = export_svg(bundle, prefix)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return Response(content=svg, media_type="image/svg+xml")

    return app
