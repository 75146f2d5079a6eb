import random

import pytest

from docgen import build_document
from prosegraph.model import (
    ATOMIC,
    Document,
    Edge,
    Membership,
    Node,
    Sentence,
    TextSpan,
    UnknownIdError,
)
from prosegraph.review import neighborhood, node_for_span, rank_entities


def doc_from(nodes, edges=(), memberships=(), sentences=None, text=""):
    return Document("d", text, tuple(sentences or ()), tuple(nodes), tuple(edges),
                    tuple(memberships))


def atoms_with_text(*labels):
    text = " ".join(labels) + "."
    sentences = (Sentence("s0", 0, 0, len(text)),)
    nodes, cursor = [], 0
    for label in labels:
        nodes.append(Node(f"n-{label}", label, ATOMIC,
                          (TextSpan("s0", cursor, cursor + len(label)),), 0))
        cursor += len(label) + 1
    return nodes, sentences, text


def brute_force_scores(doc):
    """Independent oracle: explicit ancestor enumeration plus degree scan."""
    def degree(nid):
        return sum(1 for e in doc.edges if nid in (e.source, e.target))

    def ancestors(nid):
        out, frontier = set(), {nid}
        while frontier:
            parents = {m.parent for m in doc.memberships if m.child in frontier}
            frontier = parents - out
            out |= parents
        return out

    return {
        n.id: degree(n.id) + sum(degree(p) for p in ancestors(n.id))
        for n in doc.nodes if n.kind == ATOMIC
    }


class TestRankEntities:
    def test_isolated_atomic_scores_zero(self):
        nodes, sentences, text = atoms_with_text("solo")
        ranks = rank_entities(doc_from(nodes, sentences=sentences, text=text))
        assert ranks[0].score == 0

    def test_degree_propagates_from_composite(self):
        nodes, sentences, text = atoms_with_text("a", "b", "x")
        comp = Node("C", "ab", "composite", (TextSpan("s0", 0, 3),), 0)
        doc = doc_from(
            nodes + [comp],
            edges=(Edge("e1", "n-a", "n-b", "to", "s0"),
                   Edge("e2", "C", "n-x", "to", "s0"),
                   Edge("e3", "n-x", "C", "back", "s0")),
            memberships=(Membership("C", "n-a"), Membership("C", "n-b")),
            sentences=sentences, text=text,
        )
        scores = {r.node_id: r.score for r in rank_entities(doc)}
        # own degree 1 plus the composite's degree 2
        assert scores["n-a"] == 3
        assert scores == brute_force_scores(doc)

    def test_overlapping_parents_count_once_each(self):
        nodes, sentences, text = atoms_with_text("a", "b", "c", "p", "q")
        c1 = Node("C1", "ab", "composite", (), 0)
        c2 = Node("C2", "ac", "composite", (), 0)
        doc = doc_from(
            nodes + [c1, c2],
            edges=(Edge("e1", "C1", "n-p", "to", "s0"),
                   Edge("e2", "C2", "n-p", "to", "s0"),
                   Edge("e3", "n-q", "C2", "to", "s0")),
            memberships=(Membership("C1", "n-a"), Membership("C1", "n-b"),
                         Membership("C2", "n-a"), Membership("C2", "n-c")),
            sentences=sentences, text=text,
        )
        scores = {r.node_id: r.score for r in rank_entities(doc)}
        # shared atom: own 0 + C1 degree 1 + C2 degree 2
        assert scores["n-a"] == 3
        assert scores == brute_force_scores(doc)

    def test_matches_oracle_on_random_documents(self):
        for seed in range(50):
            doc = build_document(seed, max_nodes=12, max_sentences=3)
            got = {r.node_id: r.score for r in rank_entities(doc)}
            assert got == brute_force_scores(doc), f"seed {seed}"

    def test_tie_break_order(self):
        nodes, sentences, text = atoms_with_text("b", "a")
        doc = doc_from(nodes, sentences=sentences, text=text)
        assert [r.node_id for r in rank_entities(doc)] == ["n-a", "n-b"]


class TestNeighborhood:
    def test_isolated_node(self):
        nodes, sentences, text = atoms_with_text("solo")
        hood = neighborhood(doc_from(nodes, sentences=sentences, text=text), "n-solo")
        assert hood.nodes == ("n-solo",)
        assert hood.edges == ()
        assert hood.spans["n-solo"]

    def test_star_center(self):
        nodes, sentences, text = atoms_with_text("hub", "a", "b", "c")
        doc = doc_from(
            nodes,
            edges=(Edge("e1", "n-hub", "n-a", "to", "s0"),
                   Edge("e2", "n-b", "n-hub", "to", "s0"),
                   Edge("e3", "n-hub", "n-c", "to", "s0")),
            sentences=sentences, text=text,
        )
        hood = neighborhood(doc, "n-hub")
        assert len(hood.nodes) == 4
        assert len(hood.edges) == 3

    def test_composite_neighborhood_excludes_inert_members(self):
        nodes, sentences, text = atoms_with_text("a", "b", "x")
        comp = Node("C", "ab", "composite", (), 0)
        doc = doc_from(
            nodes + [comp],
            edges=(Edge("e1", "C", "n-x", "to", "s0"),),
            memberships=(Membership("C", "n-a"), Membership("C", "n-b")),
            sentences=sentences, text=text,
        )
        hood = neighborhood(doc, "C")
        assert set(hood.nodes) == {"C", "n-x"}

    def test_symmetry_for_atomic_pairs(self):
        for seed in range(10):
            doc = build_document(seed, max_nodes=12, max_sentences=3)
            atom_ids = [n.id for n in doc.nodes if n.kind == ATOMIC]
            for a in atom_ids:
                for b in neighborhood(doc, a).nodes:
                    if b != a and doc.node(b).kind == ATOMIC:
                        assert a in neighborhood(doc, b).nodes

    def test_unknown_id(self):
        nodes, sentences, text = atoms_with_text("solo")
        with pytest.raises(UnknownIdError):
            neighborhood(doc_from(nodes, sentences=sentences, text=text), "ghost")


class TestNodeForSpan:
    def nested_span_doc(self):
        text = "the rise of carbon dioxide."
        sentences = (Sentence("s0", 0, 0, len(text)),)
        outer = Node("outer", "the rise of carbon dioxide", "composite",
                     (TextSpan("s0", 0, 27),), 0)
        inner = Node("inner", "carbon dioxide", ATOMIC, (TextSpan("s0", 12, 26),), 0)
        rise = Node("rise", "rise", ATOMIC, (TextSpan("s0", 4, 8),), 0)
        return doc_from([outer, inner, rise],
                        memberships=(Membership("outer", "inner"),
                                     Membership("outer", "rise")),
                        sentences=sentences, text=text)

    def test_innermost_span_wins(self):
        doc = self.nested_span_doc()
        assert node_for_span(doc, "s0", 15) == "inner"

    def test_unannotated_offset_returns_none(self):
        doc = self.nested_span_doc()
        assert node_for_span(doc, "s0", 9) == "outer"  # only outer covers "of"
        text_only = doc_from([doc.node("inner")],
                             sentences=doc.sentences, text=doc.text)
        assert node_for_span(text_only, "s0", 0) is None

    def test_span_start_inclusive_end_exclusive(self):
        doc = self.nested_span_doc()
        assert node_for_span(doc, "s0", 12) == "inner"
        assert node_for_span(doc, "s0", 26) == "outer"

    def test_round_trip_through_spans(self):
        for seed in range(10):
            doc = build_document(seed, max_nodes=12, max_sentences=3)
            for node in doc.nodes:
                for sp in node.spans:
                    covered = [
                        (o.end - o.start, other.id)
                        for other in doc.nodes for o in other.spans
                        if o.sentence_id == sp.sentence_id
                        and o.start <= sp.start < o.end
                    ]
                    winner = min(covered)[1]
                    assert node_for_span(doc, sp.sentence_id, sp.start) == winner
