import math

import pytest

from docgen import build_document
from prosegraph.layout import (
    LayoutConfig,
    LayoutState,
    compute_forces,
    discretize,
    find_longest_cycle,
    initial_layout,
    run_layout,
    snap,
    step,
)
from prosegraph.model import (
    ATOMIC,
    COMPOSITE,
    Document,
    Edge,
    LevelGraph,
    Membership,
    Node,
    Sentence,
    TextSpan,
)

CFG = LayoutConfig()


def level(nodes, edges):
    return LevelGraph(None, tuple(nodes), tuple(edges))


class TestFindLongestCycle:
    def test_chain_has_no_cycle(self):
        assert find_longest_cycle(level("abc", [("a", "b", "e1"), ("b", "c", "e2")])) == []

    def test_triangle(self):
        sub = level("abc", [("a", "b", "e1"), ("b", "c", "e2"), ("c", "a", "e3")])
        assert find_longest_cycle(sub) == ["a", "b", "c"]

    def test_square_with_chord(self):
        sub = level("abcd", [("a", "b", "e1"), ("b", "c", "e2"), ("c", "d", "e3"),
                             ("d", "a", "e4"), ("a", "c", "e5")])
        assert find_longest_cycle(sub) == ["a", "b", "c", "d"]

    def test_tie_breaks_lexicographically(self):
        # two disjoint 2-cycles; the smaller id sequence wins
        sub = level("abcd", [("c", "d", "e1"), ("d", "c", "e2"),
                             ("a", "b", "e3"), ("b", "a", "e4")])
        assert find_longest_cycle(sub) == ["a", "b"]


class TestInitialLayout:
    def test_single_node_at_origin(self):
        assert initial_layout(level("a", []), CFG) == {"a": (0.0, 0.0)}

    def test_chain_columns_left_to_right(self):
        pos = initial_layout(level("abc", [("a", "b", "e1"), ("b", "c", "e2")]), CFG)
        xs = [pos["a"][0], pos["b"][0], pos["c"][0]]
        assert xs == sorted(xs)
        assert xs[1] - xs[0] == pytest.approx(CFG.ideal_link_length)
        assert xs[2] - xs[1] == pytest.approx(CFG.ideal_link_length)

    def test_triangle_is_equilateral(self):
        sub = level("abc", [("a", "b", "e1"), ("b", "c", "e2"), ("c", "a", "e3")])
        pos = initial_layout(sub, CFG)
        dists = [math.dist(pos[u], pos[v]) for u, v in (("a", "b"), ("b", "c"), ("a", "c"))]
        assert max(dists) - min(dists) < 1e-6

    def test_within_layer_stacked_by_id(self):
        pos = initial_layout(level("abc", [("a", "b", "e1"), ("a", "c", "e2")]), CFG)
        assert pos["b"][0] == pos["c"][0]
        assert pos["b"][1] < pos["c"][1]

    def test_cycle_plus_tail(self):
        sub = level("abcd", [("a", "b", "e1"), ("b", "c", "e2"), ("c", "a", "e3"),
                             ("c", "d", "e4")])
        pos = initial_layout(sub, CFG)
        # the tail node sits outside the cycle's circumradius
        assert math.dist(pos["d"], (0.0, 0.0)) > CFG.ideal_link_length + 1


def square_metrics(label):
    return (28.0, 28.0)


def two_node_doc():
    text = "a b."
    return Document(
        "d", text,
        sentences=(Sentence("s0", 0, 0, len(text)),),
        nodes=(Node("a", "a", ATOMIC, (TextSpan("s0", 0, 1),), 0),
               Node("b", "b", ATOMIC, (TextSpan("s0", 2, 3),), 0)),
        edges=(Edge("e1", "a", "b", "to", "s0"),),
    )


class TestComputeForces:
    def test_equilibrium_pair(self):
        doc = two_node_doc()
        state = LayoutState.from_document(
            doc, CFG, {"a": (0.0, 0.0), "b": (CFG.ideal_link_length, 0.0)},
            centerlines={0: 0.0},
        )
        forces = compute_forces(state, doc, CFG)
        assert forces["a"] == (0.0, 0.0)
        assert forces["b"] == (0.0, 0.0)

    def test_zero_sentence_component_on_centerline(self):
        doc = two_node_doc()
        state = LayoutState.from_document(
            doc, CFG, {"a": (0.0, 0.0), "b": (500.0, 0.0)}, centerlines={0: 0.0},
        )
        forces = compute_forces(state, doc, CFG)
        assert forces["a"][1] == 0.0

    def test_exclusion_at_exact_center_falls_back_to_plus_x(self):
        text = "c m n x."
        doc = Document(
            "d", text,
            sentences=(Sentence("s0", 0, 0, len(text)),),
            nodes=(
                Node("comp", "c", COMPOSITE, (TextSpan("s0", 0, 1),), 0),
                Node("m1", "m", ATOMIC, (TextSpan("s0", 2, 3),), 0),
                Node("m2", "n", ATOMIC, (TextSpan("s0", 4, 5),), 0),
                Node("out", "x", ATOMIC, (TextSpan("s0", 6, 7),), 0),
            ),
            memberships=(Membership("comp", "m1"), Membership("comp", "m2")),
        )
        # square bounds centered on the origin, trespasser exactly there
        state = LayoutState.from_document(
            doc, CFG, {"m1": (-50.0, -50.0), "m2": (50.0, 50.0), "out": (0.0, 0.0)},
            centerlines={0: 0.0}, metrics=square_metrics,
        )
        x0, y0, x1, y1 = state.bounds["comp"]
        assert (x1 - x0) == (y1 - y0)  # singular: every exit ties
        forces = compute_forces(state, doc, CFG)
        assert forces["out"][0] == pytest.approx(CFG.exclusion_strength)
        assert forces["out"][1] == pytest.approx(0.0)

    def test_pinned_nodes_get_zero_force(self):
        doc = two_node_doc()
        state = LayoutState.from_document(
            doc, CFG, {"a": (0.0, 0.0), "b": (500.0, 80.0)},
            pinned=frozenset({"b"}), centerlines={0: 0.0},
        )
        forces = compute_forces(state, doc, CFG)
        assert forces["b"] == (0.0, 0.0)
        assert forces["a"] != (0.0, 0.0)


def comp_doc():
    text = "p q."
    return Document(
        "d", text,
        sentences=(Sentence("s0", 0, 0, len(text)),),
        nodes=(
            Node("comp", "pq", COMPOSITE, (TextSpan("s0", 0, 3),), 0),
            Node("p", "p", ATOMIC, (TextSpan("s0", 0, 1),), 0),
            Node("q", "q", ATOMIC, (TextSpan("s0", 2, 3),), 0),
        ),
        memberships=(Membership("comp", "p"), Membership("comp", "q")),
    )


class TestStep:
    def test_zero_forces_fixed_point(self):
        doc = two_node_doc()
        state = LayoutState.from_document(doc, CFG, {"a": (8.0, 16.0), "b": (120.0, 0.0)})
        out = step(state, {"a": (0.0, 0.0), "b": (0.0, 0.0)}, CFG)
        assert out.positions == state.positions

    def test_rigid_co_movement(self):
        doc = comp_doc()
        state = LayoutState.from_document(doc, CFG, {"p": (0.0, 0.0), "q": (100.0, 0.0)})
        forces = {"p": (2.0, 0.0), "q": (2.0, 0.0), "comp": (2.0, 0.0)}
        out = step(state, forces, CFG)
        moved_p = (out.positions["p"][0] - 0.0, out.positions["p"][1])
        moved_q = (out.positions["q"][0] - 100.0, out.positions["q"][1])
        assert moved_p == pytest.approx(moved_q)  # identical translation
        offset = out.positions["q"][0] - out.positions["p"][0]
        assert offset == pytest.approx(100.0)  # relative offset preserved

    def test_member_with_zero_force_still_moves(self):
        doc = comp_doc()
        state = LayoutState.from_document(doc, CFG, {"p": (0.0, 0.0), "q": (100.0, 0.0)})
        forces = {"p": (0.0, 0.0), "q": (4.0, 0.0), "comp": (2.0, 0.0)}
        out = step(state, forces, CFG)
        assert out.positions["p"][0] == pytest.approx(CFG.damping * 2.0)

    def test_pinned_coordinates_untouched(self):
        doc = two_node_doc()
        state = LayoutState.from_document(
            doc, CFG, {"a": (3.0, 7.0), "b": (120.0, 0.0)}, pinned=frozenset({"a"}),
        )
        out = step(state, {"a": (5.0, 5.0), "b": (0.0, 0.0)}, CFG)
        assert out.positions["a"] == (3.0, 7.0)


class TestDiscretize:
    def test_snaps_to_nearest_multiple(self):
        assert snap(10.0, 8.0) == 8.0
        doc = two_node_doc()
        state = LayoutState.from_document(doc, CFG, {"a": (10.0, 10.0), "b": (120.0, 0.0)})
        out = discretize(state, CFG)
        assert out.positions["a"] == (8.0, 8.0)

    def test_ties_round_toward_negative_infinity(self):
        assert snap(12.0, 8.0) == 8.0
        assert snap(-4.0, 8.0) == -8.0

    def test_idempotent_on_grid(self):
        doc = two_node_doc()
        state = LayoutState.from_document(doc, CFG, {"a": (16.0, -8.0), "b": (120.0, 0.0)})
        assert discretize(state, CFG).positions == state.positions

    def test_pinned_nodes_stay_off_grid(self):
        doc = two_node_doc()
        state = LayoutState.from_document(
            doc, CFG, {"a": (10.5, 3.3), "b": (120.0, 0.0)}, pinned=frozenset({"a"}),
        )
        assert discretize(state, CFG).positions["a"] == (10.5, 3.3)


class TestRunLayout:
    def test_empty_document(self):
        doc = Document("d", "")
        state = run_layout(doc, None, frozenset(), CFG)
        assert state.positions == {}
        assert state.converged and state.iterations == 0

    def test_chain_spacing_and_direction(self):
        text = "a b c."
        doc = Document(
            "d", text,
            sentences=(Sentence("s0", 0, 0, len(text)),),
            nodes=(Node("a", "a", ATOMIC, (TextSpan("s0", 0, 1),), 0),
                   Node("b", "b", ATOMIC, (TextSpan("s0", 2, 3),), 0),
                   Node("c", "c", ATOMIC, (TextSpan("s0", 4, 5),), 0)),
            edges=(Edge("e1", "a", "b", "to", "s0"), Edge("e2", "b", "c", "to", "s0")),
        )
        state = run_layout(doc, None, frozenset(), CFG)
        assert state.converged
        for s, t in (("a", "b"), ("b", "c")):
            d = math.dist(state.positions[s], state.positions[t])
            assert abs(d - CFG.ideal_link_length) <= 0.1 * CFG.ideal_link_length
        assert state.positions["a"][0] < state.positions["b"][0] < state.positions["c"][0]

    def test_pinned_shared_node_bit_identical(self):
        doc = build_document(3)
        first = run_layout(doc, None, frozenset(), CFG)
        picks = sorted(first.positions)[:2]
        second = run_layout(doc, first, frozenset(picks), CFG)
        for p in picks:
            assert second.positions[p] == first.positions[p]

    def test_determinism(self):
        doc = build_document(7)
        a = run_layout(doc, None, frozenset(), CFG)
        b = run_layout(doc, None, frozenset(), CFG)
        assert a.positions == b.positions
        assert a.converged == b.converged and a.iterations == b.iterations

    def test_grid_multiples(self):
        doc = build_document(5)
        state = run_layout(doc, None, frozenset(), CFG)
        for nid, (x, y) in state.positions.items():
            if nid not in state.pinned:
                assert x % CFG.grid_interval == 0 and y % CFG.grid_interval == 0

    def test_member_rectangles_inside_composite_bounds(self):
        doc = build_document(11)
        state = run_layout(doc, None, frozenset(), CFG)
        for comp_id, (x0, y0, x1, y1) in state.bounds.items():
            for m in doc.members_of(comp_id):
                rect = state.rect_of(m)
                if rect is None:
                    continue
                assert rect[0] >= x0 and rect[1] >= y0
                assert rect[2] <= x1 and rect[3] <= y1


class TestConfigValidation:
    def test_rejects_bad_damping(self):
        with pytest.raises(ValueError):
            LayoutConfig(damping=1.5)

    def test_rejects_negative_strength(self):
        with pytest.raises(ValueError):
            LayoutConfig(overlap_strength=-1)

    def test_round_trip(self):
        cfg = LayoutConfig(seed=7, grid_interval=4.0)
        assert LayoutConfig.from_dict(cfg.to_dict()) == cfg
