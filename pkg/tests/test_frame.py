import json
import os

import networkx as nx
import pytest
from hypothesis import given, strategies as st

from kripkelab.catalog import (CHAIN2, CHAIN2_REFL, NAMED, ONE, V_BETH, V_WBETH, all_frames,
                               canonical_mask, catalog, class_members, cycle, rooted_members)
from kripkelab.frame import (Frame, FrameClass, FrameError, ParseError, check_class, cone,
                             frame_from_json, frame_to_json, frame_to_text, is_isomorphic,
                             parse_clauses, parse_frame)


@st.composite
def frames(draw, max_size=4):
    n = draw(st.integers(0, max_size))
    pts = list(range(n))
    edges = [(a, b) for a in pts for b in pts if draw(st.booleans())]
    return Frame(pts, edges)


def relabel(F, perm):
    return Frame([perm[p] for p in F.points], [(perm[a], perm[b]) for a, b in F.sorted_edges()])


def to_nx(F):
    G = nx.DiGraph()
    G.add_nodes_from(F.points)
    G.add_edges_from(F.sorted_edges())
    return G


def test_parse_text_and_json():
    F = parse_frame("points: 0 1 2\nedges: 0>1 0>2 1>2 2>1\n")
    assert F == V_WBETH
    assert parse_frame(json.dumps(frame_to_json(F))) == F


def test_parse_comments_and_labels():
    F = parse_frame("# a frame\npoints: 0 1\nedges: 0>1\nlabels: 0=root 1=\"leaf node\"\n")
    assert F.labels == {0: "root", 1: "leaf node"}
    assert parse_frame(frame_to_text(F)).labels == F.labels


@pytest.mark.parametrize("text, line, col", [
    ("points: 0 1 2\nedges: 0>1 1-2\n", 2, 12),
    ("points: 0 x\n", 1, 11),
    ("points: 0 1\nedges: 0>7\n", 0, 0),
    ("points 0 1\n", 1, 1),
])
def test_parse_errors_carry_position(text, line, col):
    with pytest.raises(ParseError) as e:
        parse_frame(text)
    if line:
        assert (e.value.line, e.value.col) == (line, col)


def test_bad_json_frame():
    with pytest.raises(ParseError):
        parse_frame('{"points": [0], "edges": [[0, 1]]')
    with pytest.raises((ParseError, FrameError)):
        frame_from_json({"points": [0]})


@given(frames())
def test_text_json_round_trip(F):
    assert parse_frame(frame_to_text(F)) == F
    assert frame_from_json(json.loads(json.dumps(frame_to_json(F)))) == F


@given(frames(), st.randoms(use_true_random=False))
def test_isomorphism_agrees_with_networkx(F, rnd):
    G = Frame(list(range(len(F))), [(rnd.randrange(len(F)), rnd.randrange(len(F)))
                                    for _ in range(len(F.sorted_edges()))]) if len(F) else F
    ours = is_isomorphic(F, G) is not None
    theirs = nx.is_isomorphic(to_nx(F), to_nx(G))
    assert ours == theirs


@given(frames(), st.randoms(use_true_random=False))
def test_relabelled_frames_are_isomorphic(F, rnd):
    perm = list(range(len(F)))
    rnd.shuffle(perm)
    G = relabel(F, perm)
    m = is_isomorphic(F, G)
    assert m is not None
    assert all(G.rel(m[a], m[b]) == F.rel(a, b) for a in F.points for b in F.points)
    assert canonical_mask(F) == canonical_mask(G)


# counts of relations up to isomorphism; the transitive count on 4 points was
# obtained by brute force over all 2^16 relations with networkx isomorphism
@pytest.mark.parametrize("cls, counts", [
    (FrameClass.all(), [2, 10, 104]),
    (FrameClass.table("K"), [2, 10, 104]),
    (FrameClass.table("K4"), [2, 8, 39, 242]),
    (FrameClass.table("S4"), [1, 3, 9, 33]),
    (FrameClass.table("Grz"), [1, 2, 5, 16]),
])
def test_catalog_counts(cls, counts):
    assert [len(class_members(cls, n)) for n in range(1, len(counts) + 1)] == counts


def test_catalog_counts_against_networkx():
    for n in (1, 2, 3):
        graphs = []
        for F in all_frames(n):
            assert not any(nx.is_isomorphic(to_nx(F), G) for G in graphs)
            graphs.append(to_nx(F))


def test_table_classes_on_named_frames():
    assert check_class(V_WBETH, FrameClass.table("K"))
    v = check_class(V_WBETH, FrameClass.table("K4"))
    assert not v and v.condition == "transitive"
    assert check_class(CHAIN2, FrameClass.table("GL.Lin"))
    assert not check_class(CHAIN2, FrameClass.table("S4"))
    assert check_class(CHAIN2_REFL, FrameClass.table("Grz.Lin"))
    assert not check_class(cycle(2), FrameClass.table("GL"))


def test_functional_class():
    D = FrameClass.table("D")
    assert D == FrameClass.functional()
    assert check_class(cycle(3), D)
    assert not check_class(CHAIN2, D)
    assert not check_class(V_WBETH, D)


def test_subreduction_class_membership():
    cls = FrameClass.subreductions_of(V_WBETH)
    assert check_class(V_WBETH, cls)
    assert check_class(ONE, cls)
    assert not check_class(CHAIN2, cls)
    # a disjoint union of subreductions still has every cone a subreduction
    assert check_class(Frame([0, 1], [(0, 0), (1, 1)]), cls)


def test_horn_class_matches_table():
    trans = FrameClass.horn(parse_clauses("R(x,y), R(y,z) -> R(x,z)\n"))
    k4 = FrameClass.table("K4")
    for F in catalog(FrameClass.all(), 3):
        assert bool(check_class(F, trans)) == bool(check_class(F, k4))


def test_horn_parse_error():
    with pytest.raises(ParseError):
        parse_clauses("R(x,y), S(y) -> R(x,x)\n")


def test_cone_and_rooted_members():
    assert cone(V_WBETH, 1) == frozenset({1, 2})
    for F in rooted_members(FrameClass.table("K4"), 3):
        assert any(cone(F, p) == frozenset(F.points) for p in F.points)


def test_named_frames_are_in_sync_with_fixture_files(fixtures_dir):
    for name in ("V_wbeth", "V_beth", "one", "chain2", "chain2r"):
        with open(os.path.join(fixtures_dir, f"{name}.frm")) as fh:
            assert parse_frame(fh.read()) == NAMED[name]


def test_empty_frame_round_trip():
    E = Frame()
    assert parse_frame(frame_to_text(E)) == E
    assert check_class(E, FrameClass.table("GL"))


def test_catalog_includes_empty_on_request():
    assert len(catalog(FrameClass.table("K4"), 2)) == 1 + 2 + 8
    assert len(catalog(FrameClass.table("K4"), 2, include_empty=False)) == 10


def test_v_beth_is_not_transitive_but_rooted():
    assert not check_class(V_BETH, FrameClass.table("K4"))
    assert cone(V_BETH, 1) == frozenset(V_BETH.points)
