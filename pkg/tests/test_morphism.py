import json
import os

import pytest
from hypothesis import given, strategies as st

from conftest import brute_pmorphisms
from kripkelab.catalog import (ONE, V1, V2, V_BETH, V_WBETH, all_frames, catalog, cycle)
from kripkelab.frame import Frame, FrameClass, ParseError, frame_to_json, is_isomorphic
from kripkelab.morphism import (CERTIFIED, REFUTED, PMorphism, classify, compose,
                                enumerate_pmorphisms, enumerate_subreductions, identity, kernel,
                                mono_refutation, morphism_to_json, morphism_to_text,
                                morphisms_among, parse_morphism, quotients, violation)

SMALL = [F for n in (1, 2) for F in all_frames(n)] + [V_WBETH, V_BETH, cycle(3)]


def test_identity_and_composition():
    f = PMorphism(V_WBETH, V2, [0, 1, 1])
    assert violation(f) is None
    assert compose(f, identity(V_WBETH)).images == f.images
    g = PMorphism(V2, ONE, [0, 0])
    assert compose(g, f).images == (0, 0, 0)


def test_violations_name_the_failing_condition():
    bad = PMorphism(cycle(3), Frame([0, 1], [(0, 1)]), [0, 1, 1])
    kind, _ = violation(bad)
    assert kind in ("forth", "back", "stability")


@pytest.mark.parametrize("W", SMALL)
@pytest.mark.parametrize("V", SMALL)
def test_enumeration_matches_brute_force(W, V):
    ours = sorted(f.images for f in enumerate_pmorphisms(W, V))
    assert ours == sorted(brute_pmorphisms(W, V))


def test_morphisms_among_matches_brute_force():
    frames = list(catalog(FrameClass.table("K"), 2, include_empty=False)) + [V_WBETH]
    ours = sorted((i, j, tuple(im)) for i, j, im in morphisms_among(frames))
    theirs = sorted((i, j, im) for i, W in enumerate(frames) for j, V in enumerate(frames)
                    for im in brute_pmorphisms(W, V))
    assert ours == theirs


def test_wbeth_subreductions():
    subs = enumerate_subreductions(V_WBETH)
    assert len(subs) == 4
    for want in (V_WBETH, V1, V2, ONE):
        assert sum(is_isomorphic(S, want) is not None for S in subs) == 1


def test_beth_has_only_the_identity_endomorphism():
    assert [f.images for f in enumerate_pmorphisms(V_BETH, V_BETH)] == [identity(V_BETH).images]


@pytest.mark.parametrize("W", SMALL)
def test_quotients_are_the_surjections_up_to_kernel(W):
    qs = quotients(W)
    kernels = {kernel(q) for _, q in qs}
    assert len(kernels) == len(qs)
    brute = set()
    for V in all_frames(1) + all_frames(2) + all_frames(3):
        if len(V) > len(W):
            continue
        for im in brute_pmorphisms(W, V):
            if len(set(im)) == len(V):
                brute.add(kernel(PMorphism(W, V, list(im))))
    assert kernels == brute


def test_classify_wbeth_to_one():
    cls = FrameClass.subreductions_of(V_WBETH)
    f = PMorphism(V_WBETH, ONE, [0, 0, 0])
    c = classify(f, cls, 6)
    assert c.surjective and not c.injective
    assert c.mono.kind == REFUTED
    assert c.regepi.kind == REFUTED and c.regepi.exhaustive
    assert is_isomorphic(c.regepi.witness.target, V2) is not None


def test_classify_beth_to_one_is_a_non_injective_mono():
    cls = FrameClass.subreductions_of(V_BETH)
    c = classify(PMorphism(V_BETH, ONE, [0, 0]), cls, 6)
    assert c.mono.kind == CERTIFIED and c.mono.exhaustive
    assert not c.injective


def test_mono_refutation_witness_checks():
    f = PMorphism(V_WBETH, ONE, [0, 0, 0])
    w = mono_refutation(f, FrameClass.subreductions_of(V_WBETH), 4)
    assert w is not None
    assert violation(w.g) is None and violation(w.h) is None
    assert w.g.images != w.h.images
    assert compose(f, w.g).images == compose(f, w.h).images


def test_parse_morphism_text_with_refs(fixtures_dir):
    path = os.path.join(fixtures_dir, "wbeth_to_one.mor")
    with open(path) as fh:
        mf = parse_morphism(fh.read(), fixtures_dir)
    assert mf.morphism.source == V_WBETH and mf.morphism.target == ONE
    assert morphism_to_text(mf.morphism, mf.source_ref, mf.target_ref) == open(path).read()


def test_parse_morphism_json_inline_and_named():
    f = PMorphism(V_WBETH, V2, [0, 1, 1])
    d = morphism_to_json(f, frame_to_json(V_WBETH), "@V2")
    g = parse_morphism(json.dumps(d)).morphism
    assert g.source == V_WBETH and g.target == V2 and g.images == f.images


@pytest.mark.parametrize("text", [
    "from: @one\nto: @one\nmap: 0-0\n",
    "from: @one\nmap: 0>0\n",
    "from: @nope\nto: @one\nmap: 0>0\n",
    "from: @one\nto: @one\nmap: 0>0 0>0\n",
    "from: missing.frm\nto: @one\nmap: 0>0\n",
])
def test_parse_morphism_errors(text):
    with pytest.raises(ParseError):
        parse_morphism(text, "/nonexistent")


@given(st.sampled_from(SMALL), st.sampled_from(SMALL), st.sampled_from(SMALL))
def test_composites_of_pmorphisms_are_pmorphisms(A, B, C):
    for f in enumerate_pmorphisms(A, B)[:4]:
        for g in enumerate_pmorphisms(B, C)[:4]:
            assert violation(compose(g, f)) is None
