import json
import os

import pytest
from hypothesis import given, settings, strategies as st

from kripkelab.catalog import CHAIN2_REFL, ONE, V2, V_BETH, V_WBETH, catalog, cycle
from kripkelab.formula import TOP, BigAnd, Box, Var, iff, imp
from kripkelab.frame import Frame, FrameClass, FrameError, is_isomorphic, parse_frame
from kripkelab.morphism import (PMorphism, compose, enumerate_pmorphisms, identity,
                                parse_morphism, violation)
from kripkelab.props import (FAILS, HOLDS, INCONCLUSIVE_V, Cospan, amalgamate, beth_probe,
                             cep_violations, functional_limits_check, injsurj_violations,
                             reproduce_paper, sample_cospans, sample_functional_pairs,
                             separates_variables_check, superamalgamate, sv_formula,
                             weak_pullback_check, _entails)

S4 = FrameClass.table("S4")
CLUSTER2 = Frame([0, 1], [(0, 0), (0, 1), (1, 0), (1, 1)])


def reload_witness(text):
    f = parse_morphism(text).morphism
    assert violation(f) is None
    return f


def test_s4_chains_amalgamate_via_set_pullback():
    f = PMorphism(CHAIN2_REFL, ONE, [0, 0])
    r = amalgamate(Cospan(f, f, S4), 4)
    assert r.verdict == HOLDS and "set pullback" in r.details
    U, g0, g1 = r.witness
    assert len(U) == 4 and g0.surjective and g1.surjective
    assert superamalgamate(Cospan(f, f, S4), 4).verdict == HOLDS
    for name in ("g0.mor", "g1.mor"):
        reload_witness(r.files[name])


def test_identity_leg_amalgamates_with_the_other_source():
    f1 = PMorphism(V_WBETH, V2, [0, 1, 1])
    c = Cospan(identity(V2), f1, FrameClass.table("K"))
    r = amalgamate(c, 4)
    assert r.holds
    U, g0, g1 = r.witness
    assert compose(c.f0, g0).images == compose(c.f1, g1).images
    assert superamalgamate(c, 4).holds


def test_superamalgamation_fails_in_a_restrictive_class():
    cls = FrameClass.listed([ONE, CLUSTER2])
    f = PMorphism(CLUSTER2, ONE, [0, 0])
    r = superamalgamate(Cospan(f, f, cls), 4)
    assert r.verdict == FAILS
    # the reported pair is missed by the reported amalgam
    g0, g1 = reload_witness(r.files["g0.mor"]), reload_witness(r.files["g1.mor"])
    assert r.witness not in set(zip(g0.images, g1.images))
    # plain amalgamation still holds with the 2-point cluster as apex
    assert amalgamate(Cospan(f, f, cls), 4).holds


def test_superamalgamation_holds_in_a_horn_class():
    cls = FrameClass.horn([], "K")
    f = PMorphism(CLUSTER2, ONE, [0, 0])
    assert superamalgamate(Cospan(f, f, cls), 3).holds


def test_cospan_validation():
    f = PMorphism(V_WBETH, V2, [0, 1, 1])
    g = PMorphism(V2, V2, [0, 1])
    with pytest.raises(FrameError):
        Cospan(f, PMorphism(V2, ONE, [0, 0]), FrameClass.table("K")).check()
    with pytest.raises(FrameError):
        amalgamate(Cospan(f, g, FrameClass.table("K4")), 3)


def test_weak_pullback_check():
    f = PMorphism(CHAIN2_REFL, ONE, [0, 0])
    E = Frame()
    empty = PMorphism(E, CHAIN2_REFL, [])
    v = weak_pullback_check(empty, empty, f, f)
    assert not v and v.witness == (0, 0)


@settings(max_examples=30)
@given(st.integers(0, 10_000))
def test_horn_fast_path_invariant(seed):
    for name in ("K", "K4"):
        for c in sample_cospans(FrameClass.table(name), 2, seed, 3):
            r = amalgamate(c, 3)
            assert r.holds and "set pullback" in r.details
            U, g0, g1 = r.witness
            assert compose(c.f0, g0).images == compose(c.f1, g1).images
            assert g0.surjective and g1.surjective
            assert weak_pullback_check(g0, g1, c.f0, c.f1)
            assert superamalgamate(c, 3).holds


def test_beth_examples():
    wcls = FrameClass.subreductions_of(V_WBETH)
    bcls = FrameClass.subreductions_of(V_BETH)
    r = beth_probe(bcls, bcls.subreductions(), 6, "weak")
    assert r.verdict == FAILS and not r.witness.injective
    r = beth_probe(wcls, wcls.subreductions(), 6, "strong")
    assert r.verdict == FAILS
    f, q = r.witness
    assert is_isomorphic(q.target, V2) is not None
    assert beth_probe(wcls, wcls.subreductions(), 6, "weak").holds
    with pytest.raises(ValueError):
        beth_probe(wcls, [], 6, "medium")


def test_beth_weak_refutations_persist_with_the_bound():
    k4 = FrameClass.table("K4")
    frames = catalog(k4, 3, include_empty=False)
    verdicts = [beth_probe(k4, frames, b, "weak").verdict for b in (1, 2, 3, 4)]
    assert verdicts[-1] == HOLDS
    seen_hold = False
    for v in verdicts:
        if v == HOLDS:
            seen_hold = True
        elif seen_hold:
            pytest.fail("a refutation was lost at a larger bound")


def test_beth_rejects_frames_outside_the_class():
    with pytest.raises(FrameError):
        beth_probe(FrameClass.table("K4"), [V_BETH], 3, "weak")


def test_sv_diagonal_relation():
    x0, x1 = Var("x_0"), Var("x_1")
    r = separates_variables_check(iff(x0, x1), TOP, ["x"], catalog(FrameClass.table("K"), 2,
                                                                    include_empty=False))
    assert r.holds and r.witness == {"x": Var("x")}


def test_sv_collapses_on_the_one_point_cluster():
    r = separates_variables_check(TOP, TOP, ["x"], [ONE])
    assert r.holds and r.witness == {"x": TOP}


def test_sv_symmetry_failure():
    x0, x1 = Var("x_0"), Var("x_1")
    r = separates_variables_check(imp(x0, x1), TOP, ["x"], [ONE])
    assert r.verdict == FAILS
    label, F, v = r.witness
    assert label.startswith("(2)")
    assert v == {"x_0": frozenset(), "x_1": frozenset({0})}


def test_sv_shallow_candidate_search_is_inconclusive():
    rho = iff(Box(Box(Box(Var("x_0")))), Box(Box(Box(Var("x_1")))))
    frames = catalog(FrameClass.table("K"), 2, include_empty=False)
    assert separates_variables_check(rho, TOP, ["x"], frames, 0).verdict == INCONCLUSIVE_V


def test_sv_holds_verdicts_re_verify():
    x0, x1 = Var("x_0"), Var("x_1")
    frames = catalog(FrameClass.table("K"), 2, include_empty=False)
    rho = BigAnd([iff(x0, x1)])
    r = separates_variables_check(rho, TOP, ["x"], frames)
    sv = sv_formula(TOP, ["x"], r.witness)
    assert _entails(rho, sv, frames) is None and _entails(sv, rho, frames) is None


def test_functional_limits():
    r = functional_limits_check(sample_functional_pairs(5, 0), 4)
    assert r.holds
    assert functional_limits_check([(cycle(3), cycle(3))], 3).holds
    assert functional_limits_check([(Frame(), cycle(2))], 3).holds
    with pytest.raises(FrameError):
        functional_limits_check([(V_WBETH, ONE)], 3)


def test_injsurj_and_cep_helpers():
    frames = catalog(FrameClass.table("S4"), 3, include_empty=False)
    checked, bad, _ = injsurj_violations(frames)
    assert checked > 0 and bad == 0
    tested, fails = cep_violations(frames, 100, 3)
    assert tested == 100 and fails == []


def test_reproduction_passes_and_writes_witnesses(tmp_path):
    rep = reproduce_paper(6, str(tmp_path))
    assert rep.exit_code == 0, rep.text()
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["exit"] == 0
    assert all(f["status"] == "pass" for f in summary["fixtures"])
    q = (tmp_path / "wbeth-regular-epi" / "quotient.mor").read_text()
    assert is_isomorphic(reload_witness(q).target, V2) is not None
    subs = sorted(os.listdir(tmp_path / "wbeth-subreductions"))
    assert len(subs) == 4
    for name in subs:
        parse_frame((tmp_path / "wbeth-subreductions" / name).read_text())


def test_reproduction_flags_a_mutated_frame():
    mutated = Frame([0, 1, 2], [(0, 1), (0, 2), (1, 2)])
    rep = reproduce_paper(6, None, mutated, catalog_size=3)
    assert rep.exit_code == 1
    sub = next(f for f in rep.fixtures if f.name == "wbeth-subreductions")
    assert sub.status == "deviation"


def test_reproduction_at_bound_one_is_inconclusive_not_deviant():
    rep = reproduce_paper(1, catalog_size=3)
    assert rep.exit_code == 2
    assert any(f.status == "inconclusive" for f in rep.fixtures)
    assert not any(f.status == "deviation" for f in rep.fixtures)
    assert INCONCLUSIVE_V in {f.report.verdict for f in rep.fixtures}


def test_reports_are_deterministic():
    a = reproduce_paper(6, catalog_size=3).summary()
    b = reproduce_paper(6, catalog_size=3).summary()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_endomorphisms_fixture_matches_direct_enumeration():
    assert len(enumerate_pmorphisms(V_BETH, V_BETH)) == 1
