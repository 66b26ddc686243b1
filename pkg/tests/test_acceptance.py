"""Acceptance criteria, each run at its stated tolerance.

Every test prints one line ``PASS criterion N: ...`` or ``FAIL criterion N: ...``
with the elapsed time, then asserts.
"""

import itertools
import random
import time

import pytest

from kripkelab.algebra import (LFFamily, LFViolation, check_CA, check_ID, check_LF,
                               dual_dia_violations, lf_witness, powerset_algebra, round_trip_ok)
from kripkelab.algebra import BatchEvaluator
from kripkelab.calculus import (CalculusParams, ax, check_proof, countermodel_search,
                                deduction_transform, derive_eq, discharge, node, normal_form,
                                reassemble, weaken)
from kripkelab.cat import wide_coequalizer
from kripkelab.catalog import ONE, V2, V_BETH, V_WBETH, catalog, omega_successor
from kripkelab.formula import TOP, BOT, BigAnd, BigOr, Box, Neg, Var, depth
from kripkelab.frame import Frame, FrameClass, is_isomorphic
from kripkelab.morphism import (CERTIFIED, REFUTED, PMorphism, classify, enumerate_pmorphisms,
                                enumerate_subreductions, identity)
from kripkelab.props import (amalgamate, beth_probe, cep_violations, functional_limits_check,
                             injsurj_violations, sample_cospans, sample_functional_pairs,
                             superamalgamate)


@pytest.fixture
def verdict(capsys):
    t0 = time.perf_counter()

    def report(n, ok, detail, limit=None):
        dt = time.perf_counter() - t0
        in_time = limit is None or dt < limit
        line = (f"{'PASS' if ok and in_time else 'FAIL'} criterion {n}: {detail} "
                f"({dt:.2f}s" + (f", limit {limit}s)" if limit else ")"))
        with capsys.disabled():
            print("\n" + line)
        assert ok, line
        assert in_time, line

    return report


def k_catalog(name, n):
    return catalog(FrameClass.table(name), n, include_empty=False)


def test_criterion_01_wbeth_subreductions(verdict):
    subs = enumerate_subreductions(V_WBETH)
    expected = [V_WBETH, Frame([1, 2], [(1, 2), (2, 1)]), V2, ONE]
    matched = all(sum(is_isomorphic(S, E) is not None for S in subs) == 1 for E in expected)
    verdict(1, len(subs) == 4 and matched, f"{len(subs)} subreductions, each matched once", 1)


def test_criterion_02_wbeth_regular_epi_refuted(verdict):
    cls = FrameClass.subreductions_of(V_WBETH)
    f = PMorphism(V_WBETH, ONE, [0, 0, 0])
    c = classify(f, cls, 6)
    Q, q = wide_coequalizer(f, cls, 6)
    ok = c.epi and c.regepi.kind == REFUTED and is_isomorphic(Q, V2) is not None
    verdict(2, ok, f"epi={c.epi}, regular epi {c.regepi.kind}, quotient has {len(Q)} points", 10)


def test_criterion_03_wbeth_weak_beth(verdict):
    cls = FrameClass.subreductions_of(V_WBETH)
    r = beth_probe(cls, cls.subreductions(), 6, "weak")
    verdict(3, r.verdict == "holds", f"{r.verdict}: {r.details}", 30)


def test_criterion_04_beth_mono_not_injective(verdict):
    ends = enumerate_pmorphisms(V_BETH, V_BETH)
    f = PMorphism(V_BETH, ONE, [0, 0])
    c = classify(f, FrameClass.subreductions_of(V_BETH), 6)
    ok = (ends == [identity(V_BETH)] and c.mono.kind == CERTIFIED and c.mono.exhaustive
          and not c.injective)
    verdict(4, ok, f"{len(ends)} endomorphism, mono {c.mono.kind} "
                   f"(exhaustive={c.mono.exhaustive}), injective={c.injective}", 10)


def test_criterion_05_injective_surjective_cross_validation(verdict):
    total = viol = 0
    for name in ("K", "K4", "S4", "GL"):
        n, bad, _ = injsurj_violations(k_catalog(name, 4))
        total, viol = total + n, viol + bad
    verdict(5, viol == 0 and total > 0, f"{viol} violations over {total} p-morphisms", 60)


def test_criterion_06_k4_monos_are_injective(verdict):
    k4 = FrameClass.table("K4")
    r = beth_probe(k4, k_catalog("K4", 4), 5, "weak")
    verdict(6, r.verdict == "holds", f"{r.verdict}: {r.details}", 120)


def test_criterion_07_surjections_pull_back(verdict):
    tested, bad = cep_violations(k_catalog("K", 3), 500, 0)
    verdict(7, tested == 500 and not bad, f"{len(bad)} violations over {tested} samples")


def test_criterion_08_duality(verdict):
    frames = k_catalog("K", 4)
    trips = sum(not round_trip_ok(F) for F in frames)
    checked, bad = dual_dia_violations(frames)
    verdict(8, trips == 0 and not bad,
            f"{trips} round-trip failures over {len(frames)} frames, "
            f"{len(bad)} dia failures over {checked} dual maps")


def test_criterion_09_identity_suite(verdict):
    rng = random.Random(0)
    frames = k_catalog("K", 3)
    fails = 0
    for _ in range(1000):
        F = rng.choice(frames)
        M = powerset_algebra(F)

        def elem():
            return frozenset(p for p in F.points if rng.random() < 0.5)

        fam = [frozenset(elem() for _ in range(rng.randint(0, 3))) for _ in range(rng.randint(1, 3))]
        lf = LFFamily([frozenset(elem() for _ in range(rng.randint(0, 2)))
                       for _ in range(rng.randint(0, 3))],
                      frozenset(elem() for _ in range(rng.randint(0, 2))))
        ok = (check_ID(M, fam) and check_CA(M, frozenset(elem() for _ in range(rng.randint(0, 4))))
              and check_LF(M, lf))
        fails += not ok
    verdict(9, fails == 0, f"{fails} failures over 1000 instances")


def test_criterion_10_lf_counterexample(verdict):
    r = lf_witness(omega_successor(), 0, 10)
    ok = isinstance(r, LFViolation) and r.levels == [frozenset({n}) for n in range(11)]
    verdict(10, ok, f"{type(r).__name__} with levels {[sorted(L) for L in r.levels]}")


P, Q, R = Var("p"), Var("q"), Var("r")
ATOMS = [P, Q, R]
SUBSETS = [list(c) for k in range(4) for c in itertools.combinations(ATOMS, k)]
FAMILIES = [[a] for a in SUBSETS] + [[a, b] for a, b in itertools.combinations(SUBSETS, 2)]


def _theory_proofs():
    """Proofs that use the theory {p} through TL, for the deduction round trip."""
    tl = node("TL", [], [P], {"S": [P]}, ax(P))
    boxed = node("Nec", [], [Box(P)], {"S": []}, tl)
    twice = node("Nec", [], [Box(Box(P))], {"S": []}, boxed)
    yield tl
    yield boxed
    yield node("Cut", [], [Box(Box(P))], {"S": [Box(Box(P))]}, twice, ax(Box(Box(P))))
    yield node("Cut", [Q], [BigAnd([P, Q])], {"S": [P]},
               weaken(tl, [Q], [P]),
               node("Rand", [P, Q], [BigAnd([P, Q])], {"family": [[P, Q]]},
                    weaken(ax(P), [P, Q], [P]), weaken(ax(Q), [P, Q], [Q])))


def test_criterion_11_calculus_soundness(verdict):
    K = CalculusParams.for_logic("K")
    frames = k_catalog("K", 3)
    jobs = [(v, S, None) for v in ("i", "ii", "v") for S in SUBSETS if S or v != "v"]
    jobs += [(v, None, fam) for v in ("o", "iii", "iv") for fam in FAMILIES]
    accepted = rejected = counter = 0
    for variant, S, family in jobs:
        for pi in derive_eq(variant, S, family):
            if not check_proof(pi, K):
                rejected += 1
                continue
            accepted += 1
            counter += not countermodel_search(pi.conclusion, K, frames)
    T = CalculusParams.for_logic("K", theory=[P])
    trips = 0
    for pi in _theory_proofs():
        assert check_proof(pi, T)
        d = deduction_transform(pi, T)
        back = discharge(d, T)
        for proof, params in ((d.proof, T.without_theory()), (back, T)):
            trips += 1
            if not check_proof(proof, params):
                rejected += 1
                continue
            accepted += 1
            counter += not countermodel_search(proof.conclusion, params, frames)
    verdict(11, rejected == 0 and counter == 0,
            f"{accepted} accepted ({trips} from deduction round trips), {rejected} rejected, "
            f"{counter} with countermodels", 120)


def _random_formula(rng, d):
    if d == 0 or rng.random() < 0.2:
        return rng.choice([P, Q, TOP, BOT])
    k = rng.randrange(4)
    if k == 0:
        return Neg(_random_formula(rng, d - 1))
    if k == 1:
        return Box(_random_formula(rng, d - 1))
    parts = [_random_formula(rng, d - 1) for _ in range(rng.randint(1, 3))]
    return BigAnd(parts) if k == 2 else BigOr(parts)


def test_criterion_12_normal_form(verdict):
    rng = random.Random(0)
    frames = k_catalog("K", 3)
    evs = [BatchEvaluator(F, ["p", "q"]) for F in frames]
    mismatches = 0
    phis = []
    while len(phis) < 200:
        phi = _random_formula(rng, 4)
        if depth(phi) <= 4:
            phis.append(phi)
    for phi in phis:
        nf = reassemble(normal_form(phi))
        mismatches += sum(not (ev.mask(phi) == ev.mask(nf)).all() for ev in evs)
    verdict(12, mismatches == 0, f"{mismatches} mismatches over 200 formulas and "
                                 f"{len(frames)} frames")


def test_criterion_13_horn_amalgamation(verdict):
    fails = tried = 0
    for name in ("K", "K4"):
        for c in sample_cospans(FrameClass.table(name), 50, 0, 4):
            tried += 1
            a = amalgamate(c, 4)
            ok = a.verdict == "holds" and "set pullback" in a.details
            fails += not (ok and superamalgamate(c, 4).verdict == "holds")
    verdict(13, fails == 0 and tried == 100, f"{fails} failures over {tried} cospans")


def test_criterion_14_functional_limits(verdict):
    r = functional_limits_check(sample_functional_pairs(20, 0), 5)
    verdict(14, r.verdict == "holds", f"{r.verdict}: {r.details}")
