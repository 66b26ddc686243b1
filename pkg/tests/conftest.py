import itertools
import os

import pytest
from hypothesis import HealthCheck, settings

from kripkelab.frame import Frame

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

FIXTURES = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "fixtures")


@pytest.fixture
def fixtures_dir():
    return FIXTURES


def brute_pmorphisms(W: Frame, V: Frame):
    """Every map W -> V satisfying forth and back, by exhaustive search."""
    out = []
    for images in itertools.product(V.points, repeat=len(W)):
        m = dict(zip(W.points, images))
        forth = all(V.rel(m[a], m[b]) for a in W.points for b in W.succ(a))
        back = all(any(m[b] == v for b in W.succ(a))
                   for a in W.points for v in V.succ(m[a]))
        if forth and back:
            out.append(tuple(images))
    return out


def kripke_truth(F: Frame, val: dict, phi, w) -> bool:
    """Pointwise Kripke semantics, written independently of the mask evaluator."""
    from kripkelab.formula import BigAnd, BigOr, Box, BoxStar, Neg, Var
    if isinstance(phi, Var):
        return w in val[phi.name]
    if isinstance(phi, Neg):
        return not kripke_truth(F, val, phi.sub, w)
    if isinstance(phi, Box):
        return all(kripke_truth(F, val, phi.sub, u) for u in F.succ(w))
    if isinstance(phi, BoxStar):
        seen, frontier = set(), {w}
        while frontier:
            if not all(kripke_truth(F, val, phi.sub, u) for u in frontier):
                return False
            seen |= frontier
            frontier = {u for x in frontier for u in F.succ(x)} - seen
        return True
    if isinstance(phi, BigAnd):
        return all(kripke_truth(F, val, x, w) for x in phi.items)
    if isinstance(phi, BigOr):
        return any(kripke_truth(F, val, x, w) for x in phi.items)
    raise TypeError(phi)
