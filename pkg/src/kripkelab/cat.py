"""Colimits and limits that can be computed exactly, plus bounded checks of
universal properties for everything else."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Optional

from .frame import Frame, FrameClass, FrameError, Verdict, check_class, cone, restrict
from .morphism import (PMorphism, compose, hom_indices, image, quotient_by,
                       violation)


class UnionFind:
    """Union-find whose class representative is always the least element."""

    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True

    def rep_map(self) -> dict:
        return {x: self.find(x) for x in self.parent}


def quotient(W: Frame, pairs) -> tuple[Frame, PMorphism]:
    """W modulo the equivalence generated by ``pairs``; q is re-verified."""
    uf = UnionFind(W.points)
    for a, b in pairs:
        uf.union(a, b)
    Q, q = quotient_by(W, uf.rep_map())
    bad = violation(q)
    if bad:
        raise FrameError(f"quotient map is not a p-morphism: {bad[0]} at {bad[1]}")
    return Q, q


def coequalizer(g: PMorphism, h: PMorphism, cls: Optional[FrameClass] = None):
    if g.source != h.source or g.target != h.target:
        raise FrameError("coequalizer needs a parallel pair")
    Q, q = quotient(g.target, zip(g.images, h.images))
    if cls is not None:
        v = check_class(Q, cls)
        if not v:
            raise FrameError(f"coequalizer left the class: {v.describe()}")
    return Q, q


@dataclass
class CokernelPair:
    U: Frame
    iota0: PMorphism
    iota1: PMorphism
    tags: dict = field(default_factory=dict)  # point of U -> (v, i)


def cokernel_pair(f: PMorphism) -> CokernelPair:
    V = f.target
    im = f.image_set()
    tags = []
    for v in V.points:
        if v not in im:
            tags.append((v, 0))
        tags.append((v, 1))
    tags.sort()
    ids = {t: k for k, t in enumerate(tags)}
    edges = []
    for (v, i) in tags:
        for (w, j) in tags:
            if V.rel(v, w) and (i == j or (i < j and w in im)):
                edges.append((ids[(v, i)], ids[(w, j)]))
    U = Frame(range(len(tags)), edges, {k: f"({v},{i})" for (v, i), k in ids.items()})
    i0 = PMorphism(V, U, [ids[(v, 1 if v in im else 0)] for v in V.points])
    i1 = PMorphism(V, U, [ids[(v, 1)] for v in V.points])
    return CokernelPair(U, i0, i1, {k: t for t, k in ids.items()})


def equalizer(g: PMorphism, h: PMorphism):
    """Largest generated subframe on which g and h agree, with its inclusion."""
    if g.source != h.source or g.target != h.target:
        raise FrameError("equalizer needs a parallel pair")
    W = g.source
    agree = {p for p, a, b in zip(W.points, g.images, h.images) if a == b}
    pts = [p for p in agree if cone(W, p) <= agree]
    E = restrict(W, pts)
    return E, PMorphism(E, W, E.points)


def coregular_factorization(f: PMorphism):
    """(e, m): e onto Im f, m the inclusion of Im f."""
    _, e, m = image(f)
    return e, m


def pullback_along_regmono(f: PMorphism, m: PMorphism):
    """(P, m', f') with P = f^-1(Im m), m' its inclusion, f' = m^-1 f."""
    if not m.injective:
        raise FrameError("pullback_along_regmono needs an injective m")
    if f.target != m.target:
        raise FrameError("f and m must share their codomain")
    inv = {v: u for u, v in m.map.items()}
    W = f.source
    pts = [w for w, v in zip(W.points, f.images) if v in inv]
    P = restrict(W, pts)
    fm = f.map
    return P, PMorphism(P, W, P.points), PMorphism(P, m.source, [inv[fm[w]] for w in P.points])


@dataclass
class SetPullback:
    U: Frame
    p0: PMorphism
    p1: PMorphism
    tags: dict
    membership: Verdict


def set_pullback(f0: PMorphism, f1: PMorphism, cls: Optional[FrameClass] = None) -> SetPullback:
    if f0.target != f1.target:
        raise FrameError("set_pullback needs a cospan")
    W0, W1 = f0.source, f1.source
    pairs = [(a, b) for a, x in zip(W0.points, f0.images)
             for b, y in zip(W1.points, f1.images) if x == y]
    ids = {t: k for k, t in enumerate(pairs)}
    edges = [(ids[(a, b)], ids[(c, d)]) for (a, b) in pairs for (c, d) in pairs
             if W0.rel(a, c) and W1.rel(b, d)]
    U = Frame(range(len(pairs)), edges, {k: f"({a},{b})" for (a, b), k in ids.items()})
    p0 = PMorphism(U, W0, [a for a, _ in pairs])
    p1 = PMorphism(U, W1, [b for _, b in pairs])
    verdict = check_class(U, cls) if cls is not None else Verdict(True)
    return SetPullback(U, p0, p1, {k: t for t, k in ids.items()}, verdict)


def wide_coequalizer(f: PMorphism, cls: FrameClass, bound: int):
    """Joint coequalizer of all pairs U=>W from rooted class frames |U|<=bound
    that f coequalizes.

    Restricting to rooted U loses nothing: a pair identifies g(u) with h(u)
    exactly when its restriction to the cone of u does.
    """
    from .catalog import rooted_members
    W = f.source
    fi = [f.target.index(q) for q in f.images]
    wp = W.points
    pairs = []
    for n in range(1, bound + 1):
        for U in rooted_members(cls, n):
            groups: dict[tuple, tuple] = {}
            for g in hom_indices(U, W):
                key = tuple(fi[x] for x in g)
                first = groups.setdefault(key, g)
                if first != g:
                    pairs.extend((wp[a], wp[b]) for a, b in zip(first, g) if a != b)
    return quotient(W, pairs)


# bounded universal properties -------------------------------------------------------

@dataclass
class Diagram:
    objects: list
    arrows: list  # (source index, target index, PMorphism)


@dataclass
class ConeCandidate:
    apex: Frame
    legs: list  # apex -> objects[i] for limits, objects[i] -> apex for colimits
    colimit: bool = False


@dataclass
class UniversalVerdict:
    status: str  # "verified" or "refuted"
    bound: int
    tested: int = 0
    witness: Any = None
    reason: str = ""

    @property
    def verified(self) -> bool:
        return self.status == "verified"


def _homs(A: Frame, B: Frame) -> list[PMorphism]:
    bp = B.points
    return [PMorphism(A, B, [bp[j] for j in t]) for t in hom_indices(A, B)]


def _product_filtered(lists, check):
    out = []

    def bt(i, acc):
        if i == len(lists):
            if check(acc, final=True):
                out.append(tuple(acc))
            return
        for x in lists[i]:
            acc.append(x)
            if check(acc, final=False):
                bt(i + 1, acc)
            acc.pop()

    bt(0, [])
    return out


def verify_universal_bounded(cand: ConeCandidate, diagram: Diagram, cls: FrameClass,
                             bound: int) -> UniversalVerdict:
    """Check existence and uniqueness of mediating maps for every test
    (co)cone whose vertex is a class frame with at most ``bound`` points."""
    from .catalog import catalog
    objs, arrows = diagram.objects, diagram.arrows
    for a, b, k in arrows:
        lhs = compose(k, cand.legs[a]) if not cand.colimit else compose(cand.legs[b], k)
        rhs = cand.legs[b] if not cand.colimit else cand.legs[a]
        if lhs.images != rhs.images:
            raise FrameError("candidate does not commute with the diagram")
    tested = 0
    for T in catalog(cls, bound):
        if not cand.colimit:
            lists = [_homs(T, D) for D in objs]

            def check(acc, final, arrows=arrows):
                i = len(acc) - 1
                for a, b, k in arrows:
                    if max(a, b) == i and compose(k, acc[a]).images != acc[b].images:
                        return False
                return True

            cones = _product_filtered(lists, check)
            counts = Counter(tuple(compose(p, u).images for p in cand.legs)
                             for u in _homs(T, cand.apex))
            for c in cones:
                tested += 1
                n = counts[tuple(t.images for t in c)]
                if n != 1:
                    return UniversalVerdict("refuted", bound, tested, (T, c),
                                            "no mediating map" if n == 0 else f"{n} mediating maps")
        else:
            lists = [_homs(D, T) for D in objs]

            def check(acc, final, arrows=arrows):
                i = len(acc) - 1
                for a, b, k in arrows:
                    if max(a, b) == i and compose(acc[b], k).images != acc[a].images:
                        return False
                return True

            cocones = _product_filtered(lists, check)
            counts = Counter(tuple(compose(u, c).images for c in cand.legs)
                             for u in _homs(cand.apex, T))
            for c in cocones:
                tested += 1
                n = counts[tuple(t.images for t in c)]
                if n != 1:
                    return UniversalVerdict("refuted", bound, tested, (T, c),
                                            "no mediating map" if n == 0 else f"{n} mediating maps")
    return UniversalVerdict("verified", bound, tested)


def coequalizer_cone(g: PMorphism, h: PMorphism, Q: Frame, q: PMorphism):
    d = Diagram([g.source, g.target], [(0, 1, g), (0, 1, h)])
    return ConeCandidate(Q, [compose(q, g), q], colimit=True), d


def pushout_cone(f0: PMorphism, f1: PMorphism, U: Frame, i0: PMorphism, i1: PMorphism):
    d = Diagram([f0.source, f0.target, f1.target], [(0, 1, f0), (0, 2, f1)])
    return ConeCandidate(U, [compose(i0, f0), i0, i1], colimit=True), d


def pullback_cone(f0: PMorphism, f1: PMorphism, P: Frame, p0: PMorphism, p1: PMorphism):
    d = Diagram([f0.source, f1.source, f0.target], [(0, 2, f0), (1, 2, f1)])
    return ConeCandidate(P, [p0, p1, compose(f0, p0)]), d


def equalizer_cone(g: PMorphism, h: PMorphism, E: Frame, e: PMorphism):
    d = Diagram([g.source, g.target], [(0, 1, g), (0, 1, h)])
    return ConeCandidate(E, [e, compose(g, e)]), d


def product_cone(F: Frame, G: Frame, P: Frame, p0: PMorphism, p1: PMorphism):
    return ConeCandidate(P, [p0, p1]), Diagram([F, G], [])
