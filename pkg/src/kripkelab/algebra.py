"""Finite powerset modal algebras, their atom frames, and formula evaluation.

Elements are frozensets of points of the underlying frame. Internally the
evaluator works on bitmasks indexed by ``frame.points``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

import numpy as np

from .formula import (BigAnd, BigOr, Box, BoxStar, Formula, Neg, Var, variables)
from .frame import (BoundExceeded, Frame, FrameError, LazyFrame, ParseError, _fields,
                    _tok_int, cone, is_isomorphic)
from .morphism import PMorphism, morphisms_among

Element = frozenset
GUARD = 1 << 16


class SizeGuard(ValueError):
    pass


class UnboundVariable(KeyError):
    pass


def _box_mask(succ: list[int], x: int) -> int:
    out = 0
    for i, s in enumerate(succ):
        if s & ~x == 0:
            out |= 1 << i
    return out


def _dia_mask(succ: list[int], x: int) -> int:
    out = 0
    for i, s in enumerate(succ):
        if s & x:
            out |= 1 << i
    return out


def _boxstar_mask(succ: list[int], x: int) -> int:
    # greatest fixpoint of Z -> x & box Z, iterated down from the top
    z = x
    while True:
        nz = x & _box_mask(succ, z)
        if nz == z:
            return z
        z = nz


class FiniteModalAlgebra:
    """The powerset algebra of a finite frame: atoms are points, a < b iff a <= dia b."""

    def __init__(self, frame: Frame):
        self.frame = frame
        self.size = len(frame)
        self.full = (1 << self.size) - 1
        self._succ = frame.succ_masks()

    def __repr__(self):
        return f"FiniteModalAlgebra({self.frame!r})"

    @property
    def top(self) -> Element:
        return frozenset(self.frame.points)

    @property
    def bottom(self) -> Element:
        return frozenset()

    def elements(self):
        for m in range(self.full + 1):
            yield self.frame.points_of(m)

    def atoms(self) -> list[Element]:
        return [frozenset([p]) for p in self.frame.points]

    def mask(self, x: Iterable[int]) -> int:
        return self.frame.mask_of(x)

    def elem(self, m: int) -> Element:
        return self.frame.points_of(m)

    def dia(self, x) -> Element:
        return self.elem(_dia_mask(self._succ, self.mask(x)))

    def box(self, x) -> Element:
        return self.elem(_box_mask(self._succ, self.mask(x)))

    def boxstar(self, x) -> Element:
        return self.elem(_boxstar_mask(self._succ, self.mask(x)))

    def boxn(self, k: int, x) -> Element:
        m = self.mask(x)
        for _ in range(k):
            m = _box_mask(self._succ, m)
        return self.elem(m)

    def neg(self, x) -> Element:
        return self.top - frozenset(x)

    def join(self, xs) -> Element:
        return frozenset().union(*xs)

    def meet(self, xs) -> Element:
        out = self.top
        for x in xs:
            out = out & frozenset(x)
        return out

    def leq(self, a, b) -> bool:
        return frozenset(a) <= frozenset(b)


def powerset_algebra(W: Frame) -> FiniteModalAlgebra:
    return FiniteModalAlgebra(W)


def atom_frame(M: FiniteModalAlgebra) -> Frame:
    """Frame whose points are the atoms, with a < b iff a <= dia(b)."""
    atoms = M.atoms()
    pts = [next(iter(a)) for a in atoms]
    edges = [(pa, pb) for a, pa in zip(atoms, pts) for b, pb in zip(atoms, pts)
             if M.leq(a, M.dia(b))]
    return Frame(pts, edges)


@dataclass
class DualHom:
    """Inverse image along a p-morphism f: W -> V, a map P(V) -> P(W)."""
    f: PMorphism

    @property
    def source(self) -> FiniteModalAlgebra:
        return FiniteModalAlgebra(self.f.target)

    @property
    def target(self) -> FiniteModalAlgebra:
        return FiniteModalAlgebra(self.f.source)

    def __call__(self, x) -> Element:
        x = frozenset(x)
        return frozenset(w for w, v in zip(self.f.source.points, self.f.images) if v in x)

    def violation(self) -> Optional[tuple]:
        """First element on which a Boolean or modal operation is not preserved."""
        A, B = self.source, self.target
        if self(A.top) != B.top:
            return ("top", A.top)
        for x in A.elements():
            fx = self(x)
            if self(A.neg(x)) != B.neg(fx):
                return ("neg", x)
            if self(A.dia(x)) != B.dia(fx):
                return ("dia", x)
        for x, y in itertools.product(A.atoms(), A.elements()):
            if self(x | y) != self(x) | self(y):
                return ("join", x, y)
        return None


def dual_hom(f: PMorphism) -> DualHom:
    return DualHom(f)


def _dia_table(F: Frame) -> np.ndarray:
    succ = _succ_masks(F)
    return np.array([_dia_mask(succ, x) for x in range(1 << len(F))], dtype=np.int64)


def _succ_masks(F: Frame) -> list[int]:
    idx = {p: i for i, p in enumerate(F.points)}
    return [sum(1 << idx[q] for q in F.succ(p)) for p in F.points]


def dual_dia_violations(frames) -> tuple[int, list]:
    """Check that inverse image along every p-morphism among ``frames``
    commutes with dia on every subset of the target. Maps are batched per
    target and source size. Returns (maps checked, first few failures)."""
    frames = list(frames)
    groups: dict = {}
    for i, j, images in morphisms_among(frames):
        groups.setdefault((j, len(frames[i])), []).append((i, images))
    tables = {}
    for n in {len(F) for F in frames}:
        ids = [i for i, F in enumerate(frames) if len(F) == n]
        tables[n] = ({i: r for r, i in enumerate(ids)},
                     np.array([_dia_table(frames[i]) for i in ids], dtype=np.int64))
    checked, bad = 0, []
    for (j, n), maps in sorted(groups.items(), key=lambda kv: kv[0]):
        V = frames[j]
        vidx = {p: k for k, p in enumerate(V.points)}
        row_of, table = tables[n]
        rows = np.array([row_of[i] for i, _ in maps], dtype=np.int64)
        img = np.array([[vidx[v] for v in m] for _, m in maps], dtype=np.int64).reshape(len(maps), n)
        vdia = _dia_table(V)
        weights = np.int64(1) << np.arange(n, dtype=np.int64)
        checked += len(maps)
        for x in range(1 << len(V)):
            pre = (((x >> img) & 1) * weights).sum(axis=1)
            pre_dia = (((int(vdia[x]) >> img) & 1) * weights).sum(axis=1)
            for r in np.nonzero(table[rows, pre] != pre_dia)[0][:5 - len(bad)]:
                i, m = maps[r]
                bad.append((PMorphism(frames[i], V, list(m)), V.points_of(x)))
            if len(bad) >= 5:
                return checked, bad
    return checked, bad


# evaluation -------------------------------------------------------------------

Valuation = dict  # variable name -> frozenset of points


def _eval_mask(succ, full, vm: dict, phi: Formula, memo: dict) -> int:
    r = memo.get(phi)
    if r is not None:
        return r
    if isinstance(phi, Var):
        if phi.name not in vm:
            raise UnboundVariable(phi.name)
        r = vm[phi.name]
    elif isinstance(phi, Neg):
        r = full & ~_eval_mask(succ, full, vm, phi.sub, memo)
    elif isinstance(phi, Box):
        r = _box_mask(succ, _eval_mask(succ, full, vm, phi.sub, memo))
    elif isinstance(phi, BoxStar):
        r = _boxstar_mask(succ, _eval_mask(succ, full, vm, phi.sub, memo))
    elif isinstance(phi, BigAnd):
        r = full
        for x in phi.items:
            r &= _eval_mask(succ, full, vm, x, memo)
    elif isinstance(phi, BigOr):
        r = 0
        for x in phi.items:
            r |= _eval_mask(succ, full, vm, x, memo)
    else:
        raise TypeError(f"not a formula: {phi!r}")
    memo[phi] = r
    return r


class Evaluator:
    """Evaluates formulas on one frame under one valuation, sharing a memo."""

    def __init__(self, frame: Frame, v: Valuation):
        self.frame = frame
        self.succ = frame.succ_masks()
        self.full = (1 << len(frame)) - 1
        self.vm = {k: frame.mask_of(x) for k, x in v.items()}
        self.memo: dict = {}

    @classmethod
    def from_masks(cls, frame: Frame, succ: list[int], vm: dict) -> "Evaluator":
        self = cls.__new__(cls)
        self.frame, self.succ, self.vm, self.memo = frame, succ, vm, {}
        self.full = (1 << len(frame)) - 1
        return self

    def mask(self, phi: Formula) -> int:
        return _eval_mask(self.succ, self.full, self.vm, phi, self.memo)

    def __call__(self, phi: Formula) -> Element:
        return self.frame.points_of(self.mask(phi))

    def valid(self, phi: Formula) -> bool:
        return self.mask(phi) == self.full


def evaluate(frame: Frame, v: Valuation, phi: Formula) -> Element:
    return Evaluator(frame, v)(phi)


def sequent_value(frame: Frame, v: Valuation, ante, succ) -> Element:
    """v(G => D) as the element v(and G -> or D)."""
    ev = Evaluator(frame, v)
    a = ev.mask(BigAnd(ante))
    s = ev.mask(BigOr(succ))
    return frame.points_of((ev.full & ~a) | s)


class BatchEvaluator:
    """Evaluates formulas on one frame under every valuation of ``names`` at once.

    Row r of each result array is the point mask for valuation number r; the
    valuation assigns each name a point mask, the last name varying fastest.
    """

    LIMIT = 1 << 22

    def __init__(self, frame: Frame, names):
        self.frame = frame
        self.names = sorted(names)
        n, k = len(frame), len(self.names)
        if (1 << (n * k)) > self.LIMIT:
            raise SizeGuard(f"2^{n * k} valuations on {n} points")
        self.count = 1 << (n * k)
        self.full = (1 << n) - 1
        self.succ = frame.succ_masks()
        idx = np.arange(self.count, dtype=np.int64)
        self.vm = {name: (idx >> (n * (k - 1 - j))) & self.full
                   for j, name in enumerate(self.names)}
        self.memo: dict = {}

    def valuation(self, row: int) -> Valuation:
        return {name: self.frame.points_of(int(a[row])) for name, a in self.vm.items()}

    def _box(self, x):
        out = np.zeros_like(x)
        for i, s in enumerate(self.succ):
            out |= ((x & s) == s).astype(np.int64) << i
        return out

    def mask(self, phi: Formula):
        r = self.memo.get(phi)
        if r is not None:
            return r
        if isinstance(phi, Var):
            if phi.name not in self.vm:
                raise UnboundVariable(phi.name)
            r = self.vm[phi.name]
        elif isinstance(phi, Neg):
            r = self.full & ~self.mask(phi.sub)
        elif isinstance(phi, Box):
            r = self._box(self.mask(phi.sub))
        elif isinstance(phi, BoxStar):
            x = self.mask(phi.sub)
            r = x
            while True:
                nr = x & self._box(r)
                if np.array_equal(nr, r):
                    break
                r = nr
        elif isinstance(phi, BigAnd):
            r = np.full(self.count, self.full, dtype=np.int64)
            for y in phi.items:
                r = r & self.mask(y)
        elif isinstance(phi, BigOr):
            r = np.zeros(self.count, dtype=np.int64)
            for y in phi.items:
                r = r | self.mask(y)
        else:
            raise TypeError(f"not a formula: {phi!r}")
        self.memo[phi] = r
        return r

    def valid(self, phi: Formula):
        """Boolean array: phi is true at every point under valuation r."""
        return self.mask(phi) == self.full


# identities ------------------------------------------------------------------------

@dataclass
class IdentityCheck:
    holds: bool
    lhs: Element
    rhs: Element
    note: str = ""

    def __bool__(self) -> bool:
        return self.holds


def choice_functions(family):
    """All choice functions over a finite family, in a fixed order.

    The family is read as a set of sets; each function is returned as the
    tuple of its values on ``sorted_family``.
    """
    fam = sorted_family(family)
    return fam, itertools.product(*[_sorted(s) for s in fam])


def _key(x):
    if isinstance(x, Formula):
        return (0, x.text())
    if isinstance(x, (frozenset, set)):
        return (1, sorted(_key(y) for y in x))
    return (2, repr(x))


def _sorted(xs):
    return sorted(xs, key=_key)


def sorted_family(family):
    return _sorted({frozenset(s) for s in family})


def _count_choices(fam) -> int:
    n = 1
    for s in fam:
        n *= len(s)
    return n


def check_ID(M: FiniteModalAlgebra, family) -> IdentityCheck:
    """meet of joins equals join over choice functions of meets."""
    fam = sorted_family(family)
    if _count_choices(fam) > GUARD:
        raise SizeGuard(f"{_count_choices(fam)} choice functions")
    lhs = M.meet(M.join(X) for X in fam)
    _, chs = choice_functions(fam)
    rhs = M.join(M.meet(c) for c in chs)
    return IdentityCheck(lhs == rhs, lhs, rhs)


def check_CA(M: FiniteModalAlgebra, X) -> IdentityCheck:
    """dia of a join equals the join of the dias."""
    X = list(X)
    lhs = M.dia(M.join(X))
    rhs = M.join(M.dia(x) for x in X)
    return IdentityCheck(lhs == rhs, lhs, rhs)


@dataclass(frozen=True)
class LFFamily:
    """X_0 .. X_{N-1} followed by X_tail for every n >= N."""
    prefix: tuple
    tail: frozenset = frozenset()

    def __init__(self, prefix=(), tail=()):
        object.__setattr__(self, "prefix", tuple(frozenset(x) for x in prefix))
        object.__setattr__(self, "tail", frozenset(tail))

    def level(self, n: int) -> frozenset:
        return self.prefix[n] if n < len(self.prefix) else self.tail

    def support(self) -> frozenset:
        return frozenset().union(self.tail, *self.prefix)


def _lf_meet(M: FiniteModalAlgebra, fam: LFFamily, keep=None) -> Element:
    """meet over n of box^n join(X_n), restricted to members of ``keep``."""
    f = (lambda X: X) if keep is None else (lambda X: X & keep)
    out = M.top
    for n, X in enumerate(fam.prefix):
        out &= M.boxn(n, M.join(f(X)))
    tail = M.boxn(len(fam.prefix), M.boxstar(M.join(f(fam.tail))))
    return out & tail


def check_LF(M: FiniteModalAlgebra, fam: LFFamily) -> IdentityCheck:
    U = _sorted(fam.support())
    if len(U) > 16:
        raise SizeGuard(f"2^{len(U)} finite subsets")
    lhs = _lf_meet(M, fam)
    rhs = M.bottom
    for r in range(len(U) + 1):
        for Y in itertools.combinations(U, r):
            rhs |= _lf_meet(M, fam, frozenset(Y))
    return IdentityCheck(lhs == rhs, lhs, rhs)


@dataclass
class FiniteCone:
    points: frozenset


@dataclass
class LFViolation:
    """Canonical non-local-finiteness evidence at a root w.

    ``levels[n]`` are the points reachable from w in exactly n steps, so
    X_n = {{x} : x in levels[n]}. ``at_w[n]`` records that w lies in
    box^n join(X_n); ``min_cover`` is the least size of a finite Y with
    w in box^n join(Y & X_n) for every explored n.
    """
    w: object
    depth: int
    levels: list = field(default_factory=list)
    at_w: list = field(default_factory=list)
    min_cover: int = 0


def lf_witness(F, w, depth: int) -> Union[FiniteCone, LFViolation]:
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if isinstance(F, Frame):
        F = LazyFrame.of(F)
    c = cone(F, w)
    if not isinstance(c, BoundExceeded):
        return FiniteCone(c)
    levels = [frozenset([w])]
    for _ in range(depth):
        nxt = set()
        for x in levels[-1]:
            nxt.update(F.successors(x))
        levels.append(frozenset(nxt))
    at_w = []
    for n, L in enumerate(levels):
        # every n-step path from w ends in levels[n] by construction; re-walk to confirm
        frontier = {w}
        for _ in range(n):
            frontier = {y for x in frontier for y in F.successors(x)}
        at_w.append(frontier <= L)
    cover = frozenset().union(*levels)
    return LFViolation(w, depth, levels, at_w, len(cover))


# valuation files ------------------------------------------------------------------------

def parse_valuation(text: str, frame: Optional[Frame] = None) -> Valuation:
    """Lines ``x: 0 1`` assign the listed points to variable x."""
    out: dict = {}
    for key, toks, _rest, line in _fields(text):
        if key in out:
            raise ParseError(f"variable {key!r} assigned twice", line, 1)
        pts = frozenset(_tok_int(t, l, c) for t, l, c in toks)
        if frame is not None:
            for p in pts:
                if p not in frame:
                    raise FrameError(f"valuation of {key} mentions unknown point {p}")
        out[key] = pts
    return out


def valuation_to_text(v: Valuation) -> str:
    return "".join(f"{k}: {' '.join(map(str, sorted(v[k])))}\n" for k in sorted(v))


def valuations(frame: Frame, names) -> Iterable[dict]:
    """Every valuation of ``names`` as masks; the last name varies fastest."""
    names = sorted(names)
    n = len(frame)
    total = (1 << n) ** len(names)
    if total > 1 << 22:
        raise SizeGuard(f"{total} valuations")
    for combo in itertools.product(range(1 << n), repeat=len(names)):
        yield dict(zip(names, combo))


def round_trip_ok(W: Frame) -> bool:
    return is_isomorphic(atom_frame(powerset_algebra(W)), W) is not None


def free_variables(phi: Formula) -> frozenset:
    return variables(phi)
