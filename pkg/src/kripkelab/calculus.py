"""Set-based sequent calculus at finite instantiation.

Rules and their parameters (``params`` of a ProofTree node):

    Ax                       phi => phi
    W                        weakening
    Cut     S                one premise G => D, phi per phi in S (sorted), then S, G' => D'
    Lneg/Rneg  S             not S on the left / right
    Land/Ror   family        a set of sets, one premise
    Rand/Lor   family        one premise per choice function, in canonical order
    Nec     S                S => phi  over  box S => box phi
    lf      family           a list S_0..S_{N-1}; one premise per finite I of the union,
                             ordered by size then lexicographically
    TL      S                S a set of theory axioms and logic-schema instances

The lf family is finite: levels n >= N are read as {top}, whose terms are
semantically top and are left out of both conclusion and premises.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

import numpy as np

from .algebra import BatchEvaluator, SizeGuard, choice_functions, sorted_family
from .formula import (BOT, TOP, BigAnd, BigOr, Box, BoxStar, Formula, Neg, Var, boxn,
                      logic_schemata, matches_schema, metavariables, parse_formula,
                      parse_formula_at, substitute, variables)
from .frame import Frame, FrameClass, ParseError, check_class

GUARD = 1 << 12


def fset(xs: Iterable[Formula]) -> frozenset:
    return frozenset(xs)


def _sorted(xs) -> list[Formula]:
    return sorted(xs, key=Formula.text)


@dataclass(frozen=True)
class Sequent:
    ante: frozenset
    succ: frozenset

    def __init__(self, ante=(), succ=()):
        object.__setattr__(self, "ante", frozenset(ante))
        object.__setattr__(self, "succ", frozenset(succ))

    def text(self) -> str:
        a = " ".join(f.text() for f in _sorted(self.ante))
        s = " ".join(f.text() for f in _sorted(self.succ))
        return f"{a} => {s}".strip() if a else f"=> {s}".rstrip()

    def __str__(self):
        return self.text()

    def formulas(self):
        return self.ante | self.succ


@dataclass(frozen=True)
class ProofTree:
    conclusion: Sequent
    rule: str
    params: dict = field(default_factory=dict, hash=False)
    premises: tuple = ()

    def size(self) -> int:
        return 1 + sum(p.size() for p in self.premises)

    def nodes(self):
        yield self
        for p in self.premises:
            yield from p.nodes()


@dataclass
class CalculusParams:
    variables: Optional[frozenset] = None
    logic: list = field(default_factory=list)
    theory: frozenset = frozenset()
    logic_name: str = ""

    @classmethod
    def for_logic(cls, name: str = "K", theory=(), variables=None) -> "CalculusParams":
        v = None if variables is None else frozenset(variables)
        return cls(v, logic_schemata(name), frozenset(theory), name)

    def without_theory(self) -> "CalculusParams":
        return CalculusParams(self.variables, self.logic, frozenset(), self.logic_name)

    def is_logical_axiom(self, phi: Formula) -> bool:
        return any(matches_schema(phi, chi) is not None for chi in self.logic)


@dataclass
class Accepted:
    rank: int

    def __bool__(self):
        return True


@dataclass
class Rejected:
    path: tuple
    rule: str
    reason: str

    def __bool__(self):
        return False

    def describe(self) -> str:
        where = "root" if not self.path else "root/" + "/".join(map(str, self.path))
        return f"{where} [{self.rule}]: {self.reason}"


class _Reject(Exception):
    pass


RULES = ("Ax", "W", "Cut", "Lneg", "Rneg", "Land", "Rand", "Lor", "Ror", "Nec", "lf", "TL")
SET_RULES = ("Cut", "Lneg", "Rneg", "Nec", "TL")
FAMILY_RULES = ("Land", "Rand", "Lor", "Ror", "lf")


def _show(xs) -> str:
    return "{" + ", ".join(f.text() for f in _sorted(xs)) + "}"


def _context(side: str, concl: frozenset, cx: frozenset, prems) -> frozenset:
    """Least context G with concl = cx | G and P = X | G for every (P, X)."""
    if not cx <= concl:
        raise _Reject(f"conclusion {side} lacks {_show(cx - concl)}")
    ctx = concl - cx
    for P, X in prems:
        ctx = ctx | (P - X)
    if not ctx <= concl:
        raise _Reject(f"{side} context {_show(ctx - concl)} missing from the conclusion")
    for k, (P, X) in enumerate(prems):
        if not X <= P:
            raise _Reject(f"premise {k} {side} lacks {_show(X - P)}")
        if not ctx <= P:
            raise _Reject(f"premise {k} {side} lacks context {_show(ctx - P)}")
    return ctx


def choices(family) -> list[tuple]:
    fam, chs = choice_functions(family)
    n = 1
    for s in fam:
        n *= len(s)
    if n > GUARD:
        raise SizeGuard(f"{n} choice functions")
    return [tuple(c) for c in chs]


def finite_subsets(xs) -> list[frozenset]:
    xs = _sorted(xs)
    if len(xs) > 12:
        raise SizeGuard(f"2^{len(xs)} finite subsets")
    out = []
    for r in range(len(xs) + 1):
        out.extend(frozenset(c) for c in itertools.combinations(xs, r))
    return out


def lf_terms(family, keep=None) -> frozenset:
    return frozenset(boxn(n, BigOr(S if keep is None else S & keep))
                     for n, S in enumerate(family))


def _check_node(pi: ProofTree, T: CalculusParams):
    c = pi.conclusion
    r = pi.rule
    prem = [p.conclusion for p in pi.premises]
    P = pi.params

    def need(k):
        if len(prem) != k:
            raise _Reject(f"expected {k} premise(s), got {len(prem)}")

    if T.variables is not None:
        extra = frozenset().union(*(variables(f) for f in c.formulas())) - T.variables
        if extra:
            raise _Reject(f"variables outside G: {sorted(extra)}")
    if r == "Ax":
        need(0)
        if len(c.ante) != 1 or c.ante != c.succ:
            raise _Reject("axiom must have the shape phi => phi")
        return
    if r == "W":
        need(1)
        if not (prem[0].ante <= c.ante and prem[0].succ <= c.succ):
            raise _Reject("weakening must only add formulas")
        return
    if r in SET_RULES:
        if "S" not in P:
            raise _Reject("missing parameter S")
        S = frozenset(P["S"])
    if r in FAMILY_RULES:
        if "family" not in P:
            raise _Reject("missing parameter family")
    if r == "Cut":
        order = _sorted(S)
        need(len(order) + 1)
        left, right = prem[:-1], prem[-1]
        gam = left[0].ante if left else frozenset()
        for k, (phi, q) in enumerate(zip(order, left)):
            if q.ante != gam:
                raise _Reject(f"left premise {k} antecedent differs from the others")
            if phi not in q.succ:
                raise _Reject(f"left premise {k} must contain {phi.text()} on the right")
        delta = frozenset().union(*(q.succ - {phi} for phi, q in zip(order, left)))
        for k, q in enumerate(left):
            if not delta <= q.succ:
                raise _Reject(f"left premise {k} succedent lacks {_show(delta - q.succ)}")
        if not S <= right.ante:
            raise _Reject(f"right premise lacks the cut formulas {_show(S - right.ante)}")
        if not gam <= c.ante:
            raise _Reject("conclusion lacks the left context")
        gam2 = (right.ante - S) | (c.ante - gam)
        if not gam2 <= right.ante or not gam2 <= c.ante:
            raise _Reject("antecedents do not split as G, G'")
        if not right.succ <= c.succ:
            raise _Reject("conclusion lacks the right premise succedent")
        d1 = delta | (c.succ - right.succ)
        if not all(d1 <= q.succ for q in left) or not d1 <= c.succ:
            raise _Reject("succedents do not split as D, D'")
        return
    if r == "Lneg":
        need(1)
        _context("antecedent", c.ante, fset(Neg(x) for x in S), [(prem[0].ante, frozenset())])
        _context("succedent", c.succ, frozenset(), [(prem[0].succ, S)])
        return
    if r == "Rneg":
        need(1)
        _context("antecedent", c.ante, frozenset(), [(prem[0].ante, S)])
        _context("succedent", c.succ, fset(Neg(x) for x in S), [(prem[0].succ, frozenset())])
        return
    if r == "Nec":
        need(1)
        if len(prem[0].succ) != 1:
            raise _Reject("Nec premise must have exactly one succedent formula")
        phi = next(iter(prem[0].succ))
        if prem[0].ante != S:
            raise _Reject(f"Nec premise antecedent must be S = {_show(S)}")
        if c.ante != fset(Box(x) for x in S) or c.succ != {Box(phi)}:
            raise _Reject("Nec conclusion must be box S => box phi")
        return
    if r == "TL":
        need(1)
        for x in _sorted(S):
            if x not in T.theory and not T.is_logical_axiom(x):
                raise _Reject(f"{x.text()} is neither a theory axiom nor a logic-schema instance")
        _context("antecedent", c.ante, frozenset(), [(prem[0].ante, S)])
        _context("succedent", c.succ, frozenset(), [(prem[0].succ, frozenset())])
        return
    if r in ("Land", "Ror", "Rand", "Lor"):
        fam = [frozenset(s) for s in P["family"]]
        big = BigAnd if r in ("Land", "Rand") else BigOr
        principal = fset(big(s) for s in fam)
        left = r in ("Land", "Lor")
        if r in ("Land", "Ror"):
            need(1)
            pairs = [(prem[0].ante if left else prem[0].succ, frozenset().union(*fam))]
        else:
            chs = choices(fam)
            if len(prem) != len(chs):
                missing = len(chs) - len(prem)
                what = "missing" if missing > 0 else "extra"
                raise _Reject(f"{what} choice function: {len(chs)} required, got {len(prem)}")
            pairs = [((q.ante if left else q.succ), frozenset(ch)) for q, ch in zip(prem, chs)]
        try:
            if left:
                _context("antecedent", c.ante, principal, pairs)
                _context("succedent", c.succ, frozenset(), [(q.succ, frozenset()) for q in prem])
            else:
                _context("antecedent", c.ante, frozenset(), [(q.ante, frozenset()) for q in prem])
                _context("succedent", c.succ, principal, pairs)
        except _Reject as e:
            if r in ("Rand", "Lor"):
                for k, (q, ch) in enumerate(zip(prem, choices(fam))):
                    side = q.ante if left else q.succ
                    if not frozenset(ch) <= side:
                        raise _Reject(f"{e}; choice function {k} = {_show(ch)} not matched") from None
            raise
        return
    if r == "lf":
        fam = [frozenset(s) for s in P["family"]]
        subsets = finite_subsets(frozenset().union(*fam))
        if len(prem) != len(subsets):
            raise _Reject(f"lf needs one premise per finite subset: {len(subsets)} required, "
                          f"got {len(prem)}")
        pairs = [(q.ante, lf_terms(fam, I)) for q, I in zip(prem, subsets)]
        try:
            _context("antecedent", c.ante, lf_terms(fam), pairs)
        except _Reject as e:
            for k, (q, I) in enumerate(zip(prem, subsets)):
                if not lf_terms(fam, I) <= q.ante:
                    raise _Reject(f"{e}; index set I = {_show(I)} (premise {k}) not matched") from None
            raise
        _context("succedent", c.succ, frozenset(), [(q.succ, frozenset()) for q in prem])
        return
    raise _Reject(f"unknown rule {r!r}")


def check_proof(pi: ProofTree, T: Optional[CalculusParams] = None) -> Union[Accepted, Rejected]:
    """Check every node bottom-up; the first failure in pre-order is reported."""
    T = T or CalculusParams()
    memo: dict = {}

    def go(node, path):
        key = id(node)
        if key in memo:
            return memo[key]
        try:
            _check_node(node, T)
        except _Reject as e:
            raise _Failure(Rejected(path, node.rule, str(e)))
        except SizeGuard as e:
            raise _Failure(Rejected(path, node.rule, f"size guard: {e}"))
        rank = 1 + max((go(p, path + (k,)) for k, p in enumerate(node.premises)), default=0)
        memo[key] = rank
        return rank

    try:
        return Accepted(go(pi, ()))
    except _Failure as f:
        return f.verdict


class _Failure(Exception):
    def __init__(self, verdict):
        self.verdict = verdict


# proof building -------------------------------------------------------------------

def node(rule, ante, succ, params=None, *premises) -> ProofTree:
    return ProofTree(Sequent(ante, succ), rule, dict(params or {}), tuple(premises))


def ax(phi: Formula) -> ProofTree:
    return node("Ax", [phi], [phi])


def weaken(pi: ProofTree, ante, succ) -> ProofTree:
    target = Sequent(ante, succ)
    if pi.conclusion == target:
        return pi
    return ProofTree(target, "W", {}, (pi,))


def axw(ante, succ, phi: Formula) -> ProofTree:
    return weaken(ax(phi), ante, succ)


def _fam(*sets) -> tuple:
    return tuple(sorted_family(sets))


def _rand(ante, succ_ctx, fam, prove):
    """R-and over ``fam`` with ``prove(choice)`` building each premise."""
    fam = _fam(*fam)
    principal = fset(BigAnd(s) for s in fam)
    prems = [prove(ch) for ch in choices(fam)]
    return node("Rand", ante, set(succ_ctx) | principal, {"family": fam}, *prems)


def _lor(ante_ctx, succ, fam, prove):
    fam = _fam(*fam)
    principal = fset(BigOr(s) for s in fam)
    prems = [prove(ch) for ch in choices(fam)]
    return node("Lor", set(ante_ctx) | principal, succ, {"family": fam}, *prems)


def _land(ante_ctx, succ, fam, premise):
    fam = _fam(*fam)
    return node("Land", set(ante_ctx) | fset(BigAnd(s) for s in fam), succ, {"family": fam}, premise)


def _ror(ante, succ_ctx, fam, premise):
    fam = _fam(*fam)
    return node("Ror", ante, set(succ_ctx) | fset(BigOr(s) for s in fam), {"family": fam}, premise)


def _nec(S, premise):
    S = fset(S)
    phi = next(iter(premise.conclusion.succ))
    return node("Nec", [Box(x) for x in S], [Box(phi)], {"S": S}, premise)


def _box_count(phi: Formula) -> tuple[int, Formula]:
    n = 0
    while isinstance(phi, Box):
        n, phi = n + 1, phi.sub
    return n, phi


def eq_formulas(variant: str, S=None, family=None) -> tuple[Formula, Formula]:
    """The two sides of the requested equivalence."""
    if variant == "o":
        fam = _fam(*family)
        return BigAnd(BigAnd(s) for s in fam), BigAnd(frozenset().union(*fam))
    if variant == "i":
        return Neg(BigAnd(S)), BigOr(Neg(x) for x in S)
    if variant == "ii":
        return Box(BigAnd(S)), BigAnd(Box(x) for x in S)
    if variant == "iii":
        fam = _fam(*family)
        return (BigAnd(BigOr(s) for s in fam),
                BigOr(BigAnd(c) for c in choices(fam)))
    if variant == "iv":
        fam = [frozenset(s) for s in family]
        U = frozenset().union(*fam)
        return (BigAnd(lf_terms(fam)),
                BigOr(BigAnd(lf_terms(fam, I)) for I in finite_subsets(U)))
    if variant == "v":
        S = fset(S)
        return Box(BigOr(S)), BigOr(Box(BigOr(I)) for I in finite_subsets(S))
    raise ValueError(f"unknown variant {variant!r}")


def derive_eq(variant: str, S=None, family=None) -> tuple[ProofTree, ProofTree]:
    """Proofs of lhs => rhs and rhs => lhs for the chosen equivalence."""
    lhs, rhs = eq_formulas(variant, S, family)
    if S is not None:
        S = fset(S)
    if variant == "o":
        fam = _fam(*family)
        U = frozenset().union(*fam)
        A = fset(BigAnd(s) for s in fam)
        inner = _rand(U, [], [U], lambda ch: axw(U, ch, ch[0]))
        fwd = _land([], [rhs], [A], _land([], [rhs], fam, inner))
        bwd = _land([], [lhs], [U], _rand(U, [], [A], lambda ch: _rand(
            U, [], [ch[0].items], lambda c2: axw(U, c2, c2[0]))))
        return fwd, bwd
    if variant == "i":
        nS = fset(Neg(x) for x in S)
        conj = BigAnd(S)

        def right(ch):
            psi = ch[0]
            goal = nS | {psi}
            return node("Rneg", [], goal, {"S": fset([psi])}, axw([psi], goal, psi))

        fwd = _ror([lhs], [], [nS], node("Lneg", [lhs], nS, {"S": fset([conj])},
                                         _rand([], nS, [S], right)))

        def left(ch):
            nphi = ch[0]
            phi = nphi.sub
            inner = _land([], [phi], [S], axw(S, [phi], phi))
            l = node("Lneg", [conj, nphi], [], {"S": fset([phi])}, inner)
            return node("Rneg", [nphi], [lhs], {"S": fset([conj])}, l)

        bwd = _lor([], [lhs], [nS], left)
        return fwd, bwd
    if variant == "ii":
        conj = BigAnd(S)
        bS = fset(Box(x) for x in S)
        fwd = _rand([lhs], [], [bS], lambda ch: _nec(
            [conj], _land([], [ch[0].sub], [S], axw(S, [ch[0].sub], ch[0].sub))))
        bwd = _land([], [lhs], [bS], _nec(S, _rand(S, [], [S], lambda ch: axw(S, ch, ch[0]))))
        return fwd, bwd
    if variant == "iii":
        fam = _fam(*family)
        B = fset(BigOr(s) for s in fam)
        D = fset(BigAnd(c) for c in choices(fam))

        def branch(ch):
            vals = fset(ch)
            conj = _rand(vals, [], [vals], lambda c2: axw(vals, c2, c2[0]))
            return weaken(conj, vals, D)

        fwd = _land([], [rhs], [B], _ror(B, [], [D], _lor([], D, fam, branch)))

        def back(ch):
            X = ch[0].items

            def one(c2):
                R = c2[0].items
                phi = _sorted(X & R)[0]
                return _land([], [c2[0]], [X], _ror(X, [], [R], axw(X, R, phi)))

            return _rand([ch[0]], [], [B], one)

        bwd = _lor([], [lhs], [D], back)
        return fwd, bwd
    if variant == "iv":
        fam = [frozenset(s) for s in family]
        U = frozenset().union(*fam)
        A = lf_terms(fam)
        Tset = fset(BigAnd(lf_terms(fam, I)) for I in finite_subsets(U))

        def branch(J):
            BJ = lf_terms(fam, J)
            conj = _rand(BJ, [], [BJ], lambda ch: axw(BJ, ch, ch[0]))
            return weaken(conj, BJ, Tset)

        lf = node("lf", A, Tset, {"family": tuple(fam)}, *[branch(J) for J in finite_subsets(U)])
        fwd = _land([], [rhs], [A], _ror(A, [], [Tset], lf))

        def back(ch):
            term = ch[0]
            BI = term.items

            def one(c2):
                goal = c2[0]
                m, disj = _box_count(goal)
                Sm = disj.items
                mine = next(b for b in BI if _box_count(b)[0] == m)
                I_m = _box_count(mine)[1].items
                pi = _lor([], Sm, [I_m], lambda c3: axw([c3[0]], Sm, c3[0]))
                pi = _ror([BigOr(I_m)], [], [Sm], pi)
                for k in range(m):
                    pi = _nec([boxn(k, BigOr(I_m))], pi)
                return _land([], [goal], [BI], weaken(pi, BI, [goal]))

            return _rand([term], [], [A], one)

        bwd = _lor([], [lhs], [Tset], back)
        return fwd, bwd
    if variant == "v":
        one_top = BigOr([TOP])
        R = fset(Box(BigOr(I)) for I in finite_subsets(S))
        top = node("Rand", [], [TOP], {"family": _fam(frozenset())})
        left = _ror([], [], [[TOP]], top)
        fam = [frozenset([TOP]), S]

        def branch(J):
            ante = lf_terms(fam, J)
            return axw(ante, R, Box(BigOr(J & S)))

        lf = node("lf", [one_top, lhs], R, {"family": tuple(fam)},
                  *[branch(J) for J in finite_subsets(frozenset().union(*fam))])
        right = _ror([one_top, lhs], [], [R], lf)
        fwd = node("Cut", [lhs], [rhs], {"S": fset([one_top])}, left, right)

        def back(ch):
            J = ch[0].sub.items
            inner = _lor([], S, [J], lambda c2: axw([c2[0]], S, c2[0]))
            return _nec([BigOr(J)], _ror([BigOr(J)], [], [S], inner))

        bwd = _lor([], [lhs], [R], back)
        return fwd, bwd
    raise ValueError(f"unknown variant {variant!r}")


# deduction ---------------------------------------------------------------------

@dataclass
class Deduction:
    proof: ProofTree
    gamma: frozenset  # the finite part of box* T that was needed


def deduction_transform(pi: ProofTree, T: CalculusParams) -> Deduction:
    """Rewrite a proof using theory axioms into one that assumes them instead.

    The result proves gamma, G => D with an empty theory, where gamma only
    holds formulas box^n(tau) for tau in the theory.
    """

    def go(p: ProofTree) -> tuple[ProofTree, frozenset]:
        c = p.conclusion
        if p.rule == "Ax":
            return p, frozenset()
        if p.rule == "TL":
            S = frozenset(p.params["S"])
            logical = fset(x for x in S if T.is_logical_axiom(x))
            theory = S - logical
            sub, g = go(p.premises[0])
            gamma = g | theory
            ante = c.ante | gamma
            if logical:
                return node("TL", ante, c.succ, {"S": logical}, sub), gamma
            return weaken(sub, ante, c.succ), gamma
        if p.rule == "Nec":
            sub, g = go(p.premises[0])
            S = frozenset(p.params["S"]) | g
            phi = next(iter(p.premises[0].conclusion.succ))
            sub = weaken(sub, S, [phi])
            return node("Nec", [Box(x) for x in S], [Box(phi)], {"S": S}, sub), fset(Box(x) for x in g)
        done = [go(q) for q in p.premises]
        gamma = frozenset().union(*(g for _, g in done))
        prems = [weaken(q, q.conclusion.ante | gamma, q.conclusion.succ) for q, _ in done]
        if not gamma and all(a is b for a, b in zip(prems, p.premises)):
            return p, gamma
        return ProofTree(Sequent(c.ante | gamma, c.succ), p.rule, p.params, tuple(prems)), gamma

    out, gamma = go(pi)
    return Deduction(out, gamma)


def _strip_to_theory(phi: Formula, theory) -> tuple[int, Formula]:
    n, x = 0, phi
    while x not in theory:
        if not isinstance(x, Box):
            raise ValueError(f"{phi.text()} is not box^n of a theory axiom")
        n, x = n + 1, x.sub
    return n, x


def prove_boxed_axiom(phi: Formula, T: CalculusParams) -> ProofTree:
    """=> box^n(tau) from tau in T via TL and n Nec steps."""
    n, tau = _strip_to_theory(phi, T.theory)
    pi = node("TL", [], [tau], {"S": fset([tau])}, ax(tau))
    for _ in range(n):
        pi = _nec([], pi)
    return pi


def discharge(d: Deduction, T: CalculusParams, target: Optional[Sequent] = None) -> ProofTree:
    """Turn a proof of gamma, G => D back into a proof of G => D using the theory."""
    c = d.proof.conclusion
    target = target or Sequent(c.ante - d.gamma, c.succ)
    S = d.gamma - target.ante
    if not S:
        return weaken(d.proof, target.ante, target.succ)
    left = [prove_boxed_axiom(x, T) for x in _sorted(S)]
    return node("Cut", target.ante, target.succ, {"S": S}, *left, d.proof)


# normal forms --------------------------------------------------------------------

NF_GUARD = 20_000


def _neg(x: Formula) -> Formula:
    return x.sub if isinstance(x, Neg) else Neg(x)


def _collapse(x: Formula) -> Formula:
    if isinstance(x, BigOr) and len(x.items) == 1:
        return next(iter(x.items))
    return x


def _simplify(fam) -> frozenset:
    out = []
    for S in fam:
        if TOP in S or any(Neg(x) in S for x in S):
            continue
        out.append(S)
    out.sort(key=len)
    keep: list = []
    for S in out:
        if not any(K <= S for K in keep):
            keep.append(S)
    return frozenset(keep)


def _disjuncts(b: Box) -> frozenset:
    return b.sub.items if isinstance(b.sub, BigOr) else frozenset([b.sub])


def _absorb(S) -> frozenset:
    """Drop box(or I) from a clause that also holds box(or J) with I a proper
    subset of J; the former implies the latter, so the disjunction is unchanged."""
    boxes = [(x, _disjuncts(x)) for x in S if isinstance(x, Box)]
    return fset(x for x in S
                if not isinstance(x, Box)
                or not any(_disjuncts(x) < J for _, J in boxes))


def normal_form(phi: Formula) -> frozenset:
    """A family F of sets of finitary formulas with phi equivalent to and{or S : S in F}."""
    memo: dict = {}

    def go(p):
        if p in memo:
            return memo[p]
        if isinstance(p, Var):
            r = frozenset([frozenset([p])])
        elif isinstance(p, BoxStar):
            raise ValueError("boxstar is an infinite conjunction and has no finitary normal form")
        elif isinstance(p, Neg):
            fam = _sorted_fam(go(p.sub))
            if _product_size(fam) > NF_GUARD:
                raise SizeGuard("normal form expansion too large")
            r = _simplify(frozenset(fset(_neg(x) for x in c))
                          for c in itertools.product(*[_sorted(s) for s in fam]))
        elif isinstance(p, Box):
            out = []
            for S in go(p.sub):
                S = _absorb(S)
                if len(S) > 12:
                    raise SizeGuard("normal form expansion too large")
                out.append(fset(Box(_collapse(BigOr(I))) for I in finite_subsets(S)))
            r = _simplify(out)
        elif isinstance(p, BigAnd):
            r = _simplify(frozenset().union(*(go(x) for x in p.items)))
        else:
            fams = [_sorted_fam(go(x)) for x in _sorted(p.items)]
            if _product_size(fams) > NF_GUARD:
                raise SizeGuard("normal form expansion too large")
            r = _simplify(frozenset().union(*c) for c in itertools.product(*fams))
        memo[p] = r
        return r

    return go(phi)


def _sorted_fam(fam):
    return sorted(fam, key=lambda s: sorted(x.text() for x in s))


def _product_size(fam) -> int:
    n = 1
    for s in fam:
        n *= len(s)
    return n


def reassemble(fam) -> Formula:
    return BigAnd(BigOr(S) for S in fam)


# semantics ---------------------------------------------------------------------

@dataclass
class Valid:
    frames: int
    valuations: int

    def __bool__(self):
        return True


@dataclass
class Countermodel:
    frame: Frame
    valuation: dict
    point: int

    def __bool__(self):
        return False


def schema_instances(T: CalculusParams, atoms: Iterable[str], depth: int = 0) -> list[Formula]:
    """Instances of the logic schemata with metavariables sent to small formulas."""
    pool = [Var(a) for a in sorted(atoms)] + [TOP, BOT]
    for _ in range(depth):
        nxt = list(pool)
        for x in pool:
            nxt.append(Neg(x))
            nxt.append(Box(x))
        pool = list(dict.fromkeys(nxt))
    out = []
    for chi in T.logic:
        mv = sorted(metavariables(chi))
        for vals in itertools.product(pool, repeat=len(mv)):
            out.append(substitute(chi, dict(zip(mv, vals))))
    return list(dict.fromkeys(out))


def sequent_formula(s: Sequent) -> Formula:
    return BigOr([Neg(BigAnd(s.ante)), BigOr(s.succ)])


def countermodel_search(s: Sequent, T: Optional[CalculusParams], frames,
                        cls: Optional[FrameClass] = None, depth: int = 0):
    """First valuation on the listed frames that satisfies the theory and the
    schema instances globally but falsifies the sequent somewhere."""
    T = T or CalculusParams()
    names = set()
    for f in s.formulas() | T.theory:
        names |= variables(f)
    if T.variables is not None:
        names |= T.variables
    instances = schema_instances(T, names, depth) if T.logic else []
    target = sequent_formula(s)
    total = 0
    nframes = 0
    for F in frames:
        if cls is not None and not check_class(F, cls):
            continue
        nframes += 1
        ev = BatchEvaluator(F, names)
        total += ev.count
        ok = np.ones(ev.count, dtype=bool)
        for x in list(T.theory) + instances:
            ok &= ev.valid(x)
        bad = ok & ~ev.valid(target)
        hits = np.flatnonzero(bad)
        if hits.size:
            row = int(hits[0])
            miss = ev.full & ~int(ev.mask(target)[row])
            point = F.points[(miss & -miss).bit_length() - 1]
            return Countermodel(F, ev.valuation(row), point)
    return Valid(nframes, total)


# file formats ------------------------------------------------------------------

def _params_to_json(rule, params) -> dict:
    out = {}
    if "S" in params:
        out["S"] = [f.text() for f in _sorted(params["S"])]
    if "family" in params:
        fam = params["family"] if rule == "lf" else sorted_family(params["family"])
        out["family"] = [[f.text() for f in _sorted(s)] for s in fam]
    return out


def proof_to_json(pi: ProofTree) -> dict:
    return {
        "rule": pi.rule,
        "conclusion": {"ante": [f.text() for f in _sorted(pi.conclusion.ante)],
                       "succ": [f.text() for f in _sorted(pi.conclusion.succ)]},
        "params": _params_to_json(pi.rule, pi.params),
        "premises": [proof_to_json(p) for p in pi.premises],
    }


def _params_from_json(rule, d) -> dict:
    out = {}
    if "S" in d:
        out["S"] = fset(parse_formula(t) for t in d["S"])
    if "family" in d:
        fam = [frozenset(parse_formula(t) for t in s) for s in d["family"]]
        out["family"] = tuple(fam) if rule == "lf" else tuple(sorted_family(fam))
    return out


def proof_from_json(d) -> ProofTree:
    if not isinstance(d, dict) or "rule" not in d or "conclusion" not in d:
        raise ParseError("proof node needs 'rule' and 'conclusion'")
    if d["rule"] not in RULES:
        raise ParseError(f"unknown rule {d['rule']!r}")
    c = d["conclusion"]
    seq = Sequent((parse_formula(t) for t in c.get("ante", [])),
                  (parse_formula(t) for t in c.get("succ", [])))
    return ProofTree(seq, d["rule"], _params_from_json(d["rule"], d.get("params", {})),
                     tuple(proof_from_json(p) for p in d.get("premises", [])))


def _list_text(xs) -> str:
    return "[" + " ".join(f.text() for f in _sorted(xs)) + "]"


def proof_to_text(pi: ProofTree) -> str:
    """One node per line, premises indented two spaces below their conclusion:
    ``Rule S=[..] family=[[..] [..]] : ante => succ``."""
    lines = []

    def go(p, depth):
        head = p.rule
        if "S" in p.params:
            head += " S=" + _list_text(p.params["S"])
        if "family" in p.params:
            fam = p.params["family"] if p.rule == "lf" else sorted_family(p.params["family"])
            head += " family=[" + " ".join(_list_text(s) for s in fam) + "]"
        lines.append("  " * depth + head + " : " + p.conclusion.text())
        for q in p.premises:
            go(q, depth + 1)

    go(pi, 0)
    return "\n".join(lines) + "\n"


class _LineScanner:
    def __init__(self, text, ln):
        self.text, self.ln, self.i = text, ln, 0

    def err(self, msg):
        raise ParseError(msg, self.ln, self.i + 1)

    def skip(self):
        while self.i < len(self.text) and self.text[self.i].isspace():
            self.i += 1

    def peek(self, s):
        self.skip()
        return self.text.startswith(s, self.i)

    def expect(self, s):
        if not self.peek(s):
            self.err(f"expected {s!r}")
        self.i += len(s)

    def word(self):
        self.skip()
        j = self.i
        while j < len(self.text) and (self.text[j].isalnum() or self.text[j] == "_"):
            j += 1
        if j == self.i:
            self.err("expected a name")
        w, self.i = self.text[self.i:j], j
        return w

    def formula(self):
        self.skip()
        try:
            f, end = parse_formula_at(self.text, self.i)
        except ParseError as e:
            raise ParseError(str(e).split(" (line")[0], self.ln, e.col) from None
        self.i = end
        return f

    def formula_list(self):
        self.expect("[")
        out = []
        while not self.peek("]"):
            if self.i >= len(self.text):
                self.err("unclosed '['")
            out.append(self.formula())
        self.expect("]")
        return out


def proof_from_text(text: str) -> ProofTree:
    stack: list = []  # (depth, rule, params, sequent, premises list)
    root = None
    for ln, raw in enumerate(text.splitlines(), 1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        indent = len(raw) - len(raw.lstrip(" "))
        if indent % 2:
            raise ParseError("indentation must be a multiple of two spaces", ln, 1)
        depth = indent // 2
        sc = _LineScanner(raw, ln)
        sc.i = indent
        rule = sc.word()
        if rule not in RULES:
            sc.i = indent
            sc.err(f"unknown rule {rule!r}")
        params: dict = {}
        while not sc.peek(":"):
            key = sc.word()
            sc.expect("=")
            if key == "S":
                params["S"] = fset(sc.formula_list())
            elif key == "family":
                sc.expect("[")
                fam = []
                while not sc.peek("]"):
                    fam.append(frozenset(sc.formula_list()))
                sc.expect("]")
                params["family"] = tuple(fam) if rule == "lf" else tuple(sorted_family(fam))
            else:
                sc.err(f"unknown parameter {key!r}")
        sc.expect(":")
        ante = []
        while not sc.peek("=>"):
            if sc.i >= len(raw.rstrip()):
                sc.err("expected '=>'")
            ante.append(sc.formula())
        sc.expect("=>")
        succ = []
        sc.skip()
        while sc.i < len(raw):
            succ.append(sc.formula())
            sc.skip()
        entry = [depth, rule, params, Sequent(ante, succ), []]
        if depth == 0:
            if root is not None:
                raise ParseError("a proof file holds exactly one tree", ln, 1)
            root = entry
        else:
            if root is None:
                raise ParseError("the first node must not be indented", ln, 1)
            while stack[-1][0] >= depth:
                _close(stack)
            if depth != stack[-1][0] + 1:
                raise ParseError("premise indented too deeply", ln, 1)
        stack.append(entry)
    if root is None:
        raise ParseError("empty proof")
    while len(stack) > 1:
        _close(stack)
    _, rule, params, seq, prems = root
    return ProofTree(seq, rule, params, tuple(prems))


def _close(stack):
    _, rule, params, seq, prems = stack.pop()
    stack[-1][4].append(ProofTree(seq, rule, params, tuple(prems)))


def parse_proof(text: str) -> ProofTree:
    s = text.lstrip()
    if s.startswith("{"):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(f"bad JSON: {e.msg}", e.lineno, e.colno) from None
        return proof_from_json(d)
    return proof_from_text(text)


def parse_sequent(text: str) -> Sequent:
    if "=>" not in text:
        raise ParseError("sequent needs '=>'", 1, 1)
    a, s = text.split("=>", 1)
    from .formula import parse_formulas
    return Sequent(parse_formulas(a), parse_formulas(s))
