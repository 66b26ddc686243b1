"""Set-based modal formulas, their s-expression syntax, and schema matching."""

from __future__ import annotations

from typing import Iterable, Optional

from .frame import ParseError


class Formula:
    __slots__ = ("_hash", "_text")

    def text(self) -> str:
        t = getattr(self, "_text", None)
        if t is None:
            t = self._render()
            object.__setattr__(self, "_text", t)
        return t

    def __lt__(self, other: "Formula") -> bool:
        return self.text() < other.text()

    def __str__(self) -> str:
        return self.text()

    def __repr__(self) -> str:
        return f"<{self.text()}>"

    def __hash__(self) -> int:
        h = getattr(self, "_hash", None)
        if h is None:
            h = hash((type(self).__name__, self._key()))
            object.__setattr__(self, "_hash", h)
        return h

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if type(self) is not type(other) or hash(self) != hash(other):
            return False
        return self._key() == other._key()


class Var(Formula):
    __slots__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)

    def _key(self):
        return self.name

    def _render(self):
        return f"(var {self.name})"


class _Unary(Formula):
    __slots__ = ("sub",)
    tag = ""

    def __init__(self, sub: Formula):
        object.__setattr__(self, "sub", sub)

    def _key(self):
        return self.sub

    def _render(self):
        return f"({self.tag} {self.sub.text()})"


class Neg(_Unary):
    __slots__ = ()
    tag = "not"

    def _render(self):
        s = self.sub
        if isinstance(s, Box) and isinstance(s.sub, Neg):
            return f"(dia {s.sub.sub.text()})"
        return super()._render()


class Box(_Unary):
    __slots__ = ()
    tag = "box"


class BoxStar(_Unary):
    """The countable conjunction of all box^n of its argument."""
    __slots__ = ()
    tag = "boxstar"


class _Big(Formula):
    __slots__ = ("items",)
    tag = ""
    empty = ""

    def __init__(self, items: Iterable[Formula] = ()):
        object.__setattr__(self, "items", frozenset(items))

    def _key(self):
        return self.items

    def sorted_items(self) -> list[Formula]:
        return sorted(self.items, key=Formula.text)

    def _render(self):
        if not self.items:
            return f"({self.empty})"
        return f"({self.tag} " + " ".join(x.text() for x in self.sorted_items()) + ")"


class BigAnd(_Big):
    __slots__ = ()
    tag, empty = "and", "top"


class BigOr(_Big):
    __slots__ = ()
    tag, empty = "or", "bot"


TOP = BigAnd()
BOT = BigOr()


def dia(p: Formula) -> Formula:
    return Neg(Box(Neg(p)))


def imp(p: Formula, q: Formula) -> Formula:
    return BigOr([Neg(p), q])


def iff(p: Formula, q: Formula) -> Formula:
    return BigAnd([imp(p, q), imp(q, p)])


def boxn(k: int, p: Formula) -> Formula:
    for _ in range(k):
        p = Box(p)
    return p


def conj(*ps: Formula) -> Formula:
    return BigAnd(ps)


def disj(*ps: Formula) -> Formula:
    return BigOr(ps)


def variables(p: Formula) -> frozenset[str]:
    out: set[str] = set()
    stack = [p]
    while stack:
        x = stack.pop()
        if isinstance(x, Var):
            out.add(x.name)
        elif isinstance(x, _Unary):
            stack.append(x.sub)
        else:
            stack.extend(x.items)
    return frozenset(out)


def depth(p: Formula) -> int:
    if isinstance(p, Var):
        return 0
    if isinstance(p, _Unary):
        return 1 + depth(p.sub)
    return 1 + max((depth(x) for x in p.items), default=0)


def box_depth(p: Formula) -> int:
    if isinstance(p, Var):
        return 0
    if isinstance(p, (Box, BoxStar)):
        return 1 + box_depth(p.sub)
    if isinstance(p, Neg):
        return box_depth(p.sub)
    return max((box_depth(x) for x in p.items), default=0)


def substitute(p: Formula, sigma: dict[str, Formula]) -> Formula:
    """Simultaneous substitution of formulas for variable names."""
    if isinstance(p, Var):
        return sigma.get(p.name, p)
    if isinstance(p, _Unary):
        return type(p)(substitute(p.sub, sigma))
    return type(p)(substitute(x, sigma) for x in p.items)


def rename(p: Formula, f) -> Formula:
    return substitute(p, {v: Var(f(v)) for v in variables(p)})


# s-expressions -------------------------------------------------------------------

def _tokens(text: str):
    line, col, i = 1, 1, 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line, col, i = line + 1, 1, i + 1
            continue
        if c.isspace() or c == ",":
            i, col = i + 1, col + 1
            continue
        if c in "()":
            yield c, line, col, i
            i, col = i + 1, col + 1
            continue
        j = i
        while j < n and not text[j].isspace() and text[j] not in "(),":
            j += 1
        yield text[i:j], line, col, i
        col += j - i
        i = j


class _Reader:
    def __init__(self, text: str, start: int = 0):
        self.text = text
        self.toks = [t for t in _tokens(text) if t[3] >= start]
        self.k = 0

    def peek(self):
        return self.toks[self.k] if self.k < len(self.toks) else None

    def next(self):
        t = self.peek()
        if t is None:
            raise ParseError("unexpected end of input", *self._end())
        self.k += 1
        return t

    def _end(self):
        lines = self.text.split("\n")
        return len(lines), len(lines[-1]) + 1

    def offset(self) -> int:
        t = self.peek()
        return t[3] if t else len(self.text)

    def sexp(self):
        tok, line, col, _ = self.next()
        if tok == ")":
            raise ParseError("unexpected ')'", line, col)
        if tok != "(":
            return tok, line, col
        items = []
        while True:
            t = self.peek()
            if t is None:
                raise ParseError("unclosed '('", line, col)
            if t[0] == ")":
                self.next()
                return items, line, col
            items.append(self.sexp())


def _formula(node) -> Formula:
    val, line, col = node
    if not isinstance(val, list):
        raise ParseError(f"expected '(' before {val!r}", line, col)
    if not val:
        raise ParseError("empty form", line, col)
    head, hl, hc = val[0]
    args = val[1:]
    if isinstance(head, list):
        raise ParseError("form must start with an operator name", hl, hc)

    def arity(k):
        if len(args) != k:
            raise ParseError(f"'{head}' takes {k} argument(s), got {len(args)}", line, col)

    if head == "var":
        arity(1)
        name = args[0][0]
        if isinstance(name, list):
            raise ParseError("variable name expected", args[0][1], args[0][2])
        return Var(name)
    if head in ("not", "box", "dia", "boxstar"):
        arity(1)
        sub = _formula(args[0])
        return {"not": Neg, "box": Box, "boxstar": BoxStar, "dia": dia}[head](sub)
    if head in ("and", "or"):
        subs = [_formula(a) for a in args]
        return BigAnd(subs) if head == "and" else BigOr(subs)
    if head in ("top", "bot"):
        arity(0)
        return TOP if head == "top" else BOT
    if head in ("imp", "iff"):
        arity(2)
        a, b = _formula(args[0]), _formula(args[1])
        return imp(a, b) if head == "imp" else iff(a, b)
    if head == "boxn":
        arity(2)
        k = args[0][0]
        if isinstance(k, list) or not k.isdigit():
            raise ParseError("boxn expects a natural number", args[0][1], args[0][2])
        return boxn(int(k), _formula(args[1]))
    raise ParseError(f"unknown operator {head!r}", hl, hc)


def parse_formula(text: str) -> Formula:
    r = _Reader(text)
    node = r.sexp()
    t = r.peek()
    if t is not None:
        raise ParseError(f"trailing input {t[0]!r}", t[1], t[2])
    return _formula(node)


def parse_formula_at(text: str, start: int) -> tuple[Formula, int]:
    """Parse one formula beginning at offset ``start``; return it and the end offset."""
    r = _Reader(text, start)
    f = _formula(r.sexp())
    return f, r.offset()


def parse_formulas(text: str) -> list[Formula]:
    r = _Reader(text)
    out = []
    while r.peek() is not None:
        out.append(_formula(r.sexp()))
    return out


def print_formula(p: Formula) -> str:
    return p.text()


# schemata ----------------------------------------------------------------------

def is_metavar(p: Formula) -> bool:
    return isinstance(p, Var) and p.name.startswith("?")


def metavariables(chi: Formula) -> frozenset[str]:
    return frozenset(v for v in variables(chi) if v.startswith("?"))


def instantiate_schema(chi: Formula, sigma: dict[str, Formula]) -> Formula:
    missing = metavariables(chi) - set(sigma)
    if missing:
        raise KeyError(f"unbound metavariable {sorted(missing)[0]}")
    return substitute(chi, sigma)


def matches_schema(p: Formula, chi: Formula) -> Optional[dict[str, Formula]]:
    """A substitution sigma with chi[sigma] = p syntactically, or None."""
    for s in _match(chi, p, {}):
        return dict(s)
    return None


def _match(pat: Formula, p: Formula, env: dict):
    if is_metavar(pat):
        bound = env.get(pat.name)
        if bound is None:
            e = dict(env)
            e[pat.name] = p
            yield e
        elif bound == p:
            yield env
        return
    if type(pat) is not type(p):
        return
    if isinstance(pat, Var):
        if pat.name == p.name:
            yield env
        return
    if isinstance(pat, _Unary):
        yield from _match(pat.sub, p.sub, env)
        return
    # set patterns: every pattern element maps onto some item, every item is hit
    pats = pat.sorted_items()
    items = p.sorted_items()
    if len(pats) < len(items) or (items == [] and pats):
        return

    def go(k, env, hit):
        if k == len(pats):
            if len(hit) == len(items):
                yield env
            return
        for idx, it in enumerate(items):
            for e in _match(pats[k], it, env):
                yield from go(k + 1, e, hit | {idx})

    yield from go(0, env, frozenset())


def _schema(text: str) -> Formula:
    return parse_formula(text)


P, P1, P2 = "(var ?p)", "(var ?p1)", "(var ?p2)"


def _plus(x: str) -> str:
    return f"(and {x} (box {x}))"


AXIOMS = {
    "K4": f"(imp (box {P}) (box (box {P})))",
    "T": f"(imp (box {P}) {P})",
    "Lin": f"(or (box (imp (box {P1}) {P2})) (box (imp (box {P2}) {P1})))",
    "Grz": f"(imp (box (imp (box (imp {P} (box {P}))) {P})) {P})",
    "GL": f"(imp (box (imp (box {P}) {P})) (box {P}))",
    "LinPlus": (f"(or {_plus(f'(imp {_plus(P1)} {P2})')} "
                f"{_plus(f'(imp {_plus(P2)} {P1})')})"),
    "D": f"(iff (dia {P}) (box {P}))",
}

LOGIC_AXIOMS = {
    "K": [],
    "K4": ["K4"],
    "S4": ["K4", "T"],
    "S4.Lin": ["K4", "T", "Lin"],
    "Grz": ["K4", "T", "Grz"],
    "Grz.Lin": ["K4", "T", "Lin", "Grz"],
    "GL": ["K4", "GL"],
    "GL.Lin": ["K4", "GL", "LinPlus"],
    "D": ["D"],
}


def logic_schemata(name: str) -> list[Formula]:
    if name not in LOGIC_AXIOMS:
        raise KeyError(f"unknown logic {name!r}")
    return [_schema(AXIOMS[a]) for a in LOGIC_AXIOMS[name]]
