"""Finite and lazy Kripke frames, cones, generated subframes and frame classes."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Optional


class FrameError(ValueError):
    pass


class Frame:
    """A finite set of integer points with a binary relation.

    Points are kept sorted; ``labels`` maps points to display strings and is
    not part of equality.
    """

    __slots__ = ("points", "edges", "labels", "_index", "_succ", "_hash")

    def __init__(self, points: Iterable[int] = (), edges: Iterable[tuple[int, int]] = (),
                 labels: Optional[dict[int, str]] = None):
        pts = list(points)
        for p in pts:
            if not isinstance(p, int) or isinstance(p, bool):
                raise FrameError(f"point id must be an integer: {p!r}")
        if len(set(pts)) != len(pts):
            dup = sorted(p for p in set(pts) if pts.count(p) > 1)
            raise FrameError(f"duplicate point id {dup[0]}")
        self.points: tuple[int, ...] = tuple(sorted(pts))
        self._index = {p: i for i, p in enumerate(self.points)}
        es = set()
        for e in edges:
            a, b = e
            if a not in self._index or b not in self._index:
                raise FrameError(f"dangling edge endpoint in {a}>{b}")
            es.add((a, b))
        self.edges: frozenset[tuple[int, int]] = frozenset(es)
        succ: dict[int, list[int]] = {p: [] for p in self.points}
        for a, b in sorted(es):
            succ[a].append(b)
        self._succ = {p: tuple(v) for p, v in succ.items()}
        lab = {}
        for p, s in (labels or {}).items():
            if p not in self._index:
                raise FrameError(f"label for unknown point {p}")
            if str(s) != str(p):
                lab[p] = str(s)
        self.labels: dict[int, str] = lab
        self._hash = hash((self.points, self.edges))

    # basic access
    def __len__(self) -> int:
        return len(self.points)

    def __contains__(self, p) -> bool:
        return p in self._index

    def __eq__(self, other) -> bool:
        if not isinstance(other, Frame):
            return NotImplemented
        return self.points == other.points and self.edges == other.edges

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        es = " ".join(f"{a}>{b}" for a, b in self.sorted_edges())
        return f"Frame(points={list(self.points)}, edges=[{es}])"

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def succ(self, p: int) -> tuple[int, ...]:
        return self._succ[p]

    def index(self, p: int) -> int:
        return self._index[p]

    def label(self, p: int) -> str:
        return self.labels.get(p, str(p))

    def rel(self, a: int, b: int) -> bool:
        return (a, b) in self.edges

    def succ_masks(self) -> list[int]:
        """Successor sets as bitmasks over point indices."""
        idx = self._index
        out = []
        for p in self.points:
            m = 0
            for q in self._succ[p]:
                m |= 1 << idx[q]
            out.append(m)
        return out

    def mask_of(self, pts: Iterable[int]) -> int:
        m = 0
        for p in pts:
            m |= 1 << self._index[p]
        return m

    def points_of(self, mask: int) -> frozenset[int]:
        return frozenset(p for i, p in enumerate(self.points) if mask >> i & 1)

    def with_labels(self, labels: dict[int, str]) -> "Frame":
        return Frame(self.points, self.edges, labels)


def new_frame(points: Iterable[int], edges: Iterable[tuple[int, int]],
              labels: Optional[dict[int, str]] = None) -> Frame:
    return Frame(points, edges, labels)


EMPTY = Frame()


# lazy frames ---------------------------------------------------------------

@dataclass(frozen=True)
class BoundExceeded:
    """Cone exploration stopped after seeing more than ``bound`` points."""
    frontier: frozenset
    bound: int


@dataclass
class LazyFrame:
    roots: tuple
    successors: Callable[[Hashable], Iterable[Hashable]]
    bound: int = 10_000

    @staticmethod
    def of(frame: Frame, bound: int = 10_000) -> "LazyFrame":
        return LazyFrame(tuple(frame.points), frame.succ, bound)


def _explore(start, successors, bound):
    seen = {start}
    queue = deque([start])
    while queue:
        p = queue.popleft()
        for q in successors(p):
            if q not in seen:
                seen.add(q)
                if len(seen) > bound:
                    return None, seen
                queue.append(q)
    return seen, seen


def cone(frame, w):
    """Points reachable from ``w`` by a (possibly empty) chain.

    For a LazyFrame whose cone outgrows its bound, a BoundExceeded holding the
    explored points is returned instead.
    """
    if isinstance(frame, LazyFrame):
        done, seen = _explore(w, frame.successors, frame.bound)
        if done is None:
            return BoundExceeded(frozenset(seen), frame.bound)
        return frozenset(done)
    if w not in frame:
        raise FrameError(f"unknown point {w}")
    done, _ = _explore(w, frame.succ, len(frame) + 1)
    return frozenset(done)


def closure(frame: Frame, seeds: Iterable[int]) -> frozenset[int]:
    out: set[int] = set()
    for s in seeds:
        if s not in frame:
            raise FrameError(f"unknown point {s}")
        if s not in out:
            out |= cone(frame, s)
    return frozenset(out)


def is_closed(frame: Frame, pts) -> bool:
    pts = set(pts)
    return all(q in pts for p in pts for q in frame.succ(p))


def restrict(frame: Frame, pts) -> Frame:
    pts = set(pts)
    return Frame(pts, [(a, b) for a, b in frame.edges if a in pts and b in pts],
                 {p: s for p, s in frame.labels.items() if p in pts})


def generated_subframe(frame: Frame, seeds):
    """Subframe on the union of the seeds' cones, with its inclusion."""
    from .morphism import PMorphism
    sub = restrict(frame, closure(frame, seeds))
    return sub, PMorphism(sub, frame, {p: p for p in sub.points})


def is_rooted(frame: Frame) -> bool:
    n = len(frame)
    return n > 0 and any(len(cone(frame, p)) == n for p in frame.points)


# disjoint unions and isomorphism --------------------------------------------

def disjoint_union(frames: list[Frame]):
    """Coproduct; point k of the result is tagged ``(i,p)`` in its label."""
    from .morphism import PMorphism
    pts, edges, labels, offs = [], [], {}, []
    off = 0
    for i, f in enumerate(frames):
        offs.append({p: off + j for j, p in enumerate(f.points)})
        for p in f.points:
            pts.append(offs[i][p])
            labels[offs[i][p]] = f"({i},{f.label(p)})"
        edges += [(offs[i][a], offs[i][b]) for a, b in f.edges]
        off += len(f)
    u = Frame(pts, edges, labels)
    return u, [PMorphism(f, u, offs[i]) for i, f in enumerate(frames)]


def _signature(frame: Frame):
    indeg = {p: 0 for p in frame.points}
    for _, b in frame.edges:
        indeg[b] += 1
    return {p: (len(frame.succ(p)), indeg[p], frame.rel(p, p), len(cone(frame, p)))
            for p in frame.points}


def is_isomorphic(F: Frame, G: Frame) -> Optional[dict[int, int]]:
    """A relation preserving and reflecting bijection F -> G, or None."""
    if len(F) != len(G) or len(F.edges) != len(G.edges):
        return None
    sf, sg = _signature(F), _signature(G)
    if sorted(sf.values()) != sorted(sg.values()):
        return None
    order = sorted(F.points, key=lambda p: (sum(1 for q in F.points if sf[q] == sf[p]), p))
    cands = {p: [q for q in G.points if sg[q] == sf[p]] for p in F.points}
    m: dict[int, int] = {}
    used: set[int] = set()

    def ok(p, q):
        for r, s in m.items():
            if F.rel(p, r) != G.rel(q, s) or F.rel(r, p) != G.rel(s, q):
                return False
        return F.rel(p, p) == G.rel(q, q)

    def bt(i):
        if i == len(order):
            return True
        p = order[i]
        for q in cands[p]:
            if q not in used and ok(p, q):
                m[p] = q
                used.add(q)
                if bt(i + 1):
                    return True
                del m[p]
                used.discard(q)
        return False

    return dict(m) if bt(0) else None


# frame classes --------------------------------------------------------------

TABLE = {
    "K": (),
    "K4": ("transitive",),
    "S4": ("reflexive", "transitive"),
    "S4.Lin": ("reflexive", "transitive", "locally-linear"),
    "Grz": ("reflexive", "transitive", "antisymmetric"),
    "Grz.Lin": ("reflexive", "transitive", "antisymmetric", "locally-linear"),
    "GL": ("irreflexive", "transitive"),
    "GL.Lin": ("irreflexive", "transitive", "locally-linear"),
}


@dataclass(frozen=True)
class Verdict:
    holds: bool
    condition: str = ""
    witness: tuple = ()

    def __bool__(self) -> bool:
        return self.holds

    def describe(self) -> str:
        if self.holds:
            return "holds"
        return f"fails: {self.condition} {self.witness}"


def _cond_reflexive(F):
    for p in F.points:
        if not F.rel(p, p):
            return ((p, p),)
    return None


def _cond_irreflexive(F):
    for p in F.points:
        if F.rel(p, p):
            return ((p, p),)
    return None


def _cond_transitive(F):
    for a in F.points:
        for b in F.succ(a):
            for c in F.succ(b):
                if not F.rel(a, c):
                    return ((a, b), (b, c), "missing", (a, c))
    return None


def _cond_antisymmetric(F):
    for a, b in F.sorted_edges():
        if a != b and F.rel(b, a):
            return ((a, b), (b, a))
    return None


def _cond_locally_linear(F):
    for w in F.points:
        for v1, v2 in itertools.combinations(F.succ(w), 2):
            if not F.rel(v1, v2) and not F.rel(v2, v1):
                return ((w, v1), (w, v2), "incomparable")
    return None


def _cond_functional(F):
    for p in F.points:
        if len(F.succ(p)) != 1:
            return (p, "successors", F.succ(p))
    return None


CONDITIONS = {
    "reflexive": _cond_reflexive,
    "irreflexive": _cond_irreflexive,
    "transitive": _cond_transitive,
    "antisymmetric": _cond_antisymmetric,
    "locally-linear": _cond_locally_linear,
    "functional": _cond_functional,
}


@dataclass(frozen=True)
class Atom:
    """``R(x,y)`` or ``x=y`` over clause variables."""
    kind: str  # "R" or "="
    left: str
    right: str

    def __str__(self):
        return f"R({self.left},{self.right})" if self.kind == "R" else f"{self.left}={self.right}"


@dataclass(frozen=True)
class Clause:
    """Universal Horn clause ``body -> head``; a None head means falsum."""
    body: tuple[Atom, ...]
    head: Optional[Atom]

    def variables(self) -> list[str]:
        vs = []
        for a in self.body + ((self.head,) if self.head else ()):
            for v in (a.left, a.right):
                if v not in vs:
                    vs.append(v)
        return vs

    def __str__(self):
        body = ", ".join(map(str, self.body))
        return f"{body} -> {self.head if self.head else 'false'}".strip()


def _holds_atom(F, a: Atom, env) -> bool:
    x, y = env[a.left], env[a.right]
    return F.rel(x, y) if a.kind == "R" else x == y


def check_horn(F: Frame, clauses) -> Optional[tuple]:
    for i, c in enumerate(clauses):
        vs = c.variables()
        for vals in itertools.product(F.points, repeat=len(vs)):
            env = dict(zip(vs, vals))
            if all(_holds_atom(F, a, env) for a in c.body):
                if c.head is None or not _holds_atom(F, c.head, env):
                    return (f"clause {i}: {c}", tuple(sorted(env.items())))
    return None


@dataclass(frozen=True)
class FrameClass:
    """Membership predicate for finite frames.

    kind is one of ``table``, ``functional``, ``sub``, ``horn``, ``all`` or
    ``listed`` (frames isomorphic to one of a fixed finite list).
    """
    kind: str
    name: str = ""
    frame: Optional[Frame] = None
    clauses: tuple = ()
    frames: tuple = ()
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    @staticmethod
    def table(name: str) -> "FrameClass":
        if name == "D":
            return FrameClass.functional()
        if name not in TABLE:
            raise FrameError(f"unknown logic {name!r}")
        return FrameClass("table", name)

    @staticmethod
    def functional() -> "FrameClass":
        return FrameClass("functional", "D")

    @staticmethod
    def subreductions_of(V: Frame, name: str = "") -> "FrameClass":
        return FrameClass("sub", name or "sub-of", frame=V)

    @staticmethod
    def horn(clauses, name: str = "horn") -> "FrameClass":
        return FrameClass("horn", name, clauses=tuple(clauses))

    @staticmethod
    def all() -> "FrameClass":
        return FrameClass("all", "All")

    @staticmethod
    def listed(frames, name: str = "listed") -> "FrameClass":
        return FrameClass("listed", name, frames=tuple(frames))

    def __str__(self) -> str:
        return self.name or self.kind

    @property
    def universal(self) -> bool:
        """Membership is preserved by removing points (universal first-order)."""
        return self.kind in ("table", "horn", "all")

    def rooted_size_cap(self) -> Optional[int]:
        """Upper bound on the size of rooted members, when one is known."""
        if self.kind == "sub":
            return len(self.frame)
        if self.kind == "listed":
            return max((len(f) for f in self.frames), default=0)
        return None

    def size_cap(self) -> Optional[int]:
        if self.kind == "listed":
            return max((len(f) for f in self.frames), default=0)
        return None

    def subreductions(self) -> list[Frame]:
        if "subs" not in self._cache:
            from .morphism import enumerate_subreductions
            self._cache["subs"] = enumerate_subreductions(self.frame)
        return self._cache["subs"]


def check_class(F: Frame, cls: FrameClass) -> Verdict:
    if cls.kind == "all":
        return Verdict(True)
    if cls.kind in ("table", "functional"):
        conds = ("functional",) if cls.kind == "functional" else TABLE[cls.name]
        for c in conds:
            w = CONDITIONS[c](F)
            if w is not None:
                return Verdict(False, c, w)
        return Verdict(True)
    if cls.kind == "horn":
        w = check_horn(F, cls.clauses)
        return Verdict(True) if w is None else Verdict(False, w[0], w[1])
    if cls.kind == "sub":
        subs = cls.subreductions()
        for p in F.points:
            c = restrict(F, cone(F, p))
            if not any(is_isomorphic(c, s) for s in subs):
                return Verdict(False, "cone is not a subreduction", (p, tuple(sorted(c.points))))
        return Verdict(True)
    if cls.kind == "listed":
        if len(F) == 0 or any(is_isomorphic(F, g) for g in cls.frames):
            return Verdict(True)
        return Verdict(False, "not listed", ())
    raise FrameError(f"unknown class kind {cls.kind}")


# text and JSON encodings ----------------------------------------------------

def _tok_int(tok: str, line: int, col: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"bad point id {tok!r}", line, col) from None


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{msg} (line {line}, column {col})" if line else msg)
        self.line, self.col = line, col


def _fields(text: str):
    """Yield (key, [(token, line, col)]) for ``key: tok tok`` lines."""
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if ":" not in line:
            raise ParseError("expected 'key: value'", ln, 1)
        key, rest = line.split(":", 1)
        base = len(key) + 2
        toks = []
        col = 0
        for t in rest.split():
            col = rest.index(t, col)
            toks.append((t, ln, base + col))
            col += len(t)
        yield key.strip(), toks, rest.strip(), ln


def _label_text(s: str) -> str:
    import json
    return json.dumps(s) if (not s or any(c.isspace() for c in s) or s.startswith('"')) else s


def frame_to_text(F: Frame) -> str:
    lines = ["points: " + " ".join(map(str, F.points)),
             "edges: " + " ".join(f"{a}>{b}" for a, b in F.sorted_edges())]
    if F.labels:
        lines.append("labels: " + " ".join(f"{p}={_label_text(F.labels[p])}" for p in sorted(F.labels)))
    return "\n".join(line.rstrip() for line in lines) + "\n"


def frame_to_json(F: Frame) -> dict:
    d = {"points": list(F.points), "edges": [list(e) for e in F.sorted_edges()]}
    if F.labels:
        d["labels"] = {str(p): F.labels[p] for p in sorted(F.labels)}
    return d


def frame_from_json(d: dict) -> Frame:
    try:
        labels = {int(k): v for k, v in d.get("labels", {}).items()}
        return Frame(d["points"], [tuple(e) for e in d["edges"]], labels)
    except (KeyError, TypeError) as e:
        raise ParseError(f"bad frame JSON: {e}") from None


def _split_labels(rest: str, ln: int):
    import json
    out = {}
    i = 0
    while i < len(rest):
        if rest[i].isspace():
            i += 1
            continue
        j = rest.index("=", i) if "=" in rest[i:] else -1
        if j < 0:
            raise ParseError("expected id=label", ln, i + 1)
        p = _tok_int(rest[i:j], ln, i + 1)
        k = j + 1
        if k < len(rest) and rest[k] == '"':
            dec = json.JSONDecoder()
            s, end = dec.raw_decode(rest, k)
            out[p] = s
            i = end
        else:
            end = k
            while end < len(rest) and not rest[end].isspace():
                end += 1
            out[p] = rest[k:end]
            i = end
    return out


def parse_frame_text(text: str) -> Frame:
    pts, edges, labels = None, [], {}
    for key, toks, rest, ln in _fields(text):
        if key == "points":
            pts = [_tok_int(t, l, c) for t, l, c in toks]
        elif key == "edges":
            for t, l, c in toks:
                if t.count(">") != 1:
                    raise ParseError(f"malformed edge token {t!r}", l, c)
                a, b = t.split(">")
                edges.append((_tok_int(a, l, c), _tok_int(b, l, c + len(a) + 1)))
        elif key == "labels":
            labels = _split_labels(rest, ln)
        else:
            raise ParseError(f"unknown key {key!r}", ln, 1)
    if pts is None:
        raise ParseError("missing 'points:' line")
    try:
        return Frame(pts, edges, labels)
    except FrameError as e:
        raise ParseError(str(e)) from None


def parse_frame(text: str) -> Frame:
    import json
    s = text.lstrip()
    if s.startswith("{"):
        try:
            return frame_from_json(json.loads(s))
        except json.JSONDecodeError as e:
            raise ParseError(f"bad JSON: {e.msg}", e.lineno, e.colno) from None
    return parse_frame_text(text)


def parse_clauses(text: str) -> list[Clause]:
    """One clause per line: ``R(x,y), R(y,z) -> R(x,z)``; ``false`` as head."""
    import re
    atom_re = re.compile(r"R\(\s*(\w+)\s*,\s*(\w+)\s*\)|(\w+)\s*=\s*(\w+)")

    def atoms(s, ln):
        found, rest = [], s
        for m in atom_re.finditer(s):
            found.append(Atom("R", m.group(1), m.group(2)) if m.group(1)
                         else Atom("=", m.group(3), m.group(4)))
        rest = atom_re.sub("", s).replace(",", "")
        if rest.strip():
            raise ParseError(f"bad atom text {rest.strip()!r}", ln, s.find(rest.strip()[0]) + 1)
        return tuple(found)

    out = []
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        body, arrow, head = line.rpartition("->")
        if not arrow:
            body, head = "", line
        head = head.strip()
        if head == "false":
            h = None
        else:
            hs = atoms(head, ln)
            if len(hs) != 1:
                raise ParseError("clause head must be one atom", ln, 1)
            h = hs[0]
        out.append(Clause(atoms(body, ln), h))
    return out


def clauses_to_text(clauses) -> str:
    return "".join(str(c).lstrip() + "\n" for c in clauses)
