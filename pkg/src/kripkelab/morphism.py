"""p-morphisms: validation, enumeration, images, subreductions, classification."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Iterator, Optional

from .frame import (Frame, FrameClass, FrameError, ParseError, _fields, is_closed,
                    is_isomorphic, parse_frame, restrict)


class MorphismError(ValueError):
    def __init__(self, condition: str, witness: tuple, msg: str = ""):
        super().__init__(msg or f"{condition} violation at {witness}")
        self.condition = condition
        self.witness = witness


class PMorphism:
    """A point map between frames; built unchecked, see ``validate``."""

    __slots__ = ("source", "target", "images", "_hash")

    def __init__(self, source: Frame, target: Frame, mapping):
        self.source = source
        self.target = target
        if isinstance(mapping, dict):
            try:
                self.images = tuple(mapping[p] for p in source.points)
            except KeyError as e:
                raise MorphismError("totality", (e.args[0],), f"map undefined at {e.args[0]}") from None
        else:
            self.images = tuple(mapping)
            if len(self.images) != len(source):
                raise MorphismError("totality", (), "map length differs from source size")
        self._hash = hash((source, target, self.images))

    @property
    def map(self) -> dict[int, int]:
        return dict(zip(self.source.points, self.images))

    def __call__(self, p: int) -> int:
        return self.images[self.source.index(p)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PMorphism):
            return NotImplemented
        return (self.images == other.images and self.source == other.source
                and self.target == other.target)

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return "PMorphism(" + " ".join(f"{p}>{q}" for p, q in self.map.items()) + ")"

    def image_set(self) -> frozenset[int]:
        return frozenset(self.images)

    @property
    def injective(self) -> bool:
        return len(set(self.images)) == len(self.images)

    @property
    def surjective(self) -> bool:
        return len(set(self.images)) == len(self.target)


def violation(f: PMorphism) -> Optional[tuple[str, tuple]]:
    W, V = f.source, f.target
    m = f.map
    for p, q in m.items():
        if q not in V:
            return "codomain", (p, q)
    for a, b in W.sorted_edges():
        if not V.rel(m[a], m[b]):
            return "stability", (a, b)
    for w in W.points:
        img = {m[x] for x in W.succ(w)}
        for v in V.succ(m[w]):
            if v not in img:
                return "openness", (w, v)
    return None


def validate(mapping, W: Frame, V: Frame) -> PMorphism:
    f = mapping if isinstance(mapping, PMorphism) else PMorphism(W, V, mapping)
    bad = violation(f)
    if bad:
        raise MorphismError(*bad)
    return f


def is_pmorphism(f: PMorphism) -> bool:
    return violation(f) is None


def identity(F: Frame) -> PMorphism:
    return PMorphism(F, F, F.points)


def compose(g: PMorphism, f: PMorphism) -> PMorphism:
    """g after f."""
    if f.target != g.source:
        raise FrameError("frame mismatch: codomain of f is not the domain of g")
    gm = g.map
    return PMorphism(f.source, g.target, tuple(gm[q] for q in f.images))


def image(f: PMorphism):
    """(Im f, e: W->Im f, m: Im f->V) with m after e equal to f."""
    im = restrict(f.target, f.image_set())
    return im, PMorphism(f.source, im, f.images), PMorphism(im, f.target, im.points)


# enumeration ----------------------------------------------------------------

ENUM_GUARD = 10 ** 15


@lru_cache(maxsize=200_000)
def hom_indices(W: Frame, V: Frame) -> tuple[tuple[int, ...], ...]:
    """All p-morphisms W->V as tuples of target indices, lexicographic."""
    n, k = len(W), len(V)
    if n == 0:
        return ((),)
    if k == 0:
        return ()
    if k ** n > ENUM_GUARD:
        from .catalog import SizeGuardError
        raise SizeGuardError(f"search space {k}^{n} exceeds guard")
    ws = W.succ_masks()
    vs = V.succ_masks()
    wsucc = [[j for j in range(n) if ws[i] >> j & 1] for i in range(n)]
    wpred = [[j for j in range(n) if ws[j] >> i & 1] for i in range(n)]
    wrefl = [ws[i] >> i & 1 for i in range(n)]
    vrefl = [vs[j] >> j & 1 for j in range(k)]
    # points whose neighbourhood is fully assigned once position i is set
    ready = [[] for _ in range(n)]
    for i in range(n):
        last = max([i] + wsucc[i])
        ready[last].append(i)
    cands = []
    for i in range(n):
        c = [j for j in range(k)
             if (ws[i] == 0) == (vs[j] == 0) and (not wrefl[i] or vrefl[j])]
        cands.append(c)
    out = []
    f = [0] * n

    def bt(i):
        if i == n:
            out.append(tuple(f))
            return
        for j in cands[i]:
            ok = True
            for x in wsucc[i]:
                if x < i and not vs[j] >> f[x] & 1:
                    ok = False
                    break
            if ok:
                for x in wpred[i]:
                    if x < i and not vs[f[x]] >> j & 1:
                        ok = False
                        break
            if not ok:
                continue
            f[i] = j
            good = True
            for w in ready[i]:
                img = 0
                for x in wsucc[w]:
                    img |= 1 << f[x]
                if img != vs[f[w]]:
                    good = False
                    break
            if good:
                bt(i + 1)

    bt(0)
    return tuple(out)


def enumerate_pmorphisms(W: Frame, V: Frame) -> list[PMorphism]:
    vp = V.points
    return [PMorphism(W, V, tuple(vp[j] for j in t)) for t in hom_indices(W, V)]


def set_partitions(items: list) -> Iterator[list[list]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def quotient_by(W: Frame, rep: dict[int, int]):
    """Quotient frame on representatives with the image relation, and q."""
    pts = sorted(set(rep.values()))
    edges = {(rep[a], rep[b]) for a, b in W.edges}
    Q = Frame(pts, edges)
    return Q, PMorphism(W, Q, rep)


def quotients(W: Frame) -> list[tuple[Frame, PMorphism]]:
    """Every surjective p-morphism out of W, up to equality of kernels.

    Surjective p-morphisms correspond to partitions whose blocks agree on the
    set of successor blocks; representatives are least point ids.
    """
    if len(W) > 10:
        from .catalog import SizeGuardError
        raise SizeGuardError("quotient enumeration capped at 10 points")
    out = []
    for part in set_partitions(list(W.points)):
        rep = {}
        for block in part:
            r = min(block)
            for p in block:
                rep[p] = r
        sig = {}
        ok = True
        for p in W.points:
            s = frozenset(rep[q] for q in W.succ(p))
            r = rep[p]
            if sig.setdefault(r, s) != s:
                ok = False
                break
        if ok:
            out.append(quotient_by(W, rep))
    out.sort(key=lambda t: (len(t[0]), t[1].images))
    return out


def generated_subsets(V: Frame) -> list[frozenset[int]]:
    n = len(V)
    if n > 16:
        from .catalog import SizeGuardError
        raise SizeGuardError("generated subframe enumeration capped at 16 points")
    out = []
    for m in range(1 << n):
        pts = V.points_of(m)
        if is_closed(V, pts):
            out.append(pts)
    return out


def enumerate_subreductions(V: Frame, include_empty: bool = False) -> list[Frame]:
    """p-morphic images of generated subframes of V, one per isomorphism class.

    The empty frame is a subreduction of every frame; it is left out unless
    ``include_empty`` is set.
    """
    found: list[Frame] = []
    for pts in generated_subsets(V):
        if not pts and not include_empty:
            continue
        G = restrict(V, pts)
        for Q, _ in quotients(G):
            if not any(len(Q) == len(R) and is_isomorphic(Q, R) is not None for R in found):
                found.append(Q)
    found.sort(key=lambda F: (-len(F), len(F.edges), F.points, F.sorted_edges()))
    return found


# classification ---------------------------------------------------------------

CERTIFIED, REFUTED, INCONCLUSIVE = "certified", "refuted", "inconclusive"


@dataclass
class Status:
    kind: str
    bound: int = 0
    witness: Any = None
    exhaustive: bool = False
    note: str = ""

    def __str__(self) -> str:
        extra = " (exhaustive)" if self.exhaustive and self.kind == CERTIFIED else ""
        if self.kind == CERTIFIED and not self.exhaustive:
            extra = f" up to bound {self.bound}"
        if self.kind == INCONCLUSIVE:
            extra = f" at bound {self.bound}"
        return f"{self.kind}{extra}" + (f"; {self.note}" if self.note else "")


@dataclass
class Classification:
    injective: bool
    surjective: bool
    mono: Status
    regepi: Status

    @property
    def epi(self) -> bool:
        return self.surjective


@dataclass
class MonoWitness:
    """A pair g != h: U -> W with f g = f h."""
    U: Frame
    g: PMorphism
    h: PMorphism


def mono_refutation(f: PMorphism, cls: FrameClass, bound: int) -> Optional[MonoWitness]:
    from .catalog import rooted_members
    W = f.source
    fi = [f.target.index(q) for q in f.images]
    wp = W.points
    for n in range(1, bound + 1):
        for U in rooted_members(cls, n):
            seen: dict[tuple, tuple] = {}
            for g in hom_indices(U, W):
                key = tuple(fi[x] for x in g)
                other = seen.setdefault(key, g)
                if other != g:
                    return MonoWitness(U, PMorphism(U, W, [wp[x] for x in other]),
                                       PMorphism(U, W, [wp[x] for x in g]))
    return None


def classify(f: PMorphism, cls: FrameClass, bound: int) -> Classification:
    from .cat import wide_coequalizer, cokernel_pair
    inj, surj = f.injective, f.surjective
    cap = cls.rooted_size_cap()
    exhaustive = cap is not None and bound >= cap
    if inj:
        mono = Status(CERTIFIED, bound, exhaustive=True, note="injective")
    else:
        w = mono_refutation(f, cls, bound)
        if w is not None:
            mono = Status(REFUTED, bound, w)
        else:
            mono = Status(CERTIFIED, bound, exhaustive=exhaustive)
    if not surj:
        ck = cokernel_pair(f)
        missing = min(set(f.target.points) - f.image_set())
        regepi = Status(REFUTED, bound, ck, exhaustive=True,
                        note=f"not surjective: cokernel legs differ at {missing}")
    else:
        Q, q = wide_coequalizer(f, cls, bound)
        if _same_kernel(q, f):
            regepi = Status(CERTIFIED, bound, q, exhaustive=True)
        elif exhaustive:
            regepi = Status(REFUTED, bound, q, exhaustive=True,
                            note="joint coequalizer over all rooted class frames is finer than f")
        elif bound - 1 >= len(f.source) and _same_kernel(q, wide_coequalizer(f, cls, bound - 1)[1]):
            regepi = Status(REFUTED, bound, q, note=f"heuristic: quotient stable across bounds {bound - 1} and {bound}")
        else:
            regepi = Status(INCONCLUSIVE, bound, q)
    return Classification(inj, surj, mono, regepi)


def kernel(f: PMorphism) -> frozenset[frozenset[int]]:
    blocks: dict[int, set[int]] = {}
    for p, q in f.map.items():
        blocks.setdefault(q, set()).add(p)
    return frozenset(frozenset(b) for b in blocks.values())


def _same_kernel(a: PMorphism, b: PMorphism) -> bool:
    return kernel(a) == kernel(b)


# file format --------------------------------------------------------------------

def _load_ref(ref, base: str) -> tuple[Frame, Any]:
    if isinstance(ref, dict):
        from .frame import frame_from_json
        return frame_from_json(ref), ref
    from .catalog import NAMED
    if isinstance(ref, str) and ref.startswith("@"):
        if ref[1:] not in NAMED:
            raise ParseError(f"unknown named frame {ref}")
        return NAMED[ref[1:]], ref
    path = ref if os.path.isabs(ref) else os.path.join(base, ref)
    try:
        with open(path) as fh:
            return parse_frame(fh.read()), ref
    except OSError as e:
        raise ParseError(f"cannot read frame file {ref}: {e.strerror}") from None


@dataclass
class MorphismFile:
    morphism: PMorphism
    source_ref: Any
    target_ref: Any
    pairs: list = field(default_factory=list)


def parse_morphism(text: str, base: str = ".") -> MorphismFile:
    s = text.lstrip()
    if s.startswith("{"):
        try:
            d = json.loads(s)
        except json.JSONDecodeError as e:
            raise ParseError(f"bad JSON: {e.msg}", e.lineno, e.colno) from None
        src, sref = _load_ref(d["from"], base)
        tgt, tref = _load_ref(d["to"], base)
        pairs = [tuple(p) for p in d["map"]]
    else:
        src = tgt = sref = tref = None
        pairs = []
        for key, toks, rest, ln in _fields(text):
            if key == "from":
                src, sref = _load_ref(rest, base)
            elif key == "to":
                tgt, tref = _load_ref(rest, base)
            elif key == "map":
                for t, l, c in toks:
                    if t.count(">") != 1:
                        raise ParseError(f"malformed map token {t!r}", l, c)
                    a, b = t.split(">")
                    try:
                        pairs.append((int(a), int(b)))
                    except ValueError:
                        raise ParseError(f"malformed map token {t!r}", l, c) from None
            else:
                raise ParseError(f"unknown key {key!r}", ln, 1)
        if src is None or tgt is None:
            raise ParseError("morphism file needs 'from:' and 'to:' lines")
    mapping = dict(pairs)
    if len(mapping) != len(pairs):
        raise ParseError("point mapped twice")
    return MorphismFile(PMorphism(src, tgt, mapping), sref, tref, pairs)


def morphism_to_text(f: PMorphism, source_ref: str, target_ref: str) -> str:
    return (f"from: {source_ref}\nto: {target_ref}\nmap: "
            + " ".join(f"{p}>{q}" for p, q in f.map.items()) + "\n")


def morphism_to_json(f: PMorphism, source_ref, target_ref) -> dict:
    return {"from": source_ref, "to": target_ref, "map": [[p, q] for p, q in f.map.items()]}


def morphisms_among(frames):
    """Yield (i, j, images) for every p-morphism frames[i] -> frames[j].

    Each p-morphism factors uniquely as a quotient map followed by an
    isomorphism onto a generated subframe of the target; enumerating those
    pieces avoids a search over every pair of frames.
    """
    from .catalog import canonical_many, frame_from_mask
    subs = []
    for j, V in enumerate(frames):
        for pts in generated_subsets(V):
            subs.append((j, restrict(V, pts)))
    quots = []
    for i, W in enumerate(frames):
        for Q, q in quotients(W):
            quots.append((i, Q, q))
    sc = canonical_many(G for _, G in subs)
    qc = canonical_many(Q for _, Q, _ in quots)
    reps: dict[tuple[int, int], Frame] = {}

    def to_rep(F, c):
        key = (len(F), c)
        if key not in reps:
            reps[key] = frame_from_mask(c, len(F))
        return is_isomorphic(F, reps[key])

    # canonical class -> [(j, list of G points indexed by rep point)]
    index: dict[tuple[int, int], list] = {}
    for (j, G), c in zip(subs, sc):
        s = to_rep(G, c)
        back = [0] * len(G)
        for g, r in s.items():
            back[r] = g
        index.setdefault((len(G), c), []).append((j, back))
    for (i, Q, q), c in zip(quots, qc):
        targets = index.get((len(Q), c))
        if not targets:
            continue
        rep = reps[(len(Q), c)]
        s = to_rep(Q, c)
        qrep = [s[x] for x in q.images]  # W point -> rep point
        auts = [t for t in hom_indices(rep, rep) if len(set(t)) == len(t)]
        for j, back in targets:
            for a in auts:
                yield i, j, tuple([back[a[r]] for r in qrep])
