"""Named frames and enumeration of small frames up to isomorphism.

Frames on n points are encoded as n*n-bit masks (bit ``i*n+j`` for the edge
i>j); canonical forms are the least mask over all relabellings.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from .frame import Frame, FrameClass, LazyFrame, check_class, is_rooted


class SizeGuardError(RuntimeError):
    pass


GENERATION_GUARD = 400_000

# fixtures
V_WBETH = Frame([0, 1, 2], [(0, 1), (0, 2), (1, 2), (2, 1)])
V1 = Frame([1, 2], [(1, 2), (2, 1)])
V2 = Frame([0, 1], [(0, 1), (1, 1)])
V_BETH = Frame([0, 1], [(0, 0), (0, 1), (1, 0)])
ONE = Frame([0], [(0, 0)])
DOT = Frame([0], [])
CHAIN2 = Frame([0, 1], [(0, 1)])
CHAIN2_REFL = Frame([0, 1], [(0, 0), (0, 1), (1, 1)])

NAMED = {
    "V_wbeth": V_WBETH, "V1": V1, "V2": V2, "V_beth": V_BETH, "one": ONE,
    "dot": DOT, "chain2": CHAIN2, "chain2r": CHAIN2_REFL, "empty": Frame(),
}


def omega_successor(bound: int = 10_000) -> LazyFrame:
    return LazyFrame((0,), lambda n: (n + 1,), bound)


def binary_tree(bound: int = 10_000) -> LazyFrame:
    """Infinite binary tree; nodes are bit strings, the root is ''."""
    return LazyFrame(("",), lambda s: (s + "0", s + "1"), bound)


def cycle(n: int) -> Frame:
    return Frame(range(n), [(i, (i + 1) % n) for i in range(n)])


# masks ----------------------------------------------------------------------

def frame_from_mask(mask: int, n: int) -> Frame:
    return Frame(range(n), [(i, j) for i in range(n) for j in range(n) if mask >> (i * n + j) & 1])


def mask_of(F: Frame) -> int:
    n = len(F)
    m = 0
    for a, b in F.edges:
        m |= 1 << (F.index(a) * n + F.index(b))
    return m


def canonical_masks(masks: np.ndarray, n: int) -> np.ndarray:
    masks = np.asarray(masks, dtype=np.int64)
    if n == 0 or masks.size == 0:
        return masks.copy()
    bits = [(masks >> b) & 1 for b in range(n * n)]
    best = None
    for perm in itertools.permutations(range(n)):
        acc = np.zeros_like(masks)
        for i in range(n):
            for j in range(n):
                acc |= bits[i * n + j] << (perm[i] * n + perm[j])
        best = acc if best is None else np.minimum(best, acc)
    return best


def canonical_mask(F: Frame) -> int:
    return int(canonical_masks(np.array([mask_of(F)]), len(F))[0])


def _unique_frames(masks: np.ndarray, n: int) -> list[Frame]:
    canon = np.unique(canonical_masks(masks, n))
    return [frame_from_mask(int(m), n) for m in canon]


@lru_cache(maxsize=None)
def all_frames(n: int) -> tuple[Frame, ...]:
    """Every frame on n points, one per isomorphism class."""
    if n > 4:
        raise SizeGuardError(f"brute-force frame enumeration capped at 4 points (asked {n})")
    if n == 0:
        return (Frame(),)
    return tuple(_unique_frames(np.arange(1 << (n * n), dtype=np.int64), n))


# vectorised first-order conditions on mask arrays
def _bit(masks, n, i, j):
    return (masks >> (i * n + j)) & 1


def _np_condition(name, masks, n):
    ok = np.ones(masks.shape, dtype=bool)
    r = range(n)
    if name == "reflexive":
        for i in r:
            ok &= _bit(masks, n, i, i) == 1
    elif name == "irreflexive":
        for i in r:
            ok &= _bit(masks, n, i, i) == 0
    elif name == "transitive":
        for a in r:
            for b in r:
                ab = _bit(masks, n, a, b)
                for c in r:
                    ok &= (ab & _bit(masks, n, b, c) & (1 - _bit(masks, n, a, c))) == 0
    elif name == "antisymmetric":
        for a in r:
            for b in r:
                if a != b:
                    ok &= (_bit(masks, n, a, b) & _bit(masks, n, b, a)) == 0
    elif name == "locally-linear":
        for w in r:
            for v1 in r:
                for v2 in r:
                    if v1 < v2:
                        bad = (_bit(masks, n, w, v1) & _bit(masks, n, w, v2)
                               & (1 - _bit(masks, n, v1, v2)) & (1 - _bit(masks, n, v2, v1)))
                        ok &= bad == 0
    elif name == "functional":
        for i in r:
            cnt = sum(_bit(masks, n, i, j) for j in r)
            ok &= cnt == 1
    else:
        raise ValueError(name)
    return ok


def _class_filter(cls: FrameClass, masks: np.ndarray, n: int) -> np.ndarray:
    from .frame import TABLE
    if cls.kind == "all":
        return masks
    if cls.kind in ("table", "functional"):
        conds = ("functional",) if cls.kind == "functional" else TABLE[cls.name]
        ok = np.ones(masks.shape, dtype=bool)
        for c in conds:
            ok &= _np_condition(c, masks, n)
        return masks[ok]
    keep = [m for m in masks.tolist() if check_class(frame_from_mask(m, n), cls)]
    return np.array(keep, dtype=np.int64)


@lru_cache(maxsize=None)
def class_members(cls: FrameClass, n: int) -> tuple[Frame, ...]:
    """Members of ``cls`` with exactly n points, one per isomorphism class."""
    if n == 0:
        return (Frame(),)
    if cls.kind == "listed":
        out: list[Frame] = []
        for f in cls.frames:
            if len(f) == n and not any(_iso(f, g) for g in out):
                out.append(f)
        return tuple(sorted(out, key=canonical_mask))
    if cls.kind == "functional":
        if n > 5:
            raise SizeGuardError(f"functional frames enumerated up to 5 points (asked {n})")
        masks = []
        for f in itertools.product(range(n), repeat=n):
            masks.append(sum(1 << (i * n + f[i]) for i in range(n)))
        return tuple(_unique_frames(np.array(masks, dtype=np.int64), n))
    if n <= 4:
        masks = np.array([mask_of(F) for F in all_frames(n)], dtype=np.int64)
        return tuple(frame_from_mask(int(m), n) for m in _class_filter(cls, masks, n))
    if not cls.universal:
        raise SizeGuardError(f"no generator for class {cls} beyond 4 points")
    prev = class_members(cls, n - 1)
    extra = 2 * (n - 1) + 1
    if len(prev) * (1 << extra) > GENERATION_GUARD:
        raise SizeGuardError(f"{len(prev) << extra} candidates for {cls} at {n} points")
    k = n - 1
    base = []
    for F in prev:
        m = 0
        for a, b in F.edges:
            m |= 1 << (a * n + b)
        base.append(m)
    ext = []
    for bits in range(1 << extra):
        m = 0
        for j in range(k):
            if bits >> j & 1:
                m |= 1 << (k * n + j)
            if bits >> (k + j) & 1:
                m |= 1 << (j * n + k)
        if bits >> (2 * k) & 1:
            m |= 1 << (k * n + k)
        ext.append(m)
    cand = (np.array(base, dtype=np.int64)[:, None] | np.array(ext, dtype=np.int64)[None, :]).ravel()
    cand = _class_filter(cls, cand, n)
    return tuple(_unique_frames(cand, n))


def _iso(f, g):
    from .frame import is_isomorphic
    return is_isomorphic(f, g) is not None


@lru_cache(maxsize=None)
def rooted_members(cls: FrameClass, n: int) -> tuple[Frame, ...]:
    """Rooted members of ``cls`` with exactly n points."""
    if n == 0:
        return ()
    if cls.kind == "sub":
        return tuple(sorted((F for F in cls.subreductions() if len(F) == n and is_rooted(F)),
                            key=canonical_mask))
    if cls.kind == "functional":
        # a rooted functional frame is a path running into a cycle
        out = []
        for c in range(1, n + 1):
            t = n - c
            edges = [(i, i + 1) for i in range(n - 1)] + [(n - 1, t)]
            out.append(Frame(range(n), edges))
        return tuple(sorted(out, key=canonical_mask))
    cap = cls.rooted_size_cap()
    if cap is not None and n > cap:
        return ()
    return tuple(F for F in class_members(cls, n) if is_rooted(F))


def catalog(cls: FrameClass, max_size: int, include_empty: bool = True) -> list[Frame]:
    out = []
    for n in range(0 if include_empty else 1, max_size + 1):
        out.extend(class_members(cls, n))
    return out


def rooted_catalog(cls: FrameClass, max_size: int) -> list[Frame]:
    out = []
    for n in range(1, max_size + 1):
        out.extend(rooted_members(cls, n))
    return out


def canonical_many(frames) -> list[int]:
    """Canonical masks for many frames, batched by size."""
    frames = list(frames)
    out = [0] * len(frames)
    by_n: dict[int, list[int]] = {}
    for k, F in enumerate(frames):
        by_n.setdefault(len(F), []).append(k)
    for n, ks in by_n.items():
        canon = canonical_masks(np.array([mask_of(frames[k]) for k in ks], dtype=np.int64), n)
        for k, c in zip(ks, canon.tolist()):
            out[k] = c
    return out
