"""Command-line front end.

Exit status: 0 holds or accepted, 1 fails or rejected, 2 inconclusive at the
bound, 3 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from dataclasses import dataclass, field
from typing import Optional

from . import algebra as alg
from . import calculus as calc
from . import cat
from . import props
from .catalog import NAMED, SizeGuardError, binary_tree, catalog, omega_successor
from .formula import ParseError, parse_formula, parse_formulas, print_formula
from .frame import (Frame, FrameClass, FrameError, check_class, frame_to_json, frame_to_text,
                    parse_clauses, parse_frame)
from .morphism import (REFUTED, MorphismError, PMorphism, classify,
                       compose, enumerate_pmorphisms, enumerate_subreductions, morphism_to_json,
                       morphism_to_text, parse_morphism, quotients, violation)

HOLDS, FAILS, INCONCLUSIVE_EXIT, USAGE = 0, 1, 2, 3
DEFAULT_BOUND = 6
DEFAULT_CATALOG = 4


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(USAGE)


@dataclass
class Report:
    status: int
    lines: list = field(default_factory=list)
    data: dict = field(default_factory=dict)
    files: dict = field(default_factory=dict)  # name -> text

    def add(self, line: str) -> None:
        self.lines.append(line)


# loading --------------------------------------------------------------------------

def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def load_frame(ref: str) -> Frame:
    if ref.startswith("@"):
        if ref[1:] not in NAMED:
            raise UsageError(f"unknown named frame {ref}; known: {', '.join(sorted(NAMED))}")
        return NAMED[ref[1:]]
    return parse_frame(_read(ref))


def load_class(name: str) -> FrameClass:
    if name.startswith("sub-of:"):
        ref = name[len("sub-of:"):]
        return FrameClass.subreductions_of(load_frame(ref), f"sub-of:{ref}")
    if name.startswith("horn:"):
        ref = name[len("horn:"):]
        return FrameClass.horn(parse_clauses(_read(ref)), f"horn:{ref}")
    if name == "all":
        return FrameClass.all()
    return FrameClass.table(name)


def load_morphism(path: str) -> PMorphism:
    mf = parse_morphism(_read(path), os.path.dirname(os.path.abspath(path)))
    bad = violation(mf.morphism)
    if bad:
        raise UsageError(f"{path} is not a p-morphism: {bad[0]} {bad[1]}")
    return mf.morphism


def load_formula(arg: str):
    """An s-expression given inline or a path to a file holding one."""
    text = arg if arg.lstrip().startswith("(") else _read(arg)
    return parse_formula(text.strip())


def load_formulas(arg: Optional[str]) -> list:
    if not arg:
        return []
    text = arg if arg.lstrip().startswith("(") else _read(arg)
    return parse_formulas(text)


def _bound(args) -> int:
    if getattr(args, "bound", None) is not None:
        return args.bound
    env = os.environ.get("KF_BOUND")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"KF_BOUND must be an integer, got {env!r}") from None
    return DEFAULT_BOUND


def _mor_json(f: PMorphism) -> str:
    return json.dumps(morphism_to_json(f, frame_to_json(f.source), frame_to_json(f.target)),
                      sort_keys=True) + "\n"


def _show_mor(f: PMorphism) -> str:
    return " ".join(f"{p}>{q}" for p, q in f.map.items())


def _frame_line(F: Frame) -> str:
    return f"points {list(F.points)} edges " + " ".join(f"{a}>{b}" for a, b in F.sorted_edges())


def _verdict_status(verdict: str) -> int:
    return {props.HOLDS: HOLDS, props.FAILS: FAILS}.get(verdict, INCONCLUSIVE_EXIT)


# frame ----------------------------------------------------------------------------

def cmd_frame_show(args) -> Report:
    F = load_frame(args.file)
    r = Report(HOLDS, data={"frame": frame_to_json(F)})
    r.lines.append(frame_to_text(F).rstrip("\n"))
    return r


def cmd_frame_class(args) -> Report:
    F = load_frame(args.file)
    cls = load_class(args.cls)
    v = check_class(F, cls)
    r = Report(HOLDS if v else FAILS,
               data={"class": str(cls), "holds": v.holds, "condition": v.condition,
                     "witness": list(v.witness)})
    r.add(f"{args.file} in {cls}: {v.describe()}")
    return r


def cmd_frame_subreductions(args) -> Report:
    F = load_frame(args.file)
    subs = enumerate_subreductions(F)
    r = Report(HOLDS, data={"count": len(subs), "frames": [frame_to_json(S) for S in subs]})
    r.add(f"{len(subs)} subreductions up to isomorphism")
    for k, S in enumerate(subs):
        r.add(f"  sub{k}: {_frame_line(S)}")
        r.files[f"sub{k}.frm"] = frame_to_text(S)
    return r


def cmd_frame_quotients(args) -> Report:
    F = load_frame(args.file)
    qs = quotients(F)
    r = Report(HOLDS, data={"count": len(qs), "maps": [list(q.images) for _, q in qs]})
    r.add(f"{len(qs)} surjective p-morphisms up to kernel")
    for k, (Q, q) in enumerate(qs):
        r.add(f"  q{k}: {_show_mor(q)} onto {len(Q)} points")
        r.files[f"q{k}.mor"] = _mor_json(q)
    return r


def cmd_frame_catalog(args) -> Report:
    cls = load_class(args.cls)
    counts = {}
    for F in catalog(cls, args.max_size, include_empty=False):
        counts[len(F)] = counts.get(len(F), 0) + 1
    r = Report(HOLDS, data={"class": str(cls), "counts": {str(k): v for k, v in counts.items()}})
    for n in range(1, args.max_size + 1):
        r.add(f"{n}: {counts.get(n, 0)} frames in {cls} up to isomorphism")
    return r


# morph --------------------------------------------------------------------------------

def cmd_morph_check(args) -> Report:
    mf = parse_morphism(_read(args.file), os.path.dirname(os.path.abspath(args.file)))
    bad = violation(mf.morphism)
    if bad:
        r = Report(FAILS, data={"valid": False, "violation": [bad[0], list(bad[1])]})
        r.add(f"not a p-morphism: {bad[0]} at {bad[1]}")
        return r
    f = mf.morphism
    r = Report(HOLDS, data={"valid": True, "injective": f.injective, "surjective": f.surjective})
    r.add(f"p-morphism; injective={f.injective} surjective={f.surjective}")
    return r


def _status_json(st) -> dict:
    return {"kind": st.kind, "bound": st.bound, "exhaustive": st.exhaustive, "note": st.note}


def cmd_morph_classify(args) -> Report:
    f = load_morphism(args.file)
    cls = load_class(args.cls)
    bound = _bound(args)
    c = classify(f, cls, bound)
    r = Report(HOLDS, data={"injective": c.injective, "surjective": c.surjective,
                            "mono": _status_json(c.mono), "regepi": _status_json(c.regepi)})
    r.add(f"injective={c.injective} surjective={c.surjective}")
    r.add(f"mono: {c.mono}")
    r.add(f"regular epi: {c.regepi}")
    if c.mono.kind == REFUTED:
        w = c.mono.witness
        r.files["mono_g.mor"] = _mor_json(w.g)
        r.files["mono_h.mor"] = _mor_json(w.h)
    if isinstance(c.regepi.witness, PMorphism):
        r.files["quotient.mor"] = _mor_json(c.regepi.witness)
    # a mono refutation is final at any bound; everything else needs exhaustion
    mono_final = c.mono.kind == REFUTED or c.mono.exhaustive
    if not (mono_final and c.regepi.exhaustive):
        r.status = INCONCLUSIVE_EXIT
    return r


def cmd_morph_list(args) -> Report:
    W, V = load_frame(args.source), load_frame(args.target)
    fs = enumerate_pmorphisms(W, V)
    r = Report(HOLDS, data={"count": len(fs), "maps": [list(f.images) for f in fs]})
    r.add(f"{len(fs)} p-morphisms")
    for f in fs:
        r.add(f"  {_show_mor(f)}")
    return r


def cmd_morph_compose(args) -> Report:
    g, f = load_morphism(args.g), load_morphism(args.f)
    if f.target != g.source:
        raise UsageError("g's domain must be f's codomain")
    h = compose(g, f)
    r = Report(HOLDS, data={"map": list(h.images)}, files={"composite.mor": _mor_json(h)})
    r.add(f"g.f: {_show_mor(h)}")
    return r


# cat ------------------------------------------------------------------------------

def _maybe_class(args) -> Optional[FrameClass]:
    return load_class(args.cls) if getattr(args, "cls", None) else None


def cmd_cat_coeq(args) -> Report:
    g, h = load_morphism(args.g), load_morphism(args.h)
    Q, q = cat.coequalizer(g, h, _maybe_class(args))
    r = Report(HOLDS, data={"quotient": frame_to_json(Q), "map": list(q.images)},
               files={"coeq.frm": frame_to_text(Q), "coeq.mor": _mor_json(q)})
    r.add(f"coequalizer: {_frame_line(Q)}")
    r.add(f"q: {_show_mor(q)}")
    return r


def cmd_cat_cokpair(args) -> Report:
    f = load_morphism(args.f)
    ck = cat.cokernel_pair(f)
    same = ck.iota0.images == ck.iota1.images
    r = Report(HOLDS, data={"apex": frame_to_json(ck.U), "iota0": list(ck.iota0.images),
                            "iota1": list(ck.iota1.images), "legs_equal": same},
               files={"cokpair.frm": frame_to_text(ck.U), "iota0.mor": _mor_json(ck.iota0),
                      "iota1.mor": _mor_json(ck.iota1)})
    r.add(f"cokernel pair apex: {_frame_line(ck.U)}")
    r.add(f"iota0: {_show_mor(ck.iota0)}")
    r.add(f"iota1: {_show_mor(ck.iota1)}")
    r.add(f"legs equal: {same}")
    return r


def cmd_cat_equalize(args) -> Report:
    g, h = load_morphism(args.g), load_morphism(args.h)
    E, e = cat.equalizer(g, h)
    r = Report(HOLDS, data={"equalizer": frame_to_json(E)},
               files={"equalizer.frm": frame_to_text(E), "equalizer.mor": _mor_json(e)})
    r.add(f"equalizer: {_frame_line(E)}")
    return r


def cmd_cat_factor(args) -> Report:
    f = load_morphism(args.f)
    e, m = cat.coregular_factorization(f)
    r = Report(HOLDS, data={"image": frame_to_json(e.target), "e": list(e.images),
                            "m": list(m.images)},
               files={"image.frm": frame_to_text(e.target), "e.mor": _mor_json(e),
                      "m.mor": _mor_json(m)})
    r.add(f"image: {_frame_line(e.target)}")
    r.add(f"e: {_show_mor(e)}")
    r.add(f"m: {_show_mor(m)}")
    return r


def cmd_cat_pullback_regmono(args) -> Report:
    f, m = load_morphism(args.f), load_morphism(args.m)
    P, mp, fp = cat.pullback_along_regmono(f, m)
    r = Report(HOLDS, data={"pullback": frame_to_json(P), "f_prime": list(fp.images),
                            "f_prime_surjective": fp.surjective},
               files={"pullback.frm": frame_to_text(P), "m_prime.mor": _mor_json(mp),
                      "f_prime.mor": _mor_json(fp)})
    r.add(f"pullback: {_frame_line(P)}")
    r.add(f"f': {_show_mor(fp)} (surjective={fp.surjective})")
    return r


def cmd_cat_setpb(args) -> Report:
    f0, f1 = load_morphism(args.f0), load_morphism(args.f1)
    sp = cat.set_pullback(f0, f1, _maybe_class(args))
    r = Report(HOLDS if sp.membership else FAILS,
               data={"apex": frame_to_json(sp.U), "p0": list(sp.p0.images),
                     "p1": list(sp.p1.images), "in_class": sp.membership.holds},
               files={"setpb.frm": frame_to_text(sp.U), "p0.mor": _mor_json(sp.p0),
                      "p1.mor": _mor_json(sp.p1)})
    r.add(f"set pullback: {_frame_line(sp.U)}")
    r.add(f"class membership: {sp.membership.describe()}")
    return r


def cmd_cat_verify(args) -> Report:
    cls = load_class(args.cls)
    bound = _bound(args)
    a, b = args.inputs
    if args.kind == "coeq":
        g, h = load_morphism(a), load_morphism(b)
        Q, q = cat.coequalizer(g, h)
        cand, diag = cat.coequalizer_cone(g, h, Q, q)
    elif args.kind == "equalizer":
        g, h = load_morphism(a), load_morphism(b)
        E, e = cat.equalizer(g, h)
        cand, diag = cat.equalizer_cone(g, h, E, e)
    elif args.kind == "pullback":
        f0, f1 = load_morphism(a), load_morphism(b)
        sp = cat.set_pullback(f0, f1)
        cand, diag = cat.pullback_cone(f0, f1, sp.U, sp.p0, sp.p1)
    else:
        F, G = load_frame(a), load_frame(b)
        one = NAMED["one"]
        sp = cat.set_pullback(PMorphism(F, one, [0] * len(F)), PMorphism(G, one, [0] * len(G)))
        cand, diag = cat.product_cone(F, G, sp.U, sp.p0, sp.p1)
    uv = cat.verify_universal_bounded(cand, diag, cls, bound)
    r = Report(HOLDS if uv.verified else FAILS,
               data={"kind": args.kind, "status": uv.status, "bound": bound, "tested": uv.tested,
                     "reason": uv.reason})
    r.add(f"{args.kind}: {uv.status} against {uv.tested} test cones up to {bound} points")
    if not uv.verified:
        T, legs = uv.witness
        r.add(f"  {uv.reason} for test apex {_frame_line(T)}")
        r.files["test.frm"] = frame_to_text(T)
        for k, leg in enumerate(legs):
            r.files[f"leg{k}.mor"] = _mor_json(leg)
    return r


# algebra --------------------------------------------------------------------------

def cmd_algebra_eval(args) -> Report:
    F = load_frame(args.frame)
    phi = load_formula(args.formula)
    v = alg.parse_valuation(_read(args.valuation), F) if args.valuation else {}
    ext = sorted(alg.evaluate(F, v, phi))
    r = Report(HOLDS, data={"formula": phi.text(), "extension": ext})
    r.add(f"{phi.text()} holds at {ext}")
    return r


def cmd_algebra_valid(args) -> Report:
    F = load_frame(args.frame)
    phi = load_formula(args.formula)
    names = sorted(alg.free_variables(phi))
    ev = alg.BatchEvaluator(F, names)
    ok = ev.valid(phi)
    if ok.all():
        r = Report(HOLDS, data={"valid": True, "valuations": ev.count})
        r.add(f"valid on the frame ({ev.count} valuations)")
        return r
    row = int(ok.argmin())
    v = ev.valuation(row)
    r = Report(FAILS, data={"valid": False, "valuation": {k: sorted(x) for k, x in v.items()}},
               files={"countermodel.val": alg.valuation_to_text(v)})
    r.add(f"refuted under {alg.valuation_to_text(v).strip() or 'the empty valuation'}")
    return r


def cmd_algebra_lf(args) -> Report:
    if args.frame in ("@omega", "@tree"):
        F = omega_successor() if args.frame == "@omega" else binary_tree()
        w = 0 if args.frame == "@omega" else ""
    else:
        F = load_frame(args.frame)
        w = args.point
    res = alg.lf_witness(F, w, args.depth)
    if isinstance(res, alg.FiniteCone):
        r = Report(HOLDS, data={"finite_cone": sorted(res.points)})
        r.add(f"finite cone of {len(res.points)} points")
        return r
    sizes = [len(L) for L in res.levels]
    r = Report(FAILS, data={"levels": [sorted(map(str, L)) for L in res.levels],
                            "min_cover": res.min_cover, "level_sizes": sizes})
    r.add(f"cone exceeds the exploration bound; level sizes {sizes}; min cover {res.min_cover}")
    return r


def cmd_algebra_identities(args) -> Report:
    F = load_frame(args.frame)
    M = alg.powerset_algebra(F)
    rng = random.Random(args.seed)
    pts = list(F.points)

    def elem():
        return frozenset(p for p in pts if rng.random() < 0.5)

    fails = []
    for k in range(args.samples):
        fam = [frozenset(elem() for _ in range(rng.randint(0, 2))) for _ in range(rng.randint(1, 3))]
        if not alg.check_ID(M, fam):
            fails.append(("ID", k))
        if not alg.check_CA(M, frozenset(elem() for _ in range(rng.randint(0, 3)))):
            fails.append(("CA", k))
        lf = alg.LFFamily([frozenset(elem() for _ in range(rng.randint(1, 2)))
                           for _ in range(rng.randint(0, 2))],
                          frozenset(elem() for _ in range(rng.randint(1, 2))))
        if not alg.check_LF(M, lf):
            fails.append(("LF", k))
    r = Report(HOLDS if not fails else FAILS, data={"samples": args.samples, "failures": fails})
    r.add(f"{args.samples} samples, {len(fails)} failures")
    return r


def cmd_algebra_dual(args) -> Report:
    f = load_morphism(args.file)
    bad = alg.dual_hom(f).violation()
    r = Report(HOLDS if bad is None else FAILS,
               data={"preserves_dia": bad is None,
                     "violation": None if bad is None else [sorted(x) for x in bad]})
    r.add("dual map preserves dia" if bad is None else f"dual map breaks dia at {bad}")
    return r


# proofs, formulas, semantics -----------------------------------------------------------

def _params(args) -> calc.CalculusParams:
    return calc.CalculusParams.for_logic(args.logic, load_formulas(args.theory))


def _proof_text(pi, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(calc.proof_to_json(pi), indent=2, sort_keys=True) + "\n"
    return calc.proof_to_text(pi)


def cmd_proof_check(args) -> Report:
    pi = calc.parse_proof(_read(args.file))
    res = calc.check_proof(pi, _params(args))
    if res:
        r = Report(HOLDS, data={"accepted": True, "rank": res.rank, "nodes": pi.size(),
                                "conclusion": pi.conclusion.text()})
        r.add(f"accepted: {pi.conclusion.text()} (rank {res.rank}, {pi.size()} nodes)")
    else:
        r = Report(FAILS, data={"accepted": False, "path": list(res.path), "rule": res.rule,
                                "reason": res.reason})
        r.add(f"rejected at {res.describe()}")
    return r


def _family(groups) -> list:
    return [frozenset(parse_formulas(g)) for g in groups or []]


def cmd_proof_derive_eq(args) -> Report:
    S = parse_formulas(args.S) if args.S else None
    fam = _family(args.family) if args.family else None
    if args.variant in ("i", "ii", "v") and S is None:
        raise UsageError(f"variant {args.variant} needs --S")
    if args.variant in ("o", "iii", "iv") and fam is None:
        raise UsageError(f"variant {args.variant} needs --family")
    fwd, bwd = calc.derive_eq(args.variant, S, fam)
    T = calc.CalculusParams.for_logic("K")
    ok = all(calc.check_proof(p, T) for p in (fwd, bwd))
    ext = "json" if args.format == "json" else "prf"
    r = Report(HOLDS if ok else FAILS,
               data={"variant": args.variant, "forward": calc.proof_to_json(fwd),
                     "backward": calc.proof_to_json(bwd), "accepted": ok},
               files={f"eq_{args.variant}_fwd.{ext}": _proof_text(fwd, args.format),
                      f"eq_{args.variant}_bwd.{ext}": _proof_text(bwd, args.format)})
    r.add(f"forward:  {fwd.conclusion.text()} ({fwd.size()} nodes)")
    r.add(f"backward: {bwd.conclusion.text()} ({bwd.size()} nodes)")
    r.add(f"both accepted: {ok}")
    if not args.out:
        r.add(_proof_text(fwd, args.format).rstrip("\n"))
        r.add(_proof_text(bwd, args.format).rstrip("\n"))
    return r


def cmd_proof_deduce(args) -> Report:
    pi = calc.parse_proof(_read(args.file))
    T = _params(args)
    first = calc.check_proof(pi, T)
    if not first:
        r = Report(FAILS, data={"accepted": False, "reason": first.describe()})
        r.add(f"input rejected at {first.describe()}")
        return r
    d = calc.deduction_transform(pi, T)
    res = calc.check_proof(d.proof, T.without_theory())
    gamma = [x.text() for x in calc._sorted(d.gamma)]
    r = Report(HOLDS if res else FAILS,
               data={"gamma": gamma, "conclusion": d.proof.conclusion.text(),
                     "accepted": bool(res), "proof": calc.proof_to_json(d.proof)},
               files={"deduced.prf": calc.proof_to_text(d.proof)})
    r.add(f"gamma: {' '.join(gamma) if gamma else '(empty)'}")
    r.add(f"conclusion: {d.proof.conclusion.text()}")
    r.add(f"accepted without theory: {bool(res)}")
    return r


def cmd_formula_nf(args) -> Report:
    phi = load_formula(args.formula)
    fam = calc.normal_form(phi)
    clauses = [[x.text() for x in calc._sorted(S)] for S in calc._sorted_fam(fam)]
    r = Report(HOLDS, data={"formula": phi.text(), "clauses": clauses,
                            "reassembled": calc.reassemble(fam).text()})
    r.add(f"{len(clauses)} clause(s)")
    for c in clauses:
        r.add("  " + " | ".join(c))
    return r


def cmd_formula_print(args) -> Report:
    phi = load_formula(args.formula)
    r = Report(HOLDS, data={"formula": print_formula(phi)})
    r.add(print_formula(phi))
    return r


def cmd_semantics_refute(args) -> Report:
    text = args.sequent if "=>" in args.sequent else _read(args.sequent)
    s = calc.parse_sequent(text)
    T = _params(args)
    cls = load_class(args.cls or args.logic)
    frames = catalog(cls, args.max_size, include_empty=False)
    res = calc.countermodel_search(s, T, frames, cls, args.depth)
    if res:
        r = Report(HOLDS, data={"valid": True, "frames": res.frames, "valuations": res.valuations})
        r.add(f"no countermodel among {res.frames} frames and {res.valuations} valuations")
        return r
    v = {k: sorted(x) for k, x in res.valuation.items()}
    r = Report(FAILS, data={"valid": False, "frame": frame_to_json(res.frame), "valuation": v,
                            "point": res.point},
               files={"countermodel.frm": frame_to_text(res.frame),
                      "countermodel.val": alg.valuation_to_text(res.valuation)})
    r.add(f"countermodel: {_frame_line(res.frame)}")
    r.add(f"  valuation {v}, fails at point {res.point}")
    return r


# props ----------------------------------------------------------------------------------

def _report_from(pr: props.PropertyReport) -> Report:
    r = Report(_verdict_status(pr.verdict), data=pr.summary(), files=dict(pr.files))
    r.lines.extend(pr.text().split("\n"))
    return r


def _cospan(args) -> props.Cospan:
    return props.Cospan(load_morphism(args.f0), load_morphism(args.f1), load_class(args.cls))


def cmd_props_amalg(args) -> Report:
    return _report_from(props.amalgamate(_cospan(args), _bound(args)))


def cmd_props_superamalg(args) -> Report:
    return _report_from(props.superamalgamate(_cospan(args), _bound(args)))


def cmd_props_beth(args) -> Report:
    cls = load_class(args.cls)
    if args.frames:
        frames = [load_frame(x) for x in args.frames]
    elif cls.kind == "sub":
        frames = cls.subreductions()
    else:
        frames = catalog(cls, args.max_size, include_empty=False)
    strength = "strong" if args.strong else "weak"
    return _report_from(props.beth_probe(cls, frames, _bound(args), strength))


def cmd_props_sv(args) -> Report:
    rho, tau = load_formula(args.rho), load_formula(args.tau)
    X = [x for x in args.vars.replace(",", " ").split() if x]
    if args.frames:
        frames = [load_frame(x) for x in args.frames]
    else:
        frames = catalog(load_class(args.cls), args.max_size, include_empty=False)
    return _report_from(props.separates_variables_check(rho, tau, X, frames, args.depth))


def cmd_props_functional_limits(args) -> Report:
    samples = props.sample_functional_pairs(args.samples, args.seed, args.max_size)
    bound = args.bound if args.bound is not None else 5
    return _report_from(props.functional_limits_check(samples, bound))


def cmd_props_reproduce(args) -> Report:
    rep = props.reproduce_paper(_bound(args), None, seed=args.seed)
    status = {0: HOLDS, 1: FAILS, 2: INCONCLUSIVE_EXIT}[rep.exit_code]
    r = Report(status, data=rep.summary())
    r.lines.extend(rep.text().rstrip("\n").split("\n"))
    for f in rep.fixtures:
        for name, text in f.report.files.items():
            r.files[f"{f.name}/{name}"] = text
    r.files["summary.json"] = json.dumps(rep.summary(), indent=2, sort_keys=True) + "\n"
    r.files["summary.txt"] = rep.text()
    return r


# convert --------------------------------------------------------------------------------

KINDS = ("frame", "morphism", "proof", "valuation", "formula")
EXTENSIONS = {".frm": "frame", ".mor": "morphism", ".prf": "proof", ".val": "valuation",
              ".fml": "formula"}


def _detect_kind(path: str, text: str) -> str:
    ext = os.path.splitext(path)[1]
    if ext in EXTENSIONS:
        return EXTENSIONS[ext]
    s = text.lstrip()
    if s.startswith("{"):
        try:
            d = json.loads(s)
        except json.JSONDecodeError as e:
            raise ParseError(f"bad JSON: {e.msg}", e.lineno, e.colno) from None
        for key, kind in (("points", "frame"), ("from", "morphism"), ("rule", "proof"),
                          ("formula", "formula")):
            if key in d:
                return kind
        return "valuation"
    if s.startswith("("):
        return "formula"
    head = s.split(":", 1)[0].strip()
    if head in ("points", "edges"):
        return "frame"
    if head in ("from", "to", "map"):
        return "morphism"
    if s.split(" ", 1)[0] in calc.RULES:
        return "proof"
    return "valuation"


def cmd_convert(args) -> Report:
    text = _read(args.file)
    kind = args.kind or _detect_kind(args.file, text)
    is_json = text.lstrip().startswith("{")
    if kind == "frame":
        F = parse_frame(text)
        out = (json.dumps(frame_to_json(F), sort_keys=True) + "\n" if args.format == "json"
               else frame_to_text(F))
    elif kind == "morphism":
        mf = parse_morphism(text, os.path.dirname(os.path.abspath(args.file)))
        f = mf.morphism
        if args.format == "json":
            out = json.dumps(morphism_to_json(f, mf.source_ref, mf.target_ref), sort_keys=True) + "\n"
        else:
            if isinstance(mf.source_ref, dict) or isinstance(mf.target_ref, dict):
                raise UsageError("morphisms with inline frames have no text form")
            out = morphism_to_text(f, mf.source_ref, mf.target_ref)
    elif kind == "proof":
        out = _proof_text(calc.parse_proof(text), args.format)
    elif kind == "valuation":
        if is_json:
            try:
                v = {k: frozenset(x) for k, x in json.loads(text).items()}
            except (TypeError, AttributeError):
                raise ParseError("valuation JSON maps variable names to point lists") from None
        else:
            v = alg.parse_valuation(text)
        out = (json.dumps({k: sorted(v[k]) for k in sorted(v)}, sort_keys=True) + "\n"
               if args.format == "json" else alg.valuation_to_text(v))
    else:
        if is_json:
            phi = parse_formula(json.loads(text)["formula"])
        else:
            phi = parse_formula(text.strip())
        out = (json.dumps({"formula": phi.text()}) + "\n" if args.format == "json"
               else phi.text() + "\n")
    r = Report(HOLDS, data={"kind": kind, "format": args.format, "output": out})
    r.lines.append(out.rstrip("\n"))
    if args.output:
        r.files[os.path.basename(args.output)] = out
    return r


# parser ---------------------------------------------------------------------------------

def build_parser() -> Parser:
    common = Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the machine-readable report")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized suites")
    common.add_argument("--out", help="directory for report and witness files")

    p = Parser(prog="kripkelab", description="Finite Kripke frames, p-morphisms, "
               "modal algebras, infinitary sequent proofs and bounded property checks.")
    top = p.add_subparsers(dest="group", required=True, parser_class=Parser)

    def leaf(sub, name, fn, help_):
        q = sub.add_parser(name, parents=[common], help=help_)
        q.set_defaults(fn=fn)
        return q

    def add_bound(q, help_="search bound (default $KF_BOUND or 6)"):
        q.add_argument("--bound", type=int, help=help_)

    # frame
    g = top.add_parser("frame", help="frame files and frame classes").add_subparsers(
        dest="verb", required=True, parser_class=Parser)
    q = leaf(g, "show", cmd_frame_show, "print a frame in canonical text form")
    q.add_argument("file")
    q = leaf(g, "class", cmd_frame_class, "check membership in a frame class")
    q.add_argument("file")
    q.add_argument("--class", dest="cls", required=True)
    q = leaf(g, "subreductions", cmd_frame_subreductions, "list subreductions up to isomorphism")
    q.add_argument("file")
    q = leaf(g, "quotients", cmd_frame_quotients, "list surjective p-morphisms out of a frame")
    q.add_argument("file")
    q = leaf(g, "catalog", cmd_frame_catalog, "count class frames by size")
    q.add_argument("--class", dest="cls", required=True)
    q.add_argument("--max-size", type=int, default=DEFAULT_CATALOG)

    # morph
    g = top.add_parser("morph", help="p-morphisms").add_subparsers(
        dest="verb", required=True, parser_class=Parser)
    q = leaf(g, "check", cmd_morph_check, "validate a morphism file")
    q.add_argument("file")
    q = leaf(g, "classify", cmd_morph_classify, "mono and regular-epi status within a class")
    q.add_argument("file")
    q.add_argument("--class", dest="cls", required=True)
    add_bound(q)
    q = leaf(g, "list", cmd_morph_list, "enumerate p-morphisms between two frames")
    q.add_argument("source")
    q.add_argument("target")
    q = leaf(g, "compose", cmd_morph_compose, "compose g after f")
    q.add_argument("g")
    q.add_argument("f")

    # cat
    g = top.add_parser("cat", help="categorical constructions").add_subparsers(
        dest="verb", required=True, parser_class=Parser)
    q = leaf(g, "coeq", cmd_cat_coeq, "coequalizer of a parallel pair")
    q.add_argument("g")
    q.add_argument("h")
    q.add_argument("--class", dest="cls")
    q = leaf(g, "cokpair", cmd_cat_cokpair, "cokernel pair of a map")
    q.add_argument("f")
    q = leaf(g, "equalize", cmd_cat_equalize, "equalizer of a parallel pair")
    q.add_argument("g")
    q.add_argument("h")
    q = leaf(g, "factor", cmd_cat_factor, "image factorization")
    q.add_argument("f")
    q = leaf(g, "pullback-regmono", cmd_cat_pullback_regmono, "pull f back along an injective m")
    q.add_argument("f")
    q.add_argument("m")
    q = leaf(g, "setpb", cmd_cat_setpb, "set-theoretic pullback of a cospan")
    q.add_argument("f0")
    q.add_argument("f1")
    q.add_argument("--class", dest="cls")
    q = leaf(g, "verify", cmd_cat_verify, "bounded universal-property check")
    q.add_argument("kind", choices=("coeq", "equalizer", "pullback", "product"))
    q.add_argument("inputs", nargs=2)
    q.add_argument("--class", dest="cls", default="K")
    add_bound(q)

    # algebra
    g = top.add_parser("algebra", help="powerset modal algebras").add_subparsers(
        dest="verb", required=True, parser_class=Parser)
    q = leaf(g, "eval", cmd_algebra_eval, "extension of a formula under a valuation")
    q.add_argument("frame")
    q.add_argument("formula")
    q.add_argument("--valuation")
    q = leaf(g, "valid", cmd_algebra_valid, "validity on a frame over all valuations")
    q.add_argument("frame")
    q.add_argument("formula")
    q = leaf(g, "lf", cmd_algebra_lf, "local finiteness probe at a point")
    q.add_argument("frame", help="frame file, @name, @omega or @tree")
    q.add_argument("--point", type=int, default=0)
    q.add_argument("--depth", type=int, default=10)
    q = leaf(g, "identities", cmd_algebra_identities, "randomized identity checks")
    q.add_argument("frame")
    q.add_argument("--samples", type=int, default=100)
    q = leaf(g, "dual", cmd_algebra_dual, "check that the dual map preserves dia")
    q.add_argument("file")

    # proof
    g = top.add_parser("proof", help="infinitary sequent proofs").add_subparsers(
        dest="verb", required=True, parser_class=Parser)
    q = leaf(g, "check", cmd_proof_check, "check a proof tree")
    q.add_argument("file")
    q.add_argument("--logic", default="K")
    q.add_argument("--theory", help="file or inline list of theory formulas")
    q = leaf(g, "derive-eq", cmd_proof_derive_eq, "build proofs of a basic equivalence")
    q.add_argument("variant", choices=("o", "i", "ii", "iii", "iv", "v"))
    q.add_argument("--S", help="formulas of the set S")
    q.add_argument("--family", action="append", help="one member set of the family; repeatable")
    q.add_argument("--format", choices=("text", "json"), default="text")
    q = leaf(g, "deduce", cmd_proof_deduce, "move theory axioms into the antecedent")
    q.add_argument("file")
    q.add_argument("--logic", default="K")
    q.add_argument("--theory", required=True)

    # formula
    g = top.add_parser("formula", help="formulas").add_subparsers(
        dest="verb", required=True, parser_class=Parser)
    q = leaf(g, "nf", cmd_formula_nf, "conjunctive normal form")
    q.add_argument("formula")
    q = leaf(g, "print", cmd_formula_print, "canonical s-expression")
    q.add_argument("formula")

    # semantics
    g = top.add_parser("semantics", help="countermodels").add_subparsers(
        dest="verb", required=True, parser_class=Parser)
    q = leaf(g, "refute", cmd_semantics_refute, "search class frames for a countermodel")
    q.add_argument("sequent", help="sequent 'ante => succ' or a file holding one")
    q.add_argument("--logic", default="K")
    q.add_argument("--theory")
    q.add_argument("--class", dest="cls")
    q.add_argument("--max-size", type=int, default=3)
    q.add_argument("--depth", type=int, default=0, help="depth of schema instances")

    # props
    g = top.add_parser("props", help="bounded property checks").add_subparsers(
        dest="verb", required=True, parser_class=Parser)
    for name, fn in (("amalg", cmd_props_amalg), ("superamalg", cmd_props_superamalg)):
        q = leaf(g, name, fn, f"{'super' if name == 'superamalg' else ''}amalgamation of a cospan")
        q.add_argument("f0")
        q.add_argument("f1")
        q.add_argument("--class", dest="cls", required=True)
        add_bound(q)
    q = leaf(g, "beth", cmd_props_beth, "weak or strong Beth probe")
    s = q.add_mutually_exclusive_group(required=True)
    s.add_argument("--weak", action="store_true")
    s.add_argument("--strong", action="store_true")
    q.add_argument("--class", dest="cls", required=True)
    q.add_argument("--max-size", type=int, default=DEFAULT_CATALOG)
    q.add_argument("frames", nargs="*", help="catalog frames (default: the class catalog)")
    add_bound(q)
    q = leaf(g, "sv", cmd_props_sv, "separation of variables for a relation formula")
    q.add_argument("--rho", required=True)
    q.add_argument("--tau", default="(top)")
    q.add_argument("--vars", required=True, help="variable names, e.g. 'x,y'")
    q.add_argument("--class", dest="cls", default="K")
    q.add_argument("--max-size", type=int, default=2)
    q.add_argument("--depth", type=int, default=2, help="candidate formula depth")
    q.add_argument("frames", nargs="*")
    q = leaf(g, "functional-limits", cmd_props_functional_limits,
             "products and equalizers of functional frames")
    q.add_argument("--samples", type=int, default=20)
    q.add_argument("--max-size", type=int, default=3)
    add_bound(q, "test-cone bound (default 5)")
    q = leaf(g, "reproduce-paper", cmd_props_reproduce, "run the fixture suite")
    add_bound(q)

    # convert
    q = top.add_parser("convert", parents=[common], help="convert between text and JSON")
    q.set_defaults(fn=cmd_convert)
    q.add_argument("file")
    q.add_argument("--format", choices=("text", "json"), required=True)
    q.add_argument("--kind", choices=KINDS)
    q.add_argument("-o", "--output", help="write the converted file here")
    return p


def _write_out(r: Report, args) -> None:
    if getattr(args, "output", None):
        d = os.path.dirname(os.path.abspath(args.output))
        os.makedirs(d, exist_ok=True)
        with open(args.output, "w") as fh:
            fh.write(r.data["output"])
    if not args.out:
        return
    os.makedirs(args.out, exist_ok=True)
    for name, text in sorted(r.files.items()):
        path = os.path.join(args.out, name)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        with open(path, "w") as fh:
            fh.write(text)
    if "summary.json" not in r.files:
        with open(os.path.join(args.out, "report.txt"), "w") as fh:
            fh.write("\n".join(r.lines) + "\n")
        with open(os.path.join(args.out, "report.json"), "w") as fh:
            fh.write(_json_report(r))


def _json_report(r: Report) -> str:
    return json.dumps({"exit": r.status, **r.data}, indent=2, sort_keys=True, default=str) + "\n"


ERRORS = (ParseError, FrameError, MorphismError, UsageError, SizeGuardError, alg.SizeGuard,
          KeyError, ValueError)


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        r = args.fn(args)
        _write_out(r, args)
    except ERRORS as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        sys.stderr.write(f"error: {msg}\n")
        return USAGE
    if args.json:
        stdout.write(_json_report(r))
    else:
        stdout.write("\n".join(r.lines) + "\n")
    return r.status


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
