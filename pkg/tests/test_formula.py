import pytest
from hypothesis import given, strategies as st

from kripkelab.formula import (AXIOMS, BOT, TOP, BigAnd, BigOr, Box, BoxStar, Neg, Var, box_depth,
                               boxn, depth, dia, iff, imp, instantiate_schema, logic_schemata,
                               matches_schema, metavariables, parse_formula, parse_formula_at,
                               parse_formulas, substitute, variables)
from kripkelab.frame import ParseError


def formulas(names=("p", "q"), max_leaves=8):
    leaf = st.sampled_from([Var(n) for n in names] + [TOP, BOT])
    return st.recursive(leaf, lambda sub: st.one_of(
        sub.map(Neg), sub.map(Box), sub.map(BoxStar),
        st.lists(sub, max_size=3).map(BigAnd), st.lists(sub, max_size=3).map(BigOr)),
        max_leaves=max_leaves)


@given(formulas())
def test_print_parse_round_trip(phi):
    assert parse_formula(phi.text()) == phi


@given(formulas())
def test_text_is_canonical_for_sets(phi):
    assert BigAnd([phi, TOP]).text() == BigAnd([TOP, phi]).text()


def test_sugars():
    p, q = Var("p"), Var("q")
    assert parse_formula("(imp (var p) (var q))") == BigOr([Neg(p), q])
    assert parse_formula("(dia (var p))") == Neg(Box(Neg(p)))
    assert dia(p).text() == "(dia (var p))"
    assert parse_formula("(iff (var p) (var q))") == iff(p, q)
    assert parse_formula("(boxn 3 (var p))") == Box(Box(Box(p)))
    assert parse_formula("(top)") == TOP == BigAnd([])
    assert parse_formula("(bot)") == BOT == BigOr([])
    assert parse_formula("(and (var p) (var p))") == BigAnd([p])


def test_parse_many_and_at_offset():
    fs = parse_formulas("(var p) (box (var q))")
    assert fs == [Var("p"), Box(Var("q"))]
    f, end = parse_formula_at("xx (var p) tail", 3)
    assert f == Var("p") and end == 11


@pytest.mark.parametrize("text, line, col", [
    ("(var p", 1, 1),
    ("(frob (var p))", 1, 2),
    ("(not (var p) (var q))", 1, 1),
    ("(var p))", 1, 8),
    ("(and\n  (var p)\n  (boxn x (var p)))", 3, 9),
    ("p", 1, 1),
])
def test_parse_errors(text, line, col):
    with pytest.raises(ParseError) as e:
        parse_formula(text)
    assert (e.value.line, e.value.col) == (line, col)


def test_measures():
    phi = parse_formula("(and (box (var p)) (not (box (box (var q)))))")
    assert variables(phi) == {"p", "q"}
    assert box_depth(phi) == 2
    assert depth(phi) == 4
    assert boxn(0, Var("p")) == Var("p")


def test_substitution_is_simultaneous():
    phi = imp(Var("p"), Var("q"))
    out = substitute(phi, {"p": Var("q"), "q": Var("p")})
    assert out == imp(Var("q"), Var("p"))


def test_schema_matching():
    k4 = parse_formula(AXIOMS["K4"])
    assert metavariables(k4) == {"?p"}
    inst = instantiate_schema(k4, {"?p": Var("x")})
    assert matches_schema(inst, k4) == {"?p": Var("x")}
    assert matches_schema(imp(Box(Var("x")), Box(Box(Var("y")))), k4) is None
    with pytest.raises(KeyError):
        instantiate_schema(k4, {})


@given(formulas(max_leaves=4), formulas(max_leaves=4))
def test_lin_instances_match(a, b):
    lin = parse_formula(AXIOMS["Lin"])
    inst = instantiate_schema(lin, {"?p1": a, "?p2": b})
    sigma = matches_schema(inst, lin)
    assert sigma is not None
    assert instantiate_schema(lin, sigma) == inst


def test_logic_schemata():
    assert logic_schemata("K") == []
    assert len(logic_schemata("Grz.Lin")) == 4
    with pytest.raises(KeyError):
        logic_schemata("nope")
