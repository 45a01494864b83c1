import random

import pytest
from hypothesis import given, strategies as st

from artifact.gen import SIGNATURES, FormulaParams, random_formula
from artifact.presheaf import Signature
from artifact.syntax import (
    App,
    ArityMismatch,
    BigAnd,
    BigOr,
    Box,
    Const,
    Eq,
    Exists,
    ParseError,
    Rel,
    UnknownAlgebraElement,
    UnknownSymbol,
    Var,
    classify,
    enumerate_unnested_atomics,
    mrank,
    parse_formula,
    qdegree,
    show,
)

SIG = Signature({"R": 1, "E": 2}, {"f": 1}, {"c": None, "d": None})
CHAIN = ["bot", "m", "top"]


def test_parse_examples():
    assert parse_formula("exists {x} R(x)", SIG) == Exists((0,), Rel("R", (Var(0),)))
    assert parse_formula("[m](v0 = c)", SIG, CHAIN) == Box("m", Eq(Var(0), Const("c")))
    assert parse_formula("f(c) = v0", SIG) == Eq(App("f", (Const("c"),)), Var(0))


def test_parse_binary_sugar():
    f = parse_formula("R(v0) /\\ R(v1) \\/ v0 = v1", SIG)
    assert f == BigOr((BigAnd((Rel("R", (Var(0),)), Rel("R", (Var(1),)))), Eq(Var(0), Var(1))))


def test_named_variables_avoid_explicit_indices():
    f = parse_formula("exists {x} E(x, v0)", SIG)
    assert f == Exists((1,), Rel("E", (Var(1), Var(0))))


@pytest.mark.parametrize(
    "text,exc",
    [
        ("R(v0, v1)", ArityMismatch),
        ("S(v0)", UnknownSymbol),
        ("[q] R(v0)", UnknownAlgebraElement),
        ("exists {} R(v0)", ParseError),
        ("R(v0", ParseError),
        ("v0 = ", ParseError),
        ("R(v0) $", ParseError),
    ],
)
def test_parse_errors(text, exc):
    with pytest.raises(exc):
        parse_formula(text, SIG, CHAIN)


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as info:
        parse_formula("R(v0) /\\ R(v0, v1)", SIG)
    assert info.value.pos == 9


def test_qdegree_examples():
    x, y = Var(0), Var(1)
    assert qdegree(Exists((0, 1), Eq(x, y))) == 1
    assert qdegree(Exists((0,), Exists((1,), Eq(x, y)))) == 2
    assert qdegree(Eq(x, y)) == 0


def test_mrank_examples():
    assert mrank(Eq(App("f", (Const("c"),)), Var(0))) == 1
    assert mrank(Eq(Const("c"), Const("d"))) == 1
    assert mrank(Rel("E", (Var(0), Var(1)))) == 0
    assert mrank(Box("m", Exists((0,), Rel("R", (Const("c"),))))) == 2


def test_classify_examples():
    c = classify(Eq(Var(0), Const("c")))
    assert c.is_unnested and c.is_ceu and c.is_pp
    c = classify(Box("m", BigAnd((Eq(Var(0), Var(1)),))))
    assert c.is_ceu and not c.is_pp
    c = classify(Eq(App("f", (Const("c"),)), Var(0)))
    assert not (c.is_unnested or c.is_ceu or c.is_pp)


def test_enumerate_unnested_atomics():
    sig = Signature({"R": 1})
    insts = {inst for _, _, inst in enumerate_unnested_atomics(sig, 1)}
    assert insts == {Eq(Var(0), Var(0)), Rel("R", (Var(0),))}
    maps = [fmap for _, fmap, _ in enumerate_unnested_atomics(Signature(), 2)]
    assert sorted(maps) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    with_c = {inst for _, _, inst in enumerate_unnested_atomics(Signature(constants={"c": None}), 1)}
    assert Eq(Var(0), Const("c")) in with_c


formulas = st.tuples(st.integers(0, 2**32 - 1), st.sampled_from(sorted(SIGNATURES)))


def _random(seed, signame, **kw):
    return random_formula(random.Random(seed), SIGNATURES[signame], CHAIN, FormulaParams(**kw))


@given(formulas)
def test_print_parse_round_trip(arg):
    seed, signame = arg
    f = _random(seed, signame)
    assert parse_formula(show(f), SIGNATURES[signame], CHAIN) == f


@given(formulas)
def test_qdegree_bounded_by_mrank(arg):
    f = _random(*arg)
    assert qdegree(f) <= mrank(f)


@given(st.integers(0, 2**32 - 1))
def test_qdegree_equals_mrank_for_relational(seed):
    f = _random(seed, "binary")
    assert qdegree(f) == mrank(f)
