import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from artifact.backforth import BackForth
from artifact.fixtures import all_fixtures, pure_set
from artifact.gen import SIGNATURES, random_structure, small_algebra
from artifact.heyting import three
from artifact.invariants import (
    CapExceeded,
    IncomparableDomains,
    InvariantEngine,
    Portmanteau,
    SentenceBuilder,
    StrictModeRequired,
    base_invariant,
    base_values,
    compare_invariants,
    g_invariant,
    h_invariant,
    materialize,
    scott_sentence,
)
from artifact.presheaf import Signature, build_structure
from artifact.properties import invariant_laws
from artifact.semantics import Evaluator
from artifact.syntax import classify, mrank, qdegree

from oracles import NaiveG

seeds = st.integers(0, 2**32 - 1)


def anchors(m, k=1):
    return [()] + [x for x in m.homogeneous_tuples(k)]


def test_base_invariant_empty_signature(s2):
    a = s2.section("x0")
    base = base_invariant(s2, (a,))
    assert base.as_dict() == {("v0 = v1", (0, 0)): s2.algebra.top}


def test_base_invariant_restriction(c3):
    alg = c3.algebra
    for (a,) in c3.tuples(1):
        full = base_invariant(c3, (a,)).as_dict()
        for p in alg.elements:
            small = base_invariant(c3, (c3.res(a, p),)).as_dict()
            assert small == {k: alg.meet(v, p) for k, v in full.items()}


def test_equal_base_iff_partial_iso(fixture_structure):
    m = fixture_structure
    bf = BackForth(m, m)
    for k in (1, 2):
        hs = m.homogeneous_tuples(k)
        for x, y in itertools.product(hs, repeat=2):
            if m.tuple_extent(x) != m.tuple_extent(y):
                continue
            h = bf.gen(zip(x, y))
            iso = h is not None and bf.is_partial_iso(h)
            assert (base_values(m, x) == base_values(m, y)) == iso


def test_g_matches_naive_recursion():
    for universe in [[pure_set(2), pure_set(3)], [all_fixtures()[2]], [all_fixtures()[3]], [all_fixtures()[4]]]:
        engine = InvariantEngine(universe)
        naive = NaiveG(universe, base_values)
        for ki, k in enumerate(universe):
            for x in anchors(k):
                for beta in range(3):
                    got = materialize(engine, k, x, beta)
                    node, levels = naive.g(ki, x, beta), []
                    while node[0] != "I":
                        node, table = node
                        levels.append(table)
                    assert [frozenset(lv) for lv in got.levels] == levels[::-1]
                    assert tuple(v for _, v in got.base) == tuple(k.algebra.names[v] for v in node[3])


def test_g_self_comparison(fixture_structure):
    m = fixture_structure
    for alpha in range(3):
        x = g_invariant(m, m, (), alpha)
        assert compare_invariants(x, x).equal


def test_pure_sets_g(s2, s3):
    for alpha in range(3):
        x, y = g_invariant(s2, s3, (), alpha), g_invariant(s3, s2, (), alpha)
        assert compare_invariants(x, y).equal
    x, y = g_invariant(s2, s3, (), 3), g_invariant(s3, s2, (), 3)
    cmp = compare_invariants(x, y)
    assert not cmp.equal and cmp.first_divergence[0] == 3


def test_h_with_pair_probes_equals_g(s2, s3, c3):
    for m, n in [(s2, s3), (c3, c3.renamed("C3b"))]:
        for x in anchors(m):
            assert h_invariant([m, n], m, x, 2) == g_invariant(m, n, x, 2)
            assert h_invariant([n, m], m, x, 2) == g_invariant(m, n, x, 2)


def test_single_probe_separates_within_a_model(c3):
    a, b = (c3.section("a"),), (c3.section("b"),)
    assert h_invariant([c3], c3, a, 0) != h_invariant([c3], c3, b, 0)


def test_comparison_errors(s2, s3, c3):
    with pytest.raises(IncomparableDomains):
        compare_invariants(g_invariant(s2, s3, (), 1), g_invariant(s2, s3, (), 2))
    x = g_invariant(c3, c3, (c3.section("a"),), 1)
    y = g_invariant(c3, c3, (c3.section("a|m"),), 1)
    with pytest.raises(IncomparableDomains):
        compare_invariants(x, y)


def test_cap_exceeded(s2):
    engine = InvariantEngine([s2], max_tuple_len=2)
    with pytest.raises(CapExceeded):
        engine.type(3, s2, ())
    with pytest.raises(CapExceeded):
        scott_sentence(s2, (), 3, max_tuple_len=2)


def test_sentences_need_strict_constants():
    alg = three()
    sig = Signature(constants={"c": "m"})
    m = build_structure("L", alg, sig, [("a", alg.top)], constants=[("c", "a|m")])
    with pytest.raises(StrictModeRequired):
        SentenceBuilder([m])


def test_divergence_is_monotone(s2, s3):
    engine = InvariantEngine([s2, s3])
    verdicts = [engine.equal(alpha, s2, (), s3, ()) for alpha in range(5)]
    assert verdicts == sorted(verdicts, reverse=True)
    assert verdicts == [True, True, True, False, False]


def test_invariant_laws_on_fixtures(fixture_structure):
    m = fixture_structure
    engine = InvariantEngine([m])
    for x in anchors(m):
        for alpha in range(3):
            assert invariant_laws(engine, m, x, alpha) is None


def test_restricted_anchors_keep_equality(c3):
    engine = InvariantEngine([c3])
    alg = c3.algebra
    hs = c3.homogeneous_tuples(1)
    for x, y in itertools.product(hs, repeat=2):
        if c3.tuple_extent(x) != c3.tuple_extent(y) or not engine.equal(2, c3, x, c3, y):
            continue
        for p in alg.elements:
            assert engine.equal(2, c3, c3.res_tuple(x, p), c3, c3.res_tuple(y, p))


def test_sentence_shape(fixture_structure):
    m = fixture_structure
    sb = SentenceBuilder([m])
    for x in anchors(m):
        for alpha in range(3):
            f = sb.phi(alpha, m, x)
            assert classify(f).is_ceu
            assert mrank(f) == qdegree(f) == alpha


def test_self_forcing(fixture_structure):
    m = fixture_structure
    sb = SentenceBuilder([m])
    ev = sb.evaluator(m)
    for x in anchors(m):
        for alpha in range(3):
            assert ev(sb.phi(alpha, m, x), x) == m.tuple_extent(x)


def test_box_subscripts_track_invariants(c3, d4):
    for m in (c3, d4):
        n = m.renamed(m.name + "'")
        sb = SentenceBuilder([m, n])
        engine = InvariantEngine([m, n])
        ev = sb.evaluator(n)
        for x, y in itertools.product(m.homogeneous_tuples(1), repeat=2):
            if m.tuple_extent(x) != n.tuple_extent(y):
                continue
            for alpha in range(3):
                forced = ev(sb.phi(alpha, m, x), y) == n.tuple_extent(y)
                assert forced == engine.equal(alpha, m, x, n, y)


def test_exists_clause_value_is_invariant_value(fixture_structure):
    m = fixture_structure
    engine = InvariantEngine([m])
    sb = SentenceBuilder([m])
    ev = sb.evaluator(m)
    alg = m.algebra
    for x in anchors(m):
        n = len(x)
        for alpha in range(2):
            g = materialize(engine, m, x, alpha + 1)
            for (kname, s, t), v in g.levels[alpha]:
                u = m.homogeneous(tuple(m.section(y) for y in s + t))
                clause = sb.exists_clause(alpha, m, u, n)
                assert alg.names[ev(clause, x)] == v


@given(seeds)
@settings(max_examples=15)
def test_portmanteau_on_random_pairs(seed):
    rng = random.Random(seed)
    alg = small_algebra(rng)
    sig = SIGNATURES[rng.choice(["empty", "unary", "const", "fun"])]
    m = random_structure(rng, alg, sig, "M")
    n = random_structure(rng, alg, sig, "N")
    k = rng.choice([0, 1])
    pairs = [(x, y) for x in m.tuples(k) for y in n.tuples(k) if m.tuple_extent(x) == n.tuple_extent(y)]
    x, y = rng.choice(pairs)
    pm = Portmanteau(m, x, n, y)
    for alpha in range(3):
        assert pm.row(alpha).agree


@pytest.mark.parametrize("mutation", ["box-imp", "exists-drop-first"])
def test_portmanteau_detects_evaluator_mutations(mutation, s2, s3):
    pm = Portmanteau(s2, (), s3, (), mutation=mutation)
    assert not all(pm.row(alpha).agree for alpha in range(4))
