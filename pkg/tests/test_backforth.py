import itertools
import math
import random

import pytest
from hypothesis import given, strategies as st

from artifact.backforth import BackForth, ExtentMismatch, enumerate_partial_isos, scott_rank, sim_alpha
from artifact.fixtures import all_fixtures, pure_set
from artifact.gen import SIGNATURES, FormulaParams, StructureParams, random_formula, random_structure
from artifact.heyting import two
from artifact.presheaf import Signature, build_structure
from artifact.properties import invariance
from artifact.semantics import Evaluator

from oracles import classical_scott_rank, ef_equivalent, global_sections

seeds = st.integers(0, 2**32 - 1)


def path(n):
    alg = two()
    edges = [("E", [f"x{i}", f"x{i + 1}"], alg.top) for i in range(n - 1)]
    edges += [("E", [f"x{i + 1}", f"x{i}"], alg.top) for i in range(n - 1)]
    return build_structure(f"P{n}", alg, Signature({"E": 2}), [(f"x{i}", alg.top) for i in range(n)], relations=edges)


def test_single_section_isos():
    m = pure_set(1)
    isos = enumerate_partial_isos(m, m)
    # the empty map, the bottom section alone, and a -> a with its restriction
    assert len(isos) == 3


def test_pure_set_iso_count(s2, s3):
    classical = sum(math.comb(2, k) * math.perm(3, k) for k in range(3))
    assert len(enumerate_partial_isos(s2, s3)) == classical + 1


def test_constants_are_preserved(f3):
    c = f3.const["c"]
    for h in enumerate_partial_isos(f3, f3):
        for a, b in h:
            if a == c:
                assert b == c


def test_pure_sets_calibration(s2, s3):
    assert sim_alpha(s2, (), s3, (), 2) is not None
    assert sim_alpha(s2, (), s3, (), 3) is None


def test_extent_mismatch(c3):
    with pytest.raises(ExtentMismatch):
        sim_alpha(c3, (c3.section("a"),), c3, (c3.section("a|m"),), 0)


def test_identity_survives_every_level(fixture_structure):
    m = fixture_structure
    bf = BackForth(m, m)
    for a in m.sections:
        for alpha in range(4):
            assert bf.sim((a,), (a,), alpha) is not None


def test_levels_are_monotone_and_stabilize(fixture_structure):
    m = fixture_structure
    bf = BackForth(m, m)
    table = bf.table(5)
    alg = m.algebra
    for alpha in range(5):
        for p in alg.elements:
            assert set(table.levels[alpha + 1][p]) <= set(table.levels[alpha][p])
    star = table.stable_at()
    assert star is not None
    for alpha in range(star, 6):
        assert table.levels[alpha] == table.levels[star]


def test_level_zero_is_independent_of_p(c3):
    bf = BackForth(c3, c3)
    levels = [set(bf.level(0, p)) for p in c3.algebra.elements]
    assert all(lv == levels[0] for lv in levels)


def test_q_closed_under_sub_isos(d4):
    bf = BackForth(d4, d4)
    alg = d4.algebra
    for alpha in range(3):
        for p in alg.elements:
            for h in bf.level(alpha, p):
                for k in range(len(h)):
                    for sub in itertools.combinations(sorted(h), k):
                        g = bf.gen(sub)
                        assert g is not None and bf.in_q(g, alpha, p)


def test_scott_rank_of_pure_set():
    sr = scott_rank(pure_set(2), 1)
    assert sr.rank == 0


def test_scott_rank_of_chain_fixture(c3):
    sr = scott_rank(c3, 2, extra_levels=2)
    assert sr.gamma_sizes == sorted(sr.gamma_sizes)
    assert all(g == sr.gammas[sr.rank] for g in sr.gammas[sr.rank:])


@pytest.mark.parametrize("n", [3, 4])
def test_scott_rank_matches_classical_on_paths(n):
    m = path(n)
    rank, sizes = classical_scott_rank(m, 2)
    sr = scott_rank(m, 2)
    assert (sr.rank, sr.gamma_sizes) == (rank, sizes)
    assert sr.rank >= 1


@given(seeds)
def test_sim_matches_classical_ef(seed):
    rng = random.Random(seed)
    sig = SIGNATURES[rng.choice(["unary", "binary", "const", "fun", "mixed"])]
    params = StructureParams(max_generators=3, identify_prob=0.0, top_prob=1.0)
    m = random_structure(rng, two(), sig, "M", params)
    n = random_structure(rng, two(), sig, "N", params)
    bf = BackForth(m, n)
    gm, gn = global_sections(m), global_sections(n)
    for alpha in range(3):
        assert (bf.sim((), (), alpha) is not None) == ef_equivalent(m, n, (), (), alpha)
        for a in gm:
            for b in gn:
                assert (bf.sim((a,), (b,), alpha) is not None) == ef_equivalent(m, n, (a,), (b,), alpha)


def _fixture_pairs():
    fx = all_fixtures()
    out = [(fx[0], fx[1])]
    out += [(m, m) for m in fx[2:]]
    return out


@pytest.mark.parametrize("pair", _fixture_pairs(), ids=lambda p: f"{p[0].name}-{p[1].name}")
def test_invariance_under_q(pair):
    m, n = pair
    rng = random.Random(f"{m.name}/{n.name}")
    bf = BackForth(m, n)
    ev_m, ev_n = Evaluator(m, memo=True), Evaluator(n, memo=True)
    names = list(m.algebra.names)
    for alpha in range(3):
        params = FormulaParams(
            max_rank=alpha, max_depth=3, n_free=2, var_pool=3, unnested_only=True,
            nested_terms=False, max_qdegree=alpha, max_block=1,
        )
        fs = [random_formula(rng, m.signature, names, params) for _ in range(10)]
        for p in m.algebra.elements:
            for h in bf.level(alpha, p):
                for f in fs:
                    assert invariance(bf, h, p, f, ev_m, ev_n) is None
