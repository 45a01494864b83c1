"""Acceptance criteria, one test each, with their time limits.

Each test prints a PASS/FAIL line; the lines are repeated in the pytest
terminal summary under "acceptance criteria".
"""

import itertools
import random
import time
from contextlib import contextmanager

from artifact.backforth import BackForth, scott_rank
from artifact.fixtures import all_fixtures, pure_set
from artifact.gen import (
    SIGNATURES,
    FormulaParams,
    StructureParams,
    random_algebra,
    random_formula,
    random_pp_formula,
    random_structure,
    small_algebra,
)
from artifact.heyting import diamond, three, two
from artifact.invariants import InvariantEngine, Portmanteau, SentenceBuilder, materialize
from artifact.properties import (
    all_terms,
    bookkeeping,
    box_identities,
    focus,
    heyting_adjunction,
    invariance,
    invariant_laws,
    pp_normal_form_preserves_value,
    substitutivity,
)
from artifact.semantics import Evaluator
from artifact.syntax import free_vars, is_unnested, mrank, qdegree
from artifact.transform import unnest

from conftest import ACCEPTANCE_LINES
from oracles import classical_scott_rank, ef_equivalent, global_sections, tarski


@contextmanager
def criterion(number: int, title: str, limit: float):
    start = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        passed = ok and elapsed < limit
        line = f"C{number} {'PASS' if passed else 'FAIL'}  {title}  ({elapsed:.2f}s, limit {limit:g}s)"
        print(line)
        ACCEPTANCE_LINES.append(line)
    assert elapsed < limit, f"took {elapsed:.2f}s, limit {limit:g}s"


def arity(f):
    return max(free_vars(f), default=-1) + 1


def anchors(m, k=1):
    return [()] + m.homogeneous_tuples(k)


def fixture_pairs():
    fx = all_fixtures()
    return [(fx[0], fx[1])] + [(m, m) for m in fx]


def test_c1_heyting_adjunction():
    with criterion(1, "Heyting adjunction", 1):
        rng = random.Random("c1")
        algebras = [two(), three(), diamond()] + [random_algebra(rng, 5) for _ in range(50)]
        for alg in algebras:
            assert heyting_adjunction(alg) is None


def test_c2_classical_reduction():
    with criterion(2, "classical reduction against a Tarskian evaluator", 10):
        rng = random.Random("c2")
        alg = two()
        structures = [random_structure(rng, alg, SIGNATURES[rng.choice(sorted(SIGNATURES))], f"M{i}") for i in range(100)]
        params = FormulaParams(max_rank=3, max_depth=3, box=False, check=False)
        for i in range(200):
            m = structures[i % 100]
            f = random_formula(rng, m.signature, list(alg.names), params)
            assert mrank(f) <= 3
            ev = Evaluator(m, memo=True)
            for a in m.tuples(arity(f)):
                if any(m.extent[x] != alg.top for x in a):
                    want = alg.bot
                else:
                    want = alg.top if tarski(m, f, dict(enumerate(a))) else alg.bot
                assert ev(f, a) == want


def test_c3_unnesting():
    with criterion(3, "unnesting preserves value and mrank = qdegree", 60):
        rng = random.Random("c3")
        algebras = [two, three, diamond]
        structures = [
            random_structure(rng, algebras[i % 3](), SIGNATURES[rng.choice(["fun", "mixed", "rich"])], f"M{i}")
            for i in range(20)
        ]
        params = FormulaParams(max_rank=3, max_depth=3, n_free=2, var_pool=3, max_members=2)
        done = 0
        while done < 200:
            m = structures[done % 20]
            f = random_formula(rng, m.signature, list(m.algebra.names), params)
            if is_unnested(f):
                continue
            g = unnest(f)
            assert mrank(f) == qdegree(g)
            ev = Evaluator(m, memo=True)
            for a in m.tuples(arity(f)):
                assert ev(f, a) == ev(g, a)
            done += 1


def test_c4_portmanteau():
    with criterion(4, "portmanteau: four verdicts agree on random pairs", 300):
        rng = random.Random("c4")
        for i in range(100):
            alg = small_algebra(rng)
            assert alg.size <= 5
            sig = SIGNATURES[rng.choice(["empty", "unary", "const", "fun", "mixed"])]
            params = StructureParams(max_generators=3)
            m = random_structure(rng, alg, sig, "M", params)
            n = random_structure(rng, alg, sig, "N", params)
            k = rng.choice([0, 1])
            pairs = [(x, y) for x in m.tuples(k) for y in n.tuples(k) if m.tuple_extent(x) == n.tuple_extent(y)]
            x, y = rng.choice(pairs)
            pm = Portmanteau(m, x, n, y, move_cap=1)
            for alpha in range(4):
                row = pm.row(alpha)
                assert row.agree, f"pair {i}: {row}"


def test_c5_ef_calibration():
    with criterion(5, "EF calibration on pure sets of sizes 2 and 3", 1):
        s2, s3 = pure_set(2), pure_set(3)
        pm = Portmanteau(s2, (), s3, ())
        for alpha, equivalent in [(2, True), (3, False)]:
            row = pm.row(alpha)
            assert row.agree
            assert row.invariants_equal is equivalent
            assert row.q_witness is equivalent
            assert row.game_winner == ("II" if equivalent else "I")
            assert row.mutual_forcing is equivalent
            assert ef_equivalent(s2, s3, (), (), alpha) is equivalent


def test_c6_invariance():
    with criterion(6, "formulae of qdegree <= alpha are invariant under Q_alpha(p)", 60):
        for m, n in fixture_pairs():
            rng = random.Random(f"c6/{m.name}/{n.name}")
            bf = BackForth(m, n)
            ev_m, ev_n = Evaluator(m, memo=True), Evaluator(n, memo=True)
            names = list(m.algebra.names)
            for alpha in range(4):
                params = FormulaParams(
                    max_rank=alpha, max_depth=3, n_free=2, var_pool=3, unnested_only=True,
                    nested_terms=False, max_qdegree=alpha, max_block=1,
                )
                fs = [random_formula(rng, m.signature, names, params) for _ in range(50)]
                assert all(is_unnested(f) and qdegree(f) <= alpha for f in fs)
                for p in m.algebra.elements:
                    for h in bf.level(alpha, p):
                        for f in fs:
                            assert invariance(bf, h, p, f, ev_m, ev_n) is None


def test_c7_lemma_suite():
    with criterion(7, "lemma suite over the fixtures", 30):
        for m in all_fixtures():
            rng = random.Random(f"c7/{m.name}")
            names = list(m.algebra.names)
            ev = Evaluator(m, memo=True)
            fs = [random_formula(rng, m.signature, names, FormulaParams(max_rank=2, max_depth=3, var_pool=3)) for _ in range(20)]
            assert bookkeeping(m) is None
            for f in fs:
                assert box_identities(m, f, ev) is None
                assert focus(m, f, ev) is None
            terms = all_terms(m, 2, 1)
            for s, t in itertools.combinations(terms, 2):
                assert substitutivity(m, s, t, 2) is None
            for _ in range(20):
                assert pp_normal_form_preserves_value(m, random_pp_formula(rng, m.signature), ev) is None
            engine = InvariantEngine([m])
            for x in anchors(m):
                for alpha in range(3):
                    assert invariant_laws(engine, m, x, alpha) is None


def test_c8_scott_rank():
    with criterion(8, "Scott rank: monotone, stable, classical over two", 60):
        for m in all_fixtures():
            sr = scott_rank(m, 2, extra_levels=2)
            gs = sr.gammas
            assert all(a <= b for a, b in zip(gs, gs[1:]))
            assert all(g == gs[sr.rank] for g in gs[sr.rank:])
        rng = random.Random("c8")
        params = StructureParams(max_generators=4, identify_prob=0.0, top_prob=1.0)
        omega2 = [m for m in all_fixtures() if m.algebra is two()]
        omega2 += [random_structure(rng, two(), SIGNATURES[rng.choice(["unary", "binary", "fun"])], f"R{i}", params) for i in range(6)]
        for m in omega2:
            assert all(m.extent[s] in (m.algebra.top, m.algebra.bot) for s in m.sections)
            rank, sizes = classical_scott_rank(m, 2)
            sr = scott_rank(m, 2)
            assert (sr.rank, sr.gamma_sizes) == (rank, sizes), m.name
            assert len(global_sections(m)) >= 1


def test_c9_scott_sentences():
    with criterion(9, "Scott sentences: self-forcing and the value identity", 60):
        for m in all_fixtures():
            sb = SentenceBuilder([m])
            engine = InvariantEngine([m])
            ev = sb.evaluator(m)
            alg = m.algebra
            for x in anchors(m):
                for alpha in range(3):
                    assert ev(sb.phi(alpha, m, x), x) == m.tuple_extent(x)
                for alpha in range(2):
                    g = materialize(engine, m, x, alpha + 1)
                    for (_, s, t), v in g.levels[alpha]:
                        u = m.homogeneous(tuple(m.section(y) for y in s + t))
                        assert alg.names[ev(sb.exists_clause(alpha, m, u, len(x)), x)] == v
