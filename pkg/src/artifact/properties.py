"""Executable laws. Each check returns None or a counterexample string."""

from __future__ import annotations

import itertools
from typing import Sequence

from .backforth import BackForth, Iso
from .heyting import Elem, HeytingAlgebra
from .invariants import InvariantEngine, Portmanteau, materialize
from .presheaf import Section, Structure
from .semantics import Evaluator
from .syntax import (
    App,
    BigAnd,
    Box,
    Check,
    Const,
    Eq,
    Formula,
    Implies,
    Not,
    Term,
    Var,
    free_vars,
    mrank,
    qdegree,
    show,
    show_term,
)
from .transform import pp_normal_form, unnest


def _arity(f: Formula) -> int:
    fv = free_vars(f)
    return max(fv) + 1 if fv else 0


def assignments(m: Structure, f: Formula):
    return m.tuples(_arity(f))


def unnest_preserves_value(m: Structure, f: Formula, ev: Evaluator | None = None) -> str | None:
    ev = ev or Evaluator(m)
    g = unnest(f)
    for a in assignments(m, f):
        u, v = ev(f, a), ev(g, a)
        if u != v:
            return f"unnest changes the value of {show(f)} at {m.fmt(a)}: {m.algebra.names[u]} vs {m.algebra.names[v]}"
    return None


def rank_law(f: Formula) -> str | None:
    d, r = qdegree(unnest(f)), mrank(f)
    return None if d == r else f"qdegree(unnest) = {d} but mrank = {r} for {show(f)}"


def pp_normal_form_preserves_value(m: Structure, f: Formula, ev: Evaluator | None = None) -> str | None:
    ev = ev or Evaluator(m)
    g = pp_normal_form(f)
    for a in assignments(m, f):
        if ev(f, a) != ev(g, a):
            return f"pp normal form changes the value of {show(f)} at {m.fmt(a)}"
    return None


def box_identities(m: Structure, f: Formula, ev: Evaluator | None = None) -> str | None:
    """[top] phi = phi and [bot] phi = ~phi, as values."""
    ev = ev or Evaluator(m)
    alg = m.algebra
    top, bot = alg.names[alg.top], alg.names[alg.bot]
    for a in assignments(m, f):
        v = ev(f, a)
        if ev(Box(top, f), a) != v:
            return f"box top is not the identity on {show(f)} at {m.fmt(a)}"
        if ev(Box(bot, f), a) != ev(Not(f), a):
            return f"box bottom is not negation on {show(f)} at {m.fmt(a)}"
        if ev.forces(Box(bot, f), a) != (ev(Not(f), a) == alg.meet(m.tuple_extent(a), ev.extent(f))):
            return f"box bottom forcing differs from forcing the negation of {show(f)} at {m.fmt(a)}"
    return None


def bookkeeping(m: Structure) -> str | None:
    """[p -> q] = p => q and [p /\\ q] = p meet q for the check connective."""
    alg = m.algebra
    ev = Evaluator(m)
    for p, q in itertools.product(alg.elements, repeat=2):
        cp, cq = Check(alg.names[p]), Check(alg.names[q])
        if ev(Implies(cp, cq)) != alg.imp(p, q):
            return f"[<{alg.names[p]}> -> <{alg.names[q]}>] differs from implies"
        if ev(BigAnd((cp, cq))) != alg.meet(p, q):
            return f"[<{alg.names[p]}> /\\ <{alg.names[q]}>] differs from meet"
    return None


def focus(m: Structure, f: Formula, ev: Evaluator | None = None) -> str | None:
    """With a' = a|[phi(a)]: [phi(a)] = [phi(a')] = E(a').

    The empty tuple has extent top whatever it is restricted to, so
    sentences are checked under one-element assignments instead.
    """
    ev = ev or Evaluator(m)
    for a in m.tuples(max(_arity(f), 1)):
        v = ev(f, a)
        a2 = m.res_tuple(a, v)
        v2 = ev(f, a2)
        if not (v == v2 == m.tuple_extent(a2)):
            return f"focusing fails for {show(f)} at {m.fmt(a)}"
    return None


def substitutivity(m: Structure, s: Term, t: Term, n: int) -> str | None:
    """[a = b] meet [s(a) = t(a)] = [a = b] meet [s(b) = t(b)]."""
    ev = Evaluator(m)
    alg = m.algebra
    atom = Eq(s, t)
    for a in m.tuples(n):
        for b in m.tuples(n):
            e = m.tuple_eq(a, b)
            if alg.meet(e, ev(atom, a)) != alg.meet(e, ev(atom, b)):
                return f"substitutivity fails for {show_term(s)} = {show_term(t)} at {m.fmt(a)}, {m.fmt(b)}"
    return None


def invariance(bf: BackForth, h: Iso, p: Elem, f: Formula, ev_m: Evaluator, ev_n: Evaluator) -> str | None:
    """[phi(a)]_M = [phi(h a)]_N for every a drawn from dom(h) restricted to p.

    Values are compared below p; this only matters for sentences, whose
    context is not cut down by restricting the (empty) tuple.
    """
    m, n = bf.m, bf.n
    pairs = sorted({(m.res(a, p), n.res(b, p)) for a, b in h})
    k = _arity(f)
    meet = m.algebra.meet
    for combo in itertools.product(pairs, repeat=k):
        a = tuple(x for x, _ in combo)
        b = tuple(y for _, y in combo)
        if meet(ev_m(f, a), p) != meet(ev_n(f, b), p):
            return f"{show(f)} is not invariant at {m.fmt(a)} -> {n.fmt(b)}"
    return None


def portmanteau_agrees(m: Structure, a: Sequence[Section], n: Structure, b: Sequence[Section], max_alpha: int, move_cap: int = 1, mutation: str | None = None) -> str | None:
    pm = Portmanteau(m, a, n, b, move_cap, mutation=mutation)
    for alpha in range(max_alpha + 1):
        row = pm.row(alpha)
        if not row.agree:
            return f"verdicts disagree at alpha {alpha} for {m.fmt(a)} / {n.fmt(b)}: {row}"
    return None


def invariant_laws(engine: InvariantEngine, m: Structure, a: Sequence[Section], alpha: int) -> str | None:
    """Range bound, self-application and the restriction lemma."""
    alg = engine.alg
    x = m.homogeneous(a)
    ex = m.tuple_extent(x)
    full = materialize(engine, m, x, alpha)
    names = {nm: i for i, nm in enumerate(alg.names)}
    for level in full.levels:
        for key, v in level:
            if not alg.leq(names[v], ex):
                return f"value {v} at {key} exceeds E(a) = {alg.names[ex]}"
    for _, v in full.base:
        if not alg.leq(names[v], ex):
            return f"base value {v} exceeds E(a)"
    if alpha >= 1:
        table = dict(full.levels[alpha - 1])
        anchor = tuple(m.names[y] for y in x)
        for c in m.tuples(1):
            ec = m.tuple_extent(c)
            if alg.leq(ec, ex):
                got = table.get((m.name, anchor, tuple(m.names[y] for y in c)))
                if got is not None and got != alg.names[ec]:
                    return f"self-application gives {got} at c = {m.fmt(c)}, expected {alg.names[ec]}"
    for p in alg.below(ex):
        small = materialize(engine, m, m.res_tuple(x, p), alpha)
        big_base = dict(full.base)
        for key, v in small.base:
            if names[v] != alg.meet(names[big_base[key]], p):
                return f"restricted base differs at {key} for p = {alg.names[p]}"
        for lv_small, lv_big in zip(small.levels, full.levels):
            big = dict(lv_big)
            for key, v in lv_small:
                if big.get(key) != v:
                    return f"restricted invariant differs at {key} for p = {alg.names[p]}"
    return None


def heyting_adjunction(alg: HeytingAlgebra) -> str | None:
    for p, q, r in itertools.product(alg.elements, repeat=3):
        if alg.leq(alg.meet(p, q), r) != alg.leq(p, alg.imp(q, r)):
            return f"adjunction fails at ({alg.names[p]}, {alg.names[q]}, {alg.names[r]})"
    return None


def all_terms(m: Structure, n: int, depth: int) -> list[Term]:
    """Terms over v0..v(n-1) and the constants up to the given nesting depth."""
    sig = m.signature
    terms: list[Term] = [Var(i) for i in range(n)] + [Const(c) for c in sorted(sig.constants)]
    for _ in range(depth):
        new = list(terms)
        for fn, k in sorted(sig.functions.items()):
            for args in itertools.product(terms, repeat=k):
                new.append(App(fn, tuple(args)))
        terms = list(dict.fromkeys(new))
    return terms

