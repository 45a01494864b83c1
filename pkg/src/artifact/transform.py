"""Source-to-source rewrites: unnesting, pp normal form, box/check translations."""

from __future__ import annotations

import itertools
from typing import Iterator

from .syntax import (
    FRESH_BASE,
    App,
    BigAnd,
    BigOr,
    Box,
    Check,
    Const,
    Eq,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    Rel,
    Term,
    Var,
    all_vars,
    iff,
    is_pp,
    is_unnested_atomic,
    rename,
)


class NotPP(ValueError):
    pass


def _fresh_counter(f: Formula) -> Iterator[int]:
    start = max([FRESH_BASE - 1, *all_vars(f)]) + 1
    return itertools.count(start)


def _name(t: Term, fresh: Iterator[int]) -> tuple[Var, list[int], list[Formula]]:
    """A variable standing for ``t`` plus the pp conditions defining it."""
    if isinstance(t, Var):
        return t, [], []
    if isinstance(t, Const):
        y = Var(next(fresh))
        return y, [y.index], [Eq(y, t)]
    args, vs, cs = _name_all(t.args, fresh)
    y = Var(next(fresh))
    return y, vs + [y.index], cs + [Eq(y, App(t.fn, args))]


def _name_all(ts, fresh) -> tuple[tuple[Var, ...], list[int], list[Formula]]:
    names, vs, cs = [], [], []
    for t in ts:
        y, v, c = _name(t, fresh)
        names.append(y)
        vs += v
        cs += c
    return tuple(names), vs, cs


def _prenex(vs: list[int], cs: list[Formula]) -> Formula:
    body: Formula = BigAnd(tuple(cs))
    for v in reversed(vs):
        body = Exists((v,), body)
    return body


def unnest_atomic(f: Formula, fresh: Iterator[int] | None = None) -> Formula:
    """Unnested pp equivalent of an atomic formula.

    The result is a string of single-variable existentials over a flat
    conjunction; it introduces exactly mrank(f) fresh variables.
    """
    if not isinstance(f, (Eq, Rel)):
        raise TypeError(f"not atomic: {f!r}")
    if is_unnested_atomic(f):
        return f
    fresh = fresh if fresh is not None else _fresh_counter(f)
    if isinstance(f, Rel):
        args, vs, cs = _name_all(f.args, fresh)
        return _prenex(vs, cs + [Rel(f.name, args)])
    l, r = f.left, f.right
    if isinstance(l, Const) and isinstance(r, Const):
        y = Var(next(fresh))
        return _prenex([y.index], [Eq(y, l), Eq(y, r)])
    if isinstance(l, App):
        args, vs, cs = _name_all(l.args, fresh)
        y, v2, c2 = _name(r, fresh)
        return _prenex(vs + v2, cs + c2 + [Eq(App(l.fn, args), y)])
    y, v1, c1 = _name(l, fresh)
    args, vs, cs = _name_all(r.args, fresh)
    return _prenex(v1 + vs, c1 + cs + [Eq(y, App(r.fn, args))])


def unnest(f: Formula) -> Formula:
    """Replace every atomic subformula by its unnesting."""
    fresh = _fresh_counter(f)

    def go(g: Formula) -> Formula:
        if isinstance(g, (Eq, Rel)):
            return unnest_atomic(g, fresh)
        if isinstance(g, Not):
            return Not(go(g.body))
        if isinstance(g, Box):
            return Box(g.p, go(g.body))
        if isinstance(g, Implies):
            return Implies(go(g.left), go(g.right))
        if isinstance(g, (BigAnd, BigOr)):
            return type(g)(tuple(go(h) for h in g.members))
        if isinstance(g, (Forall, Exists)):
            return type(g)(g.vars, go(g.body))
        return g

    return go(f)


def pp_normal_form(f: Formula) -> Formula:
    """Prenex existential conjunction of unnested atomics, value-equal to ``f``.

    Bound variables are renamed to fresh indices, so no capture can occur.
    """
    if not is_pp(f):
        raise NotPP("pp normal form needs a formula built from unnested atomics with /\\ and exists")
    fresh = _fresh_counter(f)

    def go(g: Formula) -> tuple[list[tuple[int, ...]], list[Formula]]:
        if isinstance(g, (Eq, Rel)):
            return [], [g]
        if isinstance(g, BigAnd):
            blocks, atoms = [], []
            for h in g.members:
                b, a = go(h)
                blocks += b
                atoms += a
            return blocks, atoms
        assert isinstance(g, Exists)
        m = {v: next(fresh) for v in g.vars}
        b, a = go(rename(g.body, m))
        return [tuple(m[v] for v in g.vars)] + b, a

    blocks, atoms = go(f)
    body: Formula = atoms[0] if len(atoms) == 1 else BigAnd(tuple(atoms))
    for vs in reversed(blocks):
        body = Exists(tuple(sorted(vs)), body)
    return body


def box_to_check(f: Formula) -> Formula:
    """Replace each [p] g by (g' <-> <p>)."""
    if isinstance(f, Box):
        return iff(box_to_check(f.body), Check(f.p))
    if isinstance(f, Not):
        return Not(box_to_check(f.body))
    if isinstance(f, Implies):
        return Implies(box_to_check(f.left), box_to_check(f.right))
    if isinstance(f, (BigAnd, BigOr)):
        return type(f)(tuple(box_to_check(g) for g in f.members))
    if isinstance(f, (Forall, Exists)):
        return type(f)(f.vars, box_to_check(f.body))
    return f


def tautology(v: int) -> Formula:
    """~exists v (v = v) \\/ ~~exists v (v = v)."""
    e = Exists((v,), Eq(Var(v), Var(v)))
    return BigOr((Not(e), Not(Not(e))))


def check_to_box(f: Formula) -> Formula:
    """Replace each <p> by [p] tau.

    Value preservation needs tau to be forced in context: always true under
    a nonempty assignment; for sentences it needs the section extents to
    join to top or a De Morgan algebra.
    """
    v = max([FRESH_BASE - 1, *all_vars(f)]) + 1
    tau = tautology(v)

    def go(g: Formula) -> Formula:
        if isinstance(g, Check):
            return Box(g.p, tau)
        if isinstance(g, Not):
            return Not(go(g.body))
        if isinstance(g, Box):
            return Box(g.p, go(g.body))
        if isinstance(g, Implies):
            return Implies(go(g.left), go(g.right))
        if isinstance(g, (BigAnd, BigOr)):
            return type(g)(tuple(go(h) for h in g.members))
        if isinstance(g, (Forall, Exists)):
            return type(g)(g.vars, go(g.body))
        return g

    return go(f)
