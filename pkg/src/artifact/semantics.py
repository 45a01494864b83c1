"""Heyting-valued evaluation of formulae in a structure, and forcing.

An assignment maps variable indices to sections. Its extent is the meet of
the extents of all assigned sections, and every clause is relative to it.
"""

from __future__ import annotations

from typing import Mapping, Sequence

from .heyting import Elem
from .presheaf import Section, Structure
from .syntax import (
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
    constants,
)


class UnassignedVariable(KeyError):
    pass


# Deliberate bugs for mutation testing of the cross-checks.
MUTATIONS = ("box-imp", "exists-drop-first")


Assignment = Mapping[int, Section] | Sequence[Section]


def as_env(assignment: Assignment) -> dict[int, Section]:
    if isinstance(assignment, Mapping):
        return dict(assignment)
    return dict(enumerate(assignment))


def formula_extent(m: Structure, f: Formula) -> Elem:
    """Meet of the declared extents of the constants occurring in ``f``."""
    alg = m.algebra
    e = alg.top
    for c in constants(f):
        e = alg.meet(e, m.const_extent(c))
    return e


def eval_term(m: Structure, t: Term, env: Mapping[int, Section], r: Elem) -> Section:
    """Value of ``t`` with every variable and constant restricted to ``r``."""
    if isinstance(t, Var):
        try:
            return m.restrict[env[t.index]][r]
        except KeyError:
            raise UnassignedVariable(f"v{t.index} is not assigned") from None
    if isinstance(t, Const):
        return m.restrict[m.const[t.name]][r]
    return m.fun[t.fn][tuple(eval_term(m, a, env, r) for a in t.args)]


class Evaluator:
    """Evaluates formulae in one structure, optionally memoizing subresults.

    The memo is keyed on the formula, the assignment and the context extent;
    the extent is needed because a quantifier that shadows an assigned
    variable keeps the shadowed section's extent in the context.
    ``mutation`` names one of ``MUTATIONS`` to inject on purpose.
    """

    def __init__(self, m: Structure, memo: bool = False, mutation: str | None = None):
        if mutation is not None and mutation not in MUTATIONS:
            raise ValueError(f"unknown mutation {mutation!r}")
        self.m = m
        self.alg = m.algebra
        self.memo: dict | None = {} if memo else None
        self.mutation = mutation

    def extent(self, f: Formula) -> Elem:
        return formula_extent(self.m, f)

    def __call__(self, f: Formula, assignment: Assignment = ()) -> Elem:
        env = as_env(assignment)
        return self.eval(f, env, self.m.tuple_extent(env.values()))

    def forces(self, f: Formula, assignment: Assignment = ()) -> bool:
        env = as_env(assignment)
        ext = self.m.tuple_extent(env.values())
        return self.eval(f, env, ext) == self.alg.meet(ext, self.extent(f))

    def eval(self, f: Formula, env: dict[int, Section], ext: Elem) -> Elem:
        if self.memo is None or isinstance(f, (Eq, Rel, Check)):
            return self._eval(f, env, ext)
        key = (f, tuple(sorted(env.items())), ext)
        v = self.memo.get(key)
        if v is None:
            v = self._eval(f, env, ext)
            self.memo[key] = v
        return v

    def _eval(self, f: Formula, env: dict[int, Section], ext: Elem) -> Elem:
        m, alg = self.m, self.alg
        meet = alg.meet_t
        if isinstance(f, Eq):
            r = meet[ext][self.extent(f)]
            return m.eq_t[eval_term(m, f.left, env, r)][eval_term(m, f.right, env, r)]
        if isinstance(f, Rel):
            r = meet[ext][self.extent(f)]
            return m.rel[f.name][tuple(eval_term(m, a, env, r) for a in f.args)]
        if isinstance(f, Check):
            return meet[ext][alg.element(f.p)]
        if isinstance(f, Not):
            v = self.eval(f.body, env, ext)
            return meet[meet[ext][self.extent(f.body)]][alg.neg(v)]
        if isinstance(f, Implies):
            a = self.eval(f.left, env, ext)
            b = self.eval(f.right, env, ext)
            pre = meet[meet[ext][self.extent(f.left)]][self.extent(f.right)]
            return meet[pre][alg.imp(a, b)]
        if isinstance(f, Box):
            v = self.eval(f.body, env, ext)
            pre = meet[ext][self.extent(f.body)]
            p = alg.element(f.p)
            if self.mutation == "box-imp":
                return meet[pre][alg.imp(p, v)]
            return meet[pre][alg.iff(p, v)]
        if isinstance(f, (BigAnd, BigOr)):
            q = alg.top
            for g in f.members:
                q = meet[q][self.extent(g)]
            if q != alg.top:
                res = m.restrict
                env = {k: res[a][q] for k, a in env.items()}
                ext = meet[ext][q]
            if isinstance(f, BigAnd):
                acc = ext
                for g in f.members:
                    acc = meet[acc][self.eval(g, env, ext)]
                    if acc == alg.bot:
                        break
                return acc
            acc = alg.bot
            for g in f.members:
                acc = alg.join_t[acc][self.eval(g, env, ext)]
            return meet[ext][acc]
        if isinstance(f, Exists):
            acc = alg.bot
            pool = self._tuples(len(f.vars))
            if self.mutation == "exists-drop-first":
                pool = pool[1:]
            for t, et in pool:
                sub = dict(env)
                sub.update(zip(f.vars, t))
                acc = alg.join_t[acc][self.eval(f.body, sub, meet[ext][et])]
                if acc == ext:
                    break
            return acc
        if isinstance(f, Forall):
            acc = meet[ext][self.extent(f.body)]
            for t, et in self._tuples(len(f.vars)):
                sub = dict(env)
                sub.update(zip(f.vars, t))
                acc = meet[acc][alg.imp(et, self.eval(f.body, sub, meet[ext][et]))]
                if acc == alg.bot:
                    break
            return acc
        raise TypeError(f"not a formula: {f!r}")

    def _tuples(self, k: int):
        cache = self.__dict__.setdefault("_tuple_cache", {})
        if k not in cache:
            cache[k] = [(t, self.m.tuple_extent(t)) for t in self.m.tuples(k)]
        return cache[k]


def evaluate(m: Structure, f: Formula, assignment: Assignment = ()) -> Elem:
    return Evaluator(m)(f, assignment)


def forces(m: Structure, f: Formula, assignment: Assignment = ()) -> bool:
    """True iff the value of ``f`` is the largest possible, E(a) meet E(f)."""
    return Evaluator(m).forces(f, assignment)
