"""Random algebras, structures and formulae for property tests and fuzzing."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .heyting import HeytingAlgebra, diamond, from_poset_downsets, three, two
from .presheaf import LawViolation, Signature, Structure, build_structure, validate_structure
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
    canonical_unnested_atomics,
    mrank,
    qdegree,
    rename,
)


def random_poset(rng: random.Random, n: int, density: float = 0.4) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < density]


def random_algebra(rng: random.Random, max_points: int = 5, max_elements: int | None = None) -> HeytingAlgebra:
    """Downset algebra of a random poset with at most ``max_points`` points."""
    for _ in range(1000):
        n = rng.randint(1, max_points)
        alg = from_poset_downsets(n, random_poset(rng, n), name=f"downsets{n}")
        if max_elements is None or alg.size <= max_elements:
            return alg
    raise RuntimeError("no algebra within the size bound")


def small_algebra(rng: random.Random) -> HeytingAlgebra:
    """An algebra with at most five elements."""
    return rng.choice([two, three, diamond, lambda: random_algebra(rng, 3, 5)])()


SIGNATURES = {
    "empty": Signature(name="empty"),
    "unary": Signature({"R": 1}, name="unary"),
    "binary": Signature({"E": 2}, name="binary"),
    "const": Signature({"R": 1}, {}, {"c": None}, name="const"),
    "fun": Signature({}, {"f": 1}, name="fun"),
    "mixed": Signature({"R": 1}, {"f": 1}, {"c": None}, name="mixed"),
    "rich": Signature({"R": 2}, {"f": 1, "g": 2}, {"c": None, "d": None}, name="rich"),
}


@dataclass
class StructureParams:
    max_generators: int = 3
    identify_prob: float = 0.3
    top_prob: float = 0.5


def random_structure(
    rng: random.Random,
    alg: HeytingAlgebra,
    sig: Signature,
    name: str = "M",
    params: StructureParams = StructureParams(),
    tries: int = 200,
) -> Structure:
    """A valid structure with at most ``params.max_generators`` generators."""
    elems = list(alg.elements)
    nonbot = [e for e in elems if e != alg.bot] or elems
    for _ in range(tries):
        k = rng.randint(1, params.max_generators)
        gens = []
        for i in range(k):
            e = alg.top if rng.random() < params.top_prob else rng.choice(nonbot)
            gens.append((f"{'abcdefgh'[i]}", e))
        if sig.constants and all(e != alg.top for _, e in gens):
            gens[0] = (gens[0][0], alg.top)
        idents = []
        for (g, eg), (h, eh) in itertools.combinations(gens, 2):
            if rng.random() < params.identify_prob:
                common = [p for p in alg.below(alg.meet(eg, eh)) if p != alg.bot]
                if common:
                    p = rng.choice(common)
                    idents.append((f"{g}|{alg.names[p]}", f"{h}|{alg.names[p]}"))
        gnames = [g for g, _ in gens]
        gext = dict(gens)

        def ext(t):
            return alg.big_meet(gext[x] for x in t)

        rels = []
        for r, ar in sig.relations.items():
            for t in itertools.product(gnames, repeat=ar):
                v = rng.choice(alg.below(ext(t)))
                if v != alg.bot:
                    rels.append((r, list(t), v))
        try:
            shell = build_structure(name, alg, Signature(name="empty"), gens, idents)
        except LawViolation:
            continue
        funs = []
        for f, ar in sig.functions.items():
            for t in itertools.product(gnames, repeat=ar):
                e = ext(t)
                pool = [s for s in shell.sections if shell.extent[s] == e]
                funs.append((f, list(t), shell.names[rng.choice(pool)]))
        tops = [shell.names[s] for s in shell.sections if shell.extent[s] == alg.top]
        consts = [(c, rng.choice(tops)) for c in sig.constants]
        try:
            m = build_structure(name, alg, sig, gens, idents, rels, funs, consts)
        except LawViolation:
            continue
        if not validate_structure(m):
            return m
    raise RuntimeError(f"no valid structure found in {tries} tries")


# -- formulae -------------------------------------------------------------


@dataclass
class FormulaParams:
    max_rank: int = 3
    max_depth: int = 4
    n_free: int = 2
    var_pool: int = 4
    box: bool = True
    check: bool = True
    nested_terms: bool = True
    max_members: int = 3
    unnested_only: bool = False
    max_qdegree: int | None = None
    max_block: int = 2


class FormulaGen:
    def __init__(self, rng: random.Random, sig: Signature, elements: list[str], params: FormulaParams):
        self.rng = rng
        self.sig = sig
        self.elements = elements
        self.p = params

    def var(self, scope: list[int]) -> Var:
        return Var(self.rng.choice(scope))

    def term(self, scope: list[int], budget: int) -> Term:
        rng, sig = self.rng, self.sig
        opts = ["var"]
        if sig.constants and budget >= 1:
            opts.append("const")
        fns = [f for f, k in sig.functions.items() if budget >= 1]
        if fns and self.p.nested_terms:
            opts.append("app")
        kind = rng.choice(opts)
        if kind == "var":
            return self.var(scope)
        if kind == "const":
            return Const(rng.choice(sorted(sig.constants)))
        fn = rng.choice(sorted(fns))
        return App(fn, tuple(self.term(scope, (budget - 1) // max(1, self.sig.functions[fn])) for _ in range(self.sig.functions[fn])))

    def atom(self, scope: list[int], budget: int) -> Formula:
        if self.p.unnested_only:
            psi, n = self.rng.choice(canonical_unnested_atomics(self.sig))
            return rename(psi, {i: self.rng.choice(scope) for i in range(n)})
        rels = sorted(self.sig.relations)
        for _ in range(50):
            if rels and self.rng.random() < 0.5:
                r = self.rng.choice(rels)
                f: Formula = Rel(r, tuple(self.term(scope, budget) for _ in range(self.sig.relations[r])))
            else:
                f = Eq(self.term(scope, budget), self.term(scope, budget))
            if mrank(f) <= budget:
                return f
        return Eq(self.var(scope), self.var(scope))

    def formula(self, scope: list[int], budget: int, depth: int) -> Formula:
        rng = self.rng
        if depth <= 0 or rng.random() < 0.25:
            if self.p.check and rng.random() < 0.1:
                return Check(rng.choice(self.elements))
            return self.atom(scope, budget)
        kinds = ["not", "imp", "and", "or"]
        if budget >= 1:
            kinds += ["ex", "all", "ex"]
        if self.p.box:
            kinds.append("box")
        kind = rng.choice(kinds)
        if kind == "not":
            return Not(self.formula(scope, budget, depth - 1))
        if kind == "box":
            return Box(rng.choice(self.elements), self.formula(scope, budget, depth - 1))
        if kind == "imp":
            return Implies(self.formula(scope, budget, depth - 1), self.formula(scope, budget, depth - 1))
        if kind in ("and", "or"):
            n = rng.randint(0 if rng.random() < 0.1 else 1, self.p.max_members)
            ms = tuple(self.formula(scope, budget, depth - 1) for _ in range(n))
            return BigAnd(ms) if kind == "and" else BigOr(ms)
        k = 1 if rng.random() < 0.7 else self.p.max_block
        vs = sorted(set(rng.sample(range(self.p.var_pool), min(k, self.p.var_pool))))
        inner = sorted(set(scope) | set(vs))
        body = self.formula(inner, budget - 1, depth - 1)
        return (Exists if kind == "ex" else Forall)(tuple(vs), body)

    def __call__(self) -> Formula:
        scope = list(range(self.p.n_free)) or [0]
        for _ in range(200):
            f = self.formula(scope, self.p.max_rank, self.p.max_depth)
            if mrank(f) > self.p.max_rank:
                continue
            if self.p.max_qdegree is not None and qdegree(f) > self.p.max_qdegree:
                continue
            return f
        return Eq(Var(0), Var(0))


def random_formula(
    rng: random.Random, sig: Signature, elements: list[str], params: FormulaParams = FormulaParams()
) -> Formula:
    return FormulaGen(rng, sig, elements, params)()


def random_pp_formula(rng: random.Random, sig: Signature, depth: int = 4, var_pool: int = 3) -> Formula:
    """A primitive-positive formula built from unnested atomics, conjunction and existentials."""
    atoms = canonical_unnested_atomics(sig)

    def go(d: int) -> Formula:
        if d == 0 or rng.random() < 0.3:
            psi, n = rng.choice(atoms)
            return rename(psi, {i: rng.randrange(var_pool) for i in range(n)})
        if rng.random() < 0.5:
            return Exists((rng.randrange(var_pool),), go(d - 1))
        return BigAnd(tuple(go(d - 1) for _ in range(rng.randint(1, 3))))

    return go(depth)
