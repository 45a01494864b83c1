"""Invariant functions I, G^alpha, H^alpha and the sentences phi^alpha.

Anchors are always taken restricted to their own extent, so the invariant
of a tuple only depends on the tuple cut down to E(a).

G and H share one engine. ``InvariantEngine`` assigns each (structure,
tuple, level) an integer type such that equal types mean equal invariant
functions. A level-(b+1) table is a function of the anchor's set of
one-move successor types, so the engine compares those compressed tables
instead of materializing every key; ``g_invariant`` materializes them for
reports and golden tests.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .backforth import BackForth
from .games import GameConfig, solve
from .heyting import Elem
from .presheaf import Section, Structure
from .semantics import Evaluator
from .syntax import BigAnd, Box, Exists, Formula, enumerate_unnested_atomics, show

STuple = tuple[Section, ...]


class CapExceeded(RuntimeError):
    pass


class IncomparableDomains(ValueError):
    pass


class StrictModeRequired(ValueError):
    pass


@dataclass(frozen=True)
class BaseInvariant:
    """Values of the unnested atomics at the anchor, keyed by (psi, index map)."""

    extent: Elem
    entries: tuple[tuple[tuple[str, tuple[int, ...]], Elem], ...]

    def as_dict(self) -> dict:
        return dict(self.entries)


def base_values(m: Structure, x: Sequence[Section]) -> tuple[Elem, ...]:
    ev = Evaluator(m)
    return tuple(ev(inst, x) for _, _, inst in enumerate_unnested_atomics(m.signature, len(x)))


def base_invariant(m: Structure, a: Sequence[Section]) -> BaseInvariant:
    keys = [(show(psi), f) for psi, f, _ in enumerate_unnested_atomics(m.signature, len(a))]
    return BaseInvariant(m.tuple_extent(a), tuple(zip(keys, base_values(m, a))))


class InvariantEngine:
    """Exact invariant types over a finite universe of structures.

    ``universe`` is the class the K-quantifier ranges over: {M, N} for G,
    the probe class for H.
    """

    def __init__(self, universe: Sequence[Structure], move_cap: int = 1, max_tuple_len: int = 8):
        if not universe:
            raise ValueError("empty universe")
        self.universe = list(universe)
        self.alg = universe[0].algebra
        self.sig = universe[0].signature
        for k in universe:
            if k.algebra is not self.alg or k.signature != self.sig:
                raise ValueError("universe mixes algebras or signatures")
        self.move_cap = move_cap
        self.max_tuple_len = max_tuple_len
        self._types: dict[tuple, int] = {}
        self._type_of: dict[tuple, int] = {}
        self._kappa_ids: dict[tuple, int] = {}
        self._kappas: dict[tuple[int, int], list[tuple[int, int, Elem, tuple[int, ...]]]] = {}
        self._succ: dict[tuple, frozenset] = {}
        self._homog: dict[tuple[int, int], list] = {}

    def _intern(self, table: dict, key) -> int:
        v = table.get(key)
        if v is None:
            v = len(table)
            table[key] = v
        return v

    def homog(self, k: Structure, n: int) -> list[STuple]:
        key = (id(k), n)
        if key not in self._homog:
            self._homog[key] = k.homogeneous_tuples(n)
        return self._homog[key]

    def type(self, beta: int, k: Structure, x: Sequence[Section]) -> int:
        x = k.homogeneous(x)
        key = (beta, id(k), x)
        t = self._type_of.get(key)
        if t is not None:
            return t
        if len(x) + beta * self.move_cap > self.max_tuple_len:
            raise CapExceeded(
                f"level {beta} at tuple length {len(x)} needs tuples of length "
                f"{len(x) + beta * self.move_cap} > cap {self.max_tuple_len}"
            )
        if beta == 0:
            t = self._intern(self._types, ("I", len(x), k.tuple_extent(x), base_values(k, x)))
        else:
            t = self._intern(self._types, (self.type(beta - 1, k, x), self.table(beta - 1, k, x)))
        self._type_of[key] = t
        return t

    def kappas(self, beta: int, n: int) -> list[tuple[int, int, Elem, tuple[int, ...]]]:
        """Distinct domain classes (id, move length, E(t), types of (s t)|e for e <= E(t))."""
        key = (beta, n)
        if key not in self._kappas:
            seen: dict[int, tuple] = {}
            for kk in self.universe:
                for k in range(1, self.move_cap + 1):
                    for u in self.homog(kk, n + k):
                        e0 = kk.tuple_extent(u)
                        types = tuple(self.type(beta, kk, kk.res_tuple(u, e)) for e in self.alg.below(e0))
                        kid = self._intern(self._kappa_ids, (k, e0, types))
                        seen.setdefault(kid, (kid, k, e0, types))
            self._kappas[key] = sorted(seen.values())
        return self._kappas[key]

    def kappa_of(self, beta: int, k: Structure, u: Sequence[Section], move_len: int) -> int:
        e0 = k.tuple_extent(u)
        types = tuple(self.type(beta, k, k.res_tuple(u, e)) for e in self.alg.below(e0))
        return self._intern(self._kappa_ids, (move_len, e0, types))

    def successors(self, beta: int, k: Structure, x: STuple, move_len: int) -> frozenset:
        """{(type of (x|e) c, e) : c homogeneous of extent e <= E(x)}."""
        key = (beta, id(k), x, move_len)
        v = self._succ.get(key)
        if v is None:
            alg = self.alg
            ex = k.tuple_extent(x)
            out = set()
            for e in alg.below(ex):
                xe = k.res_tuple(x, e)
                pool = [c for c in k.sections if k.extent[c] == e]
                for c in itertools.product(pool, repeat=move_len):
                    out.add((self.type(beta, k, xe + c), e))
            v = frozenset(out)
            self._succ[key] = v
        return v

    def value(self, beta: int, k: Structure, x: STuple, move_len: int, e0: Elem, types: tuple[int, ...]) -> Elem:
        alg = self.alg
        succ = self.successors(beta, k, x, move_len)
        acc = alg.bot
        for e, ty in zip(alg.below(e0), types):
            if (ty, e) in succ:
                acc = alg.join(acc, e)
        return acc

    def table(self, beta: int, k: Structure, x: STuple) -> tuple[tuple[int, Elem], ...]:
        ex = k.tuple_extent(x)
        le = self.alg.le
        return tuple(
            (kid, self.value(beta, k, x, mlen, e0, types))
            for kid, mlen, e0, types in self.kappas(beta, len(x))
            if le[e0][ex]
        )

    def equal(self, alpha: int, m: Structure, a: Sequence[Section], n: Structure, b: Sequence[Section]) -> bool:
        return self.type(alpha, m, a) == self.type(alpha, n, b)


@dataclass(frozen=True)
class GInvariant:
    """Materialized G^alpha (or H^alpha) at an anchor.

    ``levels[b]`` maps (structure name, s names, t names) to the value name
    of the level-(b+1) clause. Equality ignores the anchor fields.
    """

    alpha: int
    universe: tuple[str, ...]
    anchor: tuple[str, tuple[str, ...]]
    extent: str
    base: tuple
    levels: tuple

    def body(self) -> tuple:
        return (self.alpha, self.universe, self.extent, self.base, self.levels)

    def __eq__(self, other) -> bool:
        return isinstance(other, GInvariant) and self.body() == other.body()

    def __hash__(self) -> int:
        return hash(self.body())

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "universe": list(self.universe),
            "anchor": {"structure": self.anchor[0], "tuple": list(self.anchor[1])},
            "extent": self.extent,
            "base": [{"psi": k[0], "map": list(k[1]), "value": v} for k, v in self.base],
            "levels": [
                [{"K": k[0], "s": list(k[1]), "t": list(k[2]), "value": v} for k, v in lv] for lv in self.levels
            ],
        }


def materialize(engine: InvariantEngine, m: Structure, a: Sequence[Section], alpha: int) -> GInvariant:
    alg = engine.alg
    x = m.homogeneous(a)
    ex = m.tuple_extent(x)
    base = base_invariant(m, x)
    levels = []
    n = len(x)
    for beta in range(alpha):
        rows = []
        for kk in engine.universe:
            for mlen in range(1, engine.move_cap + 1):
                for s in itertools.product(kk.sections, repeat=n):
                    es = kk.tuple_extent(s)
                    for t in itertools.product(kk.sections, repeat=mlen):
                        et = kk.tuple_extent(t)
                        if not alg.leq(et, alg.meet(ex, es)):
                            continue
                        u = kk.res_tuple(s + t, et)
                        e0 = kk.tuple_extent(u)
                        types = tuple(engine.type(beta, kk, kk.res_tuple(u, e)) for e in alg.below(e0))
                        v = engine.value(beta, m, x, mlen, e0, types)
                        rows.append(((kk.name, tuple(kk.names[y] for y in s), tuple(kk.names[y] for y in t)), alg.names[v]))
        rows.sort()
        levels.append(tuple(rows))
    return GInvariant(
        alpha,
        tuple(sorted(k.name for k in engine.universe)),
        (m.name, tuple(m.names[y] for y in a)),
        alg.names[ex],
        tuple((k, alg.names[v]) for k, v in base.entries),
        tuple(levels),
    )


def g_invariant(m: Structure, n: Structure, a: Sequence[Section], alpha: int, move_cap: int = 1, max_tuple_len: int = 8) -> GInvariant:
    """G^alpha_{M,N,a}: the K-quantifier ranges over {M, N}."""
    return materialize(InvariantEngine([m, n], move_cap, max_tuple_len), m, a, alpha)


def h_invariant(probes: Sequence[Structure], m: Structure, a: Sequence[Section], alpha: int, move_cap: int = 1, max_tuple_len: int = 8) -> GInvariant:
    """H^alpha_{M,a} with K ranging over the probe class."""
    return materialize(InvariantEngine(probes, move_cap, max_tuple_len), m, a, alpha)


@dataclass(frozen=True)
class Comparison:
    equal: bool
    first_divergence: tuple | None


def compare_invariants(x: GInvariant, y: GInvariant) -> Comparison:
    """Structural equality; on divergence the least (level, key), level 0 being the base."""
    if x.alpha != y.alpha or x.universe != y.universe:
        raise IncomparableDomains("invariants differ in alpha or universe")
    if x.extent != y.extent:
        raise IncomparableDomains(f"anchor extents differ: {x.extent} vs {y.extent}")
    if x == y:
        return Comparison(True, None)
    for level, (u, v) in enumerate(zip((x.base,) + x.levels, (y.base,) + y.levels)):
        if u != v:
            du, dv = dict(u), dict(v)
            keys = sorted(set(du) | set(dv))
            first = next(k for k in keys if du.get(k) != dv.get(k))
            return Comparison(False, (level, first))
    return Comparison(False, None)


# -- sentences -------------------------------------------------------------


@dataclass(frozen=True)
class ScottSentence:
    formula: Formula
    alpha: int
    structure: str
    anchor: tuple[str, ...]


class SentenceBuilder:
    """Builds phi^alpha_{K,u} with shared subformulae, over a probe class."""

    def __init__(self, probes: Sequence[Structure], move_cap: int = 1, max_tuple_len: int = 8, mutation: str | None = None):
        self.probes = list(probes)
        self.mutation = mutation
        for k in self.probes:
            if not k.is_strict():
                raise StrictModeRequired("sentences need every constant extent to be top")
        self.move_cap = move_cap
        self.max_tuple_len = max_tuple_len
        self._phi: dict[tuple, Formula] = {}
        self._ev: dict[int, Evaluator] = {}

    def evaluator(self, k: Structure) -> Evaluator:
        if id(k) not in self._ev:
            self._ev[id(k)] = Evaluator(k, memo=True, mutation=self.mutation)
        return self._ev[id(k)]

    def phi(self, alpha: int, k: Structure, a: Sequence[Section]) -> Formula:
        x = k.homogeneous(a)
        key = (alpha, id(k), x)
        f = self._phi.get(key)
        if f is not None:
            return f
        if len(x) + alpha * self.move_cap > self.max_tuple_len:
            raise CapExceeded(f"phi^{alpha} at tuple length {len(x)} exceeds cap {self.max_tuple_len}")
        alg = k.algebra
        ev = self.evaluator(k)
        n = len(x)
        if alpha == 0:
            conj = []
            seen = set()
            for _, _, inst in enumerate_unnested_atomics(k.signature, n):
                c = Box(alg.names[ev(inst, x)], inst)
                if c not in seen:
                    seen.add(c)
                    conj.append(c)
            f = BigAnd(tuple(conj))
        else:
            prev = self.phi(alpha - 1, k, x)
            conj = [prev]
            seen = {prev}
            ex = k.tuple_extent(x)
            for kk in self.probes:
                for mlen in range(1, self.move_cap + 1):
                    for u in kk.homogeneous_tuples(n + mlen):
                        if not alg.leq(kk.tuple_extent(u), ex):
                            continue
                        ex_f = self.exists_clause(alpha - 1, kk, u, n)
                        c = Box(alg.names[ev(ex_f, x)], ex_f)
                        if c not in seen:
                            seen.add(c)
                            conj.append(c)
            f = BigAnd(tuple(conj))
        self._phi[key] = f
        return f

    def exists_clause(self, beta: int, kk: Structure, u: Sequence[Section], n: int) -> Formula:
        """exists u_n .. u_(len-1) phi^beta_{K,u}(v_0 .. v_(n-1), u)."""
        return Exists(tuple(range(n, len(u))), self.phi(beta, kk, u))

    def sentence(self, alpha: int, m: Structure, a: Sequence[Section]) -> ScottSentence:
        return ScottSentence(self.phi(alpha, m, a), alpha, m.name, tuple(m.names[y] for y in a))


def scott_sentence(m: Structure, a: Sequence[Section], alpha: int, probes: Sequence[Structure] | None = None, move_cap: int = 1, max_tuple_len: int = 8) -> ScottSentence:
    return SentenceBuilder(probes or [m], move_cap, max_tuple_len).sentence(alpha, m, a)


# -- portmanteau -------------------------------------------------------------


@dataclass(frozen=True)
class EquivRow:
    alpha: int
    invariants_equal: bool
    q_witness: bool
    game_winner: str
    mutual_forcing: bool

    @property
    def agree(self) -> bool:
        v = self.invariants_equal
        return v == self.q_witness == (self.game_winner == "II") == self.mutual_forcing


class Portmanteau:
    """The four equivalence verdicts for one anchored pair, sharing caches."""

    def __init__(self, m: Structure, a: Sequence[Section], n: Structure, b: Sequence[Section], move_cap: int = 1, max_tuple_len: int = 8, sentences: bool = True, mutation: str | None = None):
        pa, pb = m.tuple_extent(a), n.tuple_extent(b)
        if pa != pb or len(a) != len(b):
            from .backforth import ExtentMismatch

            raise ExtentMismatch(f"E(a) = {m.algebra.names[pa]} but E(b) = {m.algebra.names[pb]}")
        self.m, self.n = m, n
        self.a, self.b = m.homogeneous(a), n.homogeneous(b)
        self.move_cap = move_cap
        self.engine = InvariantEngine([m, n], move_cap, max_tuple_len)
        self.bf = BackForth(m, n, move_cap)
        self.sentences = SentenceBuilder([m, n], move_cap, max_tuple_len, mutation) if sentences else None

    def invariants_equal(self, alpha: int) -> bool:
        return self.engine.equal(alpha, self.m, self.a, self.n, self.b)

    def q_witness(self, alpha: int) -> bool:
        return self.bf.sim(self.a, self.b, alpha) is not None

    def game_winner(self, alpha: int) -> str:
        return solve(GameConfig(self.m, self.n, self.a, self.b, alpha, self.move_cap), self.bf).winner

    def mutual_forcing(self, alpha: int) -> bool:
        sb = self.sentences
        phi_m = sb.phi(alpha, self.m, self.a)
        phi_n = sb.phi(alpha, self.n, self.b)
        return sb.evaluator(self.n).forces(phi_m, self.b) and sb.evaluator(self.m).forces(phi_n, self.a)

    def row(self, alpha: int) -> EquivRow:
        return EquivRow(
            alpha,
            self.invariants_equal(alpha),
            self.q_witness(alpha),
            self.game_winner(alpha),
            self.mutual_forcing(alpha) if self.sentences else self.invariants_equal(alpha),
        )
