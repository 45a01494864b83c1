"""Finite Heyting algebras with precomputed operation tables.

Elements are small integers indexing the algebra's element table. All tables
are built once at construction, so lattice operations downstream are plain
tuple lookups.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cache, reduce
from typing import Iterable, Sequence

Elem = int


class AlgebraError(ValueError):
    """Raised when an input order is not a finite Heyting algebra."""


class NotAPartialOrder(AlgebraError):
    pass


class NotALattice(AlgebraError):
    pass


class NotDistributive(AlgebraError):
    pass


@dataclass(frozen=True, eq=False)
class HeytingAlgebra:
    """A finite Heyting algebra.

    ``le[a][b]`` is the order, ``meet``/``join``/``imp`` are total tables.
    Identity is by object; two algebras with equal tables are still distinct.
    """

    name: str
    names: tuple[str, ...]
    le: tuple[tuple[bool, ...], ...]
    meet_t: tuple[tuple[Elem, ...], ...] = field(repr=False)
    join_t: tuple[tuple[Elem, ...], ...] = field(repr=False)
    imp_t: tuple[tuple[Elem, ...], ...] = field(repr=False)
    bot: Elem
    top: Elem

    @property
    def size(self) -> int:
        return len(self.names)

    @property
    def elements(self) -> range:
        return range(len(self.names))

    def leq(self, a: Elem, b: Elem) -> bool:
        return self.le[a][b]

    def meet(self, a: Elem, b: Elem) -> Elem:
        return self.meet_t[a][b]

    def join(self, a: Elem, b: Elem) -> Elem:
        return self.join_t[a][b]

    def imp(self, a: Elem, b: Elem) -> Elem:
        return self.imp_t[a][b]

    def neg(self, a: Elem) -> Elem:
        return self.imp_t[a][self.bot]

    def iff(self, a: Elem, b: Elem) -> Elem:
        return self.meet_t[self.imp_t[a][b]][self.imp_t[b][a]]

    def big_meet(self, xs: Iterable[Elem]) -> Elem:
        return reduce(self.meet, xs, self.top)

    def big_join(self, xs: Iterable[Elem]) -> Elem:
        return reduce(self.join, xs, self.bot)

    def below(self, p: Elem) -> list[Elem]:
        """Elements q with q <= p, in index order."""
        return [q for q in self.elements if self.le[q][p]]

    def element(self, name: str) -> Elem:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown element {name!r} of algebra {self.name}") from None

    def check(self, e: Elem) -> Elem:
        if not isinstance(e, int) or not 0 <= e < len(self.names):
            raise ValueError(f"{e!r} is not an element of algebra {self.name}")
        return e

    def is_boolean(self) -> bool:
        return all(self.neg(self.neg(p)) == p for p in self.elements)

    def is_de_morgan(self) -> bool:
        """Whether neg(p) join neg(neg(p)) is top for every p."""
        return all(self.join(self.neg(p), self.neg(self.neg(p))) == self.top for p in self.elements)

    def __repr__(self) -> str:
        return f"HeytingAlgebra({self.name!r}, {list(self.names)})"


def _closure(n: int, pairs: Iterable[tuple[int, int]]) -> list[list[bool]]:
    le = [[i == j for j in range(n)] for i in range(n)]
    for a, b in pairs:
        le[a][b] = True
    for k in range(n):
        for i in range(n):
            if le[i][k]:
                row_k = le[k]
                row_i = le[i]
                for j in range(n):
                    if row_k[j]:
                        row_i[j] = True
    return le


def from_order_relation(
    names: Sequence[str], pairs: Iterable[tuple[str, str]], name: str = "omega"
) -> HeytingAlgebra:
    """Build an algebra from element names and (lower, upper) order pairs.

    The reflexive-transitive closure of ``pairs`` is taken. Meets and joins
    are searched for directly; implication is the largest ``s`` with
    ``s & q <= r``.
    """
    names = tuple(names)
    if len(set(names)) != len(names):
        raise AlgebraError(f"duplicate element names in {list(names)}")
    if not names:
        raise AlgebraError("an algebra needs at least one element")
    idx = {x: i for i, x in enumerate(names)}
    try:
        ipairs = [(idx[a], idx[b]) for a, b in pairs]
    except KeyError as exc:
        raise AlgebraError(f"order pair mentions undeclared element {exc.args[0]!r}") from None
    n = len(names)
    le = _closure(n, ipairs)
    for a, b in itertools.combinations(range(n), 2):
        if le[a][b] and le[b][a]:
            raise NotAPartialOrder(f"antisymmetry fails: {names[a]} <= {names[b]} <= {names[a]}")

    def bound(a: int, b: int, lower: bool) -> int:
        if lower:
            cands = [c for c in range(n) if le[c][a] and le[c][b]]
            best = [c for c in cands if all(le[d][c] for d in cands)]
        else:
            cands = [c for c in range(n) if le[a][c] and le[b][c]]
            best = [c for c in cands if all(le[c][d] for d in cands)]
        if len(best) != 1:
            kind = "meet" if lower else "join"
            raise NotALattice(f"{names[a]} and {names[b]} have no {kind}")
        return best[0]

    meet = [[bound(a, b, True) for b in range(n)] for a in range(n)]
    join = [[bound(a, b, False) for b in range(n)] for a in range(n)]
    bots = [c for c in range(n) if all(le[c][d] for d in range(n))]
    tops = [c for c in range(n) if all(le[d][c] for d in range(n))]
    if len(bots) != 1 or len(tops) != 1:
        raise NotALattice("missing least or greatest element")
    for p, q, r in itertools.product(range(n), repeat=3):
        if meet[p][join[q][r]] != join[meet[p][q]][meet[p][r]]:
            raise NotDistributive(
                f"distributivity fails at ({names[p]}, {names[q]}, {names[r]})"
            )
    imp = [[0] * n for _ in range(n)]
    for q in range(n):
        for r in range(n):
            acc = bots[0]
            for s in range(n):
                if le[meet[s][q]][r]:
                    acc = join[acc][s]
            imp[q][r] = acc
    return HeytingAlgebra(
        name=name,
        names=names,
        le=tuple(map(tuple, le)),
        meet_t=tuple(map(tuple, meet)),
        join_t=tuple(map(tuple, join)),
        imp_t=tuple(map(tuple, imp)),
        bot=bots[0],
        top=tops[0],
    )


def from_poset_downsets(
    n: int, order: Iterable[tuple[int, int]], name: str = "downsets"
) -> HeytingAlgebra:
    """Algebra of downward-closed subsets of the poset on ``range(n)``.

    Elements are named ``bot``, ``top`` or ``s`` followed by the sorted
    points, e.g. ``s02`` for the downset {0, 2}.
    """
    le = _closure(n, order)
    downsets = []
    for bits in range(1 << n):
        pts = [i for i in range(n) if bits >> i & 1]
        if all(bits >> j & 1 for i in pts for j in range(n) if le[j][i]):
            downsets.append(frozenset(pts))
    downsets.sort(key=lambda s: (len(s), sorted(s)))
    full = frozenset(range(n))

    def label(s: frozenset[int]) -> str:
        if not s:
            return "bot"
        if s == full:
            return "top"
        return "s" + "".join(str(i) for i in sorted(s))

    names = [label(s) for s in downsets]
    pairs = [
        (names[i], names[j])
        for i, a in enumerate(downsets)
        for j, b in enumerate(downsets)
        if i != j and a <= b
    ]
    return from_order_relation(names, pairs, name=name)


@cache
def two() -> HeytingAlgebra:
    return from_order_relation(["bot", "top"], [("bot", "top")], name="two")


@cache
def three() -> HeytingAlgebra:
    return from_order_relation(["bot", "m", "top"], [("bot", "m"), ("m", "top")], name="three")


@cache
def diamond() -> HeytingAlgebra:
    return from_order_relation(
        ["bot", "p", "q", "top"],
        [("bot", "p"), ("bot", "q"), ("p", "top"), ("q", "top")],
        name="diamond",
    )


BUILTINS = {"two": two, "three": three, "diamond": diamond}
