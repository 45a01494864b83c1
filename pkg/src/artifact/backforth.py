"""Partial isomorphisms, the refinement hierarchy Q_alpha(p), and Scott rank.

A partial isomorphism is stored in canonical form: the restriction-closed
set of pairs it generates, as a frozenset of (section of M, section of N).
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .heyting import Elem
from .presheaf import Section, Structure

Iso = frozenset  # frozenset[tuple[Section, Section]]


class ExtentMismatch(ValueError):
    pass


class SearchBudgetExceeded(RuntimeError):
    pass


def max_search() -> int:
    return int(os.environ.get("WORKBENCH_MAX_SEARCH", "5000000"))


def generate(m: Structure, n: Structure, pairs: Iterable[tuple[Section, Section]]) -> Iso | None:
    """Restriction closure of ``pairs``; None unless it is an extent-preserving bijection."""
    fwd: dict[Section, Section] = {}
    bwd: dict[Section, Section] = {}
    alg = m.algebra
    for a, b in pairs:
        if m.extent[a] != n.extent[b]:
            return None
        for p in alg.below(m.extent[a]):
            x, y = m.restrict[a][p], n.restrict[b][p]
            if fwd.setdefault(x, y) != y or bwd.setdefault(y, x) != x:
                return None
    return frozenset(fwd.items())


@dataclass(frozen=True)
class SimWitness:
    alpha: int
    p: Elem
    iso: Iso


class BackForth:
    """Q_alpha(p) membership for a fixed pair (M, N), memoized.

    ``move_cap`` bounds the length of move tuples. With ``q0_variant`` the
    base level only admits isos whose generators meet to p; that variant is
    not closed under sub-isos, so witnesses are then searched exhaustively.
    """

    def __init__(self, m: Structure, n: Structure, move_cap: int = 1, q0_variant: bool = False):
        if m.algebra is not n.algebra:
            raise ValueError("structures live over different algebras")
        if m.signature != n.signature:
            raise ValueError("structures have different signatures")
        self.m, self.n = m, n
        self.alg = m.algebra
        self.move_cap = move_cap
        self.q0_variant = q0_variant
        self._piso: dict[Iso, bool] = {}
        self._q: dict[tuple[Iso, int, Elem], bool] = {}
        self._moves: dict[tuple[int, Elem], list] = {}
        self._all_isos: list[Iso] | None = None
        self.nodes = 0

    # -- partial isomorphisms ---------------------------------------------

    def gen(self, pairs: Iterable[tuple[Section, Section]]) -> Iso | None:
        return generate(self.m, self.n, pairs)

    def is_partial_iso(self, h: Iso) -> bool:
        v = self._piso.get(h)
        if v is None:
            v = self._check_iso(h)
            self._piso[h] = v
        return v

    def _check_iso(self, h: Iso) -> bool:
        m, n, alg = self.m, self.n, self.alg
        pairs = sorted(h)
        dom = [a for a, _ in pairs]
        img = dict(pairs)
        for a0, b0 in pairs:
            for a1, b1 in pairs:
                if m.eq_t[a0][a1] != n.eq_t[b0][b1]:
                    return False
        for c in m.signature.constants:
            cm, cn = m.const[c], n.const[c]
            ec = m.const_extent(c)
            for a, b in pairs:
                r = alg.meet(m.extent[a], ec)
                if m.eq_t[a][m.restrict[cm][r]] != n.eq_t[b][n.restrict[cn][r]]:
                    return False
        for r, k in m.signature.relations.items():
            tm, tn = m.rel[r], n.rel[r]
            for t in itertools.product(dom, repeat=k):
                if tm[t] != tn[tuple(img[a] for a in t)]:
                    return False
        for f, k in m.signature.functions.items():
            fm, fn = m.fun[f], n.fun[f]
            for t in itertools.product(dom, repeat=k):
                e = m.tuple_extent(t)
                ft = fm[t]
                gt = fn[tuple(img[a] for a in t)]
                for y in dom:
                    r = alg.meet(e, m.extent[y])
                    if m.eq_t[m.restrict[ft][r]][m.restrict[y][r]] != n.eq_t[n.restrict[gt][r]][n.restrict[img[y]][r]]:
                        return False
        return True

    def all_isos(self) -> list[Iso]:
        """Every partial isomorphism, by breadth-first extension from the empty map."""
        if self._all_isos is not None:
            return self._all_isos
        m, n = self.m, self.n
        start: Iso = frozenset()
        seen = {start} if self.is_partial_iso(start) else set()
        frontier = list(seen)
        cand = [(a, b) for a in m.sections for b in n.sections if m.extent[a] == n.extent[b]]
        while frontier:
            nxt = []
            for h in frontier:
                dom = {a for a, _ in h}
                rng = {b for _, b in h}
                for a, b in cand:
                    if a in dom or b in rng:
                        continue
                    h2 = self.gen(itertools.chain(h, ((a, b),)))
                    if h2 is None or h2 in seen:
                        continue
                    if self.is_partial_iso(h2):
                        seen.add(h2)
                        nxt.append(h2)
                        if len(seen) > max_search():
                            raise SearchBudgetExceeded("partial iso enumeration exceeds WORKBENCH_MAX_SEARCH")
            frontier = nxt
        self._all_isos = sorted(seen, key=iso_key)
        return self._all_isos

    # -- Q hierarchy -------------------------------------------------------

    def moves(self, side: int, p: Elem) -> list[tuple[tuple[Section, ...], Elem]]:
        """Move tuples (length 1..move_cap) from one side with extent <= p."""
        key = (side, p)
        if key not in self._moves:
            s = self.m if side == 0 else self.n
            out = []
            for k in range(1, self.move_cap + 1):
                for t in s.tuples(k, below=p):
                    out.append((t, s.tuple_extent(t)))
            self._moves[key] = out
        return self._moves[key]

    def generators_meet(self, h: Iso) -> Elem:
        tops = [a for a, _ in h if not any(a != x and self.m.restrict[x][self.m.extent[a]] == a for x, _ in h)]
        return self.alg.big_meet(self.m.extent[a] for a in tops)

    def in_q(self, h: Iso, alpha: int, p: Elem) -> bool:
        key = (h, alpha, p)
        v = self._q.get(key)
        if v is None:
            self.nodes += 1
            if self.nodes > max_search():
                raise SearchBudgetExceeded("Q search exceeds WORKBENCH_MAX_SEARCH")
            if alpha == 0:
                v = self.is_partial_iso(h)
                if v and self.q0_variant and h:
                    v = self.generators_meet(h) == p
            else:
                v = self.in_q(h, alpha - 1, p) and self.forth(h, alpha - 1, p, 0) and self.forth(h, alpha - 1, p, 1)
            self._q[key] = v
        return v

    def restrict_iso(self, h: Iso, q: Elem, side: int) -> list[tuple[Section, Section]]:
        """h restricted to the sections of extent exactly q."""
        s = self.m if side == 0 else self.n
        return [pr for pr in h if s.extent[pr[side]] == q]

    def witnesses(self, h: Iso, beta: int, side: int, t: Sequence[Section], et: Elem, q: Elem) -> Iterable[tuple[Iso, tuple[Section, ...]]]:
        """Minimal candidates h_j in Q_beta(q) answering move ``t`` at extent q."""
        m, n = self.m, self.n
        src = m if side == 0 else n
        dst = n if side == 0 else m
        base = [(a, b) for a, b in h if m.extent[a] == q]
        tq = tuple(src.restrict[x][q] for x in t)
        pool = [y for y in dst.sections if dst.extent[y] == q]
        for u in itertools.product(pool, repeat=len(t)):
            extra = zip(tq, u) if side == 0 else zip(u, tq)
            hj = self.gen(itertools.chain(base, extra))
            if hj is None:
                continue
            if self.q0_variant:
                for big in self.all_isos():
                    if hj <= big and self.in_q(big, beta, q):
                        yield big, u
                        break
            elif self.in_q(hj, beta, q):
                yield hj, u

    def cover(self, h: Iso, beta: int, side: int, t: Sequence[Section], et: Elem) -> list[tuple[Iso, Elem, tuple[Section, ...]]]:
        """A cover of Et by witnesses, or the partial list if none reaches Et."""
        alg = self.alg
        got = alg.bot
        out = []
        for q in sorted(alg.below(et), key=lambda x: -len(alg.below(x))):
            if alg.leq(q, got):
                continue
            for hj, u in self.witnesses(h, beta, side, t, et, q):
                out.append((hj, q, u))
                got = alg.join(got, q)
                break
            if got == et:
                break
        return out

    def covered(self, h: Iso, beta: int, side: int, t: Sequence[Section], et: Elem) -> bool:
        return self.alg.big_join(q for _, q, _ in self.cover(h, beta, side, t, et)) == et

    def forth(self, h: Iso, beta: int, p: Elem, side: int) -> bool:
        """Every move from ``side`` below p has a Q_beta cover."""
        return all(self.covered(h, beta, side, t, et) for t, et in self.moves(side, p))

    def failing_move(self, h: Iso, beta: int, p: Elem) -> tuple[int, tuple[Section, ...]] | None:
        for side in (0, 1):
            for t, et in self.moves(side, p):
                if not self.covered(h, beta, side, t, et):
                    return side, t
        return None

    # -- tables ------------------------------------------------------------

    def level(self, alpha: int, p: Elem) -> list[Iso]:
        return [h for h in self.all_isos() if self.in_q(h, alpha, p)]

    def table(self, max_alpha: int) -> "QTable":
        levels = {a: {p: self.level(a, p) for p in self.alg.elements} for a in range(max_alpha + 1)}
        return QTable(self, levels)

    def sim(self, a: Sequence[Section], b: Sequence[Section], alpha: int) -> SimWitness | None:
        if len(a) != len(b):
            raise ValueError("tuples of different length")
        pa, pb = self.m.tuple_extent(a), self.n.tuple_extent(b)
        if pa != pb:
            raise ExtentMismatch(f"E(a) = {self.alg.names[pa]} but E(b) = {self.alg.names[pb]}")
        h = self.gen(zip(self.m.res_tuple(a, pa), self.n.res_tuple(b, pa)))
        if h is None or not self.in_q(h, alpha, pa):
            return None
        return SimWitness(alpha, pa, h)


def iso_key(h: Iso) -> tuple:
    return (len(h), sorted(h))


@dataclass
class QTable:
    bf: BackForth
    levels: dict[int, dict[Elem, list[Iso]]]

    def stable_at(self) -> int | None:
        """Least alpha whose level equals the next computed one."""
        ks = sorted(self.levels)
        for a, b in zip(ks, ks[1:]):
            if self.levels[a] == self.levels[b]:
                return a
        return None

    def iso_ids(self) -> dict[Iso, int]:
        return {h: i for i, h in enumerate(self.bf.all_isos())}

    def report(self) -> dict:
        bf = self.bf
        alg = bf.alg
        ids = self.iso_ids()
        return {
            "pair": [bf.m.name, bf.n.name],
            "move_cap": bf.move_cap,
            "isos": [
                {"id": i, "pairs": [[bf.m.names[a], bf.n.names[b]] for a, b in sorted(h)]}
                for h, i in ids.items()
            ],
            "levels": {
                str(a): {alg.names[p]: [ids[h] for h in hs] for p, hs in lv.items()}
                for a, lv in self.levels.items()
            },
            "stable_at": self.stable_at(),
        }


def enumerate_partial_isos(m: Structure, n: Structure) -> list[Iso]:
    return BackForth(m, n).all_isos()


def sim_alpha(m: Structure, a: Sequence[Section], n: Structure, b: Sequence[Section], alpha: int, move_cap: int = 1) -> SimWitness | None:
    """Witness that the positional map a -> b, restricted to E(a), lies in Q_alpha(E(a))."""
    return BackForth(m, n, move_cap).sim(a, b, alpha)


# -- Scott rank -------------------------------------------------------------


@dataclass
class ScottRank:
    rank: int
    gamma_sizes: list[int]
    gammas: list[frozenset] = field(repr=False)


def tuple_pairs(m: Structure, max_len: int) -> list[tuple[tuple, tuple]]:
    """Pairs of same-length, same-extent tuples, each restricted to its extent."""
    out = []
    for k in range(1, max_len + 1):
        hs = m.homogeneous_tuples(k)
        for a in hs:
            for b in hs:
                if m.tuple_extent(a) == m.tuple_extent(b):
                    out.append((a, b))
    return out


def scott_rank(m: Structure, max_tuple_len: int = 1, move_cap: int = 1, extra_levels: int = 0, bf: BackForth | None = None) -> ScottRank:
    """Least alpha with Gamma_alpha = Gamma_(alpha+1), plus the trace.

    Gamma_alpha collects the tuple pairs that are not alpha-equivalent.
    ``extra_levels`` computes that many more levels past stabilization.
    """
    bf = bf or BackForth(m, m, move_cap)
    pairs = tuple_pairs(m, max_tuple_len)

    def gamma(alpha: int) -> frozenset:
        return frozenset((a, b) for a, b in pairs if bf.sim(a, b, alpha) is None)

    gammas = [gamma(0)]
    alpha = 0
    while True:
        gammas.append(gamma(alpha + 1))
        if gammas[-1] == gammas[-2]:
            break
        alpha += 1
    for i in range(extra_levels):
        gammas.append(gamma(len(gammas)))
    return ScottRank(alpha, [len(g) for g in gammas], gammas)
