"""Presheaves over a finite Heyting algebra and structures built on them.

A structure owns its sections: a section is an integer index into the
structure's carrier, so sections of different structures never collide as
long as they are carried together with their owner. Relation and function
tables are stored in full over the closed carrier.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .heyting import Elem, HeytingAlgebra

Section = int
STuple = tuple[Section, ...]


class LawViolation(ValueError):
    """A structure law fails; ``law`` names it and ``witness`` shows where."""

    def __init__(self, law: str, witness: str):
        super().__init__(f"{law}: {witness}")
        self.law = law
        self.witness = witness


class StructureError(ValueError):
    pass


@dataclass(frozen=True)
class Signature:
    """Relation and function arities plus constant extents.

    A constant extent of ``None`` means top; otherwise it names an element of
    whichever algebra the structure lives over.
    """

    relations: Mapping[str, int] = field(default_factory=dict)
    functions: Mapping[str, int] = field(default_factory=dict)
    constants: Mapping[str, str | None] = field(default_factory=dict)
    name: str = "sig"

    def __post_init__(self) -> None:
        kinds = [set(self.relations), set(self.functions), set(self.constants)]
        for a, b in itertools.combinations(kinds, 2):
            if a & b:
                raise StructureError(f"symbol used with two kinds: {sorted(a & b)}")
        for r, k in self.relations.items():
            if k < 1:
                raise StructureError(f"relation {r} must have arity >= 1")
        for f, k in self.functions.items():
            if k < 0:
                raise StructureError(f"function {f} has negative arity")

    def symbols(self) -> set[str]:
        return set(self.relations) | set(self.functions) | set(self.constants)

    def constant_extent(self, algebra: HeytingAlgebra, c: str) -> Elem:
        ext = self.constants[c]
        return algebra.top if ext is None else algebra.element(ext)

    def is_strict(self, algebra: HeytingAlgebra) -> bool:
        return all(self.constant_extent(algebra, c) == algebra.top for c in self.constants)


EMPTY_SIGNATURE = Signature(name="empty")


@dataclass(frozen=True)
class Presheaf:
    algebra: HeytingAlgebra
    names: tuple[str, ...]
    extent: tuple[Elem, ...]
    restrict: tuple[tuple[Section, ...], ...]
    aliases: tuple[tuple[str, Section], ...] = ()

    def __len__(self) -> int:
        return len(self.names)


def _eq_table(ps: Presheaf) -> tuple[tuple[Elem, ...], ...]:
    alg = ps.algebra
    n = len(ps.names)
    rows = []
    for a in range(n):
        row = []
        for b in range(n):
            common = alg.meet(ps.extent[a], ps.extent[b])
            acc = alg.bot
            for p in alg.below(common):
                if ps.restrict[a][p] == ps.restrict[b][p]:
                    acc = alg.join(acc, p)
            row.append(acc)
        rows.append(tuple(row))
    return tuple(rows)


class Structure:
    """An L-structure over a presheaf.

    ``rel[R]`` maps every tuple of the carrier to its value, ``fun[f]`` maps
    every tuple to a section, ``const[c]`` is a section.
    """

    def __init__(
        self,
        name: str,
        presheaf: Presheaf,
        signature: Signature,
        rel: Mapping[str, Mapping[STuple, Elem]],
        fun: Mapping[str, Mapping[STuple, Section]],
        const: Mapping[str, Section],
    ):
        self.name = name
        self.presheaf = presheaf
        self.algebra = presheaf.algebra
        self.signature = signature
        self.rel = {k: dict(v) for k, v in rel.items()}
        self.fun = {k: dict(v) for k, v in fun.items()}
        self.const = dict(const)
        self.names = presheaf.names
        self.extent = presheaf.extent
        self.restrict = presheaf.restrict
        self.eq_t = _eq_table(presheaf)
        self.sections = range(len(presheaf.names))
        self._index = dict(presheaf.aliases)
        self._index.update((nm, i) for i, nm in enumerate(presheaf.names))

    def __repr__(self) -> str:
        return f"Structure({self.name!r}, {len(self.names)} sections over {self.algebra.name})"

    def __len__(self) -> int:
        return len(self.names)

    def eq(self, a: Section, b: Section) -> Elem:
        return self.eq_t[a][b]

    def res(self, a: Section, p: Elem) -> Section:
        return self.restrict[a][p]

    def tuple_extent(self, t: Sequence[Section]) -> Elem:
        alg = self.algebra
        e = alg.top
        for a in t:
            e = alg.meet_t[e][self.extent[a]]
        return e

    def res_tuple(self, t: Sequence[Section], p: Elem) -> STuple:
        r = self.restrict
        return tuple(r[a][p] for a in t)

    def tuple_eq(self, s: Sequence[Section], t: Sequence[Section]) -> Elem:
        alg = self.algebra
        e = alg.top
        for a, b in zip(s, t):
            e = alg.meet_t[e][self.eq_t[a][b]]
        return e

    def homogeneous(self, t: Sequence[Section]) -> STuple:
        """The tuple restricted to its own extent."""
        return self.res_tuple(t, self.tuple_extent(t))

    def const_extent(self, c: str) -> Elem:
        return self.signature.constant_extent(self.algebra, c)

    def is_strict(self) -> bool:
        return self.signature.is_strict(self.algebra)

    def section(self, spec: str) -> Section:
        """Resolve ``a`` or ``a|p`` to a section."""
        spec = spec.strip()
        if spec in self._index:
            return self._index[spec]
        if "|" in spec:
            base, _, p = spec.rpartition("|")
            return self.res(self.section(base), self.algebra.element(p.strip()))
        raise KeyError(f"unknown section {spec!r} in structure {self.name}")

    def parse_tuple(self, spec: str) -> STuple:
        spec = spec.strip()
        if spec in ("", "empty", "()"):
            return ()
        return tuple(self.section(x) for x in spec.split(","))

    def below(self, p: Elem) -> list[Section]:
        """Sections with extent at most ``p``."""
        le = self.algebra.le
        return [a for a in self.sections if le[self.extent[a]][p]]

    def tuples(self, k: int, below: Elem | None = None) -> Iterable[STuple]:
        pool = self.sections if below is None else self.below(below)
        return itertools.product(pool, repeat=k)

    def homogeneous_tuples(self, k: int) -> list[STuple]:
        """All tuples of length k whose items share the tuple's extent."""
        if k == 0:
            return [()]
        out = []
        for p in self.algebra.elements:
            pool = [a for a in self.sections if self.extent[a] == p]
            out.extend(itertools.product(pool, repeat=k))
        return out

    def renamed(self, name: str) -> "Structure":
        return Structure(name, self.presheaf, self.signature, self.rel, self.fun, self.const)

    def fmt(self, t: Sequence[Section]) -> str:
        return "(" + ", ".join(self.names[a] for a in t) + ")"


def disjointify(m: Structure, n: Structure) -> tuple[Structure, Structure]:
    """Return a pair with distinct owner names (and distinct objects)."""
    if m is n or m.name == n.name:
        return m, n.renamed(n.name + "'")
    return m, n


# -- construction ---------------------------------------------------------


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if repr(rb) < repr(ra):
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


def _split_spec(spec: str) -> tuple[str, str | None]:
    spec = spec.strip()
    if "|" in spec:
        g, _, p = spec.partition("|")
        if "|" in p:
            raise StructureError(f"nested restriction {spec!r}: restrict once with the meet")
        return g.strip(), p.strip()
    return spec, None


def close_under_restriction(
    algebra: HeytingAlgebra,
    generators: Sequence[tuple[str, Elem]],
    identifications: Iterable[tuple[str, str]] = (),
    separate: bool = True,
) -> Presheaf:
    """Smallest restriction-closed carrier over the generators.

    Identifications are pairs of specs ``a|p`` / ``b``. Sections of extent
    bottom are always merged, and with ``separate`` the agreement set of two
    generators is closed under joins; both are forced by the extensionality
    law ``a|[a=b] = b|[a=b]``.
    """
    alg = algebra
    gnames = [g for g, _ in generators]
    if len(set(gnames)) != len(gnames):
        raise StructureError(f"duplicate generator names in {gnames}")
    gext = dict(generators)
    order = {g: i for i, g in enumerate(gnames)}

    def node(spec: str) -> tuple[int, Elem]:
        g, p = _split_spec(spec)
        if g not in gext:
            raise StructureError(f"unknown section {g!r}")
        e = gext[g] if p is None else alg.meet(gext[g], alg.element(p))
        return order[g], e

    uf = _UnionFind()
    nodes = [(i, p) for i, (_, e) in enumerate(generators) for p in alg.below(e)]
    for x in nodes:
        uf.find(x)
    for left, right in identifications:
        (g, p), (h, q) = node(left), node(right)
        if p != q:
            raise LawViolation(
                "E(a|p) = E(a) meet p",
                f"identify {left} = {right} equates extents {alg.names[p]} and {alg.names[q]}",
            )
        uf.union((g, p), (h, q))
    bottoms = [(i, alg.bot) for i in range(len(generators))]
    for x in bottoms[1:]:
        uf.union(bottoms[0], x)
    changed = True
    while changed:
        changed = False
        agree: dict[tuple[int, int], list[Elem]] = {}
        for (g, p) in nodes:
            for (h, q) in nodes:
                if g < h and p == q and uf.find((g, p)) == uf.find((h, q)):
                    agree.setdefault((g, h), []).append(p)
        for (g, h), ps in agree.items():
            closed = set(ps)
            for p in ps:
                closed.update(alg.meet(p, r) for r in alg.elements)
            if separate:
                closed.add(alg.big_join(closed))
            for r in closed:
                if uf.union((g, r), (h, r)):
                    changed = True
    classes: dict = {}
    for x in nodes:
        classes.setdefault(uf.find(x), []).append(x)
    def member_key(x: tuple[int, Elem]) -> tuple[bool, int, int, Elem]:
        g, p = x
        return (p != gext[gnames[g]], g, -len(alg.below(p)), p)

    reps = sorted(classes, key=lambda r: min(member_key(x) for x in classes[r]))
    index = {r: i for i, r in enumerate(reps)}
    names, extent = [], []
    for r in reps:
        members = sorted(classes[r])
        p = members[0][1]
        full = [g for g, q in members if q == gext[gnames[g]]]
        names.append(gnames[full[0]] if full else f"{gnames[members[0][0]]}|{alg.names[p]}")
        extent.append(p)
    restrict = []
    for r in reps:
        g, p = classes[r][0]
        restrict.append(tuple(index[uf.find((g, alg.meet(p, q)))] for q in alg.elements))
    aliases = tuple((g, index[uf.find((i, gext[g]))]) for i, g in enumerate(gnames))
    return Presheaf(alg, tuple(names), tuple(extent), tuple(restrict), aliases)


def build_structure(
    name: str,
    algebra: HeytingAlgebra,
    signature: Signature,
    generators: Sequence[tuple[str, Elem]],
    identifications: Iterable[tuple[str, str]] = (),
    relations: Iterable[tuple[str, Sequence[str], Elem]] = (),
    functions: Iterable[tuple[str, Sequence[str], str]] = (),
    constants: Iterable[tuple[str, str]] = (),
    separate: bool = True,
) -> Structure:
    """Build a structure from generator-level declarations.

    Relations extend to the least extensional table agreeing with the
    declarations; functions extend by ``f(a|p) = f(a)|p``. Declared entries
    are kept verbatim so that ``validate_structure`` reports conflicts.
    """
    alg = algebra
    ps = close_under_restriction(alg, generators, identifications, separate=separate)
    shell = Structure(name, ps, signature, {}, {}, {})
    n = len(ps)

    rel_decl: dict[str, list[tuple[STuple, Elem]]] = {r: [] for r in signature.relations}
    for r, args, v in relations:
        if r not in signature.relations:
            raise StructureError(f"unknown relation {r!r}")
        if len(args) != signature.relations[r]:
            raise StructureError(f"{r} has arity {signature.relations[r]}, got {len(args)} arguments")
        rel_decl[r].append((tuple(shell.section(a) for a in args), v))
    rel: dict[str, dict[STuple, Elem]] = {}
    for r, k in signature.relations.items():
        table = {}
        for t in itertools.product(range(n), repeat=k):
            acc = alg.bot
            for s, v in rel_decl[r]:
                acc = alg.join(acc, alg.meet(v, shell.tuple_eq(s, t)))
            table[t] = acc
        for s, v in rel_decl[r]:
            table[s] = v
        rel[r] = table

    fun_decl: dict[str, list[tuple[STuple, Section]]] = {f: [] for f in signature.functions}
    for f, args, val in functions:
        if f not in signature.functions:
            raise StructureError(f"unknown function {f!r}")
        if len(args) != signature.functions[f]:
            raise StructureError(f"{f} has arity {signature.functions[f]}, got {len(args)} arguments")
        fun_decl[f].append((tuple(shell.section(a) for a in args), shell.section(val)))
    fun: dict[str, dict[STuple, Section]] = {}
    for f, k in signature.functions.items():
        table = {}
        for t in itertools.product(range(n), repeat=k):
            e = shell.tuple_extent(t)
            h = shell.res_tuple(t, e)
            for s, v in fun_decl[f]:
                if shell.res_tuple(s, e) == h and alg.leq(e, shell.tuple_extent(s)):
                    table[t] = ps.restrict[v][e]
                    break
            else:
                raise LawViolation(
                    "f total on the carrier", f"{f}{shell.fmt(t)} is not a restriction of a declared value"
                )
        for s, v in fun_decl[f]:
            table[s] = v
        fun[f] = table

    const = {}
    for c, spec in constants:
        if c not in signature.constants:
            raise StructureError(f"unknown constant {c!r}")
        const[c] = shell.section(spec)
    missing = set(signature.constants) - set(const)
    if missing:
        raise StructureError(f"constants without interpretation: {sorted(missing)}")
    return Structure(name, ps, signature, rel, fun, const)


# -- validation -----------------------------------------------------------


def validate_presheaf(s: Structure) -> list[str]:
    alg = s.algebra
    out = []
    for a in s.sections:
        ea = s.extent[a]
        if s.res(a, ea) != a:
            out.append(f"a|E(a) = a fails at a={s.names[a]}")
        for p in alg.elements:
            b = s.res(a, p)
            if not 0 <= b < len(s):
                out.append(f"carrier closed under restriction fails at {s.names[a]}|{alg.names[p]}")
                continue
            if s.extent[b] != alg.meet(ea, p):
                out.append(f"E(a|p) = E(a) meet p fails at a={s.names[a]}, p={alg.names[p]}")
            for q in alg.elements:
                if s.res(b, q) != s.res(a, alg.meet(p, q)):
                    out.append(
                        f"(a|p)|q = a|(p meet q) fails at a={s.names[a]}, p={alg.names[p]}, q={alg.names[q]}"
                    )
    for a in s.sections:
        for b in s.sections:
            e = s.eq(a, b)
            if s.res(a, e) != s.res(b, e):
                out.append(f"extensionality a|[a=b] = b|[a=b] fails at a={s.names[a]}, b={s.names[b]}")
    return out


def validate_structure(s: Structure) -> list[str]:
    """All law violations, each naming the law and a witness; empty iff valid."""
    alg = s.algebra
    out = validate_presheaf(s)
    if out:
        return out
    for r, k in s.signature.relations.items():
        table = s.rel[r]
        tuples = list(itertools.product(s.sections, repeat=k))
        for t in tuples:
            v, e = table[t], s.tuple_extent(t)
            if not alg.leq(v, e):
                out.append(f"characteristic function law {r}(a) <= E(a) fails at {s.fmt(t)}")
            for p in alg.elements:
                if table[s.res_tuple(t, p)] != alg.meet(v, p):
                    out.append(
                        f"characteristic function law {r}(a|p) = {r}(a) meet p fails at {s.fmt(t)}, p={alg.names[p]}"
                    )
                    break
        for t in tuples:
            for u in tuples:
                if not alg.leq(alg.meet(s.tuple_eq(t, u), table[t]), table[u]):
                    out.append(
                        f"characteristic function law [a=b] meet {r}(a) <= {r}(b) fails at {s.fmt(t)}, {s.fmt(u)}"
                    )
    for f, k in s.signature.functions.items():
        table = s.fun[f]
        tuples = list(itertools.product(s.sections, repeat=k))
        for t in tuples:
            v, e = table[t], s.tuple_extent(t)
            if s.extent[v] != e:
                out.append(f"function law E {f}(a) = E(a) fails at {s.fmt(t)}")
            for p in alg.elements:
                if table[s.res_tuple(t, p)] != s.res(v, p):
                    out.append(f"function law {f}(a|p) = {f}(a)|p fails at {s.fmt(t)}, p={alg.names[p]}")
                    break
        for t in tuples:
            for u in tuples:
                lhs = alg.meet(s.tuple_eq(t, u), s.extent[table[t]])
                if not alg.leq(lhs, s.eq(table[t], table[u])):
                    out.append(
                        f"function law [a=b] meet E {f}(a) <= [{f}(a)={f}(b)] fails at {s.fmt(t)}, {s.fmt(u)}"
                    )
    for c, a in s.const.items():
        want = s.const_extent(c)
        if s.extent[a] != want:
            out.append(
                f"constant extent E(c) = declared extent fails for {c}: "
                f"{alg.names[s.extent[a]]} != {alg.names[want]}"
            )
    return out
