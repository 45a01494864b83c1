"""Text format for algebras, signatures and structures.

    algebra A { elements: bot, m, top; order: bot <= m, m <= top; }
    signature S { rel R/1; fun f/1; const c; const d : m; }
    structure M over A sig S {
      section a extent top;
      identify a|m = b|m;
      rel R(a) = top;
      fun f(a) = b;
      const c = a;
    }

``#`` starts a comment. The algebras two, three and diamond are built in.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .heyting import BUILTINS, AlgebraError, HeytingAlgebra, from_order_relation
from .presheaf import LawViolation, Signature, Structure, StructureError, build_structure


class DSLError(ValueError):
    def __init__(self, msg: str, line: int | None = None, source: str = "<text>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + msg)


class UnknownName(KeyError):
    def __str__(self) -> str:
        return str(self.args[0])


class StrictConstants(DSLError):
    pass


_TOKEN = re.compile(
    r"(?P<nl>\n)|(?P<ws>[ \t\r]+)|(?P<comment>#[^\n]*)"
    r"|(?P<tok><=|[{}();:,=/|]|[A-Za-z0-9_][A-Za-z0-9_']*)|(?P<bad>.)"
)


def _tokenize(text: str, source: str) -> list[tuple[str, int]]:
    out = []
    line = 1
    for m in _TOKEN.finditer(text):
        kind = m.lastgroup
        if kind == "nl":
            line += 1
        elif kind == "tok":
            out.append((m.group(), line))
        elif kind == "bad":
            raise DSLError(f"unexpected character {m.group()!r}", line, source)
    return out


@dataclass
class StructureDecl:
    name: str
    algebra: str
    signature: str
    generators: list[tuple[str, str]] = field(default_factory=list)
    identifications: list[tuple[str, str]] = field(default_factory=list)
    relations: list[tuple[str, list[str], str]] = field(default_factory=list)
    functions: list[tuple[str, list[str], str]] = field(default_factory=list)
    constants: list[tuple[str, str]] = field(default_factory=list)
    line: int = 0
    refs: list[tuple[str, str, int]] = field(default_factory=list)  # (kind, name, line)


class _Reader:
    def __init__(self, text: str, source: str):
        self.toks = _tokenize(text, source)
        self.i = 0
        self.source = source

    def line(self) -> int | None:
        if self.i < len(self.toks):
            return self.toks[self.i][1]
        return self.toks[-1][1] if self.toks else None

    def peek(self) -> str | None:
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def take(self, want: str | None = None) -> str:
        tok = self.peek()
        if tok is None:
            raise DSLError(f"unexpected end of input, expected {want or 'a token'}", self.line(), self.source)
        if want is not None and tok != want:
            raise DSLError(f"expected {want!r}, found {tok!r}", self.line(), self.source)
        self.i += 1
        return tok

    def ident(self) -> str:
        tok = self.take()
        if not re.match(r"[A-Za-z_0-9]", tok):
            raise DSLError(f"expected a name, found {tok!r}", self.toks[self.i - 1][1], self.source)
        return tok

    def section(self) -> str:
        s = self.ident()
        if self.peek() == "|":
            self.take("|")
            s += "|" + self.ident()
        return s

    def names(self, end: str) -> list[str]:
        out = [self.section()]
        while self.peek() == ",":
            self.take(",")
            out.append(self.section())
        self.take(end)
        return out


@dataclass
class Workspace:
    """Loaded algebras, signatures and structures plus global settings."""

    algebras: dict[str, HeytingAlgebra] = field(default_factory=lambda: {k: f() for k, f in BUILTINS.items()})
    signatures: dict[str, Signature] = field(default_factory=dict)
    structures: dict[str, Structure] = field(default_factory=dict)
    lax_constants: bool = False

    def algebra(self, name: str) -> HeytingAlgebra:
        if name not in self.algebras:
            raise UnknownName(f"unknown algebra {name!r}")
        return self.algebras[name]

    def signature(self, name: str) -> Signature:
        if name not in self.signatures:
            raise UnknownName(f"unknown signature {name!r}")
        return self.signatures[name]

    def structure(self, name: str) -> Structure:
        if name not in self.structures:
            raise UnknownName(f"unknown structure {name!r}")
        return self.structures[name]

    def load_file(self, path: str | Path) -> list[str]:
        path = Path(path)
        return self.load_text(path.read_text(), str(path))

    def load_text(self, text: str, source: str = "<text>") -> list[str]:
        """Load every declaration; return the names declared, in order."""
        r = _Reader(text, source)
        declared = []
        while r.peek() is not None:
            kw, line = r.take(), r.toks[r.i - 1][1]
            try:
                if kw == "algebra":
                    declared.append(self._algebra(r))
                elif kw == "signature":
                    declared.append(self._signature(r))
                elif kw == "structure":
                    declared.append(self._structure(r, line))
                else:
                    raise DSLError(f"expected algebra, signature or structure, found {kw!r}", line, source)
            except (AlgebraError, StructureError) as e:
                raise DSLError(str(e), line, source) from e
        return declared

    def _algebra(self, r: _Reader) -> str:
        name = r.ident()
        r.take("{")
        elements: list[str] = []
        pairs: list[tuple[str, str]] = []
        while r.peek() != "}":
            key = r.ident()
            r.take(":")
            if key == "elements":
                elements = r.names(";")
            elif key == "order":
                while True:
                    a = r.ident()
                    r.take("<=")
                    b = r.ident()
                    pairs.append((a, b))
                    if r.peek() == ",":
                        r.take(",")
                        continue
                    r.take(";")
                    break
            else:
                raise DSLError(f"unknown algebra field {key!r}", r.line(), r.source)
        r.take("}")
        for a, b in pairs:
            for x in (a, b):
                if x not in elements:
                    raise DSLError(f"order mentions unknown element {x!r}", r.line(), r.source)
        self.algebras[name] = from_order_relation(elements, pairs, name=name)
        return name

    def _signature(self, r: _Reader) -> str:
        name = r.ident()
        r.take("{")
        rels, funs, consts = {}, {}, {}
        while r.peek() != "}":
            kind = r.ident()
            sym = r.ident()
            if kind in ("rel", "fun"):
                r.take("/")
                tok = r.take()
                if not tok.isdigit():
                    raise DSLError(f"expected an arity, found {tok!r}", r.line(), r.source)
                arity = int(tok)
                (rels if kind == "rel" else funs)[sym] = arity
            elif kind == "const":
                ext = None
                if r.peek() == ":":
                    r.take(":")
                    ext = r.ident()
                consts[sym] = ext
            else:
                raise DSLError(f"unknown signature entry {kind!r}", r.line(), r.source)
            r.take(";")
        r.take("}")
        self.signatures[name] = Signature(rels, funs, consts, name=name)
        return name

    def _structure(self, r: _Reader, line: int) -> str:
        d = StructureDecl(r.ident(), "", "", line=line)
        r.take("over")
        d.algebra = r.ident()
        r.take("sig")
        d.signature = r.ident()
        r.take("{")
        while r.peek() != "}":
            kind = r.ident()
            at = r.toks[r.i - 1][1]
            if kind == "section":
                g = r.ident()
                r.take("extent")
                d.generators.append((g, r.ident()))
                d.refs.append(("element", d.generators[-1][1], at))
            elif kind == "identify":
                a = r.section()
                r.take("=")
                d.identifications.append((a, r.section()))
                d.refs += [("section", a, at), ("section", d.identifications[-1][1], at)]
            elif kind in ("rel", "fun"):
                sym = r.ident()
                r.take("(")
                args = [] if r.peek() == ")" else r.names(")")
                if not args:
                    r.take(")")
                r.take("=")
                val = r.section()
                (d.relations if kind == "rel" else d.functions).append((sym, args, val))
                d.refs += [("section", x, at) for x in args]
                d.refs.append(("element" if kind == "rel" else "section", val, at))
            elif kind == "const":
                c = r.ident()
                r.take("=")
                d.constants.append((c, r.section()))
                d.refs.append(("section", d.constants[-1][1], at))
            else:
                raise DSLError(f"unknown structure entry {kind!r}", r.line(), r.source)
            r.take(";")
        r.take("}")
        self._check_refs(d, r.source)
        self.structures[d.name] = self.build(d, r.source)
        return d.name

    def _check_refs(self, d: StructureDecl, source: str) -> None:
        """Report unknown element or section names at the line that uses them."""
        try:
            alg = self.algebra(d.algebra)
        except UnknownName as e:
            raise DSLError(str(e), d.line, source) from None
        gens = {g for g, _ in d.generators}
        for kind, name, line in d.refs:
            if kind == "element":
                parts = [name]
            else:
                base, *parts = name.split("|")
                if base not in gens:
                    raise DSLError(f"unknown section {base!r} in structure {d.name}", line, source)
            for x in parts:
                if x not in alg.names:
                    raise DSLError(f"{x!r} is not an element of {alg.name}", line, source)

    def build(self, d: StructureDecl, source: str = "<text>") -> Structure:
        try:
            alg = self.algebra(d.algebra)
            sig = self.signature(d.signature)
        except UnknownName as e:
            raise DSLError(str(e), d.line, source) from None
        if not self.lax_constants and not sig.is_strict(alg):
            bad = sorted(c for c in sig.constants if sig.constant_extent(alg, c) != alg.top)
            raise StrictConstants(
                f"constants {bad} have extent below top; strict mode needs every constant extent to be top "
                "(use --lax-constants)",
                d.line,
                source,
            )

        def elem(x: str):
            try:
                return alg.element(x)
            except (KeyError, ValueError):
                raise DSLError(f"{x!r} is not an element of {alg.name}", d.line, source) from None

        try:
            return build_structure(
                d.name,
                alg,
                sig,
                [(g, elem(e)) for g, e in d.generators],
                d.identifications,
                [(rr, args, elem(v)) for rr, args, v in d.relations],
                d.functions,
                d.constants,
            )
        except LawViolation as e:
            raise DSLError(f"{e.law} violated: {e.witness}", d.line, source) from e
        except KeyError as e:
            raise DSLError(str(e.args[0]), d.line, source) from None


def load(paths, lax_constants: bool = False) -> Workspace:
    ws = Workspace(lax_constants=lax_constants)
    for p in paths:
        ws.load_file(p)
    return ws

