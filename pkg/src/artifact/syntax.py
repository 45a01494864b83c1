"""Terms and formulae, ranks, classification, and the formula text syntax.

Grammar (loosest binding first)::

    f -> g              implication, right associative
    f \\/ g             sugar for \\/{f; g}
    f /\\ g             sugar for /\\{f; g}
    ~f  forall {x y} f  exists {x} f  [p] f      tight prefix operators
    /\\{f; g}  \\/{f; g}  <p>  (f)  t = t  R(t, ...)

Terms are ``x``, ``c`` and ``f(t, ...)``. Identifiers resolve against the
signature; anything else is a variable. ``v3`` always denotes variable 3,
other names get the least index not written explicitly.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, fields
from typing import Callable, Iterable, Iterator, Mapping, Sequence, Union

from .presheaf import Signature

VAR_CAP = 8
FRESH_BASE = 100


def _node(cls):
    """Frozen dataclass whose hash is computed once and cached."""
    cls = dataclass(frozen=True)(cls)
    names = tuple(f.name for f in fields(cls))

    def __hash__(self):
        h = self.__dict__.get("_h")
        if h is None:
            h = hash((cls.__name__,) + tuple(getattr(self, n) for n in names))
            object.__setattr__(self, "_h", h)
        return h

    cls.__hash__ = __hash__
    return cls


# -- terms ----------------------------------------------------------------


@_node
class Var:
    index: int


@_node
class Const:
    name: str


@_node
class App:
    fn: str
    args: tuple


Term = Union[Var, Const, App]


# -- formulae -------------------------------------------------------------


@_node
class Eq:
    left: Term
    right: Term


@_node
class Rel:
    name: str
    args: tuple


@_node
class Not:
    body: "Formula"


@_node
class Implies:
    left: "Formula"
    right: "Formula"


@_node
class BigAnd:
    members: tuple


@_node
class BigOr:
    members: tuple


@_node
class Forall:
    vars: tuple
    body: "Formula"


@_node
class Exists:
    vars: tuple
    body: "Formula"


@_node
class Box:
    p: str
    body: "Formula"


@_node
class Check:
    p: str


Formula = Union[Eq, Rel, Not, Implies, BigAnd, BigOr, Forall, Exists, Box, Check]
ATOMIC = (Eq, Rel)


def exists(vars: Iterable[int], body: Formula) -> Exists:
    return Exists(tuple(sorted(set(vars))), body)


def forall(vars: Iterable[int], body: Formula) -> Forall:
    return Forall(tuple(sorted(set(vars))), body)


def conj(*fs: Formula) -> BigAnd:
    return BigAnd(tuple(fs))


def disj(*fs: Formula) -> BigOr:
    return BigOr(tuple(fs))


def iff(a: Formula, b: Formula) -> BigAnd:
    return BigAnd((Implies(a, b), Implies(b, a)))


# -- structural helpers ---------------------------------------------------


def term_vars(t: Term) -> frozenset[int]:
    if isinstance(t, Var):
        return frozenset((t.index,))
    if isinstance(t, Const):
        return frozenset()
    return frozenset().union(*(term_vars(a) for a in t.args))


def term_consts(t: Term) -> frozenset[str]:
    if isinstance(t, Const):
        return frozenset((t.name,))
    if isinstance(t, Var):
        return frozenset()
    return frozenset().union(*(term_consts(a) for a in t.args))


def _memo(attr: str, f: Formula, compute: Callable[[], object]):
    v = f.__dict__.get(attr)
    if v is None:
        v = compute()
        object.__setattr__(f, attr, v)
    return v


def children(f: Formula) -> tuple:
    if isinstance(f, (Not, Forall, Exists, Box)):
        return (f.body,)
    if isinstance(f, Implies):
        return (f.left, f.right)
    if isinstance(f, (BigAnd, BigOr)):
        return f.members
    return ()


def free_vars(f: Formula) -> frozenset[int]:
    def compute():
        if isinstance(f, Eq):
            return term_vars(f.left) | term_vars(f.right)
        if isinstance(f, Rel):
            return frozenset().union(*(term_vars(a) for a in f.args))
        if isinstance(f, (Forall, Exists)):
            return free_vars(f.body) - set(f.vars)
        return frozenset().union(*(free_vars(c) for c in children(f)))

    return _memo("_fv", f, compute)


def constants(f: Formula) -> frozenset[str]:
    def compute():
        if isinstance(f, Eq):
            return term_consts(f.left) | term_consts(f.right)
        if isinstance(f, Rel):
            return frozenset().union(*(term_consts(a) for a in f.args))
        return frozenset().union(*(constants(c) for c in children(f)))

    return _memo("_consts", f, compute)


def all_vars(f: Formula) -> frozenset[int]:
    """Free and bound variables."""
    out = set(free_vars(f))
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, (Forall, Exists)):
            out.update(g.vars)
        stack.extend(children(g))
    return frozenset(out)


def subformulas(f: Formula) -> Iterator[Formula]:
    seen = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if id(g) in seen:
            continue
        seen.add(id(g))
        yield g
        stack.extend(children(g))


def rename_term(t: Term, m: Mapping[int, int]) -> Term:
    if isinstance(t, Var):
        return Var(m.get(t.index, t.index))
    if isinstance(t, Const):
        return t
    return App(t.fn, tuple(rename_term(a, m) for a in t.args))


def rename(f: Formula, m: Mapping[int, int]) -> Formula:
    """Rename free variables; bound ones shadow the mapping."""
    if not m:
        return f
    if isinstance(f, Eq):
        return Eq(rename_term(f.left, m), rename_term(f.right, m))
    if isinstance(f, Rel):
        return Rel(f.name, tuple(rename_term(a, m) for a in f.args))
    if isinstance(f, (Forall, Exists)):
        inner = {k: v for k, v in m.items() if k not in f.vars}
        return type(f)(f.vars, rename(f.body, inner))
    if isinstance(f, Not):
        return Not(rename(f.body, m))
    if isinstance(f, Box):
        return Box(f.p, rename(f.body, m))
    if isinstance(f, Implies):
        return Implies(rename(f.left, m), rename(f.right, m))
    if isinstance(f, (BigAnd, BigOr)):
        return type(f)(tuple(rename(g, m) for g in f.members))
    return f


# -- ranks ----------------------------------------------------------------


def qdegree(f: Formula) -> int:
    def compute():
        if isinstance(f, (Eq, Rel, Check)):
            return 0
        if isinstance(f, (Forall, Exists)):
            return qdegree(f.body) + 1
        return max((qdegree(c) for c in children(f)), default=0)

    return _memo("_qd", f, compute)


def term_rank(t: Term) -> int:
    if isinstance(t, Var):
        return 0
    if isinstance(t, Const):
        return 1
    return 1 + sum(term_rank(a) for a in t.args)


def mrank(f: Formula) -> int:
    def compute():
        if isinstance(f, Eq):
            return max(0, term_rank(f.left) + term_rank(f.right) - 1)
        if isinstance(f, Rel):
            return sum(term_rank(a) for a in f.args)
        if isinstance(f, Check):
            return 0
        if isinstance(f, (Forall, Exists)):
            return mrank(f.body) + 1
        return max((mrank(c) for c in children(f)), default=0)

    return _memo("_mr", f, compute)


# -- classification -------------------------------------------------------


def is_unnested_atomic(f: Formula) -> bool:
    if isinstance(f, Rel):
        return all(isinstance(a, Var) for a in f.args)
    if isinstance(f, Eq):
        l, r = f.left, f.right
        simple = (Var, Const)
        if isinstance(l, simple) and isinstance(r, simple):
            return isinstance(l, Var) or isinstance(r, Var)
        if isinstance(l, Var) and isinstance(r, App):
            return all(isinstance(a, Var) for a in r.args)
        if isinstance(r, Var) and isinstance(l, App):
            return all(isinstance(a, Var) for a in l.args)
    return False


def is_unnested(f: Formula) -> bool:
    """Every atomic subformula is unnested."""
    return all(is_unnested_atomic(g) for g in subformulas(f) if isinstance(g, ATOMIC))


def _closed_under(f: Formula, allowed: tuple) -> bool:
    for g in subformulas(f):
        if isinstance(g, ATOMIC):
            if not is_unnested_atomic(g):
                return False
        elif not isinstance(g, allowed):
            return False
    return True


def is_ceu(f: Formula) -> bool:
    return _closed_under(f, (BigAnd, Exists, Box))


def is_pp(f: Formula) -> bool:
    return _closed_under(f, (BigAnd, Exists))


@dataclass(frozen=True)
class Classification:
    is_unnested: bool
    is_ceu: bool
    is_pp: bool


def classify(f: Formula) -> Classification:
    return Classification(is_unnested(f), is_ceu(f), is_pp(f))


def is_first_order(f: Formula) -> bool:
    """No box, no check, and quantifiers bind single variables."""
    for g in subformulas(f):
        if isinstance(g, (Box, Check)):
            return False
        if isinstance(g, (Forall, Exists)) and len(g.vars) != 1:
            return False
    return True


# -- unnested atomics -----------------------------------------------------


def canonical_unnested_atomics(sig: Signature) -> list[tuple[Formula, int]]:
    """Canonical unnested atomics, each with distinct variables v0..v(n-1)."""
    v = [Var(i) for i in range(max([2, *sig.relations.values(), *(k + 1 for k in sig.functions.values())]))]
    out: list[tuple[Formula, int]] = [(Eq(v[0], v[1]), 2)]
    for c in sorted(sig.constants):
        out.append((Eq(v[0], Const(c)), 1))
    for r in sorted(sig.relations):
        k = sig.relations[r]
        out.append((Rel(r, tuple(v[:k])), k))
    for fn in sorted(sig.functions):
        k = sig.functions[fn]
        out.append((Eq(v[0], App(fn, tuple(v[1 : k + 1]))), k + 1))
    return out


def enumerate_unnested_atomics(sig: Signature, tuple_len: int) -> list[tuple[Formula, tuple[int, ...], Formula]]:
    """Triples (psi, index map, psi instantiated at v_{f(0)}, ...)."""
    out = []
    for psi, n in canonical_unnested_atomics(sig):
        for fmap in itertools.product(range(tuple_len), repeat=n):
            inst = rename(psi, {i: fmap[i] for i in range(n)}) if n else psi
            out.append((psi, fmap, inst))
    return out


# -- printing -------------------------------------------------------------


def show_term(t: Term) -> str:
    if isinstance(t, Var):
        return f"v{t.index}"
    if isinstance(t, Const):
        return t.name
    return f"{t.fn}({', '.join(show_term(a) for a in t.args)})"


def show(f: Formula) -> str:
    if isinstance(f, Eq):
        return f"{show_term(f.left)} = {show_term(f.right)}"
    if isinstance(f, Rel):
        return f"{f.name}({', '.join(show_term(a) for a in f.args)})"
    if isinstance(f, Check):
        return f"<{f.p}>"
    if isinstance(f, BigAnd):
        return "/\\{" + "; ".join(show(g) for g in f.members) + "}"
    if isinstance(f, BigOr):
        return "\\/{" + "; ".join(show(g) for g in f.members) + "}"
    if isinstance(f, Implies):
        return f"{_tight(f.left)} -> {show(f.right)}"
    if isinstance(f, Not):
        return "~" + _tight(f.body)
    if isinstance(f, Box):
        return f"[{f.p}] " + _tight(f.body)
    vs = " ".join(f"v{i}" for i in f.vars)
    kw = "forall" if isinstance(f, Forall) else "exists"
    return f"{kw} {{{vs}}} " + _tight(f.body)


def _tight(f: Formula) -> str:
    return f"({show(f)})" if isinstance(f, Implies) else show(f)


# -- parsing --------------------------------------------------------------


class ParseError(ValueError):
    """Syntax, arity or scope error with a character position."""

    def __init__(self, msg: str, pos: int, text: str = ""):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


class UnknownSymbol(ParseError):
    pass


class ArityMismatch(ParseError):
    pass


class UnknownAlgebraElement(ParseError):
    pass


_TOKEN = re.compile(r"\s*(->|/\\|\\/|[A-Za-z_][A-Za-z0-9_']*|[(){}\[\]<>;,=~])")
KEYWORDS = {"forall", "exists"}


def _tokenize(text: str) -> list[tuple[str, int]]:
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip() == "":
                break
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        out.append((m.group(1), m.start(1)))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str, sig: Signature, elements: Sequence[str] | None, var_cap: int):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.sig = sig
        self.elements = elements
        self.var_cap = var_cap
        explicit = {int(t[1:]) for t, _ in self.toks if re.fullmatch(r"v\d+", t)}
        self.explicit = explicit
        self.names: dict[str, int] = {}

    def peek(self, k: int = 0) -> str | None:
        j = self.i + k
        return self.toks[j][0] if j < len(self.toks) else None

    def pos(self) -> int:
        return self.toks[self.i][1] if self.i < len(self.toks) else len(self.text)

    def take(self, want: str | None = None) -> str:
        tok = self.peek()
        if tok is None or (want is not None and tok != want):
            raise ParseError(f"expected {want or 'token'}, found {tok or 'end of input'}", self.pos())
        self.i += 1
        return tok

    def var(self, name: str) -> int:
        if re.fullmatch(r"v\d+", name):
            return int(name[1:])
        if name not in self.names:
            used = self.explicit | set(self.names.values())
            self.names[name] = next(k for k in itertools.count() if k not in used)
        return self.names[name]

    def elem(self) -> str:
        at = self.pos()
        name = self.take()
        if self.elements is not None and name not in self.elements:
            raise UnknownAlgebraElement(f"unknown algebra element {name!r}", at)
        return name

    def formula(self) -> Formula:
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.formula())
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.peek() == "\\/" and self.peek(1) != "{":
            self.take()
            f = BigOr((f, self.conjunction()))
        return f

    def conjunction(self) -> Formula:
        f = self.unary()
        while self.peek() == "/\\" and self.peek(1) != "{":
            self.take()
            f = BigAnd((f, self.unary()))
        return f

    def unary(self) -> Formula:
        tok = self.peek()
        if tok == "~":
            self.take()
            return Not(self.unary())
        if tok in KEYWORDS:
            self.take()
            self.take("{")
            vs = []
            while self.peek() != "}":
                at = self.pos()
                name = self.take()
                if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", name) or name in self.sig.symbols():
                    raise ParseError(f"bad bound variable {name!r}", at)
                vs.append(self.var(name))
            self.take("}")
            if not vs:
                raise ParseError("empty quantifier variable set", self.pos())
            body = self.unary()
            return (forall if tok == "forall" else exists)(vs, body)
        if tok == "[":
            self.take()
            p = self.elem()
            self.take("]")
            return Box(p, self.unary())
        return self.primary()

    def primary(self) -> Formula:
        tok = self.peek()
        if tok == "(":
            self.take()
            f = self.formula()
            self.take(")")
            return f
        if tok in ("/\\", "\\/") and self.peek(1) == "{":
            self.take()
            self.take("{")
            members = []
            while self.peek() != "}":
                members.append(self.formula())
                if self.peek() == ";":
                    self.take()
                elif self.peek() != "}":
                    raise ParseError("expected ; or }", self.pos())
            self.take("}")
            return (BigAnd if tok == "/\\" else BigOr)(tuple(members))
        if tok == "<":
            self.take()
            p = self.elem()
            self.take(">")
            return Check(p)
        if tok in self.sig.relations:
            at = self.pos()
            name = self.take()
            args = self.args()
            if len(args) != self.sig.relations[name]:
                raise ArityMismatch(f"{name} expects {self.sig.relations[name]} arguments, got {len(args)}", at)
            return Rel(name, tuple(args))
        left = self.term()
        self.take("=")
        return Eq(left, self.term())

    def args(self) -> list[Term]:
        self.take("(")
        out = []
        if self.peek() != ")":
            out.append(self.term())
            while self.peek() == ",":
                self.take()
                out.append(self.term())
        self.take(")")
        return out

    def term(self) -> Term:
        at = self.pos()
        tok = self.take()
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", tok) or tok in KEYWORDS:
            raise ParseError(f"expected a term, found {tok!r}", at)
        if tok in self.sig.relations:
            raise ParseError(f"relation {tok} used as a term", at)
        if tok in self.sig.functions:
            args = self.args()
            if len(args) != self.sig.functions[tok]:
                raise ArityMismatch(f"{tok} expects {self.sig.functions[tok]} arguments, got {len(args)}", at)
            return App(tok, tuple(args))
        if self.peek() == "(":
            raise UnknownSymbol(f"unknown function symbol {tok!r}", at)
        if tok in self.sig.constants:
            return Const(tok)
        return Var(self.var(tok))


def parse_formula(
    text: str,
    sig: Signature,
    elements: Sequence[str] | None = None,
    var_cap: int = VAR_CAP,
) -> Formula:
    """Parse ``text``; ``elements`` (algebra names) checks box/check subscripts."""
    p = _Parser(text, sig, elements, var_cap)
    f = p.formula()
    if p.peek() is not None:
        raise ParseError(f"unexpected {p.peek()!r}", p.pos())
    if len(free_vars(f)) > var_cap:
        raise ParseError(f"{len(free_vars(f))} free variables exceed the cap of {var_cap}", 0)
    return f
