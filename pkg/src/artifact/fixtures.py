"""Small named structures used by tests, scripts and the CLI."""

from __future__ import annotations

from .heyting import diamond, three, two
from .presheaf import Signature, Structure, build_structure

UNARY = Signature({"R": 1}, name="unary")
EMPTY = Signature(name="empty")
MIXED = Signature({"R": 1}, {"f": 1}, {"c": None}, name="mixed")


def pure_set(k: int, name: str | None = None) -> Structure:
    """k global sections over the two-element algebra, empty signature."""
    alg = two()
    return build_structure(name or f"S{k}", alg, EMPTY, [(f"x{i}", alg.top) for i in range(k)])


def chain3() -> Structure:
    """Two global sections a, b glued below m, with R(a) = top and R(b) = m."""
    alg = three()
    m = alg.element("m")
    return build_structure(
        "C3",
        alg,
        UNARY,
        [("a", alg.top), ("b", alg.top)],
        [("a|m", "b|m")],
        [("R", ["a"], alg.top), ("R", ["b"], m), ("R", ["a|m"], m)],
    )


def diamond_fixture() -> Structure:
    """Over the diamond: a, b global and glued below p; R(a) = q, R(b) = bot."""
    alg = diamond()
    p, q = alg.element("p"), alg.element("q")
    return build_structure(
        "D4",
        alg,
        UNARY,
        [("a", alg.top), ("b", alg.top)],
        [("a|p", "b|p")],
        [("R", ["a"], q)],
    )


def fun_const() -> Structure:
    """Over the 3-chain with a unary function swapping a and b and c = a."""
    alg = three()
    return build_structure(
        "F3",
        alg,
        MIXED,
        [("a", alg.top), ("b", alg.top)],
        [("a|m", "b|m")],
        [("R", ["a"], alg.top)],
        [("f", ["a"], "b"), ("f", ["b"], "a")],
        [("c", "a")],
    )


def all_fixtures() -> list[Structure]:
    return [pure_set(2), pure_set(3), chain3(), diamond_fixture(), fun_const()]
