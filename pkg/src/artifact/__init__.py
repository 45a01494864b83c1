"""Executable back-and-forth theory for presheaf models over finite Heyting algebras."""

from .heyting import HeytingAlgebra, diamond, three, two
from .presheaf import Signature, Structure, build_structure

__all__ = ["HeytingAlgebra", "Signature", "Structure", "build_structure", "diamond", "three", "two"]
