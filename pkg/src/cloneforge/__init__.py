"""Finite clone theory: operation tables, clone closure, and three families
of clone intervals (shift-equivariant, semilattice congruence orders, and
fixed-point filters), each checked through explicit constructions."""

from .finops import OpTable, compose, diagonal, evaluate_tree, fix_set, nix_set, projection

__version__ = "0.1.0"

__all__ = ["OpTable", "compose", "diagonal", "evaluate_tree", "fix_set", "nix_set", "projection"]
