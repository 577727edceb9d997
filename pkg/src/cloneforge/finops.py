"""Finite operation tables.

An operation of arity ``k`` on the base ``{0, .., q-1}`` is stored as a packed
byte table of length ``q**k``.  Tuples are indexed row-major with the first
argument most significant, so ``(x1, .., xk)`` lives at
``x1*q**(k-1) + .. + xk``.  Every module in the package relies on this order.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

MAX_BASE = 256


class ArityError(ValueError):
    pass


@dataclass(frozen=True)
class OpTable:
    base: int
    arity: int
    table: bytes

    def __post_init__(self):
        if not 1 <= self.base <= MAX_BASE:
            raise ValueError(f"base size must be in [1, {MAX_BASE}], got {self.base}")
        if self.arity < 1:
            raise ArityError("arity must be positive")
        if len(self.table) != self.base ** self.arity:
            raise ValueError(
                f"table length {len(self.table)} != {self.base}**{self.arity}")
        if self.table and max(self.table) >= self.base:
            raise ValueError("table entry out of range")

    @classmethod
    def from_values(cls, base: int, arity: int, values: Iterable[int]) -> "OpTable":
        vals = np.asarray(list(values) if not isinstance(values, np.ndarray) else values)
        if vals.size and (vals.min() < 0 or vals.max() >= base):
            raise ValueError("table entry out of range")
        return cls(base, arity, vals.astype(np.uint8).tobytes())

    @classmethod
    def from_function(cls, base: int, arity: int, fn) -> "OpTable":
        return cls.from_values(base, arity, [fn(*x) for x in tuples(base, arity)])

    @classmethod
    def constant(cls, base: int, value: int, arity: int = 1) -> "OpTable":
        return cls.from_values(base, arity, [value] * base ** arity)

    @property
    def values(self) -> np.ndarray:
        """Read-only numpy view of the table."""
        return np.frombuffer(self.table, dtype=np.uint8)

    def __call__(self, *args: int) -> int:
        if len(args) != self.arity:
            raise ArityError(f"expected {self.arity} arguments, got {len(args)}")
        return self.table[tuple_index(self.base, args)]

    def __len__(self) -> int:
        return len(self.table)

    def __repr__(self) -> str:
        return f"OpTable(base={self.base}, arity={self.arity}, table={list(self.table)})"

    def graph(self) -> Iterator[tuple[tuple[int, ...], int]]:
        for x, v in zip(tuples(self.base, self.arity), self.table):
            yield x, v

    def to_json(self) -> dict:
        return {"base": self.base, "arity": self.arity, "table": list(self.table)}

    @classmethod
    def from_json(cls, data: Union[dict, str]) -> "OpTable":
        if isinstance(data, str):
            data = json.loads(data)
        return cls.from_values(data["base"], data["arity"], data["table"])


def tuples(base: int, arity: int) -> Iterator[tuple[int, ...]]:
    """All argument tuples in table order."""
    return itertools.product(range(base), repeat=arity)


def tuple_index(base: int, xs: Sequence[int]) -> int:
    idx = 0
    for x in xs:
        if not 0 <= x < base:
            raise ValueError(f"argument {x} outside base {base}")
        idx = idx * base + x
    return idx


def coordinates(base: int, arity: int) -> np.ndarray:
    """Array of shape (arity, base**arity); row i holds x_{i+1} at each index."""
    grids = np.indices((base,) * arity, dtype=np.uint8)
    return grids.reshape(arity, -1)


def projection(base: int, arity: int, index: int) -> OpTable:
    """The projection onto coordinate ``index`` (1-based)."""
    if not 1 <= index <= arity:
        raise IndexError(f"projection index {index} outside [1, {arity}]")
    return OpTable(base, arity, coordinates(base, arity)[index - 1].tobytes())


def identity(base: int) -> OpTable:
    return projection(base, 1, 1)


def compose_arrays(f: OpTable, args: Sequence[np.ndarray]) -> np.ndarray:
    """Apply ``f`` pointwise to value arrays of equal shape."""
    q = f.base
    idx = np.zeros(np.shape(args[0]), dtype=np.int64)
    for a in args:
        idx = idx * q + a
    return f.values[idx]


def compose(f: OpTable, gs: Sequence[OpTable]) -> OpTable:
    """``h(x) = f(g1(x), .., gk(x))``."""
    if len(gs) != f.arity:
        raise ArityError(f"{f.arity}-ary operation given {len(gs)} arguments")
    if not gs:
        raise ArityError("no arguments")
    n = gs[0].arity
    for g in gs:
        if g.base != f.base:
            raise ValueError("base size mismatch")
        if g.arity != n:
            raise ArityError("arguments must share one arity")
    out = compose_arrays(f, [g.values for g in gs])
    return OpTable(f.base, n, out.tobytes())


def diagonal(f: OpTable) -> OpTable:
    """The unary operation ``x -> f(x, .., x)``."""
    q, k = f.base, f.arity
    step = sum(q ** j for j in range(k))
    return OpTable(q, 1, f.table[::step])


def fix_set(f: OpTable) -> frozenset[int]:
    return frozenset(x for x, v in enumerate(diagonal(f).table) if v == x)


def nix_set(f: OpTable) -> frozenset[int]:
    return frozenset(range(f.base)) - fix_set(f)


def is_idempotent(f: OpTable) -> bool:
    return len(fix_set(f)) == f.base


def all_tables(base: int, arity: int) -> Iterator[OpTable]:
    """Every operation of the given arity; only sensible for tiny cases."""
    for vals in itertools.product(range(base), repeat=base ** arity):
        yield OpTable(base, arity, bytes(vals))


def random_table(base: int, arity: int, rng: np.random.Generator) -> OpTable:
    vals = rng.integers(0, base, size=base ** arity, dtype=np.uint8)
    return OpTable(base, arity, vals.tobytes())


# -- composition trees -------------------------------------------------------

@dataclass(frozen=True)
class Proj:
    """Leaf: the projection onto coordinate ``index`` of ``arity``."""
    arity: int
    index: int


@dataclass(frozen=True)
class Gen:
    """Leaf: generator number ``index`` itself."""
    index: int


@dataclass(frozen=True)
class Apply:
    """Inner node: generator ``root`` applied to equal-arity subtrees."""
    root: int
    children: tuple["Tree", ...]


Tree = Union[Proj, Gen, Apply]


class TreeError(ValueError):
    pass


def tree_arity(t: Tree, generators: Sequence[OpTable]) -> int:
    if isinstance(t, Proj):
        return t.arity
    if isinstance(t, Gen):
        return generators[t.index].arity
    return tree_arity(t.children[0], generators)


def evaluate_tree(t: Tree, generators: Sequence[OpTable], base: int | None = None) -> OpTable:
    if base is None:
        if not generators:
            raise TreeError("base size unknown: no generators given")
        base = generators[0].base
    if isinstance(t, Proj):
        return projection(base, t.arity, t.index)
    if isinstance(t, Gen):
        if not 0 <= t.index < len(generators):
            raise TreeError(f"generator index {t.index} out of range")
        return generators[t.index]
    if isinstance(t, Apply):
        if not 0 <= t.root < len(generators):
            raise TreeError(f"generator index {t.root} out of range")
        f = generators[t.root]
        if len(t.children) != f.arity:
            raise TreeError(f"node with {f.arity}-ary root has {len(t.children)} children")
        kids = [evaluate_tree(c, generators, base) for c in t.children]
        if len({k.arity for k in kids}) != 1:
            raise TreeError("children of unequal arity")
        return compose(f, kids)
    raise TreeError(f"not a tree node: {t!r}")


def substitute(t: Tree, args: Sequence[Tree]) -> Tree:
    """Replace every projection leaf ``Proj(n, i)`` by ``args[i-1]``."""
    if isinstance(t, Proj):
        if t.arity != len(args):
            raise TreeError("substitution arity mismatch")
        return args[t.index - 1]
    if isinstance(t, Gen):
        return Apply(t.index, tuple(args))
    return Apply(t.root, tuple(substitute(c, args) for c in t.children))


def tree_size(t: Tree) -> int:
    if isinstance(t, Apply):
        return 1 + sum(tree_size(c) for c in t.children)
    return 1


def tree_to_json(t: Tree):
    if isinstance(t, Proj):
        return {"proj": [t.arity, t.index]}
    if isinstance(t, Gen):
        return {"gen": t.index}
    return {"apply": t.root, "children": [tree_to_json(c) for c in t.children]}


def tree_from_json(data) -> Tree:
    if "proj" in data:
        return Proj(*data["proj"])
    if "gen" in data:
        return Gen(data["gen"])
    return Apply(data["apply"], tuple(tree_from_json(c) for c in data["children"]))
