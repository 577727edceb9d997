"""Clone generation, membership and interpolation on a finite base.

Two kinds of clone are handled.  A :class:`Generated` clone is given by
generators and explored by closure.  The ``n``-ary part of ``cl(G)`` is the
set of ``n``-ary term operations, i.e. the subuniverse of ``A**(A**n)``
generated by the ``n`` projections under the pointwise action of ``G``; the
closure below computes exactly that, one arity at a time, so every saturated
arity is complete and not merely a lower bound.

A :class:`Predicate` clone is given by a pointwise constraint: for every
argument tuple a set of allowed values.  All intensional clones in this
package (idempotent operations, ``Pol(A)``, ``E(R)``, ``C_F``) have this
shape, which makes membership, interpolation and uniform sampling cheap.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .finops import (
    Apply, OpTable, Proj, Tree, coordinates, evaluate_tree,
    projection, tree_to_json,
)


class UndecidedError(Exception):
    """Bounded search could neither confirm nor refute."""


class BudgetError(Exception):
    pass


@dataclass
class Budget:
    arity_bound: int = 3
    size_bound: int = 2_000_000
    exhaustive_limit: int = 2_000_000
    seed: int = 0


DEFAULT_BUDGET = Budget()


# -- clone descriptions ------------------------------------------------------

@dataclass(frozen=True)
class Generated:
    generators: tuple[OpTable, ...]
    base: int
    arity_bound: int = DEFAULT_BUDGET.arity_bound
    size_bound: int = DEFAULT_BUDGET.size_bound

    def __post_init__(self):
        if any(g.base != self.base for g in self.generators):
            raise ValueError("generators must share the base size")
        if self.arity_bound < 1 or self.size_bound < 1:
            raise ValueError("bounds must be positive")
        top = max((g.arity for g in self.generators), default=1)
        if self.arity_bound < top:
            raise ValueError("arity bound below a generator arity")

    @classmethod
    def of(cls, generators: Iterable[OpTable], base: int | None = None, **bounds) -> "Generated":
        gens = tuple(generators)
        if base is None:
            if not gens:
                raise ValueError("base size needed when there are no generators")
            base = gens[0].base
        return cls(gens, base, **bounds)


AllowedFn = Callable[[tuple[int, ...]], Iterable[int]]


class Predicate:
    """A clone defined by allowed values per argument tuple.

    ``allowed(x)`` must contain every coordinate of ``x`` (so projections
    are members) and the constraint family must be composition-closed; the
    factories in this package guarantee both.
    """

    def __init__(self, name: str, base: int, allowed: AllowedFn, params: dict | None = None):
        self.name = name
        self.base = base
        self._allowed = allowed
        self.params = params or {}
        self._masks: dict[int, np.ndarray] = {}

    def __repr__(self):
        return f"Predicate({self.name!r}, base={self.base}, {self.params})"

    def mask(self, arity: int) -> np.ndarray:
        """Boolean array ``m[index, value]``: is ``value`` allowed at ``index``."""
        m = self._masks.get(arity)
        if m is None:
            q = self.base
            m = np.zeros((q ** arity, q), dtype=bool)
            for i, x in enumerate(itertools.product(range(q), repeat=arity)):
                m[i, list(self._allowed(x))] = True
            if not m.any(axis=1).all():
                raise ValueError(f"{self.name}: some tuple admits no value")
            m.setflags(write=False)
            self._masks[arity] = m
        return m

    def test(self, f: OpTable) -> bool:
        if f.base != self.base:
            raise ValueError("base size mismatch")
        m = self.mask(f.arity)
        return bool(m[np.arange(len(f)), f.values].all())

    def count(self, arity: int) -> int:
        return math.prod(int(c) for c in self.mask(arity).sum(axis=1))

    def members(self, arity: int) -> Iterable[OpTable]:
        m = self.mask(arity)
        choices = [np.flatnonzero(row).tolist() for row in m]
        for vals in itertools.product(*choices):
            yield OpTable(self.base, arity, bytes(vals))

    def sample(self, arity: int, rng: np.random.Generator) -> OpTable:
        m = self.mask(arity)
        vals = bytearray()
        for row in m:
            opts = np.flatnonzero(row)
            vals.append(int(opts[rng.integers(len(opts))]))
        return OpTable(self.base, arity, bytes(vals))


CloneSpec = Union[Generated, Predicate]


def full_clone(base: int) -> Predicate:
    return Predicate("all", base, lambda x: range(base))


def idempotent_clone(base: int) -> Predicate:
    def allowed(x):
        return [x[0]] if len(set(x)) == 1 else range(base)
    return Predicate("idempotent", base, allowed)


def pol_member(subset: Iterable[int], f: OpTable) -> bool:
    """Does ``f`` map every tuple over ``subset`` into ``subset``?"""
    a = frozenset(subset)
    if not a:
        return True
    if any(not 0 <= x < f.base for x in a):
        raise ValueError("subset not inside the base")
    for x in itertools.product(sorted(a), repeat=f.arity):
        if f(*x) not in a:
            return False
    return True


def pol_clone(base: int, subset: Iterable[int]) -> Predicate:
    a = frozenset(subset)
    inside = sorted(a)

    def allowed(x):
        return inside if a and all(v in a for v in x) else range(base)
    return Predicate("pol", base, allowed, {"subset": inside})


# -- closure -----------------------------------------------------------------

@dataclass
class ArityPart:
    """Members of one arity, in discovery order."""
    arity: int
    rows: list[bytes] = field(default_factory=list)
    index: dict[bytes, int] = field(default_factory=dict)
    parent: list[Optional[tuple[int, tuple[int, ...]]]] = field(default_factory=list)
    saturated: bool = False

    def add(self, row: bytes, parent) -> bool:
        if row in self.index:
            return False
        self.index[row] = len(self.rows)
        self.rows.append(row)
        self.parent.append(parent)
        return True


@dataclass
class ClosureResult:
    base: int
    generators: tuple[OpTable, ...]
    arity_bound: int
    parts: dict[int, ArityPart]
    complete: bool

    note = ("arity-by-arity closure: each saturated arity holds exactly the "
            "term operations of that arity; unsaturated arities are partial")

    @property
    def saturated(self) -> dict[int, bool]:
        return {n: p.saturated for n, p in self.parts.items()}

    def ops(self, arity: int | None = None) -> list[OpTable]:
        ars = [arity] if arity is not None else sorted(self.parts)
        return [OpTable(self.base, n, r) for n in ars for r in self.parts[n].rows]

    def __len__(self):
        return sum(len(p.rows) for p in self.parts.values())

    def __contains__(self, f: OpTable) -> bool:
        part = self.parts.get(f.arity)
        return part is not None and f.table in part.index

    def provenance(self, f: OpTable) -> Tree:
        part = self.parts[f.arity]
        return self._tree(part, part.index[f.table])

    def _tree(self, part: ArityPart, i: int) -> Tree:
        par = part.parent[i]
        if par is None:
            return Proj(part.arity, i + 1)
        root, kids = par
        return Apply(root, tuple(self._tree(part, j) for j in kids))

    def to_json(self) -> dict:
        return {
            "base": self.base,
            "arity_bound": self.arity_bound,
            "complete": self.complete,
            "note": self.note,
            "generators": [g.to_json() for g in self.generators],
            "saturated": {str(n): s for n, s in self.saturated.items()},
            "ops": [
                {"op": f.to_json(), "provenance": tree_to_json(self.provenance(f))}
                for f in self.ops()
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


CHUNK_CELLS = 1 << 22
BITMAP_LIMIT = 1 << 26


def _close_arity(gens: Sequence[OpTable], base: int, n: int, budget_left: int) -> ArityPart:
    """Semi-naive closure of the ``n`` projections under ``gens``.

    Each round applies every generator to the argument tuples that use at
    least one row found in the previous round, so no tuple is tried twice.
    Small tables are packed into integer keys (a bitmap of seen keys when
    the key space is small enough); larger ones fall back to byte strings.
    """
    part = ArityPart(n)
    for row in coordinates(base, n):
        part.add(row.tobytes(), None)
    width = base ** n
    full = base ** width
    exact_float = full <= 1 << 53
    powers = (base ** np.arange(width, dtype=np.float64)[::-1]) if exact_float else None
    bitmap = np.zeros(full, dtype=bool) if full <= BITMAP_LIMIT else None
    by_arity: dict[int, list[int]] = {}
    for gi, g in enumerate(gens):
        by_arity.setdefault(g.arity, []).append(gi)

    def keys_of(rows: np.ndarray) -> np.ndarray:
        return (rows.astype(np.float64) @ powers).astype(np.int64)

    done = 0
    while True:
        stop = len(part.rows)
        if stop == done or stop == full:
            part.saturated = True
            return part
        known = np.frombuffer(b"".join(part.rows[:stop]), dtype=np.uint8).reshape(stop, width)
        if exact_float:
            known_keys = keys_of(known)
            if bitmap is not None:
                bitmap[known_keys] = True
            else:
                seen = np.sort(known_keys)
        for k, members in sorted(by_arity.items()):
            idx_type = np.uint8 if base ** k <= 256 else np.int64
            for p in range(k):
                spans = [(0, done)] * p + [(done, stop)] + [(0, stop)] * (k - 1 - p)
                sizes = [hi - lo for lo, hi in spans]
                total = math.prod(sizes)
                if not total:
                    continue
                step = max(1, CHUNK_CELLS // width)
                for start in range(0, total, step):
                    flat = np.arange(start, min(total, start + step))
                    picks = [lo + ix for (lo, _), ix in zip(spans, np.unravel_index(flat, sizes))]
                    idx = np.zeros((len(flat), width), dtype=np.int64)
                    for ix in picks:
                        idx = idx * base + known[ix]
                    idx = idx.astype(idx_type)
                    for gi in members:
                        out = gens[gi].values[idx]
                        if exact_float:
                            keys = keys_of(out)
                            if bitmap is not None:
                                fresh = ~bitmap[keys]
                            else:
                                pos = np.searchsorted(seen, keys)
                                fresh = (pos == len(seen)) | (seen[np.minimum(pos, len(seen) - 1)] != keys)
                            cand = np.flatnonzero(fresh)
                            if not len(cand):
                                continue
                            _, first = np.unique(keys[cand], return_index=True)
                            cand = cand[np.sort(first)]
                        else:
                            cand = range(len(flat))
                        for j in cand:
                            if part.add(out[j].tobytes(), (gi, tuple(int(ix[j]) for ix in picks))):
                                if bitmap is not None:
                                    bitmap[keys[j]] = True
                                if len(part.rows) > budget_left:
                                    return part
                                if len(part.rows) == full:
                                    part.saturated = True
                                    return part
        done = stop


def generate_clone(gens: Sequence[OpTable], arity_bound: int = DEFAULT_BUDGET.arity_bound,
                   size_bound: int = DEFAULT_BUDGET.size_bound,
                   base: int | None = None) -> ClosureResult:
    """All members of ``cl(gens)`` of arity at most ``arity_bound``.

    Stops early once more than ``size_bound`` tables are held; the result is
    then flagged incomplete and the interrupted arity unsaturated.
    """
    spec = Generated.of(gens, base, arity_bound=arity_bound, size_bound=size_bound)
    return _closure(spec)


_CACHE: dict[Generated, ClosureResult] = {}


def _closure(spec: Generated) -> ClosureResult:
    hit = _CACHE.get(spec)
    if hit is not None:
        return hit
    parts: dict[int, ArityPart] = {}
    total = 0
    complete = True
    for n in range(1, spec.arity_bound + 1):
        part = _close_arity(spec.generators, spec.base, n, spec.size_bound - total)
        parts[n] = part
        total += len(part.rows)
        if not part.saturated:
            complete = False
            break
    res = ClosureResult(spec.base, spec.generators, spec.arity_bound, parts, complete)
    if len(_CACHE) > 64:
        _CACHE.clear()
    _CACHE[spec] = res
    return res


# -- queries -----------------------------------------------------------------

@dataclass(frozen=True)
class Membership:
    member: bool
    certificate: Optional[Tree] = None

    def __bool__(self):
        return self.member


def contains(c: CloneSpec, f: OpTable) -> Membership:
    """Decide ``f in c``; generated clones return a composition tree."""
    if f.base != c.base:
        raise ValueError("base size mismatch")
    if isinstance(c, Predicate):
        return Membership(c.test(f))
    if f.arity > c.arity_bound:
        raise UndecidedError(f"arity {f.arity} above bound {c.arity_bound}")
    res = _closure(c)
    if f in res:
        return Membership(True, res.provenance(f))
    part = res.parts.get(f.arity)
    if part is None or not part.saturated:
        raise UndecidedError("closure not saturated at this arity")
    return Membership(False)


Window = Sequence[tuple[Sequence[int], int]]


def interpolates(c: CloneSpec, window: Window, arity: int | None = None) -> Membership:
    """Is there a member of ``c`` agreeing with the finite partial map ``window``?

    On success the certificate is the interpolating table (predicate clones)
    or its composition tree (generated clones).
    """
    pts = [(tuple(x), int(v)) for x, v in window]
    if arity is None:
        if not pts:
            return Membership(True)
        arity = len(pts[0][0])
    if any(len(x) != arity for x, _ in pts):
        raise ValueError("window tuples of mixed arity")
    if len({x for x, _ in pts}) != len(pts):
        raise ValueError("window tuples must be distinct")
    q = c.base
    idx = np.array([_index(q, x) for x, _ in pts], dtype=np.int64)
    vals = np.array([v for _, v in pts], dtype=np.int64)
    if isinstance(c, Predicate):
        m = c.mask(arity)
        if len(pts) and not m[idx, vals].all():
            return Membership(False)
        table = m.argmax(axis=1).astype(np.uint8)
        table[idx] = vals
        return Membership(True, OpTable(q, arity, table.tobytes()))
    if arity > c.arity_bound:
        raise UndecidedError(f"arity {arity} above bound {c.arity_bound}")
    res = _closure(c)
    part = res.parts.get(arity)
    if part is None:
        raise UndecidedError("closure stopped before this arity")
    for row in part.rows:
        table = np.frombuffer(row, dtype=np.uint8)
        if (table[idx] == vals).all():
            f = OpTable(q, arity, row)
            return Membership(True, res.provenance(f))
    if not part.saturated:
        raise UndecidedError("no witness found and closure not saturated")
    return Membership(False)


def _index(q: int, x: Sequence[int]) -> int:
    i = 0
    for v in x:
        i = i * q + v
    return i


def members_upto(c: CloneSpec, arity: int, budget: int) -> list[OpTable]:
    if isinstance(c, Generated):
        if arity > c.arity_bound:
            raise UndecidedError(f"arity {arity} above bound {c.arity_bound}")
        res = _closure(c)
        if not res.parts.get(arity) or not res.parts[arity].saturated:
            raise UndecidedError("closure not saturated at this arity")
        return res.ops(arity)
    if c.count(arity) > budget:
        raise BudgetError(f"{c.count(arity)} members of arity {arity} exceed budget {budget}")
    return list(c.members(arity))


def clone_leq_upto(c1: CloneSpec, c2: CloneSpec, arity: int, mode: str = "exhaustive",
                   samples: int = 1000, seed: int = 0,
                   budget: int = DEFAULT_BUDGET.exhaustive_limit) -> bool:
    """Is every member of ``c1`` of arity at most ``arity`` also in ``c2``?

    ``mode="exhaustive"`` enumerates the members of ``c1`` (refusing beyond
    ``budget``); ``mode="sampled"`` draws ``samples`` members per arity with
    a generator seeded by ``seed``.
    """
    if c1.base != c2.base:
        raise ValueError("base size mismatch")
    rng = np.random.default_rng(seed)
    for n in range(1, arity + 1):
        if mode == "exhaustive":
            cands: Iterable[OpTable] = members_upto(c1, n, budget)
        elif mode == "sampled":
            if isinstance(c1, Predicate):
                cands = [c1.sample(n, rng) for _ in range(samples)]
            else:
                pool = members_upto(c1, n, budget)
                cands = [pool[i] for i in rng.integers(0, len(pool), size=samples)]
        else:
            raise ValueError(f"unknown mode {mode!r}")
        if not all(contains(c2, f) for f in cands):
            return False
    return True


def certificate_holds(tree: Tree, generators: Sequence[OpTable], target: OpTable) -> bool:
    return evaluate_tree(tree, generators, target.base) == target


__all__ = [
    "Budget", "BudgetError", "ClosureResult", "CloneSpec", "Generated", "Membership",
    "Predicate", "UndecidedError", "certificate_holds", "clone_leq_upto", "contains",
    "full_clone", "generate_clone", "idempotent_clone", "interpolates", "members_upto",
    "pol_clone", "pol_member", "projection",
]
