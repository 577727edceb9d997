"""Finite join-semilattices, their congruences and congruence orders, and
the clones ``E(R)`` of operations with ``f(x) R (x1 v .. v xk)``.

Elements are ``0..q-1`` and ``0`` must be the least element.  Relations are
``q x q`` boolean numpy matrices, partitions are restricted-growth class-id
tuples.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .engine import Predicate
from .finops import Apply, OpTable, Proj, Tree, coordinates, evaluate_tree

BRUTE_FORCE_BOUND = 8


class SemilatticeError(ValueError):
    pass


class Semilattice:
    def __init__(self, join: OpTable, name: str = ""):
        if join.arity != 2:
            raise SemilatticeError("join must be binary")
        self.join = join
        self.size = join.base
        self.name = name
        q = self.size
        j = self.table
        r = np.arange(q)
        if not (j[r, r] == r).all():
            raise SemilatticeError("join is not idempotent")
        if not (j == j.T).all():
            raise SemilatticeError("join is not commutative")
        # (x v y) v z == x v (y v z)
        left = j[j[:, :, None], r[None, None, :]]
        right = j[r[:, None, None], j[None, :, :]]
        if not (left == right).all():
            raise SemilatticeError("join is not associative")
        if not (j[0] == r).all():
            raise SemilatticeError("element 0 is not the least element")

    @classmethod
    def from_table(cls, rows: Sequence[Sequence[int]], name: str = "") -> "Semilattice":
        q = len(rows)
        return cls(OpTable.from_values(q, 2, [v for row in rows for v in row]), name)

    @classmethod
    def chain(cls, n: int) -> "Semilattice":
        return cls(OpTable.from_function(n, 2, max), f"chain{n}")

    @cached_property
    def table(self) -> np.ndarray:
        q = self.size
        return self.join.values.reshape(q, q).astype(np.int64)

    @cached_property
    def leq(self) -> np.ndarray:
        """``leq[a, b]`` iff ``a v b == b``."""
        return self.table == np.arange(self.size)[None, :]

    def joinall(self, xs: Iterable[int]) -> int:
        acc = 0
        for x in xs:
            acc = int(self.table[acc, x])
        return acc

    def join_array(self, arity: int) -> np.ndarray:
        """``x1 v .. v xk`` for every tuple, in table order."""
        coords = coordinates(self.size, arity).astype(np.int64)
        acc = coords[0]
        for row in coords[1:]:
            acc = self.table[acc, row]
        return acc

    def __repr__(self):
        return f"Semilattice({self.name or self.size})"


def _from_sets(family: Sequence[frozenset], name: str) -> Semilattice:
    index = {s: i for i, s in enumerate(family)}
    q = len(family)
    vals = [index[family[a] | family[b]] for a in range(q) for b in range(q)]
    return Semilattice(OpTable.from_values(q, 2, vals), name)


def random_semilattice(size: int, rng: np.random.Generator, universe: int = 4,
                       tries: int = 10_000) -> Semilattice:
    """Random union-closed family containing the empty set, relabelled.

    The empty set becomes 0; the other elements get a random order.
    """
    for _ in range(tries):
        fam = {frozenset()}
        while len(fam) < size:
            s = frozenset(int(x) for x in np.flatnonzero(rng.integers(0, 2, size=universe)))
            new = {s} | {s | t for t in fam}
            if len(fam | new) > size:
                break
            fam |= new
        if len(fam) == size:
            rest = sorted(fam - {frozenset()}, key=sorted)
            perm = rng.permutation(len(rest))
            family = [frozenset()] + [rest[i] for i in perm]
            return _from_sets(family, f"random{size}")
    raise SemilatticeError(f"could not sample a semilattice of size {size}")


def lattice_m3() -> Semilattice:
    # 0 < a, b, c < 1, not a family of sets under union
    q = 5
    rows = [[0] * q for _ in range(q)]
    for a in range(q):
        for b in range(q):
            if a == b or b == 0:
                rows[a][b] = a
            elif a == 0:
                rows[a][b] = b
            else:
                rows[a][b] = 4
    return Semilattice.from_table(rows, "M3")


def lattice_n5() -> Semilattice:
    # 0 < a < b < 1, 0 < c < 1
    fam = [frozenset(), frozenset({0}), frozenset({0, 1}), frozenset({1, 2}), frozenset({0, 1, 2})]
    return _from_sets(fam, "N5")


def boolean_lattice(bits: int) -> Semilattice:
    q = 2 ** bits
    return Semilattice(OpTable.from_function(q, 2, lambda a, b: a | b), f"B{bits}")


def corpus(seed: int = 0, max_size: int = 6, random_count: int = 50) -> list[Semilattice]:
    """Chains, small named lattices and random semilattices up to ``max_size``."""
    rng = np.random.default_rng(seed)
    out = [Semilattice.chain(n) for n in range(1, max_size + 1)]
    named = [boolean_lattice(1), boolean_lattice(2), lattice_m3(), lattice_n5()]
    out += [s for s in named if s.size <= max_size]
    for i in range(random_count):
        size = int(rng.integers(2, max_size + 1))
        out.append(random_semilattice(size, rng))
    return out


# -- partitions and congruences --------------------------------------------

def set_partitions(n: int) -> Iterable[tuple[int, ...]]:
    """Restricted-growth strings of length ``n``."""
    if n == 0:
        yield ()
        return

    def rec(prefix, top):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for c in range(top + 2):
            prefix.append(c)
            yield from rec(prefix, max(top, c))
            prefix.pop()

    yield from rec([0], 0)


def canonical(classes: Sequence[int]) -> tuple[int, ...]:
    relabel: dict[int, int] = {}
    return tuple(relabel.setdefault(c, len(relabel)) for c in classes)


def is_compatible(S: Semilattice, classes: Sequence[int]) -> bool:
    """``a ~ b`` implies ``a v c ~ b v c``."""
    cls = np.asarray(classes)
    same = cls[:, None] == cls[None, :]
    a, b = np.nonzero(same)
    return bool((cls[S.table[a]] == cls[S.table[b]]).all())


def enumerate_congruences(S: Semilattice, bound: int = BRUTE_FORCE_BOUND) -> list[tuple[int, ...]]:
    """All congruences, finer ones first, then lexicographic."""
    if S.size > bound:
        raise SemilatticeError(f"size {S.size} above brute-force bound {bound}")
    found = [p for p in set_partitions(S.size) if is_compatible(S, p)]
    return sorted(found, key=lambda p: (-len(set(p)), p))


def refines(p: Sequence[int], r: Sequence[int]) -> bool:
    """Every class of ``p`` lies inside a class of ``r``."""
    m: dict[int, int] = {}
    return all(m.setdefault(a, b) == b for a, b in zip(p, r))


def congruence_join(S: Semilattice, p: Sequence[int], r: Sequence[int]) -> tuple[int, ...]:
    """Least congruence containing both partitions."""
    q = S.size
    parent = list(range(q))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
            return True
        return False

    for part in (p, r):
        for a in range(q):
            for b in range(a + 1, q):
                if part[a] == part[b]:
                    union(a, b)
    changed = True
    while changed:
        changed = False
        for a in range(q):
            for b in range(a + 1, q):
                if find(a) == find(b):
                    for c in range(q):
                        if union(int(S.table[a, c]), int(S.table[b, c])):
                            changed = True
    return canonical([find(x) for x in range(q)])


def congruence_meet(p: Sequence[int], r: Sequence[int]) -> tuple[int, ...]:
    return canonical(list(zip(p, r)))


# -- congruence orders -----------------------------------------------------

def is_congruence_order(S: Semilattice, R: np.ndarray) -> bool:
    R = np.asarray(R, dtype=bool)
    q = S.size
    if not R.diagonal().all():
        return False
    Ri = R.astype(np.int64)
    if ((Ri @ Ri > 0) & ~R).any():
        return False
    if (S.leq & ~R).any():
        return False
    # x R z and y R z imply (x v y) R z
    for z in range(q):
        below = np.flatnonzero(R[:, z])
        joins = S.table[np.ix_(below, below)]
        if not R[joins.ravel(), z].all():
            return False
    return True


def check_congruence_order(S: Semilattice, R: np.ndarray) -> np.ndarray:
    R = np.asarray(R, dtype=bool)
    if R.shape != (S.size, S.size) or not is_congruence_order(S, R):
        raise SemilatticeError("not a congruence order")
    return R


def order_to_congruence(R: np.ndarray) -> tuple[int, ...]:
    """Classes of ``R`` intersected with its converse."""
    R = np.asarray(R, dtype=bool)
    theta = R & R.T
    return canonical([int(np.flatnonzero(theta[x])[0]) for x in range(len(R))])


def congruence_to_order(S: Semilattice, classes: Sequence[int]) -> np.ndarray:
    """``x R y`` iff ``x/theta <= y/theta``, i.e. ``(x v y) theta y``."""
    cls = np.asarray(classes)
    return cls[S.table] == cls[None, :]


def congruence_orders(S: Semilattice) -> list[np.ndarray]:
    return [congruence_to_order(S, p) for p in enumerate_congruences(S)]


def closure_order(S: Semilattice, pairs: np.ndarray) -> np.ndarray:
    """Least congruence order containing ``pairs`` (boolean matrix)."""
    R = np.asarray(pairs, dtype=bool) | S.leq | np.eye(S.size, dtype=bool)
    q = S.size
    while True:
        old = R.copy()
        Ri = R.astype(np.int64)
        R = R | ((Ri @ Ri) > 0)
        for z in range(q):
            below = np.flatnonzero(R[:, z])
            R[S.table[np.ix_(below, below)].ravel(), z] = True
        if (R == old).all():
            return R


def order_of_unary_generators(S: Semilattice, unary: Iterable[OpTable]) -> np.ndarray:
    """The order ``x <= y`` iff some unary op maps ``y`` to ``x``, for the
    clone generated by ``E(<=)`` and ``unary``."""
    pairs = np.zeros((S.size, S.size), dtype=bool)
    for f in unary:
        if f.arity != 1 or f.base != S.size:
            raise ValueError("expected unary operations on the semilattice")
        for y, x in enumerate(f.table):
            pairs[x, y] = True
    return closure_order(S, pairs)


# -- the clones E(R) ------------------------------------------------------

def chi(S: Semilattice, a: int, b: int) -> OpTable:
    """Sends ``b`` to ``a`` and fixes everything else."""
    vals = list(range(S.size))
    vals[b] = a
    return OpTable.from_values(S.size, 1, vals)


def e_member(f: OpTable, S: Semilattice, R: np.ndarray) -> bool:
    """``f(x) R (x1 v .. v xk)`` for every tuple ``x``."""
    if f.base != S.size:
        raise ValueError("base size mismatch")
    R = np.asarray(R, dtype=bool)
    return bool(R[f.values.astype(np.int64), S.join_array(f.arity)].all())


def e_member_by_downsets(f: OpTable, S: Semilattice, R: np.ndarray) -> bool:
    """Same test as :func:`e_member`, as preservation of every ``{x : x R a}``."""
    from .engine import pol_member
    R = np.asarray(R, dtype=bool)
    return all(pol_member(np.flatnonzero(R[:, a]).tolist(), f) for a in range(S.size))


def e_clone(S: Semilattice, R: np.ndarray) -> Predicate:
    R = np.asarray(R, dtype=bool)

    def allowed(x):
        return np.flatnonzero(R[:, S.joinall(x)]).tolist()
    return Predicate("E", S.size, allowed, {"semilattice": S.name, "order": R.astype(int).tolist()})


def unary_members(S: Semilattice, R: np.ndarray) -> list[OpTable]:
    """Every unary table in ``E(R)`` (exhaustive over ``q**q`` tables)."""
    R = np.asarray(R, dtype=bool)
    choices = [np.flatnonzero(R[:, x]).tolist() for x in range(S.size)]
    return [OpTable(S.size, 1, bytes(v)) for v in itertools.product(*choices)]


@dataclass
class EInterpolation:
    """``f' = f_1 v .. v f_n`` with ``f_i(x) = h_i(g_i(x1 v .. v xk), x)``.

    ``generators`` is ``[join, h_1, g_1, h_2, g_2, ..]``; ``tree`` evaluates
    to ``op`` over them.
    """
    op: OpTable
    tree: Tree
    generators: list[OpTable]
    targets: list[int]

    def verify(self) -> bool:
        return evaluate_tree(self.tree, self.generators, self.op.base) == self.op


def _join_tree(leaves: Sequence[Tree]) -> Tree:
    acc = leaves[0]
    for t in leaves[1:]:
        acc = Apply(0, (acc, t))
    return acc


def e_interpolate(S: Semilattice, R: np.ndarray, f: OpTable,
                  points: Sequence[Sequence[int]]) -> EInterpolation:
    """An operation agreeing with ``f`` on ``points``, assembled from ``v``,
    one ``chi`` per point and one ``(k+1)``-ary selector per point.

    The selector returns its first argument on the chosen point and the
    least element 0 elsewhere.
    """
    R = np.asarray(R, dtype=bool)
    k = f.arity
    pts = [tuple(p) for p in points]
    if not pts:
        raise ValueError("no points")
    if len(set(pts)) != len(pts):
        raise ValueError("points must be distinct")
    q = S.size
    gens: list[OpTable] = [S.join]
    xs = [Proj(k, i) for i in range(1, k + 1)]
    join_x = _join_tree(xs)
    parts: list[Tree] = []
    targets = []
    for a in pts:
        b = f(*a)
        d = S.joinall(a)
        if not R[b, d]:
            raise SemilatticeError(f"f({a}) = {b} is not below {d}; f is not in E(R)")
        targets.append(b)
        g = chi(S, b, d)
        sel = [0] * q ** (k + 1)
        for y in range(q):
            sel[_idx(q, (y,) + a)] = y
        h = OpTable.from_values(q, k + 1, sel)
        hi, gi = len(gens), len(gens) + 1
        gens += [h, g]
        parts.append(Apply(hi, (Apply(gi, (join_x,)),) + tuple(xs)))
    tree = _join_tree(parts)
    op = evaluate_tree(tree, gens, q)
    return EInterpolation(op, tree, gens, targets)


def _idx(q: int, xs: Sequence[int]) -> int:
    i = 0
    for x in xs:
        i = i * q + x
    return i


# -- the (N, max) example, truncated to [0, N) ---------------------------

def is_interval_partition(classes: Sequence[int]) -> bool:
    seen = set()
    prev = None
    for c in classes:
        if c != prev:
            if c in seen:
                return False
            seen.add(c)
            prev = c
    return True


def interval_congruence_maps(n: int, classes: Sequence[int]) -> frozenset[int]:
    """Maxima of the classes, except the top class which stands in for the
    infinite tail."""
    if len(classes) != n:
        raise ValueError("partition of the wrong length")
    if not is_interval_partition(classes):
        raise ValueError("classes are not intervals")
    return frozenset(i for i in range(n - 1) if classes[i] != classes[i + 1])


def set_to_congruence(n: int, cuts: Iterable[int]) -> tuple[int, ...]:
    """``k`` and ``m > k`` share a class iff no cut ``a`` has ``k <= a < m``."""
    cuts = frozenset(cuts)
    if any(not 0 <= a < n - 1 for a in cuts):
        raise ValueError("cuts must lie in [0, n-1)")
    out, c = [], 0
    for i in range(n):
        out.append(c)
        if i in cuts:
            c += 1
    return tuple(out)


# -- lattice of congruences as a DOT diagram -----------------------------

def con_lattice_dot(S: Semilattice, name: str = "Con") -> str:
    from .dot import emit_lattice_dot
    cons = enumerate_congruences(S)
    labels = ["|".join("".join(str(x) for x in range(S.size) if p[x] == c)
                       for c in range(max(p) + 1)) for p in cons]
    return emit_lattice_dot(labels, lambda a, b: refines(cons[labels.index(a)], cons[labels.index(b)]), name)
