"""Clones determined by fixed-point sets.

On a finite base every filter is principal, so a filter is stored by its
generating set ``A`` and consists of all supersets of ``A``; ``A = {}`` is
the improper filter.  The clone ``C_F`` holds the operations whose
fixed-point set contains ``A``.

The certificate builders below return explicit compositions over
idempotent helper operations plus one operation with a prescribed
fixed-point set; every certificate is checked by evaluating its tree.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .dot import cover_pairs, emit_lattice_dot
from .engine import Predicate
from .finops import (
    Apply, Gen, OpTable, Proj, Tree, diagonal, evaluate_tree, fix_set, identity,
    is_idempotent, nix_set, substitute,
)

FILTER_LATTICE_BOUND = 5


class CertificateError(ValueError):
    pass


@dataclass(frozen=True)
class PrincipalFilter:
    base: int
    generator: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "generator", frozenset(self.generator))
        if any(not 0 <= x < self.base for x in self.generator):
            raise ValueError("generator outside the base")

    @property
    def improper(self) -> bool:
        return not self.generator

    @property
    def ultra(self) -> bool:
        return len(self.generator) == 1

    def __contains__(self, s) -> bool:
        return self.generator <= frozenset(s)

    def members(self) -> list[frozenset[int]]:
        rest = sorted(frozenset(range(self.base)) - self.generator)
        return [self.generator | frozenset(c) for r in range(len(rest) + 1)
                for c in itertools.combinations(rest, r)]

    def __le__(self, other: "PrincipalFilter") -> bool:
        return other.generator <= self.generator

    def label(self) -> str:
        return "{" + ",".join(map(str, sorted(self.generator))) + "}"


def cf_member(f: OpTable, F: PrincipalFilter) -> bool:
    if f.base != F.base:
        raise ValueError("base size mismatch")
    return F.generator <= fix_set(f)


def cf_clone(F: PrincipalFilter) -> Predicate:
    A = F.generator
    q = F.base

    def allowed(x):
        return [x[0]] if x[0] in A and len(set(x)) == 1 else range(q)
    return Predicate("C_F", q, allowed, {"generator": sorted(A)})


# -- certificates ------------------------------------------------------------

@dataclass
class Certificate:
    """``tree`` over ``generators`` should evaluate to ``target``."""
    target: OpTable
    tree: Tree
    generators: list[OpTable]
    idempotent: list[int] = field(default_factory=list)

    def verify(self) -> bool:
        if any(not is_idempotent(self.generators[i]) for i in self.idempotent):
            return False
        return evaluate_tree(self.tree, self.generators, self.target.base) == self.target


def dominate_certificate(g: OpTable, f: OpTable) -> Certificate:
    """``g(x) = H(x, f(x))`` with ``H(x, y) = x`` if ``x == y`` else ``g(x)``.

    Needs ``fix(f) <= fix(g)``; ``H`` is idempotent.
    """
    if f.arity != 1 or g.arity != 1:
        raise ValueError("expected unary operations")
    if not fix_set(f) <= fix_set(g):
        raise CertificateError("fix(f) is not contained in fix(g)")
    q = g.base
    H = OpTable.from_function(q, 2, lambda x, y: x if x == y else g(x))
    # generators: [H, f]
    tree = Apply(0, (Proj(1, 1), Apply(1, (Proj(1, 1),))))
    cert = Certificate(g, tree, [H, f], idempotent=[0])
    if not cert.verify():
        raise AssertionError("H(x, f(x)) != g(x)")
    return cert


def lift_certificate(f: OpTable, u: OpTable) -> Certificate:
    """``f(x) = H(x, u(x1))`` with ``H(x, y) = x1`` when all ``xi == y``, else ``f(x)``.

    Needs ``fix(u) == fix(f)``.
    """
    if u.arity != 1:
        raise ValueError("u must be unary")
    if fix_set(u) != fix_set(f):
        raise CertificateError("fix(u) differs from fix(f)")
    n, q = f.arity, f.base
    H = OpTable.from_function(
        q, n + 1, lambda *xs: xs[0] if len(set(xs)) == 1 else f(*xs[:-1]))
    tree = Apply(0, tuple(Proj(n, i) for i in range(1, n + 1)) + (Apply(1, (Proj(n, 1),)),))
    cert = Certificate(f, tree, [H, u], idempotent=[0])
    if not cert.verify():
        raise AssertionError("H(x, u(x1)) != f(x)")
    return cert


@dataclass
class Refusal:
    """``f`` moves a point of ``A`` so no composite can produce it."""
    witness: int


def membership_by_certificate(f: OpTable, A: Iterable[int], g: OpTable) -> Certificate | Refusal:
    """Write ``f`` as a composite of idempotent operations and ``g``.

    Works whenever ``A = fix(g)`` is inside ``fix(f)``:
    ``f(x) = H(x, H'(x1, g(x1)))`` where ``H'`` produces the diagonal of
    ``f`` from ``g`` and ``H`` rebuilds ``f`` from its diagonal.  Otherwise
    the smallest point of ``A`` that ``f`` moves is returned.  Idempotent
    ``f`` needs no ``g`` at all.
    """
    A = frozenset(A)
    if g.arity != 1:
        raise ValueError("g must be unary")
    if fix_set(g) != A:
        raise CertificateError("fix(g) differs from A")
    fix_f = fix_set(f)
    if not A <= fix_f:
        return Refusal(min(A - fix_f))
    n = f.arity
    if is_idempotent(f):
        tree = Apply(0, tuple(Proj(n, i) for i in range(1, n + 1)))
        cert = Certificate(f, tree, [f], idempotent=[0])
    else:
        u = diagonal(f)
        inner = dominate_certificate(u, g)        # u(x) = H'(x, g(x)), gens [H', g]
        outer = lift_certificate(f, u)            # f(x) = H(x, u(x1)), gens [H, u]
        # generators: [H, H', g]
        u_tree = substitute(_reindex(inner.tree, {0: 1, 1: 2}), [Proj(n, 1)])
        tree = Apply(0, tuple(Proj(n, i) for i in range(1, n + 1)) + (u_tree,))
        cert = Certificate(f, tree, [outer.generators[0], inner.generators[0], g], idempotent=[0, 1])
    if not cert.verify():
        raise AssertionError("certificate does not evaluate to f")
    return cert


def _reindex(t: Tree, m: dict[int, int]) -> Tree:
    if isinstance(t, Proj):
        return t
    if isinstance(t, Gen):
        return Gen(m[t.index])
    return Apply(m[t.root], tuple(_reindex(c, m) for c in t.children))


# -- the ideal of moved sets -------------------------------------------------

@dataclass
class IdealWitness:
    """A unary op with ``nix == moved``, as a tree over ``generators``."""
    moved: frozenset[int]
    op: OpTable
    tree: Tree
    how: str


@dataclass
class NixIdeal:
    base: int
    generators: list[OpTable]
    helpers: list[int]
    witnesses: dict[frozenset[int], IdealWitness]

    @property
    def sets(self) -> list[frozenset[int]]:
        return sorted(self.witnesses, key=lambda s: (len(s), sorted(s)))

    def verify(self) -> bool:
        for w in self.witnesses.values():
            if nix_set(w.op) != w.moved:
                return False
            if evaluate_tree(w.tree, self.generators, self.base) != w.op:
                return False
        return all(is_idempotent(self.generators[i]) for i in self.helpers)

    def dual_filter(self) -> PrincipalFilter:
        top = frozenset().union(*self.witnesses)
        return PrincipalFilter(self.base, frozenset(range(self.base)) - top)


def ideal_of_unary(ops: Sequence[OpTable], base: int | None = None) -> NixIdeal:
    """The family ``{nix(f)}`` closed under subsets and unions, with witnesses.

    Subsets come from :func:`dominate_certificate`.  A disjoint union
    ``A1 | A2`` comes from ``f2 . f1'`` where ``f1'`` moves exactly ``A1``
    into the points fixed by ``f2``.  When ``A1`` and ``A2`` are the two
    singletons of a two-element base there is no room for ``f1'``; the swap
    is then obtained as ``T(x, f1(x), f2(x))`` with an idempotent ternary
    ``T``.
    """
    if base is None:
        base = ops[0].base
    q = base
    gens: list[OpTable] = list(ops)
    helpers: list[int] = []
    wit: dict[frozenset[int], IdealWitness] = {}

    def add_helper(h: OpTable) -> int:
        gens.append(h)
        helpers.append(len(gens) - 1)
        return len(gens) - 1

    def record(moved, op, tree, how):
        if moved not in wit:
            assert nix_set(op) == moved
            wit[moved] = IdealWitness(moved, op, tree, how)
            return True
        return False

    for i, f in enumerate(ops):
        u = diagonal(f)
        if f.arity == 1:
            tree = Apply(i, (Proj(1, 1),))
        else:
            tree = Apply(i, tuple(Proj(1, 1) for _ in range(f.arity)))
        record(nix_set(f), u, tree, f"diagonal of generator {i}")
    record(frozenset(), identity(q), Proj(1, 1), "projection")

    changed = True
    while changed:
        changed = False
        for A in sorted(wit, key=lambda s: (len(s), sorted(s))):
            src = wit[A]
            for r in range(len(A)):
                for B in map(frozenset, itertools.combinations(sorted(A), r)):
                    if B in wit:
                        continue
                    g = OpTable.from_values(q, 1, [src.op(x) if x in B else x for x in range(q)])
                    cert = dominate_certificate(g, src.op)
                    hi = add_helper(cert.generators[0])
                    tree = Apply(hi, (Proj(1, 1), src.tree))
                    changed |= record(B, g, tree, f"subset of {sorted(A)}")
        keys = sorted(wit, key=lambda s: (len(s), sorted(s)))
        for A1, A2 in itertools.combinations(keys, 2):
            if A1 & A2 or not A1 or not A2 or (A1 | A2) in wit:
                continue
            changed |= _union(q, A1, A2, wit, record, add_helper)
    return NixIdeal(q, gens, helpers, wit)


def _union(q, A1, A2, wit, record, add_helper) -> bool:
    B = frozenset(range(q)) - A1 - A2
    if not B and len(A1) < 2 and len(A2) >= 2:
        A1, A2 = A2, A1
    w1, w2 = wit[A1], wit[A2]
    if B or len(A1) >= 2:
        if B:
            target = min(B)
            f1p = [target if x in A1 else x for x in range(q)]
        else:
            cyc = sorted(A1)
            nxt = {a: cyc[(i + 1) % len(cyc)] for i, a in enumerate(cyc)}
            f1p = [nxt.get(x, x) for x in range(q)]
        f1p = OpTable.from_values(q, 1, f1p)
        cert = dominate_certificate(f1p, w1.op)
        hi = add_helper(cert.generators[0])
        t1 = Apply(hi, (Proj(1, 1), w1.tree))
        tree = substitute(w2.tree, [t1])
        op = OpTable.from_values(q, 1, [w2.op(f1p(x)) for x in range(q)])
        return record(A1 | A2, op, tree, f"union of {sorted(A1)} and {sorted(A2)}")
    # q == 2, A1 = {a}, A2 = {b}: T(x, y, z) picks the swap from the two moves
    (a,), (b,) = sorted(A1), sorted(A2)
    f1, f2 = w1.op, w2.op

    def T(x, y, z):
        if x == y == z:
            return x
        if x == a and (y, z) == (f1(a), f2(a)):
            return b
        if x == b and (y, z) == (f1(b), f2(b)):
            return a
        return x
    Top = OpTable.from_function(q, 3, T)
    ti = add_helper(Top)
    tree = Apply(ti, (Proj(1, 1), w1.tree, w2.tree))
    swap = OpTable.from_values(q, 1, [b if x == a else a if x == b else x for x in range(q)])
    return record(A1 | A2, swap, tree, f"swap from {a} and {b}")


def filter_of_clone_generators(gens: Sequence[OpTable], base: int | None = None) -> PrincipalFilter:
    """Filter of ``cl(idempotent ops + gens)``: generated by the common fixed points."""
    if base is None:
        base = gens[0].base
    A = frozenset(range(base))
    for g in gens:
        A &= fix_set(g)
    return PrincipalFilter(base, A)


# -- the lattice of filters --------------------------------------------------

@dataclass
class FilterLattice:
    base: int
    filters: list[PrincipalFilter]
    covers: list[tuple[int, int]]

    @property
    def ultrafilters(self) -> list[PrincipalFilter]:
        return [F for F in self.filters if F.ultra]

    def coatoms(self) -> list[PrincipalFilter]:
        top = next(i for i, F in enumerate(self.filters) if F.improper)
        return [self.filters[i] for i, j in self.covers if j == top]

    def one_point_extensions(self) -> list[tuple[int, int]]:
        """Pairs ``(i, j)`` where ``gen(i) = gen(j) + one point``."""
        index = {F.generator: i for i, F in enumerate(self.filters)}
        out = []
        for j, F in enumerate(self.filters):
            for p in range(self.base):
                if p not in F.generator:
                    out.append((index[F.generator | {p}], j))
        return sorted(out)

    def dot(self) -> str:
        return emit_lattice_dot([F.label() for F in self.filters],
                                lambda a, b: self._by_label[a] <= self._by_label[b],
                                f"filters{self.base}")

    @property
    def _by_label(self):
        return {F.label(): F for F in self.filters}


def filter_lattice(q: int, bound: int = FILTER_LATTICE_BOUND) -> FilterLattice:
    """All filters on ``q`` points ordered by inclusion, with cover pairs."""
    if q > bound:
        raise ValueError(f"base size {q} above bound {bound}")
    subsets = [frozenset(c) for r in range(q, -1, -1)
               for c in itertools.combinations(range(q), r)]
    filters = [PrincipalFilter(q, s) for s in subsets]
    covers = sorted(cover_pairs(filters, lambda F, G: F <= G))
    return FilterLattice(q, filters, covers)
