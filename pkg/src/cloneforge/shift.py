"""Shift-equivariant operations on ``X = Y x Z`` seen through a finite window.

A point is ``(component, level)`` and the shift moves a point one level up.
Operations are partial maps on tuples of points whose levels all lie in a
window ``[lo, hi]``.  Every equivariance test only looks at pairs where both
ends are defined, so a windowed operation that passes a test extends to a
total operation with the same property.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

Point = tuple[int, int]
Tuple = tuple[Point, ...]
Window = tuple[int, int]


class PreconditionError(ValueError):
    pass


def shift(p: Point, n: int) -> Point:
    return (p[0], p[1] + n)


def shift_tuple(a: Sequence[Point], n: int) -> Tuple:
    return tuple((y, z + n) for y, z in a)


def in_window(a: Iterable[Point], window: Window) -> bool:
    lo, hi = window
    return all(lo <= z <= hi for _, z in a)


def parallel_offset(a: Sequence[Point], b: Sequence[Point], step: int | None = None) -> Optional[int]:
    """The ``l`` with ``b = a + l``, or ``None``.

    With ``step`` given only multiples of ``step`` count, which is
    parallelism for the ``step``-th power of the shift.
    """
    if len(a) != len(b):
        raise ValueError("tuples of different length")
    if not a:
        return 0
    offsets = set()
    for (ya, za), (yb, zb) in zip(a, b):
        if ya != yb:
            return None
        offsets.add(zb - za)
    if len(offsets) != 1:
        return None
    ell = offsets.pop()
    if step is not None and step != 0 and ell % step:
        return None
    if step == 0 and ell:
        return None
    return ell


@dataclass(frozen=True)
class WindowedOp:
    arity: int
    entries: Mapping[Tuple, Point]
    window: Window

    def __post_init__(self):
        lo, hi = self.window
        if lo > hi:
            raise ValueError("empty window")
        for a, v in self.entries.items():
            if len(a) != self.arity:
                raise ValueError(f"key {a} does not have arity {self.arity}")
            if not in_window(a, self.window) or not in_window([v], self.window):
                raise ValueError(f"entry {a} -> {v} leaves window {self.window}")

    def __call__(self, *a: Point) -> Point:
        return self.entries[tuple(a)]

    def get(self, a: Sequence[Point]) -> Optional[Point]:
        return self.entries.get(tuple(a))

    def __contains__(self, a) -> bool:
        return tuple(a) in self.entries

    def __len__(self):
        return len(self.entries)

    def to_json(self) -> dict:
        return {
            "arity": self.arity,
            "entries": [[[list(p) for p in a], list(v)] for a, v in sorted(self.entries.items())],
            "window": list(self.window),
        }

    @classmethod
    def from_json(cls, data: dict) -> "WindowedOp":
        entries = {tuple(tuple(p) for p in a): tuple(v) for a, v in data["entries"]}
        return cls(data["arity"], entries, tuple(data["window"]))


def window_points(window: Window, y_count: int) -> list[Point]:
    lo, hi = window
    return [(y, z) for y in range(y_count) for z in range(lo, hi + 1)]


def window_tuples(window: Window, y_count: int, arity: int) -> Iterable[Tuple]:
    return itertools.product(window_points(window, y_count), repeat=arity)


def pol_sn_member(f: WindowedOp, n: int) -> bool:
    """``f(a + n) == f(a) + n`` wherever both sides are defined."""
    if n < 0:
        n = -n
    if n == 0:
        return True
    for a, v in f.entries.items():
        w = f.entries.get(shift_tuple(a, n))
        if w is not None and w != shift(v, n):
            return False
    return True


def pol_sn_violation(f: WindowedOp, n: int) -> Optional[Tuple]:
    """Smallest ``a`` with ``f(a + n) != f(a) + n``, if any."""
    for a in sorted(f.entries):
        w = f.entries.get(shift_tuple(a, n))
        if w is not None and w != shift(f.entries[a], n):
            return a
    return None


def restrict(f: WindowedOp, window: Window) -> WindowedOp:
    """Entries whose arguments and value lie in the smaller ``window``."""
    ent = {a: v for a, v in f.entries.items() if in_window(a, window) and in_window([v], window)}
    return WindowedOp(f.arity, ent, window)


def interpolate_pol_s(pairs: Sequence[tuple[Sequence[Point], Point]], window: Window) -> WindowedOp:
    """The shift-equivariant extension of pairwise non-parallel data.

    Each pair ``(a, b)`` is spread along its orbit: ``a + t -> b + t`` for
    every ``t`` keeping both sides inside ``window``.  On that domain the
    values are forced, so the result is unique.
    """
    pairs = [(tuple(tuple(p) for p in a), tuple(b)) for a, b in pairs]
    if not pairs:
        raise ValueError("no data to interpolate")
    k = len(pairs[0][0])
    for (a, b) in pairs:
        if len(a) != k:
            raise ValueError("mixed arities")
        if not in_window(a, window) or not in_window([b], window):
            raise ValueError(f"pair {a} -> {b} outside window {window}")
    for (a, _), (c, _) in itertools.combinations(pairs, 2):
        if parallel_offset(a, c) is not None:
            raise PreconditionError(f"tuples {a} and {c} are parallel")
    lo, hi = window
    entries: dict[Tuple, Point] = {}
    for a, b in pairs:
        levels = [z for _, z in a] + [b[1]]
        for t in range(lo - min(levels), hi - max(levels) + 1):
            entries[shift_tuple(a, t)] = shift(b, t)
    return WindowedOp(k, entries, window)


def compose_windowed(f: WindowedOp, gs: Sequence[WindowedOp], domain: Iterable[Tuple] | None = None) -> WindowedOp:
    """``x -> f(g1(x), .., gk(x))`` wherever every piece is defined.

    ``domain`` defaults to the common domain of the ``gs``.
    """
    if len(gs) != f.arity:
        raise ValueError("wrong number of inner operations")
    if domain is None:
        domain = set(gs[0].entries)
        for g in gs[1:]:
            domain &= set(g.entries)
        domain = sorted(domain)
    ent = {}
    for x in domain:
        inner = tuple(g.entries.get(x) for g in gs)
        if None in inner:
            continue
        v = f.entries.get(inner)
        if v is not None:
            ent[tuple(x)] = v
    return WindowedOp(gs[0].arity, ent, f.window)


def lift_unary(u: WindowedOp, arity: int, domain: Iterable[Tuple]) -> WindowedOp:
    """``x -> u(x_1)`` on the given tuples."""
    ent = {}
    for x in domain:
        v = u.entries.get((x[0],))
        if v is not None:
            ent[tuple(x)] = v
    return WindowedOp(arity, ent, u.window)


# -- samples and named operations ------------------------------------------

def bump_op(period: int, window: Window, y_count: int) -> WindowedOp:
    """Unary ``(y, z) -> (y, z + [period divides z])``.

    Equivariant exactly for the multiples of ``period``.
    """
    lo, hi = window
    ent = {}
    for y, z in window_points(window, y_count):
        v = z + (1 if z % period == 0 else 0)
        if v <= hi:
            ent[((y, z),)] = (y, v)
    return WindowedOp(1, ent, window)


def residue_op(fn, window: Window, y_count: int) -> WindowedOp:
    """Unary op ``(y, z) -> fn(y, z)``, kept where the value is in the window."""
    ent = {}
    for p in window_points(window, y_count):
        v = tuple(fn(*p))
        if in_window([v], window):
            ent[(p,)] = v
    return WindowedOp(1, ent, window)


def identity_op(window: Window, y_count: int) -> WindowedOp:
    return WindowedOp(1, {(p,): p for p in window_points(window, y_count)}, window)


def _class_rep(a: Tuple, n: int) -> tuple[Tuple, int]:
    """Canonical member of ``a``'s class under shifts by multiples of ``n``.

    Returns ``(rep, t)`` with ``a = rep + t``; the representative has its
    first level in ``[0, n)``.
    """
    z = a[0][1]
    r = z % n
    t = z - r
    return shift_tuple(a, -t), t


def random_pol_sn(n: int, arity: int, window: Window, y_count: int, rng: np.random.Generator,
                  support: Iterable[Tuple] | None = None, spread: int = 2) -> WindowedOp:
    """A random member of ``Pol(s^n)`` on the window.

    Each class under shifts by multiples of ``n`` gets a random value near
    the class representative; ``support`` limits the classes to those of
    the given tuples (default: every tuple in the window).  ``n = 0`` gives
    an unconstrained random op.
    """
    lo, hi = window
    if support is None:
        support = window_tuples(window, y_count, arity)
    reps: dict[Tuple, Point] = {}
    ent: dict[Tuple, Point] = {}
    for a in support:
        a = tuple(a)
        if n == 0:
            rep = a
        else:
            rep, _ = _class_rep(a, n)
        if rep in reps:
            continue
        y = int(rng.integers(y_count))
        base_level = rep[int(rng.integers(len(rep)))][1]
        reps[rep] = (y, base_level + int(rng.integers(-spread, spread + 1)))
        if n == 0:
            shifts = [0]
        else:
            levels = [z for _, z in rep]
            first = -((min(levels) - lo) // n) * n
            shifts = range(first, hi - max(levels) + 1, n)
        for t in shifts:
            b = shift_tuple(rep, t)
            v = shift(reps[rep], t)
            if in_window(b, window) and in_window([v], window):
                ent[b] = v
    return WindowedOp(arity, ent, window)


def random_double_equivariant(n: int, m: int, arity: int, window: Window, y_count: int,
                              rng: np.random.Generator, spread: int = 1) -> WindowedOp:
    """Random op on all window tuples, equivariant for shifts by ``n`` and by ``m``.

    Tuples are linked by ``+n`` and ``+m`` steps that stay inside the window;
    each connected piece gets one random value, spread along the piece.
    Nothing about ``gcd(n, m)`` is assumed.
    """
    lo, hi = window
    pts = list(window_tuples(window, y_count, arity))
    parent = {a: a for a in pts}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a in pts:
        for step in (n, m):
            b = shift_tuple(a, step)
            if b in parent:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
    values: dict[Tuple, Point] = {}
    ent = {}
    for a in pts:
        r = find(a)
        if r not in values:
            values[r] = (int(rng.integers(y_count)), r[0][1] + int(rng.integers(-spread, spread + 1)))
        v = shift(values[r], a[0][1] - r[0][1])
        if in_window([v], window):
            ent[a] = v
    return WindowedOp(arity, ent, window)


# -- group of a set of unary operations -------------------------------------

@dataclass
class ShiftGroupReport:
    window: Window
    members: frozenset[int]
    n_star: int
    caveat: str = ("equivariance outside the window is unobserved; "
                   "members is an over-approximation")


def shift_group(unary_ops: Sequence[WindowedOp]) -> ShiftGroupReport:
    """Shifts ``n`` (|n| <= window width) under which all ops are equivariant."""
    if not unary_ops:
        raise ValueError("no operations")
    window = unary_ops[0].window
    if any(f.window != window for f in unary_ops):
        raise ValueError("operations must share a window")
    if any(f.arity != 1 for f in unary_ops):
        raise ValueError("operations must be unary")
    width = window[1] - window[0]
    good = {0}
    for n in range(1, width + 1):
        if all(pol_sn_member(f, n) for f in unary_ops):
            good.update((n, -n))
    positive = [n for n in good if n > 0]
    return ShiftGroupReport(window, frozenset(good), min(positive) if positive else 0)


# -- constructions from the proof -------------------------------------------

def unary_reduction(g: WindowedOp, b: Point) -> WindowedOp:
    """A unary non-equivariant op ``x -> g(f1(x), .., fk(x))``.

    Each ``fi`` is shift-equivariant with ``fi(b) = ai`` where ``a`` is the
    smallest tuple with ``g(a + 1) != g(a) + 1``.
    """
    a = pol_sn_violation(g, 1)
    if a is None:
        raise PreconditionError("operation is equivariant on its window")
    window = g.window
    if not in_window([b, shift(b, 1)], window):
        raise PreconditionError(f"point {b} too close to the window edge")
    fs = [interpolate_pol_s([((b,), ai)], window) for ai in a]
    h = compose_windowed(g, fs)
    assert h.get((shift(b, 1),)) != shift(h(b), 1)
    return h


@dataclass
class Separator:
    """``f = d . g . pi_1`` with ``g`` shift-equivariant and ``g(a_1) = c``."""
    op: WindowedOp
    unary: WindowedOp
    inner: WindowedOp
    outer_index: int
    c: Point
    offset: int


def separation_points(d: WindowedOp, ell: int) -> list[Point]:
    """All ``c`` with ``d(c + ell) != d(c) + ell``, smallest first."""
    out = []
    for (c,) in sorted(d.entries):
        w = d.entries.get((shift(c, ell),))
        if w is not None and w != shift(d.entries[(c,)], ell):
            out.append(c)
    return out


def separate(a: Sequence[Point], b: Sequence[Point], d: WindowedOp, c: Point,
             domain: Iterable[Tuple] | None = None, outer_index: int = 0) -> Separator:
    """Make ``(a, f(a))`` and ``(b, f(b))`` non-parallel, given ``b = a + l``.

    ``c`` must witness ``d(c + l) != d(c) + l``.  ``f`` is defined on
    ``domain`` (default ``{a, b}``), wherever the pieces allow.
    """
    a, b = tuple(map(tuple, a)), tuple(map(tuple, b))
    ell = parallel_offset(a, b)
    if ell is None:
        raise PreconditionError("tuples are not parallel; nothing to separate")
    if ell == 0:
        raise PreconditionError("tuples are equal")
    dc, dcl = d.get((c,)), d.get((shift(c, ell),))
    if dc is None or dcl is None or dcl == shift(dc, ell):
        raise PreconditionError(f"{c} does not witness non-equivariance for {ell}")
    window = d.window
    if domain is None:
        domain = [a, b]
    domain = [tuple(x) for x in domain]
    firsts = sorted({x[0] for x in domain})
    pairs = [((a[0],), c)]
    seen = [a[0]]
    for p in firsts:
        if all(parallel_offset((p,), (s,)) is None for s in seen):
            pairs.append(((p,), p))
            seen.append(p)
    g = interpolate_pol_s(pairs, window)
    if g.get((shift(a[0], ell),)) != shift(c, ell):
        raise PreconditionError("orbit of the first coordinate leaves the window")
    unary = compose_windowed(d, [g])
    op = lift_unary(unary, len(a), domain)
    fa, fb = op.get(a), op.get(b)
    if fa is None or fb is None:
        raise PreconditionError("separator undefined on the given tuples")
    assert parallel_offset(a + (fa,), b + (fb,)) is None
    return Separator(op, unary, g, outer_index, c, ell)


@dataclass
class InterpolationCertificate:
    """Recipe ``f(x) = h(x, f_i(x) : i in I)``."""
    pairs: list[tuple[int, int]]
    separators: list[Separator]
    h: WindowedOp
    extended: list[Tuple]

    def evaluate(self, x: Sequence[Point]) -> Optional[Point]:
        x = tuple(x)
        extra = []
        for sep in self.separators:
            v = sep.unary.get((x[0],))
            if v is None:
                return None
            extra.append(v)
        return self.h.get(x + tuple(extra))


def theorem_interpolation(g: WindowedOp, tuples: Sequence[Sequence[Point]],
                          witnesses: Sequence[WindowedOp],
                          window: Window | None = None) -> tuple[WindowedOp, InterpolationCertificate]:
    """Interpolate ``g`` on ``tuples`` by an op built from shift-equivariant
    parts and the unary ``witnesses``.

    ``n*`` is read off the witnesses with :func:`shift_group`; ``g`` must be
    ``s^{n*}``-equivariant and no two tuples may be ``s^{n*}``-parallel.
    Every ordered pair of parallel tuples gets a separator built from the
    first witness that can split it; non-parallel pairs need none, and a
    bare projection stands in for them.
    """
    if window is None:
        window = witnesses[0].window
    tuples = [tuple(map(tuple, a)) for a in tuples]
    report = shift_group(witnesses)
    nstar = report.n_star
    if not pol_sn_member(g, nstar):
        raise PreconditionError(f"g is not equivariant for shifts by {nstar}")
    for a, b in itertools.combinations(tuples, 2):
        if parallel_offset(a, b, nstar) is not None:
            raise PreconditionError(f"{a} and {b} are parallel for step {nstar}")
    targets = []
    for a in tuples:
        v = g.get(a)
        if v is None:
            raise PreconditionError(f"g undefined at {a}")
        targets.append(v)

    pairs = [(i, j) for i in range(len(tuples)) for j in range(len(tuples)) if i != j]
    seps: list[Separator] = []
    for i, j in pairs:
        a, b = tuples[i], tuples[j]
        ell = parallel_offset(a, b)
        if ell is None:
            seps.append(_projection_separator(tuples, window))
            continue
        sep = _first_separator(a, b, ell, witnesses, tuples)
        if sep is not None:
            seps.append(sep)
        else:
            raise PreconditionError(f"no witness separates tuples {i} and {j} (offset {ell})")

    extended = []
    for a in tuples:
        extra = [s.unary.get((a[0],)) for s in seps]
        if None in extra:
            raise PreconditionError(f"a separator is undefined at {a}; widen the window")
        extended.append(a + tuple(extra))
    h = interpolate_pol_s(list(zip(extended, targets)), window)
    cert = InterpolationCertificate(pairs, seps, h, extended)
    ent = {}
    for a in tuples:
        v = cert.evaluate(a)
        if v is not None:
            ent[a] = v
    f = WindowedOp(len(tuples[0]), ent, window)
    return f, cert


def _first_separator(a, b, ell, witnesses, domain) -> Optional[Separator]:
    # smallest witness index, then smallest point, that works on the whole domain
    for wi, d in enumerate(witnesses):
        for c in separation_points(d, ell):
            try:
                sep = separate(a, b, d, c, domain=domain, outer_index=wi)
            except PreconditionError:
                continue
            if all(sep.unary.get((x[0],)) is not None for x in domain):
                return sep
    return None


def _projection_separator(tuples: Sequence[Tuple], window: Window) -> Separator:
    firsts = sorted({a[0] for a in tuples})
    ident = WindowedOp(1, {(p,): p for p in firsts}, window)
    op = lift_unary(ident, len(tuples[0]), tuples)
    return Separator(op, ident, ident, -1, firsts[0], 0)


def divisibility_counterexample(n: int, m: int, window: Window, y_count: int) -> Optional[WindowedOp]:
    """An op in ``Pol(s^n)`` but not ``Pol(s^m)`` when ``n`` does not divide ``m``."""
    if m % n == 0:
        return None
    f = bump_op(n, window, y_count)
    assert pol_sn_member(f, n) and not pol_sn_member(f, m)
    return f


def inner_window(window: Window, margin: int) -> Window:
    return (window[0] + margin, window[1] - margin)


def gcd_step(n: int, m: int) -> int:
    return math.gcd(n, m)
