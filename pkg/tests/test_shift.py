import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cloneforge.shift import (
    PreconditionError, WindowedOp, bump_op, divisibility_counterexample, identity_op,
    inner_window, interpolate_pol_s, parallel_offset, pol_sn_member, pol_sn_violation,
    random_double_equivariant, random_pol_sn, residue_op, restrict, separate,
    separation_points, shift, shift_group, shift_tuple, theorem_interpolation, unary_reduction,
)

W = (-8, 8)


def period2(window=(-4, 4)):
    return residue_op(lambda y, z: (y, z + z % 2), window, 1)


def test_shift_examples():
    assert shift((1, 5), 0) == (1, 5)
    assert shift((0, 3), 1) == (0, 4)
    assert shift(shift((2, -1), 5), -5) == (2, -1)


@given(st.integers(0, 3), st.integers(-50, 50), st.integers(-50, 50), st.integers(-50, 50))
def test_shift_additive(y, z, n1, n2):
    assert shift(shift((y, z), n1), n2) == shift((y, z), n1 + n2)


def test_parallel_offset_examples():
    a = ((0, 0), (0, 3))
    assert parallel_offset(a, a) == 0
    assert parallel_offset(a, ((0, 1), (0, 4))) == 1
    assert parallel_offset(((0, 0), (0, 1)), ((0, 0), (0, 2))) is None
    assert parallel_offset(((0, 0),), ((1, 0),)) is None
    assert parallel_offset(((0, 0),), ((0, 4),), step=2) == 4
    assert parallel_offset(((0, 0),), ((0, 3),), step=2) is None


def test_pol_sn_examples():
    ident = identity_op(W, 2)
    assert all(pol_sn_member(ident, n) for n in range(0, 6))
    s = residue_op(lambda y, z: (y, z + 1), W, 2)
    assert pol_sn_member(s, 1)
    f = period2()
    assert pol_sn_member(f, 2) and not pol_sn_member(f, 1)
    assert pol_sn_member(f, 0)
    a = pol_sn_violation(f, 1)
    assert f(shift(a[0], 1)) != shift(f(*a), 1)


def test_windowed_op_validation_and_json():
    with pytest.raises(ValueError):
        WindowedOp(1, {((0, 9),): (0, 0)}, W)
    with pytest.raises(ValueError):
        WindowedOp(2, {((0, 0),): (0, 0)}, W)
    f = bump_op(3, W, 2)
    assert WindowedOp.from_json(f.to_json()) == f
    assert restrict(f, (-2, 2)).window == (-2, 2)


def test_interpolate_single_pair():
    a, b = ((0, 0), (1, 2)), (0, 1)
    f = interpolate_pol_s([(a, b)], W)
    for t in range(-8, 7):
        assert f(*shift_tuple(a, t)) == shift(b, t)
    assert len(f) == 15
    assert pol_sn_member(f, 1)


def test_interpolate_independent_orbits():
    f = interpolate_pol_s([(((0, 0),), (0, 0)), (((1, 0),), (1, 3))], W)
    assert f((0, 5)) == (0, 5) and f((1, -2)) == (1, 1)
    assert pol_sn_member(f, 1)


def test_interpolate_shared_component():
    pairs = [(((0, 0), (0, 1)), (0, 4)), (((0, 0), (0, 2)), (0, -3))]
    f = interpolate_pol_s(pairs, W)
    assert pol_sn_member(f, 1)
    for a, b in pairs:
        assert f(*a) == b


def test_interpolate_rejects_parallel():
    with pytest.raises(PreconditionError):
        interpolate_pol_s([(((0, 0),), (0, 0)), (((0, 2),), (0, 1))], W)


def test_interpolate_is_the_unique_extension(rng):
    # any equivariant op agreeing on the pairs agrees on the whole saturation
    for _ in range(20):
        g = random_pol_sn(1, 2, W, 2, rng)
        keys = sorted(g.entries)
        picks = []
        for i in rng.permutation(len(keys))[:6]:
            a = keys[i]
            if all(parallel_offset(a, b) is None for b, _ in picks):
                picks.append((a, g.entries[a]))
        f = interpolate_pol_s(picks, W)
        for a, v in f.entries.items():
            if a in g.entries:
                assert g.entries[a] == v


def test_shift_group_examples():
    rep = shift_group([identity_op(W, 1)])
    assert rep.n_star == 1 and rep.members == frozenset(range(-16, 17))
    assert shift_group([period2()]).n_star == 2


def test_shift_group_two_periods():
    window = (-24, 24)
    # equivariant for multiples of 4 only, and of 6 only: the common group is 12Z
    both = shift_group([bump_op(4, window, 1), bump_op(6, window, 1)])
    assert both.n_star == 12
    # one op equivariant for 4 and for 6 must also be equivariant for 4-6 = -2
    rng = np.random.default_rng(3)
    f = random_double_equivariant(4, 6, 1, window, 1, rng)
    assert pol_sn_member(restrict(f, inner_window(window, 10)), 2)
    assert shift_group([bump_op(2, window, 1)]).n_star == 2
    assert 0 in both.members and all(-n in both.members for n in both.members)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 8), st.integers(2, 8), st.integers(0, 2 ** 32 - 1))
def test_gcd_law(n, m, seed):
    rng = np.random.default_rng(seed)
    window = (-20, 20)
    f = random_double_equivariant(n, m, 1, window, 1, rng)
    assert pol_sn_member(f, n) and pol_sn_member(f, m)
    assert pol_sn_member(restrict(f, inner_window(window, n + m)), math.gcd(n, m))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 2 ** 32 - 1))
def test_divisibility_order(n, m, seed):
    rng = np.random.default_rng(seed)
    if m % n == 0:
        f = random_pol_sn(n, 1, W, 2, rng)
        assert pol_sn_member(f, m)
    else:
        f = divisibility_counterexample(n, m, W, 2)
        assert pol_sn_member(f, n) and not pol_sn_member(f, m)


def test_unary_reduction():
    g = period2()
    h = unary_reduction(g, (0, 0))
    assert h.arity == 1 and not pol_sn_member(h, 1)
    ent = {((0, z), (0, w)): (0, max(z, w) + (z % 2)) for z in range(-8, 8) for w in range(-8, 8)
           if max(z, w) + z % 2 <= 8}
    g2 = WindowedOp(2, ent, W)
    h2 = unary_reduction(g2, (0, 1))
    assert h2.arity == 1 and not pol_sn_member(h2, 1)
    with pytest.raises(PreconditionError):
        unary_reduction(identity_op(W, 1), (0, 0))


def test_separate():
    d = bump_op(2, W, 1)
    a = ((0, 0), (0, 3))
    b = shift_tuple(a, 1)
    c = separation_points(d, 1)[0]
    sep = separate(a, b, d, c)
    fa, fb = sep.op(*a), sep.op(*b)
    assert parallel_offset(a + (fa,), b + (fb,)) is None
    with pytest.raises(PreconditionError):
        separate(a, ((0, 0), (0, 4)), d, c)
    s = identity_op(W, 1)
    assert separation_points(s, 1) == []
    with pytest.raises(PreconditionError):
        separate(a, b, s, (0, 0))


def test_theorem_single_tuple():
    g = interpolate_pol_s([(((0, 0), (1, 1)), (1, 3))], W)
    f, cert = theorem_interpolation(g, [((0, 0), (1, 1))], [identity_op(W, 2)])
    assert f((0, 0), (1, 1)) == (1, 3)
    assert cert.separators == []


def test_theorem_two_tuples_offset_one():
    wit = [bump_op(2, W, 2)]
    a1 = ((0, 0), (1, 2))
    a2 = shift_tuple(a1, 1)
    g = WindowedOp(2, {a1: (0, 5), a2: (1, -1)}, W)
    assert pol_sn_member(g, 2)
    f, cert = theorem_interpolation(g, [a1, a2], wit)
    assert f(*a1) == (0, 5) and f(*a2) == (1, -1)
    assert pol_sn_member(cert.h, 1)
    assert all(parallel_offset(x, y) is None
               for i, x in enumerate(cert.extended) for y in cert.extended[i + 1:])


def test_theorem_preconditions():
    wit = [bump_op(2, W, 1)]
    with pytest.raises(PreconditionError):
        # period 3 is not a multiple of the witnesses' n* = 2
        theorem_interpolation(bump_op(3, W, 1), [((0, 0),)], wit)
    a = ((0, 0),)
    g = identity_op(W, 1)
    with pytest.raises(PreconditionError):
        theorem_interpolation(g, [a, shift_tuple(a, 2)], wit)
