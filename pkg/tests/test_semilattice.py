import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cloneforge.finops import OpTable, fix_set, identity, random_table, tuples
from cloneforge.semilattice import (
    Semilattice, SemilatticeError, boolean_lattice, canonical, chi, closure_order,
    con_lattice_dot, congruence_join, congruence_meet, congruence_orders, congruence_to_order,
    corpus, e_clone, e_interpolate, e_member, e_member_by_downsets, enumerate_congruences,
    interval_congruence_maps, is_compatible, is_congruence_order, lattice_m3, lattice_n5,
    order_of_unary_generators, order_to_congruence, random_semilattice, refines,
    set_partitions, set_to_congruence, unary_members,
)

CHAIN3 = Semilattice.chain(3)


def test_construction_checks():
    with pytest.raises(SemilatticeError):
        Semilattice.from_table([[0, 1], [0, 1]])  # not commutative
    with pytest.raises(SemilatticeError):
        Semilattice.from_table([[1, 1], [1, 0]])  # 0 is not least
    S = lattice_n5()
    assert S.size == 5 and S.leq[0].all()


def test_chain3_congruences():
    parts = list(set_partitions(3))
    assert len(parts) == 5
    ok = [p for p in parts if is_compatible(CHAIN3, p)]
    assert (0, 1, 0) not in ok
    assert sorted(enumerate_congruences(CHAIN3)) == sorted(ok)
    assert len(ok) == 4


def test_small_congruence_counts():
    assert enumerate_congruences(Semilattice.chain(1)) == [(0,)]
    assert len(enumerate_congruences(Semilattice.chain(2))) == 2
    with pytest.raises(ValueError):
        enumerate_congruences(Semilattice.chain(9))


@pytest.mark.parametrize("n", range(1, 7))
def test_chain_congruences_are_intervals(n):
    cons = enumerate_congruences(Semilattice.chain(n))
    assert len(cons) == 2 ** (n - 1)
    for p in cons:
        assert set_to_congruence(n, interval_congruence_maps(n, p)) == canonical(p)


def test_order_congruence_examples():
    S = lattice_m3()
    q = S.size
    assert order_to_congruence(S.leq) == tuple(range(q))
    assert order_to_congruence(np.ones((q, q), dtype=bool)) == (0,) * q


def test_bijection_on_corpus():
    for S in corpus(seed=7, max_size=5, random_count=10):
        for p in enumerate_congruences(S):
            R = congruence_to_order(S, p)
            assert is_congruence_order(S, R)
            assert order_to_congruence(R) == canonical(p)
            assert (congruence_to_order(S, order_to_congruence(R)) == R).all()


def brute_force_orders(S):
    """Every relation that is a congruence order, by checking all q^2-bit matrices."""
    q = S.size
    out = []
    free = [(i, j) for i in range(q) for j in range(q) if not S.leq[i, j]]
    for bits in itertools.product([False, True], repeat=len(free)):
        R = S.leq.copy()
        for (i, j), b in zip(free, bits):
            R[i, j] = b
        trans = all(not (R[x, y] and R[y, z]) or R[x, z]
                    for x in range(q) for y in range(q) for z in range(q))
        rule = all(not (R[x, z] and R[y, z]) or R[S.table[x, y], z]
                   for x in range(q) for y in range(q) for z in range(q))
        if trans and rule:
            out.append(R)
    return out


@pytest.mark.parametrize("S", [Semilattice.chain(3), Semilattice.chain(4), boolean_lattice(2),
                               lattice_m3()], ids=lambda S: S.name)
def test_congruence_orders_match_brute_force(S):
    want = {R.tobytes() for R in brute_force_orders(S)}
    got = {R.tobytes() for R in congruence_orders(S)}
    assert got == want


def test_chi_examples():
    assert chi(CHAIN3, 1, 1) == identity(3)
    assert list(chi(CHAIN3, 0, 2).values) == [0, 1, 0]
    assert fix_set(chi(CHAIN3, 0, 2)) == {0, 1}


def test_e_member_examples():
    for S in [CHAIN3, lattice_n5()]:
        for R in congruence_orders(S):
            assert e_member(S.join, S, R)
            for a, b in itertools.product(range(S.size), repeat=2):
                assert e_member(chi(S, a, b), S, R) == bool(R[a, b])
            for f in unary_members(S, R):
                assert all(R[f(x), x] for x in range(S.size))


def test_e_member_forms_agree(rng):
    for S in [CHAIN3, lattice_m3(), boolean_lattice(2)]:
        for R in congruence_orders(S):
            for _ in range(30):
                f = random_table(S.size, int(rng.integers(1, 3)), rng)
                assert e_member(f, S, R) == e_member_by_downsets(f, S, R)


def test_order_of_unary_generators():
    S = Semilattice.chain(4)
    assert (order_of_unary_generators(S, []) == S.leq).all()
    R = order_of_unary_generators(S, [chi(S, 3, 1)])
    assert R[3, 1] and is_congruence_order(S, R)
    # least: any congruence order with (3, 1) contains it
    for R2 in congruence_orders(S):
        if R2[3, 1]:
            assert (R <= R2).all()


def test_galois_unary_recovery():
    for S in [CHAIN3, lattice_m3(), lattice_n5()]:
        for R in congruence_orders(S):
            assert (order_of_unary_generators(S, unary_members(S, R)) == R).all()


def test_e_interpolate_examples(rng):
    S = lattice_n5()
    R = congruence_orders(S)[3]
    pts = [(1, 2), (3, 0), (4, 4)]
    res = e_interpolate(S, R, S.join, pts)
    assert res.verify()
    for p in pts:
        assert res.op(*p) == S.join(*p)
    one = e_interpolate(S, R, S.join, [(2, 3)])
    assert one.op(2, 3) == S.join(2, 3)


def test_e_interpolate_full_graph():
    S = CHAIN3
    R = congruence_orders(S)[-1]
    f = OpTable.from_function(3, 2, lambda a, b: 0 if a == b == 1 else max(a, b))
    assert e_member(f, S, R)
    res = e_interpolate(S, R, f, list(tuples(3, 2)))
    assert res.op == f
    assert all(e_member(g, S, R) for g in res.generators)


def test_e_interpolate_rejects_nonmember():
    f = OpTable.constant(3, 2, 2)
    with pytest.raises(SemilatticeError):
        e_interpolate(CHAIN3, CHAIN3.leq, f, [(0, 0)])


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_e_interpolate_property(seed):
    rng = np.random.default_rng(seed)
    S = random_semilattice(int(rng.integers(2, 6)), rng)
    orders = congruence_orders(S)
    R = orders[int(rng.integers(len(orders)))]
    pred = e_clone(S, R)
    f = pred.sample(2, rng)
    pts = sorted({tuple(int(v) for v in rng.integers(0, S.size, 2)) for _ in range(4)})
    res = e_interpolate(S, R, f, pts)
    assert res.verify()
    assert all(res.op(*p) == f(*p) for p in pts)
    assert e_member(res.op, S, R)


def test_interval_examples():
    assert interval_congruence_maps(4, (0, 0, 0, 0)) == frozenset()
    assert interval_congruence_maps(4, (0, 1, 1, 2)) == {0, 2}
    assert set_to_congruence(4, {0, 1, 2}) == (0, 1, 2, 3)
    with pytest.raises(ValueError):
        interval_congruence_maps(3, (0, 1, 0))


def test_interval_round_trips_n8():
    n = 8
    for cuts in itertools.chain.from_iterable(
            itertools.combinations(range(n - 1), r) for r in range(n)):
        assert interval_congruence_maps(n, set_to_congruence(n, cuts)) == frozenset(cuts)


def test_con_lattice_operations():
    S = lattice_m3()
    cons = enumerate_congruences(S)
    for p, r in itertools.product(cons, repeat=2):
        j = congruence_join(S, p, r)
        m = congruence_meet(p, r)
        assert j in cons and m in cons
        assert refines(p, j) and refines(r, j) and refines(m, p) and refines(m, r)


def test_con_dot_chain4():
    dot = con_lattice_dot(Semilattice.chain(4))
    assert dot.count("[label=") == 8
    assert dot.count("->") == 12


def test_closure_order_is_idempotent():
    S = boolean_lattice(2)
    for R in congruence_orders(S):
        assert (closure_order(S, R) == R).all()
