import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cloneforge.finops import (
    Apply, ArityError, Gen, OpTable, Proj, TreeError, all_tables, compose, diagonal,
    evaluate_tree, fix_set, identity, nix_set, projection, random_table, substitute,
    tree_from_json, tree_to_json, tuple_index, tuples,
)


def table_strategy(max_base=3, max_arity=2):
    @st.composite
    def build(draw):
        q = draw(st.integers(1, max_base))
        k = draw(st.integers(1, max_arity))
        vals = draw(st.lists(st.integers(0, q - 1), min_size=q ** k, max_size=q ** k))
        return OpTable.from_values(q, k, vals)
    return build()


def test_projection_examples():
    assert list(projection(2, 1, 1).values) == [0, 1]
    assert list(projection(2, 2, 2).values) == [0, 1, 0, 1]
    p = projection(3, 2, 1)
    for a, b in itertools.product(range(3), repeat=2):
        assert p(a, b) == a


@pytest.mark.parametrize("i", [0, 3])
def test_projection_index_range(i):
    with pytest.raises(IndexError):
        projection(2, 2, i)


def test_row_major_indexing():
    assert list(tuples(2, 2)) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert tuple_index(3, (2, 1)) == 7
    f = OpTable.from_function(3, 2, lambda a, b: (a * 3 + b) % 3)
    assert f(2, 1) == 1


def test_bad_tables_rejected():
    with pytest.raises(ValueError):
        OpTable.from_values(2, 1, [0, 2])
    with pytest.raises(ValueError):
        OpTable.from_values(2, 2, [0, 1])
    with pytest.raises((ValueError, ArityError)):
        OpTable(2, 0, b"\x00")


def test_compose_examples():
    g = OpTable.from_values(2, 1, [1, 0])
    h = OpTable.from_values(2, 1, [1, 1])
    assert compose(projection(2, 2, 1), [g, h]) == g
    assert compose(identity(2), [g]) == g
    xor = OpTable.from_function(2, 2, lambda a, b: a ^ b)
    out = compose(xor, [g, h])
    for x in range(2):
        assert out(x) == (g(x) ^ h(x))


def test_compose_mismatch():
    with pytest.raises(ValueError):
        compose(projection(2, 2, 1), [identity(2)])
    with pytest.raises(ValueError):
        compose(identity(2), [identity(3)])
    with pytest.raises(ValueError):
        compose(projection(2, 2, 1), [identity(2), projection(2, 2, 1)])


def test_diagonal_examples():
    u = OpTable.from_values(3, 1, [2, 0, 1])
    assert diagonal(u) == u
    assert diagonal(projection(3, 3, 2)) == identity(3)
    assert diagonal(OpTable.from_function(3, 2, max)) == identity(3)


def test_fix_examples():
    assert fix_set(identity(3)) == {0, 1, 2}
    assert fix_set(OpTable.constant(3, 0)) == {0}
    # [1,1,2] fixes 1 as well as 2; only 0 moves
    f = OpTable.from_values(3, 1, [1, 1, 2])
    assert fix_set(f) == {1, 2} and nix_set(f) == {0}
    g = OpTable.from_values(3, 1, [1, 0, 2])
    assert fix_set(g) == {2} and nix_set(g) == {0, 1}


@given(table_strategy())
def test_identity_law(f):
    assert compose(f, [projection(f.base, f.arity, i + 1) for i in range(f.arity)]) == f


@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_diagonal_of_projections(q, n, data):
    i = data.draw(st.integers(1, n))
    assert diagonal(projection(q, n, i)) == identity(q)


@given(table_strategy())
def test_json_round_trip(f):
    assert OpTable.from_json(f.to_json()) == f
    assert f.to_json()["table"] == list(f.values)


@settings(max_examples=200)
@given(st.integers(1, 4), st.integers(1, 3), st.integers(1, 3), st.integers(0, 2 ** 32 - 1))
def test_fix_set_of_composition(q, k, n, seed):
    rng = np.random.default_rng(seed)
    f = random_table(q, k, rng)
    gs = [random_table(q, n, rng) for _ in range(k)]
    common = fix_set(f).intersection(*(fix_set(g) for g in gs))
    assert fix_set(compose(f, gs)) >= common


def _interpret(t, gens, x):
    # direct recursive evaluation at one point, no table composition
    if isinstance(t, Proj):
        return x[t.index - 1]
    if isinstance(t, Gen):
        return gens[t.index](*x)
    return gens[t.root](*(_interpret(c, gens, x) for c in t.children))


def _random_tree(rng, depth, gens, n):
    if depth == 0 or rng.random() < 0.2:
        return Proj(n, int(rng.integers(1, n + 1)))
    r = int(rng.integers(len(gens)))
    return Apply(r, tuple(_random_tree(rng, depth - 1, gens, n) for _ in range(gens[r].arity)))


def test_random_trees_match_interpreter(rng):
    for _ in range(50):
        gens = [random_table(2, int(rng.integers(1, 4)), rng) for _ in range(3)]
        n = int(rng.integers(1, 4))
        t = _random_tree(rng, 3, gens, n)
        f = evaluate_tree(t, gens)
        for x in tuples(2, n):
            assert f(*x) == _interpret(t, gens, x)
        assert tree_from_json(tree_to_json(t)) == t


def test_tree_leaves():
    mx = OpTable.from_function(2, 2, max)
    assert evaluate_tree(Proj(3, 2), [mx]) == projection(2, 3, 2)
    swapped = evaluate_tree(Apply(0, (Proj(3, 3), Proj(3, 1))), [mx])
    assert swapped == OpTable.from_function(2, 3, lambda a, b, c: max(c, a))
    assert evaluate_tree(substitute(Gen(0), [Proj(2, 2), Proj(2, 1)]), [mx]) == mx


def test_tree_errors():
    mx = OpTable.from_function(2, 2, max)
    with pytest.raises(TreeError):
        evaluate_tree(Gen(1), [mx])
    with pytest.raises(TreeError):
        evaluate_tree(Apply(0, (Proj(2, 1),)), [mx])
    with pytest.raises(TreeError):
        evaluate_tree(Apply(0, (Proj(2, 1), Proj(3, 1))), [mx])


def test_all_tables_count():
    assert sum(1 for _ in all_tables(2, 2)) == 16
