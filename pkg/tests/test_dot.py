import pytest

from cloneforge.dot import OrderError, cover_pairs, emit_lattice_dot


def divides(a, b):
    return b % a == 0


def test_divisors_of_12():
    nodes = [1, 2, 3, 4, 6, 12]
    assert cover_pairs(nodes, divides) == [(0, 1), (0, 2), (1, 3), (1, 4), (2, 4), (3, 5), (4, 5)]
    dot = emit_lattice_dot(nodes, divides, "d12")
    assert dot.count("[label=") == 6 and dot.count("->") == 7
    assert dot == emit_lattice_dot(nodes, divides, "d12")


def test_single_node():
    dot = emit_lattice_dot(["x"], lambda a, b: True)
    assert dot.count("[label=") == 1 and "->" not in dot


def test_rejects_preorders():
    with pytest.raises(OrderError):
        cover_pairs([0, 1], lambda a, b: True)
    with pytest.raises(OrderError):
        cover_pairs([0, 1], lambda a, b: a < b)


def test_labels_are_quoted():
    assert 'label="a\\"b"' in emit_lattice_dot(['a"b'], lambda a, b: True)
