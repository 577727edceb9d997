"""Hasse diagrams in Graphviz DOT."""
from __future__ import annotations

from typing import Callable, Hashable, Sequence


class OrderError(ValueError):
    pass


def cover_pairs(nodes: Sequence[Hashable], leq: Callable[[Hashable, Hashable], bool]) -> list[tuple[int, int]]:
    """Index pairs ``(i, j)`` with ``nodes[i]`` covered by ``nodes[j]``."""
    n = len(nodes)
    rel = [[bool(leq(a, b)) for b in nodes] for a in nodes]
    for i in range(n):
        if not rel[i][i]:
            raise OrderError(f"order is not reflexive at {nodes[i]!r}")
        for j in range(i + 1, n):
            if rel[i][j] and rel[j][i]:
                raise OrderError(f"order is not antisymmetric: {nodes[i]!r}, {nodes[j]!r}")
    covers = []
    for i in range(n):
        for j in range(n):
            if i == j or not rel[i][j]:
                continue
            if not any(rel[i][k] and rel[k][j] for k in range(n) if k not in (i, j)):
                covers.append((i, j))
    return covers


def _quote(s) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def emit_lattice_dot(nodes: Sequence[Hashable], leq: Callable[[Hashable, Hashable], bool],
                     name: str = "lattice") -> str:
    covers = cover_pairs(nodes, leq)
    lines = [f"digraph {_quote(name)} {{", "  rankdir=BT;", "  node [shape=plaintext];"]
    for i, a in enumerate(nodes):
        lines.append(f"  n{i} [label={_quote(a)}];")
    for i, j in covers:
        lines.append(f"  n{i} -> n{j} [arrowhead=none];")
    lines.append("}")
    return "\n".join(lines) + "\n"
