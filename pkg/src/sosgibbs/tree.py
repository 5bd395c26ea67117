"""Finite balls of the Cayley tree with edges oriented away from the root."""
from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass

__all__ = ["TreeBall", "build_ball", "path_sum"]


@dataclass(frozen=True)
class TreeBall:
    """Radius-``radius`` ball around the root of the order-``k`` Cayley tree.

    Vertices are numbered breadth-first, root = 0.  Every non-root vertex
    ``v`` owns exactly one oriented edge ``parent[v] -> v``; edges are
    identified by that child vertex and kept in canonical order
    ``edges[i] = (parent[i+1], i+1)``.
    """

    k: int
    radius: int
    parent: tuple[int, ...]
    depth: tuple[int, ...]
    children: tuple[tuple[int, ...], ...]

    @property
    def n_vertices(self) -> int:
        return len(self.parent)

    @property
    def n_edges(self) -> int:
        return len(self.parent) - 1

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple((self.parent[v], v) for v in range(1, self.n_vertices))

    @property
    def edge_ids(self) -> tuple[int, ...]:
        return tuple(range(1, self.n_vertices))

    def shell(self, n: int) -> tuple[int, ...]:
        return tuple(v for v, d in enumerate(self.depth) if d == n)

    @property
    def boundary(self) -> tuple[int, ...]:
        """The outer shell W_radius."""
        return self.shell(self.radius)

    @property
    def interior(self) -> tuple[int, ...]:
        return tuple(v for v, d in enumerate(self.depth) if d < self.radius)

    def edge_index(self, edge) -> int:
        """Position of ``edge`` (child id or ``(parent, child)``) in canonical order."""
        if isinstance(edge, tuple):
            p, v = edge
            if not (0 < v < self.n_vertices) or self.parent[v] != p:
                raise ValueError(f"edge {edge} is not in the ball")
        else:
            v = int(edge)
            if not 0 < v < self.n_vertices:
                raise ValueError(f"edge {edge} is not in the ball")
        return v - 1

    def path(self, y: int) -> list[int]:
        """Edges (child ids) on the root-to-``y`` path, root side first."""
        self._check_vertex(y)
        out = []
        while y != 0:
            out.append(y)
            y = self.parent[y]
        out.reverse()
        return out

    def _check_vertex(self, y: int) -> None:
        if not 0 <= y < self.n_vertices:
            raise ValueError(f"unknown vertex {y}")


def build_ball(k: int, radius: int) -> TreeBall:
    if int(k) != k or k < 2:
        raise ValueError(f"branching order must be an integer >= 2, got {k}")
    if int(radius) != radius or radius < 0:
        raise ValueError(f"radius must be a non-negative integer, got {radius}")
    k, radius = int(k), int(radius)
    parent = [-1]
    depth = [0]
    children: list[list[int]] = [[]]
    frontier = [0]
    for d in range(1, radius + 1):
        nxt = []
        for v in frontier:
            for _ in range(k + 1 if v == 0 else k):
                w = len(parent)
                parent.append(v)
                depth.append(d)
                children.append([])
                children[v].append(w)
                nxt.append(w)
        frontier = nxt
    return TreeBall(k, radius, tuple(parent), tuple(depth),
                    tuple(tuple(c) for c in children))


def path_sum(ball: TreeBall, y: int,
             zeta: Mapping[int, int] | Sequence[int]) -> int:
    """Sum of the increments along the root-to-``y`` path.

    ``zeta`` is either a mapping keyed by edge (child id) or a sequence in
    canonical edge order.
    """
    edges = ball.path(y)
    if isinstance(zeta, Mapping):
        return int(sum(zeta[e] for e in edges))
    if len(zeta) != ball.n_edges:
        raise ValueError("gradient assignment does not match the ball's edges")
    return int(sum(zeta[e - 1] for e in edges))
