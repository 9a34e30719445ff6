"""Small grid graphs and exhaustive edge-subset classification.

Every graph here has at most 32 edges (enough for Q_4) so that a set of open
edges fits in a single machine word.  Bit ``i`` of a mask refers to ``graph.edges[i]``;
edges are ordered lexicographically on (smaller endpoint, larger endpoint)
coordinates, so mask indices are reproducible across runs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

MAX_EDGES = 32

INTRA = "intra_square"
CROSS = "cross_square"
PLAIN = "plain"

Coord = tuple[int, ...]


@dataclass(frozen=True)
class SmallGridGraph:
    """A finite simple graph on integer lattice points."""

    vertices: tuple[Coord, ...]
    edges: tuple[tuple[int, int], ...]
    edge_labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.edges) > MAX_EDGES:
            raise ValueError(f"{len(self.edges)} edges; at most {MAX_EDGES} supported")
        if len(set(self.edges)) != len(self.edges):
            raise ValueError("duplicate edges")
        if len(self.edge_labels) != len(self.edges):
            raise ValueError("one label per edge required")
        for u, v in self.edges:
            if not 0 <= u < v < len(self.vertices):
                raise ValueError(f"bad edge ({u}, {v})")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def full_mask(self) -> int:
        return (1 << self.n_edges) - 1

    def index(self, coord: Sequence[int]) -> int:
        return self.vertices.index(tuple(coord))

    def edge_index(self, a: Sequence[int], b: Sequence[int]) -> int:
        i, j = sorted((self.index(a), self.index(b)))
        return self.edges.index((i, j))

    def edge_coords(self, i: int) -> tuple[Coord, Coord]:
        u, v = self.edges[i]
        return self.vertices[u], self.vertices[v]

    def edge_vertex_masks(self) -> tuple[int, ...]:
        """Per edge, the bitmask of its two endpoints over vertex indices."""
        return tuple((1 << u) | (1 << v) for u, v in self.edges)

    def degrees(self) -> tuple[int, ...]:
        deg = [0] * self.n_vertices
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return tuple(deg)

    def mask_of(self, pairs: Iterable[tuple[Sequence[int], Sequence[int]]]) -> int:
        mask = 0
        for a, b in pairs:
            mask |= 1 << self.edge_index(a, b)
        return mask


@dataclass(frozen=True)
class EdgeSubset:
    """A set of edges of some :class:`SmallGridGraph`, stored as a bitmask."""

    mask: int

    def __post_init__(self):
        if self.mask < 0 or self.mask >> MAX_EDGES:
            raise ValueError("mask out of range")

    def __index__(self) -> int:
        return self.mask

    def __contains__(self, i: int) -> bool:
        return bool(self.mask >> i & 1)

    def __iter__(self) -> Iterator[int]:
        m, i = self.mask, 0
        while m:
            if m & 1:
                yield i
            m >>= 1
            i += 1

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def valid_for(self, g: SmallGridGraph) -> bool:
        return self.mask >> g.n_edges == 0


@dataclass(frozen=True)
class TargetPair:
    """Three-vertex targets in the left (``a``) and right (``b``) 2x2 squares."""

    a: frozenset[Coord]
    b: frozenset[Coord]

    def __post_init__(self):
        if len(self.a) != 3 or len(self.b) != 3:
            raise ValueError("targets must have exactly three vertices")
        if not self.a <= _square(0) or not self.b <= _square(1):
            raise ValueError("targets must lie in S_(0,0) and S_(1,0) respectively")


def _from_coords(vertices: Iterable[Coord], pairs: Iterable[tuple[Coord, Coord]], label) -> SmallGridGraph:
    verts = tuple(sorted(set(vertices)))
    pos = {v: i for i, v in enumerate(verts)}
    edges = sorted({tuple(sorted((pos[a], pos[b]))) for a, b in pairs})
    return SmallGridGraph(
        vertices=verts,
        edges=tuple(edges),
        edge_labels=tuple(label(verts[u], verts[v]) for u, v in edges),
    )


def build_hypercube(k: int) -> SmallGridGraph:
    """The hypercube Q_k on {0,1}^k, for 1 <= k <= 4."""
    if not isinstance(k, int) or not 1 <= k <= 4:
        raise ValueError("hypercube dimension must be an integer in [1, 4]")
    verts = list(itertools.product((0, 1), repeat=k))
    pairs = [
        (v, v[:i] + (1,) + v[i + 1:]) for v in verts for i in range(k) if v[i] == 0
    ]
    return _from_coords(verts, pairs, lambda a, b: PLAIN)


def build_rectangle(width: int, height: int, origin: tuple[int, int] = (0, 0)) -> SmallGridGraph:
    """Induced subgraph of Z^2 on ``origin + [0,width) x [0,height)``."""
    if width < 1 or height < 1:
        raise ValueError("rectangle must be non-empty")
    x0, y0 = origin
    verts = [(x0 + i, y0 + j) for i in range(width) for j in range(height)]
    vs = set(verts)
    pairs = [
        (v, w)
        for v in verts
        for w in ((v[0] + 1, v[1]), (v[0], v[1] + 1))
        if w in vs
    ]
    return _from_coords(verts, pairs, lambda a, b: PLAIN)


def _square(i: int) -> frozenset[Coord]:
    return frozenset((2 * i + r, s) for r in (0, 1) for s in (0, 1))


def _square_label(a: Coord, b: Coord) -> str:
    return INTRA if a[0] // 2 == b[0] // 2 else CROSS


def build_rectangle_4x2() -> SmallGridGraph:
    """The rectangle {0,1,2,3} x {0,1}: two 2x2 squares joined by two edges."""
    g = build_rectangle(4, 2)
    labels = tuple(_square_label(*g.edge_coords(i)) for i in range(g.n_edges))
    return SmallGridGraph(g.vertices, g.edges, labels)


def square_minus(i: int, r: int, s: int) -> frozenset[Coord]:
    """The 2x2 square S_(i,0) with the corner (2i+r, s) removed."""
    return _square(i) - {(2 * i + r, s)}


def config_target_pairs() -> tuple[TargetPair, TargetPair, TargetPair, TargetPair]:
    """Target pairs of the four relative configurations C0..C3."""
    left01, left10 = square_minus(0, 0, 1), square_minus(0, 1, 0)
    right11, right00 = square_minus(1, 1, 1), square_minus(1, 0, 0)
    return (
        TargetPair(left01, right11),
        TargetPair(left10, right11),
        TargetPair(left01, right00),
        TargetPair(left10, right00),
    )


def components(g: SmallGridGraph, s) -> list[frozenset[int]]:
    """Vertex-index components of the spanning subgraph with open edges ``s``."""
    mask = int(s)
    parent = list(range(g.n_vertices))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for i, (u, v) in enumerate(g.edges):
        if mask >> i & 1:
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
    groups: dict[int, set[int]] = {}
    for v in range(g.n_vertices):
        groups.setdefault(find(v), set()).add(v)
    return [frozenset(c) for c in groups.values()]


def is_connected_spanning(g: SmallGridGraph, s) -> bool:
    return len(components(g, s)) == 1


def _coord_components(g: SmallGridGraph, s) -> list[set[Coord]]:
    return [{g.vertices[v] for v in c} for c in components(g, s)]


def good_pair_event(g: SmallGridGraph, s, tp: TargetPair) -> bool:
    """Some open component meets at least two vertices of each target."""
    return any(
        len(c & tp.a) >= 2 and len(c & tp.b) >= 2 for c in _coord_components(g, s)
    )


def three_of_four_event(g: SmallGridGraph, s) -> bool:
    """Some open component meets at least three vertices of each 2x2 square."""
    left, right = _square(0), _square(1)
    return any(
        len(c & left) >= 3 and len(c & right) >= 3 for c in _coord_components(g, s)
    )


# The ten closed-edge pairs, at least one of which must be fully closed when
# the three-of-four event fails.
TEN_PATTERNS: tuple[tuple[tuple[Coord, Coord], tuple[Coord, Coord]], ...] = (
    (((0, 0), (0, 1)), ((1, 0), (1, 1))),
    (((1, 0), (1, 1)), ((2, 0), (2, 1))),
    (((2, 0), (2, 1)), ((3, 0), (3, 1))),
    (((0, 0), (1, 0)), ((0, 1), (1, 1))),
    (((1, 0), (2, 0)), ((1, 1), (2, 1))),
    (((2, 0), (3, 0)), ((2, 1), (3, 1))),
    (((0, 0), (1, 0)), ((1, 1), (2, 1))),
    (((2, 0), (3, 0)), ((1, 1), (2, 1))),
    (((1, 0), (2, 0)), ((0, 1), (1, 1))),
    (((1, 0), (2, 0)), ((2, 1), (3, 1))),
)


def ten_pattern_masks(g: SmallGridGraph | None = None) -> tuple[int, ...]:
    g = g or build_rectangle_4x2()
    return tuple(g.mask_of(pat) for pat in TEN_PATTERNS)


def verify_ten_pattern_cover() -> bool:
    """Exhaustively check the ten-pattern cover over all 1024 edge subsets."""
    g = build_rectangle_4x2()
    patterns = ten_pattern_masks(g)
    for s in range(1 << g.n_edges):
        if three_of_four_event(g, s):
            continue
        if not any(s & pat == 0 for pat in patterns):
            return False
    return True


def reflect_rectangle_mask(g: SmallGridGraph, s) -> int:
    """Image of an edge set of the 4x2 rectangle under x -> 3 - x."""
    mask = int(s)
    out = 0
    for i in range(g.n_edges):
        if mask >> i & 1:
            a, b = g.edge_coords(i)
            out |= 1 << g.edge_index((3 - a[0], a[1]), (3 - b[0], b[1]))
    return out


def reflect_target_pair(tp: TargetPair) -> TargetPair:
    flip = lambda c: (3 - c[0], c[1])  # noqa: E731
    return TargetPair(frozenset(map(flip, tp.b)), frozenset(map(flip, tp.a)))


@lru_cache(maxsize=None)
def _indicator_table(kind: str, g: SmallGridGraph) -> np.ndarray:
    n = 1 << g.n_edges
    if kind == "connected":
        return np.fromiter((is_connected_spanning(g, s) for s in range(n)), bool, n)
    if kind == "three_of_four":
        return np.fromiter((three_of_four_event(g, s) for s in range(n)), bool, n)
    raise KeyError(kind)


def connected_indicator(g: SmallGridGraph) -> np.ndarray:
    """Boolean vector over all 2^|E| masks: open edges connect every vertex."""
    return _indicator_table("connected", g)


@lru_cache(maxsize=None)
def _pair_table(g: SmallGridGraph, tp: TargetPair) -> np.ndarray:
    n = 1 << g.n_edges
    return np.fromiter((good_pair_event(g, s, tp) for s in range(n)), bool, n)


def good_pair_indicators(g: SmallGridGraph | None = None) -> np.ndarray:
    """Array of shape (4, 2^|E|); row i is the event of configuration C_i."""
    g = g or build_rectangle_4x2()
    return np.stack([_pair_table(g, tp) for tp in config_target_pairs()])


def enumeration_fixture() -> dict:
    """Subset counts per event class, for regression checks."""
    q3 = build_hypercube(3)
    rect = build_rectangle_4x2()
    pairs = good_pair_indicators(rect)
    return {
        "Q3_connected_spanning": int(connected_indicator(q3).sum()),
        "Q2_connected_spanning": int(connected_indicator(build_hypercube(2)).sum()),
        "rect_three_of_four": int(_indicator_table("three_of_four", rect).sum()),
        "rect_good_pair": [int(row.sum()) for row in pairs],
    }
