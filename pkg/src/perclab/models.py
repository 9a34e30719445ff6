"""Explicit 1-independent bond models on Z^2 driven by i.i.d. site labels.

Three constructions are supported:

``signs``      each site is ``+`` with probability theta; an edge is open
               iff its endpoints carry the same sign.
``direction``  labels U, R (theta/2 each) and D, L ((1-theta)/2 each); an
               edge is open iff the labels agree or one endpoint points
               along the edge towards the other.
``udlra``      only even sites (x + y even) carry a label: A with
               probability 1-p, otherwise U, D, L or R uniformly.  An edge
               is open iff its even endpoint is A or points along it.

Every edge state is a function of its two endpoint labels, so edges with
no common vertex are independent.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .grid import SmallGridGraph, build_rectangle

KINDS = ("udlra", "direction", "signs")

# Label codes; a site's code is the number of draw thresholds at or below it.
PLUS, MINUS = 0, 1
DIR_U, DIR_R, DIR_D, DIR_L = 0, 1, 2, 3
UD_A, UD_U, UD_D, UD_L, UD_R = 0, 1, 2, 3, 4

KIND_CODE = {"signs": 0, "direction": 1, "udlra": 2}
N_STATES = {"signs": 2, "direction": 4, "udlra": 5}
STATE_NAMES = {
    "signs": ("+", "-"),
    "direction": ("U", "R", "D", "L"),
    "udlra": ("A", "U", "D", "L", "R"),
}

DRAW_BITS = 32
MAX_CONFIGS = 1 << 22


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    parameter: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}; expected one of {KINDS}")
        if not 0.0 <= self.parameter <= 1.0:
            raise ValueError("model parameter must lie in [0, 1]")

    @classmethod
    def parse(cls, text: str) -> "ModelSpec":
        """Parse ``kind:parameter``, e.g. ``direction:0.3013``."""
        kind, sep, value = text.partition(":")
        if not sep:
            raise ValueError("model must be given as kind:parameter")
        return cls(kind.strip(), float(value))

    def __str__(self) -> str:
        return f"{self.kind}:{self.parameter}"

    def state_probs(self) -> np.ndarray:
        t = self.parameter
        if self.kind == "signs":
            return np.array([t, 1 - t])
        if self.kind == "direction":
            return np.array([t / 2, t / 2, (1 - t) / 2, (1 - t) / 2])
        return np.array([1 - t, t / 4, t / 4, t / 4, t / 4])

    def thresholds(self) -> np.ndarray:
        """Increasing 32-bit cut points mapping a uniform draw to a label code."""
        full = 1 << DRAW_BITS
        t = self.parameter
        if self.kind == "signs":
            cuts = [round(t * full)]
        elif self.kind == "direction":
            cuts = [round(t / 2 * full), round(t * full), round((t + (1 - t) / 2) * full)]
        else:
            a = round((1 - t) * full)
            span = full - a
            cuts = [a] + [a + -(-k * span // 4) for k in (1, 2, 3)]
        return np.array(cuts, dtype=np.uint64)


def parse_model(text: str) -> ModelSpec:
    return ModelSpec.parse(text)


def edge_probability(spec: ModelSpec) -> float:
    t = spec.parameter
    if spec.kind == "udlra":
        return 1 - 0.75 * t
    if spec.kind == "direction":
        return 0.75 * (t * t - t + 1)
    return t * t + (1 - t) * (1 - t)


def theta_for_edge_prob(target_p: float) -> tuple[float, float] | None:
    """Both solutions of (3/4)(theta^2 - theta + 1) = target_p, or None."""
    disc = 16 * target_p / 3 - 3
    if target_p > 0.75 or disc < 0:
        return None
    root = math.sqrt(disc)
    return ((1 - root) / 2, (1 + root) / 2)


def dfh_bound(x: float) -> float:
    """x^2 + (1 - x)/2."""
    return x * x + (1 - x) / 2


def lower_bound_combination() -> dict:
    """Crossing point of 1 - 3x/4 and x^2 + (1-x)/2 on [0, 1]."""
    x = (math.sqrt(33) - 1) / 8
    return {
        "x_star": x,
        "value": (35 - 3 * math.sqrt(33)) / 32,
        "udlra_side": 1 - 0.75 * x,
        "dfh_side": dfh_bound(x),
    }


def edge_open(kind: str, a, b, horizontal: bool, a_even: bool):
    """Edge rule on label codes; ``a`` is the left/lower endpoint.

    Works elementwise on numpy arrays as well as on scalars.
    """
    if kind == "signs":
        return a == b
    if kind == "direction":
        if horizontal:
            return (a == b) | (a == DIR_R) | (b == DIR_L)
        return (a == b) | (a == DIR_U) | (b == DIR_D)
    if horizontal:
        return (a == UD_A) | (a == UD_R) if a_even else (b == UD_A) | (b == UD_L)
    return (a == UD_A) | (a == UD_U) if a_even else (b == UD_A) | (b == UD_D)


@dataclass(frozen=True)
class Window:
    """Sites ``[x0, x0 + width) x [y0, y0 + height)`` at absolute positions."""

    width: int
    height: int
    x0: int = 0
    y0: int = 0

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("window must be non-empty")

    @classmethod
    def parse(cls, text: str) -> "Window":
        w, _, h = text.lower().partition("x")
        return cls(int(w), int(h))

    def graph(self) -> SmallGridGraph:
        return build_rectangle(self.width, self.height, (self.x0, self.y0))

    def sites(self) -> list[tuple[int, int]]:
        return [(x, y) for y in range(self.y0, self.y0 + self.height) for x in range(self.x0, self.x0 + self.width)]


@dataclass(frozen=True, eq=False)
class WindowDistribution:
    window: Window
    graph: SmallGridGraph
    masks: np.ndarray  # distinct open-edge bitmasks
    probs: np.ndarray

    @property
    def support(self) -> dict[int, float]:
        return {int(m): float(p) for m, p in zip(self.masks, self.probs)}

    def total(self) -> float:
        return float(self.probs.sum())

    def marginals(self) -> np.ndarray:
        return np.array(
            [self.probs[(self.masks >> e) & 1 == 1].sum() for e in range(self.graph.n_edges)]
        )

    @classmethod
    def from_samples(cls, window: Window, graph: SmallGridGraph, masks, weights) -> "WindowDistribution":
        keys, inv = np.unique(np.asarray(masks, dtype=np.int64), return_inverse=True)
        probs = np.bincount(inv, weights=weights)
        keep = probs > 0
        return cls(window, graph, keys[keep], probs[keep])


def _carriers(spec: ModelSpec, window: Window) -> list[tuple[int, int]]:
    sites = window.sites()
    if spec.kind == "udlra":
        return [s for s in sites if (s[0] + s[1]) % 2 == 0]
    return sites


def _edge_masks(kind: str, g: SmallGridGraph, state_of, size: int) -> np.ndarray:
    out = np.zeros(size, dtype=np.int64)
    for e in range(g.n_edges):
        a, b = g.edge_coords(e)
        horizontal = a[1] == b[1]
        is_open = edge_open(kind, state_of(a), state_of(b), horizontal, (a[0] + a[1]) % 2 == 0)
        out |= np.asarray(is_open, dtype=np.int64) << e
    return out


def exact_window_distribution(spec: ModelSpec, window: Window) -> WindowDistribution:
    """Exact law of every edge with both endpoints in ``window``.

    Each edge depends only on its endpoint labels, so no sites outside the
    window are needed.
    """
    carriers = _carriers(spec, window)
    n = N_STATES[spec.kind]
    total = n ** len(carriers)
    if total > MAX_CONFIGS:
        raise ValueError(
            f"window {window.width}x{window.height} needs {total} label configurations; "
            f"limit is {MAX_CONFIGS}"
        )
    idx = np.arange(total, dtype=np.int64)
    probs = spec.state_probs()
    states = {}
    weight = np.ones(total)
    for c, site in enumerate(carriers):
        st = (idx // n**c) % n
        states[site] = st
        weight *= probs[st]
    zero = np.zeros(total, dtype=np.int64)
    masks = _edge_masks(spec.kind, window.graph(), lambda s: states.get(s, zero), total)
    return WindowDistribution.from_samples(window, window.graph(), masks, weight)


def column_coin_distribution(window: Window) -> WindowDistribution:
    """A 2-dependent fixture: all horizontal edges between columns x and x+1
    follow one fair coin; vertical edges are always open."""
    g = window.graph()
    cols = window.width - 1
    masks, weights = [], []
    for coins in itertools.product((0, 1), repeat=cols):
        m = 0
        for e in range(g.n_edges):
            a, b = g.edge_coords(e)
            if a[0] == b[0] or coins[a[0] - window.x0]:
                m |= 1 << e
        masks.append(m)
        weights.append(0.5**cols)
    return WindowDistribution.from_samples(window, g, masks, weights)


def _factorization_gap(dist: WindowDistribution, m1: int, m2: int) -> float:
    a = dist.masks & m1
    b = dist.masks & m2
    ka, ia = np.unique(a, return_inverse=True)
    kb, ib = np.unique(b, return_inverse=True)
    joint = np.zeros((len(ka), len(kb)))
    np.add.at(joint, (ia, ib), dist.probs)
    return float(np.abs(joint - np.outer(joint.sum(1), joint.sum(0))).max())


def one_independence_gap(dist: WindowDistribution) -> float:
    """Largest factorization error over all vertex bipartitions (V1, V \\ V1).

    Vertex-disjoint edge sets S1, S2 always sit inside the edge sets induced
    by some bipartition, so checking these joint laws covers every pair.
    """
    g = dist.graph
    nv = g.n_vertices
    worst = 0.0
    # The last vertex always lies in V2.
    for side in range(1 << (nv - 1)):
        m1 = m2 = 0
        for e, (u, v) in enumerate(g.edges):
            iu, iv = side >> u & 1, side >> v & 1
            if iu and iv:
                m1 |= 1 << e
            elif not iu and not iv:
                m2 |= 1 << e
        if m1 and m2:
            worst = max(worst, _factorization_gap(dist, m1, m2))
    return worst


def verify_distribution(dist: WindowDistribution, tol: float = 1e-12) -> bool:
    return one_independence_gap(dist) <= tol


def verify_one_independence(spec: ModelSpec, window: Window, tol: float = 1e-12) -> bool:
    return verify_distribution(exact_window_distribution(spec, window), tol)


def states_from_draws(spec: ModelSpec, draws) -> np.ndarray:
    """Label codes for 32-bit uniform draws."""
    draws = np.asarray(draws, dtype=np.uint64)
    return np.searchsorted(spec.thresholds(), draws, side="right").astype(np.uint8)


@dataclass(frozen=True, eq=False)
class WindowSample:
    """Open states of the edges inside a rectangle.

    ``horizontal[x, y]`` is the edge (x, y)-(x+1, y) and ``vertical[x, y]``
    the edge (x, y)-(x, y+1), in window-local coordinates.
    """

    horizontal: np.ndarray
    vertical: np.ndarray


def edges_from_states(spec: ModelSpec, states: np.ndarray, x0: int = 0, y0: int = 0) -> WindowSample:
    """Edges of a rectangle whose labels are ``states[x, y]``."""
    states = np.asarray(states)
    w, h = states.shape
    xs = np.arange(w)[:, None] + x0
    ys = np.arange(h)[None, :] + y0
    even = (xs + ys) % 2 == 0
    if spec.kind == "udlra":
        left, right = states[:-1, :], states[1:, :]
        ev = even[:-1, :]
        hor = np.where(ev, (left == UD_A) | (left == UD_R), (right == UD_A) | (right == UD_L))
        low, up = states[:, :-1], states[:, 1:]
        ev = even[:, :-1]
        ver = np.where(ev, (low == UD_A) | (low == UD_U), (up == UD_A) | (up == UD_D))
    else:
        hor = edge_open(spec.kind, states[:-1, :], states[1:, :], True, True)
        ver = edge_open(spec.kind, states[:, :-1], states[:, 1:], False, True)
    return WindowSample(np.asarray(hor, bool), np.asarray(ver, bool))


def sample_window(spec: ModelSpec, window: Window, stream: Iterable[int]) -> WindowSample:
    """Draw one label per site in row-major order (y outer, x inner)."""
    it: Iterator[int] = iter(stream)
    draws = np.empty((window.width, window.height), dtype=np.uint64)
    for y in range(window.height):
        for x in range(window.width):
            try:
                draws[x, y] = next(it)
            except StopIteration:
                raise ValueError("randomness stream exhausted") from None
    return edges_from_states(spec, states_from_draws(spec, draws), window.x0, window.y0)


def sample_masks(spec: ModelSpec, window: Window, rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` independent edge bitmasks for ``window``, ordered as its graph."""
    g = window.graph()
    draws = rng.integers(0, 1 << DRAW_BITS, size=(n, len(window.sites())), dtype=np.uint64)
    states = states_from_draws(spec, draws)
    col = {s: states[:, k] for k, s in enumerate(window.sites())}
    return _edge_masks(spec.kind, g, lambda s: col[s], n)
