"""LP relaxations over 1-independent measures on small grid graphs.

Variables are ``x_S``, the probability that the open edge set is exactly
``S``.  Writing ``y_S`` for the probability that every edge of ``S`` is open,
``y_S = sum_{T >= S} x_T``; the constraints are ``y_empty = 1`` and
``y_{S+e} = p_e * y_S`` whenever ``e`` shares no vertex with any edge of ``S``.
The ``y`` variables are substituted away, leaving ``2^|E|`` nonnegative ``x``.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np
import scipy.sparse as sp

from .grid import (
    CROSS,
    SmallGridGraph,
    build_hypercube,
    build_rectangle_4x2,
    connected_indicator,
    good_pair_indicators,
)
from .lp import (
    CertifiedMinimum,
    LinearProgramSpec,
    as_fraction,
    ceil_places,
    certified_minimum,
    floor_places,
)

MAX_LP_EDGES = 12


def _prob(x) -> Fraction:
    f = as_fraction(x)
    if not 0 <= f <= 1:
        raise ValueError(f"probability out of range: {x}")
    return f


@dataclass(frozen=True)
class TwoProbability:
    """Edge probabilities: ``p`` inside a 2x2 square, ``p_prime`` across squares."""

    p: Fraction
    p_prime: Fraction

    def __init__(self, p, p_prime=None):
        object.__setattr__(self, "p", _prob(p))
        object.__setattr__(self, "p_prime", _prob(p if p_prime is None else p_prime))

    def minimum(self) -> Fraction:
        return min(self.p, self.p_prime)


@dataclass(frozen=True)
class MixtureWeights:
    theta: Fraction
    weights: tuple[Fraction, Fraction, Fraction, Fraction]

    def __post_init__(self):
        if sum(self.weights) != 1 or min(self.weights) < 0:
            raise ValueError("mixture weights must be nonnegative and sum to 1")

    @classmethod
    def intra(cls, theta) -> "MixtureWeights":
        t = _prob(theta)
        return cls(t, ((1 - t) ** 2, t * (1 - t), t * (1 - t), t * t))

    @classmethod
    def cross(cls, theta) -> "MixtureWeights":
        t = _prob(theta)
        return cls(t, (t * t, t * (1 - t), t * (1 - t), (1 - t) ** 2))


@lru_cache(maxsize=None)
def _chain_structure(g: SmallGridGraph):
    """Sparsity pattern of the substituted constraint rows.

    Returns ``(row, col, edge, inside)`` arrays: entry ``k`` sits in row
    ``row[k]``, column ``col[k]``, belongs to the constraint adding edge
    ``edge[k]`` and ``inside[k]`` says whether that edge is in the column's set.
    Row 0 is ``y_empty = 1`` and has ``edge = -1``.
    """
    m = g.n_edges
    n = 1 << m
    masks = np.arange(n, dtype=np.int64)
    vmask = g.edge_vertex_masks()
    rows, cols, edges, inside = [np.zeros(n, np.int64)], [masks], [np.full(n, -1)], [np.ones(n, bool)]
    r = 1
    for s in range(n):
        touched = 0
        for i in range(m):
            if s >> i & 1:
                touched |= vmask[i]
        sup = None
        for i in range(m):
            if s >> i & 1 or vmask[i] & touched:
                continue
            if sup is None:
                sup = masks[(masks & s) == s]
            rows.append(np.full(len(sup), r, np.int64))
            cols.append(sup)
            edges.append(np.full(len(sup), i))
            inside.append((sup >> i & 1).astype(bool))
            r += 1
    return (
        np.concatenate(rows),
        np.concatenate(cols),
        np.concatenate(edges),
        np.concatenate(inside),
        r,
    )


def build_chain_lp(
    g: SmallGridGraph,
    edge_probs,
    objective,
    mass_bound=1,
) -> LinearProgramSpec:
    """Relaxation LP on ``g`` with per-edge probabilities and an exact objective."""
    if g.n_edges > MAX_LP_EDGES:
        raise ValueError(f"graph has {g.n_edges} edges; LP relaxation supports at most {MAX_LP_EDGES}")
    probs = [_prob(p) for p in edge_probs]
    if len(probs) != g.n_edges:
        raise ValueError("one probability per edge required")
    den = math.lcm(*(p.denominator for p in probs))
    if den >= 1 << 40:
        raise ValueError("probability denominators too large for exact integer rows")
    num = np.array([int(p * den) for p in probs] + [0], dtype=np.int64)
    row, col, edge, inside = _chain_structure(g)[:4]
    n_rows = _chain_structure(g)[4]
    # y_empty row: every coefficient is 1, i.e. den/den.
    vals = np.where(inside, den, 0) - num[edge]
    mat = sp.csr_matrix((vals, (row, col)), shape=(n_rows, 1 << g.n_edges), dtype=np.int64)
    rhs = (Fraction(1),) + (Fraction(0),) * (n_rows - 1)
    return LinearProgramSpec(
        objective=tuple(objective),
        matrix=mat,
        denominator=den,
        rhs=rhs,
        mass_bound=None if mass_bound is None else as_fraction(mass_bound),
    )


def product_measure(g: SmallGridGraph, edge_probs) -> np.ndarray:
    """The independent measure ``x_S`` as floats, a feasible point of every chain LP."""
    probs = np.array([float(p) for p in edge_probs])
    masks = np.arange(1 << g.n_edges)
    x = np.ones(len(masks))
    for i, p in enumerate(probs):
        x *= np.where(masks >> i & 1, p, 1 - p)
    return x


def build_connectivity_lp(g: SmallGridGraph, p) -> LinearProgramSpec:
    p = _prob(p)
    if g.n_edges > MAX_LP_EDGES:
        raise ValueError(f"graph has {g.n_edges} edges; LP relaxation supports at most {MAX_LP_EDGES}")
    ind = connected_indicator(g)
    obj = [Fraction(int(v)) for v in ind]
    return build_chain_lp(g, [p] * g.n_edges, obj)


def _prob_floor(res: CertifiedMinimum) -> Fraction:
    # Probabilities are nonnegative, so a bound of -1e-13 is as good as 0.
    return max(Fraction(0), res.floor())


def min_connect_prob(g: SmallGridGraph, p) -> CertifiedMinimum:
    """Certified minimum probability that the open edges connect ``g``."""
    return certified_minimum(build_connectivity_lp(g, p))


def _rect_probs(g: SmallGridGraph, tp: TwoProbability) -> list[Fraction]:
    return [tp.p_prime if lab == CROSS else tp.p for lab in g.edge_labels]


def _weighted_objective(ind: np.ndarray, weights: MixtureWeights) -> list[Fraction]:
    # ind has shape (4, n); only 16 distinct columns occur.
    codes = (ind[0] + 2 * ind[1] + 4 * ind[2] + 8 * ind[3]).astype(int)
    table = [
        sum((w for k, w in enumerate(weights.weights) if c >> k & 1), Fraction(0))
        for c in range(16)
    ]
    return [table[c] for c in codes]


def build_renorm_lp(tp_probs: TwoProbability, weights: MixtureWeights) -> LinearProgramSpec:
    g = build_rectangle_4x2()
    obj = _weighted_objective(good_pair_indicators(g), weights)
    return build_chain_lp(g, _rect_probs(g, tp_probs), obj)


MIDDLE_EDGE = ((1, 0), (1, 1))


def build_origin_lp(tp_probs: TwoProbability, theta) -> LinearProgramSpec:
    """Intra-weighted LP whose events are evaluated with the middle edge forced open."""
    g = build_rectangle_4x2()
    mid = 1 << g.edge_index(*MIDDLE_EDGE)
    forced = np.arange(1 << g.n_edges) | mid
    ind = good_pair_indicators(g)[:, forced]
    obj = _weighted_objective(ind, MixtureWeights.intra(theta))
    return build_chain_lp(g, _rect_probs(g, tp_probs), obj)


@dataclass(frozen=True, eq=False)
class StepResult:
    next: TwoProbability
    intra: CertifiedMinimum
    cross: CertifiedMinimum

    def certificate_hash(self) -> str:
        h = hashlib.sha256()
        h.update(self.intra.certificate.dumps().encode())
        h.update(self.cross.certificate.dumps().encode())
        return h.hexdigest()


def solve_renorm(tp: TwoProbability, theta) -> StepResult:
    """Both weighted LPs of one renormalisation step, with certificates."""
    a = certified_minimum(build_renorm_lp(tp, MixtureWeights.intra(theta)))
    b = certified_minimum(build_renorm_lp(tp, MixtureWeights.cross(theta)))
    return StepResult(TwoProbability(_prob_floor(a), _prob_floor(b)), a, b)


def renorm_step(tp: TwoProbability, theta) -> TwoProbability:
    """Next (p, p') pair, each truncated down to 6 decimals."""
    return solve_renorm(tp, theta).next


def origin_step_certified(tp: TwoProbability, theta) -> tuple[Fraction, CertifiedMinimum]:
    res = certified_minimum(build_origin_lp(tp, theta))
    return min(Fraction(1), ceil_places(1 - res.exact_bound)), res


def origin_step(tp: TwoProbability, theta) -> Fraction:
    """Upper bound on the failure probability of the middle-edge event, rounded up."""
    return origin_step_certified(tp, theta)[0]


@dataclass(frozen=True)
class Q6Bound:
    p: Fraction
    P0: Fraction
    p_second: Fraction | None
    P1: Fraction | None
    P: Fraction
    threshold: float
    passes: bool
    collapsed: bool = False

    def to_json(self) -> dict:
        f = lambda v: None if v is None else float(v)  # noqa: E731
        return {
            "p": f(self.p),
            "P0": f(self.P0),
            "p_second": f(self.p_second),
            "P1": f(self.P1),
            "P": f(self.P),
            "threshold": self.threshold,
            "passes": self.passes,
            "collapsed": self.collapsed,
        }


def q6_connectivity_bound(p, p_second=None) -> Q6Bound:
    """Two-level chain bounding the connection probability of Q_6 from Q_3 LPs.

    ``p_second`` defaults to ``1 - (1-p)^8 / P0^2`` truncated to 4 decimals.
    """
    from .cascades import golden_threshold

    p = _prob(p)
    q3 = build_hypercube(3)
    thr = golden_threshold(p, 6)
    P0 = _prob_floor(min_connect_prob(q3, p))
    limit = None if P0 == 0 else 1 - (1 - p) ** 8 / P0**2
    if limit is None or limit <= 0:
        return Q6Bound(p, P0, None, None, Fraction(0), float(thr), False, collapsed=True)
    if p_second is None:
        p_second = floor_places(limit, 4)
    else:
        p_second = _prob(p_second)
        if p_second > limit:
            raise ValueError("p_second exceeds the admissible bound")
    P1 = _prob_floor(min_connect_prob(q3, p_second))
    P = P0**8 * P1
    with mpmath.workdps(60):
        passes = bool(mpmath.mpf(P.numerator) / P.denominator > thr)
    return Q6Bound(p, P0, p_second, P1, P, float(thr), passes)
