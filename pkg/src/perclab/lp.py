"""Equality-form linear programs with exact dual certificates.

Problems have the shape ``minimise c.x  s.t.  A x = b,  x >= 0``.  The matrix
is stored exactly as integer numerators over a common denominator, so a dual
vector can be checked in rational arithmetic without trusting the solver.

Weak duality: for any ``y`` and feasible ``x``,
``c.x = b.y + (c - A^T y).x >= b.y + min(0, min_j r_j) * sum(x)``.
When the problem carries a ``mass_bound`` (an upper bound on ``sum(x)``,
e.g. 1 for probability distributions), a slightly dual-infeasible ``y``
still yields a provable bound.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

FEAS_TOL = 1e-9
# Candidate exact duals: the float dual snapped to a 2^-60 grid, and its
# best rational approximations with these denominator limits.
DUAL_SCALE_BITS = 60
DUAL_DENOMINATOR_LIMITS = (10**6, 10**9, 10**12)


class LpError(RuntimeError):
    """The solver failed or returned an answer that does not check out."""


def as_fraction(x) -> Fraction:
    """Exact rational for a user-supplied number, reading floats as decimals."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(repr(float(x)))


def floor_places(x: Fraction, places: int = 6) -> Fraction:
    scale = 10**places
    return Fraction(math.floor(x * scale), scale)


def ceil_places(x: Fraction, places: int = 6) -> Fraction:
    scale = 10**places
    return Fraction(math.ceil(x * scale), scale)


@dataclass(frozen=True, eq=False)
class LinearProgramSpec:
    """``min objective.x`` subject to ``(matrix / denominator) x = rhs``, ``x >= 0``."""

    objective: tuple[Fraction, ...]
    matrix: sp.csr_matrix  # integer numerators
    denominator: int
    rhs: tuple[Fraction, ...]
    mass_bound: Fraction | None = None

    def __post_init__(self):
        m, n = self.matrix.shape
        if len(self.objective) != n or len(self.rhs) != m:
            raise ValueError("dimension mismatch between objective, matrix and rhs")
        if self.denominator <= 0:
            raise ValueError("denominator must be positive")
        if not np.issubdtype(self.matrix.dtype, np.integer):
            raise ValueError("matrix must hold integer numerators")

    @classmethod
    def from_rows(
        cls,
        objective: Sequence,
        rows: Iterable[tuple[dict[int, object], object]],
        mass_bound=None,
    ) -> "LinearProgramSpec":
        """Build from ``(sparse_row, rhs)`` pairs with arbitrary exact coefficients."""
        rows = [({j: as_fraction(v) for j, v in r.items()}, as_fraction(b)) for r, b in rows]
        den = 1
        for r, _ in rows:
            for v in r.values():
                den = math.lcm(den, v.denominator)
        data, ri, ci = [], [], []
        for i, (r, _) in enumerate(rows):
            for j, v in sorted(r.items()):
                data.append(int(v * den))
                ri.append(i)
                ci.append(j)
        n = len(objective)
        mat = sp.csr_matrix(
            (np.array(data, dtype=np.int64), (ri, ci)), shape=(len(rows), n)
        )
        return cls(
            objective=tuple(as_fraction(c) for c in objective),
            matrix=mat,
            denominator=den,
            rhs=tuple(b for _, b in rows),
            mass_bound=None if mass_bound is None else as_fraction(mass_bound),
        )

    @property
    def n_vars(self) -> int:
        return self.matrix.shape[1]

    @property
    def n_constraints(self) -> int:
        return self.matrix.shape[0]

    def constraints(self) -> Iterable[tuple[dict[int, Fraction], Fraction]]:
        """Rows as ``({column: coefficient}, rhs)`` pairs."""
        csr = self.matrix
        for i in range(self.n_constraints):
            lo, hi = csr.indptr[i], csr.indptr[i + 1]
            row = {
                int(j): Fraction(int(v), self.denominator)
                for j, v in zip(csr.indices[lo:hi], csr.data[lo:hi])
            }
            yield row, self.rhs[i]

    def float_matrix(self) -> sp.csr_matrix:
        return (self.matrix.astype(np.float64) / self.denominator).tocsr()

    def float_objective(self) -> np.ndarray:
        return np.array([float(c) for c in self.objective])

    def float_rhs(self) -> np.ndarray:
        return np.array([float(b) for b in self.rhs])

    def residual(self, x: np.ndarray) -> float:
        """Max absolute violation of the equalities at the point ``x``."""
        if self.n_constraints == 0:
            return 0.0
        return float(np.max(np.abs(self.float_matrix() @ x - self.float_rhs())))

    def problem_hash(self) -> str:
        csr = self.matrix.tocsr()
        csr.sort_indices()
        h = hashlib.sha256()
        h.update(repr((self.denominator, self.mass_bound, csr.shape)).encode())
        h.update(",".join(f"{c.numerator}/{c.denominator}" for c in self.objective).encode())
        h.update(",".join(f"{b.numerator}/{b.denominator}" for b in self.rhs).encode())
        for arr in (csr.indptr, csr.indices, csr.data):
            h.update(np.ascontiguousarray(arr, dtype=np.int64).tobytes())
        return h.hexdigest()


@dataclass(frozen=True, eq=False)
class LpOutcome:
    status: str  # "optimal" | "infeasible" | "unbounded"
    primal: np.ndarray | None = None
    objective_value: float = math.nan
    dual: np.ndarray | None = None


@dataclass(frozen=True)
class BoundCertificate:
    dual: tuple[Fraction, ...]
    certified_bound: Fraction
    max_residual: float
    problem_hash: str = ""

    def to_json(self) -> dict:
        return {
            "problem_hash": self.problem_hash,
            "bound": float(self.certified_bound),
            "bound_exact": _frac_str(self.certified_bound),
            "dual_vector": [float(v) for v in self.dual],
            "dual_exact": [_frac_str(v) for v in self.dual],
            "residuals": {"dual_infeasibility": self.max_residual},
        }

    @classmethod
    def from_json(cls, record: dict) -> "BoundCertificate":
        exact = record.get("dual_exact")
        dual = [Fraction(v) for v in exact] if exact is not None else [Fraction(v) for v in record["dual_vector"]]
        return cls(
            dual=tuple(dual),
            certified_bound=Fraction(record["bound_exact"]),
            max_residual=float(record["residuals"]["dual_infeasibility"]),
            problem_hash=record.get("problem_hash", ""),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def _frac_str(v: Fraction) -> str:
    return f"{v.numerator}/{v.denominator}"


def minimize(lp: LinearProgramSpec) -> LpOutcome:
    """Solve with HiGHS and sanity-check the returned primal point."""
    res = linprog(
        lp.float_objective(),
        A_eq=lp.float_matrix() if lp.n_constraints else None,
        b_eq=lp.float_rhs() if lp.n_constraints else None,
        bounds=(0, None),
        method="highs",
        # Tighter than FEAS_TOL so the 1e-9 residual check holds near p = 1.
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status == 2:
        return LpOutcome("infeasible")
    if res.status == 3:
        return LpOutcome("unbounded")
    if res.status != 0:
        raise LpError(f"solver failed (status {res.status}): {res.message}")
    x = np.asarray(res.x)
    if x.min(initial=0.0) < -FEAS_TOL or lp.residual(x) > FEAS_TOL:
        raise LpError("solver returned an infeasible primal point")
    dual = (
        np.asarray(res.eqlin.marginals, dtype=float)
        if lp.n_constraints
        else np.zeros(0)
    )
    return LpOutcome("optimal", x, float(res.fun), dual)


def _candidates(y: np.ndarray) -> list[tuple[Fraction, ...]]:
    snapped = tuple(Fraction(round(math.ldexp(float(v), DUAL_SCALE_BITS)), 1 << DUAL_SCALE_BITS) for v in y)
    out = [snapped]
    for limit in DUAL_DENOMINATOR_LIMITS:
        cand = tuple(v.limit_denominator(limit) for v in snapped)
        if cand not in out:
            out.append(cand)
    return out


def _exact_reduced_costs(lp: LinearProgramSpec, dual: Sequence[Fraction]) -> list[Fraction]:
    """``c - A^T y`` exactly."""
    if len(dual) != lp.n_constraints:
        raise ValueError("dual vector length does not match the constraint count")
    common = math.lcm(*(v.denominator for v in dual)) if dual else 1
    nums = np.array([int(v * common) for v in dual], dtype=object)
    csc = lp.matrix.tocsc()
    csc.sort_indices()
    prods = csc.data.astype(object) * nums[csc.indices] if csc.nnz else np.zeros(0, object)
    scale = lp.denominator * common
    out = []
    for j in range(lp.n_vars):
        lo, hi = csc.indptr[j], csc.indptr[j + 1]
        s = sum(prods[lo:hi].tolist()) if hi > lo else 0
        out.append(lp.objective[j] - Fraction(s, scale))
    return out


def _exact_dual_objective(lp: LinearProgramSpec, dual: Sequence[Fraction]) -> Fraction:
    return sum((b * v for b, v in zip(lp.rhs, dual)), Fraction(0))


def _bound_from(lp: LinearProgramSpec, bound: Fraction, worst: Fraction) -> Fraction | None:
    if worst >= 0:
        return bound
    if lp.mass_bound is None:
        return None
    return bound + worst * lp.mass_bound


def certify(lp: LinearProgramSpec, dual) -> BoundCertificate:
    """Turn a floating dual into an exact one, keeping the best provable bound.

    Candidates are the dual snapped to a fine dyadic grid and its rational
    reconstructions; a candidate that is exactly dual feasible (or whose
    infeasibility the mass bound absorbs) and proves more wins.
    """
    y = np.asarray(dual, dtype=float)
    best = None
    for cand in _candidates(y):
        red = _exact_reduced_costs(lp, cand)
        worst = min(red, default=Fraction(0))
        bound = _exact_dual_objective(lp, cand)
        proved = _bound_from(lp, bound, worst)
        # Rank: provable first, then by proved value, then least infeasible.
        key = (proved is not None, proved if proved is not None else Fraction(0), worst)
        if best is None or key > best[0]:
            best = (key, cand, bound, worst)
    _, cand, bound, worst = best
    return BoundCertificate(
        dual=cand,
        certified_bound=bound,
        max_residual=float(max(Fraction(0), -worst)),
        problem_hash=lp.problem_hash(),
    )


def verify_lower_bound(lp: LinearProgramSpec, cert: BoundCertificate, tol: float = FEAS_TOL) -> bool:
    """Exact check: reduced costs are >= -tol and the bound equals rhs.y."""
    dual = [as_fraction(v) for v in cert.dual]
    if len(dual) != lp.n_constraints:
        raise ValueError("certificate dimension does not match the problem")
    if _exact_dual_objective(lp, dual) != cert.certified_bound:
        return False
    red = _exact_reduced_costs(lp, dual)
    return min(red, default=Fraction(0)) >= -as_fraction(tol)


def provable_bound(lp: LinearProgramSpec, cert: BoundCertificate) -> Fraction:
    """A lower bound on the LP minimum that holds exactly.

    Any negative reduced cost is charged against ``mass_bound``; without a
    mass bound the certificate must be exactly dual feasible.
    """
    dual = [as_fraction(v) for v in cert.dual]
    red = _exact_reduced_costs(lp, dual)
    out = _bound_from(lp, _exact_dual_objective(lp, dual), min(red, default=Fraction(0)))
    if out is None:
        raise LpError("certificate is dual infeasible and the problem has no mass bound")
    return out


@dataclass(frozen=True, eq=False)
class CertifiedMinimum:
    """Solver optimum together with an exactly checked lower bound."""

    objective_value: float
    exact_bound: Fraction
    certificate: BoundCertificate
    primal: np.ndarray = field(repr=False)

    def floor(self, places: int = 6) -> Fraction:
        return floor_places(self.exact_bound, places)


def certified_minimum(lp: LinearProgramSpec, tol: float = FEAS_TOL) -> CertifiedMinimum:
    """Solve, certify and verify; raise rather than return an unchecked value.

    With a mass bound the returned bound is exact; without one it is
    ``rhs.y``, valid up to ``tol * sum(x)`` as ``verify_lower_bound`` states.
    """
    out = minimize(lp)
    if out.status != "optimal":
        raise LpError(f"LP is {out.status}")
    cert = certify(lp, out.dual)
    if not verify_lower_bound(lp, cert, tol):
        raise LpError("dual certificate failed verification")
    bound = cert.certified_bound if lp.mass_bound is None else provable_bound(lp, cert)
    if bound > as_fraction(out.objective_value) + as_fraction(tol):
        raise LpError("certified bound exceeds the primal optimum")
    return CertifiedMinimum(out.objective_value, bound, cert, out.primal)
