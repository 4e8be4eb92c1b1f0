"""Stochastic-order and matrix-dominance predicates.

Covers likelihood-ratio and first-order dominance of probability vectors,
total positivity of order two, copositive dominance of transition matrices,
row-wise first-order dominance and single-crossing (Lehmann) precision of
observation matrices, the boundary-column consistency check, and the two
stochastic-factorization tests (a garbling factor on the right, a mixing
factor on the left).

Every predicate returns an :class:`OrderVerdict`; failed verdicts carry a
witness with the indices and values of the violated inequality.  Verdicts
whose computation rests on an LP can also come back undetermined
(``holds is None``) when the solver reports numerical failure.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from . import lp
from .model import Belief, belief_grid

PAIR_TOL = 1e-12
COPOSITIVE_MARGIN = 1e-9
FACTOR_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class OrderVerdict:
    """Outcome of an order predicate.

    ``holds`` is True/False, or None when an LP backend failed numerically.
    ``witness`` describes the violated inequality (present whenever holds is
    False); ``factor`` carries the stochastic factor found by the
    factorization tests.
    """

    holds: bool | None
    witness: dict | None = None
    factor: np.ndarray | None = None

    def __bool__(self) -> bool:
        return self.holds is True


@dataclass(frozen=True, eq=False)
class GammaMatrixSet:
    """The X-1 symmetrized difference matrices used by copositive dominance."""

    matrices: np.ndarray  # (X-1, X, X), each symmetric

    def __len__(self) -> int:
        return self.matrices.shape[0]

    def __getitem__(self, j) -> np.ndarray:
        return self.matrices[j]

    def __iter__(self):
        return iter(self.matrices)


def _vec(value, name="vector") -> np.ndarray:
    if isinstance(value, Belief):
        return value.probs
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    return arr


def _mat(value, name="matrix") -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional")
    return arr


def mlr_dominates(pi1, pi2, tol: float = PAIR_TOL) -> OrderVerdict:
    """Does pi1 dominate pi2 in the monotone likelihood ratio order?

    Holds iff pi1[i] * pi2[j] <= pi2[i] * pi1[j] for all i < j (within tol).
    """
    p1, p2 = _vec(pi1, "pi1"), _vec(pi2, "pi2")
    if p1.size != p2.size:
        raise ValueError("vectors must have equal length")
    lhs = np.outer(p1, p2)
    rhs = np.outer(p2, p1)
    gap = lhs - rhs
    gap[np.tril_indices(p1.size)] = -np.inf  # only i < j matters
    worst = gap.max()
    if worst <= tol:
        return OrderVerdict(holds=True)
    i, j = np.unravel_index(int(np.argmax(gap)), gap.shape)
    return OrderVerdict(holds=False, witness={
        "kind": "mlr", "i": int(i), "j": int(j),
        "lhs": float(lhs[i, j]), "rhs": float(rhs[i, j])})


def fosd_dominates(p1, p2, tol: float = PAIR_TOL) -> OrderVerdict:
    """First-order stochastic dominance: every upper tail of p1 weighs at
    least as much as the same tail of p2 (within tol)."""
    a, b = _vec(p1, "p1"), _vec(p2, "p2")
    if a.size != b.size:
        raise ValueError("vectors must have equal length")
    tail1 = np.cumsum(a[::-1])[::-1]
    tail2 = np.cumsum(b[::-1])[::-1]
    margins = tail1 - tail2
    j = int(np.argmin(margins))
    if margins[j] >= -tol:
        return OrderVerdict(holds=True)
    return OrderVerdict(holds=False, witness={
        "kind": "fosd", "j": j,
        "tail1": float(tail1[j]), "tail2": float(tail2[j])})


def is_tp2(matrix, tol: float = PAIR_TOL) -> OrderVerdict:
    """Total positivity of order two: all 2x2 minors nonnegative (within tol).

    Negative entries are rejected outright.
    """
    m = _mat(matrix, "matrix")
    if m.min() < -tol:
        raise ValueError(f"matrix has negative entry {m.min()}")
    n, cols = m.shape
    t1 = np.einsum("ij,kl->ikjl", m, m)
    t2 = np.einsum("il,kj->ikjl", m, m)
    minors = t1 - t2
    ii, kk = np.triu_indices(n, k=1)
    jj, ll = np.triu_indices(cols, k=1)
    if ii.size == 0 or jj.size == 0:
        return OrderVerdict(holds=True)
    sub = minors[ii[:, None], kk[:, None], jj[None, :], ll[None, :]]
    flat = int(np.argmin(sub))
    r, c = np.unravel_index(flat, sub.shape)
    worst = sub[r, c]
    if worst >= -tol:
        return OrderVerdict(holds=True)
    return OrderVerdict(holds=False, witness={
        "kind": "tp2_minor", "rows": (int(ii[r]), int(kk[r])),
        "cols": (int(jj[c]), int(ll[c])), "minor": float(worst)})


def gamma_matrices(p1, p2) -> GammaMatrixSet:
    """Symmetrized cross-difference matrices of two equally sized stochastic
    matrices: for each adjacent column pair (j, j+1),
    raw[m, n] = p1[m, j] * p2[n, j+1] - p1[m, j+1] * p2[n, j], symmetrized
    as (raw + raw') / 2."""
    a, b = _mat(p1, "p1"), _mat(p2, "p2")
    if a.shape != b.shape:
        raise ValueError("matrices must have equal shape")
    cols = a.shape[1]
    out = np.empty((cols - 1, a.shape[0], b.shape[0]))
    for j in range(cols - 1):
        raw = np.outer(a[:, j], b[:, j + 1]) - np.outer(a[:, j + 1], b[:, j])
        out[j] = 0.5 * (raw + raw.T)
    out.setflags(write=False)
    return GammaMatrixSet(matrices=out)


@lru_cache(maxsize=16)
def _copositivity_resolution(n: int) -> int:
    """Simplex-grid resolution for n x n copositivity: 1/200 up to n = 4,
    coarser above so the point count stays near two million."""
    if n <= 4:
        return 200
    from math import comb
    res = 200
    while res > 2 and comb(res + n - 1, n - 1) > 2_000_000:
        res -= 1
    return res


def _face_stationary_candidates(a: np.ndarray):
    """Stationary points of the quadratic form on every face of the simplex.

    Solving [[2A_F, 1], [1', 0]] [pi; lam] = [0; 1] on each support set F gives
    every candidate interior minimizer; infeasible or singular faces are
    skipped.  Used only to refine the grid minimum downward."""
    n = a.shape[0]
    for size in range(1, n + 1):
        for face in combinations(range(n), size):
            idx = np.array(face)
            sub = a[np.ix_(idx, idx)]
            system = np.zeros((size + 1, size + 1))
            system[:size, :size] = 2.0 * sub
            system[:size, size] = 1.0
            system[size, :size] = 1.0
            rhs = np.zeros(size + 1)
            rhs[size] = 1.0
            try:
                sol = np.linalg.solve(system, rhs)
            except np.linalg.LinAlgError:
                continue
            point_face = sol[:size]
            if point_face.min() < -1e-12:
                continue
            point = np.zeros(n)
            point[idx] = np.clip(point_face, 0.0, None)
            total = point.sum()
            if total <= 0:
                continue
            yield point / total


def is_copositive(matrix, margin: float = COPOSITIVE_MARGIN) -> OrderVerdict:
    """Is the quadratic form pi' A pi nonnegative over the whole belief simplex
    (within the verdict margin)?

    1x1 and 2x2 use the exact closed form; larger matrices use a dense
    barycentric grid refined with exact face-stationary points.
    """
    a = _mat(matrix, "matrix")
    n = a.shape[0]
    if a.shape[1] != n:
        raise ValueError("matrix must be square")
    if np.abs(a - a.T).max() > 1e-9:
        raise ValueError("matrix must be symmetric within 1e-9")
    a = 0.5 * (a + a.T)

    if n == 1:
        best_val, best_pt = float(a[0, 0]), np.array([1.0])
    elif n == 2:
        a11, a12, a22 = a[0, 0], a[0, 1], a[1, 1]
        candidates = [(float(a11), np.array([1.0, 0.0])),
                      (float(a22), np.array([0.0, 1.0]))]
        denom = a11 - 2.0 * a12 + a22
        if denom > 0.0:
            t = (a11 - a12) / denom
            if 0.0 < t < 1.0:
                value = (a11 * a22 - a12 * a12) / denom
                candidates.append((float(value), np.array([1.0 - t, t])))
        best_val, best_pt = min(candidates, key=lambda c: c[0])
    else:
        pts = belief_grid(n, _copositivity_resolution(n))
        form = np.einsum("ki,ij,kj->k", pts, a, pts)
        k = int(np.argmin(form))
        best_val, best_pt = float(form[k]), pts[k].copy()
        for cand in _face_stationary_candidates(a):
            value = float(cand @ a @ cand)
            if value < best_val:
                best_val, best_pt = value, cand

    if best_val >= -margin:
        return OrderVerdict(holds=True)
    return OrderVerdict(holds=False, witness={
        "kind": "copositivity", "point": tuple(float(v) for v in best_pt),
        "value": best_val})


def copositive_dominates(p1, p2, margin: float = COPOSITIVE_MARGIN) -> OrderVerdict:
    """Copositive dominance of transition matrices: every symmetrized
    cross-difference matrix of (p1, p2) must be copositive."""
    for j, gamma in enumerate(gamma_matrices(p1, p2)):
        verdict = is_copositive(gamma, margin=margin)
        if not verdict.holds:
            witness = dict(verdict.witness)
            witness["gamma_index"] = j
            return OrderVerdict(holds=False, witness=witness)
    return OrderVerdict(holds=True)


def check_a5(b1, b2, tol: float = PAIR_TOL) -> OrderVerdict:
    """Row-wise first-order dominance: every row of b2 dominates the matching
    row of b1, i.e. CDF(b1 row) >= CDF(b2 row) columnwise (within tol)."""
    m1, m2 = _mat(b1, "b1"), _mat(b2, "b2")
    if m1.shape != m2.shape:
        raise ValueError("matrices must have equal shape")
    gap = np.cumsum(m1, axis=1) - np.cumsum(m2, axis=1)
    i, j = np.unravel_index(int(np.argmin(gap)), gap.shape)
    if gap[i, j] >= -tol:
        return OrderVerdict(holds=True)
    return OrderVerdict(holds=False, witness={
        "kind": "row_dominance", "row": int(i), "col": int(j),
        "cdf1": float(np.cumsum(m1, axis=1)[i, j]),
        "cdf2": float(np.cumsum(m2, axis=1)[i, j])})


def lehmann_precision(b1, b2, tol: float = PAIR_TOL) -> OrderVerdict:
    """Single-crossing precision order: b2 is more precise than b1.

    For every pair of column cutoffs (j for b1, l for b2), the sequence
    d_i = CDF_b1[i, j] - CDF_b2[i, l] over rows i must never step from
    strictly positive to strictly negative; values within tol of zero are
    sign-neutral.
    """
    m1, m2 = _mat(b1, "b1"), _mat(b2, "b2")
    if m1.shape[0] != m2.shape[0]:
        raise ValueError("matrices must have the same number of rows")
    c1 = np.cumsum(m1, axis=1)
    c2 = np.cumsum(m2, axis=1)
    for j in range(m1.shape[1]):
        for l in range(m2.shape[1]):
            diffs = c1[:, j] - c2[:, l]
            seen_positive_at = None
            for i, d in enumerate(diffs):
                if d > tol:
                    seen_positive_at = i
                elif d < -tol and seen_positive_at is not None:
                    return OrderVerdict(holds=False, witness={
                        "kind": "sign_change", "col1": int(j), "col2": int(l),
                        "row_positive": int(seen_positive_at), "row_negative": int(i),
                        "value_positive": float(diffs[seen_positive_at]),
                        "value_negative": float(d)})
    return OrderVerdict(holds=True)


def check_a7(b1, b2, tol: float = PAIR_TOL) -> OrderVerdict:
    """Boundary-column consistency of an observation-matrix pair.

    With b1 in the less-informative role and b2 in the more-informative role,
    requires for every row i:
      first column:  b1[i, 0] * b2[X-1, 0]  <=  b2[i, 0] * b1[X-1, 0]   (+tol)
      last column:   b1[i, -1] * b2[X-1, -1] >= b2[i, -1] * b1[X-1, -1] (-tol)
    Products of zeros satisfy both sides.
    """
    m1, m2 = _mat(b1, "b1"), _mat(b2, "b2")
    if m1.shape != m2.shape:
        raise ValueError("matrices must have equal shape")
    last = m1.shape[0] - 1
    for i in range(m1.shape[0]):
        lhs = m1[i, 0] * m2[last, 0]
        rhs = m2[i, 0] * m1[last, 0]
        if lhs > rhs + tol:
            return OrderVerdict(holds=False, witness={
                "kind": "boundary_first_col", "row": int(i),
                "lhs": float(lhs), "rhs": float(rhs)})
        lhs = m1[i, -1] * m2[last, -1]
        rhs = m2[i, -1] * m1[last, -1]
        if lhs < rhs - tol:
            return OrderVerdict(holds=False, witness={
                "kind": "boundary_last_col", "row": int(i),
                "lhs": float(lhs), "rhs": float(rhs)})
    return OrderVerdict(holds=True)


def _solve_factor(product_rows: np.ndarray, product_rhs: np.ndarray,
                  shape: tuple[int, int], residual_of, feas_tol: float) -> OrderVerdict:
    """Feasibility core shared by the two factorization tests.

    Finds a row-stochastic matrix of the given shape (flattened row-major in
    the LP) whose product constraints are ``product_rows @ vec = product_rhs``;
    ``residual_of`` recomputes the unscaled defect for the post-check.
    """
    rows_f, cols_f = shape
    sum_rows = np.kron(np.eye(rows_f), np.ones((1, cols_f)))
    outcome = lp.lp_feasible(
        a_eq=np.vstack([product_rows, sum_rows]),
        b_eq=np.concatenate([product_rhs, np.ones(rows_f)]),
        feas_tol=feas_tol)
    if outcome.status == lp.INFEASIBLE:
        return OrderVerdict(holds=False, witness={
            "kind": "factorization_infeasible",
            "detail": f"no row-stochastic factor within residual {FACTOR_RESIDUAL_TOL}"})
    if outcome.status != lp.OPTIMAL:
        return OrderVerdict(holds=None, witness={"kind": "lp_numerical_failure"})
    factor = outcome.x.reshape(rows_f, cols_f).copy()
    residual = float(residual_of(factor))
    row_defect = float(np.abs(factor.sum(axis=1) - 1.0).max())
    if residual > FACTOR_RESIDUAL_TOL or row_defect > FACTOR_RESIDUAL_TOL:
        return OrderVerdict(holds=None, witness={
            "kind": "lp_numerical_failure", "residual": residual,
            "row_defect": row_defect})
    factor.setflags(write=False)
    return OrderVerdict(holds=True, factor=factor)


def blackwell_dominates(b_high, b_low,
                        feas_tol: float = FACTOR_RESIDUAL_TOL) -> OrderVerdict:
    """Is b_low a garbling of b_high?  Holds iff a row-stochastic L exists
    with b_high @ L = b_low (within the residual tolerance).

    Constraint rows are scaled by the max-norm of b_high before solving; the
    residual post-check runs on the unscaled system.
    """
    hi, lo = _mat(b_high, "b_high"), _mat(b_low, "b_low")
    if hi.shape[0] != lo.shape[0]:
        raise ValueError("matrices must have the same number of rows")
    scale = max(float(np.abs(hi).max()), 1e-12)
    return _solve_factor(
        product_rows=np.kron(hi / scale, np.eye(lo.shape[1])),
        product_rhs=(lo / scale).reshape(-1),
        shape=(hi.shape[1], lo.shape[1]),
        residual_of=lambda f: np.abs(hi @ f - lo).max(),
        feas_tol=feas_tol)


def reverse_factorization(b_low, b_high,
                          feas_tol: float = FACTOR_RESIDUAL_TOL) -> OrderVerdict:
    """Does a row-stochastic state-mixing factor M exist with
    M @ b_high = b_low (within the residual tolerance)?"""
    lo, hi = _mat(b_low, "b_low"), _mat(b_high, "b_high")
    if lo.shape != hi.shape:
        raise ValueError("matrices must have equal shape")
    scale = max(float(np.abs(hi).max()), 1e-12)
    return _solve_factor(
        product_rows=np.kron(np.eye(lo.shape[0]), hi.T / scale),
        product_rhs=(lo / scale).reshape(-1),
        shape=(lo.shape[0], hi.shape[0]),
        residual_of=lambda f: np.abs(f @ hi - lo).max(),
        feas_tol=feas_tol)
