"""Assumption pipeline and empirical verification of the structural claims.

This module glues the order-theoretic predicates to solver output.  An
:func:`assumption_report` classifies a model against the full hypothesis
menu (monotone rewards, TP2 transition and observation kernels, copositive
transition dominance, row-wise informativeness orders, boundary-column
consistency) and derives which structural statements apply.  The verify_*
functions then measure what the theory predicts on an actual solved value
function: myopic lower-bound policy dominance, monotonicity of the
information gain across actions, convex dominance of posterior tails
(the psi sweep), posterior-range containment, and monotone/convex value
shape along lines toward the last vertex.

Verification never asserts: hypotheses may fail, in which case the checks
still run and report diagnostics, because the structural conditions are
sufficient rather than necessary.  All comparisons on infinite-horizon
proxies carry an explicit additive slack derived from the contraction
bound, so every reported verdict is decidable from a finite computation.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, log

import numpy as np

from .model import (PomdpModel, ShiftFeasibility, as_belief, belief_grid,
                    reward_shift_general)
from .orders import (OrderVerdict, blackwell_dominates, check_a5, check_a7,
                     copositive_dominates, is_tp2, lehmann_precision,
                     reverse_factorization)
from .solver import TIE_TOL, _q_batch, solve_exact, solve_grid

PAIR_TOL = 1e-12
SHAPE_TOL = 1e-9
RANGE_TOL = 1e-10
PSI_END_TOL = 1e-12
DEFAULT_RESOLUTION = 100
DEFAULT_RESIDUAL = 1e-8
PSI_LAMBDA_POINTS = 201


# ---------------------------------------------------------------------------
# Assumption report
# ---------------------------------------------------------------------------

def _verdict_dict(v: OrderVerdict | None) -> dict | None:
    if v is None:
        return None
    out: dict = {"holds": v.holds}
    if v.witness is not None:
        out["witness"] = v.witness
    if v.factor is not None:
        out["factor"] = [[float(x) for x in row] for row in v.factor]
    return out


def _all_hold(verdicts) -> bool:
    return all(v.holds is True for v in verdicts)


@dataclass(frozen=True, eq=False)
class AssumptionReport:
    """Every hypothesis verdict for one model, plus derived applicability.

    Per-action checks (monotone rewards, TP2 kernels) are tuples indexed by
    action; pairwise checks (copositive transition dominance, row-wise
    first-order dominance, single-crossing precision, boundary consistency,
    the two factorization orders) are tuples indexed by consecutive action
    pair (u, u+1).  ``statement1_applicable`` requires a shared transition
    matrix with TP2 kernels plus the precision and boundary conditions;
    ``statement2_applicable`` is the general-transition variant that adds
    monotone rewards, copositive dominance, and row-wise dominance.
    """

    a1: tuple[OrderVerdict, ...]
    a1_prime: ShiftFeasibility
    a2: tuple[OrderVerdict, ...]
    a3: tuple[OrderVerdict, ...]
    a4: tuple[OrderVerdict, ...]
    a5: tuple[OrderVerdict, ...]
    a6: tuple[OrderVerdict, ...]
    a7: tuple[OrderVerdict, ...]
    blackwell: tuple[OrderVerdict, ...]
    reverse_factor: tuple[OrderVerdict, ...]
    shared_transition: bool
    statement1_applicable: bool
    statement2_applicable: bool
    notes: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "a1_monotone_rewards": [_verdict_dict(v) for v in self.a1],
            "a1_prime_reward_shift": {
                "status": self.a1_prime.status,
                "f": None if self.a1_prime.f is None
                else [float(x) for x in self.a1_prime.f],
            },
            "a2_tp2_transition": [_verdict_dict(v) for v in self.a2],
            "a3_tp2_observation": [_verdict_dict(v) for v in self.a3],
            "a4_copositive_dominance": [_verdict_dict(v) for v in self.a4],
            "a5_row_dominance": [_verdict_dict(v) for v in self.a5],
            "a6_precision": [_verdict_dict(v) for v in self.a6],
            "a7_boundary": [_verdict_dict(v) for v in self.a7],
            "blackwell": [_verdict_dict(v) for v in self.blackwell],
            "reverse_factor": [_verdict_dict(v) for v in self.reverse_factor],
            "shared_transition": self.shared_transition,
            "statement1_applicable": self.statement1_applicable,
            "statement2_applicable": self.statement2_applicable,
            "notes": list(self.notes),
        }


def _monotone_rewards(r: np.ndarray, tol: float = PAIR_TOL) -> OrderVerdict:
    diffs = np.diff(r)
    if diffs.size == 0 or diffs.min() >= -tol:
        return OrderVerdict(holds=True)
    i = int(np.argmin(diffs))
    return OrderVerdict(holds=False, witness={
        "kind": "reward_decrease", "state": i,
        "value": float(r[i]), "next": float(r[i + 1])})


def assumption_report(m: PomdpModel) -> AssumptionReport:
    """Run every hypothesis checker on the model and derive applicability.

    Pairwise checks are run on consecutive action pairs only; with a single
    action they are vacuous and a note records that.  LP-backed verdicts
    that fail numerically surface as ``holds is None`` with a note, and an
    undetermined verdict never counts toward applicability.
    """
    pairs = range(m.num_actions - 1)
    a1 = tuple(_monotone_rewards(m.reward[u]) for u in range(m.num_actions))
    a1p = reward_shift_general(m)
    a2 = tuple(is_tp2(m.transition[u]) for u in range(m.num_actions))
    a3 = tuple(is_tp2(m.observation[u]) for u in range(m.num_actions))
    a4 = tuple(copositive_dominates(m.transition[u], m.transition[u + 1])
               for u in pairs)
    a5 = tuple(check_a5(m.observation[u], m.observation[u + 1]) for u in pairs)
    a6 = tuple(lehmann_precision(m.observation[u], m.observation[u + 1])
               for u in pairs)
    a7 = tuple(check_a7(m.observation[u], m.observation[u + 1]) for u in pairs)
    blackwell = tuple(blackwell_dominates(m.observation[u + 1], m.observation[u])
                      for u in pairs)
    reverse = tuple(reverse_factorization(m.observation[u], m.observation[u + 1])
                    for u in pairs)

    notes = []
    if m.num_actions == 1:
        notes.append("single action: pairwise checks are vacuous")
    for label, verdicts in (("blackwell", blackwell), ("reverse_factor", reverse)):
        for u, v in enumerate(verdicts):
            if v.holds is None:
                notes.append(f"{label} pair ({u + 1}, {u + 2}): undetermined")

    statement1 = bool(m.shared_transition and _all_hold(a2) and _all_hold(a3)
                      and _all_hold(a6) and _all_hold(a7))
    statement2 = bool(_all_hold(a1) and _all_hold(a2) and _all_hold(a3)
                      and _all_hold(a4) and _all_hold(a5) and _all_hold(a6)
                      and _all_hold(a7))
    return AssumptionReport(
        a1=a1, a1_prime=a1p, a2=a2, a3=a3, a4=a4, a5=a5, a6=a6, a7=a7,
        blackwell=blackwell, reverse_factor=reverse,
        shared_transition=m.shared_transition,
        statement1_applicable=statement1, statement2_applicable=statement2,
        notes=tuple(notes))


# ---------------------------------------------------------------------------
# Slack budget and verification solves
# ---------------------------------------------------------------------------

def slack_budget(m: PomdpModel, *, residual: float | None = None,
                 horizon: int | None = None) -> float:
    """Additive slack for Q/J comparisons on an infinite-horizon proxy.

    Residual-mode solves are within residual/(1-rho) of the fixed point in
    sup norm, so a comparison of two such values needs 2*residual/(1-rho).
    Horizon-mode solves started from zero are within rho^k * Rmax/(1-rho),
    doubled the same way.  Exactly one mode must be given.
    """
    if (horizon is None) == (residual is None):
        raise ValueError("exactly one of horizon and residual must be given")
    one_minus = 1.0 - m.discount
    if one_minus <= 0.0:
        raise ValueError("slack budget requires discount < 1")
    if residual is not None:
        return 2.0 * float(residual) / one_minus
    rmax = float(np.abs(m.reward).max())
    return 2.0 * (m.discount ** int(horizon)) * rmax / one_minus


def _residual_sweeps(m: PomdpModel, residual: float) -> int:
    """Sweep count whose tail bound rho^k * Rmax matches the residual target.

    After k backups from the zero function the distance to the fixed point
    is at most rho^k * Rmax / (1 - rho); choosing the smallest k with
    rho^k * Rmax <= residual puts the horizon-mode solve inside the same
    slack budget that a residual-mode stop at tau would earn.
    """
    rmax = float(np.abs(m.reward).max())
    if m.discount <= 0.0 or rmax <= 0.0 or residual >= rmax:
        return 1
    return max(1, ceil(log(residual / rmax) / log(m.discount)))


def solve_for_verification(m: PomdpModel, *, method: str = "grid",
                           resolution: int = DEFAULT_RESOLUTION,
                           horizon: int | None = None,
                           residual: float | None = None):
    """Produce the value function the verification harness measures against.

    ``method="exact"`` forwards to the exact solver as-is.  ``method="grid"``
    with an explicit horizon runs that many point-based sweeps; with a
    residual target it runs the deterministic sweep count from
    :func:`_residual_sweeps` instead of iterating to the target, because the
    point-based iteration can bottom out at a resolution-dependent floor
    above any small target.  The returned value function records the last
    sweep's actual change, so reports can state the achieved residual next
    to the requested one.
    """
    if (horizon is None) == (residual is None):
        raise ValueError("exactly one of horizon and residual must be given")
    if method == "exact":
        return solve_exact(m, horizon=horizon, residual=residual,
                           resolution=resolution)
    if method != "grid":
        raise ValueError(f"unknown solver method: {method!r}")
    if horizon is not None:
        return solve_grid(m, resolution=resolution, horizon=horizon)
    sweeps = _residual_sweeps(m, float(residual))
    return solve_grid(m, resolution=resolution, horizon=sweeps)


def _achieved_residual(vf) -> float | None:
    res = getattr(vf, "residual", None)
    if res is not None:
        return float(res)
    residuals = getattr(vf, "residuals", ())
    return float(residuals[-1]) if residuals else None


# ---------------------------------------------------------------------------
# Theorem-style verification on a solved value function
# ---------------------------------------------------------------------------

def _myopic_actions(m: PomdpModel, beliefs: np.ndarray,
                    tie_tol: float = TIE_TOL) -> np.ndarray:
    """Lowest-index immediate-reward argmax per belief row (ties broken down,
    matching myopic_policy_at)."""
    gains = beliefs @ m.reward.T
    best = gains.max(axis=1, keepdims=True)
    return np.argmax(gains >= best - tie_tol, axis=1)


def verify_policy_dominance(m: PomdpModel, vf, *,
                            resolution: int = DEFAULT_RESOLUTION,
                            slack: float = 0.0,
                            tie_tol: float = TIE_TOL) -> dict:
    """Check that the optimal policy never falls below the myopic policy.

    For every grid belief the myopic action is the lowest-index immediate
    argmax; a violation is recorded when every Q-value at actions >= myopic
    sits more than slack + tie_tol below the best Q overall, i.e. when even
    tie-tolerant selection could not pick an action at or above the myopic
    one.  ``min_margin`` is the worst gap max_{u >= myopic} Q - max_u Q over
    the grid (0 when dominance holds exactly); actions in the violation
    records are 1-based.
    """
    beliefs = belief_grid(m.num_states, resolution)
    q = _q_batch(m, vf.vectors, beliefs)
    myopic = _myopic_actions(m, beliefs, tie_tol)
    suffix_best = np.maximum.accumulate(q[:, ::-1], axis=1)[:, ::-1]
    margins = suffix_best[np.arange(beliefs.shape[0]), myopic] - q.max(axis=1)
    bad = np.flatnonzero(margins < -(slack + tie_tol))
    violations = []
    for i in bad:
        q_row = q[i]
        violations.append({
            "belief": [float(x) for x in beliefs[i]],
            "myopic_action": int(myopic[i]) + 1,
            "optimal_action": int(np.argmax(q_row >= q_row.max() - tie_tol)) + 1,
            "margin": float(margins[i]),
        })
    return {
        "num_beliefs": int(beliefs.shape[0]),
        "grid_resolution": int(resolution),
        "slack": float(slack),
        "violations": violations,
        "min_margin": float(margins.min()) if margins.size else 0.0,
    }


def verify_q_diff_monotone(m: PomdpModel, vf, *,
                           resolution: int = DEFAULT_RESOLUTION) -> dict:
    """Measure monotonicity of the information gain Q(pi,u) - r_u'pi in u.

    For each consecutive action pair the margin is the gain at the higher
    action minus the gain at the lower one; the structural prediction for
    applicable models is that every margin stays above -slack.  Reports the
    per-pair minima and the overall worst belief; asserts nothing.
    """
    beliefs = belief_grid(m.num_states, resolution)
    q = _q_batch(m, vf.vectors, beliefs)
    gains = q - beliefs @ m.reward.T
    diffs = np.diff(gains, axis=1)          # (N, U-1)
    if diffs.size == 0:
        return {"min_margin_per_pair": [], "min_margin": None,
                "argmin_belief": None, "num_beliefs": int(beliefs.shape[0])}
    per_pair = diffs.min(axis=0)
    flat = int(np.argmin(diffs))
    row, col = np.unravel_index(flat, diffs.shape)
    return {
        "min_margin_per_pair": [float(x) for x in per_pair],
        "min_margin": float(diffs[row, col]),
        "argmin_belief": [float(x) for x in beliefs[row]],
        "argmin_pair": [int(col) + 1, int(col) + 2],
        "num_beliefs": int(beliefs.shape[0]),
    }


# ---------------------------------------------------------------------------
# Posterior-tail convex dominance (psi) and range containment
# ---------------------------------------------------------------------------

def _posterior_tails(m: PomdpModel, probs: np.ndarray, u: int):
    """Last coordinate of each unnormalized posterior and its mass:
    tail_y = z_y[-1], sigma_y = 1'z_y for z_y = B(u)[:, y] * (P' pi)."""
    predicted = m.transition[u].T @ probs
    z = m.observation[u] * predicted[:, None]    # (X, Y) columns are z_y
    return z[-1, :].copy(), z.sum(axis=0)


def psi(m: PomdpModel, pi, u_low: int, u_high: int, lam: float) -> float:
    """Convex-dominance gap of posterior tails between two actions.

    psi(lam) = sum_y [tail - lam]+ sigma at u_high minus the same sum at
    u_low, where tail is the last coordinate of the normalized posterior and
    sigma the observation probability; terms with sigma = 0 are skipped by
    construction because their unnormalized tails are exactly zero.  The
    structural prediction under the precision and boundary hypotheses is
    psi(lam) >= 0 for every lam, with both endpoints forced to zero:
    at lam <= 0 the sums telescope to the expected tail, equal across
    actions sharing a transition matrix, and at lam >= 1 every term clips.
    """
    if not m.shared_transition:
        raise ValueError("psi requires a shared transition matrix")
    for u in (u_low, u_high):
        if not 0 <= u < m.num_actions:
            raise ValueError(f"action index {u} out of range")
    probs = as_belief(pi).probs
    total = 0.0
    for u, sign in ((u_high, 1.0), (u_low, -1.0)):
        tails, sigmas = _posterior_tails(m, probs, u)
        total += sign * float(np.maximum(tails - lam * sigmas, 0.0).sum())
    return total


def psi_breakpoints(m: PomdpModel, pi, u_low: int, u_high: int) -> np.ndarray:
    """Kink locations of lam -> psi(lam): the normalized posterior tails
    tail_y / sigma_y of both actions, for observations with sigma > 0."""
    probs = as_belief(pi).probs
    points = []
    for u in (u_low, u_high):
        tails, sigmas = _posterior_tails(m, probs, u)
        live = sigmas > 0.0
        points.append(tails[live] / sigmas[live])
    return np.unique(np.concatenate(points))


def psi_sweep(m: PomdpModel, beliefs, *,
              num_lambda: int = PSI_LAMBDA_POINTS,
              include_breakpoints: bool = True) -> dict:
    """Minimum of psi over a lambda sweep, per belief and action pair.

    Evaluates psi on the uniform [0, 1] grid of ``num_lambda`` points plus
    (by default) the exact breakpoints of each (belief, pair); since psi is
    piecewise linear in lambda, grid plus breakpoints is exhaustive.
    Returns the minima matrix (num_beliefs, num_pairs), the overall minimum,
    and the endpoint values psi(0) and psi(1), which must vanish.
    """
    if not m.shared_transition:
        raise ValueError("psi_sweep requires a shared transition matrix")
    pts = np.atleast_2d(np.asarray(beliefs, dtype=float))
    num_pairs = m.num_actions - 1
    base = np.linspace(0.0, 1.0, num_lambda)
    minima = np.empty((pts.shape[0], num_pairs))
    end_low = np.empty((pts.shape[0], num_pairs))
    end_high = np.empty((pts.shape[0], num_pairs))
    for b, probs in enumerate(pts):
        tails_all, sigmas_all = zip(*(_posterior_tails(m, probs, u)
                                      for u in range(m.num_actions)))
        for p in range(num_pairs):
            lams = base
            if include_breakpoints:
                extra = []
                for u in (p, p + 1):
                    live = sigmas_all[u] > 0.0
                    extra.append(tails_all[u][live] / sigmas_all[u][live])
                lams = np.unique(np.concatenate([base, *extra]))
            def piece(u):
                clipped = np.maximum(
                    tails_all[u][None, :] - lams[:, None] * sigmas_all[u][None, :],
                    0.0)
                return clipped.sum(axis=1)
            values = piece(p + 1) - piece(p)
            minima[b, p] = values.min()
            end_low[b, p] = values[0]       # lam = 0 is always first
            end_high[b, p] = values[lams.searchsorted(1.0)]
    return {
        "minima": minima,
        "min": float(minima.min()) if minima.size else None,
        "max_abs_psi_at_0": float(np.abs(end_low).max()) if end_low.size else 0.0,
        "max_abs_psi_at_1": float(np.abs(end_high).max()) if end_high.size else 0.0,
        "num_lambda": int(num_lambda),
        "num_beliefs": int(pts.shape[0]),
    }


def verify_range_containment(m: PomdpModel, beliefs, u_low: int, u_high: int,
                             tol: float = RANGE_TOL) -> dict:
    """Check that the posterior-tail range of the higher action contains the
    lower action's range at every belief.

    Only observations with positive probability contribute.  Records each
    belief where min(high tails) > min(low tails) + tol or
    max(high tails) < max(low tails) - tol.
    """
    pts = np.atleast_2d(np.asarray(beliefs, dtype=float))
    failures = []
    for probs in pts:
        spans = {}
        for u in (u_low, u_high):
            tails, sigmas = _posterior_tails(m, probs, u)
            live = sigmas > 0.0
            if not live.any():
                spans = None
                break
            normalized = tails[live] / sigmas[live]
            spans[u] = (float(normalized.min()), float(normalized.max()))
        if spans is None:
            continue
        low_span, high_span = spans[u_low], spans[u_high]
        if high_span[0] > low_span[0] + tol or high_span[1] < low_span[1] - tol:
            failures.append({
                "belief": [float(x) for x in probs],
                "low_range": list(low_span),
                "high_range": list(high_span),
            })
    return {
        "holds": not failures,
        "failures": failures,
        "num_beliefs": int(pts.shape[0]),
        "pair": [int(u_low) + 1, int(u_high) + 1],
        "tol": float(tol),
    }


# ---------------------------------------------------------------------------
# Value shape along lines toward the last vertex
# ---------------------------------------------------------------------------

def verify_value_monotone_convex(vf, *, num_lines: int = 100,
                                 num_points: int = 21,
                                 seed: int = 0,
                                 tol: float = SHAPE_TOL) -> dict:
    """Sample lines from random zero-last-coordinate bases to the last vertex
    and check the envelope is nondecreasing and convex along each.

    Monotone margin: the most negative consecutive difference along any
    line.  Convexity margin: the most negative value of
    (v[i-1] + v[i+1])/2 - v[i] over interior points (the chord test on the
    uniform parameter grid).  Both must stay above -tol for the verdicts.
    """
    num_states = vf.vectors.shape[1]
    if num_states < 2:
        raise ValueError("shape checks need at least two states")
    rng = np.random.default_rng(seed)
    eps = np.linspace(0.0, 1.0, num_points)
    worst_monotone = np.inf
    worst_convex = np.inf
    for _ in range(num_lines):
        base = rng.dirichlet(np.ones(num_states - 1))
        line = np.zeros((num_points, num_states))
        line[:, :num_states - 1] = (1.0 - eps)[:, None] * base[None, :]
        line[:, -1] = eps
        values = vf.values_at(line)
        worst_monotone = min(worst_monotone, float(np.diff(values).min()))
        mid = 0.5 * (values[:-2] + values[2:]) - values[1:-1]
        worst_convex = min(worst_convex, float(mid.min()))
    return {
        "monotone_ok": worst_monotone >= -tol,
        "convex_ok": worst_convex >= -tol,
        "min_monotone_margin": worst_monotone,
        "min_convexity_margin": worst_convex,
        "num_lines": int(num_lines),
        "num_points": int(num_points),
        "tol": float(tol),
    }


# ---------------------------------------------------------------------------
# Cross-model comparison
# ---------------------------------------------------------------------------

def compare_models(m_strong: PomdpModel, m_weak: PomdpModel, *,
                   resolution: int = DEFAULT_RESOLUTION,
                   residual: float | None = None,
                   horizon: int | None = None,
                   method: str = "grid") -> dict:
    """Compare optimal values of two models that differ only in observation
    kernels, under the cross-model informativeness hypotheses.

    Both models must agree on dimensions, rewards, discount, and the shared
    transition matrix (ValueError otherwise).  The hypothesis set is:
    monotone rewards, TP2 shared transition, TP2 observation kernels on both
    sides, boundary consistency of each weak/strong pair, and single-crossing
    precision of strong over weak per action; the garbling (factorization)
    variant is run alongside and reported, applying only where a factor
    exists.  The value gap J_strong - J_weak is evaluated on the grid; the
    prediction when the hypotheses hold is a gap above -slack everywhere.
    Identical observation kernels short-circuit to one solve and an exact
    zero gap.
    """
    if residual is None and horizon is None:
        residual = DEFAULT_RESIDUAL
    dims = (m_strong.num_states, m_strong.num_obs, m_strong.num_actions)
    if dims != (m_weak.num_states, m_weak.num_obs, m_weak.num_actions):
        raise ValueError("models must agree on state/observation/action counts")
    if not np.array_equal(m_strong.reward, m_weak.reward):
        raise ValueError("models must have identical rewards")
    if m_strong.discount != m_weak.discount:
        raise ValueError("models must have identical discount")
    if not (m_strong.shared_transition and m_weak.shared_transition):
        raise ValueError("comparison requires shared transition matrices")
    if not np.array_equal(m_strong.transition[0], m_weak.transition[0]):
        raise ValueError("models must share the same transition matrix")

    actions = range(m_strong.num_actions)
    hypotheses = {
        "a1_monotone_rewards": [
            _verdict_dict(_monotone_rewards(m_strong.reward[u])) for u in actions],
        "a2_tp2_transition": _verdict_dict(is_tp2(m_strong.transition[0])),
        "a3_tp2_observation_strong": [
            _verdict_dict(is_tp2(m_strong.observation[u])) for u in actions],
        "a3_tp2_observation_weak": [
            _verdict_dict(is_tp2(m_weak.observation[u])) for u in actions],
        "a7_boundary": [
            _verdict_dict(check_a7(m_weak.observation[u], m_strong.observation[u]))
            for u in actions],
        "precision_strong_over_weak": [
            _verdict_dict(lehmann_precision(m_weak.observation[u],
                                            m_strong.observation[u]))
            for u in actions],
    }
    blackwell = [blackwell_dominates(m_strong.observation[u],
                                     m_weak.observation[u]) for u in actions]
    flat = []
    for key in ("a1_monotone_rewards", "a3_tp2_observation_strong",
                "a3_tp2_observation_weak", "a7_boundary",
                "precision_strong_over_weak"):
        flat.extend(hypotheses[key])
    flat.append(hypotheses["a2_tp2_transition"])
    hypotheses_hold = all(v["holds"] is True for v in flat)

    slack = slack_budget(m_strong, residual=residual, horizon=horizon)
    beliefs = belief_grid(m_strong.num_states, resolution)
    identical = np.array_equal(m_strong.observation, m_weak.observation)
    vf_strong = solve_for_verification(
        m_strong, method=method, resolution=resolution,
        residual=residual, horizon=horizon)
    if identical:
        gaps = np.zeros(beliefs.shape[0])
        achieved = (_achieved_residual(vf_strong), _achieved_residual(vf_strong))
    else:
        vf_weak = solve_for_verification(
            m_weak, method=method, resolution=resolution,
            residual=residual, horizon=horizon)
        gaps = vf_strong.values_at(beliefs) - vf_weak.values_at(beliefs)
        achieved = (_achieved_residual(vf_strong), _achieved_residual(vf_weak))
    worst = int(np.argmin(gaps))
    return {
        "hypotheses": hypotheses,
        "hypotheses_hold": hypotheses_hold,
        "blackwell": [_verdict_dict(v) for v in blackwell],
        "blackwell_applicable": all(v.holds is True for v in blackwell),
        "identical_observations": identical,
        "grid_resolution": int(resolution),
        "num_beliefs": int(beliefs.shape[0]),
        "slack": float(slack),
        "min_gap": float(gaps[worst]),
        "mean_gap": float(gaps.mean()),
        "argmin_belief": [float(x) for x in beliefs[worst]],
        "gap_ok": bool(gaps[worst] >= -slack),
        "achieved_residuals": list(achieved),
    }


# ---------------------------------------------------------------------------
# Full verification report
# ---------------------------------------------------------------------------

def verification_report(m: PomdpModel, *,
                        resolution: int = DEFAULT_RESOLUTION,
                        residual: float | None = None,
                        horizon: int | None = None,
                        method: str = "grid",
                        num_psi_beliefs: int = 200,
                        seed: int = 0,
                        tie_tol: float = TIE_TOL,
                        shape_tol: float = SHAPE_TOL,
                        range_tol: float = RANGE_TOL) -> dict:
    """Solve the model and measure every structural prediction against it.

    Returns one JSON-ready document with sections ``assumptions`` (the full
    hypothesis report), ``theorem1`` (policy dominance and gain
    monotonicity with the slack budget), ``theorem3`` (null here; see
    compare_models for two-model comparisons), ``theorem5`` (posterior-range
    containment per pair), ``psi`` (convex-dominance sweep minima, shared
    transition only), and ``value_shape`` (monotone/convex line checks).
    Checks whose hypotheses fail still run and report; nothing asserts.
    """
    if residual is None and horizon is None:
        residual = DEFAULT_RESIDUAL
    assumptions = assumption_report(m)
    slack = slack_budget(m, residual=residual, horizon=horizon)
    vf = solve_for_verification(m, method=method, resolution=resolution,
                                residual=residual, horizon=horizon)
    dominance = verify_policy_dominance(m, vf, resolution=resolution,
                                        slack=slack, tie_tol=tie_tol)
    q_diff = verify_q_diff_monotone(m, vf, resolution=resolution)

    rng = np.random.default_rng(seed)
    sampled = rng.dirichlet(np.ones(m.num_states), size=num_psi_beliefs)
    psi_section: dict | None = None
    if m.shared_transition and m.num_actions >= 2:
        sweep = psi_sweep(m, sampled)
        psi_section = {
            "min": sweep["min"],
            "minima_per_pair": [float(x) for x in sweep["minima"].min(axis=0)],
            "max_abs_psi_at_0": sweep["max_abs_psi_at_0"],
            "max_abs_psi_at_1": sweep["max_abs_psi_at_1"],
            "num_lambda": sweep["num_lambda"],
            "num_beliefs": sweep["num_beliefs"],
        }
    theorem5 = [verify_range_containment(m, sampled, u, u + 1, tol=range_tol)
                for u in range(m.num_actions - 1)]
    shape = verify_value_monotone_convex(vf, seed=seed, tol=shape_tol)
    return {
        "model": m.name,
        "method": method,
        "grid_resolution": int(resolution),
        "requested_residual": None if residual is None else float(residual),
        "requested_horizon": None if horizon is None else int(horizon),
        "achieved_residual": _achieved_residual(vf),
        "slack": float(slack),
        "assumptions": assumptions.to_dict(),
        "theorem1": {
            "applicable": assumptions.statement1_applicable
            or assumptions.statement2_applicable,
            "statement1_applicable": assumptions.statement1_applicable,
            "statement2_applicable": assumptions.statement2_applicable,
            "dominance": dominance,
            "q_diff": q_diff,
        },
        "theorem3": None,
        "theorem5": theorem5,
        "psi": psi_section,
        "value_shape": shape,
    }
