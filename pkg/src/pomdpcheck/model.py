"""POMDP data types, validation, Bayesian belief propagation, and reward shifts.

Conventions used throughout the package:

* actions and observations are zero-based in the Python API; file formats and
  CSV/JSON reports use one-based labels,
* ``transition`` is stored per action as a (U, X, X) stack even when the model
  declares a shared transition matrix (the stack then repeats one matrix),
* all arrays handed out by this module are read-only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import lp

ROW_SUM_TOL = 1e-9
BELIEF_SUM_TOL = 1e-12
BELIEF_RENORM_TOL = 1e-9
SIGMA_FLOOR = 1e-300
SHIFT_RESIDUAL_TOL = 1e-8
SHIFT_MARGIN = 1e-6


class ModelFormatError(ValueError):
    """Malformed model data: bad JSON, wrong shapes, inconsistent dimensions."""


class ImpossibleObservationError(ValueError):
    """Bayes update conditioned on an observation of (numerically) zero probability."""


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Belief:
    """Probability vector over states: nonnegative entries summing to one."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.atleast_1d(np.asarray(self.probs, dtype=float))
        if p.ndim != 1 or p.size == 0:
            raise ValueError("belief must be a nonempty vector")
        if not np.isfinite(p).all():
            raise ValueError("belief entries must be finite")
        if p.min() < -BELIEF_RENORM_TOL:
            raise ValueError(f"belief entry {p.min()} is negative beyond tolerance")
        total = p.sum()
        if abs(total - 1.0) > BELIEF_RENORM_TOL:
            raise ValueError(f"belief sums to {total}, too far from 1 to renormalize")
        p = np.clip(p, 0.0, None)
        p = p / p.sum()
        object.__setattr__(self, "probs", _readonly(p))

    @property
    def num_states(self) -> int:
        return self.probs.size


def as_belief(value) -> Belief:
    """Coerce an array-like (or pass through a Belief) into a Belief."""
    if isinstance(value, Belief):
        return value
    return Belief(np.asarray(value, dtype=float))


@dataclass(frozen=True, eq=False)
class LineCoordinates:
    """Coordinates of a belief on the segment from a base point to the last vertex.

    ``base`` has last component zero; the source belief is
    ``(1 - epsilon) * base + epsilon * e_X``.
    """

    base: Belief
    epsilon: float


@dataclass(frozen=True, eq=False)
class PomdpModel:
    """Finite POMDP: per-action transition/observation matrices and reward vectors."""

    name: str
    num_states: int
    num_obs: int
    num_actions: int
    discount: float
    transition: np.ndarray  # (U, X, X)
    observation: np.ndarray  # (U, X, Y)
    reward: np.ndarray  # (U, X)
    shared_transition: bool

    def __post_init__(self):
        x, y, u = self.num_states, self.num_obs, self.num_actions
        if min(x, y, u) < 1:
            raise ModelFormatError("X, Y, U must all be positive")
        t = np.asarray(self.transition, dtype=float)
        o = np.asarray(self.observation, dtype=float)
        r = np.asarray(self.reward, dtype=float)
        if t.shape != (u, x, x):
            raise ModelFormatError(f"transition shape {t.shape} != {(u, x, x)}")
        if o.shape != (u, x, y):
            raise ModelFormatError(f"observation shape {o.shape} != {(u, x, y)}")
        if r.shape != (u, x):
            raise ModelFormatError(f"reward shape {r.shape} != {(u, x)}")
        for arr, label in ((t, "transition"), (o, "observation"), (r, "reward")):
            if not np.isfinite(arr).all():
                raise ModelFormatError(f"{label} contains non-finite entries")
        if self.shared_transition and u > 1 and not (t == t[0]).all():
            raise ModelFormatError("shared transition flag set but matrices differ")
        object.__setattr__(self, "transition", _readonly(t))
        object.__setattr__(self, "observation", _readonly(o))
        object.__setattr__(self, "reward", _readonly(r))
        object.__setattr__(self, "discount", float(self.discount))


def make_model(name, discount, transition, observation, reward,
               shared_transition=None) -> PomdpModel:
    """Build a PomdpModel from arrays.

    ``transition`` may be one (X, X) matrix (shared across actions) or a
    (U, X, X) stack.  Structural problems raise ModelFormatError; probability
    bookkeeping problems are left for validate_model to report.
    """
    obs = np.asarray(observation, dtype=float)
    if obs.ndim != 3:
        raise ModelFormatError("observation must be a (U, X, Y) array")
    u, x, y = obs.shape
    tr = np.asarray(transition, dtype=float)
    if tr.ndim == 2:
        if shared_transition is False:
            raise ModelFormatError("single transition matrix requires shared_transition")
        tr = np.broadcast_to(tr, (u, x, x)).copy()
        shared = True
    elif tr.ndim == 3:
        shared = bool(shared_transition) if shared_transition is not None \
            else bool(u == 1 or (tr == tr[0]).all())
    else:
        raise ModelFormatError("transition must be (X, X) or (U, X, X)")
    return PomdpModel(name=str(name), num_states=x, num_obs=y, num_actions=u,
                      discount=float(discount), transition=tr, observation=obs,
                      reward=np.asarray(reward, dtype=float),
                      shared_transition=shared)


def validate_model(m: PomdpModel) -> list[str]:
    """Return all violated probability/discount invariants; empty means valid."""
    violations = []
    if not (0.0 <= m.discount):
        violations.append(f"discount {m.discount} is negative")
    if not (m.discount < 1.0):
        violations.append("discount not < 1")
    for label, stack in (("transition", m.transition), ("observation", m.observation)):
        for u in range(m.num_actions):
            mat = stack[u]
            for i in range(m.num_states):
                row = mat[i]
                low, high = row.min(), row.max()
                if low < 0.0 or high > 1.0:
                    j = int(np.argmin(row) if low < 0.0 else np.argmax(row))
                    violations.append(
                        f"{label}[{u}] row {i} entry {j} = {row[j]:.12g} outside [0, 1]")
                total = row.sum()
                if abs(total - 1.0) > ROW_SUM_TOL:
                    violations.append(
                        f"{label}[{u}] row {i}: row sum {total:.12g} != 1")
    return violations


@lru_cache(maxsize=32)
def belief_grid(num_states: int, resolution: int) -> np.ndarray:
    """All barycentric grid points of the belief simplex at step 1/resolution.

    Returns a read-only (N, X) array; for X = 3, resolution = 100 this is the
    5151-point grid used by the verification harness.
    """
    if num_states < 1 or resolution < 1:
        raise ValueError("num_states and resolution must be positive")

    def compositions(parts, total):
        if parts == 1:
            return np.array([[total]], dtype=np.int64)
        blocks = []
        for first in range(total + 1):
            rest = compositions(parts - 1, total - first)
            head = np.full((rest.shape[0], 1), first, dtype=np.int64)
            blocks.append(np.hstack([head, rest]))
        return np.vstack(blocks)

    pts = compositions(num_states, resolution).astype(float) / float(resolution)
    return _readonly(pts)


def _check_indices(m: PomdpModel, y: int, u: int):
    if not (0 <= u < m.num_actions):
        raise ValueError(f"action index {u} out of range [0, {m.num_actions})")
    if not (0 <= y < m.num_obs):
        raise ValueError(f"observation index {y} out of range [0, {m.num_obs})")


def obs_likelihood(m: PomdpModel, pi, y: int, u: int) -> float:
    """Probability of seeing observation y after taking action u in belief pi."""
    _check_indices(m, y, u)
    probs = as_belief(pi).probs
    predicted = m.transition[u].T @ probs
    return float(m.observation[u][:, y] @ predicted)


def belief_update(m: PomdpModel, pi, y: int, u: int) -> Belief:
    """Bayes posterior over states after action u produced observation y."""
    _check_indices(m, y, u)
    probs = as_belief(pi).probs
    predicted = m.transition[u].T @ probs
    unnormalized = m.observation[u][:, y] * predicted
    sigma = unnormalized.sum()
    if sigma <= SIGMA_FLOOR:
        raise ImpossibleObservationError(
            f"impossible observation: y={y} under action u={u} has probability {sigma:.3g}")
    return Belief(unnormalized / sigma)


def line_coordinates(pi) -> LineCoordinates:
    """Decompose a belief as a point on the segment from a zero-last-coordinate
    base toward the last vertex: pi = (1 - eps) * base + eps * e_X.

    At the last vertex itself (eps = 1) the base is taken uniform over the
    first X-1 states so the function stays total and deterministic.
    """
    probs = as_belief(pi).probs
    x = probs.size
    eps = float(probs[-1])
    if x == 1:
        raise ValueError("line coordinates need at least two states")
    if eps >= 1.0 - 1e-15:
        base = np.full(x, 1.0 / (x - 1))
        base[-1] = 0.0
        return LineCoordinates(base=Belief(base), epsilon=1.0)
    base = probs / (1.0 - eps)
    base = base.copy()
    base[-1] = 0.0
    return LineCoordinates(base=Belief(base), epsilon=eps)


def line_point(coords: LineCoordinates) -> Belief:
    """Reconstruct the belief described by LineCoordinates."""
    base = coords.base.probs
    point = (1.0 - coords.epsilon) * base
    point = point.copy()
    point[-1] += coords.epsilon
    return Belief(point)


@dataclass(frozen=True, eq=False)
class ShiftFeasibility:
    """Outcome of the strictly-increasing reward-shift search."""

    status: str  # "feasible" | "infeasible" | "numerical_failure"
    f: np.ndarray | None = None

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"


def _shift_rows(m: PomdpModel):
    """Constraint rows: for each action and state i, row v with
    v'f = [(I - rho P(u)) f](i+1) - [(I - rho P(u)) f](i)."""
    eye = np.eye(m.num_states)
    rows = []
    for u in range(m.num_actions):
        d = eye - m.discount * m.transition[u]
        rows.extend(d[i + 1] - d[i] for i in range(m.num_states - 1))
    return np.array(rows)


def reward_shift_controlled(m: PomdpModel):
    """Shift rewards so every action's reward vector is strictly increasing,
    leaving the optimization problem equivalent (shared transitions only).

    Returns (f, shifted_model, residual) where the additive state potential f
    solves (I - discount * P) f = delta with delta(i) = i * spread_bound, and
    residual is the sup-norm defect of that solve.
    """
    if not m.shared_transition:
        raise ValueError("reward_shift_controlled requires a shared transition matrix")
    spread = float(m.reward.max() - m.reward.min())
    step = spread + 1.0
    delta = step * np.arange(1, m.num_states + 1, dtype=float)
    p = m.transition[0]
    f = np.linalg.solve(np.eye(m.num_states) - m.discount * p, delta)
    residual = float(np.abs((np.eye(m.num_states) - m.discount * p) @ f - delta).max())
    if residual > SHIFT_RESIDUAL_TOL:
        raise ArithmeticError(f"reward shift solve residual {residual} exceeds tolerance")
    shifted = PomdpModel(
        name=m.name + "_shifted", num_states=m.num_states, num_obs=m.num_obs,
        num_actions=m.num_actions, discount=m.discount, transition=m.transition,
        observation=m.observation, reward=m.reward + delta[None, :],
        shared_transition=m.shared_transition)
    return f, shifted, residual


def reward_shift_general(m: PomdpModel, margin: float = SHIFT_MARGIN) -> ShiftFeasibility:
    """Search for a state potential f making (I - discount P(u)) f strictly
    increasing for every action, via LP feasibility with the given margin.

    Genuine infeasibility and numerical failure are reported distinctly.
    """
    rows = _shift_rows(m)
    if rows.size == 0:
        return ShiftFeasibility(status="feasible", f=np.zeros(m.num_states))
    outcome = lp.lp_feasible(g_ub=-rows, h_ub=-margin * np.ones(rows.shape[0]),
                             free=np.ones(m.num_states, dtype=bool))
    if outcome.status == lp.OPTIMAL:
        return ShiftFeasibility(status="feasible", f=outcome.x)
    if outcome.status == lp.INFEASIBLE:
        return ShiftFeasibility(status="infeasible")
    return ShiftFeasibility(status="numerical_failure")


# ---------------------------------------------------------------------------
# JSON model files


def _json_matrix(obj, name):
    arr = np.asarray(obj, dtype=float)
    if arr.ndim != 2:
        raise ModelFormatError(f"{name} must be a matrix")
    return arr


def loads_model(text: str) -> PomdpModel:
    """Parse a model from its JSON document; numbers become 64-bit floats."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a JSON object")
    try:
        name = str(doc["name"])
        x, y, u = int(doc["X"]), int(doc["Y"]), int(doc["U"])
        discount = float(doc["discount"])
        transition = doc["transition"]
        observation = doc["observation"]
        reward = doc["reward"]
    except KeyError as exc:
        raise ModelFormatError(f"missing field {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"bad scalar field: {exc}") from exc
    if not isinstance(transition, dict) or \
            set(transition) not in ({"shared"}, {"per_action"}):
        raise ModelFormatError('transition must be {"shared": ...} or {"per_action": ...}')
    try:
        if "shared" in transition:
            tr = _json_matrix(transition["shared"], "transition")
            shared = True
        else:
            tr = np.asarray(transition["per_action"], dtype=float)
            if tr.ndim != 3:
                raise ModelFormatError("per_action transition must be a list of matrices")
            shared = bool(u == 1 or (tr == tr[0]).all())
        obs = np.asarray(observation, dtype=float)
        rew = np.asarray(reward, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"bad array field: {exc}") from exc
    if obs.ndim != 3:
        raise ModelFormatError("observation must be a list of U matrices")
    if rew.ndim != 2:
        raise ModelFormatError("reward must be a list of U vectors")
    if obs.shape != (u, x, y):
        raise ModelFormatError(f"observation shape {obs.shape} != {(u, x, y)}")
    if rew.shape != (u, x):
        raise ModelFormatError(f"reward shape {rew.shape} != {(u, x)}")
    expected = (x, x) if shared and "shared" in transition else (u, x, x)
    if tr.shape != expected:
        raise ModelFormatError(f"transition shape {tr.shape} != {expected}")
    return make_model(name=name, discount=discount, transition=tr,
                      observation=obs, reward=rew, shared_transition=shared)


def load_model(path) -> PomdpModel:
    """Read a model JSON file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ModelFormatError(f"cannot read model file {path}: {exc}") from exc
    return loads_model(text)


def model_to_json(m: PomdpModel) -> str:
    """Canonical JSON document for a model (stable key order, one trailing newline)."""
    if m.shared_transition:
        transition = {"shared": m.transition[0].tolist()}
    else:
        transition = {"per_action": m.transition.tolist()}
    doc = {
        "name": m.name,
        "X": m.num_states,
        "Y": m.num_obs,
        "U": m.num_actions,
        "discount": m.discount,
        "transition": transition,
        "observation": m.observation.tolist(),
        "reward": m.reward.tolist(),
    }
    return json.dumps(doc, indent=2) + "\n"


def save_model(m: PomdpModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(model_to_json(m))
