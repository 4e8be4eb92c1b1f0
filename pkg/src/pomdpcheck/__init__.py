"""Stochastic-order checkers and POMDP solvers for verifying that optimal
sensing policies respect the structure predicted by informativeness orders.

The package splits into five layers:

* :mod:`pomdpcheck.model` — model container, validation, belief updates,
  line coordinates, reward shifts, JSON I/O.
* :mod:`pomdpcheck.lp` — dense two-phase simplex for feasibility/optimality.
* :mod:`pomdpcheck.orders` — MLR/FOSD/TP2 predicates, copositive dominance,
  Lehmann precision, boundary checks, Blackwell and reverse factorizations.
* :mod:`pomdpcheck.solver` — exact alpha-vector value iteration with LP
  pruning, point-based grid value iteration, Q-values and policies.
* :mod:`pomdpcheck.structural` — hypothesis reports and empirical
  verification of the monotone-policy, value-shape, and cross-model claims.

:mod:`pomdpcheck.examples` bundles the example generators and
:mod:`pomdpcheck.cli` exposes everything as the ``pomdpcheck`` command.
"""

from .examples import gen_example, list_examples
from .model import (Belief, ImpossibleObservationError, LineCoordinates,
                    ModelFormatError, PomdpModel, as_belief, belief_grid,
                    belief_update, line_coordinates, line_point, load_model,
                    loads_model, make_model, model_to_json, obs_likelihood,
                    reward_shift_controlled, reward_shift_general, save_model,
                    validate_model)
from .orders import (GammaMatrixSet, OrderVerdict, blackwell_dominates,
                     check_a5, check_a7, copositive_dominates, fosd_dominates,
                     gamma_matrices, is_copositive, is_tp2, lehmann_precision,
                     mlr_dominates, reverse_factorization)
from .solver import (AlphaVector, CapacityError, ExactVF, GridVF, PolicyQuery,
                     gamma_monotone_report, myopic_policy_at,
                     optimal_policy_at, prune, q_values, solve_exact,
                     solve_grid, value_at, vf_to_dict, vi_exact_step)
from .structural import (AssumptionReport, assumption_report, compare_models,
                         psi, psi_breakpoints, psi_sweep, slack_budget,
                         solve_for_verification, verification_report,
                         verify_policy_dominance, verify_q_diff_monotone,
                         verify_range_containment,
                         verify_value_monotone_convex)

__version__ = "0.1.0"

__all__ = [
    "AlphaVector", "AssumptionReport", "Belief", "CapacityError", "ExactVF",
    "GammaMatrixSet", "GridVF", "ImpossibleObservationError",
    "LineCoordinates", "ModelFormatError", "OrderVerdict", "PolicyQuery",
    "PomdpModel", "as_belief", "assumption_report", "belief_grid",
    "belief_update", "blackwell_dominates", "check_a5", "check_a7",
    "compare_models", "copositive_dominates", "fosd_dominates",
    "gamma_matrices", "gamma_monotone_report", "gen_example", "is_copositive",
    "is_tp2", "lehmann_precision", "line_coordinates", "line_point",
    "list_examples", "load_model", "loads_model", "make_model",
    "mlr_dominates", "model_to_json", "myopic_policy_at", "obs_likelihood",
    "optimal_policy_at", "prune", "psi", "psi_breakpoints", "psi_sweep",
    "q_values", "reverse_factorization", "reward_shift_controlled",
    "reward_shift_general", "save_model", "slack_budget", "solve_exact",
    "solve_for_verification", "solve_grid", "validate_model", "value_at",
    "verification_report", "verify_policy_dominance",
    "verify_q_diff_monotone", "verify_range_containment",
    "verify_value_monotone_convex", "vf_to_dict", "vi_exact_step",
    "__version__",
]
