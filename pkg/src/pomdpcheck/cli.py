"""Command-line surface: model I/O, example generators, and orchestration.

Commands
--------
validate  Load a model file and report every format/stochasticity violation.
check     Run the full hypothesis report (orders, factorizations, shifts).
solve     Solve a model and emit the value function as JSON plus an optional
          policy CSV over the belief grid.
verify    Solve, then measure every structural prediction; exits 1 when a
          statement-applicable model shows policy-dominance violations.
compare   Two-model value comparison under the cross-model hypotheses;
          exits 1 when the hypotheses hold but the value gap dips below the
          slack budget.
gen       Emit a bundled example model (round-trips byte-identically).

Exit codes: 0 success, 1 violated expectations, 2 input or numerical errors
(malformed JSON, dimension mismatches, LP failures, solver non-convergence).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from .examples import gen_example, list_examples
from .model import ModelFormatError, belief_grid, load_model, model_to_json, \
    validate_model
from .solver import TIE_TOL, _q_batch, gamma_monotone_report, vf_to_dict
from .structural import (DEFAULT_RESIDUAL, SHAPE_TOL, RANGE_TOL,
                         _myopic_actions, assumption_report, compare_models,
                         solve_for_verification, verification_report)

KNOWN_TOLERANCES = {
    "tie": TIE_TOL,        # Q-value tie width for action selection
    "shape": SHAPE_TOL,    # monotone/convex line-check tolerance
    "range": RANGE_TOL,    # posterior-range containment tolerance
    "gamma": 1e-10,        # alpha-vector coordinate monotonicity tolerance
}


@dataclass
class RunConfig:
    """Parsed command-line state shared by the model-driven commands."""
    command: str
    models: list[str] = field(default_factory=list)
    grid: int = 100
    horizon: int | None = None
    residual: float | None = None
    method: str | None = None
    out: str | None = None
    csv: str | None = None
    tolerances: dict[str, float] = field(default_factory=dict)
    name: str | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.grid < 1:
            raise ValueError("--grid must be at least 1")
        if self.horizon is not None and self.residual is not None:
            raise ValueError("--horizon and --residual are mutually exclusive")
        if self.horizon is None and self.residual is None:
            self.residual = DEFAULT_RESIDUAL
        if self.residual is not None and self.residual <= 0.0:
            raise ValueError("--residual must be positive")
        if self.horizon is not None and self.horizon < 0:
            raise ValueError("--horizon must be nonnegative")
        unknown = set(self.tolerances) - set(KNOWN_TOLERANCES)
        if unknown:
            raise ValueError(
                f"unknown tolerance name(s): {', '.join(sorted(unknown))}; "
                f"known: {', '.join(sorted(KNOWN_TOLERANCES))}")

    def tol(self, name: str) -> float:
        return self.tolerances.get(name, KNOWN_TOLERANCES[name])


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_policy_csv(path: str, m, vf, resolution: int, tie_tol: float) -> None:
    beliefs = belief_grid(m.num_states, resolution)
    q = _q_batch(m, vf.vectors, beliefs)
    values = q.max(axis=1)
    best = np.argmax(q >= values[:, None] - tie_tol, axis=1)
    myopic = _myopic_actions(m, beliefs, tie_tol)
    header = ([f"belief_{i + 1}" for i in range(m.num_states)]
              + ["value", "optimal_action", "myopic_action"]
              + [f"q_{u + 1}" for u in range(m.num_actions)])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(beliefs.shape[0]):
            row = ([repr(float(x)) for x in beliefs[i]]
                   + [repr(float(values[i])), str(int(best[i]) + 1),
                      str(int(myopic[i]) + 1)]
                   + [repr(float(x)) for x in q[i]])
            writer.writerow(row)


def cmd_validate(cfg: RunConfig) -> int:
    m = load_model(cfg.models[0])
    violations = validate_model(m)
    _emit({"model": m.name, "valid": not violations,
           "violations": violations}, cfg.out)
    if violations:
        print(f"validate: {len(violations)} violation(s)", file=sys.stderr)
        return 2
    return 0


def cmd_check(cfg: RunConfig) -> int:
    m = load_model(cfg.models[0])
    report = assumption_report(m)
    doc = {"model": m.name, **report.to_dict()}
    _emit(doc, cfg.out)
    return 0


def cmd_solve(cfg: RunConfig) -> int:
    m = load_model(cfg.models[0])
    method = cfg.method or "exact"
    vf = solve_for_verification(m, method=method, resolution=cfg.grid,
                                horizon=cfg.horizon, residual=cfg.residual)
    doc = vf_to_dict(vf)
    doc["model"] = m.name
    doc["method"] = method
    doc["gamma_monotone"] = gamma_monotone_report(vf, tol=cfg.tol("gamma"))
    _emit(doc, cfg.out)
    if cfg.csv:
        _write_policy_csv(cfg.csv, m, vf, cfg.grid, cfg.tol("tie"))
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    m = load_model(cfg.models[0])
    method = cfg.method or "grid"
    report = verification_report(
        m, resolution=cfg.grid, residual=cfg.residual, horizon=cfg.horizon,
        method=method, tie_tol=cfg.tol("tie"), shape_tol=cfg.tol("shape"),
        range_tol=cfg.tol("range"))
    _emit(report, cfg.out)
    theorem1 = report["theorem1"]
    if theorem1["applicable"] and theorem1["dominance"]["violations"]:
        n = len(theorem1["dominance"]["violations"])
        print(f"verify: {n} policy-dominance violation(s) on an applicable "
              f"model", file=sys.stderr)
        return 1
    return 0


def cmd_compare(cfg: RunConfig) -> int:
    strong = load_model(cfg.models[0])
    weak = load_model(cfg.models[1])
    method = cfg.method or "grid"
    report = compare_models(strong, weak, resolution=cfg.grid,
                            residual=cfg.residual, horizon=cfg.horizon,
                            method=method)
    report["strong_model"] = strong.name
    report["weak_model"] = weak.name
    _emit(report, cfg.out)
    if report["hypotheses_hold"] and not report["gap_ok"]:
        print(f"compare: value gap {report['min_gap']:.3e} below "
              f"-{report['slack']:.3e} with hypotheses holding",
              file=sys.stderr)
        return 1
    return 0


def cmd_gen(cfg: RunConfig) -> int:
    model = gen_example(cfg.name, **cfg.params)
    text = model_to_json(model)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


_COMMANDS = {
    "validate": cmd_validate,
    "check": cmd_check,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "compare": cmd_compare,
    "gen": cmd_gen,
}


def _parse_param(token: str):
    if "=" not in token:
        raise ValueError(f"expected name=value, got {token!r}")
    name, raw = token.split("=", 1)
    low = raw.strip().lower()
    if low in ("true", "false"):
        return name.strip(), low == "true"
    for cast in (int, float):
        try:
            return name.strip(), cast(raw)
        except ValueError:
            continue
    return name.strip(), raw


def _parse_tol(tokens: list[str]) -> dict[str, float]:
    out = {}
    for token in tokens:
        if "=" not in token:
            raise ValueError(f"--tol expects name=value, got {token!r}")
        name, raw = token.split("=", 1)
        out[name.strip()] = float(raw)
    return out


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", type=int, default=100, metavar="D",
                   help="belief-grid resolution (default 100)")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--horizon", type=int, metavar="K",
                      help="finite-horizon solve with K backups")
    mode.add_argument("--residual", type=float, metavar="TAU",
                      help="infinite-horizon proxy target (default 1e-8)")
    p.add_argument("--method", choices=("exact", "grid"),
                   help="solver backend (solve defaults to exact; "
                        "verify/compare default to grid)")
    p.add_argument("--out", metavar="FILE", help="write the JSON report here")
    p.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE",
                   help="override a named tolerance "
                        f"({', '.join(sorted(KNOWN_TOLERANCES))})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pomdpcheck",
        description="Stochastic-order checkers and POMDP solvers for "
                    "verifying monotone-policy structure.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a model file")
    p.add_argument("model")
    p.add_argument("--out", metavar="FILE")

    p = sub.add_parser("check", help="hypothesis report for one model")
    p.add_argument("model")
    p.add_argument("--out", metavar="FILE")

    p = sub.add_parser("solve", help="solve and emit value function/policy")
    p.add_argument("model")
    _add_solver_flags(p)
    p.add_argument("--csv", metavar="FILE",
                   help="write the belief-grid policy table here")

    p = sub.add_parser("verify", help="verify structural predictions")
    p.add_argument("model")
    _add_solver_flags(p)

    p = sub.add_parser("compare", help="compare strong vs weak sensing model")
    p.add_argument("strong")
    p.add_argument("weak")
    _add_solver_flags(p)

    p = sub.add_parser("gen", help="emit a bundled example model")
    p.add_argument("name", choices=list_examples())
    p.add_argument("--param", action="append", default=[],
                   metavar="NAME=VALUE", help="generator parameter")
    p.add_argument("--out", metavar="FILE", help="write the model JSON here")
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.command == "gen":
        return RunConfig(command="gen", name=args.name,
                         params=dict(_parse_param(t) for t in args.param),
                         out=args.out)
    cfg = RunConfig(
        command=args.command,
        models=[getattr(args, "model", None) or args.strong]
        if args.command != "compare" else [args.strong, args.weak],
        out=getattr(args, "out", None))
    if args.command in ("validate", "check"):
        return cfg
    cfg.grid = args.grid
    cfg.horizon = args.horizon
    cfg.residual = args.residual
    cfg.method = args.method
    cfg.csv = getattr(args, "csv", None)
    cfg.tolerances = _parse_tol(args.tol)
    cfg.__post_init__()
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        return _COMMANDS[cfg.command](cfg)
    except (ModelFormatError, ValueError, KeyError, TypeError,
            ArithmeticError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
