"""Command line interface: batch analyses over scenario files.

    agentcap <solve|alpha-star|verify|sweep|capstruct|kkt>
             --scenario PATH [flags] --out DIR

Each command reads one scenario JSON, writes CSV tables plus a summary.json
under --out, and exits 0 on success. Exit codes: 2 scenario parse, 3
validation or configuration, 4 enumeration budget, 5 empty selection, 6
convergence failure. CSV cells use 12 significant digits and newline-only
line endings, so repeated runs on the same inputs are byte-identical; the
summary additionally carries runtime metadata.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import capstruct, kkt, model, scaling
from .errors import (
    BudgetExceededError,
    ConfigurationError,
    ConvergenceError,
    DegenerateFitError,
    EmptySelectionError,
    ScenarioParseError,
    SingularJacobianError,
    ValidationError,
)
from .model import (
    AgentUtility,
    DebtFamily,
    EffortCost,
    GridFamily,
    LinearShareFamily,
    LiveOrDieFamily,
    MonotoneBoundedSlopeFamily,
    OutputFunction,
    Profile,
    QuadraticCost,
    RelativeEntropyCost,
    Scenario,
    StateSpace,
    TableCost,
    grid_values,
    validate_scenario,
)
from .pareto import Enumeration, select

SCHEMA_VERSION = "1"


# ---------------------------------------------------------------------------
# Scenario (de)serialization


def _section(data: dict, key: str) -> tuple[str, dict]:
    sec = data[key]
    if not isinstance(sec, dict) or "kind" not in sec:
        raise ScenarioParseError(f"{key} must be an object with 'kind' and 'params'")
    params = sec.get("params", {})
    if not isinstance(params, dict):
        raise ScenarioParseError(f"{key} params must be an object")
    return str(sec["kind"]), params


def _cost_from(kind: str, params: dict):
    if kind == "quadratic":
        return QuadraticCost(params["Q"], params["q0"])
    if kind == "relative-entropy":
        return RelativeEntropyCost(params["theta"], params["q0"])
    if kind == "table":
        return TableCost(tuple(tuple(p) for p in params["points"]), params["values"])
    if kind == "effort":
        return EffortCost(
            params["efforts"],
            tuple(tuple(d) for d in params["distributions"]),
            params["costs"],
        )
    raise ScenarioParseError(f"unknown cost kind {kind!r}")


def _per_state_grids(params: dict, n: int) -> tuple[tuple[float, ...], ...]:
    """Per-state value grids; a single flat grid or {min,max,step} is shared."""
    values = params["values"]
    if isinstance(values, dict):
        return tuple(grid_values(values) for _ in range(n))
    if isinstance(values, (list, tuple)) and values and not isinstance(values[0], (list, tuple, dict)):
        shared = grid_values(values)
        return tuple(shared for _ in range(n))
    return tuple(grid_values(v) for v in values)


def _family_from(kind: str, params: dict, n: int):
    if kind == "grid":
        return GridFamily(_per_state_grids(params, n))
    if kind == "monotone-bounded-slope":
        return MonotoneBoundedSlopeFamily(_per_state_grids(params, n))
    if kind == "linear-share":
        return LinearShareFamily(grid_values(params["betas"]), grid_values(params["ws"]))
    if kind == "debt":
        return DebtFamily(grid_values(params["faces"]))
    if kind == "live-or-die":
        return LiveOrDieFamily(grid_values(params["thresholds"]))
    raise ScenarioParseError(f"unknown contract family kind {kind!r}")


def _utility_from(kind: str, params: dict) -> AgentUtility:
    if kind == "risk_neutral":
        return AgentUtility()
    if kind == "cara":
        return AgentUtility("cara", a=params["a"])
    if kind == "crra":
        return AgentUtility("crra", gamma=params["gamma"], shift=params.get("shift"))
    raise ScenarioParseError(f"unknown utility kind {kind!r}")


def scenario_from_dict(data) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioParseError("scenario must be a JSON object")
    try:
        states = StateSpace(tuple(data["states"]))
        cost_kind, cost_params = _section(data, "cost")
        fam_kind, fam_params = _section(data, "contract_family")
        if "utility" in data:
            util_kind, util_params = _section(data, "utility")
        else:
            util_kind, util_params = "risk_neutral", {}
        tolerances = data.get("tolerances") or {}
        return Scenario(
            states=states,
            y=OutputFunction(tuple(data["output"])),
            cost=_cost_from(cost_kind, cost_params),
            capacity=data["capacity"],
            family=_family_from(fam_kind, fam_params, states.n),
            utility=_utility_from(util_kind, util_params),
            reservation=data["reservation"],
            m=data["simplex_grid"],
            tol_u=tolerances.get("tol_u", model.DEFAULT_TOL_U),
        )
    except KeyError as exc:
        raise ScenarioParseError(f"scenario missing key {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ScenarioParseError(f"scenario structure: {exc}") from None


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "states": list(s.states.labels),
        "output": list(s.y.values),
        "cost": {"kind": s.cost.kind, "params": s.cost.params_dict()},
        "capacity": s.capacity,
        "contract_family": {"kind": s.family.kind, "params": s.family.params_dict()},
        "utility": {"kind": s.utility.kind, "params": s.utility.params_dict()},
        "reservation": s.reservation,
        "simplex_grid": s.m,
        "tolerances": {"tol_u": s.tol_u},
    }


def load_scenario(path) -> Scenario:
    """Read, parse, and validate a scenario file."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ScenarioParseError(f"cannot read scenario {p}: {exc.strerror or exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"{p}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    s = scenario_from_dict(data)
    report = validate_scenario(s)
    if not report.passed:
        raise ValidationError("; ".join(report.failures))
    return s


def save_scenario(s: Scenario, path) -> None:
    with open(path, "w") as fh:
        json.dump(scenario_to_dict(s), fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Output writers


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "" if math.isnan(v) else format(float(v), ".12g")
    return str(v)


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_summary(args, outdir: Path, extra: dict) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": args.command,
        "scenario": str(args.scenario),
        "scenario_digest": _digest(args.scenario),
        "runtime_seconds": round(time.perf_counter() - args.t0, 6),
    }
    doc.update(extra)
    with open(outdir / "summary.json", "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _profile_header(s: Scenario) -> list[str]:
    return (
        ["contract"]
        + [f"b_{lab}" for lab in s.states.labels]
        + [f"p_{lab}" for lab in s.states.labels]
        + ["agent_utility", "principal_payoff", "capacity_binding"]
    )


def _profile_row(pf: Profile) -> list:
    return (
        [pf.contract_label]
        + list(pf.contract.payments)
        + list(pf.dist.probs)
        + [pf.agent_utility, pf.principal_payoff, bool(pf.capacity_binding)]
    )


def _profile_dict(pf: Profile | None) -> dict | None:
    if pf is None:
        return None
    return {
        "contract": pf.contract_label,
        "payments": list(pf.contract.payments),
        "probs": list(pf.dist.probs),
        "agent_utility": pf.agent_utility,
        "principal_payoff": pf.principal_payoff,
        "capacity_binding": bool(pf.capacity_binding),
        "cost": None if math.isnan(pf.cost) else pf.cost,
    }


def _slacks_dict(sl: scaling.InequalitySlacks | None) -> dict | None:
    if sl is None:
        return None
    return {
        "output_payment": sl.output_payment,
        "payment_scaled_output": sl.payment_scaled_output,
        "scaled_output": sl.scaled_output,
        "participation": sl.participation,
        "d_output": sl.d_output,
        "d_payment": sl.d_payment,
    }


def _float_list(text: str, flag: str) -> list[float]:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise ConfigurationError(f"{flag} expects comma-separated numbers, got {text!r}") from None
    if not values:
        raise ConfigurationError(f"{flag} expects at least one value")
    return values


def _check_alpha(alpha: float) -> float:
    if not 0.0 <= alpha <= 1.0 or not math.isfinite(alpha):
        raise ConfigurationError("alpha out of [0,1]")
    return float(alpha)


# ---------------------------------------------------------------------------
# Commands


def cmd_solve(args) -> int:
    s = load_scenario(args.scenario)
    alpha = _check_alpha(args.alpha)
    outdir = _outdir(args)
    enum = Enumeration(s, budget=args.budget)
    ps = enum.pareto_at(alpha)
    sel = select(ps, s.reservation)
    header = _profile_header(s)
    _write_csv(outdir / "pareto.csv", header, (_profile_row(p) for p in ps.profiles))
    _write_csv(outdir / "selection.csv", header, (_profile_row(p) for p in sel.profiles))
    _write_summary(
        args,
        outdir,
        {
            "alpha": alpha,
            "reservation": s.reservation,
            "n_frontier": len(ps.profiles),
            "n_selected": len(sel.profiles),
            "chosen_level": sel.chosen_level,
            "agent_utility_levels": list(ps.agent_utility_levels),
        },
    )
    return 0


def cmd_alpha_star(args) -> int:
    s = load_scenario(args.scenario)
    outdir = _outdir(args)
    res = scaling.alpha_star(s, eps=args.eps, budget=args.budget)
    _write_csv(
        outdir / "trace.csv",
        ["alpha", "all_slack"],
        ((a, ok) for a, ok in res.predicate_trace),
    )
    _write_summary(
        args,
        outdir,
        {
            "alpha_star": res.alpha_star,
            "bracket_low": res.bracket[0],
            "bracket_high": res.bracket[1],
            "eps": args.eps,
            "u_bar": res.u_bar,
            "monotone_warning": res.monotone_warning,
            "witness_alpha": res.witness_alpha,
            "slack_witness": _profile_dict(res.slack_witness),
        },
    )
    return 0


def cmd_verify(args) -> int:
    s = load_scenario(args.scenario)
    outdir = _outdir(args)
    alphas = None
    if args.alpha_grid is not None:
        alphas = [_check_alpha(a) for a in _float_list(args.alpha_grid, "--alpha-grid")]
    rep = scaling.verify_theorem(s, alphas=alphas, eps=args.eps, budget=args.budget)
    header = [
        "alpha",
        "tested",
        "reason",
        "inclusion_ok",
        "converse_ok",
        "n_candidates",
        "n_binding",
        "slack_output_payment",
        "slack_payment_scaled_output",
        "slack_scaled_output",
        "slack_participation",
        "d_output",
        "d_payment",
        "step2_dev",
    ]
    rows = []
    for chk in rep.checks:
        w = chk.worst
        rows.append(
            [
                chk.alpha,
                chk.tested,
                chk.reason,
                chk.inclusion_ok,
                chk.converse_ok,
                chk.n_candidates,
                chk.n_binding,
                w.output_payment if w else None,
                w.payment_scaled_output if w else None,
                w.scaled_output if w else None,
                w.participation if w else None,
                w.d_output if w else None,
                w.d_payment if w else None,
                chk.step2_dev,
            ]
        )
    _write_csv(outdir / "checks.csv", header, rows)
    _write_summary(
        args,
        outdir,
        {
            "reservation": s.reservation,
            "base_profile": _profile_dict(rep.base_profile),
            "base_level": rep.base_level,
            "u_bar": rep.u_bar,
            "alpha_star": rep.alpha_result.alpha_star,
            "bracket_low": rep.alpha_result.bracket[0],
            "bracket_high": rep.alpha_result.bracket[1],
            "monotone_warning": rep.alpha_result.monotone_warning,
            "n_checks": len(rep.checks),
            "n_tested": sum(1 for c in rep.checks if c.tested),
            "inclusion_ok": rep.inclusion_ok,
            "converse_ok": rep.converse_ok,
            "worst_slacks": _slacks_dict(rep.worst_slacks),
            "step2_max_dev": rep.step2_max_dev,
            "slack_witness_ok": rep.slack_witness_ok,
        },
    )
    return 0


def cmd_sweep(args) -> int:
    s = load_scenario(args.scenario)
    outdir = _outdir(args)
    ks = _float_list(args.k_grid, "--k-grid")
    pairs = capstruct.sweep_alpha_star(s, ks)
    _write_csv(outdir / "sweep.csv", ["k", "alpha_star"], pairs)
    stars = [a for _, a in pairs]
    _write_summary(
        args,
        outdir,
        {
            "k_grid": [k for k, _ in pairs],
            "alpha_star": stars,
            "nondecreasing": all(
                b >= a - scaling.DEFAULT_EPS_ALPHA for a, b in zip(stars, stars[1:])
            ),
        },
    )
    return 0


def cmd_capstruct(args) -> int:
    s = load_scenario(args.scenario)
    outdir = _outdir(args)
    if args.alpha_star_override is not None:
        astar = _check_alpha(args.alpha_star_override)
    else:
        astar = scaling.alpha_star(s, budget=args.budget).alpha_star
    labels = s.states.labels
    if args.face is not None:
        dec = capstruct.debt_equity_decompose(s.y, args.face, astar)
        rows = zip(labels, s.y.values, dec.agent_leg, dec.debt_leg, dec.equity_leg)
        _write_csv(outdir / "legs.csv", ["state", "output", "agent_leg", "debt_leg", "equity_leg"], rows)
        extra = {"mode": "debt-equity", "face": dec.F, "face_scaled": dec.face_scaled}
    else:
        dec = capstruct.live_or_die_decompose(s.y, args.threshold, astar)
        rows = zip(labels, s.y.values, dec.agent_leg, dec.principal_leg)
        _write_csv(outdir / "legs.csv", ["state", "output", "agent_leg", "principal_leg"], rows)
        extra = {"mode": "live-or-die", "threshold": dec.l}
    extra["alpha_star"] = astar
    extra["alpha_star_solved"] = args.alpha_star_override is None
    _write_summary(args, outdir, extra)
    return 0


def cmd_kkt(args) -> int:
    s = load_scenario(args.scenario)
    outdir = _outdir(args)
    tokens = set() if args.active_set == "none" else {t.strip() for t in args.active_set.split(",") if t.strip()}
    unknown = tokens - {"capacity", "participation"}
    if unknown:
        raise ConfigurationError(f"unknown --active-set entry {sorted(unknown)[0]!r}")
    point = kkt.solve_principal_foc(
        s,
        kkt.make_initial_point(s),
        max_iter=args.max_iter,
        tol=args.tol,
        capacity_active="capacity" in tokens,
        participation_active="participation" in tokens,
    )
    res = point.residuals
    rows = zip(
        s.states.labels,
        point.b.payments,
        point.p.probs,
        point.phi,
        res.stationarity_b,
        res.stationarity_p,
        res.agent_foc,
    )
    _write_csv(
        outdir / "residuals.csv",
        ["state", "b", "p", "phi", "stationarity_b", "stationarity_p", "agent_foc"],
        rows,
    )
    summary = {
        "active_set": sorted(tokens),
        "rho": point.rho,
        "mu": point.mu,
        "tau": point.tau,
        "delta": point.delta,
        "zeta": point.zeta,
        "orthogonality": res.orthogonality,
        "simplex_gap": res.simplex_gap,
        "capacity_gap": res.capacity_gap,
        "participation_gap": res.participation_gap,
        "system_residual": point.system_residual,
        "max_residual": res.max_abs,
        "converged": point.converged,
    }
    try:
        fit = kkt.affine_representation_check(s, point)
        summary["affine"] = {
            "slope": fit.slope,
            "intercept": fit.intercept,
            "curvature": fit.curvature,
            "fit_residual": fit.fit_residual,
        }
    except DegenerateFitError as exc:
        summary["affine_error"] = str(exc)
    _write_summary(args, outdir, summary)
    if not point.converged:
        print(
            f"agentcap: stationarity solve did not converge (residual {point.system_residual:g})",
            file=sys.stderr,
        )
        return 6
    return 0


# ---------------------------------------------------------------------------
# Dispatch


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="agentcap",
        description="Capacity-constrained principal-agent solves over scenario files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, budget=True):
        p.add_argument("--scenario", required=True, help="scenario JSON file")
        p.add_argument("--out", required=True, help="directory for CSV and summary outputs")
        if budget:
            p.add_argument(
                "--budget",
                type=int,
                default=None,
                help="enumeration budget, contracts times grid points (default 1e7)",
            )

    p = sub.add_parser("solve", help="Pareto frontier and reservation selection at one alpha")
    common(p)
    p.add_argument("--alpha", type=float, default=1.0, help="output scale in [0,1] (default 1)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("alpha-star", help="capacity-slack threshold by bisection")
    common(p)
    p.add_argument("--eps", type=float, default=scaling.DEFAULT_EPS_ALPHA, help="bisection width")
    p.set_defaults(func=cmd_alpha_star)

    p = sub.add_parser("verify", help="frontier inclusion and payoff-chain checks over an alpha grid")
    common(p)
    p.add_argument("--alpha-grid", default=None, help="comma-separated alphas (default 0,0.1,...,1)")
    p.add_argument("--eps", type=float, default=scaling.DEFAULT_EPS_ALPHA, help="bisection width")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="capacity-slack threshold across capacity bounds")
    common(p)
    p.add_argument("--k-grid", required=True, help="comma-separated capacity values")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("capstruct", help="debt-plus-equity or live-or-die decomposition")
    common(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--face", type=float, default=None, help="debt face value")
    g.add_argument("--threshold", type=float, default=None, help="live-or-die output threshold")
    p.add_argument(
        "--alpha-star",
        dest="alpha_star_override",
        type=float,
        default=None,
        help="use this scale instead of solving for the threshold",
    )
    p.set_defaults(func=cmd_capstruct)

    p = sub.add_parser("kkt", help="stationarity-system solve and affine payment fit")
    common(p, budget=False)
    p.add_argument(
        "--active-set",
        default="participation",
        help="binding constraints: none, capacity, participation, or capacity,participation",
    )
    p.add_argument("--tol", type=float, default=1e-10, help="convergence tolerance")
    p.add_argument("--max-iter", type=int, default=200, help="iteration cap")
    p.set_defaults(func=cmd_kkt)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    args.t0 = time.perf_counter()
    try:
        return args.func(args)
    except ScenarioParseError as exc:
        return _fail(2, exc)
    except BudgetExceededError as exc:
        return _fail(4, exc)
    except EmptySelectionError as exc:
        return _fail(5, exc)
    except (ConvergenceError, SingularJacobianError) as exc:
        return _fail(6, exc)
    except (ValidationError, ConfigurationError) as exc:
        return _fail(3, exc)


def _fail(code: int, exc: Exception) -> int:
    print(f"agentcap: {exc}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
