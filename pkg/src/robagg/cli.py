"""Command-line front end.

One command per invocation, driven entirely by a scenario file::

    robagg <command> --scenario <path> [--csv <path>] [--seed <u64>]
                     [--samples <n>] [--tol <float>]

Every command is a pure function of its scenario document: reruns on the
same file produce byte-identical CSV output (rows sorted, floats printed
with 12 significant digits, RFC-4180 quoting). The human-readable table on
stdout carries the same cells plus a few summary lines.

Exit codes: 0 success, 2 malformed input or schema violation, 3 a solver
failed to converge, 4 the requested object does not exist (e.g. an empty
ball intersection).
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from typing import Callable, Optional, Sequence

import numpy as np

from .aggregation import (
    kl_project_to_intersection,
    social_belief_for_act,
    social_utility,
)
from .balls import chernoff_point
from .criteria import BallIntersection, Planner
from .divergences import CHI2_PHI
from .errors import RobaggError, SchemaError
from .scenarios import (
    COMMANDS,
    EstimationInput,
    ScenarioFile,
    _parse_lambda,
    asdf,
    demo_dictator,
    demo_invariance,
    ellsberg_run,
    estimate_parameters,
    james_stein_wle,
    load_scenario,
    sdf_project,
    treatment_solve,
)
from .simplex import Dist

__all__ = ["main", "build_parser"]

Row = Sequence[object]
HandlerOut = tuple[list[str], list[str], list[Row]]


# ---------------------------------------------------------------------------
# formatting
# ---------------------------------------------------------------------------

def _fmt(x: object) -> str:
    """One canonical string per cell: %.12g floats, true/false booleans."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.12g" % float(x)
    return str(x)


def _print_table(header: list[str], rows: list[list[str]]) -> None:
    widths = [
        max(len(h), *(len(r[j]) for r in rows)) if rows else len(h)
        for j, h in enumerate(header)
    ]
    print("  ".join(h.ljust(widths[j]) for j, h in enumerate(header)).rstrip())
    print("  ".join("-" * w for w in widths))
    for r in rows:
        print("  ".join(c.ljust(widths[j]) for j, c in enumerate(r)).rstrip())


def _write_csv(path: str, header: list[str], rows: list[list[str]]) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(
                fh, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n"
            )
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise SchemaError(f"cannot write CSV file: {exc}") from exc


# ---------------------------------------------------------------------------
# scenario plumbing
# ---------------------------------------------------------------------------

def _need(params: dict, key: str):
    if key not in params:
        raise SchemaError(f"command_params is missing {key!r}")
    return params[key]


def _require_profile(sc: ScenarioFile):
    if sc.profile is None:
        raise SchemaError(f"command {sc.command!r} needs an agents section")
    return sc.profile


def _require_states(sc: ScenarioFile):
    if sc.states is None:
        raise SchemaError(f"command {sc.command!r} needs a states array")
    return sc.states


def _lambda_sweep(sc: ScenarioFile) -> list[float]:
    """The planner's lambda, or an explicit sweep from command_params."""
    raw = sc.command_params.get("lambdas")
    if raw is None:
        return [sc.lam]
    if not isinstance(raw, list) or not raw:
        raise SchemaError("lambdas must be a nonempty array")
    return [_parse_lambda(x) for x in raw]


# ---------------------------------------------------------------------------
# command handlers
# ---------------------------------------------------------------------------

def _cmd_evaluate(sc: ScenarioFile, args) -> HandlerOut:
    profile = _require_profile(sc)
    if not profile.acts:
        raise SchemaError("evaluate needs at least one act")
    structured = sc.structured
    if structured is None:
        structured = BallIntersection(profile.balls())
    penalty = CHI2_PHI if sc.penalty == "chi2" else "kl"
    planner = Planner(lam=sc.lam, penalty=penalty, structured=structured)
    rows: list[Row] = []
    for act_id in sorted(profile.acts):
        u0 = social_utility(profile, act_id)
        rows.append((act_id, planner.value(u0)))
    notes = [
        f"evaluate: {len(rows)} act(s), lambda={_fmt(sc.lam)}, "
        f"penalty={sc.penalty}"
    ]
    return notes, ["act", "value"], rows


def _cmd_aggregate(sc: ScenarioFile, args) -> HandlerOut:
    profile = _require_profile(sc)
    if not profile.acts:
        raise SchemaError("aggregate needs at least one act")
    if math.isinf(sc.lam):
        raise SchemaError("aggregate needs a finite lambda")
    balls = profile.balls()
    space = profile.space
    rows: list[Row] = []
    for act_id in sorted(profile.acts):
        u0 = social_utility(profile, act_id)
        levels = profile.acts[act_id]
        res = social_belief_for_act(u0, levels, balls, profile.beta, sc.lam)
        for s, name in enumerate(space.labels):
            rows.append((act_id, f"belief[{name}]", res.belief.probs[s]))
        for level, w in res.weights_by_level.items():
            for i, agent in enumerate(profile.agents):
                rows.append((act_id, f"weight[{level}][{agent.name}]", w[i]))
        rows.append((act_id, "kkt_residual", res.kkt_residual))
        rows.append(
            (act_id, "reconstruction_residual", res.reconstruction_residual)
        )
        rows.append((act_id, "ill_conditioned", res.ill_conditioned))
    notes = [
        f"aggregate: {len(profile.acts)} act(s), lambda={_fmt(sc.lam)}"
    ]
    return notes, ["act", "quantity", "value"], rows


def _cmd_project(sc: ScenarioFile, args) -> HandlerOut:
    profile = _require_profile(sc)
    states = _require_states(sc)
    p_star = Dist(states, _need(sc.command_params, "p_star"))
    use_beta = bool(sc.command_params.get("use_beta", False))
    beta = profile.beta if use_beta else None
    res = kl_project_to_intersection(p_star, profile.balls(), beta=beta)
    if use_beta:
        active = [i for i in range(len(profile.agents)) if profile.beta[i] > 0.0]
    else:
        active = list(range(len(profile.agents)))
    rows: list[Row] = [("sigma", res.sigma)]
    for s, name in enumerate(states.labels):
        rows.append((f"projected[{name}]", res.projected.probs[s]))
    for j, i in enumerate(active):
        rows.append(
            (f"mixture_weight[{profile.agents[i].name}]", res.mixture_weights[j])
        )
    notes = [f"project: sigma={_fmt(res.sigma)}"]
    return notes, ["quantity", "value"], rows


def _cmd_chernoff(sc: ScenarioFile, args) -> HandlerOut:
    profile = _require_profile(sc)
    res = chernoff_point([a.reference for a in profile.agents])
    rows: list[Row] = [
        ("radius", res.radius),
        ("residual", res.residual),
        ("degenerate", res.degenerate),
    ]
    for s, name in enumerate(profile.space.labels):
        rows.append((f"point[{name}]", res.point.probs[s]))
    for i, agent in enumerate(profile.agents):
        rows.append((f"weight[{agent.name}]", res.weights[i]))
    notes = [f"chernoff: radius={_fmt(res.radius)}"]
    return notes, ["quantity", "value"], rows


def _cmd_treatment(sc: ScenarioFile, args) -> HandlerOut:
    params = sc.command_params
    welfare = _need(params, "welfare")
    if "mus" in params:
        raw_mus = params["mus"]
        if not isinstance(raw_mus, list) or not raw_mus:
            raise SchemaError("mus must be a nonempty array")
        mus = [float(m) for m in raw_mus]
    else:
        mus = [float(_need(params, "mu"))]
    rows: list[Row] = []
    for lam in _lambda_sweep(sc):
        for mu in mus:
            beta_hat, value = treatment_solve(welfare, lam, mu)
            rows.append((lam, mu, beta_hat, value))
    notes = [f"treatment: {len(rows)} (lambda, mu) cell(s)"]
    return notes, ["lambda", "mu", "beta_hat", "value"], rows


def _cmd_ellsberg(sc: ScenarioFile, args) -> HandlerOut:
    params = sc.command_params
    p1 = float(_need(params, "p1"))
    p2 = float(_need(params, "p2"))
    mu = float(_need(params, "mu"))
    rows: list[Row] = []
    notes: list[str] = []
    for lam in sorted(_lambda_sweep(sc)):
        rep = ellsberg_run(lam, p1, p2, mu)
        for name in sorted(rep.values):
            rows.append((lam, name, rep.values[name]))
        notes.append(f"lambda={_fmt(lam)}: {rep.ranking}")
    return notes, ["lambda", "position", "value"], rows


def _cmd_estimate(sc: ScenarioFile, args) -> HandlerOut:
    params = sc.command_params
    wealth = _need(params, "wealth")
    ce_lottery = _need(params, "ce_lottery")
    for name, v in (("wealth", wealth), ("ce_lottery", ce_lottery)):
        if not isinstance(v, list) or len(v) != 2:
            raise SchemaError(f"{name} must be an array of exactly two numbers")
    inp = EstimationInput(
        wealth=(float(wealth[0]), float(wealth[1])),
        ce_lottery=(float(ce_lottery[0]), float(ce_lottery[1])),
        ce_social_lottery=float(_need(params, "ce_social_lottery")),
        ce_ambiguous=float(_need(params, "ce_ambiguous")),
        stake=float(params.get("stake", 100.0)),
    )
    res = estimate_parameters(inp)
    rows: list[Row] = [
        ("phi_1", res.phi_hats[0]),
        ("phi_2", res.phi_hats[1]),
        ("beta_1", res.beta_hats[0]),
        ("beta_2", res.beta_hats[1]),
        ("lambda", res.lambda_hat),
    ]
    notes = [f"estimate: lambda_hat={_fmt(res.lambda_hat)}"]
    return notes, ["parameter", "estimate"], rows


def _cmd_asdf(sc: ScenarioFile, args) -> HandlerOut:
    params = sc.command_params
    states = _require_states(sc)
    q0 = Dist(states, _need(params, "q0"))
    res = asdf(
        q0,
        np.asarray(_need(params, "u0_C1"), dtype=float),
        sc.lam,
        float(_need(params, "psi")),
        np.asarray(_need(params, "payoff"), dtype=float),
        np.asarray(_need(params, "u0prime_ratio"), dtype=float),
    )
    rows: list[Row] = [("pre_price", res.pre_price), ("premium", res.premium)]
    for s, name in enumerate(states.labels):
        rows.append((f"tilt[{name}]", res.tilt.probs[s]))
        rows.append((f"post_price[{name}]", res.post_prices.values[s]))
    notes = [
        f"asdf: pre_price={_fmt(res.pre_price)} premium={_fmt(res.premium)}"
    ]
    return notes, ["quantity", "value"], rows


def _cmd_sdf(sc: ScenarioFile, args) -> HandlerOut:
    params = sc.command_params
    states = _require_states(sc)
    q0 = Dist(states, _need(params, "q0"))
    tilt, ell = sdf_project(
        q0,
        np.asarray(_need(params, "payoff_v"), dtype=float),
        float(_need(params, "target")),
    )
    rows: list[Row] = [("ell", ell)]
    for s, name in enumerate(states.labels):
        rows.append((f"tilt[{name}]", tilt.probs[s]))
    notes = [f"sdf: ell={_fmt(ell)}"]
    return notes, ["quantity", "value"], rows


def _cmd_jamesstein(sc: ScenarioFile, args) -> HandlerOut:
    params = sc.command_params
    signals = _need(params, "signals")
    if not isinstance(signals, list):
        raise SchemaError("signals must be an array")
    weights = params.get("weights")
    if weights is not None and not isinstance(weights, list):
        raise SchemaError("weights must be an array when present")
    estimate = james_stein_wle(signals, weights)
    rows: list[Row] = [
        ("estimate", estimate),
        ("mode", "explicit" if weights is not None else "preset"),
        ("n_advisors", len(signals) - 1),
    ]
    notes = [f"jamesstein: estimate={_fmt(estimate)}"]
    return notes, ["quantity", "value"], rows


def _cmd_demo_invariance(sc: ScenarioFile, args) -> HandlerOut:
    profile = _require_profile(sc)
    params = sc.command_params
    if "act" in params:
        act_id = str(params["act"])
        if act_id not in profile.acts:
            raise SchemaError(f"act {act_id!r} is not declared")
        u0 = social_utility(profile, act_id).values
    elif "u0" in params:
        u0 = np.asarray(params["u0"], dtype=float)
    else:
        raise SchemaError("demo-invariance needs an 'act' id or a 'u0' array")
    samples = args.samples if args.samples is not None else int(
        params.get("samples", 1000)
    )
    seed = args.seed if args.seed is not None else int(params.get("seed", 0))
    tol = args.tol if args.tol is not None else float(params.get("tol", 1e-8))
    rep = demo_invariance(
        u0,
        [a.reference for a in profile.agents],
        sc.lam,
        samples=samples,
        seed=seed,
        tol=tol,
    )
    rows: list[Row] = [
        ("max_gap", rep.max_gap),
        ("passes", rep.passes),
        ("minimizer_is_generator", rep.minimizer_is_generator),
        ("generator_value", rep.generator_value),
        ("samples", rep.samples),
    ]
    notes = [
        "demo-invariance: "
        + ("PASS" if rep.passes else "FAIL")
        + f" (max_gap={_fmt(rep.max_gap)} over {rep.samples} samples)"
    ]
    return notes, ["quantity", "value"], rows


def _cmd_demo_dictator(sc: ScenarioFile, args) -> HandlerOut:
    profile = _require_profile(sc)
    params = sc.command_params
    n_acts = int(params.get("n_acts", 20))
    seed = args.seed if args.seed is not None else int(params.get("seed", 0))
    rep = demo_dictator(
        [a.reference for a in profile.agents],
        lam=sc.lam,
        n_acts=n_acts,
        seed=seed,
        names=[a.name for a in profile.agents],
    )
    rows: list[Row] = [
        ("selected_index", rep.selected_index),
        ("selected_name", rep.selected_name),
        ("dominance_ok", rep.dominance_ok),
    ]
    sel = rep.selected_index
    for i, agent in enumerate(profile.agents):
        margin = float(np.min(rep.values[sel] - rep.values[i]))
        rows.append((f"min_margin[{agent.name}]", margin))
    notes = [
        f"demo-dictator: selected {rep.selected_name!r}, dominance "
        + ("holds" if rep.dominance_ok else "VIOLATED")
    ]
    return notes, ["quantity", "value"], rows


_HANDLERS: dict[str, Callable[[ScenarioFile, argparse.Namespace], HandlerOut]] = {
    "evaluate": _cmd_evaluate,
    "aggregate": _cmd_aggregate,
    "project": _cmd_project,
    "chernoff": _cmd_chernoff,
    "treatment": _cmd_treatment,
    "ellsberg": _cmd_ellsberg,
    "estimate": _cmd_estimate,
    "asdf": _cmd_asdf,
    "sdf": _cmd_sdf,
    "jamesstein": _cmd_jamesstein,
    "demo-invariance": _cmd_demo_invariance,
    "demo-dictator": _cmd_demo_dictator,
}

assert set(_HANDLERS) == set(COMMANDS)


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robagg",
        description="Robust belief aggregation: evaluate scenario files.",
    )
    parser.add_argument("command", choices=COMMANDS, help="what to compute")
    parser.add_argument(
        "--scenario", required=True, metavar="PATH",
        help="scenario JSON document (versioned schema)",
    )
    parser.add_argument(
        "--csv", metavar="PATH", help="also write the result table as CSV"
    )
    parser.add_argument(
        "--seed", type=int, metavar="U64",
        help="RNG seed for sampling commands (overrides the scenario)",
    )
    parser.add_argument(
        "--samples", type=int, metavar="N",
        help="sample count for sampling commands (overrides the scenario)",
    )
    parser.add_argument(
        "--tol", type=float, metavar="EPS",
        help="report tolerance for demo commands (overrides the scenario)",
    )
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.seed is not None and not (0 <= args.seed < 2 ** 64):
            raise SchemaError(f"--seed must fit in u64, got {args.seed}")
        if args.samples is not None and args.samples < 0:
            raise SchemaError(f"--samples must be nonnegative, got {args.samples}")
        if args.tol is not None and not args.tol > 0.0:
            raise SchemaError(f"--tol must be positive, got {args.tol}")
        scenario = load_scenario(args.scenario)
        if scenario.command != args.command:
            raise SchemaError(
                f"scenario file declares command {scenario.command!r} but "
                f"{args.command!r} was invoked"
            )
        notes, header, rows = _HANDLERS[args.command](scenario, args)
        formatted = sorted([_fmt(c) for c in row] for row in rows)
        for line in notes:
            print(line)
        _print_table(header, formatted)
        if args.csv:
            _write_csv(args.csv, header, formatted)
    except RobaggError as exc:
        print(f"robagg: error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
