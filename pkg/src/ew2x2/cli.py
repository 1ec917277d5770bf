"""Command line: classify, simulate, sweep, verify-ce, oscillate, bank, verify-all.

Exit codes: 0 on success, 1 when a run contradicts a satisfied guarantee
(or an acceptance criterion fails), 2 on usage/config errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import acceptance
from .bank import bank_config_from_dict, run_bank_experiment, standard_configs
from .classifier import Agreement, check_prediction, classify
from .dynamics import simulate
from .equilibria import (
    JointDistribution,
    deviation_gains,
    is_correlated_eq_bruteforce,
    is_correlated_eq_closed_form,
)
from .errors import EW2x2Error, ConfigError
from .games import MixedStrategy, SymmetricGame, game_from_dict
from .reporting import (
    bank_csv,
    bank_summary_dict,
    dump_json,
    report_json_dict,
    summary_json_dict,
    to_json_text,
    trajectory_csv,
    verdict_to_json,
)
from .sweep import SweepConfig, run_sweep
from .theory import (
    construct_oscillation_identical,
    construct_oscillation_opposite,
    two_flip_bound,
)

RUN_CONFIG_SCHEMA = """\
run config JSON:
{
  "game":  {"a": 3.0, "b": 1.0, "c": 2.0, "d": 5.0},
  "init1": [0.4, 0.6],          # player 1 (P[theta1], P[theta2])
  "init2": [0.7, 0.3],
  "eta":   1.0,
  "horizon": 1000000            # optional
}"""

CE_CONFIG_SCHEMA = """\
verify-ce config JSON:
{
  "game": {"a": 3.0, "b": 1.0, "c": 2.0, "d": 5.0},
  "nu":   [0.25, 0.25, 0.25, 0.25]   # P[(t1,t1)], P[(t1,t2)], P[(t2,t1)], P[(t2,t2)]
}"""

BANK_CONFIG_SCHEMA = """\
bank config JSON:
{
  "dist": {"kind": "trunc_gauss", "mu": 0.3, "sigma": 0.1}
          | {"kind": "piecewise_uniform", "beta1": 0.01, "beta2": 0.95},
  "gamma_l": 0.4, "gamma_h": 0.8,
  "eta": 0.1,
  "init1": [0.1, 0.5, 0.3, 0.1],
  "init2": [0.1, 0.3, 0.5, 0.1],
  "horizon": 400000,
  "threshold_rule": "appendix" | "rational",   # optional (default appendix)
  "tau_l": 0.36, "tau_h": 0.42                 # optional explicit override
}"""


def _load_json(path: str, schema: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}\n{schema}") from exc


def _parse_run_config(record: dict) -> tuple[SymmetricGame, tuple[MixedStrategy, MixedStrategy], float, int]:
    try:
        game = game_from_dict(record["game"])
        init1 = MixedStrategy(*(float(x) for x in record["init1"]))
        init2 = MixedStrategy(*(float(x) for x in record["init2"]))
        eta = float(record["eta"])
        horizon = int(record.get("horizon", 1_000_000))
    except (KeyError, TypeError, ValueError, EW2x2Error) as exc:
        raise ConfigError(f"bad run config: {exc}\n{RUN_CONFIG_SCHEMA}") from exc
    return game, (init1, init2), eta, horizon


def _out_dir(args) -> Path | None:
    if args.out is None:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_classify(args) -> int:
    game, init, eta, _ = _parse_run_config(_load_json(args.config, RUN_CONFIG_SCHEMA))
    prediction = classify(game, init, args.eta if args.eta is not None else eta)
    text = to_json_text(prediction.to_json_dict())
    print(text)
    out = _out_dir(args)
    if out is not None:
        (out / "prediction.json").write_text(text + "\n")
    return 0


def _cmd_simulate(args) -> int:
    game, init, eta, horizon = _parse_run_config(_load_json(args.config, RUN_CONFIG_SCHEMA))
    if args.eta is not None:
        eta = args.eta
    if args.horizon is not None:
        horizon = args.horizon
    prediction = classify(game, init, eta)
    traj = simulate(game, init, eta, horizon=horizon, thinned=True)
    e1, e2 = game.eps()
    bound = None
    if e1 < 0.0 < e2:
        w1 = abs(init[0].log_ratio() - init[1].log_ratio())
        if w1 > 0.0:
            bound = two_flip_bound(game, eta, w1).n_max
    agreement = check_prediction(prediction, traj.verdict)
    summary = summary_json_dict(traj, prediction, bound)
    summary["agreement"] = agreement.value
    print(to_json_text(summary))
    out = _out_dir(args)
    if out is not None:
        if args.format in ("csv", "both"):
            (out / "trajectory.csv").write_text(trajectory_csv(traj))
        if args.format in ("json", "both"):
            dump_json(summary, out / "summary.json")
        from .plots import plot_trajectory

        plot_trajectory(traj, out / "trajectory.png")
    if agreement is Agreement.MISMATCH and prediction.eta_satisfied:
        return 1
    return 0


def _parse_signs(text: str) -> tuple[int, int]:
    table = {"-": -1, "0": 0, "+": 1}
    if len(text) != 2 or any(ch not in table for ch in text):
        raise ConfigError(f"--signs wants two of -/0/+, e.g. '-+', got {text!r}")
    return (table[text[0]], table[text[1]])


def _cmd_sweep(args) -> int:
    out = _out_dir(args)
    config = SweepConfig(
        seed=args.seed,
        count=args.count,
        etas=tuple(float(x) for x in args.etas.split(",")),
        horizon=args.horizon if args.horizon is not None else 1_000_000,
        payoff_range=(args.payoff_range[0], args.payoff_range[1]),
        init_mode=args.init_mode,
        regime_signs=_parse_signs(args.signs) if args.signs else None,
        workers=args.workers,
        keep_trajectories=out is not None,
    )
    report = run_sweep(config)
    doc = report_json_dict(report)
    if out is not None:
        if args.format in ("json", "both"):
            dump_json(doc, out / "report.json")
        if args.format in ("csv", "both"):
            runs_dir = out / "runs"
            runs_dir.mkdir(exist_ok=True)
            for rec in report.rows:
                if rec.trajectory is not None:
                    (runs_dir / f"run_{rec.index:05d}.csv").write_text(
                        trajectory_csv(rec.trajectory)
                    )
        from .plots import plot_report

        plot_report(report, out / "report.png")
    summary = {k: v for k, v in doc.items() if k != "rows"}
    print(to_json_text(summary))
    return 1 if report.mismatches_under_satisfied_requirements > 0 else 0


def _cmd_verify_ce(args) -> int:
    record = _load_json(args.config, CE_CONFIG_SCHEMA)
    try:
        game = game_from_dict(record["game"])
        nu = JointDistribution(*(float(x) for x in record["nu"]))
    except (KeyError, TypeError, ValueError, EW2x2Error) as exc:
        raise ConfigError(f"bad verify-ce config: {exc}\n{CE_CONFIG_SCHEMA}") from exc
    closed = is_correlated_eq_closed_form(game, nu)
    brute = is_correlated_eq_bruteforce(game, nu)
    doc = {
        "game": game.to_json_dict(),
        "nu": list(nu.as_tuple()),
        "closed_form": closed,
        "bruteforce": brute,
        "deviation_gains": list(deviation_gains(game, nu)),
        "agree": closed == brute,
    }
    print(to_json_text(doc))
    out = _out_dir(args)
    if out is not None:
        dump_json(doc, out / "verify_ce.json")
    return 0 if closed == brute else 1


def _cmd_oscillate(args) -> int:
    ctor = (
        construct_oscillation_identical
        if args.mode == "identical"
        else construct_oscillation_opposite
    )
    ex = ctor(args.a)
    traj = simulate(ex.game, ex.init, ex.eta, horizon=args.steps, early_stop=False, thinned=False)
    import numpy as np

    resid = float(
        max(
            np.abs(traj.u1[2:] - traj.u1[:-2]).max(),
            np.abs(traj.u2[2:] - traj.u2[:-2]).max(),
        )
    )
    move = float(min(np.abs(np.diff(traj.u1)).min(), np.abs(np.diff(traj.u2)).min()))
    e1, e2 = ex.game.eps()
    doc = {
        "mode": args.mode,
        "a": args.a,
        "game": ex.game.to_json_dict(),
        "eta": ex.eta,
        "eta_times_gap_sum": ex.eta * (abs(e1) + abs(e2)),
        "steps": args.steps,
        "period2_residual": resid,
        "min_step_movement": move,
        "verdict": verdict_to_json(traj.verdict),
    }
    print(to_json_text(doc))
    out = _out_dir(args)
    if out is not None:
        dump_json(doc, out / "oscillation.json")
        (out / "oscillation.csv").write_text(trajectory_csv(traj))
        from .plots import plot_oscillation

        plot_oscillation(traj, out / "oscillation.png")
    return 0


def _cmd_bank(args) -> int:
    if args.demo is not None:
        cfg = standard_configs()[args.demo]
    else:
        if args.config is None:
            raise ConfigError(f"bank needs --config FILE or --demo NAME\n{BANK_CONFIG_SCHEMA}")
        cfg = bank_config_from_dict(_load_json(args.config, BANK_CONFIG_SCHEMA))
    horizon = args.horizon if args.horizon is not None else cfg.horizon
    eta = args.eta if args.eta is not None else cfg.eta
    result = run_bank_experiment(cfg.dist, cfg.params, cfg.init1, cfg.init2, eta, horizon)
    doc = bank_summary_dict(result)
    print(to_json_text(doc))
    out = _out_dir(args)
    if out is not None:
        if args.format in ("csv", "both"):
            (out / "bank.csv").write_text(bank_csv(result))
        if args.format in ("json", "both"):
            dump_json(doc, out / "bank_summary.json")
        from .plots import plot_bank_run

        plot_bank_run(result, out / "bank.png")
    return 0


def _cmd_verify_all(args) -> int:
    results = acceptance.run_all(echo=True)
    out = _out_dir(args)
    if out is not None:
        dump_json(
            {
                "criteria": [
                    {
                        "id": r.cid,
                        "name": r.name,
                        "passed": r.passed,
                        "elapsed_s": r.elapsed,
                        "detail": r.detail,
                    }
                    for r in results
                ],
                "all_passed": all(r.passed for r in results),
            },
            out / "acceptance_report.json",
        )
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ew2x2",
        description="Exponential-weights dynamics on 2x2 symmetric games.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="predict the limit for a (game, init, eta)")
    p.add_argument("--config", required=True, help="run config JSON file")
    p.add_argument("--eta", type=float, default=None, help="override the config step size")
    p.add_argument("--out", default=None, help="directory for prediction.json")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("simulate", help="run the dynamic; emit CSV, JSON, and a figure")
    p.add_argument("--config", required=True, help="run config JSON file")
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--out", default=None, help="directory for trajectory.csv/summary.json/png")
    p.add_argument("--format", choices=("csv", "json", "both"), default="both",
                   help="which data files to write under --out")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="seeded prediction-vs-simulation campaign")
    p.add_argument("--random", action="store_true", help="random game source (the default)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--etas", default="1.0", help="comma-separated step sizes")
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument(
        "--init-mode",
        default="random",
        choices=("random", "identical", "opposite-sign", "same-sign", "equal-and-opposite"),
    )
    p.add_argument("--signs", default=None, help="force gap signs, two of -/0/+ (e.g. '-+')")
    p.add_argument("--payoff-range", nargs=2, type=float, default=(-2.0, 2.0))
    p.add_argument("--workers", type=int, default=0)
    p.add_argument("--out", default=None, help="directory for report.json, runs/, report.png")
    p.add_argument("--format", choices=("csv", "json", "both"), default="both",
                   help="which data files to write under --out")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("verify-ce", help="compare both correlated-equilibrium tests")
    p.add_argument("--config", required=True, help="game + joint distribution JSON")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_verify_ce)

    p = sub.add_parser("oscillate", help="build and run a period-2 counterexample")
    p.add_argument("--mode", choices=("identical", "opposite"), default="identical")
    p.add_argument("--a", type=float, required=True, help="orbit offset in log-ratio space")
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_oscillate)

    p = sub.add_parser("bank", help="run a two-bank mortgage competition experiment")
    p.add_argument("--config", default=None, help="bank config JSON file")
    p.add_argument("--demo", choices=("pp", "mm", "pm", "mp"), default=None)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--out", default=None, help="directory for bank.csv/bank_summary.json/png")
    p.add_argument("--format", choices=("csv", "json", "both"), default="both",
                   help="which data files to write under --out")
    p.set_defaults(func=_cmd_bank)

    p = sub.add_parser("verify-all", help="run the full acceptance campaign")
    p.add_argument("--out", default=None, help="directory for acceptance_report.json")
    p.set_defaults(func=_cmd_verify_all)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except EW2x2Error as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
