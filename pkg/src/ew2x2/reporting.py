"""Delimited and JSON emission for runs, bank experiments, and reports.

Floats are written with 17 significant digits in CSV (lossless round trip)
and through json's shortest-roundtrip repr in JSON; together with sorted
keys this makes all outputs byte-deterministic for a fixed config and seed.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Optional

import numpy as np

from .bank import ACTION_LABELS, BankRunResult
from .classifier import RegimePrediction
from .dynamics import LimitVerdict, Trajectory, VerdictKind, _stable_p
from .games import SymmetricGame
from .sweep import VerificationReport


def fmt17(x: float) -> str:
    return format(float(x), ".17g")


def verdict_to_json(v: LimitVerdict) -> dict:
    out: dict = {"tag": v.kind.value, "text": str(v)}
    if v.pair is not None:
        out["pair"] = [str(a) for a in v.pair]
    if v.profile is not None:
        out["profile"] = [list(s.as_tuple()) for s in v.profile]
    if not math.isnan(v.residual):
        out["residual"] = v.residual
    return out


def trajectory_csv(traj: Trajectory) -> str:
    """One row per recorded step.

    W/V are the unthinned potentials sampled at the recorded steps; the flip
    column counts how many players' offset signs changed on the transition
    leaving that step. All three are blank outside the opposite-sign gap
    regimes (and flip is blank on the final row, which has no transition).
    """
    lines = ["t,p11,p12,p21,p22,u1,u2,delta1,delta2,W,V,flip"]
    mixed = traj.w is not None
    for k in range(len(traj.t)):
        t = int(traj.t[k])
        u1 = float(traj.u1[k])
        u2 = float(traj.u2[k])
        p11, p12 = _stable_p(u1)
        p21, p22 = _stable_p(u2)
        if mixed:
            w = fmt17(traj.w[t - 1])
            v = fmt17(traj.v[t - 1])
            flip = str(int(traj.flip_counts[t - 1])) if t - 1 < len(traj.flip_counts) else ""
        else:
            w = v = flip = ""
        lines.append(
            ",".join(
                [
                    str(t),
                    fmt17(p11),
                    fmt17(p12),
                    fmt17(p21),
                    fmt17(p22),
                    fmt17(u1),
                    fmt17(u2),
                    fmt17(traj.d1[k]),
                    fmt17(traj.d2[k]),
                    w,
                    v,
                    flip,
                ]
            )
        )
    return "\n".join(lines) + "\n"


def summary_json_dict(
    traj: Trajectory,
    prediction: Optional[RegimePrediction] = None,
    bound_n_max: Optional[float] = None,
) -> dict:
    out = {
        "game": traj.game.to_json_dict(),
        "eta": traj.eta,
        "init": [list(s.as_tuple()) for s in traj.init],
        "verdict": verdict_to_json(traj.verdict),
        "steps": traj.steps,
        "events": [[int(ev.t), int(ev.kind)] for ev in traj.events],
        "bound_n_max": bound_n_max,
    }
    if prediction is not None:
        out["prediction"] = prediction.to_json_dict()
    return out


def bank_csv(result: BankRunResult) -> str:
    """t plus the 8 action weights (bank 1 then bank 2, in action order)."""
    cols = ["t"]
    for bank in ("b1", "b2"):
        for label in ("tl_gl", "tl_gh", "th_gl", "th_gh"):
            cols.append(f"{bank}_{label}")
    lines = [",".join(cols)]
    for k in range(len(result.t)):
        row = [str(int(result.t[k]))]
        row += [fmt17(x) for x in result.weights1[k]]
        row += [fmt17(x) for x in result.weights2[k]]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def bank_summary_dict(result: BankRunResult) -> dict:
    return {
        "params": {
            "gamma_l": result.params.gamma_l,
            "gamma_h": result.params.gamma_h,
            "tau_l": result.params.tau_l,
            "tau_h": result.params.tau_h,
        },
        "eta": result.eta,
        "reduced_game": result.reduced_game.to_json_dict(),
        "reduced_gaps": list(result.reduced_game.eps()),
        "steps": result.steps,
        "limit_actions": (
            [ACTION_LABELS[i] for i in result.limit_actions]
            if result.limit_actions is not None
            else None
        ),
        "dominated_max_final": result.dominated_max_final,
        "verdict_2x2": verdict_to_json(result.verdict_2x2),
        "final_weights": [
            [float(x) for x in result.weights1[-1]],
            [float(x) for x in result.weights2[-1]],
        ],
    }


def report_json_dict(report: VerificationReport) -> dict:
    # The worker count is deliberately not echoed: parallel and serial
    # executions of the same campaign must serialize identically.
    cfg = report.config
    return {
        "rng": report.rng_algorithm,
        "config": {
            "seed": cfg.seed,
            "count": cfg.count,
            "etas": list(cfg.etas),
            "horizon": cfg.horizon,
            "payoff_range": list(cfg.payoff_range),
            "init_mode": cfg.init_mode,
            "regime_signs": list(cfg.regime_signs) if cfg.regime_signs else None,
        },
        "total_runs": report.total,
        "by_row": report.by_row,
        "mismatches_under_satisfied_requirements": report.mismatches_under_satisfied_requirements,
        "rows": [
            {
                "index": r.index,
                "game": r.game.to_json_dict(),
                "init": [list(s.as_tuple()) for s in r.init],
                "eta": r.eta,
                "row": r.prediction.row.value,
                "prediction": r.prediction.to_json_dict(),
                "verdict": verdict_to_json(r.verdict),
                "agreement": r.agreement.value,
                "steps": r.steps,
                "two_flips": r.two_flips,
                "one_flips": r.one_flips,
                "bound_n_max": r.bound_n_max,
            }
            for r in report.rows
        ],
    }


def dump_json(obj: dict, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def to_json_text(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)
