import json
import math
import subprocess
import sys

import numpy as np
import pytest

from ew2x2.games import MixedStrategy, SymmetricGame, game_from_eps
from ew2x2.dynamics import simulate
from ew2x2.reporting import report_json_dict, to_json_text, trajectory_csv
from ew2x2.sweep import (
    SweepConfig,
    make_rng,
    random_game,
    random_game_in_regime,
    random_init,
    run_sweep,
)


class TestRandomSources:
    def test_seeded_determinism(self):
        g1 = [random_game(make_rng(7)) for _ in range(5)]
        g2 = [random_game(make_rng(7)) for _ in range(5)]
        assert g1 != [random_game(make_rng(8)) for _ in range(5)]
        assert g1 == g2

    def test_no_degenerate_draws(self):
        rng = make_rng(9)
        for _ in range(10_000):
            g = random_game(rng)
            assert abs(g.eps1()) >= 1e-3 and abs(g.eps2()) >= 1e-3

    def test_zero_gap_rows_are_constructed_exactly(self):
        rng = make_rng(10)
        for _ in range(100):
            g = random_game_in_regime(rng, 0, 1)
            assert g.eps1() == 0.0 and g.eps2() > 0.0
            assert g.a == g.b  # forced equality, not a lucky draw

    def test_init_modes_deliver_their_sign_patterns(self):
        from ew2x2.games import theta1_advantage

        rng = make_rng(11)
        g = random_game_in_regime(rng, -1, 1)
        s1, s2 = random_init(g, "opposite-sign", rng)
        assert theta1_advantage(g, s1) * theta1_advantage(g, s2) < 0.0
        s1, s2 = random_init(g, "same-sign", rng)
        d1, d2 = theta1_advantage(g, s1), theta1_advantage(g, s2)
        assert d1 * d2 > 0.0 and d1 != d2
        s1, s2 = random_init(g, "identical", rng)
        assert s1 == s2


class TestSweepReports:
    def test_byte_identical_reruns(self):
        cfg = SweepConfig(seed=7, count=12, etas=(0.5, 2.0), horizon=50_000)
        a = to_json_text(report_json_dict(run_sweep(cfg)))
        b = to_json_text(report_json_dict(run_sweep(cfg)))
        assert a == b

    def test_parallel_equals_serial(self):
        base = SweepConfig(seed=3, count=8, etas=(1.0,), horizon=50_000)
        par = SweepConfig(seed=3, count=8, etas=(1.0,), horizon=50_000, workers=2)
        assert to_json_text(report_json_dict(run_sweep(base))) == to_json_text(
            report_json_dict(run_sweep(par))
        )

    def test_aggregates_sum_to_total(self):
        report = run_sweep(SweepConfig(seed=5, count=15, etas=(1.0,), horizon=50_000))
        assert sum(b["total"] for b in report.by_row.values()) == report.total
        assert report.mismatches_under_satisfied_requirements == 0

    def test_random_campaign_has_no_mismatches(self):
        report = run_sweep(
            SweepConfig(seed=7, count=100, etas=(1.0,), horizon=10**6)
        )
        assert report.mismatches_under_satisfied_requirements == 0


class TestTrajectoryCsv:
    def test_format_and_determinism(self):
        g = game_from_eps(-1.0, 3.0)
        init = (MixedStrategy.from_log_ratio(1.4), MixedStrategy.from_log_ratio(0.7))
        t1 = simulate(g, init, 1.0, horizon=500, thinned=False)
        t2 = simulate(g, init, 1.0, horizon=500, thinned=False)
        text = trajectory_csv(t1)
        assert text == trajectory_csv(t2)
        header, first = text.splitlines()[0], text.splitlines()[1]
        assert header == "t,p11,p12,p21,p22,u1,u2,delta1,delta2,W,V,flip"
        fields = first.split(",")
        assert fields[0] == "1"
        # 17 significant digits round-trip exactly
        assert float(fields[5]) == t1.u1[0]

    def test_potentials_blank_outside_mixed_regimes(self):
        g = game_from_eps(1.0, 2.0)
        init = (MixedStrategy.from_log_ratio(0.2), MixedStrategy.from_log_ratio(-0.4))
        text = trajectory_csv(simulate(g, init, 1.0, horizon=100, thinned=False))
        first = text.splitlines()[1].split(",")
        assert first[9] == "" and first[10] == "" and first[11] == ""


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "ew2x2", *args], capture_output=True, text=True
    )


@pytest.fixture()
def run_config(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(
        json.dumps(
            {
                "game": {"a": 0.0, "b": 2.0, "c": 1.0, "d": 0.0},
                "init1": [0.6, 0.4],
                "init2": [0.3, 0.7],
                "eta": 1.0,
                "horizon": 100000,
            }
        )
    )
    return path


class TestCli:
    def test_classify_emits_prediction(self, run_config):
        proc = run_cli("classify", "--config", str(run_config))
        assert proc.returncode == 0
        doc = json.loads(proc.stdout)
        assert doc["row"] in {"r3", "r4", "r5"}

    def test_simulate_writes_artifacts(self, run_config, tmp_path):
        out = tmp_path / "out"
        proc = run_cli("simulate", "--config", str(run_config), "--out", str(out))
        assert proc.returncode == 0
        doc = json.loads(proc.stdout)
        assert doc["verdict"]["tag"] in {"PureNE", "StrictMixedNE", "Undecided"}
        assert (out / "trajectory.csv").exists()
        assert (out / "summary.json").exists()
        assert (out / "trajectory.png").exists()

    def test_sweep_writes_report_and_runs(self, tmp_path):
        out = tmp_path / "sweep"
        proc = run_cli(
            "sweep", "--random", "--seed", "7", "--count", "4", "--etas", "1.0",
            "--horizon", "200000", "--out", str(out),
        )
        assert proc.returncode == 0
        report = json.loads((out / "report.json").read_text())
        assert report["total_runs"] == 4
        assert report["mismatches_under_satisfied_requirements"] == 0
        assert len(list((out / "runs").glob("run_*.csv"))) == 4
        assert (out / "report.png").exists()

    def test_verify_ce_agrees_on_a_product_point(self, tmp_path):
        cfg = tmp_path / "ce.json"
        cfg.write_text(
            json.dumps(
                {"game": {"a": 0.0, "b": 1.0, "c": 1.0, "d": 0.0},
                 "nu": [0.25, 0.25, 0.25, 0.25]}
            )
        )
        proc = run_cli("verify-ce", "--config", str(cfg))
        assert proc.returncode == 0
        doc = json.loads(proc.stdout)
        assert doc["agree"] and doc["closed_form"] and doc["bruteforce"]

    def test_oscillate_reports_tiny_residual(self, tmp_path):
        out = tmp_path / "osc"
        proc = run_cli("oscillate", "--a", "1.0", "--steps", "1000", "--out", str(out))
        assert proc.returncode == 0
        doc = json.loads(proc.stdout)
        assert doc["period2_residual"] < 1e-9
        assert doc["eta_times_gap_sum"] > 8.0
        assert (out / "oscillation.csv").exists()
        assert (out / "oscillation.png").exists()

    def test_bank_demo_runs(self, tmp_path):
        out = tmp_path / "bank"
        proc = run_cli("bank", "--demo", "pp", "--horizon", "3000", "--out", str(out))
        assert proc.returncode == 0
        doc = json.loads(proc.stdout)
        assert doc["reduced_gaps"][0] > 0 and doc["reduced_gaps"][1] > 0
        csv = (out / "bank.csv").read_text().splitlines()
        assert csv[0] == (
            "t,b1_tl_gl,b1_tl_gh,b1_th_gl,b1_th_gh,b2_tl_gl,b2_tl_gh,b2_th_gl,b2_th_gh"
        )
        assert (out / "bank.png").exists()

    def test_bank_config_file(self, tmp_path):
        cfg = tmp_path / "bank.json"
        cfg.write_text(
            json.dumps(
                {
                    "dist": {"kind": "piecewise_uniform", "beta1": 0.01, "beta2": 0.95},
                    "gamma_l": 0.6,
                    "gamma_h": 0.7,
                    "threshold_rule": "rational",
                    "horizon": 2000,
                }
            )
        )
        proc = run_cli("bank", "--config", str(cfg))
        assert proc.returncode == 0
        doc = json.loads(proc.stdout)
        assert doc["reduced_gaps"][0] < 0 < doc["reduced_gaps"][1]

    def test_simulate_summary_verdict_text(self, tmp_path):
        cfg = tmp_path / "mm.json"
        cfg.write_text(
            json.dumps(
                {
                    "game": {"a": -2.0, "b": 0.0, "c": -1.0, "d": 0.0},
                    "init1": [0.4, 0.6],
                    "init2": [0.7, 0.3],
                    "eta": 0.5,
                    "horizon": 10000,
                }
            )
        )
        proc = run_cli("simulate", "--config", str(cfg))
        assert proc.returncode == 0
        doc = json.loads(proc.stdout)
        assert doc["verdict"]["text"] == "PureNE(theta2,theta2)"
        assert doc["agreement"] == "Match"

    def test_format_flag_selects_outputs(self, run_config, tmp_path):
        out = tmp_path / "only_csv"
        proc = run_cli("simulate", "--config", str(run_config), "--out", str(out),
                       "--format", "csv")
        assert proc.returncode == 0
        assert (out / "trajectory.csv").exists()
        assert not (out / "summary.json").exists()
        assert (out / "trajectory.png").exists()

    def test_usage_errors_exit_two(self, tmp_path):
        assert run_cli("simulate").returncode == 2  # missing --config
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        proc = run_cli("simulate", "--config", str(bad))
        assert proc.returncode == 2
        assert "run config JSON" in proc.stderr
        missing = run_cli("bank")
        assert missing.returncode == 2

    def test_degenerate_game_is_a_config_error(self, tmp_path):
        cfg = tmp_path / "degen.json"
        cfg.write_text(
            json.dumps(
                {
                    "game": {"a": 1.0, "b": 1.0, "c": 1.0, "d": 1.0},
                    "init1": [0.5, 0.5],
                    "init2": [0.5, 0.5],
                    "eta": 1.0,
                }
            )
        )
        proc = run_cli("classify", "--config", str(cfg))
        assert proc.returncode == 2
