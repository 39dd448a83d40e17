"""Config parsing, experiment orchestration, CSV/plot/report outputs, CLI."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from matsense import (ConfigError, aggregate_trajectories, init_factor,
                      load_config, run_capture_experiment, run_experiment,
                      run_gd, run_verify_suite, render_plot)
from matsense.experiments import instance_summary
from matsense.rng import derive_seed
from matsense.sensing import gen_operator, plant_instance
from matsense.verify import REGISTERED_CHECKS

TINY = """
[experiment]
name = tiny
d = 8
p = 8
m = 40
rank_planted = 2
master_seed = 5
trials = {trials}
run_kind = gd

[gd]
eta = 5e-4
iters = 2000
log_every = 50
init_fro_norm = 0.01
init_ranks = {ranks}
"""


def _write(tmp_path, text, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_load_preset_example1():
    spec = load_config("example1_lownorm")
    assert (spec.d, spec.m, spec.rank_planted, spec.trials) == (30, 240, 2, 3)
    assert spec.eta == 1e-4
    assert spec.init_fro_norm == 1e-3
    assert spec.init_ranks == (2, 30)


def test_load_preset_figure5():
    spec = load_config("figure5")
    r = spec.restart
    assert (r.eta, r.window, r.ratio_threshold) == (5e-6, 100, 0.998)
    assert (r.init_rank, r.rank_step, r.norm_factor, r.floor_rank) == (30, 3, 0.5, 2)
    assert r.init_norm == 10.0


def test_config_missing_key_named(tmp_path):
    bad = TINY.format(trials=3, ranks="2").replace("d = 8\n", "")
    with pytest.raises(ConfigError, match="'d'"):
        load_config(_write(tmp_path, bad))


def test_config_unknown_key_rejected(tmp_path):
    bad = TINY.format(trials=3, ranks="2") + "bogus = 1\n"
    with pytest.raises(ConfigError, match="bogus"):
        load_config(_write(tmp_path, bad))


def test_config_invalid_values(tmp_path):
    with pytest.raises(ConfigError, match="trials"):
        load_config(_write(tmp_path, TINY.format(trials=0, ranks="2")))
    with pytest.raises(ConfigError, match="rank"):
        load_config(_write(tmp_path, TINY.format(trials=1, ranks="2, 9")))
    bad = TINY.format(trials=1, ranks="2").replace("run_kind = gd", "run_kind = sgd")
    with pytest.raises(ConfigError, match="run_kind"):
        load_config(_write(tmp_path, bad))


def test_single_trial_aggregate_equals_trajectory(tmp_path):
    spec = load_config(_write(tmp_path, TINY.format(trials=1, ranks="2")))
    result = run_experiment(spec)
    sres = result.series["rank2"]
    agg = sres.aggregate
    traj = sres.trajectories[0]
    assert list(agg.iters) == [rec.k for rec in traj.records]
    np.testing.assert_array_equal(agg.train_mean,
                                  [rec.train_error for rec in traj.records])
    assert np.all(agg.train_std == 0.0)
    assert np.all(agg.test_std == 0.0)


def test_aggregate_matches_naive_recomputation_from_csvs(tmp_path):
    spec = load_config(_write(tmp_path, TINY.format(trials=3, ranks="2, 8")))
    out = tmp_path / "out"
    run_experiment(spec, out_dir=str(out))
    for series in ("rank2", "rank8"):
        per_trial = {}
        for t in range(3):
            rows = (out / f"tiny_{series}_trial{t}.csv").read_text().strip().splitlines()
            assert rows[0] == "trial,iter,train_error,test_error,fro_norm,num_rank,event"
            for ln in rows[1:]:
                parts = ln.split(",")
                per_trial.setdefault(int(parts[1]), []).append(
                    (float(parts[2]), float(parts[3])))
        agg_rows = (out / f"tiny_{series}_agg.csv").read_text().strip().splitlines()
        assert agg_rows[0] == "iter,train_mean,train_std,test_mean,test_std"
        for ln in agg_rows[1:]:
            k, tm, ts, em, es = ln.split(",")
            tr = np.array([v[0] for v in per_trial[int(k)]])
            te = np.array([v[1] for v in per_trial[int(k)]])
            assert abs(float(tm) - tr.mean()) <= 1e-12 * (1.0 + abs(tr.mean()))
            assert abs(float(ts) - tr.std()) <= 1e-12 * (1.0 + tr.std())
            assert abs(float(em) - te.mean()) <= 1e-12 * (1.0 + abs(te.mean()))
            assert abs(float(es) - te.std()) <= 1e-12 * (1.0 + te.std())


def test_csv_outputs_byte_identical_across_runs(tmp_path):
    spec = load_config(_write(tmp_path, TINY.format(trials=2, ranks="2")))
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    run_experiment(spec, out_dir=str(out1))
    run_experiment(spec, out_dir=str(out2))
    names = sorted(os.listdir(out1))
    assert names == sorted(os.listdir(out2))
    for name in names:
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_trials_are_independent_of_execution_order(tmp_path):
    spec = load_config(_write(tmp_path, TINY.format(trials=3, ranks="2")))
    result = run_experiment(spec)
    # trial 1 rerun in isolation reproduces the same records
    op = gen_operator(spec.d, spec.m, spec.master_seed)
    inst = plant_instance(op, spec.rank_planted, spec.master_seed)
    seed1 = derive_seed(spec.master_seed, "trial", 1)
    U0 = init_factor(spec.d, spec.p, 2, spec.init_fro_norm, seed1)
    solo = run_gd(op, inst.b, inst.x_star, U0, spec.eta, spec.iters,
                  spec.log_every, seed=seed1)
    assert solo.records == result.series["rank2"].trajectories[1].records


def test_restart_experiment_shares_initialization(tmp_path):
    cfg = """
[experiment]
name = mini5
d = 8
p = 8
m = 40
rank_planted = 2
master_seed = 9
trials = 2
run_kind = restart

[restart]
eta = 2e-4
budget = 1500
window = 50
ratio_threshold = 0.0
init_rank = 8
init_norm = 0.5
rank_step = 3
norm_factor = 0.5
floor_rank = 2
log_every = 50
"""
    spec = load_config(_write(tmp_path, cfg))
    result = run_experiment(spec)
    assert set(result.series) == {"restart", "gd"}
    # with ratio_threshold 0 both series are the same run, record for record
    for a, b in zip(result.series["restart"].trajectories,
                    result.series["gd"].trajectories):
        assert a.records == b.records


def test_flow_experiment_runs(tmp_path):
    cfg = """
[experiment]
name = miniflow
d = 8
p = 8
m = 40
rank_planted = 2
master_seed = 9
trials = 2
run_kind = flow

[flow]
dt = 4e-3
steps = 400
log_every = 50
init_fro_norm = 0.01
init_ranks = 2
"""
    spec = load_config(_write(tmp_path, cfg))
    result = run_experiment(spec, out_dir=str(tmp_path / "flow"))
    agg = result.series["rank2"].aggregate
    assert agg.final_train_mean < agg.train_mean[0]
    assert (tmp_path / "flow" / "miniflow_rank2_trial0.csv").exists()


def test_all_overflow_flag(tmp_path):
    cfg = TINY.format(trials=2, ranks="2").replace("init_fro_norm = 0.01",
                                                   "init_fro_norm = 1e3")
    spec = load_config(_write(tmp_path, cfg))
    result = run_experiment(spec, out_dir=str(tmp_path / "ovfl"))
    assert result.all_overflowed
    for traj in result.series["rank2"].trajectories:
        assert traj.overflowed


def test_capture_experiment_zero_and_small_perturbation():
    check0, traj0 = run_capture_experiment(12, 2, 2, 96, 0.0, seed=3,
                                           iters=1000)
    assert check0.passed
    assert traj0.records[-1].test_error <= 1e-20
    check, traj = run_capture_experiment(12, 2, 2, 96, 0.05, seed=3,
                                         iters=100000)
    assert check.passed
    assert check.measured["final_test_error"] < check.tolerance
    assert max(r.num_rank for r in traj.records) <= traj.records[0].num_rank
    with pytest.raises(ValueError):
        run_capture_experiment(12, 1, 2, 96, 0.05, seed=3)


def test_instance_summary_deterministic():
    s1 = instance_summary(8, 40, 2, 11)
    s2 = instance_summary(8, 40, 2, 11)
    assert s1 == s2
    assert abs(s1["trace"] - 1.0) <= 1e-12


def test_render_plot_counts_and_consistency(tmp_path):
    spec = load_config(_write(tmp_path, TINY.format(trials=3, ranks="2, 8")))
    out = tmp_path / "out"
    run_experiment(spec, out_dir=str(out))
    svg_path = tmp_path / "panel.svg"
    render_plot([str(out / "tiny_rank2_agg.csv"), str(out / "tiny_rank8_agg.csv")],
                str(svg_path), y_log=True, column="train")
    svg = svg_path.read_text()
    assert svg.count('class="mean"') == 2
    assert svg.count('class="band"') == 4


def test_render_plot_single_trial_band_coincides(tmp_path):
    spec = load_config(_write(tmp_path, TINY.format(trials=1, ranks="2")))
    out = tmp_path / "out"
    run_experiment(spec, out_dir=str(out))
    svg_path = tmp_path / "one.svg"
    render_plot([str(out / "tiny_rank2_agg.csv")], str(svg_path))
    svg = svg_path.read_text()
    import re
    mean_d = re.findall(r'class="mean"[^>]* d="([^"]+)"', svg)
    band_d = re.findall(r'class="band"[^>]* d="([^"]+)"', svg)
    assert len(mean_d) == 1 and len(band_d) == 2
    assert band_d[0] == mean_d[0] and band_d[1] == mean_d[0]


def test_render_plot_error_cases(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    out = tmp_path / "x.svg"
    with pytest.raises(ValueError, match="empty"):
        render_plot([str(empty)], str(out))
    assert not out.exists()
    bad = tmp_path / "bad.csv"
    bad.write_text("iter,train_mean,oops,test_mean,test_std\n1,2,3,4,5\n")
    with pytest.raises(ValueError, match="train_std"):
        render_plot([str(bad)], str(out))
    assert not out.exists()


def test_verify_suite_reproducible_and_complete(tmp_path):
    r1 = run_verify_suite(0)
    r2 = run_verify_suite(0)
    assert len(r1.checks) == len(REGISTERED_CHECKS)
    assert r1.passed
    assert r1.to_json() == r2.to_json()
    p = tmp_path / "report.json"
    r1.write_json(str(p))
    payload = json.loads(p.read_text())
    assert payload["passed"] is True
    assert len(payload["checks"]) == len(REGISTERED_CHECKS)
    r1.write_csv(str(tmp_path / "report.csv"))
    lines = (tmp_path / "report.csv").read_text().strip().splitlines()
    assert len(lines) == 1 + len(REGISTERED_CHECKS)


def _cli(*argv):
    return subprocess.run([sys.executable, "-m", "matsense.cli", *argv],
                          capture_output=True, text=True)


def test_cli_exit_codes(tmp_path):
    r = _cli("run")
    assert r.returncode == 1  # usage error
    r = _cli("run", "--config", str(tmp_path / "missing.cfg"))
    assert r.returncode == 1
    cfg = _write(tmp_path, TINY.format(trials=1, ranks="2"))
    r = _cli("run", "--config", cfg, "--out-dir", str(tmp_path / "o"))
    assert r.returncode == 0, r.stderr
    assert (tmp_path / "o" / "tiny_rank2_agg.csv").exists()
    r = _cli("verify", "--seed", "1", "--out-dir", str(tmp_path / "v"))
    assert r.returncode == 0, r.stderr
    assert (tmp_path / "v" / "verify_report.json").exists()
    ovfl = _write(tmp_path,
                  TINY.format(trials=1, ranks="2").replace(
                      "init_fro_norm = 0.01", "init_fro_norm = 1e3"),
                  name="ovfl.cfg")
    r = _cli("run", "--config", ovfl, "--out-dir", str(tmp_path / "o2"))
    assert r.returncode == 3  # every trial overflowed
