"""Adaptive-restart algorithm tests."""

import numpy as np
import pytest

from matsense import (RestartConfig, gen_operator, init_factor,
                      plant_instance, run_gd, run_restart, window_ratio)


def _setup(d=10, m=80, r=2, seed=5):
    op = gen_operator(d, m, seed=seed)
    inst = plant_instance(op, r, seed=seed)
    return op, inst


def _config(**kw):
    base = dict(eta=2e-4, budget=5000, window=50, ratio_threshold=0.998,
                init_rank=10, init_norm=1.0, rank_step=3, norm_factor=0.5,
                floor_rank=2, seed=42)
    base.update(kw)
    return RestartConfig(**base)


def test_window_ratio_constant_history():
    assert window_ratio([3.0] * 11) == 1.0


def test_window_ratio_geometric_decay():
    q = 0.97
    f = [2.0]
    for _ in range(20):
        f.append(f[-1] * q)
    assert abs(window_ratio(f) - q) <= 1e-14


def test_window_ratio_matches_naive_loop():
    rng = np.random.default_rng(3)
    f = list(rng.uniform(0.1, 5.0, size=21))
    naive = max(f[i + 1] / f[i] for i in range(20))
    assert window_ratio(f) == naive


def test_window_ratio_zero_signals_convergence():
    f = [1.0, 0.5, 0.0, 0.2]
    assert window_ratio(f) == 0.0
    with pytest.raises(ValueError):
        window_ratio([1.0])
    with pytest.raises(ValueError):
        window_ratio([1.0, float("inf")])


def test_config_validation():
    with pytest.raises(ValueError):
        _config(window=6000)  # window > budget
    with pytest.raises(ValueError):
        _config(norm_factor=1.5)
    with pytest.raises(ValueError):
        _config(floor_rank=11)
    with pytest.raises(ValueError):
        _config(rank_step=0)


def test_tau_zero_identical_to_plain_gd():
    op, inst = _setup()
    cfg = _config(ratio_threshold=0.0)
    traj_r = run_restart(op, inst.b, inst.x_star, cfg, log_every=25)
    U0 = init_factor(10, 10, cfg.init_rank, cfg.init_norm, cfg.seed)
    traj_g = run_gd(op, inst.b, inst.x_star, U0, cfg.eta, cfg.budget,
                    log_every=25)
    assert len(traj_r.restarts) == 0
    assert len(traj_r.records) == len(traj_g.records)
    for a, b in zip(traj_r.records, traj_g.records):
        assert a == b  # bitwise identical record for record


def test_restarts_shrink_rank_and_norm():
    op, inst = _setup()
    # high threshold forces restarts at every window check
    cfg = _config(ratio_threshold=2.0, budget=400, window=50)
    traj = run_restart(op, inst.b, inst.x_star, cfg, log_every=10)
    events = traj.restarts
    assert len(events) >= 2
    for j, ev in enumerate(events):
        assert ev.new_norm == cfg.init_norm * cfg.norm_factor ** (j + 1)
        assert ev.new_rank == max(cfg.init_rank - (j + 1) * cfg.rank_step,
                                  cfg.floor_rank)
        assert ev.trigger_ratio < cfg.ratio_threshold
    ranks = [ev.new_rank for ev in events]
    assert all(r2 <= r1 for r1, r2 in zip(ranks, ranks[1:]))
    assert all(cfg.floor_rank <= r <= cfg.init_rank for r in ranks)
    # restart rows are logged with the event tag
    tagged = [rec for rec in traj.records if rec.event == "restart"]
    assert len(tagged) == len(events)
    assert {rec.k for rec in tagged} == {ev.k for ev in events}


def test_rank_floor_clamps():
    op, inst = _setup()
    cfg = _config(ratio_threshold=2.0, budget=400, window=50,
                  init_rank=2, floor_rank=2, init_norm=0.5)
    traj = run_restart(op, inst.b, inst.x_star, cfg, log_every=10)
    assert len(traj.restarts) >= 1
    assert all(ev.new_rank == 2 for ev in traj.restarts)


def test_budget_is_respected():
    op, inst = _setup()
    cfg = _config(budget=777, ratio_threshold=2.0, window=50)
    traj = run_restart(op, inst.b, inst.x_star, cfg, log_every=100)
    assert traj.records[-1].k <= 777


def test_window_checks_align_with_pseudocode_schedule():
    # first checkable index is the first k with mod(k, W) = 1 and k >= W
    op, inst = _setup()
    cfg = _config(ratio_threshold=2.0, budget=260, window=50)
    traj = run_restart(op, inst.b, inst.x_star, cfg, log_every=1000)
    ks = [ev.k for ev in traj.restarts]
    assert ks[0] == 52  # check fires at k=51, fresh draw is iterate 52
    assert all((k - 1) % 50 == 1 for k in ks)
