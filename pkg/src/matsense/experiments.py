"""Experiment execution: seeded trials, aggregation, CSV output, capture runs.

One experiment fixes a sensing operator and planted model from the master
seed, then runs independent trials from per-trial substream seeds.  Gradient
descent (and flow) experiments run one series per initialization rank; a
restart experiment runs the adaptive algorithm plus a plain-descent baseline
from the identical initialization.  Overflowed trials keep their partial
trajectories and simply drop out of the aggregate beyond their last record.
"""

import dataclasses
import hashlib
import os
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .dynamics import (NumericalOverflowError, init_factor, integrate_flow_rk4,
                       run_gd)
from .geometry import CheckResult
from .restart import run_restart
from .rng import derive_seed, substream
from .sensing import gen_operator, gen_planted, plant_instance

TRIAL_HEADER = "trial,iter,train_error,test_error,fro_norm,num_rank,event"
AGG_HEADER = "iter,train_mean,train_std,test_mean,test_std"


@dataclass(frozen=True)
class AggregateCurve:
    """Per-iteration mean and standard deviation across trials."""

    iters: np.ndarray
    train_mean: np.ndarray
    train_std: np.ndarray
    test_mean: np.ndarray
    test_std: np.ndarray
    counts: np.ndarray  # trials contributing at each logged iteration

    @property
    def final_test_mean(self):
        return float(self.test_mean[-1])

    @property
    def final_train_mean(self):
        return float(self.train_mean[-1])


@dataclass(frozen=True)
class SeriesResult:
    name: str
    trajectories: tuple
    aggregate: AggregateCurve
    overflowed: tuple


@dataclass(frozen=True)
class ExperimentResult:
    spec: object
    instance: object
    series: dict

    @property
    def all_overflowed(self):
        flags = [o for s in self.series.values() for o in s.overflowed]
        return bool(flags) and all(flags)


def aggregate_trajectories(trajectories):
    """Mean/std curves on the union of logged iterations.

    A trial contributes to a grid point only if it has a record there, so
    early-stopped or overflowed trials are excluded beyond their last record.
    """
    buckets = defaultdict(list)
    for traj in trajectories:
        for rec in traj.records:
            buckets[rec.k].append(rec)
    ks = sorted(buckets)
    if not ks:
        raise ValueError("no records to aggregate")
    tr_m, tr_s, te_m, te_s, cnt = [], [], [], [], []
    # means/stds of clamped divergent trials can overflow to inf; record as-is
    with np.errstate(over="ignore", invalid="ignore"):
        for k in ks:
            tr = np.array([r.train_error for r in buckets[k]])
            te = np.array([r.test_error for r in buckets[k]])
            tr_m.append(float(np.mean(tr)))
            tr_s.append(float(np.std(tr)))
            te_m.append(float(np.mean(te)))
            te_s.append(float(np.std(te)))
            cnt.append(len(buckets[k]))
    return AggregateCurve(iters=np.array(ks), train_mean=np.array(tr_m),
                          train_std=np.array(tr_s), test_mean=np.array(te_m),
                          test_std=np.array(te_s), counts=np.array(cnt))


def _run_trials(spec, op, inst, runner):
    trajectories, overflowed = [], []
    for t in range(spec.trials):
        seed_t = derive_seed(spec.master_seed, "trial", t)
        try:
            traj = runner(seed_t)
            ovfl = False
        except NumericalOverflowError as exc:
            traj = exc.trajectory
            ovfl = True
        trajectories.append(traj)
        overflowed.append(ovfl)
    return SeriesResult(name=runner.series, trajectories=tuple(trajectories),
                        aggregate=aggregate_trajectories(trajectories),
                        overflowed=tuple(overflowed))


def run_experiment(spec, out_dir=None):
    """Run all series/trials of an experiment; optionally write CSV files.

    Per-trial CSVs are named `<name>_<series>_trial<t>.csv` and aggregates
    `<name>_<series>_agg.csv`.  Identical spec and master seed reproduce
    byte-identical files.
    """
    op = gen_operator(spec.d, spec.m, spec.master_seed)
    inst = plant_instance(op, spec.rank_planted, spec.master_seed)
    series = {}

    if spec.run_kind in ("gd", "flow"):
        for rank in spec.init_ranks:
            def runner(seed_t, rank=rank):
                U0 = init_factor(spec.d, spec.p, rank, spec.init_fro_norm, seed_t)
                if spec.run_kind == "gd":
                    return run_gd(op, inst.b, inst.x_star, U0, spec.eta,
                                  spec.iters, spec.log_every, seed=seed_t)
                return integrate_flow_rk4(op, inst.b, U0, spec.dt, spec.steps,
                                          spec.log_every, x_star=inst.x_star,
                                          seed=seed_t)
            runner.series = f"rank{rank}"
            series[runner.series] = _run_trials(spec, op, inst, runner)
    else:
        tmpl = spec.restart

        def restart_runner(seed_t):
            cfg = dataclasses.replace(tmpl, seed=seed_t)
            return run_restart(op, inst.b, inst.x_star, cfg, p=spec.p,
                               log_every=spec.log_every)
        restart_runner.series = "restart"
        series["restart"] = _run_trials(spec, op, inst, restart_runner)

        def gd_runner(seed_t):
            # plain descent from the identical initialization as the restart run
            U0 = init_factor(spec.d, spec.p, tmpl.init_rank, tmpl.init_norm, seed_t)
            return run_gd(op, inst.b, inst.x_star, U0, tmpl.eta, tmpl.budget,
                          spec.log_every, seed=seed_t)
        gd_runner.series = "gd"
        series["gd"] = _run_trials(spec, op, inst, gd_runner)

    result = ExperimentResult(spec=spec, instance=inst, series=series)
    if out_dir is not None:
        write_experiment_csvs(result, out_dir)
    return result


def write_experiment_csvs(result, out_dir):
    """Write per-trial and aggregate CSVs; returns the list of paths."""
    os.makedirs(out_dir, exist_ok=True)
    name = result.spec.name
    paths = []
    for sname, sres in result.series.items():
        for t, traj in enumerate(sres.trajectories):
            path = os.path.join(out_dir, f"{name}_{sname}_trial{t}.csv")
            with open(path, "w") as fh:
                fh.write(TRIAL_HEADER + "\n")
                for rec in traj.records:
                    fh.write(f"{t},{rec.k},{rec.train_error!r},{rec.test_error!r},"
                             f"{rec.fro_norm!r},{rec.num_rank},{rec.event}\n")
            paths.append(path)
        agg = sres.aggregate
        path = os.path.join(out_dir, f"{name}_{sname}_agg.csv")
        with open(path, "w") as fh:
            fh.write(AGG_HEADER + "\n")
            for i, k in enumerate(agg.iters):
                fh.write(f"{int(k)},{float(agg.train_mean[i])!r},"
                         f"{float(agg.train_std[i])!r},{float(agg.test_mean[i])!r},"
                         f"{float(agg.test_std[i])!r}\n")
        paths.append(path)
    return paths


def run_capture_experiment(d, p, r, m, perturb_scale, seed,
                           eta=1e-4, iters=200000, log_every=100):
    """Start descent near a factorization of the planted model and report.

    Builds U0 = U_star R + E with R a Haar orthogonal p x p matrix and E a
    Gaussian perturbation of Frobenius norm perturb_scale * ||U_star||_F,
    then runs gradient descent and reports whether the terminal test error
    certifies recovery (< 1e-8 ||x_star||_F^2).  Non-convergence is reported
    in the result, not raised.  Returns (CheckResult, Trajectory).
    """
    if not 1 <= r <= p:
        raise ValueError(f"need 1 <= r <= p, got r={r}, p={p}")
    if perturb_scale < 0:
        raise ValueError("perturb_scale must be nonnegative")
    op = gen_operator(d, m, seed)
    x_star = gen_planted(d, r, seed)
    b = op.apply(x_star)
    lam, Q = np.linalg.eigh(x_star)
    U_star = np.zeros((d, p))
    U_star[:, :r] = Q[:, -r:] * np.sqrt(np.clip(lam[-r:], 0.0, None))

    rng = substream(seed, "capture")
    G = rng.standard_normal((p, p))
    R, upper = np.linalg.qr(G)
    R = R * np.sign(np.diag(upper))  # Haar-distributed orthogonal matrix
    E = rng.standard_normal((d, p))
    if perturb_scale > 0:
        E *= perturb_scale * np.linalg.norm(U_star) / np.linalg.norm(E)
    else:
        E = np.zeros((d, p))
    U0 = U_star @ R + E

    try:
        traj = run_gd(op, b, x_star, U0, eta, iters, log_every, seed=seed)
        converged = True
    except NumericalOverflowError as exc:
        traj = exc.trajectory
        converged = False

    x_norm2 = float(np.sum(x_star * x_star))
    b_norm2 = float(b @ b)
    final = traj.records[-1]
    test_tol = 1e-8 * x_norm2
    train_tol = 1e-20 * max(1.0, b_norm2)
    passed = (converged and final.train_error < train_tol
              and final.test_error < test_tol)
    check = CheckResult(
        check_id=f"capture_d{d}_p{p}_r{r}_m{m}",
        inputs={"d": d, "p": p, "r": r, "m": m,
                "perturb_scale": perturb_scale, "seed": int(seed),
                "eta": eta, "iters": iters},
        measured={"final_train_error": final.train_error,
                  "final_test_error": final.test_error,
                  "iterations": final.k, "converged": converged},
        tolerance=test_tol,
        passed=passed,
    )
    return check, traj


def instance_summary(d, m, r, seed):
    """Digest of a generated instance (deterministic, JSON-serializable)."""
    op = gen_operator(d, m, seed)
    inst = plant_instance(op, r, seed)
    lam = np.linalg.eigvalsh(inst.x_star)
    return {
        "d": d, "m": m, "rank_planted": r, "seed": int(seed),
        "xi": inst.xi,
        "trace": float(np.trace(inst.x_star)),
        "spectral_norm": float(lam[-1]),
        "x_star_fro_sq": float(np.sum(inst.x_star ** 2)),
        "b_norm_sq": float(inst.b @ inst.b),
        "mats_sha256": hashlib.sha256(op.mats.tobytes()).hexdigest(),
        "x_star_sha256": hashlib.sha256(inst.x_star.tobytes()).hexdigest(),
    }
