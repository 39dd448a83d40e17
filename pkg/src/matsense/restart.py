"""Adaptive-restart gradient descent for matrix sensing.

Plain gradient descent from a generic initialization tends to converge fast
to a point with zero training error but large test error.  This algorithm
watches the worst consecutive decay ratio of the training error over a
sliding window; whenever that ratio indicates fast (linear) convergence it
halts the run, shrinks the initialization norm and rank, and redraws the
iterate.  Slow convergence - the regime where the implicit low-rank bias
operates - is left alone.
"""

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .dynamics import CONVERGED, _run_descent, init_factor
from .rng import derive_seed


@dataclass(frozen=True)
class RestartConfig:
    """Full parameter block of the restart algorithm."""

    eta: float             # learning rate
    budget: int            # total gradient steps across all restarts (K)
    window: int            # sliding-window length (W)
    ratio_threshold: float # restart when the window ratio falls below this (tau)
    init_rank: int         # rank of the first draw (r0)
    init_norm: float       # Frobenius norm of the first draw (rho0)
    rank_step: int         # rank decrement per restart
    norm_factor: float     # norm multiplier per restart, in (0, 1)
    floor_rank: int        # rank never drops below this
    seed: int

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.budget < 1 or self.window < 1:
            raise ValueError("budget and window must be >= 1")
        if self.window > self.budget:
            raise ValueError("window must not exceed the step budget")
        if self.ratio_threshold < 0:
            raise ValueError("ratio_threshold must be nonnegative")
        if self.rank_step < 1:
            raise ValueError("rank_step must be >= 1")
        if not 0.0 < self.norm_factor < 1.0:
            raise ValueError("norm_factor must lie in (0, 1)")
        if not 1 <= self.floor_rank <= self.init_rank:
            raise ValueError("floor_rank must satisfy 1 <= floor_rank <= init_rank")
        if self.init_norm <= 0:
            raise ValueError("init_norm must be positive")


@dataclass(frozen=True)
class RestartEvent:
    """One rank/norm-shrinking restart."""

    k: int               # iteration index of the fresh draw
    new_rank: int
    new_norm: float
    trigger_ratio: float


def window_ratio(f_history):
    """Worst consecutive decay ratio max f[i+1] / f[i] over the window.

    `f_history` holds W + 1 consecutive training errors.  A zero anywhere in
    the denominators means the run has converged; the function then returns
    0.0, which doubles as the convergence signal (a genuine ratio is zero
    only when some training error is exactly zero).
    """
    f = np.asarray(f_history, dtype=float)
    if f.size < 2:
        raise ValueError("need at least two training errors")
    if not np.all(np.isfinite(f)):
        raise ValueError("training errors must be finite")
    if np.any(f[:-1] == 0.0):
        return 0.0
    return float(np.max(f[1:] / f[:-1]))


class _RestartMonitor:
    """Window bookkeeping plugged into the shared descent loop."""

    def __init__(self, cfg, d, p):
        self.cfg = cfg
        self.d = d
        self.p = p
        self.rank = cfg.init_rank
        self.norm = cfg.init_norm
        self.history = deque(maxlen=cfg.window + 1)
        self.events = []

    def observe(self, f):
        self.history.append(f)

    def maybe_restart(self, k):
        cfg = self.cfg
        # Pseudo-code checks at mod(k, W) = 1; the first usable window needs
        # k >= W so that the error W steps back exists.
        if k % cfg.window != 1 or k < cfg.window:
            return None
        ratio = window_ratio(list(self.history))
        if ratio == 0.0:
            return CONVERGED
        if ratio >= cfg.ratio_threshold:
            return None
        self.norm = cfg.norm_factor * self.norm
        self.rank = max(self.rank - cfg.rank_step, cfg.floor_rank)
        event = RestartEvent(k=k + 1, new_rank=self.rank, new_norm=self.norm,
                             trigger_ratio=ratio)
        U_fresh = init_factor(self.d, self.p, self.rank, self.norm,
                              derive_seed(cfg.seed, "restart", len(self.events)))
        self.events.append(event)
        return U_fresh, event


def run_restart(op, b, x_star, cfg, p=None, log_every=100):
    """Run the adaptive-restart algorithm; returns a Trajectory with events.

    The first iterate is a rank-`init_rank` matrix of Frobenius norm
    `init_norm`.  Every `window` steps the worst consecutive training-error
    ratio over the last window is compared against `ratio_threshold`; fast
    convergence triggers a restart with norm shrunk by `norm_factor` and rank
    reduced by `rank_step` (never below `floor_rank`).  All restarts count
    against the shared step budget.  With ratio_threshold = 0 no restart can
    trigger and the trajectory matches plain gradient descent record for
    record (same seed).
    """
    d = op.d
    if p is None:
        p = d
    if not cfg.floor_rank <= cfg.init_rank <= min(d, p):
        raise ValueError(
            f"init_rank={cfg.init_rank} out of range for d={d}, p={p}")
    U0 = init_factor(d, p, cfg.init_rank, cfg.init_norm, cfg.seed)
    monitor = _RestartMonitor(cfg, d, p)
    config = {"kind": "restart", "eta": cfg.eta, "iters": cfg.budget,
              "log_every": log_every, "window": cfg.window,
              "ratio_threshold": cfg.ratio_threshold,
              "init_rank": cfg.init_rank, "init_norm": cfg.init_norm,
              "rank_step": cfg.rank_step, "norm_factor": cfg.norm_factor,
              "floor_rank": cfg.floor_rank}
    traj = _run_descent(op, b, x_star, U0, cfg.eta, cfg.budget, log_every,
                        monitor=monitor, seed=cfg.seed, config=config)
    return traj
