"""Gradient-descent iteration on the factored objective, with trajectory
logging, an RK4 integrator for the continuous flow, and a finite-difference
check of the singular-value evolution along the flow.

A run stops early once the training error falls below machine-precision
scale (1e-28 * max(1, ||b||^2)).  Divergent runs are clamped: the step that
would produce non-finite values raises `NumericalOverflowError` carrying the
last finite state and the partial trajectory, so callers can report bad
outcomes instead of losing them.
"""

import math
from dataclasses import dataclass

import numpy as np

from .geometry import numerical_rank
from .objective import test_error

STOP_SCALE = 1e-28  # early-stop threshold is STOP_SCALE * max(1, ||b||^2)


@dataclass(frozen=True)
class FactorState:
    """Current factor with its iteration counter."""

    U: np.ndarray
    k: int = 0


@dataclass(frozen=True)
class TrajectoryRecord:
    k: int
    train_error: float
    test_error: float
    fro_norm: float
    num_rank: int
    event: str = ""  # "" or "restart"


@dataclass(frozen=True)
class Trajectory:
    """Logged run: per-iteration records plus the terminal factor."""

    records: tuple
    final_U: np.ndarray
    config: dict
    seed: int | None = None
    overflowed: bool = False
    restarts: tuple = ()

    @property
    def final(self):
        return self.records[-1]


class NumericalOverflowError(RuntimeError):
    """Raised when an update would produce non-finite values.

    Carries the last finite `state` and, for full runs, the partial
    `trajectory` logged up to that state.
    """

    def __init__(self, message, state=None, trajectory=None):
        super().__init__(message)
        self.state = state
        self.trajectory = trajectory


def init_factor(d, p, rank, fro_norm, seed):
    """Random d x p factor of the given rank with exact Frobenius norm.

    Returns fro_norm * PQ^T / ||PQ^T||_F with P (d x rank), Q (p x rank)
    standard Gaussian from the (seed, "init") substream.
    """
    from .rng import substream

    if not 1 <= rank <= min(d, p):
        raise ValueError(f"rank must satisfy 1 <= rank <= min(d, p), got {rank}")
    if fro_norm <= 0:
        raise ValueError("fro_norm must be positive")
    rng = substream(seed, "init")
    W = rng.standard_normal((d, rank)) @ rng.standard_normal((p, rank)).T
    return fro_norm * (W / np.linalg.norm(W))


def _resid(flat, b, U):
    """Residual vector and training error of the current factor."""
    # Divergent runs are expected to overflow here; the caller detects the
    # non-finite training error and clamps the run, so silence the warnings.
    with np.errstate(over="ignore", invalid="ignore"):
        X = U @ U.T
        r = flat @ X.ravel() - b
        return r, float(r @ r)


def _descend(flat, d, U, r, eta):
    """One gradient step U - eta * 4 A*(r) U, reusing the residual r."""
    with np.errstate(over="ignore", invalid="ignore"):
        return U - (4.0 * eta) * ((flat.T @ r).reshape(d, d) @ U)


def _record(k, f, U, x_star, event=""):
    # Clamped divergent runs log astronomically large but still finite
    # factors; squared quantities may overflow to inf, which is recorded
    # as-is rather than warned about.
    with np.errstate(over="ignore", invalid="ignore"):
        scale = float(np.max(np.abs(U))) if U.size else 0.0
        M = U if scale < 1e100 else U / scale  # keep LAPACK away from overflow
        return TrajectoryRecord(
            k=k,
            train_error=f,
            test_error=test_error(U, x_star) if x_star is not None else math.nan,
            fro_norm=float(np.linalg.norm(U)),
            num_rank=numerical_rank(M),
            event=event,
        )


def gd_step(state, op, b, eta):
    """Single gradient-descent update of a `FactorState`."""
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    r, _ = _resid(op.flat, b, state.U)
    U_new = _descend(op.flat, op.d, state.U, r, eta)
    if not np.all(np.isfinite(U_new)):
        raise NumericalOverflowError(
            f"non-finite values in update at iteration {state.k}", state=state)
    return FactorState(U=U_new, k=state.k + 1)


CONVERGED = object()  # monitor sentinel: terminate the run as converged


def _run_descent(op, b, x_star, U0, eta, max_steps, log_every,
                 monitor=None, seed=None, config=None):
    """Shared descent loop behind `run_gd` and the restart algorithm.

    `monitor`, when given, observes every training error and may replace the
    next iterate (rank/norm-shrinking restart) or declare convergence; with
    no monitor the float path is identical, which keeps plain and monitored
    runs comparable record for record.
    """
    if max_steps < 1:
        raise ValueError("iters must be >= 1")
    if log_every < 1:
        raise ValueError("log_every must be >= 1")
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    flat = op.flat
    stop = STOP_SCALE * max(1.0, float(b @ b))
    U = np.array(U0, dtype=float)
    r, f = _resid(flat, b, U)
    if not math.isfinite(f):
        raise NumericalOverflowError("training error is non-finite at the start",
                                     state=FactorState(U=U, k=0))
    records = [_record(0, f, U, x_star)]
    if monitor is not None:
        monitor.observe(f)
    events = []
    k = 0
    logged = 0
    while k < max_steps:
        if f < stop:
            break
        U_new = _descend(flat, op.d, U, r, eta)
        event = ""
        if monitor is not None:
            action = monitor.maybe_restart(k)
            if action is CONVERGED:
                break
            if action is not None:
                U_new, ev = action
                events.append(ev)
                event = "restart"
        r_new, f_new = _resid(flat, b, U_new)
        if not math.isfinite(f_new):
            if logged != k:
                records.append(_record(k, f, U, x_star))
            partial = Trajectory(records=tuple(records), final_U=U,
                                 config=config or {}, seed=seed,
                                 overflowed=True, restarts=tuple(events))
            raise NumericalOverflowError(
                f"non-finite training error at iteration {k + 1}",
                state=FactorState(U=U, k=k), trajectory=partial)
        U, r, f = U_new, r_new, f_new
        k += 1
        if monitor is not None:
            monitor.observe(f)
        if k % log_every == 0 or k == max_steps or event:
            records.append(_record(k, f, U, x_star, event))
            logged = k
    if logged != k and k > 0:
        records.append(_record(k, f, U, x_star))
    return Trajectory(records=tuple(records), final_U=U, config=config or {},
                      seed=seed, overflowed=False, restarts=tuple(events))


def run_gd(op, b, x_star, U0, eta, iters, log_every=100, seed=None):
    """Gradient descent on ||A(UU^T) - b||_2^2 with trajectory logging.

    Logs iteration 0, every `log_every` steps, and the final step; stops
    early at machine-precision training error.  `x_star` may be None, in
    which case test errors are logged as NaN.
    """
    config = {"kind": "gd", "eta": eta, "iters": iters, "log_every": log_every}
    return _run_descent(op, b, x_star, U0, eta, iters, log_every,
                        seed=seed, config=config)


def integrate_flow_rk4(op, b, U0, dt, steps, log_every=100, x_star=None, seed=None):
    """Classical RK4 on the gradient flow dU/dt = -(1/2) A*(A(UU^T) - b) U.

    Uses the scaled-objective vector field, so one Euler step of size dt
    matches one `run_gd` step with eta = dt / 8.  Logging and early stopping
    mirror `run_gd`.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    flat = op.flat
    d = op.d

    def field(U):
        X = U @ U.T
        r = flat @ X.ravel() - b
        return -0.5 * ((flat.T @ r).reshape(d, d) @ U)

    stop = STOP_SCALE * max(1.0, float(b @ b))
    U = np.array(U0, dtype=float)
    _, f = _resid(flat, b, U)
    records = [_record(0, f, U, x_star)]
    config = {"kind": "flow", "dt": dt, "steps": steps, "log_every": log_every}
    k = 0
    logged = 0
    while k < steps:
        if f < stop:
            break
        k1 = field(U)
        k2 = field(U + (0.5 * dt) * k1)
        k3 = field(U + (0.5 * dt) * k2)
        k4 = field(U + dt * k3)
        U_new = U + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        _, f_new = _resid(flat, b, U_new)
        if not math.isfinite(f_new):
            if logged != k:
                records.append(_record(k, f, U, x_star))
            partial = Trajectory(records=tuple(records), final_U=U,
                                 config=config, seed=seed, overflowed=True)
            raise NumericalOverflowError(
                f"non-finite training error at flow step {k + 1}",
                state=FactorState(U=U, k=k), trajectory=partial)
        U, f = U_new, f_new
        k += 1
        if k % log_every == 0 or k == steps:
            records.append(_record(k, f, U, x_star))
            logged = k
    if logged != k and k > 0:
        records.append(_record(k, f, U, x_star))
    return Trajectory(records=tuple(records), final_U=U, config=config,
                      seed=seed, overflowed=False)


@dataclass(frozen=True)
class SingularValueRate:
    """Predicted vs finite-difference time derivative of one singular value."""

    index: int          # position in the descending spectrum of UU^T
    value: float        # singular value s_i of UU^T
    predicted: float    # -2 s_i v_i^T A*(g(U)) v_i
    measured: float     # (s_i(t + delta) - s_i(t)) / delta, NaN if skipped
    separated: bool     # eigenvalue gaps exceed 1e-3 * s_max


def singular_value_rates(op, b, U, delta, gap_rel=1e-3):
    """Check the singular-value evolution of UU^T along the gradient flow.

    For each singular value s_i of X = UU^T with eigenvector v_i the flow
    predicts ds_i/dt = -2 s_i v_i^T A*(g(U)) v_i, with g the half residual.
    The measured rate comes from one RK4 step of size `delta`.  Indices whose
    spectral gap is below gap_rel * s_max are flagged as not separated and
    their measured rate is NaN.
    """
    from .objective import residuals

    U = np.asarray(U, dtype=float)
    X = U @ U.T
    lam, V = np.linalg.eigh(0.5 * (X + X.T))
    lam = lam[::-1]
    V = V[:, ::-1]
    res = residuals(op, b, U)
    H = op.adjoint(res.half)
    predicted = -2.0 * lam * np.einsum("ij,ij->j", V, H @ V)

    traj = integrate_flow_rk4(op, b, U, dt=delta, steps=1, log_every=1)
    X1 = traj.final_U @ traj.final_U.T
    lam1 = np.linalg.eigh(0.5 * (X1 + X1.T))[0][::-1]
    measured = (lam1 - lam) / delta

    top = max(lam[0], 0.0)
    out = []
    for i in range(lam.size):
        gaps = []
        if i > 0:
            gaps.append(lam[i - 1] - lam[i])
        if i < lam.size - 1:
            gaps.append(lam[i] - lam[i + 1])
        separated = top > 0.0 and all(g > gap_rel * top for g in gaps)
        out.append(SingularValueRate(
            index=i,
            value=float(lam[i]),
            predicted=float(predicted[i]),
            measured=float(measured[i]) if separated else math.nan,
            separated=separated,
        ))
    return out
