"""Executable geometry of the zero-training-error set.

Ranks, orthogonal Procrustes distances, residual-Jacobian spectra, the
pointwise gradient-domination (PL) inequality, sampled restricted-injectivity
and regularity-radius estimates, and a gradient-descent upper bound on the
distance to the feasible set.  The sampled quantities are estimates, not
certified bounds; each function documents which side of the truth it sits on.
"""

import json
from dataclasses import dataclass

import numpy as np

from .objective import grad_scaled_error, residuals
from .rng import substream
from .sensing import operator_norm


def numerical_rank(M, tol_rel=1e-8):
    """Number of singular values above tol_rel times the largest one."""
    if tol_rel <= 0:
        raise ValueError("tol_rel must be positive")
    M = np.asarray(M, dtype=float)
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol_rel * s[0]))


def effective_rank(X, eps=1e-8):
    """Smallest r whose best rank-r approximation is within eps ||X||_F.

    X must be PSD up to a small tolerance; its singular values are its
    eigenvalues, so the Frobenius tail of the spectrum decides r.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    X = np.asarray(X, dtype=float)
    lam = np.linalg.eigvalsh(0.5 * (X + X.T))  # ascending
    top = max(lam[-1], 0.0)
    if lam[0] < -1e-10 * max(top, 1.0):
        raise ValueError(f"matrix is not PSD within tolerance (min eig {lam[0]:.3e})")
    lam = np.clip(lam, 0.0, None)
    sq = lam * lam
    fro2 = float(np.sum(sq))
    if fro2 == 0.0:
        return 0
    # tails[c] = sum of the c smallest squared eigenvalues
    tails = np.concatenate(([0.0], np.cumsum(sq)))
    cut = eps * eps * fro2
    c = int(np.searchsorted(tails, cut, side="right")) - 1
    return X.shape[0] - c


def procrustes_distance(U, V, return_rotation=False):
    """min over rotations R of ||U - V R||_F, via the nuclear-norm formula.

    Equals sqrt(||U||_F^2 + ||V||_F^2 - 2 ||U^T V||_*).  With
    return_rotation=True also returns the minimizer R, the orthogonal polar
    factor of V^T U.
    """
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    if U.shape != V.shape:
        raise ValueError(f"shape mismatch: {U.shape} vs {V.shape}")
    M = V.T @ U
    W, sig, Zt = np.linalg.svd(M)
    d2 = float(np.sum(U * U) + np.sum(V * V) - 2.0 * np.sum(sig))
    dist = float(np.sqrt(max(d2, 0.0)))
    if return_rotation:
        return dist, W @ Zt
    return dist


def _smallest_nonzero_sv(M, tol_rel=1e-8):
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0.0
    keep = s[s > tol_rel * s[0]]
    return float(keep[-1]) if keep.size else 0.0


def procrustes_gap(U, V):
    """Both sides of ||UU^T - VV^T||_F >= max(s_min+(U), s_min+(V)) * dist(U, V O_p).

    s_min+ denotes the smallest nonzero singular value.  Returns (lhs, rhs);
    the inequality holds up to roundoff for every same-shape pair.
    """
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    if U.shape != V.shape:
        raise ValueError(f"shape mismatch: {U.shape} vs {V.shape}")
    lhs = float(np.linalg.norm(U @ U.T - V @ V.T))
    rhs = max(_smallest_nonzero_sv(U), _smallest_nonzero_sv(V)) * procrustes_distance(U, V)
    return lhs, rhs


def jacobian_singular_values(op, U):
    """Singular values (descending, length m) of the map D -> A(D U^T).

    Row i of the underlying m x (d p) matrix is the flattening of A_i U.
    Values beyond min(m, d p) are zero.
    """
    U = np.asarray(U, dtype=float)
    if U.ndim != 2 or U.shape[0] != op.d:
        raise ValueError(f"U has shape {U.shape}, expected ({op.d}, p)")
    J = (op.mats @ U).reshape(op.m, -1)
    s = np.linalg.svd(J, compute_uv=False)
    if s.size < op.m:
        s = np.concatenate([s, np.zeros(op.m - s.size)])
    return s


def pl_slack(op, b, U):
    """Both sides of the pointwise gradient-domination inequality.

    lhs = ||grad of the scaled error||_F^2, rhs = sigma_m^2 ||half residual||_2^2
    with sigma_m the m-th largest Jacobian singular value.  lhs >= rhs is an
    exact consequence of the chain rule, so violations indicate bugs.
    """
    g = grad_scaled_error(op, b, U)
    lhs = float(np.sum(g * g))
    res = residuals(op, b, U)
    sig_m = jacobian_singular_values(op, U)[op.m - 1]
    rhs = float(sig_m * sig_m * (res.half @ res.half))
    return lhs, rhs


def restricted_injectivity(op, r, n_samples, seed):
    """Sampled estimate of min ||A(X)||_2 over unit-Frobenius PSD X, rank(X) <= r.

    Draws n_samples matrices X = VV^T / ||VV^T||_F for every rank s = 1..r
    (substream (seed, "rip", s)) and returns the smallest measurement norm.
    Sampling all ranks up to r keeps the estimate non-increasing in r and in
    n_samples by construction.  This is an UPPER bound on the true constant:
    the minimum over a sample can only overshoot the minimum over the set.
    """
    if not 1 <= r <= op.d:
        raise ValueError(f"rank must satisfy 1 <= r <= d, got r={r}")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    best = np.inf
    for s in range(1, r + 1):
        rng = substream(seed, "rip", s)
        V = rng.standard_normal((n_samples, op.d, s))
        X = np.einsum("nij,nkj->nik", V, V)
        nrm = np.linalg.norm(X.reshape(n_samples, -1), axis=1)
        X /= nrm[:, None, None]
        meas = op.flat @ X.reshape(n_samples, -1).T
        best = min(best, float(np.min(np.linalg.norm(meas, axis=0))))
    return best


def regularity_radius_estimate(op, b, points, feas_tol=1e-6, norm_iters=300):
    """Sampled regularity radius sigma_m / (2 ||A||) over supplied feasible points.

    Each point must satisfy ||A(UU^T) - b||_2 <= feas_tol ||b||_2; offending
    points are rejected by index.  The manifold-wide minimum of sigma_m is
    replaced by the minimum over the sample, so the result is an estimate
    (an upper bound on the certified radius), not a guarantee.
    """
    if not points:
        raise ValueError("at least one feasible point is required")
    b_norm = float(np.linalg.norm(b))
    sig = np.inf
    for i, U in enumerate(points):
        gap = float(np.linalg.norm(op.apply(np.asarray(U) @ np.asarray(U).T) - b))
        if gap > feas_tol * b_norm:
            raise ValueError(
                f"point {i} fails the feasibility tolerance "
                f"({gap:.3e} > {feas_tol:.1e} * ||b||)")
        sig = min(sig, float(jacobian_singular_values(op, U)[op.m - 1]))
    return sig / (2.0 * operator_norm(op, norm_iters))


def manifold_distance_bound(op, b, U, eta, max_iters):
    """Gradient-descent upper bound on the distance from U to the feasible set.

    Runs descent from U; if the terminal training error certifies feasibility
    (<= 1e-20 max(1, ||b||^2)), returns ||U - U_terminal||_F, an upper bound
    on the true distance.  Returns None when no certificate is obtained
    (non-convergence or overflow).
    """
    from .dynamics import NumericalOverflowError, run_gd

    U = np.asarray(U, dtype=float)
    try:
        traj = run_gd(op, b, None, U, eta, max_iters, log_every=max_iters)
    except NumericalOverflowError:
        return None
    cert = 1e-20 * max(1.0, float(b @ b))
    if traj.records[-1].train_error <= cert:
        return float(np.linalg.norm(U - traj.final_U))
    return None


def _plain(value):
    """Coerce numpy scalars (and containers of them) to JSON-friendly types."""
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one named verification check."""

    check_id: str
    inputs: dict       # seed, dimensions, sample counts
    measured: dict     # named measured values
    tolerance: float
    passed: bool

    def to_dict(self):
        return {
            "check_id": self.check_id,
            "inputs": _plain(self.inputs),
            "measured": _plain(self.measured),
            "tolerance": _plain(self.tolerance),
            "passed": bool(self.passed),
        }


@dataclass(frozen=True)
class VerificationReport:
    """Named check results with explicit tolerances and pass/fail flags."""

    seed: int
    checks: tuple

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def to_json(self):
        payload = {
            "seed": self.seed,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }
        return json.dumps(payload, indent=2)

    def write_json(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write("check_id,passed,tolerance,measured\n")
            for c in self.checks:
                meas = ";".join(f"{k}={v!r}" for k, v in c.measured.items())
                fh.write(f"{c.check_id},{int(c.passed)},{c.tolerance!r},{meas}\n")
