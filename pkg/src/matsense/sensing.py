"""Planted low-rank models and generic Gaussian sensing operators.

A sensing operator maps a symmetric d x d matrix X to the m measurements
<A_1, X>, ..., <A_m, X>, where each A_i is a dense symmetric matrix whose
upper-triangular entries are independent standard normals, mirrored below
the diagonal.  The planted model is a random PSD matrix of prescribed rank,
normalized to unit trace.
"""

from dataclasses import dataclass, field

import numpy as np

from .rng import substream

# Default strict spectral bound for unit-trace planted models: any PSD matrix
# with trace 1 has spectral norm <= 1 < (1 + 1e-6)^2.
DEFAULT_XI = 1.0 + 1e-6


@dataclass(frozen=True)
class SensingOperator:
    """Linear map X -> (<A_i, X>)_i with exactly symmetric Gaussian A_i."""

    d: int
    m: int
    mats: np.ndarray  # (m, d, d); each slice equals its transpose exactly
    seed: int

    def __post_init__(self):
        if self.mats.shape != (self.m, self.d, self.d):
            raise ValueError(
                f"mats has shape {self.mats.shape}, expected {(self.m, self.d, self.d)}")

    @property
    def flat(self):
        """(m, d*d) view of the measurement matrices (rows are vec(A_i))."""
        return self.mats.reshape(self.m, self.d * self.d)

    def apply(self, X):
        """Forward measurement: vector of Frobenius inner products <A_i, X>."""
        X = np.asarray(X, dtype=float)
        if X.shape != (self.d, self.d):
            raise ValueError(f"X has shape {X.shape}, expected {(self.d, self.d)}")
        return self.flat @ X.ravel()

    def adjoint(self, y):
        """Adjoint map: sum_i y_i A_i (exactly symmetric)."""
        y = np.asarray(y, dtype=float)
        if y.shape != (self.m,):
            raise ValueError(f"y has shape {y.shape}, expected {(self.m,)}")
        return (self.flat.T @ y).reshape(self.d, self.d)


@dataclass(frozen=True)
class PlantedInstance:
    """Ground-truth model, its measurements, and the strict spectral bound."""

    x_star: np.ndarray      # d x d symmetric PSD, trace 1
    rank_planted: int
    b: np.ndarray           # measurements of x_star under the operator
    seed: int
    xi: float = DEFAULT_XI


def gen_operator(d, m, seed):
    """Generate a sensing operator with m symmetric Gaussian d x d matrices.

    Upper-triangular entries (diagonal included) are i.i.d. N(0, 1) from the
    (seed, "operator") substream; the strict lower triangle mirrors the upper
    one, so every matrix equals its transpose bit-for-bit.
    """
    if d < 1 or m < 1:
        raise ValueError(f"d and m must be positive, got d={d}, m={m}")
    rng = substream(seed, "operator")
    iu = np.triu_indices(d)
    il = np.tril_indices(d, -1)
    mats = np.zeros((m, d, d))
    mats[:, iu[0], iu[1]] = rng.standard_normal((m, iu[0].size))
    mats[:, il[0], il[1]] = mats[:, il[1], il[0]]
    return SensingOperator(d=d, m=m, mats=mats, seed=int(seed))


def gen_planted(d, r, seed):
    """Random rank-r PSD model VV^T / tr(VV^T) with V Gaussian d x r."""
    if not 1 <= r <= d:
        raise ValueError(f"rank must satisfy 1 <= r <= d, got r={r}, d={d}")
    rng = substream(seed, "planted")
    V = rng.standard_normal((d, r))
    X = V @ V.T
    X = 0.5 * (X + X.T)  # BLAS gemm output is not guaranteed bitwise symmetric
    return X / np.trace(X)


def plant_instance(op, r, seed, xi=DEFAULT_XI):
    """Planted model with rank r plus its measurement vector under `op`."""
    x_star = gen_planted(op.d, r, seed)
    return PlantedInstance(x_star=x_star, rank_planted=r, b=op.apply(x_star),
                           seed=int(seed), xi=xi)


def operator_norm(op, iters=200):
    """Power-iteration lower bound on ||A|| = max ||A(X)||_2 over ||X||_F = 1.

    Iterates X <- A*(A(X)) / ||.|| from a deterministic symmetric start
    (normalized all-ones plus identity), so the estimate is a pure function
    of the operator.  The returned value is nondecreasing in `iters` and
    converges to the true operator norm.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    X = np.ones((op.d, op.d)) + np.eye(op.d)
    X /= np.linalg.norm(X)
    val = 0.0
    for _ in range(iters):
        y = op.apply(X)
        val = float(np.linalg.norm(y))
        Z = op.adjoint(y)
        nz = np.linalg.norm(Z)
        if nz == 0.0:
            return 0.0
        X = Z / nz
    return val
