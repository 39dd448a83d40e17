"""Training/test errors and gradients for the factored sensing objective.

Two scalings of the same objective coexist on purpose: the experiments run
plain gradient descent on f(U) = ||A(UU^T) - b||_2^2 (gradient 4 A*(r) U),
while the analysis-side checks use the scaled objective f/8 whose gradient
is (1/2) A*(r) U.  The half-residual r/2 is the natural argument of the
scaled gradient.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Residuals:
    """Residual vector of a factor U together with both error scalings."""

    raw: np.ndarray        # A(UU^T) - b
    half: np.ndarray       # raw / 2
    train_error: float     # ||raw||_2^2
    scaled_error: float    # train_error / 8


def residuals(op, b, U):
    U = np.asarray(U, dtype=float)
    if U.ndim != 2 or U.shape[0] != op.d:
        raise ValueError(f"U has shape {U.shape}, expected ({op.d}, p)")
    raw = op.apply(U @ U.T) - b
    f = float(raw @ raw)
    return Residuals(raw=raw, half=raw / 2.0, train_error=f, scaled_error=f / 8.0)


def grad_train_error(op, b, U):
    """Gradient of ||A(UU^T) - b||_2^2, namely 4 A*(A(UU^T) - b) U."""
    U = np.asarray(U, dtype=float)
    raw = op.apply(U @ U.T) - b
    return 4.0 * (op.adjoint(raw) @ U)


def grad_scaled_error(op, b, U):
    """Gradient of the /8-scaled training error; exactly grad_train_error / 8."""
    return grad_train_error(op, b, U) / 8.0


def test_error(U, x_star):
    """Squared Frobenius distance ||UU^T - x_star||_F^2."""
    U = np.asarray(U, dtype=float)
    x_star = np.asarray(x_star, dtype=float)
    if U.ndim != 2 or U.shape[0] != x_star.shape[0]:
        raise ValueError(f"U has shape {U.shape}, expected ({x_star.shape[0]}, p)")
    D = U @ U.T - x_star
    return float(np.sum(D * D))
