"""Executable verification suite for the library's numerical identities.

Every check runs at fixed small dimensions from a seeded substream and
records measured values, the tolerance, and a pass flag.  These are the
hard invariants - adjoint identity, gradient vs finite differences, the
Procrustes closed form against its polar-factor oracle and sampled
rotations, the factored-model lower bound, pointwise gradient domination,
generic full row rank of the residual Jacobian, the singular-value
evolution along the flow, fourth-order convergence of the integrator, and
rank monotonicity along descent.  A failure indicates a bug, not noise.
"""

import numpy as np

from .dynamics import init_factor, integrate_flow_rk4, run_gd, singular_value_rates
from .geometry import (VerificationReport, CheckResult, jacobian_singular_values,
                       pl_slack, procrustes_distance, procrustes_gap)
from .objective import grad_scaled_error, grad_train_error, residuals
from .rng import derive_seed, substream
from .sensing import gen_operator, plant_instance


def _check_adjoint_identity(seed):
    op = gen_operator(8, 20, derive_seed(seed, "adjoint-op"))
    rng = substream(seed, "adjoint")
    worst = 0.0
    for _ in range(100):
        X = rng.standard_normal((8, 8))
        y = rng.standard_normal(20)
        lhs = float(op.apply(X) @ y)
        rhs = float(np.sum(X * op.adjoint(y)))
        worst = max(worst, abs(lhs - rhs) / (1.0 + abs(lhs)))
    tol = 1e-10
    return CheckResult("adjoint_identity", {"seed": seed, "d": 8, "m": 20, "pairs": 100},
                       {"max_relative_gap": worst}, tol, worst <= tol)


def _check_gradient_fd(seed):
    op = gen_operator(8, 20, derive_seed(seed, "grad-op"))
    inst = plant_instance(op, 2, derive_seed(seed, "grad-op"))
    rng = substream(seed, "grad")
    worst = 0.0
    for _ in range(10):
        U = rng.standard_normal((8, 5))
        h = 1e-6 * (1.0 + np.linalg.norm(U))
        grad = grad_train_error(op, inst.b, U)
        for _ in range(20):
            D = rng.standard_normal((8, 5))
            D /= np.linalg.norm(D)
            fp = residuals(op, inst.b, U + h * D).train_error
            fm = residuals(op, inst.b, U - h * D).train_error
            fd = (fp - fm) / (2.0 * h)
            dot = float(np.sum(grad * D))
            worst = max(worst, abs(dot - fd) / (1.0 + abs(fd)))
    tol = 1e-5
    return CheckResult("gradient_finite_difference",
                       {"seed": seed, "d": 8, "p": 5, "m": 20,
                        "points": 10, "directions": 20},
                       {"max_relative_gap": worst}, tol, worst <= tol)


def _check_procrustes_oracle(seed):
    rng = substream(seed, "procrustes")
    worst = 0.0
    for _ in range(100):
        U = rng.standard_normal((6, 3))
        V = rng.standard_normal((6, 3))
        dist, R = procrustes_distance(U, V, return_rotation=True)
        direct = float(np.linalg.norm(U - V @ R))
        worst = max(worst, abs(dist - direct))
    # closed form must also lower-bound every sampled rotation
    U = rng.standard_normal((6, 3))
    V = rng.standard_normal((6, 3))
    dist = procrustes_distance(U, V)
    margin = np.inf
    for _ in range(10000):
        Q, upper = np.linalg.qr(rng.standard_normal((3, 3)))
        Q = Q * np.sign(np.diag(upper))
        if rng.random() < 0.5:
            Q[:, 0] = -Q[:, 0]  # cover reflections too
        margin = min(margin, float(np.linalg.norm(U - V @ Q)) - dist)
    tol = 1e-9
    passed = worst <= tol and margin >= -tol
    return CheckResult("procrustes_closed_form",
                       {"seed": seed, "d": 6, "p": 3, "pairs": 100, "rotations": 10000},
                       {"max_polar_gap": worst, "min_rotation_margin": margin},
                       tol, passed)


def _check_procrustes_lower_bound(seed):
    rng = substream(seed, "procrustes-bound")
    min_slack = np.inf
    ok = True
    for i in range(100):
        p = (2, 4, 8)[i % 3]
        U = rng.standard_normal((8, p))
        V = rng.standard_normal((8, p))
        lhs, rhs = procrustes_gap(U, V)
        slack = lhs - rhs
        min_slack = min(min_slack, slack)
        ok = ok and lhs >= rhs - 1e-9 * (1.0 + lhs)
    return CheckResult("procrustes_lower_bound",
                       {"seed": seed, "d": 8, "p": [2, 4, 8], "pairs": 100},
                       {"min_slack": float(min_slack)}, 1e-9, ok)


def _check_pl_slack(seed):
    op = gen_operator(8, 20, derive_seed(seed, "pl-op"))
    inst = plant_instance(op, 2, derive_seed(seed, "pl-op"))
    rng = substream(seed, "pl")
    min_slack = np.inf
    worst_dom = -np.inf
    ok = True
    for _ in range(100):
        U = rng.standard_normal((8, 8))
        lhs, rhs = pl_slack(op, inst.b, U)
        min_slack = min(min_slack, lhs - rhs)
        ok = ok and lhs >= rhs - 1e-10 * (1.0 + lhs)
        # dominance chain: ||grad of scaled error||_F <= sigma_1 ||g||_2
        g = grad_scaled_error(op, inst.b, U)
        sig1 = jacobian_singular_values(op, U)[0]
        half = residuals(op, inst.b, U).half
        gap = float(np.linalg.norm(g)) - float(sig1 * np.linalg.norm(half))
        worst_dom = max(worst_dom, gap)
        ok = ok and gap <= 1e-10 * (1.0 + float(np.linalg.norm(g)))
    return CheckResult("pl_and_dominance",
                       {"seed": seed, "d": 8, "p": 8, "m": 20, "points": 100},
                       {"min_pl_slack": float(min_slack),
                        "max_dominance_gap": float(worst_dom)}, 1e-10, ok)


def _check_licq_rank(seed):
    op = gen_operator(30, 240, derive_seed(seed, "licq-op"))
    rng = substream(seed, "licq")
    smallest = np.inf
    for _ in range(10):
        U = rng.standard_normal((30, 30))
        smallest = min(smallest, float(jacobian_singular_values(op, U)[op.m - 1]))
    return CheckResult("licq_sigma_m_positive",
                       {"seed": seed, "d": 30, "p": 30, "m": 240, "draws": 10},
                       {"min_sigma_m": smallest}, 0.0, smallest > 0.0)


def _check_singular_value_rates(seed):
    op = gen_operator(8, 20, derive_seed(seed, "sv-op"))
    inst = plant_instance(op, 2, derive_seed(seed, "sv-op"))
    worst = 0.0
    n_sep = 0
    for i in range(10):
        U = init_factor(8, 8, 3, 1.0, derive_seed(seed, "sv", i))
        for rate in singular_value_rates(op, inst.b, U, 1e-7):
            if not rate.separated:
                continue
            n_sep += 1
            worst = max(worst, abs(rate.predicted - rate.measured)
                        / (1.0 + abs(rate.predicted)))
    tol = 1e-3
    return CheckResult("singular_value_evolution",
                       {"seed": seed, "d": 8, "p": 8, "rank": 3,
                        "cases": 10, "delta": 1e-7},
                       {"max_relative_gap": worst, "separated_values": n_sep},
                       tol, worst <= tol and n_sep > 0)


def _check_rk4_order(seed):
    op = gen_operator(6, 12, derive_seed(seed, "rk4-op"))
    inst = plant_instance(op, 1, derive_seed(seed, "rk4-op"))
    U0 = init_factor(6, 6, 2, 0.5, derive_seed(seed, "rk4"))
    horizon = 0.2
    dt = 2e-3
    finals = []
    for scale in (1, 2, 4):
        traj = integrate_flow_rk4(op, inst.b, U0, dt / scale,
                                  int(round(horizon / dt)) * scale,
                                  log_every=10 ** 9)
        finals.append(traj.final_U)
    d1 = float(np.linalg.norm(finals[0] - finals[1]))
    d2 = float(np.linalg.norm(finals[1] - finals[2]))
    ratio = d1 / d2 if d2 > 0 else np.inf
    return CheckResult("rk4_order",
                       {"seed": seed, "d": 6, "m": 12, "dt": dt, "horizon": horizon},
                       {"difference_ratio": ratio}, 0.0, 8.0 <= ratio <= 32.0)


def _check_rank_monotonicity(seed):
    op = gen_operator(10, 80, derive_seed(seed, "rankmono-op"))
    inst = plant_instance(op, 2, derive_seed(seed, "rankmono-op"))
    U0 = init_factor(10, 10, 3, 1e-2, derive_seed(seed, "rankmono"))
    traj = run_gd(op, inst.b, inst.x_star, U0, 2e-4, 20000, log_every=50)
    start = traj.records[0].num_rank
    worst = max(rec.num_rank for rec in traj.records)
    return CheckResult("rank_monotonicity",
                       {"seed": seed, "d": 10, "m": 80, "init_rank": 3,
                        "iters": traj.records[-1].k},
                       {"initial_rank": start, "max_rank_seen": worst},
                       0.0, worst <= start)


REGISTERED_CHECKS = (
    _check_adjoint_identity,
    _check_gradient_fd,
    _check_procrustes_oracle,
    _check_procrustes_lower_bound,
    _check_pl_slack,
    _check_licq_rank,
    _check_singular_value_rates,
    _check_rk4_order,
    _check_rank_monotonicity,
)


def run_verify_suite(seed):
    """Run every registered check; returns a `VerificationReport`.

    The report is a pure function of the seed: repeated invocations produce
    byte-identical JSON.
    """
    checks = tuple(fn(int(seed)) for fn in REGISTERED_CHECKS)
    return VerificationReport(seed=int(seed), checks=checks)
