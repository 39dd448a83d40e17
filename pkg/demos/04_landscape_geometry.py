"""Geometric quantities behind the recovery behavior, all sampled at desk scale.

The zero-training-error set is well behaved when the residual Jacobian
D -> A(D U^T) keeps full row rank near it.  This script measures: Procrustes
distances between factors (rotation-invariant), the pointwise gradient-
domination inequality, the smallest Jacobian singular value at random
points, a sampled restricted-injectivity constant, the sampled regularity
radius, and a descent-based upper bound on the distance to the feasible set.
"""

import numpy as np

from matsense import (gen_operator, init_factor, jacobian_singular_values,
                      manifold_distance_bound, pl_slack, plant_instance,
                      procrustes_distance, regularity_radius_estimate,
                      restricted_injectivity, run_gd)

d, m = 10, 40
op = gen_operator(d, m, seed=21)
inst = plant_instance(op, 2, seed=21)
rng = np.random.default_rng(1)

# Procrustes distance: insensitive to rotations of the factor
U = rng.standard_normal((d, 4))
Q, r = np.linalg.qr(rng.standard_normal((4, 4)))
Q *= np.sign(np.diag(r))
print(f"dist(U, U R) over rotations R: {procrustes_distance(U, U @ Q):.3e}")
V = rng.standard_normal((d, 4))
dist, R = procrustes_distance(U, V, return_rotation=True)
print(f"dist(U, V O): closed form {dist:.6f}, "
      f"aligned residual {np.linalg.norm(U - V @ R):.6f}")

# gradient domination at random points
worst = np.inf
for _ in range(200):
    W = rng.standard_normal((d, d))
    lhs, rhs = pl_slack(op, inst.b, W)
    worst = min(worst, lhs - rhs)
print(f"\ngradient-domination slack over 200 random points: min {worst:.3e}")

sig = [float(jacobian_singular_values(op, rng.standard_normal((d, d)))[m - 1])
       for _ in range(5)]
print(f"smallest Jacobian singular value at 5 random points: "
      f"{min(sig):.3f} .. {max(sig):.3f} (all positive: full row rank)")

alpha = restricted_injectivity(op, 4, 1000, seed=5)
print(f"sampled restricted-injectivity constant (rank <= 4): {alpha:.3f}")

# Feasible points for the regularity radius: large-norm full-rank starts
# converge fast to interpolators with a full spectrum.  (A rank-2 feasible
# point would span only d * 2 = 20 < m Jacobian directions, so sigma_m ~ 0
# there; the radius is only informative at full-row-rank samples.)
points = []
for s in range(3):
    U0 = init_factor(d, d, d, 5.0, seed=200 + s)
    points.append(run_gd(op, inst.b, inst.x_star, U0, 1e-4, 200000).final_U)
rho = regularity_radius_estimate(op, inst.b, points)
print(f"sampled regularity radius from 3 feasible points: {rho:.3e}")

U_far = points[0] + 0.05 * rng.standard_normal((d, d))
bound = manifold_distance_bound(op, inst.b, U_far, 1e-4, 200000)
print(f"descent upper bound on distance to the feasible set: {bound:.5f} "
      f"(perturbation had norm {np.linalg.norm(U_far - points[0]):.5f})")
