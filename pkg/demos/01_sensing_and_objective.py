"""Sensing operators, planted models, and the factored objective.

Builds a Gaussian symmetric sensing operator A and a planted rank-2 model,
then walks through the basic identities: the adjoint pairing, the power-
iteration operator norm against a dense SVD, and gradients checked by
central finite differences.
"""

import numpy as np

from matsense import (gen_operator, grad_train_error, operator_norm,
                      plant_instance, residuals)

d, m, rank = 12, 50, 2
op = gen_operator(d, m, seed=2024)
inst = plant_instance(op, rank, seed=2024)

print(f"operator: {m} symmetric {d}x{d} Gaussian matrices")
print(f"planted model: trace {np.trace(inst.x_star):.12f}, "
      f"rank {rank}, ||X*||_F^2 = {np.sum(inst.x_star**2):.6f}")
print(f"measurements: ||b||_2 = {np.linalg.norm(inst.b):.4f}")

# adjoint identity <A(X), y> = <X, A*(y)>
rng = np.random.default_rng(0)
X = rng.standard_normal((d, d))
y = rng.standard_normal(m)
lhs = op.apply(X) @ y
rhs = np.sum(X * op.adjoint(y))
print(f"\nadjoint identity gap: {abs(lhs - rhs):.3e} (lhs {lhs:.6f})")

# power iteration vs the exact largest singular value of the stacked map
exact = np.linalg.svd(op.mats.reshape(m, d * d), compute_uv=False)[0]
for iters in (1, 5, 50):
    est = operator_norm(op, iters=iters)
    print(f"operator norm after {iters:3d} iterations: {est:.8f} "
          f"(exact {exact:.8f})")

# gradient of ||A(UU^T) - b||^2 vs a central finite difference
U = rng.standard_normal((d, 4))
grad = grad_train_error(op, inst.b, U)
h = 1e-6 * (1 + np.linalg.norm(U))
D = rng.standard_normal((d, 4))
D /= np.linalg.norm(D)
fd = (residuals(op, inst.b, U + h * D).train_error
      - residuals(op, inst.b, U - h * D).train_error) / (2 * h)
print(f"\ndirectional derivative: analytic {np.sum(grad * D):.8f}, "
      f"finite difference {fd:.8f}")
