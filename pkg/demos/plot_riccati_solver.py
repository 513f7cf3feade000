"""
The Riccati step in isolation
=============================

The mean-reversion estimate is the symmetric positive definite root of
``B^T X + X B - X C X + D = 0``.  Here the coefficients are built from a known
answer, and the solver recovers it.
"""

import numpy as np

from vasifit import CareProblem, care_solve

rng = np.random.default_rng(0)

# A known positive definite solution and an arbitrary antisymmetric B.
Q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
theta = (Q * [0.2, 0.7, 1.5]) @ Q.T
A = rng.standard_normal((3, 3))
B = A - A.T
C = np.diag([2.0, 3.0, 5.0])
D = -(B.T @ theta + theta @ B - theta @ C @ theta)

X, info = care_solve(CareProblem(B, C, D), full_output=True)
print("max |X - theta| =", np.max(np.abs(X - theta)))
print(info)

#%%
# With ``B = 0`` the equation reduces to ``X C X = D``; in one dimension the
# root is simply ``sqrt(D / C)``.
x = care_solve(CareProblem([[0.0]], [[4.0]], [[1.0]]))
print("scalar root", x[0, 0])
