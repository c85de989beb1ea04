"""
Cholesky factors and symmetric eigendecompositions
==================================================

The alignment and projection stages rest on two factorizations. This
script checks both against numpy and shows the eigenvector sign rule.
"""

import numpy as np

from udapipe.linalg import cholesky, jacobi_eigen, solve_lower_triangular, sym_eigen

rng = np.random.default_rng(0)
M = rng.standard_normal((6, 6))
S = M.T @ M + np.eye(6)

# lower-triangular factor, S = L L^T
L = cholesky(S)
print("reconstruction error:", np.linalg.norm(L @ L.T - S) / np.linalg.norm(S))

# solving S x = b with two triangular solves
b = rng.standard_normal(6)
x = solve_lower_triangular(L, solve_lower_triangular(L, b), transpose=True)
print("solve residual:", np.linalg.norm(S @ x - b))

# eigenvalues come out descending; each eigenvector's largest entry is positive
w, V = sym_eigen(S)
print("eigenvalues:", np.round(w, 4))
print("largest entry per vector:", np.round(V[np.abs(V).argmax(axis=0), range(6)], 4))

# a plain cyclic Jacobi solver agrees
wj, Vj = jacobi_eigen(S)
print("Jacobi vs eigh, values:", np.max(np.abs(w - wj)), "vectors:", np.max(np.abs(V - Vj)))

# a singular matrix is refused rather than factored badly
try:
    cholesky(np.ones((3, 3)))
except ArithmeticError as exc:
    print("refused:", exc)
