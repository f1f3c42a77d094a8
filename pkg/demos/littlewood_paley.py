"""
Littlewood-Paley splitting
==========================

The identity is written as ``S + T`` where ``S f = sum_j psi_j (phi_j * f)``
smooths ``f`` at the scale matching the distance from the origin, and
``T`` keeps what is left.  The windows ``psi_j`` form a partition of unity
with at most three overlapping at any point.

Run with ``python demos/littlewood_paley.py``.
"""

import numpy as np

from concop.lpdecomp import LPOperators, ScaleStack, default_J, kernel_A, make_bump, schur_integrals
from concop.sets import comb_set
from concop.spectral import Grid, inverse_ft

bump = make_bump()
print(f"phi(0) = {bump.phi(0.0):.10f}   (integral of phihat is 3)")
print(f"table truncation bound = {bump.truncation_bound:.1e}")

grid = Grid(64.0, 2**13)
stack = ScaleStack(default_J(grid.L), bump)
x = np.linspace(-30, 30, 7)
print("\nwindows at", x)
print(np.round(stack.psi_all(x), 3))

ops = LPOperators(grid, stack)
rng = np.random.default_rng(0)
fhat = (rng.standard_normal(grid.N) + 1j * rng.standard_normal(grid.N)) * (np.abs(grid.xi) <= 4)
f = inverse_ft(grid, fhat)
err = np.linalg.norm(ops.S(f) + ops.T(f) - f) / np.linalg.norm(f)
print(f"\n||S f + T f - f|| / ||f|| = {err:.1e}")

print(f"\nA(10, 10) = {kernel_A(bump, stack, 10.0, 10.0):.6f}")

# Schur integral restricted to a comb: roughly proportional to its density
pts = np.linspace(-8, 8, 65)
for a in (0.3, 0.1, 0.03):
    E = comb_set(a, 8.0)
    rep = schur_integrals(E, E, bump, ScaleStack(8, bump), pts, items=("iii",))
    print(f"comb alpha={a:<5}  sup_x int_E |A(x,y)| dy = {rep['iii'].sup_estimate:.4f}")
