"""
Spectra of concentration operators
==================================

``Q_F P_E`` restricts a function to ``E`` in space and its Fourier
transform to ``F``.  For intervals the eigenvalues of ``P_E Q_F P_E`` are
the prolate (Slepian) eigenvalues: about ``|E||F|`` of them are close to 1,
then they plunge to 0.  The trace equals ``|E||F|``.

Run with ``python demos/spectra.py``.
"""

import numpy as np

from concop.sets import IntervalSet
from concop.spectral import ConcentrationOp, Grid, frobenius, op_norm, spectrum

grid = Grid(64.0, 2**13)

for c in (1.0, 4.0, 8.0):
    E = F = IntervalSet([(-c / 2, c / 2)])
    op = ConcentrationOp.from_sets(grid, E, F)
    rep = spectrum(op, int(c * c) + 6)
    print(f"|E|=|F|={c:g}: trace={op.trace:.4f}  HS norm={frobenius(op):.4f}")
    print("   top eigenvalues:", np.array2string(rep.eigenvalues, precision=4, max_line_width=100))

# order of composition does not change the norm (self-dual grid, L^2 = N)
g = Grid(64.0, 4096)
E = IntervalSet([(-2.0, -1.0), (0.5, 2.0)])
F = IntervalSet([(-1.0, 0.25)])
a = op_norm(ConcentrationOp.from_sets(g, E, F), tol=1e-10)
b = op_norm(ConcentrationOp.from_sets(g, F, E), tol=1e-10)
print(f"\n||Q_F P_E|| = {a:.8f}   ||Q_E P_F|| = {b:.8f}")
