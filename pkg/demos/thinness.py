"""
Thinness at infinity
====================

Two sets with opposite behaviour.  E1 is a union of balls around the
squares; it has finite measure but every ball ``B(n^2, rho(n^2))`` is full,
so its thinness ratio stays at 1.  E2 puts tiny intervals of radius
``1 / (n log n)`` at every integer; its measure is infinite but the ratio
decays like ``1 / log R``.

Run with ``python demos/thinness.py``.
"""

import math

import numpy as np

from concop.sets import comb_family, family_E1, family_E2, is_eps_thin, thin_profile, thinness_ratio

R = [10.0, 30.0, 100.0, 300.0, 1000.0]

for fam in (family_E1(), family_E2()):
    prof = thin_profile(fam, R)
    print(f"\n{fam.label}: sup of the ratio over |x| > R")
    print("      R      theta    1/log R    certified err")
    for r, t, e in prof.entries:
        print(f"{r:7.0f}  {t:9.6f}  {1 / math.log(r):9.6f}  {e:9.1e}")

# 1/log R is not quite an upper bound for E2: just past an integer c the
# ball of radius 1/x still covers the whole interval around c, and the
# ratio eta(c) * x slightly exceeds 1/log c.
prof = thin_profile(family_E2(), [10.0])
print(f"\nE2 at R=10: theta={prof.theta[0]:.8f}, 1/log 10={1 / math.log(10):.8f}")

# the comb family: every annulus keeps the same fraction of each cell
print("\ncomb(alpha, W=64): measured sup of the ratio")
for a in (0.3, 0.1, 0.03):
    res = is_eps_thin(comb_family(a, 64.0), 0.5)
    print(f"  alpha={a:<5} sup={res.sup:.4f}  verdict at eps=0.5: {res.verdict.value}")

# the ratio along a line, for plotting
x = np.linspace(2, 12, 11)
print("\nE2 ratio at integer points 2..12:", np.round(thinness_ratio(family_E2().window(20), x), 4))
