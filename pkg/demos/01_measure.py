"""Build a self-similar step function and look at its jump measure.

The parameters give a function P on [0, 1] that copies itself, halved, into
its last third.  Its derivative is a string of point masses piling up at 1.
"""

from fractions import Fraction

import numpy as np

from selfsim_spectra import breakpoints, eval_P, jump_measure, validate, z_counts
from selfsim_spectra.selfsim import zeta_exact

third = Fraction(1, 3)
params = validate(n=3, a=(third, third, third), m=3, d=Fraction(1, 2),
                  beta=(0, Fraction(2, 3), 1))

bp = breakpoints(params)
print("breakpoints", [str(x) for x in bp.alpha], "accumulation point", bp.x_star)
print("level-0 jumps", [str(z) for z in zeta_exact(params)], "Z+/Z-", z_counts(params))

# P is flat between atoms; sample it on a grid
xs = np.linspace(0, 1, 11)
print("P on a grid:", np.round([eval_P(params, x) for x in xs], 4).tolist())

measure = jump_measure(params, 4)
print(f"\n{len(measure)} atoms down to level {measure.truncation_level - 1}")
for atom in measure:
    print(f"  level {atom.level} index {atom.index}: x = {str(atom.exact):>6}  mass {atom.mass:+.5f}")

# each atom is a jump of P
for atom in list(measure)[:4]:
    eps = 1e-9
    jump = eval_P(params, atom.position + eps) - eval_P(params, atom.position - eps)
    print(f"jump of P at {atom.position:.5f}: {jump:.6f} (mass {atom.mass:.6f})")

# deep levels stay exact: the last gap is 3^-20 to full precision
deep = jump_measure(params, 20).gaps()
print("\nsmallest gap at level 19:", deep[-2], "vs", float(third ** 20))
