"""Eigenvalues of -y'' = lambda rho y, y(0) = y(1) = 0, three ways.

With rho atomic the problem is exactly a tridiagonal pencil K - lambda M.
Sturm bisection, a dense solve and shooting should agree; then the
truncation level is raised until the low spectrum stops moving.
"""

from fractions import Fraction

import numpy as np

from selfsim_spectra import (assemble, compare_oracles, converge_in_level, counting,
                             jump_measure, validate)

third = Fraction(1, 3)
params = validate(n=3, a=(third,) * 3, m=3, d=Fraction(1, 2), beta=(0, -1, 0))

system = assemble(jump_measure(params, 10))
print(f"N = {system.N} atoms, {int((system.masses > 0).sum())} positive and "
      f"{int((system.masses < 0).sum())} negative masses")

cmp = compare_oracles(system)
print("compared", cmp.requested, "eigenvalues per branch")
for name, dev in cmp.max_rel.items():
    print(f"  {name:<20} max relative gap {dev:.1e}")
print("positive:", cmp.bisection.positive)
print("negative:", cmp.bisection.negative)

# the counting function is just the negative index of K - Lambda M
Lambdas = np.array([1.0, 10.0, 100.0, 1000.0])
print("\ncounting(+Lambda):", counting(system, Lambdas))
print("counting(-Lambda):", counting(system, -Lambdas))

seq = converge_in_level(params, positive=4, negative=4, tol=1e-8)
print(f"\nsettled at R = {seq.truncation_level}")
for R, change in seq.history:
    print(f"  R = {R:2d}: largest relative change {change:.1e}")
print("negative branch:", seq.negative)
