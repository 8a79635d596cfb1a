"""Integer identities behind the geometric asymptotics, checked on matrices.

* splitting the nodes into the recursive piece and the rest, the negative
  index is additive over a Schur complement;
* the block on the recursive piece is a rescaled copy of the whole pencil
  one level shallower, at lambda times a_m d_m;
* counting eigenvalues below e^t, the count gains Z+ per factor 1/(a_m d_m).
"""

import math

import numpy as np

from selfsim_spectra import jump_measure, table_params, z_counts
from selfsim_spectra.spectra import assemble
from selfsim_spectra.theory import (c_form, ind_c_large_lambda, renormalization_check,
                                    run_verification, scaling_identity_check,
                                    schur_identity_check)

params = table_params(1)
system = assemble(jump_measure(params, 10), anchors=True)

for lam in (10.0, 100.0, 1000.0):
    rep = schur_identity_check(system, lam)
    print(f"lambda={lam:6g}: ind full {rep.ind_full} = {rep.ind_schur} + {rep.ind_c}")

for lam in (60.0, 600.0, 6000.0):
    rep = scaling_identity_check(params, 10, lam)
    print(f"block at {lam:6g}: {rep.left.n_minus}   level 9 at {rep.scaled_lam:7.1f}: "
          f"{rep.right.n_minus}")

cf = c_form(params, 250.0)
print("\nform on hat functions at 250:\n", np.round(cf.closed, 3))
print("summed over atoms differs by", cf.deviation)
res = ind_c_large_lambda(params)
print(f"its index settles at {res.ind} = Z+ = {z_counts(params)[0]} from lambda {res.lambda_star:g}")

rep = renormalization_check(params, np.log([10, 50, 300, 1800, 10000]))
print(f"\ns(t) - s(t - ln 6): {[e.difference for e in rep.entries]}, first holds at "
      f"e^t = {math.exp(rep.first_t):g}")

print()
for check in run_verification(table_params(3)):
    print(f"{'ok ' if check.passed else 'BAD'} {check.name}: {check.detail}")
