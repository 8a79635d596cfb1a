"""Spectra of -y'' = lambda rho y, y(0) = y(1) = 0, with rho the derivative of a
self-similar step function (zero spectral order).

Modules
-------
selfsim   similarity data, the function P and its atomic measure
spectra   exact finite pencils, inertia, counting, three eigenvalue routes
theory    inertia identities (block additivity, scaling, form on H2, renormalization)
asympt    geometric asymptotic constants and the reference tables
cli       command line front end
"""

from .asympt import extract_mu, reproduce_table, table_params
from .selfsim import (SelfSimilarParams, breakpoints, eval_P, jump_measure, validate,
                      z_counts, zeta)
from .spectra import (assemble, compare_oracles, converge_in_level, counting, eigenvalues,
                      eigs_dense, inertia, shooting_det, shooting_roots)

__all__ = [
    "SelfSimilarParams", "validate", "breakpoints", "zeta", "z_counts", "jump_measure",
    "eval_P", "assemble", "inertia", "counting", "eigenvalues", "eigs_dense",
    "shooting_det", "shooting_roots", "compare_oracles", "converge_in_level",
    "extract_mu", "reproduce_table", "table_params",
]

__version__ = "0.1.0"
