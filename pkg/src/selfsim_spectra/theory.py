"""Finite-dimensional checks of the inertia identities behind the asymptotics.

Every identity here is an integer statement about negative indices of
symmetric matrices, or a matrix equality, so the checks are exact up to the
usual caveat that the matrices must not be singular to working precision.

* Block inertia additivity: ind [[A, B], [B^T, C]] = ind(A - B C^{-1} B^T) + ind C.
* Scaling: the block of K_R - lam M_R on the nodes inside the recursive piece
  is (1/a_m) (K_{R-1} - a_m d_m lam M_{R-1}), so both have the same inertia.
* The form on the span of the hat functions e_k is Gram - lam diag(zeta).
* Renormalization of the counting function: s(t) - s(t + ln(a_m d_m)) equals
  the number of positive zeta_k once t is large.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.linalg

from .errors import (MismatchBeyondTolerance, NotStabilized, SingularBlock, SingularC)
from .selfsim import SelfSimilarParams, breakpoints, jump_measure, z_counts, zeta
from .spectra import DiscreteSystem, Inertia, assemble, counting, inertia

__all__ = [
    "H2Basis",
    "BlockPartition",
    "h2_basis",
    "matrix_inertia",
    "c_form",
    "ind_c_large_lambda",
    "c_inverse_norm",
    "block_partition",
    "haynsworth_check",
    "schur_identity_check",
    "scaling_identity_check",
    "renormalization_check",
    "run_verification",
]

EPS = np.finfo(float).eps


# -- hat functions -----------------------------------------------------------

@dataclass(frozen=True)
class H2Basis:
    """Hat functions e_k, k = 1..n-1, rising on [gamma_k, alpha_k], falling on [alpha_k, delta_k]."""

    gamma: tuple
    alpha: tuple
    delta: tuple

    def __len__(self):
        return len(self.alpha)

    def pieces(self, k: int):
        """(left, right, slope) of the two affine pieces of e_k (1-based k)."""
        g, a, d = self.gamma[k - 1], self.alpha[k - 1], self.delta[k - 1]
        return [(g, a, 1 / (a - g)), (a, d, -1 / (d - a))]

    def evaluate(self, k: int, x) -> np.ndarray:
        g, a, d = (float(v) for v in (self.gamma[k - 1], self.alpha[k - 1], self.delta[k - 1]))
        x = np.asarray(x, dtype=float)
        up = (x - g) / (a - g)
        down = (d - x) / (d - a)
        out = np.where((x >= g) & (x <= a), up, 0.0)
        return np.where((x > a) & (x <= d), down, out)

    def gram_exact(self) -> list:
        """Exact H-inner products int e_j' e_k' dx."""
        size = len(self)
        G = [[Fraction(0)] * size for _ in range(size)]
        for j in range(1, size + 1):
            for k in range(j, size + 1):
                total = Fraction(0)
                for l1, r1, s1 in self.pieces(j):
                    for l2, r2, s2 in self.pieces(k):
                        overlap = min(r1, r2) - max(l1, l2)
                        if overlap > 0:
                            total += overlap * s1 * s2
                G[j - 1][k - 1] = G[k - 1][j - 1] = total
        return G

    def gram(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.gram_exact()])


def h2_basis(params: SelfSimilarParams) -> H2Basis:
    alpha = breakpoints(params).alpha
    n, m, a = params.n, params.m, params.a
    gam, alp, dlt = [], [], []
    for k in range(1, n):
        g = alpha[m] - a[m - 1] * a[n - 1] if k == m else alpha[k - 1]
        d = alpha[m - 1] + a[m - 1] * a[0] if k == m - 1 else alpha[k + 1]
        gam.append(g)
        alp.append(alpha[k])
        dlt.append(d)
    return H2Basis(tuple(gam), tuple(alp), tuple(dlt))


# -- dense inertia -----------------------------------------------------------

def matrix_inertia(A: np.ndarray, rtol: float | None = None) -> Inertia:
    """Inertia of a real symmetric matrix via Bunch-Kaufman LDL^T (Sylvester)."""
    A = np.asarray(A, dtype=float)
    size = A.shape[0]
    if size == 0:
        return Inertia(0, 0, 0)
    _, D, _ = scipy.linalg.ldl(A, lower=True)
    eig = []
    i = 0
    while i < size:
        if i + 1 < size and D[i + 1, i] != 0.0:
            eig.extend(np.linalg.eigvalsh(D[i:i + 2, i:i + 2]))
            i += 2
        else:
            eig.append(D[i, i])
            i += 1
    eig = np.array(eig)
    if rtol is None:
        rtol = 4 * size * EPS
    thresh = rtol * np.max(np.abs(A))
    n_minus = int(np.sum(eig < -thresh))
    n_zero = int(np.sum(np.abs(eig) <= thresh))
    return Inertia(n_minus, n_zero, size - n_minus - n_zero)


# -- the form on H2 ----------------------------------------------------------

@dataclass(frozen=True)
class CForm:
    lam: float
    direct: np.ndarray
    closed: np.ndarray
    deviation: float


def c_form(params: SelfSimilarParams, lam: float, R: int = 6, tol: float = 1e-10) -> CForm:
    """Matrix of the form restricted to span{e_k}, computed two ways.

    ``direct`` sums mass * e_j(x) e_k(x) over every atom of the level-R
    truncation (float evaluation); ``closed`` is Gram - lam diag(zeta).
    Raises :class:`MismatchBeyondTolerance` if they differ.
    """
    basis = h2_basis(params)
    G = basis.gram()
    measure = jump_measure(params, R)
    x, c = measure.positions, measure.masses
    E = np.array([basis.evaluate(k, x) for k in range(1, params.n)])
    direct = G - lam * (E * c) @ E.T
    closed = G - lam * np.diag(zeta(params))
    deviation = float(np.max(np.abs(direct - closed)))
    scale = max(1.0, float(np.max(np.abs(closed))))
    if deviation > tol * scale:
        raise MismatchBeyondTolerance(
            f"form on H2 differs from Gram - lam diag(zeta) by {deviation:.3e} at lam={lam}")
    return CForm(lam, direct, closed, deviation)


@dataclass(frozen=True)
class IndCResult:
    ind: int
    lambda_star: float
    weyl_threshold: float
    trace: tuple = ()


def ind_c_large_lambda(params: SelfSimilarParams, cap: float = 1e15) -> IndCResult:
    """Eventual negative index of C(lam) as lam -> +infinity.

    Scans lam = 2^j up to beyond the Weyl threshold ||G|| / min|zeta_k| (past
    it, -lam diag(zeta) dominates and the index is certainly #{zeta_k > 0}).
    ``lambda_star`` is the first grid point from which the index never changes.
    """
    z = zeta(params)
    zp, zm = z_counts(params)
    if zp + zm < params.n - 1:
        raise NotStabilized("some zeta_k = 0: C(lam) has a lam-independent direction")
    G = h2_basis(params).gram()
    weyl = float(np.linalg.norm(G, 2) / np.min(np.abs(z)))
    top = 4 * max(1.0, weyl)
    if top > cap:
        raise NotStabilized(f"Weyl threshold {weyl:.3e} beyond cap {cap:.1e}")
    lams = [1.0]
    while lams[-1] < top:
        lams.append(2 * lams[-1])
    lams.extend([2 * lams[-1], 4 * lams[-1]])
    inds = [matrix_inertia(G - lam * np.diag(z)).n_minus for lam in lams]
    start = len(inds) - 1
    while start > 0 and inds[start - 1] == inds[-1]:
        start -= 1
    return IndCResult(inds[-1], lams[start], weyl, tuple(zip(lams, inds)))


@dataclass(frozen=True)
class CInverseReport:
    lams: tuple
    norms: tuple
    scaled: tuple
    ratios: tuple
    bounded: bool
    precondition_met: bool


def c_inverse_norm(params: SelfSimilarParams, lambda_grid, metric: str = "h") -> CInverseReport:
    """Norm of C(lam)^{-1} along ``lambda_grid``.

    ``metric="h"`` measures the operator on span{e_k} in the H-norm, so that
    C(0) is the identity; ``metric="euclidean"`` uses the coefficient matrix
    directly.  ``bounded`` requires lam ||C^{-1}|| to change by at most a
    factor 2 between consecutive positive grid points.
    """
    basis = h2_basis(params)
    G = basis.gram()
    z = zeta(params)
    zp, zm = z_counts(params)
    norms = []
    for lam in lambda_grid:
        C = G - lam * np.diag(z)
        if metric == "h":
            nu = scipy.linalg.eigh(C, G, eigvals_only=True)
        elif metric == "euclidean":
            nu = np.linalg.eigvalsh(C)
        else:
            raise ValueError(f"unknown metric {metric!r}")
        smallest = float(np.min(np.abs(nu)))
        if smallest <= 64 * EPS * float(np.max(np.abs(nu))):
            raise SingularC(lam)
        norms.append(1.0 / smallest)
    lams = tuple(float(lam) for lam in lambda_grid)
    scaled = tuple(lam * nm for lam, nm in zip(lams, norms))
    ratios = tuple(s2 / s1 for (l1, s1), (l2, s2) in zip(zip(lams, scaled), zip(lams[1:], scaled[1:]))
                   if l1 > 0 and l2 > 0)
    bounded = all(0.5 <= r <= 2.0 for r in ratios)
    return CInverseReport(lams, tuple(norms), scaled, ratios, bounded,
                          precondition_met=(zp + zm == params.n - 1))


# -- block inertia additivity ------------------------------------------------

@dataclass(frozen=True)
class BlockPartition:
    """I1: nodes inside the recursive piece (levels >= 1); I2: level-0 nodes."""

    i1: np.ndarray
    i2: np.ndarray


def block_partition(system: DiscreteSystem) -> BlockPartition:
    levels = system.levels
    return BlockPartition(np.flatnonzero(levels >= 1), np.flatnonzero(levels == 0))


@dataclass(frozen=True)
class SchurReport:
    lam: float
    ind_full: int
    ind_schur: int
    ind_c: int

    @property
    def holds(self) -> bool:
        return self.ind_full == self.ind_schur + self.ind_c


def haynsworth_check(matrix: np.ndarray, i1, i2, lam: float = float("nan")) -> SchurReport:
    """Compare ind(matrix) with ind(Schur complement of the i2 block) + ind(i2 block)."""
    i1 = np.asarray(i1, dtype=int)
    i2 = np.asarray(i2, dtype=int)
    A = matrix[np.ix_(i1, i1)]
    B = matrix[np.ix_(i1, i2)]
    C = matrix[np.ix_(i2, i2)]
    if len(i2):
        ev = np.linalg.eigvalsh(C)
        if np.min(np.abs(ev)) <= 64 * len(i2) * EPS * np.max(np.abs(C)):
            raise SingularBlock(lam)
        S = A - B @ np.linalg.solve(C, B.T)
    else:
        S = A
    return SchurReport(lam, matrix_inertia(matrix).n_minus,
                       matrix_inertia(0.5 * (S + S.T)).n_minus, matrix_inertia(C).n_minus)


def schur_identity_check(system: DiscreteSystem, lam: float,
                         partition: BlockPartition | None = None) -> SchurReport:
    """Block inertia additivity for K - lam M split into I1 / I2."""
    if partition is None:
        partition = block_partition(system)
    return haynsworth_check(system.pencil(lam), partition.i1, partition.i2, lam)


@dataclass(frozen=True)
class ScalingReport:
    lam: float
    scaled_lam: float
    left: Inertia
    right: Inertia

    @property
    def holds(self) -> bool:
        return self.left.n_minus == self.right.n_minus


def scaling_identity_check(params: SelfSimilarParams, R: int, lam: float) -> ScalingReport:
    """ind of the I1 block at level R versus ind of the level R-1 pencil at a_m d_m lam.

    The left side is a dense LDL^T inertia of the block; the right side a
    Sturm count, so the two are computed along different paths.
    """
    if R < 2:
        raise ValueError("scaling identity needs R >= 2")
    if params.d == 0:
        raise ValueError("scaling identity is void for d_m = 0")
    fine = assemble(jump_measure(params, R), anchors=True)
    i1 = np.flatnonzero(fine.levels >= 1)
    left = matrix_inertia(fine.pencil(lam)[np.ix_(i1, i1)])
    coarse = assemble(jump_measure(params, R - 1))
    scaled = float(params.q) * lam
    right = inertia(coarse, scaled)
    return ScalingReport(lam, scaled, left, right)


# -- renormalization of the counting function --------------------------------

@dataclass(frozen=True)
class RenormEntry:
    t: float
    s_t: int
    s_shifted: int
    near_jump: bool

    @property
    def difference(self) -> int:
        return self.s_t - self.s_shifted


@dataclass(frozen=True)
class RenormReport:
    branch: str
    shift: float
    expected: int | None
    entries: tuple = ()
    verdict: str = ""
    first_t: float | None = None
    truncation_level: int | None = None

    @property
    def holds(self) -> bool:
        checked = [e for e in self.entries if not e.near_jump]
        return self.expected is not None and bool(checked) and all(
            e.difference == self.expected for e in checked)


def renormalization_check(params: SelfSimilarParams, t_grid, branch: str = "positive",
                          R: int | None = None, margin: float = 1e-3) -> RenormReport:
    """Check s(t) - s(t + shift) on ``t_grid``.

    s counts eigenvalues of the chosen branch with |lambda| < e^t.  For
    d_m > 0 the shift is ln(a_m d_m) and the expected difference is Z_+ (or
    Z_- on the negative branch); for d_m < 0 both branches repeat with
    period n - 1 over the doubled shift 2 ln(a_m |d_m|).  Grid points whose
    count changes within a relative ``margin`` of e^t are flagged and not
    judged.  ``first_t`` is the smallest t from which every later judged point
    holds.
    """
    sign = 1 if branch == "positive" else -1
    if branch not in ("positive", "negative"):
        raise ValueError("branch must be 'positive' or 'negative'")
    if params.d == 0:
        return RenormReport(branch, float("nan"), None,
                            verdict="skipped: d_m = 0 gives a finite spectrum")
    zp, zm = z_counts(params)
    if zp + zm < params.n - 1:
        return RenormReport(branch, float("nan"), None,
                            verdict="skipped: some zeta_k = 0")
    logq = math.log(abs(float(params.q)))
    if params.d > 0:
        shift, expected = logq, (zp if sign > 0 else zm)
    else:
        shift, expected = 2 * logq, params.n - 1
    t_grid = [float(t) for t in t_grid]
    if R is None:
        R = min(64, int(math.ceil(max(t_grid) / -logq)) + 12)
    system = assemble(jump_measure(params, R))

    def s(t):
        return counting(system, sign * math.exp(t))

    def jumpy(t):
        return (counting(system, sign * math.exp(t) * (1 - margin))
                != counting(system, sign * math.exp(t) * (1 + margin)))

    entries = tuple(RenormEntry(t, s(t), s(t + shift), jumpy(t) or jumpy(t + shift))
                    for t in t_grid)
    first_t = None
    for e in sorted(entries, key=lambda e: e.t, reverse=True):
        if e.near_jump:
            continue
        if e.difference != expected:
            break
        first_t = e.t
    report = RenormReport(branch, shift, expected, entries, "", first_t, R)
    verdict = "holds" if report.holds else "fails"
    return RenormReport(branch, shift, expected, entries, verdict, first_t, R)


# -- full suite --------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def run_verification(params: SelfSimilarParams, R: int = 10, n_lambda: int = 50,
                     lam_max: float = 1e4) -> list[CheckResult]:
    """Run every identity check on one parameter set and collect pass/fail lines."""
    from .spectra import compare_oracles, eigenvalues

    results = []
    zp, zm = z_counts(params)
    full_period = zp + zm == params.n - 1
    grid = np.geomspace(0.37, lam_max, n_lambda)
    lam_grid = np.concatenate([-grid[::-1], grid])

    try:
        dev = max(c_form(params, lam).deviation for lam in (-1e3, -10.0, 0.0, 10.0, 1e3))
        results.append(CheckResult("c_form two-way agreement", True, f"max deviation {dev:.2e}"))
    except MismatchBeyondTolerance as exc:
        results.append(CheckResult("c_form two-way agreement", False, str(exc)))

    if full_period:
        res = ind_c_large_lambda(params)
        results.append(CheckResult("ind C(lambda -> inf) = Z_plus", res.ind == zp,
                                   f"ind {res.ind}, Z_plus {zp}, stable from {res.lambda_star:g}"))
    else:
        results.append(CheckResult("ind C(lambda -> inf) = Z_plus", True,
                                   "skipped: some zeta_k = 0"))

    system = assemble(jump_measure(params, R), anchors=params.d != 0)
    bad, skipped = [], 0
    for lam in lam_grid:
        try:
            rep = schur_identity_check(system, float(lam))
        except SingularBlock:
            skipped += 1
            continue
        if not rep.holds:
            bad.append(float(lam))
    results.append(CheckResult("Schur inertia additivity", not bad,
                               f"{len(lam_grid) - skipped} points, {skipped} singular, "
                               f"failures at {bad}" if bad else
                               f"{len(lam_grid) - skipped} points, {skipped} singular"))

    if params.d != 0 and R >= 2:
        bad = [float(lam) for lam in lam_grid
               if not scaling_identity_check(params, R, float(lam)).holds]
        results.append(CheckResult("scaling identity", not bad,
                                   f"{len(lam_grid)} points" + (f", failures at {bad}" if bad else "")))
    else:
        results.append(CheckResult("scaling identity", True, "skipped: d_m = 0"))

    plain = assemble(jump_measure(params, R))
    if len(plain.masses):
        cmp = compare_oracles(plain)
        results.append(CheckResult("oracle equivalence", cmp.agrees(1e-10),
                                   f"{cmp.requested} eigenvalues, max relative "
                                   f"disagreement {cmp.worst:.2e}"))
    else:
        results.append(CheckResult("oracle equivalence", True, "skipped: empty spectrum"))

    if params.d != 0 and full_period:
        for branch, z in (("positive", zp), ("negative", zm)):
            if params.d > 0 and z == 0:
                continue
            first = eigenvalues(plain, 1 if branch == "positive" else 0,
                                1 if branch == "negative" else 0)
            lam1 = abs(float(first.positive[0] if branch == "positive" else first.negative[0]))
            step = abs(math.log(abs(float(params.q))))
            t_grid = math.log(lam1) + step * (np.arange(3, 6) + 0.5)
            rep = renormalization_check(params, t_grid, branch)
            results.append(CheckResult(f"renormalization ({branch})", rep.holds,
                                       f"differences {[e.difference for e in rep.entries]}, "
                                       f"expected {rep.expected}"))
    return results
