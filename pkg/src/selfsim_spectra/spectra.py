"""Finite pencils K - lambda M for truncated atomic weights.

For a weight made of point masses J_j at nodes x_j, solutions of
-y'' = lambda rho y are affine between nodes, with slope jumps
-lambda J_j y(x_j).  The Dirichlet problem therefore reduces *exactly* to the
generalized eigenproblem K v = lambda M v with the tridiagonal stiffness

    K_ii = 1/h_{i-1} + 1/h_i,    K_{i,i+1} = -1/h_i,

and M = diag(J).  Since K is positive definite, Sylvester's law turns the
negative index of K - lambda M into an eigenvalue count, which is evaluated
with the Sturm recurrence (LDL^T of a tridiagonal matrix).

Three independent routes to the spectrum are provided: bisection on the
Sturm count (:func:`eigenvalues`), a dense congruence-transformed eigensolve
(:func:`eigs_dense`) and transfer-matrix shooting (:func:`shooting_roots`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import (BranchEmpty, ComputationError, DegenerateGap, NoConvergence,
                     TooFewEigenvalues)
from .selfsim import JumpMeasure, SelfSimilarParams, breakpoints, jump_measure, z_counts

__all__ = [
    "DiscreteSystem",
    "Inertia",
    "EigenSequence",
    "assemble",
    "negative_counts",
    "inertia",
    "counting",
    "eigenvalues",
    "eigs_dense",
    "shooting_det",
    "shooting_zero_count",
    "shooting_roots",
    "compare_oracles",
    "OracleComparison",
    "converge_in_level",
]

EPS = np.finfo(float).eps
TINY = np.finfo(float).tiny


@dataclass(frozen=True, eq=False)
class DiscreteSystem:
    """Tridiagonal stiffness plus diagonal signed mass on the atom mesh.

    ``gaps`` has N+1 entries (boundary nodes 0 and 1 included) and is derived
    from exact node positions.  Nodes flagged in ``anchor`` are level-0
    breakpoints carrying zero mass; they only refine the mesh.
    """

    nodes: np.ndarray
    gaps: np.ndarray
    masses: np.ndarray
    levels: np.ndarray
    indices: np.ndarray
    anchor: np.ndarray
    truncation_level: int
    params: SelfSimilarParams | None = None
    k_diag: np.ndarray = field(init=False, repr=False)
    k_off: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        inv = 1.0 / self.gaps
        object.__setattr__(self, "k_diag", inv[:-1] + inv[1:])
        object.__setattr__(self, "k_off", -inv[1:-1])
        for name in ("nodes", "gaps", "masses", "levels", "indices", "anchor", "k_diag", "k_off"):
            getattr(self, name).setflags(write=False)

    @property
    def N(self) -> int:
        return len(self.nodes)

    @property
    def K(self) -> np.ndarray:
        return np.diag(self.k_diag) + np.diag(self.k_off, 1) + np.diag(self.k_off, -1)

    @property
    def M(self) -> np.ndarray:
        return np.diag(self.masses)

    def pencil(self, lam: float) -> np.ndarray:
        """Dense matrix K - lam M."""
        return self.K - lam * self.M

    def scaled(self, c: float) -> "DiscreteSystem":
        """Same mesh with every mass multiplied by ``c``."""
        return DiscreteSystem(self.nodes.copy(), self.gaps.copy(), c * self.masses,
                              self.levels.copy(), self.indices.copy(), self.anchor.copy(),
                              self.truncation_level, None)


class Inertia(NamedTuple):
    n_minus: int
    n_zero: int
    n_plus: int


@dataclass(frozen=True, eq=False)
class EigenSequence:
    """Positive eigenvalues in increasing order, negative ones in decreasing order.

    ``*_err`` are absolute error bounds.  ``*_change`` hold the relative
    change of each eigenvalue over the last truncation step, when the
    sequence came from :func:`converge_in_level`.
    """

    positive: np.ndarray
    negative: np.ndarray
    positive_err: np.ndarray
    negative_err: np.ndarray
    truncation_level: int | None = None
    tol: float | None = None
    method: str = ""
    history: tuple = ()
    positive_change: np.ndarray | None = None
    negative_change: np.ndarray | None = None

    def branch(self, sign: int) -> tuple[np.ndarray, np.ndarray]:
        if sign > 0:
            return self.positive, self.positive_err
        return self.negative, self.negative_err

    def is_simple(self, rel: float = 1e-9) -> bool:
        for vals in (self.positive, np.abs(self.negative)):
            if len(vals) > 1:
                gaps = np.diff(vals)
                if np.any(gaps <= rel * np.maximum(1.0, vals[1:])):
                    return False
        return True


# -- assembly ----------------------------------------------------------------

def assemble(measure: JumpMeasure, anchors: bool = False) -> DiscreteSystem:
    """Build the pencil for ``measure``.

    With ``anchors=True`` every interior level-0 breakpoint alpha_k becomes a
    node even when its atom was dropped (zero mass), so that the nodes inside
    the recursive piece are separated from the rest of the mesh by nodes at
    alpha_{m-1} and alpha_m.
    """
    rows = [(at.exact, at.mass, at.level, at.index, False) for at in measure.atoms]
    if anchors:
        if measure.params is None:
            raise ValueError("anchors need a measure built from similarity parameters")
        alpha = breakpoints(measure.params).alpha
        present = {at.exact for at in measure.atoms}
        for k in range(1, measure.params.n):
            if alpha[k] not in present:
                rows.append((alpha[k], 0.0, 0, k, True))
        rows.sort(key=lambda row: row[0])
    if not rows:
        raise ValueError("cannot assemble an empty measure")

    exact = [Fraction(0)] + [row[0] for row in rows] + [Fraction(1)]
    gaps = np.array([float(y - x) for x, y in zip(exact, exact[1:])])
    with np.errstate(over="ignore", divide="ignore"):
        bad = (gaps <= 0) | ~np.isfinite(1.0 / gaps**2)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise DegenerateGap(f"gap {i} = {gaps[i]!r} is not representable; "
                            f"truncation level {measure.truncation_level} is too deep")
    return DiscreteSystem(
        nodes=np.array([float(row[0]) for row in rows]),
        gaps=gaps,
        masses=np.array([row[1] for row in rows], dtype=float),
        levels=np.array([row[2] for row in rows], dtype=int),
        indices=np.array([row[3] for row in rows], dtype=int),
        anchor=np.array([row[4] for row in rows], dtype=bool),
        truncation_level=measure.truncation_level,
        params=measure.params,
    )


# -- inertia and counting ----------------------------------------------------

def _pivot_factors(gaps: np.ndarray, masses: np.ndarray, lams: np.ndarray):
    """Scaled LDL^T pivots w_i = h_i d_i of K - lam M, one array per node.

    Writing d_i = 1/h_i + e_i, elimination gives

        e_1 = 1/h_0 - lam m_1,    e_{i+1} = e_i / (1 + h_i e_i) - lam m_{i+1},

    so the large stiffness terms 1/h never meet in a subtraction and tiny
    gaps cost no relative accuracy.
    """
    pivots = []
    e = 1.0 / gaps[0] - lams * masses[0]
    for i in range(len(masses)):
        w = 1.0 + gaps[i + 1] * e
        if i + 1 < len(masses):
            # an exactly zero pivot is perturbed to the negative side
            w = np.where(w == 0.0, -EPS, w)
            pivots.append(w)
            e = e / w - lams * masses[i + 1]
        else:
            pivots.append(w)
    return pivots, e


def negative_counts(system: DiscreteSystem, lams) -> tuple[np.ndarray, np.ndarray]:
    """Sturm count of K - lam M for an array of ``lams``.

    Returns ``(n_minus, singular)``: the number of negative pivots and a flag
    set when the last pivot vanishes to working precision (``lam`` is then an
    eigenvalue).
    """
    lams = np.asarray(lams, dtype=float)
    pivots, e = _pivot_factors(system.gaps, system.masses, lams)
    neg = np.zeros(lams.shape, dtype=int)
    for w in pivots[:-1]:
        neg += w < 0
    last = pivots[-1]
    scale = 1.0 + np.abs(system.gaps[-1] * e)
    singular = np.abs(last) <= 4 * system.N * EPS * scale
    neg += (last < 0) & ~singular
    return neg, singular


def inertia(system: DiscreteSystem, lam: float) -> Inertia:
    """Inertia (n_minus, n_zero, n_plus) of K - lam M."""
    neg, singular = negative_counts(system, lam)
    n_minus, n_zero = int(neg), int(singular)
    return Inertia(n_minus, n_zero, system.N - n_minus - n_zero)


def counting(system: DiscreteSystem, Lambda):
    """Eigenvalue count between 0 and ``Lambda`` (exclusive of both ends).

    For Lambda > 0 this is #{lambda_k in (0, Lambda)}; for Lambda < 0 it is
    #{lambda_k in (Lambda, 0)}.  Accepts scalars or arrays.
    """
    neg, _ = negative_counts(system, Lambda)
    if np.ndim(neg) == 0:
        return int(neg)
    return neg


# -- bisection ---------------------------------------------------------------

def _bisect(count_fn, p: int, tol: float, max_iter: int = 4000):
    """Locate the p smallest positive jump points of a counting function."""
    hi = 1.0
    while count_fn(np.array([hi]))[0] < p:
        hi *= 4.0
        if hi > 1e300:
            raise ComputationError("no upper bracket below 1e300")
    lo = 1.0
    while count_fn(np.array([lo]))[0] >= 1:
        lo /= 4.0
        if lo < 1e-300:
            raise ComputationError("no lower bracket above 1e-300")

    target = np.arange(1, p + 1)
    lo_a = np.full(p, lo)
    hi_a = np.full(p, hi)
    for _ in range(max_iter):
        active = (hi_a - lo_a) > tol * (hi_a + lo_a)
        mid = np.where(hi_a > 2 * lo_a, np.sqrt(lo_a * hi_a), 0.5 * (lo_a + hi_a))
        active &= (mid > lo_a) & (mid < hi_a)
        if not active.any():
            break
        idx = np.flatnonzero(active)
        up = count_fn(mid[idx]) >= target[idx]
        hi_a[idx[up]] = mid[idx[up]]
        lo_a[idx[~up]] = mid[idx[~up]]
    return 0.5 * (lo_a + hi_a), 0.5 * (hi_a - lo_a)


def _branch_size(system: DiscreteSystem, sign: int) -> int:
    # Sylvester with K > 0: one eigenvalue per mass of that sign
    return int(np.sum(sign * system.masses > 0))


def eigenvalues(system: DiscreteSystem, positive: int = 0, negative: int = 0,
                tol: float = 1e-8) -> EigenSequence:
    """Lowest ``positive`` positive and ``negative`` negative eigenvalues by bisection.

    Each returned lambda has ``counting`` jumping inside [lambda - err, lambda + err]
    with err <= tol * |lambda|.
    """
    tol = max(float(tol), 2 * EPS)
    out = {}
    for sign, want in ((1, positive), (-1, negative)):
        if want <= 0:
            out[sign] = (np.empty(0), np.empty(0))
            continue
        have = _branch_size(system, sign)
        if have == 0:
            raise BranchEmpty(f"no {'positive' if sign > 0 else 'negative'} masses, "
                              "so that branch of the spectrum is empty")
        if want > have:
            raise TooFewEigenvalues(f"requested {want} eigenvalues of sign {sign:+d}, "
                                    f"the pencil has only {have}")
        lam, err = _bisect(lambda x: negative_counts(system, sign * x)[0], want, tol)
        out[sign] = (sign * lam, err)
    return EigenSequence(out[1][0], out[-1][0], out[1][1], out[-1][1],
                         truncation_level=system.truncation_level, tol=tol, method="bisection")


def eigs_dense(system: DiscreteSystem) -> EigenSequence:
    """All eigenvalues from K = L L^T and eigh of L^{-1} M L^{-T}.

    The bidiagonal Cholesky factor is formed from the gap-form pivots rather
    than from K itself.

    Each eigenvalue mu of the transformed mass gives lambda = 1/mu.  The
    number of nonzero mu of each sign is fixed by the mass signs, which
    discards the zero mu produced by massless nodes.
    """
    if system.N > 2000:
        raise ValueError("dense oracle is limited to N <= 2000")
    pivots, _ = _pivot_factors(system.gaps, system.masses * 0.0, np.zeros(()))
    diag = np.sqrt(np.array(pivots) / system.gaps[1:])
    L = np.diag(diag) + np.diag(-1.0 / (system.gaps[1:-1] * diag[:-1]), -1)
    X = scipy.linalg.solve_triangular(L, np.diag(system.masses), lower=True)
    S = scipy.linalg.solve_triangular(L, X.T, lower=True)
    mu = np.linalg.eigvalsh(0.5 * (S + S.T))
    n_pos, n_neg = _branch_size(system, 1), _branch_size(system, -1)
    mu_pos = mu[::-1][:n_pos]
    mu_neg = mu[:n_neg]
    dmu = system.N * EPS * np.max(np.abs(mu)) if len(mu) else 0.0
    pos = 1.0 / mu_pos
    neg = 1.0 / mu_neg
    return EigenSequence(pos, neg, pos**2 * dmu, neg**2 * dmu,
                         truncation_level=system.truncation_level, method="dense")


# -- shooting ----------------------------------------------------------------

def _shoot(gaps: np.ndarray, masses: np.ndarray, lams: np.ndarray):
    """Node values y(x_1..x_N) and y(1) for y(0) = 0, y'(0) = 1."""
    y = np.zeros(lams.shape)
    slope = np.ones(lams.shape)
    values = []
    for h, c in zip(gaps[:-1], masses):
        y = y + slope * h
        slope = slope - lams * c * y
        values.append(y)
    y = y + slope * gaps[-1]
    return values, y


def shooting_det(measure, lam):
    """y(1; lam) for y(0) = 0, y'(0) = 1; vanishes exactly at eigenvalues.

    ``measure`` may be a :class:`JumpMeasure` or a :class:`DiscreteSystem`.
    """
    gaps = measure.gaps() if callable(getattr(measure, "gaps", None)) else measure.gaps
    lams = np.asarray(lam, dtype=float)
    _, y1 = _shoot(gaps, np.asarray(measure.masses), lams)
    return float(y1) if y1.ndim == 0 else y1


def shooting_zero_count(measure, lam) -> np.ndarray:
    """Number of sign changes of the shooting solution on (0, 1]."""
    gaps = measure.gaps() if callable(getattr(measure, "gaps", None)) else measure.gaps
    lams = np.asarray(lam, dtype=float)
    values, y1 = _shoot(gaps, np.asarray(measure.masses), lams)
    seq = values + [y1]
    changes = np.zeros(lams.shape, dtype=int)
    prev = np.sign(seq[0])
    for v in seq[1:]:
        s = np.sign(v)
        changes += (s * prev) < 0
        prev = np.where(s == 0, prev, s)
    return changes


def shooting_roots(measure, positive: int = 0, negative: int = 0) -> EigenSequence:
    """Eigenvalues as roots of y(1; lam).

    Roots are isolated by counting sign changes of the shooting solution
    (oscillation), then polished with Brent's method on y(1; lam).
    """
    out = {}
    for sign, want in ((1, positive), (-1, negative)):
        roots, errs = [], []
        if want > 0:
            zc = lambda x: shooting_zero_count(measure, sign * x)
            hi = 1.0
            while zc(hi) < want:
                hi *= 4.0
                if hi > 1e300:
                    raise BranchEmpty(f"fewer than {want} roots of sign {sign:+d}")
            lo0 = 1.0
            while zc(lo0) >= 1:
                lo0 /= 4.0
            for j in range(1, want + 1):
                lo, up = lo0, hi
                # shrink until (lo, up] holds exactly root j
                while not (zc(lo) == j - 1 and zc(up) == j):
                    mid = np.sqrt(lo * up) if up > 2 * lo else 0.5 * (lo + up)
                    if zc(mid) >= j:
                        up = mid
                    else:
                        lo = mid
                f = lambda x: shooting_det(measure, sign * x)
                root = scipy.optimize.brentq(f, lo, up, xtol=TINY, rtol=4 * EPS, maxiter=500)
                roots.append(sign * root)
                errs.append(4 * EPS * root)
        out[sign] = (np.array(roots), np.array(errs))
    return EigenSequence(out[1][0], out[-1][0], out[1][1], out[-1][1],
                         truncation_level=getattr(measure, "truncation_level", None),
                         method="shooting")


# -- cross-checking -----------------------------------------------------------

@dataclass(frozen=True)
class OracleComparison:
    """Pairwise relative disagreement of the three eigenvalue routes.

    ``requested`` holds the (positive, negative) counts compared: the leading
    eigenvalues of each branch, up to the cap, whose a priori dense error
    bound is within ``window``.  The dense route resolves lambda only to about
    N eps |lambda / lambda_min|, so deeper eigenvalues are left to bisection
    and shooting alone.
    """

    requested: tuple
    bisection: EigenSequence
    dense: EigenSequence
    shooting: EigenSequence
    max_rel: dict

    @property
    def worst(self) -> float:
        return max(self.max_rel.values(), default=0.0)

    def agrees(self, rel: float = 1e-10) -> bool:
        return self.worst <= rel


def _rel_diff(x: np.ndarray, y: np.ndarray) -> float:
    if len(x) == 0:
        return 0.0
    return float(np.max(np.abs(x - y) / np.abs(y)))


def compare_oracles(system: DiscreteSystem, positive: int = 6, negative: int = 6,
                    window: float = 1e-11) -> OracleComparison:
    """Run bisection, the dense solve and shooting on ``system`` and compare them."""
    dense = eigs_dense(system)
    counts = []
    for vals, errs, cap in ((dense.positive, dense.positive_err, positive),
                            (dense.negative, dense.negative_err, negative)):
        ok = errs <= window * np.abs(vals)
        # leading run only: a gap in the window would skip an index
        n_ok = int(np.argmin(ok)) if not ok.all() else len(ok)
        counts.append(min(cap, n_ok))
    n_pos, n_neg = counts
    bis = eigenvalues(system, n_pos, n_neg, tol=4 * EPS)
    shot = shooting_roots(system, n_pos, n_neg)
    pairs = {
        "bisection/dense": (bis, dense),
        "bisection/shooting": (bis, shot),
        "dense/shooting": (dense, shot),
    }
    max_rel = {}
    for name, (u, v) in pairs.items():
        max_rel[name] = max(_rel_diff(u.positive[:n_pos], v.positive[:n_pos]),
                            _rel_diff(u.negative[:n_neg], v.negative[:n_neg]))
    return OracleComparison((n_pos, n_neg), bis, dense, shot, max_rel)


# -- truncation control ------------------------------------------------------

def _branch_possible(params: SelfSimilarParams, sign: int) -> bool:
    zp, zm = z_counts(params)
    same = zp if sign > 0 else zm
    other = zm if sign > 0 else zp
    return same > 0 or (params.d < 0 and other > 0)


def converge_in_level(params: SelfSimilarParams, positive: int = 0, negative: int = 0,
                      tol: float = 1e-6, R_start: int = 2, step: int = 2, R_max: int = 64,
                      solver_tol: float = 1e-12) -> EigenSequence:
    """Deepen the truncation R, R+step, ... until the requested eigenvalues settle.

    Stops when every requested eigenvalue moves by less than ``tol``
    (relative) between consecutive levels and returns the deeper result.
    ``history`` lists (R, largest relative change).
    """
    for sign, want in ((1, positive), (-1, negative)):
        if want > 0 and not _branch_possible(params, sign):
            raise BranchEmpty(f"no atoms of sign {sign:+d} at any level")

    if params.d == 0:
        system = assemble(jump_measure(params, 1))
        seq = eigenvalues(system, positive, negative, tol=solver_tol)
        zeros = (np.zeros(len(seq.positive)), np.zeros(len(seq.negative)))
        return EigenSequence(seq.positive, seq.negative, seq.positive_err, seq.negative_err,
                             truncation_level=1, tol=tol, method="bisection",
                             history=((1, 0.0),), positive_change=zeros[0],
                             negative_change=zeros[1])

    history = []
    prev = None
    R = R_start
    while R <= R_max:
        system = assemble(jump_measure(params, R))
        if _branch_size(system, 1) < positive or _branch_size(system, -1) < negative:
            R += step
            continue
        seq = eigenvalues(system, positive, negative, tol=solver_tol)
        if prev is not None:
            dpos = np.abs(seq.positive - prev.positive) / np.abs(seq.positive)
            dneg = np.abs(seq.negative - prev.negative) / np.abs(seq.negative)
            change = float(max(dpos.max(initial=0.0), dneg.max(initial=0.0)))
            history.append((R, change))
            if change < tol:
                return EigenSequence(
                    seq.positive, seq.negative,
                    np.maximum(seq.positive_err, dpos * np.abs(seq.positive)),
                    np.maximum(seq.negative_err, dneg * np.abs(seq.negative)),
                    truncation_level=R, tol=tol, method="bisection",
                    history=tuple(history), positive_change=dpos, negative_change=dneg)
        prev = seq
        R += step
    raise NoConvergence(f"eigenvalues still moving at R_max={R_max}; history={history}")
