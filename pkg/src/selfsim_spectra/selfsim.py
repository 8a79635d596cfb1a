"""Self-similar step functions of zero spectral order and their jump measures.

The function P on [0, 1] is the fixed point of

    P(alpha_{k-1} + a_k t) = beta_k + d_k P(t),   t in [0, 1),

where only the multiplier d_m of piece ``m`` is nonzero.  P is then a step
function whose distributional derivative is a purely atomic measure, with
atoms accumulating geometrically at the fixed point of the map
S_m(x) = alpha_{m-1} + a_m x.

All geometry (breakpoints, atom positions, gaps) is kept in exact rational
arithmetic; floats are produced only at the end, so gaps of size a_m**R stay
accurate to full relative precision however deep the truncation goes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np

from .errors import InvalidParameters, NonConvergentEvaluation

__all__ = [
    "as_fraction",
    "SelfSimilarParams",
    "Breakpoints",
    "Atom",
    "JumpMeasure",
    "validate",
    "breakpoints",
    "zeta",
    "zeta_exact",
    "z_counts",
    "jump_measure",
    "eval_P",
]

SUM_TOL = 1e-12


def as_fraction(value) -> Fraction:
    """Convert ``value`` to an exact rational.

    Strings may be fractions (``"2/3"``) or decimals (``"0.25"``).  Floats are
    read through their shortest decimal repr, so ``0.1`` becomes ``1/10``.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(int(value.numerator), int(value.denominator))
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            raise ValueError(f"non-finite number {value!r}")
        return Fraction(repr(value))
    if isinstance(value, np.integer):
        return Fraction(int(value))
    raise TypeError(f"cannot interpret {value!r} as a number")


@dataclass(frozen=True)
class SelfSimilarParams:
    """Similarity data (n, a, m, d_m, beta) of a zero-order self-similar P.

    ``m`` is 1-based, as are the implied piece indices.  Construction
    validates every invariant and raises :class:`InvalidParameters` listing
    all violations at once.
    """

    n: int
    a: tuple
    m: int
    d: Fraction
    beta: tuple

    def __post_init__(self):
        violations, details = [], []
        try:
            n = int(self.n)
            a = tuple(as_fraction(x) for x in self.a)
            beta = tuple(as_fraction(x) for x in self.beta)
            d = as_fraction(self.d)
            m = int(self.m)
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise InvalidParameters(["ShapeMismatch"], [str(exc)]) from exc

        if n < 2 or len(a) != n or len(beta) != n:
            violations.append("ShapeMismatch")
            details.append(f"need n >= 2 and len(a) = len(beta) = n, got n={n}, "
                           f"len(a)={len(a)}, len(beta)={len(beta)}")
        if any(x <= 0 for x in a):
            violations.append("NonPositiveLength")
            details.append("every a_k must be positive")
        if abs(float(sum(a, Fraction(0)) - 1)) > SUM_TOL:
            violations.append("LengthsDoNotSumToOne")
            details.append(f"sum(a) = {float(sum(a, Fraction(0)))!r}")
        if not 1 <= m <= n:
            violations.append("IndexOutOfRange")
            details.append(f"m={m} not in [1, {n}]")
        elif m <= len(a):
            am = a[m - 1]
            if am * abs(d) >= 1 or am * d * d >= 1:
                violations.append("ContractionViolated")
                details.append(f"a_m|d_m| = {float(am * abs(d))!r}, "
                               f"a_m d_m^2 = {float(am * d * d)!r}")
        if violations:
            raise InvalidParameters(violations, details)

        object.__setattr__(self, "n", n)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "m", m)

    @property
    def a_m(self) -> Fraction:
        return self.a[self.m - 1]

    @property
    def q(self) -> Fraction:
        """Spectral scale factor a_m * d_m."""
        return self.a_m * self.d

    def negated(self) -> "SelfSimilarParams":
        """Same similarity structure with every beta_k negated."""
        return SelfSimilarParams(self.n, self.a, self.m, self.d, tuple(-b for b in self.beta))

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "a": [str(x) for x in self.a],
            "m": self.m,
            "d": str(self.d),
            "beta": [str(x) for x in self.beta],
        }


def validate(n, a, m, d, beta) -> SelfSimilarParams:
    """Check raw similarity data; raises :class:`InvalidParameters`."""
    return SelfSimilarParams(n, tuple(a), m, d, tuple(beta))


@dataclass(frozen=True)
class Breakpoints:
    alpha: tuple
    x_star: Fraction

    @property
    def values(self) -> np.ndarray:
        return np.array([float(x) for x in self.alpha])


def breakpoints(params: SelfSimilarParams) -> Breakpoints:
    """Partial sums alpha_0..alpha_n and the accumulation point of the atoms."""
    alpha = [Fraction(0)]
    for ak in params.a:
        alpha.append(alpha[-1] + ak)
    # float inputs may miss 1 by rounding; the pieces must tile [0, 1]
    alpha[-1] = Fraction(1)
    x_star = alpha[params.m - 1] / (1 - params.a_m)
    return Breakpoints(tuple(alpha), x_star)


def zeta_exact(params: SelfSimilarParams) -> tuple:
    """Level-0 jump sizes of P at alpha_1..alpha_{n-1}, as exact rationals."""
    n, m, d, b = params.n, params.m, params.d, params.beta
    out = []
    for k in range(1, n):
        if k == m - 1:
            z = b[m - 1] - b[m - 2] + d * b[0]
        elif k == m:
            z = b[m] - b[m - 1] - d * b[n - 1]
        else:
            z = b[k] - b[k - 1]
        out.append(z)
    return tuple(out)


def zeta(params: SelfSimilarParams) -> np.ndarray:
    return np.array([float(z) for z in zeta_exact(params)])


def z_counts(params: SelfSimilarParams) -> tuple[int, int]:
    """(Z_plus, Z_minus): numbers of strictly positive / negative zeta_k."""
    z = zeta_exact(params)
    return sum(1 for x in z if x > 0), sum(1 for x in z if x < 0)


@dataclass(frozen=True)
class Atom:
    """Point mass of the measure; ``level`` r and ``index`` k locate it at S_m^r(alpha_k)."""

    exact: Fraction
    mass: float
    level: int
    index: int

    @property
    def position(self) -> float:
        return float(self.exact)


@dataclass(frozen=True)
class JumpMeasure:
    """Finite atomic measure on (0, 1), sorted by position."""

    atoms: tuple
    truncation_level: int
    params: SelfSimilarParams | None = field(default=None, compare=False)

    def __post_init__(self):
        atoms = tuple(sorted(self.atoms, key=lambda at: at.exact))
        for at in atoms:
            if not 0 < at.exact < 1:
                raise ValueError(f"atom position {at.exact} outside (0, 1)")
        for left, right in zip(atoms, atoms[1:]):
            if left.exact == right.exact:
                raise ValueError(f"coincident atoms at {left.exact}")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def from_points(cls, positions: Sequence, masses: Sequence[float]) -> "JumpMeasure":
        """Ad hoc measure (all atoms tagged level 0) from positions and masses."""
        atoms = [Atom(as_fraction(p), float(c), 0, i + 1)
                 for i, (p, c) in enumerate(zip(positions, masses))]
        return cls(tuple(atoms), 1)

    def __len__(self):
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    @property
    def positions(self) -> np.ndarray:
        return np.array([at.position for at in self.atoms])

    @property
    def masses(self) -> np.ndarray:
        return np.array([at.mass for at in self.atoms])

    @property
    def levels(self) -> np.ndarray:
        return np.array([at.level for at in self.atoms], dtype=int)

    def gaps(self) -> np.ndarray:
        """Distances between consecutive nodes 0, atoms..., 1 (length N+1)."""
        nodes = [Fraction(0)] + [at.exact for at in self.atoms] + [Fraction(1)]
        return np.array([float(y - x) for x, y in zip(nodes, nodes[1:])])

    def level_atoms(self, r: int) -> list:
        return [at for at in self.atoms if at.level == r]


def _descend_position(params: SelfSimilarParams, alpha, r: int, x: Fraction) -> Fraction:
    # closed form of S_m^r(x); no repeated subtraction
    am = params.a_m
    amr = am ** r
    return alpha[params.m - 1] * (1 - amr) / (1 - am) + amr * x


def jump_measure(params: SelfSimilarParams, R: int) -> JumpMeasure:
    """Atoms of rho = P' down to level R-1.

    Atom (r, k) sits at S_m^r(alpha_k) with mass d_m**r * zeta_k.  Atoms with
    zero mass (zeta_k = 0, or r >= 1 when d_m = 0) are dropped.
    """
    if R < 1:
        raise ValueError("truncation level R must be >= 1")
    alpha = breakpoints(params).alpha
    z = zeta_exact(params)
    atoms = []
    for r in range(R):
        dr = params.d ** r
        if dr == 0:
            break
        for k in range(1, params.n):
            mass = dr * z[k - 1]
            if mass == 0:
                continue
            pos = _descend_position(params, alpha, r, alpha[k])
            atoms.append(Atom(pos, float(mass), r, k))
    return JumpMeasure(tuple(atoms), R, params)


def eval_P(params: SelfSimilarParams, x, tol: float = 1e-14, max_depth: int = 200) -> float:
    """Evaluate P(x), taking right limits at jump points.

    The recursion descends into piece m exactly (rational arithmetic) and
    stops once the remaining contribution is below ``tol``; a point that
    leaves piece m is resolved exactly.  ``x = 1`` is read as the left limit.
    """
    bp = breakpoints(params)
    alpha = bp.alpha
    n, m, d = params.n, params.m, params.d
    xf = as_fraction(x)
    if not 0 <= xf <= 1:
        raise ValueError(f"x={x!r} outside [0, 1]")
    bmax = max(abs(b) for b in params.beta)
    bound = None
    if abs(d) < 1:
        bound = float(bmax) / (1 - abs(float(d)))

    value = Fraction(0)
    factor = Fraction(1)
    # with |d_m| < 1 the tail bound always terminates the loop
    depth = max_depth
    if bound is not None and bound > 0 and d != 0:
        depth = max(max_depth, int(math.log(tol / bound) / math.log(abs(float(d)))) + 2)
    for _ in range(depth):
        # piece k with alpha_{k-1} <= x < alpha_k; x = 1 belongs to piece n
        k = n
        for j in range(1, n):
            if xf < alpha[j]:
                k = j
                break
        if k != m:
            return float(value + factor * params.beta[k - 1])
        value += factor * params.beta[m - 1]
        factor *= d
        if factor == 0:
            return float(value)
        if bound is not None and abs(float(factor)) * bound <= tol:
            return float(value)
        xf = (xf - alpha[m - 1]) / params.a_m
    raise NonConvergentEvaluation(
        f"x={float(as_fraction(x))!r} stays in the recursive piece for {max_depth} "
        f"levels and |d_m| = {float(abs(d))!r} >= 1")
