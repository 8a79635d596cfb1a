"""Geometric eigenvalue asymptotics and reproduction of the reference tables.

With q = a_m d_m the eigenvalues repeat geometrically:

* d_m > 0, positive branch:  lambda_{l + k Z+}      ~ mu_l q^{-k},  l = 1..Z+
* d_m > 0, negative branch:  lambda_{-(l + k Z-)}   ~ -mu_l q^{-k}, l = 1..Z-
* d_m < 0, positive branch:  lambda_{l + k(n-1)}    ~ mu_l |q|^{-2k}
* d_m < 0, negative branch:  lambda_{-(l + Z- + k(n-1))} ~ -mu_l |q|^{-2k-1}

The constants mu_l are estimated by the last scaled ratio; no extrapolation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BranchAbsent, PeriodDegenerate, TooFewEigenvalues
from .selfsim import SelfSimilarParams, validate, z_counts
from .spectra import EigenSequence, converge_in_level

__all__ = [
    "AsymptoticReport",
    "TableRow",
    "TableReport",
    "TABLES",
    "table_params",
    "branch_layout",
    "extract_mu",
    "window_counts",
    "reproduce_table",
]

LAMBDA_RTOL = 0.01
RATIO_ATOL = 1e-3

_THIRD = Fraction(1, 3)

# (branch, l, k, |lambda| as printed, scaled ratio as printed)
TABLES = {
    1: {
        "params": dict(n=3, a=(_THIRD,) * 3, m=3, d=Fraction(1, 2),
                       beta=(0, Fraction(2, 3), 1)),
        "rows": [
            ("positive", 1, 0, 4.93e0, 4.9341),
            ("positive", 2, 0, 1.36e1, 13.6598),
            ("positive", 1, 1, 4.94e1, 8.2322),
            ("positive", 2, 1, 8.85e1, 14.7576),
            ("positive", 1, 2, 2.96e2, 8.2330),
            ("positive", 2, 2, 5.31e2, 14.7577),
            ("positive", 1, 3, 1.78e3, 8.2330),
            ("positive", 2, 3, 3.19e3, 14.7577),
        ],
    },
    2: {
        "params": dict(n=3, a=(_THIRD,) * 3, m=3, d=Fraction(1, 2), beta=(0, -1, 0)),
        "rows": [
            ("negative", 1, 0, 5.10e0, 5.1005),
            ("negative", 1, 1, 2.60e1, 4.3459),
            ("negative", 1, 2, 1.56e2, 4.3458),
            ("negative", 1, 3, 9.39e2, 4.3458),
        ],
    },
    3: {
        "params": dict(n=3, a=(_THIRD,) * 3, m=3, d=Fraction(-1, 2), beta=(0, -1, 0)),
        "rows": [
            ("positive", 1, 0, 4.31e0, 4.3146),
            ("positive", 2, 0, 3.81e1, 38.0536),
            ("positive", 1, 1, 1.53e2, 4.2572),
            ("positive", 2, 1, 1.37e3, 38.0535),
            ("positive", 1, 2, 5.52e3, 4.2572),
            ("positive", 2, 2, 4.93e4, 38.0535),
            ("negative", 1, 0, 2.55e1, 4.2572),
            ("negative", 2, 0, 2.28e2, 38.0535),
            ("negative", 1, 1, 9.19e2, 4.2572),
            ("negative", 2, 1, 8.22e3, 38.0535),
            ("negative", 1, 2, 3.31e4, 4.2572),
            ("negative", 2, 2, 2.96e5, 38.0535),
        ],
    },
}


def table_params(table_id: int) -> SelfSimilarParams:
    return validate(**TABLES[table_id]["params"])


@dataclass(frozen=True)
class BranchLayout:
    case: str
    period: int
    offset: int
    base: float
    power_step: int
    power_offset: int

    def index(self, l: int, k: int) -> int:
        """1-based position within the branch of the eigenvalue labelled (l, k)."""
        return self.offset + l + k * self.period

    def scale(self, k: int) -> float:
        return self.base ** (self.power_step * k + self.power_offset)


def branch_layout(params: SelfSimilarParams, branch: str) -> BranchLayout:
    """Period, index offset and scaling of one branch of the spectrum."""
    if branch not in ("positive", "negative"):
        raise ValueError("branch must be 'positive' or 'negative'")
    zp, zm = z_counts(params)
    if params.d == 0:
        raise PeriodDegenerate("d_m = 0: the spectrum is finite")
    if zp + zm < params.n - 1:
        raise PeriodDegenerate(f"Z+ + Z- = {zp + zm} < n - 1 = {params.n - 1}")
    base = float(abs(params.q))
    if params.d > 0:
        period = zp if branch == "positive" else zm
        if period == 0:
            raise BranchAbsent(f"d_m > 0 and Z{'+' if branch == 'positive' else '-'} = 0")
        case = "positive-branch" if branch == "positive" else "negative-branch"
        return BranchLayout(case, period, 0, base, 1, 0)
    if branch == "positive":
        return BranchLayout("mixed", params.n - 1, 0, base, 2, 0)
    return BranchLayout("mixed", params.n - 1, zm, base, 2, 1)


@dataclass(frozen=True)
class AsymptoticReport:
    case: str
    branch: str
    period: int
    scale_factor: float
    layout: BranchLayout
    ratios: np.ndarray
    ratio_err: np.ndarray
    mu: np.ndarray
    mu_err: np.ndarray
    converged: bool


def extract_mu(params: SelfSimilarParams, seq: EigenSequence, branch: str = "positive",
               min_periods: int = 3) -> AsymptoticReport:
    """Scaled ratios r_l(k) and their last values mu_l for one branch.

    ``ratios[l-1, k]`` is |lambda| at label (l, k) times the branch scale.
    The extraction counts as converged when, for every l, the last ratio
    increment does not exceed the one before it (or sits at the eigenvalue
    error level).
    """
    layout = branch_layout(params, branch)
    values, errs = seq.branch(1 if branch == "positive" else -1)
    values = np.abs(values)
    n_k = (len(values) - layout.offset) // layout.period
    if n_k < min_periods:
        raise TooFewEigenvalues(f"{len(values)} {branch} eigenvalues give {max(n_k, 0)} "
                                f"periods, need {min_periods}")
    ratios = np.empty((layout.period, n_k))
    ratio_err = np.empty((layout.period, n_k))
    for l in range(1, layout.period + 1):
        for k in range(n_k):
            i = layout.index(l, k) - 1
            ratios[l - 1, k] = values[i] * layout.scale(k)
            ratio_err[l - 1, k] = errs[i] * layout.scale(k)
    mu = ratios[:, -1].copy()
    step = np.abs(ratios[:, -1] - ratios[:, -2])
    prev = np.abs(ratios[:, -2] - ratios[:, -3])
    floor = np.maximum(4 * ratio_err[:, -1], 1e-9 * mu)
    converged = bool(np.all((step <= prev) | (step <= floor)))
    return AsymptoticReport(layout.case, branch, layout.period,
                            layout.base ** layout.power_step, layout, ratios, ratio_err,
                            mu, np.maximum(step, ratio_err[:, -1]), converged)


def window_counts(values, start: float, factor: float, n_windows: int) -> list[int]:
    """Counts of |values| in (start/factor^k, start/factor^(k+1)] for k < n_windows."""
    v = np.abs(np.asarray(values))
    out = []
    for k in range(n_windows):
        lo, hi = start / factor**k, start / factor ** (k + 1)
        out.append(int(np.sum((v > lo) & (v <= hi))))
    return out


# -- tables ------------------------------------------------------------------

@dataclass(frozen=True)
class TableRow:
    branch: str
    l: int
    k: int
    index: int
    lam: float
    rel_err: float
    ratio: float
    truncation_level: int
    reference_lambda: float
    reference_ratio: float

    @property
    def lambda_ok(self) -> bool:
        return abs(abs(self.lam) - self.reference_lambda) <= LAMBDA_RTOL * self.reference_lambda

    @property
    def ratio_ok(self) -> bool:
        return abs(self.ratio - self.reference_ratio) <= RATIO_ATOL


@dataclass(frozen=True)
class TableReport:
    table_id: int
    params: SelfSimilarParams
    rows: tuple
    sequence: EigenSequence
    reports: dict

    @property
    def passed(self) -> bool:
        return all(r.lambda_ok and r.ratio_ok for r in self.rows)

    @property
    def truncation_level(self) -> int:
        return self.sequence.truncation_level


def reproduce_table(table_id: int, tol: float = 1e-6) -> TableReport:
    """Recompute one reference table and compare every cell.

    Eigenvalue cells are judged at 1 % relative, ratio cells at 1e-3 absolute.
    """
    if table_id not in TABLES:
        raise ValueError(f"no table {table_id}; choose 1, 2 or 3")
    params = table_params(table_id)
    stored = TABLES[table_id]["rows"]
    layouts = {b: branch_layout(params, b) for b in {row[0] for row in stored}}
    need = {"positive": 0, "negative": 0}
    for branch, l, k, _, _ in stored:
        need[branch] = max(need[branch], layouts[branch].index(l, k))
    seq = converge_in_level(params, need["positive"], need["negative"], tol=tol)

    rows = []
    for branch, l, k, lam_ref, ratio_ref in stored:
        lay = layouts[branch]
        i = lay.index(l, k)
        vals, errs = seq.branch(1 if branch == "positive" else -1)
        lam = float(vals[i - 1])
        rel = float(errs[i - 1] / abs(lam))
        rows.append(TableRow(branch, l, k, i if branch == "positive" else -i, lam, rel,
                             abs(lam) * lay.scale(k), seq.truncation_level,
                             lam_ref, ratio_ref))
    reports = {b: extract_mu(params, seq, b) for b in layouts}
    return TableReport(table_id, params, tuple(rows), seq, reports)
