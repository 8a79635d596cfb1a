"""Command line front end.

    selfsim-spectra validate --config P.cfg
    selfsim-spectra eigs --config P.cfg --positive 8 --level auto
    selfsim-spectra table 1

The config is a flat ``key = value`` file with keys n, a, m, d, beta; lists
are comma separated and numbers may be fractions such as ``1/3``.

Exit codes: 0 success, 1 invalid config, 2 computation failure, 3 verification
mismatch.  Failures print one ``error: <Kind>: <reason>`` line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import asympt, selfsim, spectra, theory
from .errors import (ComputationError, ConfigError, InvalidParameters, SpectraError,
                     VerificationError)

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE, EXIT_MISMATCH = 0, 1, 2, 3

CONFIG_KEYS = ("n", "a", "m", "d", "beta")
EIGS_COLUMNS = ["branch", "l", "k", "index", "lambda", "rel_err", "ratio", "truncation_level"]


@dataclass(frozen=True)
class RunConfig:
    params: selfsim.SelfSimilarParams | None
    level: int | None          # None means automatic
    tol: float
    positive: int
    negative: int
    fmt: str
    out: str | None


def parse_config_text(text: str) -> selfsim.SelfSimilarParams:
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        for sep in ("=", ":"):
            if sep in line:
                key, value = line.split(sep, 1)
                break
        else:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key = key.strip().lower()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value.strip()
    missing = [k for k in CONFIG_KEYS if k not in raw]
    if missing:
        raise ConfigError(f"missing keys: {', '.join(missing)}")
    try:
        n = int(raw["n"])
        m = int(raw["m"])
        a = [Fraction(v.strip()) for v in raw["a"].split(",")]
        beta = [Fraction(v.strip()) for v in raw["beta"].split(",")]
        d = Fraction(raw["d"])
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad number: {exc}") from exc
    return selfsim.validate(n, a, m, d, beta)


def load_config(path: str) -> selfsim.SelfSimilarParams:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_config_text(text)


def _num(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _emit(cfg: RunConfig, columns: list, rows: list, extra: dict | None = None) -> None:
    if cfg.fmt == "json":
        payload = {"columns": columns, "rows": [dict(zip(columns, r)) for r in rows]}
        if extra:
            payload.update(extra)
        text = json.dumps(payload, indent=2, sort_keys=True, default=_num) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for r in rows:
            writer.writerow([_num(v) for v in r])
        text = buf.getvalue()
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def _require_params(cfg: RunConfig) -> selfsim.SelfSimilarParams:
    if cfg.params is None:
        raise ConfigError("this command needs --config")
    return cfg.params


def _sequence(params, cfg: RunConfig, positive: int, negative: int) -> spectra.EigenSequence:
    if cfg.level is None:
        return spectra.converge_in_level(params, positive, negative, tol=cfg.tol)
    system = spectra.assemble(selfsim.jump_measure(params, cfg.level))
    return spectra.eigenvalues(system, positive, negative, tol=min(cfg.tol, 1e-8))


def _label(params, branch: str, index: int):
    """(l, k, scale) for the index-th eigenvalue of a branch, or Nones."""
    try:
        lay = asympt.branch_layout(params, branch)
    except SpectraError:
        return None, None, None
    j = index - lay.offset
    if j < 1:
        return None, None, None
    k, l = divmod(j - 1, lay.period)
    return l + 1, k, lay.scale(k)


def _eig_rows(params, seq: spectra.EigenSequence) -> list:
    rows = []
    for branch, sign in (("positive", 1), ("negative", -1)):
        vals, errs = seq.branch(sign)
        for i, (lam, err) in enumerate(zip(vals, errs), 1):
            l, k, scale = _label(params, branch, i)
            ratio = abs(lam) * scale if scale is not None else None
            rows.append([branch, l, k, sign * i, float(lam), float(err / abs(lam)), ratio,
                         seq.truncation_level])
    return rows


# -- subcommands -------------------------------------------------------------

def cmd_validate(cfg: RunConfig, args) -> int:
    params = _require_params(cfg)
    zp, zm = selfsim.z_counts(params)
    bp = selfsim.breakpoints(params)
    rows = [
        ["status", "valid"],
        ["n", params.n], ["m", params.m], ["d", params.d],
        ["a", " ".join(str(x) for x in params.a)],
        ["beta", " ".join(str(x) for x in params.beta)],
        ["alpha", " ".join(str(x) for x in bp.alpha)],
        ["x_star", bp.x_star],
        ["zeta", " ".join(str(z) for z in selfsim.zeta_exact(params))],
        ["Z_plus", zp], ["Z_minus", zm],
        ["full_period", zp + zm == params.n - 1],
    ]
    _emit(cfg, ["check", "value"], rows)
    return EXIT_OK


def cmd_eval(cfg: RunConfig, args) -> int:
    params = _require_params(cfg)
    if args.x:
        xs = [Fraction(v.strip()) for v in args.x.split(",")]
    else:
        xs = [Fraction(i, args.points) for i in range(args.points + 1)]
    rows = [[float(x), selfsim.eval_P(params, x, tol=args.eval_tol), args.eval_tol] for x in xs]
    _emit(cfg, ["x", "P", "abs_err"], rows)
    return EXIT_OK


def cmd_measure(cfg: RunConfig, args) -> int:
    params = _require_params(cfg)
    R = cfg.level if cfg.level is not None else 8
    measure = selfsim.jump_measure(params, R)
    rows = [[at.level, at.index, at.position, at.exact, at.mass] for at in measure]
    _emit(cfg, ["level", "index", "position", "position_exact", "mass"], rows)
    return EXIT_OK


def cmd_eigs(cfg: RunConfig, args) -> int:
    params = _require_params(cfg)
    if cfg.positive <= 0 and cfg.negative <= 0:
        raise ConfigError("request eigenvalues with --positive and/or --negative")
    seq = _sequence(params, cfg, cfg.positive, cfg.negative)
    _emit(cfg, EIGS_COLUMNS, _eig_rows(params, seq),
          {"history": [list(h) for h in seq.history]})
    return EXIT_OK


def cmd_counting(cfg: RunConfig, args) -> int:
    params = _require_params(cfg)
    R = cfg.level if cfg.level is not None else 16
    system = spectra.assemble(selfsim.jump_measure(params, R))
    ts = np.linspace(args.tmin, args.tmax, args.points)
    s_pos = spectra.counting(system, np.exp(ts))
    s_neg = spectra.counting(system, -np.exp(ts))
    rows = [[float(t), float(math.exp(t)), int(a), int(b), R] for t, a, b in zip(ts, s_pos, s_neg)]
    _emit(cfg, ["t", "Lambda", "s_positive", "s_negative", "truncation_level"], rows)
    return EXIT_OK


def cmd_mu(cfg: RunConfig, args) -> int:
    params = _require_params(cfg)
    want = {}
    for branch in ("positive", "negative"):
        try:
            lay = asympt.branch_layout(params, branch)
        except asympt.BranchAbsent:
            continue
        want[branch] = lay.offset + lay.period * args.periods
    if not want:
        raise asympt.BranchAbsent("no branch with geometric asymptotics")
    positive = cfg.positive or want.get("positive", 0)
    negative = cfg.negative or want.get("negative", 0)
    seq = _sequence(params, cfg, positive, negative)
    rows, extra = [], {}
    for branch in want:
        rep = asympt.extract_mu(params, seq, branch)
        for l, (mu, err) in enumerate(zip(rep.mu, rep.mu_err), 1):
            rows.append([branch, rep.case, rep.period, rep.scale_factor, l, float(mu),
                         float(err), rep.converged, seq.truncation_level])
        extra[branch] = {"ratios": rep.ratios.tolist(), "ratio_err": rep.ratio_err.tolist()}
    _emit(cfg, ["branch", "case", "period", "scale_factor", "l", "mu", "mu_err",
                "converged", "truncation_level"], rows, extra)
    if not all(r[7] for r in rows):
        raise VerificationError("ratio sequences not converged; extend --periods")
    return EXIT_OK


def cmd_verify(cfg: RunConfig, args) -> int:
    params = _require_params(cfg)
    R = cfg.level if cfg.level is not None else 10
    results = theory.run_verification(params, R=R)
    _emit(cfg, ["check", "passed", "detail"], [[r.name, r.passed, r.detail] for r in results])
    if not all(r.passed for r in results):
        failed = [r.name for r in results if not r.passed]
        raise VerificationError(f"failed checks: {', '.join(failed)}")
    return EXIT_OK


def cmd_table(cfg: RunConfig, args) -> int:
    report = asympt.reproduce_table(args.table_id, tol=cfg.tol)
    rows = [[r.branch, r.l, r.k, r.index, r.lam, r.rel_err, r.ratio, r.truncation_level,
             r.reference_lambda, r.reference_ratio, r.lambda_ok, r.ratio_ok] for r in report.rows]
    _emit(cfg, EIGS_COLUMNS + ["reference_lambda", "reference_ratio", "lambda_ok", "ratio_ok"], rows)
    if not report.passed:
        raise VerificationError(f"table {args.table_id} has cells outside tolerance")
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "eval": cmd_eval,
    "measure": cmd_measure,
    "eigs": cmd_eigs,
    "counting": cmd_counting,
    "mu": cmd_mu,
    "verify": cmd_verify,
    "table": cmd_table,
}


def _level(text: str):
    if text == "auto":
        return None
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("level must be >= 1 or 'auto'")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="parameter file (keys n, a, m, d, beta)")
    common.add_argument("--level", type=_level, default=None,
                        help="truncation level R, or 'auto' (default)")
    common.add_argument("--tol", type=float, default=1e-6,
                        help="relative tolerance for level convergence")
    common.add_argument("--positive", type=int, default=0)
    common.add_argument("--negative", type=int, default=0)
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="write output here instead of stdout")

    parser = argparse.ArgumentParser(prog="selfsim-spectra", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check parameters, print zeta and Z counts")
    p = sub.add_parser("eval", parents=[common], help="sample P(x)")
    p.add_argument("--x", help="comma separated points")
    p.add_argument("--points", type=int, default=10)
    p.add_argument("--eval-tol", type=float, default=1e-12)
    sub.add_parser("measure", parents=[common], help="dump atoms of the truncated measure")
    sub.add_parser("eigs", parents=[common], help="eigenvalues with error bounds")
    p = sub.add_parser("counting", parents=[common], help="counting function on a log grid")
    p.add_argument("--tmin", type=float, default=0.0)
    p.add_argument("--tmax", type=float, default=8.0)
    p.add_argument("--points", type=int, default=33)
    p = sub.add_parser("mu", parents=[common], help="asymptotic constants mu_l")
    p.add_argument("--periods", type=int, default=4)
    sub.add_parser("verify", parents=[common], help="run the identity checks")
    p = sub.add_parser("table", parents=[common], help="reproduce reference table 1, 2 or 3")
    p.add_argument("table_id", type=int, choices=(1, 2, 3))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        params = load_config(args.config) if args.config else None
        cfg = RunConfig(params, args.level, args.tol, args.positive, args.negative,
                        args.fmt, args.out)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, InvalidParameters) as exc:
        return _fail(exc, EXIT_CONFIG)
    except ComputationError as exc:
        return _fail(exc, EXIT_COMPUTE)
    except VerificationError as exc:
        return _fail(exc, EXIT_MISMATCH)


def _fail(exc: Exception, code: int) -> int:
    print(f"error: {type(exc).__name__}: {exc}".replace("\n", " "), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
