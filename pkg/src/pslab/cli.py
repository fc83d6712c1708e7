"""Command-line front end: argument parsing, experiment orchestration, and
reproducible CSV/JSON emission.

Every run writes one CSV (rows flushed as they are produced) and a JSON
manifest sidecar at <out>.manifest.json recording the command, every
parameter that affected the computation, the seed, the tool version, summary
results, and the wall time.  Identical configurations produce byte-identical
CSVs; manifests differ only in wall_time_s.

Exit codes: 0 success, 1 usage or domain errors, 2 budget or precision
exhaustion.  On a mid-run abort the partial CSV is kept with a trailing
`# aborted: <ErrorName>` comment line.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import statistics
import sys
import time
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from typing import Optional

import numpy as np

from . import __version__
from .arith import g_factor, sieve_kfree, sieve_tau, sieve_tau_k
from .errors import (
    CapacityExceeded,
    DegenerateExponents,
    DomainError,
    InsufficientPoints,
    PrecisionExhausted,
    PrecisionUnreachable,
    QuadratureNotConverged,
    TableTooSmall,
    UsageError,
)
from .expsum import (
    BoundFamily,
    CoeffMode,
    LinearSumJob,
    TripleSumJob,
    check_rs_bounds,
    check_vdc_bound,
    default_rs_sweep,
    default_vdc_sweep,
    perron_range_sum,
)
from .floorpow import ExponentParam, floor_pow, psi
from .vaaler import build_kernel, eval_delta_grid, eval_psi_star_grid
from .verify import (
    corollary_verify,
    iter_thm1_trials,
    solvable_fraction,
    thm2_adjudicate,
    thm2_verify,
    thm3_verify,
)

__all__ = ["RunConfig", "parse_args", "run", "main"]

_ENV_BUDGET = "PSLAB_WORK_BUDGET"

# exhaustion of a declared resource; everything else wrong is usage
_BUDGET_ERRORS = (
    CapacityExceeded,
    PrecisionExhausted,
    PrecisionUnreachable,
    QuadratureNotConverged,
    TableTooSmall,
)
_USAGE_ERRORS = (UsageError, DomainError, DegenerateExponents, ValueError)


@dataclass(frozen=True)
class RunConfig:
    """A fully validated run: nothing here can fail later for shape reasons."""

    command: str
    parameters: dict
    output_path: str
    seed: int
    work_budget: Optional[int]
    precision_bits: int


# ---------------------------------------------------------------------------
# parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _scaled_int(flag: str, text: str) -> int:
    # accepts plain integers and scientific notation like 1e5, exactly
    try:
        value = Decimal(text)
    except InvalidOperation:
        raise UsageError(f"{flag}: {text!r} is not a number") from None
    if value != value.to_integral_value():
        raise UsageError(f"{flag}: {text!r} is not an integer")
    return int(value)


def _int_list(flag: str, text: str) -> list[int]:
    items = [tok for tok in text.split(",") if tok.strip()]
    if not items:
        raise UsageError(f"{flag}: empty list")
    return [_scaled_int(flag, tok.strip()) for tok in items]


def _parse_float(flag: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"{flag}: {text!r} is not a number") from None


def _parse_c(text: str) -> ExponentParam:
    try:
        return ExponentParam.from_string(text)
    except ValueError as exc:
        raise UsageError(f"--c: {exc}") from None


def _build_parser() -> _Parser:
    parser = _Parser(prog="pslab", description="PS-sequence verification runs")
    parser.add_argument("--version", action="version", version=f"pslab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--out", default=None, help="CSV output path")
        p.add_argument("--seed", default="1")
        p.add_argument("--work-budget", default=None)
        p.add_argument("--precision-bits", default="128")

    p = sub.add_parser("kernel-check", description="sawtooth kernel grid check")
    p.add_argument("--H", default="1,16,256", help="comma list of degrees")
    p.add_argument("--grid-points", default="1024")
    add_common(p)

    p = sub.add_parser("expsum-check", description="exponential sum bound sweep")
    p.add_argument("--lemma", required=True, choices=["vdc", "rs24", "rs32"])
    p.add_argument("--sweep", default=None, help="job file, key=value per line")
    add_common(p)

    p = sub.add_parser("perron-check", description="sharp-cutoff integral check")
    p.add_argument("--L-grid", default="16,32,64,128,256,512,1024")
    p.add_argument("--mu", default="1.0")
    p.add_argument("--nu", default="4.0")
    p.add_argument("--lam", default="4.0")
    p.add_argument("--quad-points", default="2048")
    add_common(p)

    p = sub.add_parser("verify-corollary", description="tau over PS values")
    p.add_argument("--c", required=True)
    p.add_argument("--x-grid", required=True)
    add_common(p)

    p = sub.add_parser("verify-thm2", description="k-free divisor main terms")
    p.add_argument("--k", required=True)
    p.add_argument("--c", required=True)
    p.add_argument("--x-grid", required=True)
    add_common(p)

    p = sub.add_parser("verify-thm3", description="Stieltjes main-term check")
    p.add_argument("--f", required=True, choices=["tau", "tau_k", "kfree"])
    p.add_argument("--k", default="2")
    p.add_argument("--c", required=True)
    p.add_argument("--x-grid", required=True)
    add_common(p)

    p = sub.add_parser("thm1-experiment", description="dense-pair solvability")
    p.add_argument("--N", required=True)
    p.add_argument("--delta", required=True)
    p.add_argument("--c", required=True)
    p.add_argument("--trials", required=True)
    add_common(p)

    p = sub.add_parser("sieve-export", description="write an arithmetic table")
    p.add_argument("--kind", required=True, choices=["tau", "tau_k", "kfree", "g_k"])
    p.add_argument("--k", default="0")
    p.add_argument("--limit", required=True)
    p.add_argument("--format", default="csv", choices=["csv", "binary"])
    add_common(p)

    return parser


def parse_args(argv: list[str]) -> RunConfig:
    """Parse and validate; raises UsageError naming the offending flag."""
    ns = _build_parser().parse_args(argv)
    command = ns.command
    seed = _scaled_int("--seed", ns.seed)
    precision_bits = _scaled_int("--precision-bits", ns.precision_bits)
    if precision_bits < 53:
        raise UsageError("--precision-bits: must be at least 53")
    if ns.work_budget is not None:
        work_budget = _scaled_int("--work-budget", ns.work_budget)
    elif os.environ.get(_ENV_BUDGET):
        work_budget = _scaled_int(_ENV_BUDGET, os.environ[_ENV_BUDGET])
    else:
        work_budget = None
    if work_budget is not None and work_budget < 1:
        raise UsageError("--work-budget: must be positive")

    params: dict = {}
    if command == "kernel-check":
        params["H_list"] = _int_list("--H", ns.H)
        if min(params["H_list"]) < 1:
            raise UsageError("--H: degrees must be >= 1")
        params["grid_points"] = _scaled_int("--grid-points", ns.grid_points)
        if params["grid_points"] < 1:
            raise UsageError("--grid-points: must be positive")
    elif command == "expsum-check":
        params["lemma"] = ns.lemma
        params["sweep"] = ns.sweep
    elif command == "perron-check":
        params["L_grid"] = _int_list("--L-grid", ns.L_grid)
        if min(params["L_grid"]) < 1:
            raise UsageError("--L-grid: lengths must be >= 1")
        params["mu"] = _parse_float("--mu", ns.mu)
        params["nu"] = _parse_float("--nu", ns.nu)
        params["lam"] = _parse_float("--lam", ns.lam)
        if not 0 < params["mu"] <= params["nu"] <= params["lam"]:
            raise UsageError("--mu/--nu/--lam: need 0 < mu <= nu <= lam")
        params["quad_points"] = _scaled_int("--quad-points", ns.quad_points)
        if params["quad_points"] < 8:
            raise UsageError("--quad-points: must be at least 8")
    elif command in ("verify-corollary", "verify-thm2", "verify-thm3"):
        params["c"] = _parse_c(ns.c)
        params["x_grid"] = _int_list("--x-grid", ns.x_grid)
        if min(params["x_grid"]) < 1:
            raise UsageError("--x-grid: entries must be positive")
        if command == "verify-thm2":
            params["k"] = _scaled_int("--k", ns.k)
            if params["k"] < 2:
                raise UsageError("--k: must be at least 2")
        if command == "verify-thm3":
            params["f"] = ns.f
            params["k"] = _scaled_int("--k", ns.k)
            if ns.f != "tau" and params["k"] < 2:
                raise UsageError("--k: must be at least 2 for tau_k/kfree")
    elif command == "thm1-experiment":
        params["N"] = _scaled_int("--N", ns.N)
        if params["N"] < 100:
            raise UsageError("--N: must be at least 100")
        params["delta"] = _parse_float("--delta", ns.delta)
        if not 0.0 <= params["delta"] < 1.0:
            raise UsageError("--delta: must lie in [0, 1)")
        params["c"] = _parse_c(ns.c)
        params["trials"] = _scaled_int("--trials", ns.trials)
        if params["trials"] < 1:
            raise UsageError("--trials: must be positive")
    elif command == "sieve-export":
        params["kind"] = ns.kind
        params["k"] = _scaled_int("--k", ns.k)
        if ns.kind != "tau" and params["k"] < 2:
            raise UsageError("--k: must be at least 2 for this kind")
        params["limit"] = _scaled_int("--limit", ns.limit)
        if params["limit"] < 1:
            raise UsageError("--limit: must be positive")
        params["format"] = ns.format

    if ns.out is not None:
        out = ns.out
    elif command == "sieve-export":
        ext = "csv" if params["format"] == "csv" else "bin"
        out = f"pslab_{params['kind']}.{ext}"
    else:
        out = f"pslab_{command.replace('-', '_')}.csv"
    return RunConfig(
        command=command,
        parameters=params,
        output_path=out,
        seed=seed,
        work_budget=work_budget,
        precision_bits=precision_bits,
    )


# ---------------------------------------------------------------------------
# output plumbing


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


class _CsvSink:
    """Incremental CSV writer: header up front, flush after every row.

    Leaving the block on a library error appends the abort comment so a
    partial file is self-describing.
    """

    def __init__(self, path: str, header: list[str]):
        self._fh = open(path, "w", newline="")
        self._writer = csv.writer(self._fh, lineterminator="\n")
        self._writer.writerow(header)
        self._fh.flush()

    def row(self, values) -> None:
        self._writer.writerow([_fmt(v) for v in values])
        self._fh.flush()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None and issubclass(exc_type, _BUDGET_ERRORS + _USAGE_ERRORS):
            self._fh.write(f"# aborted: {exc_type.__name__}\n")
        self._fh.close()
        return False


def _jsonable(value):
    if isinstance(value, ExponentParam):
        return str(value)
    if isinstance(value, (CoeffMode, BoundFamily)):
        return value.value
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _write_manifest(config: RunConfig, status: str, results: dict, wall: float) -> None:
    payload = {
        "command": config.command,
        "parameters": {k: _jsonable(v) for k, v in config.parameters.items()},
        "output": config.output_path,
        "seed": config.seed,
        "work_budget": config.work_budget,
        "precision_bits": config.precision_bits,
        "version": __version__,
        "status": status,
        "results": {k: _jsonable(v) for k, v in results.items()},
        "wall_time_s": wall,
    }
    with open(config.output_path + ".manifest.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _pooled_ratio_slope(pairs) -> Optional[float]:
    # log ratio against log N, duplicates allowed; None when undetermined
    kept = [(n, r) for n, r in pairs if r > 0.0]
    if len(kept) < 3 or len({n for n, _ in kept}) < 2:
        return None
    ln = np.log([n for n, _ in kept])
    lr = np.log([r for _, r in kept])
    return float(np.polyfit(ln, lr, 1)[0])


# ---------------------------------------------------------------------------
# runners


def _run_kernel_check(config: RunConfig) -> dict:
    p = config.parameters
    n = p["grid_points"]
    xs = np.arange(n, dtype=np.float64) / n
    saw = psi(xs)
    max_excess = -math.inf
    min_delta = math.inf
    header = ["H", "x", "psi", "psi_star", "delta", "excess"]
    with _CsvSink(config.output_path, header) as sink:
        for H in p["H_list"]:
            kern = build_kernel(H)
            star = eval_psi_star_grid(kern, xs)
            delta = eval_delta_grid(kern, xs)
            excess = np.abs(star - saw) - delta
            for i in range(n):
                sink.row([H, xs[i], saw[i], star[i], delta[i], excess[i]])
            max_excess = max(max_excess, float(excess.max()))
            min_delta = min(min_delta, float(delta.min()))
    return {"max_excess": max_excess, "min_delta": min_delta}


def _load_sweep_jobs(path: str, lemma: str) -> list:
    default_exps = (1.0, 5 / 6, 5 / 6) if lemma == "rs24" else (5 / 6, 5 / 6, 5 / 6)
    jobs = []
    try:
        fh = open(path)
    except OSError as exc:
        raise UsageError(f"--sweep: cannot read {path}: {exc}") from None
    with fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            kv = {}
            for token in line.split():
                key, sep, value = token.partition("=")
                if not sep or not key:
                    raise UsageError(
                        f"--sweep line {lineno}: expected key=value, got {token!r}"
                    )
                kv[key] = value
            try:
                if lemma == "vdc":
                    job = LinearSumJob(
                        A=float(kv.pop("A")),
                        gamma=float(kv.pop("gamma")),
                        N=int(kv.pop("N")),
                        N1=int(kv.pop("N1")),
                    )
                else:
                    exps = (
                        float(kv.pop("e1", default_exps[0])),
                        float(kv.pop("e2", default_exps[1])),
                        float(kv.pop("e3", default_exps[2])),
                    )
                    job = TripleSumJob(
                        X_scale=float(kv.pop("X")),
                        exps=exps,
                        H=int(kv.pop("H")),
                        M=int(kv.pop("M")),
                        N=int(kv.pop("N")),
                        coeff_mode=CoeffMode(kv.pop("coeff", "unit")),
                        seed=int(kv.pop("seed", "0")),
                        twist_t=float(kv.pop("twist", "0")),
                    )
            except KeyError as exc:
                raise UsageError(f"--sweep line {lineno}: missing key {exc}") from None
            except ValueError as exc:
                raise UsageError(f"--sweep line {lineno}: {exc}") from None
            if kv:
                raise UsageError(f"--sweep line {lineno}: unknown keys {sorted(kv)}")
            jobs.append(job)
    if not jobs:
        raise UsageError("--sweep: no jobs in file")
    return jobs


def _run_expsum_check(config: RunConfig) -> dict:
    p = config.parameters
    lemma = p["lemma"]
    if lemma == "vdc":
        jobs = (
            _load_sweep_jobs(p["sweep"], lemma)
            if p["sweep"]
            else default_vdc_sweep()
        )
        header = ["A", "gamma", "N", "N1", "modulus", "bound", "ratio"]
        pairs = []
        with _CsvSink(config.output_path, header) as sink:
            for job in jobs:
                rep = check_vdc_bound(job)
                sink.row([job.A, job.gamma, job.N, job.N1,
                          rep.sum_modulus, rep.bound_value, rep.ratio])
                pairs.append((job.N, rep.ratio))
    else:
        family = BoundFamily.BILINEAR24 if lemma == "rs24" else BoundFamily.TYPEI32
        jobs = (
            _load_sweep_jobs(p["sweep"], lemma)
            if p["sweep"]
            else default_rs_sweep(family)
        )
        header = ["X", "H", "M", "N", "e1", "e2", "e3", "coeff", "seed",
                  "twist", "modulus", "bound", "ratio"]
        pairs = []
        with _CsvSink(config.output_path, header) as sink:
            for job in jobs:
                rep = check_rs_bounds(job, family, config.work_budget)
                sink.row([job.X_scale, job.H, job.M, job.N,
                          job.exps[0], job.exps[1], job.exps[2],
                          job.coeff_mode.value, job.seed, job.twist_t,
                          rep.sum_modulus, rep.bound_value, rep.ratio])
                pairs.append((job.N, rep.ratio))
    ratios = [r for _, r in pairs]
    return {
        "jobs": len(jobs),
        "max_ratio": max(ratios),
        "ratio_slope_vs_N": _pooled_ratio_slope(pairs),
    }


def _run_perron_check(config: RunConfig) -> dict:
    p = config.parameters
    mu, nu, lam = p["mu"], p["nu"], p["lam"]
    header = ["L", "N", "terms", "approx_re", "approx_im", "exact_re",
              "exact_im", "residual", "log_factor", "ratio"]
    best = -math.inf
    with _CsvSink(config.output_path, header) as sink:
        for L in p["L_grid"]:
            count = math.floor(lam * L) - math.floor(float(L))
            coeffs = np.ones(count, dtype=np.complex128)
            approx, exact, residual = perron_range_sum(
                coeffs, L, float(L), mu, nu, lam, quad_points=p["quad_points"]
            )
            log_factor = math.log(2.0 + L)
            ratio = residual / log_factor
            best = max(best, ratio)
            sink.row([L, L, count, approx.real, approx.imag, exact.real,
                      exact.imag, residual, log_factor, ratio])
    return {"fitted_C": best}


def _run_verify_corollary(config: RunConfig) -> dict:
    p = config.parameters
    reports = corollary_verify(p["c"], p["x_grid"])
    header = ["x", "lhs", "main_term", "residual", "fitted_exponent"]
    with _CsvSink(config.output_path, header) as sink:
        for r in reports:
            sink.row([r.params["x"], r.lhs, r.main_term, r.residual,
                      r.fitted_exponent])
    return {"fitted_exponent": reports[0].fitted_exponent}


def _run_verify_thm2(config: RunConfig) -> dict:
    p = config.parameters
    reports = thm2_verify(p["k"], p["c"], p["x_grid"])
    header = ["x", "lhs", "main_term", "alt_main_term", "residual",
              "residual_alt", "fitted_exponent"]
    with _CsvSink(config.output_path, header) as sink:
        for r in reports:
            sink.row([r.params["x"], r.lhs, r.main_term, r.alt_main_term,
                      r.residual, abs(r.lhs - r.alt_main_term),
                      r.fitted_exponent])
    try:
        adj = thm2_adjudicate(reports)
    except InsufficientPoints:
        return {"winner": "undetermined"}
    return {
        "winner": adj.winner,
        "plain_slope": adj.plain_slope,
        "plain_r2": adj.plain_r2,
        "normalized_slope": adj.normalized_slope,
        "normalized_r2": adj.normalized_r2,
    }


def _run_verify_thm3(config: RunConfig) -> dict:
    p = config.parameters
    c, xs = p["c"], p["x_grid"]
    limit = floor_pow(max(xs), c)
    if p["f"] == "tau":
        table = sieve_tau(limit)
    elif p["f"] == "tau_k":
        table = sieve_tau_k(p["k"], limit)
    else:
        table = sieve_kfree(p["k"], limit)
    reports = thm3_verify(table, c, xs)
    header = ["x", "lhs", "main_term", "residual", "residual_over_x",
              "fitted_exponent"]
    with _CsvSink(config.output_path, header) as sink:
        for r in reports:
            sink.row([r.params["x"], r.lhs, r.main_term, r.residual,
                      r.residual / r.params["x"], r.fitted_exponent])
    return {"fitted_exponent": reports[0].fitted_exponent}


def _run_thm1_experiment(config: RunConfig) -> dict:
    p = config.parameters
    budget = config.work_budget
    kwargs = {} if budget is None else {"work_budget": budget}
    header = ["trial", "set_size", "U", "principal", "ratio"]
    reports = []
    ratios = []
    with _CsvSink(config.output_path, header) as sink:
        for r in iter_thm1_trials(p["N"], p["delta"], p["c"], p["trials"],
                                  config.seed, **kwargs):
            ratio = r.lhs / r.main_term
            reports.append(r)
            ratios.append(ratio)
            sink.row([r.params["trial"], r.params["set_size"], int(r.lhs),
                      r.main_term, ratio])
    return {
        "solvable_fraction": solvable_fraction(reports),
        "median_ratio": statistics.median(ratios),
    }


def _run_sieve_export(config: RunConfig) -> dict:
    p = config.parameters
    kind, k, limit = p["kind"], p["k"], p["limit"]
    if kind == "tau":
        table = sieve_tau(limit)
    elif kind == "tau_k":
        table = sieve_tau_k(k, limit)
    elif kind == "kfree":
        table = sieve_kfree(k, limit)
    else:
        table = g_factor(k, limit)
    if p["format"] == "csv":
        table.to_csv(config.output_path)
    else:
        table.to_binary(config.output_path)
    return {"entries": table.limit, "nonzero": int(np.count_nonzero(table.values))}


_RUNNERS = {
    "kernel-check": _run_kernel_check,
    "expsum-check": _run_expsum_check,
    "perron-check": _run_perron_check,
    "verify-corollary": _run_verify_corollary,
    "verify-thm2": _run_verify_thm2,
    "verify-thm3": _run_verify_thm3,
    "thm1-experiment": _run_thm1_experiment,
    "sieve-export": _run_sieve_export,
}


def run(config: RunConfig) -> int:
    """Execute a validated config; returns the process exit code."""
    start = time.monotonic()
    try:
        results = _RUNNERS[config.command](config)
        status, code = "ok", 0
    except _BUDGET_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        results, status, code = {}, f"aborted: {type(exc).__name__}", 2
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        results, status, code = {}, f"error: {type(exc).__name__}", 1
    _write_manifest(config, status, results, time.monotonic() - start)
    return code


def main(argv: Optional[list[str]] = None) -> int:
    try:
        config = parse_args(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
