"""Acceptance gate: ten pinned criteria, one test and one printed line each.

Every test prints `[criterion N] PASS/FAIL - detail` through the capture
barrier, so the verdict lines appear in any pytest run, then asserts the
pinned tolerance.  Numbers here are frozen thresholds, not derived values;
loosening one is a contract change, not a tuning knob.
"""

import math
import statistics
import time

import numpy as np

from pslab.arith import dirichlet_convolve, g_factor, sieve_tau, sieve_tau_k
from pslab.expsum import (
    BoundFamily,
    default_rs_sweep,
    default_vdc_sweep,
    perron_range_sum,
    run_rs_sweep,
    run_vdc_sweep,
)
from pslab.floorpow import ExponentParam, floor_pow, ps_indicator, ps_membership, psi
from pslab.vaaler import build_kernel, eval_delta_grid, eval_psi_star_grid
from pslab.verify import (
    DenseSetPair,
    corollary_verify,
    count_solutions,
    fit_error_exponent,
    solvable_fraction,
    thm1_experiment,
    thm2_adjudicate,
    thm2_verify,
    thm3_verify,
)

from conftest import C_MAIN

X_GRID = [10**3, 10**4, 10**5, 10**6]


def _emit(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'} - {detail}")


def _oracle_count(N, c):
    # independent route: divisor enumeration of w(m) over [N^2/4, N^2)
    lo, hi = (N * N) // 4, N * N
    ind = ps_membership(lo, hi, c)
    w = np.zeros(hi - lo, dtype=np.int64)
    for a in range((N + 1) // 2, N):
        start = ((lo + a - 1) // a) * a
        for m in range(start, hi, a):
            b = m // a
            if 2 * b >= N and b < N:
                w[m - lo] += 1
    return int((w * ind).sum())


def test_criterion_01_vaaler_majorant(capsys):
    t0 = time.monotonic()
    offsets = np.linspace(1e-12, 1e-6, 50)
    base = np.arange(99_900, dtype=np.float64) / 99_900.0
    xs = np.concatenate([base, offsets, 1.0 - offsets])
    assert xs.size == 100_000
    saw = psi(xs)
    worst_excess = -math.inf
    worst_delta = math.inf
    for H in (1, 4, 16, 64, 256, 1024):
        kern = build_kernel(H)
        star = eval_psi_star_grid(kern, xs)
        delta = eval_delta_grid(kern, xs)
        worst_excess = max(worst_excess, float((np.abs(star - saw) - delta).max()))
        worst_delta = min(worst_delta, float(delta.min()))
    elapsed = time.monotonic() - t0
    ok = worst_excess <= 1e-10 and worst_delta >= -1e-12 and elapsed < 30
    _emit(capsys, 1, ok,
          f"max(|psi*-psi|-delta) {worst_excess:.2e} <= 1e-10, "
          f"min delta {worst_delta:.2e} >= -1e-12, H up to 1024, {elapsed:.1f}s")
    assert ok


def test_criterion_02_convolution_identity(capsys):
    t0 = time.monotonic()
    tau = sieve_tau(100_000)
    exact = True
    sums = {}
    for k in (2, 3, 4):
        conv = dirichlet_convolve(tau, g_factor(k, 100_000))
        exact = exact and np.array_equal(conv.values, sieve_tau_k(k, 100_000).values)
        sums[k] = int(np.abs(g_factor(k, 10**6).values).sum())
    bounded = all(sums[k] <= 10 ** (6 / k) for k in (2, 3, 4))
    elapsed = time.monotonic() - t0
    ok = exact and bounded and elapsed < 60
    _emit(capsys, 2, ok,
          f"tau_(k) = tau * g_k exact to 1e5 for k in 2,3,4: {exact}; "
          f"sum|g_k| to 1e6 = {sums[2]},{sums[3]},{sums[4]} "
          f"<= 1000,100,31.6: {bounded}, {elapsed:.1f}s")
    assert ok


def test_criterion_03_ps_indicator_oracle(capsys):
    t0 = time.monotonic()
    top = 100_000
    mismatches = 0
    for c_str in ("11/10", "23/20", "6/5", "3/2"):
        c = ExponentParam.from_string(c_str)
        floors = []
        n = 1
        while True:
            value = floor_pow(n, c)
            if value > top:
                break
            floors.append(value)
            n += 1
        member = np.zeros(top + 1, dtype=bool)
        member[np.array(floors)] = True
        for m in range(1, top + 1):
            if bool(ps_indicator(m, c)) != bool(member[m]):
                mismatches += 1
    elapsed = time.monotonic() - t0
    ok = mismatches == 0 and elapsed < 60
    _emit(capsys, 3, ok,
          f"{mismatches} mismatches vs direct enumeration over m <= 1e5 "
          f"at four exponents, {elapsed:.1f}s")
    assert ok


def test_criterion_04_corollary(capsys, tau_table_1e6):
    t0 = time.monotonic()
    reports = corollary_verify(C_MAIN, X_GRID, table=tau_table_1e6)
    slope, r2 = fit_error_exponent(
        [(r.params["x"], r.residual) for r in reports]
    )
    last = reports[-1]
    rel = last.residual / (C_MAIN.as_float * 10**6 * math.log(10**6))
    elapsed = time.monotonic() - t0
    ok = slope <= 0.98 and rel <= 0.02 and elapsed < 600
    _emit(capsys, 4, ok,
          f"fitted slope {slope:.4f} <= 0.98 (r2 {r2:.4f}), "
          f"relative residual at 1e6 = {rel:.5f} <= 0.02, {elapsed:.1f}s")
    assert ok


def test_criterion_05_thm2_adjudication(capsys, tau2_table_1e6):
    t0 = time.monotonic()
    reports = thm2_verify(2, C_MAIN, X_GRID, table=tau2_table_1e6)
    adj = thm2_adjudicate(reports)
    elapsed = time.monotonic() - t0
    ok = adj.winner in ("plain", "zeta_normalized") and elapsed < 600
    _emit(capsys, 5, ok,
          f"exactly one sublinear variant: {adj.winner} "
          f"(plain slope {adj.plain_slope:.3f}, "
          f"zeta-normalized slope {adj.normalized_slope:.3f}), {elapsed:.1f}s")
    assert ok


def test_criterion_06_thm3_consistency(capsys, tau_table_1e6, tau2_table_1e6):
    t0 = time.monotonic()
    inversions = {}
    for name, table in (("tau", tau_table_1e6), ("tau_(2)", tau2_table_1e6)):
        reports = thm3_verify(table, C_MAIN, X_GRID)
        ratios = [r.residual / r.params["x"] for r in reports]
        inversions[name] = sum(
            1 for i in range(len(ratios) - 1) if ratios[i + 1] >= ratios[i]
        )
    elapsed = time.monotonic() - t0
    ok = all(v <= 1 for v in inversions.values()) and elapsed < 600
    _emit(capsys, 6, ok,
          f"residual/x inversions along the grid: tau {inversions['tau']}, "
          f"tau_(2) {inversions['tau_(2)']} (<= 1 allowed), {elapsed:.1f}s")
    assert ok


def test_criterion_07_thm1_desk_scale(capsys):
    t0 = time.monotonic()
    c = ExponentParam(23, 20)
    reports = thm1_experiment(2000, 0.05, c, trials=50, seed=1)
    fraction = solvable_fraction(reports)
    med = statistics.median(r.lhs / r.main_term for r in reports)
    full_u = int(thm1_experiment(2000, 0.0, c, trials=1, seed=1)[0].lhs)
    oracle = _oracle_count(2000, c)
    elapsed = time.monotonic() - t0
    ok = (fraction == 1.0 and 0.5 <= med <= 2.0 and full_u == oracle
          and elapsed < 300)
    _emit(capsys, 7, ok,
          f"solvable fraction {fraction} = 1.0, median U/principal {med:.4f} "
          f"in [0.5, 2.0], full-set U {full_u} == oracle {oracle}, {elapsed:.1f}s")
    assert ok


def test_criterion_08_exact_decomposition(capsys):
    t0 = time.monotonic()
    members = tuple(range(250, 500))
    pair = DenseSetPair(N=500, A=members, B=members, delta=0.0)
    u, principal, psi_error = count_solutions(pair, C_MAIN)
    residual = abs(u - principal - psi_error)
    elapsed = time.monotonic() - t0
    ok = residual <= 1e-6 and elapsed < 30
    _emit(capsys, 8, ok,
          f"U - principal - psi_error = {residual:.3e} <= 1e-6 at N=500 "
          f"full sets (U={u}), {elapsed:.1f}s")
    assert ok


def test_criterion_09_perron_variant(capsys):
    t0 = time.monotonic()
    ratios = []
    for L in (16, 32, 64, 128, 256, 512, 1024):
        coeffs = np.ones(3 * L, dtype=np.complex128)
        _, _, residual = perron_range_sum(coeffs, L, float(L), 1.0, 4.0, 4.0)
        ratios.append(residual / math.log(2.0 + L))
    fitted_c = max(ratios)
    elapsed = time.monotonic() - t0
    ok = fitted_c <= 50.0 and elapsed < 120
    _emit(capsys, 9, ok,
          f"residual <= C log(2+L) for L in 16..1024 with fitted C = "
          f"{fitted_c:.3f} <= 50, {elapsed:.1f}s")
    assert ok


def test_criterion_10_bound_ratio_sanity(capsys):
    t0 = time.monotonic()

    def pooled_slope(reports):
        pts = [(rep.job.N, rep.ratio) for rep in reports if rep.ratio > 0]
        ln = np.log([p[0] for p in pts])
        lr = np.log([p[1] for p in pts])
        return float(np.polyfit(ln, lr, 1)[0])

    families = {
        "vdc": run_vdc_sweep(default_vdc_sweep()),
        "bilinear24": run_rs_sweep(default_rs_sweep(BoundFamily.BILINEAR24),
                                   BoundFamily.BILINEAR24),
        "typei32": run_rs_sweep(default_rs_sweep(BoundFamily.TYPEI32),
                                BoundFamily.TYPEI32),
    }
    max_ratio = max(rep.ratio for reps in families.values() for rep in reps)
    slopes = {name: pooled_slope(reps) for name, reps in families.items()}
    elapsed = time.monotonic() - t0
    ok = (max_ratio <= 100.0 and all(s <= 0.05 for s in slopes.values())
          and elapsed < 900)
    _emit(capsys, 10, ok,
          f"max ratio {max_ratio:.3f} <= 100; log-ratio slope vs log N: "
          f"vdc {slopes['vdc']:+.3f}, bilinear24 {slopes['bilinear24']:+.3f}, "
          f"typei32 {slopes['typei32']:+.3f} (all <= 0.05), {elapsed:.1f}s")
    assert ok
