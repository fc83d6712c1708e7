"""Desk-scale verification experiments for the PS-sequence theorems.

Three kinds of statement are exercised:

* a solvability statement for products from dense sets (counted exactly and
  split into a principal term plus a sawtooth error, an identity this module
  reproduces to roundoff),
* divisor-sum asymptotics whose main terms involve zeta constants, checked
  by residual-exponent fitting over x-grids, and
* a Stieltjes-form main term for convolved divisor functions.

Counts are exact integers throughout; main terms are evaluated with 128-bit
arithmetic before rounding to float, and residual slopes are fitted on
log-log axes.  Every experiment is deterministic given its seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import mpmath as mp
import numpy as np

from .arith import (
    EULER_GAMMA_LITERAL,
    AnalyticConstants,
    ArithKind,
    ArithTable,
    compute_constants,
    sieve_tau,
    sieve_tau_k,
)
from .errors import CapacityExceeded, InsufficientPoints, TableTooSmall
from .floorpow import (
    DEFAULT_POLICY,
    ExponentParam,
    PrecisionPolicy,
    ceil_pow_gamma,
    floor_pow,
    floor_pow_bulk,
    ps_membership,
)
from .prng import Stream

__all__ = [
    "VerifyReport",
    "DenseSetPair",
    "ProductProfile",
    "Thm2Adjudication",
    "build_profile",
    "count_solutions",
    "thm1_experiment",
    "iter_thm1_trials",
    "solvable_fraction",
    "sample_dense_pair",
    "sum_f_over_ps",
    "stieltjes_main_term",
    "thm2_verify",
    "thm2_adjudicate",
    "thm3_verify",
    "corollary_verify",
    "fit_error_exponent",
    "DEFAULT_PAIR_BUDGET",
]

DEFAULT_PAIR_BUDGET = 10**9

# A profile stores 17 bytes per integer in [lo, hi); this cap keeps a build
# under roughly 350 MB unless the caller opts in.
_PROFILE_WIDTH_BUDGET = 20_000_000


@dataclass(frozen=True)
class VerifyReport:
    """One experiment row: an exact left side against its main term(s).

    residual always equals |lhs - main_term|; passing anything else raises.
    fitted_exponent, when present, is the grid-level log-log slope shared by
    every row of the same run.
    """

    experiment: str
    params: dict
    lhs: float
    main_term: float
    alt_main_term: Optional[float] = None
    residual: Optional[float] = None
    fitted_exponent: Optional[float] = None

    def __post_init__(self):
        want = abs(self.lhs - self.main_term)
        if self.residual is None:
            object.__setattr__(self, "residual", want)
        elif self.residual != want:
            raise ValueError("residual must equal |lhs - main_term|")


@dataclass(frozen=True)
class DenseSetPair:
    """Sorted sets A, B inside [N/2, N) with the density the solvability
    statement assumes.

    The density hypothesis carries a free implied constant; this type pins
    it at 1/5, which admits both full sets and size-ceil(P^(1-delta))
    samples (P the population size) for every N >= 10, odd N included.
    delta = 0 denotes the full-set control case.
    """

    N: int
    A: tuple
    B: tuple
    delta: float
    seed: int = 0

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("N must be at least 2")
        if not 0.0 <= self.delta < 1.0:
            raise ValueError("delta must lie in [0, 1)")
        for name, s in (("A", self.A), ("B", self.B)):
            if len(s) == 0:
                raise ValueError(f"{name} must be nonempty")
            if any(s[i] >= s[i + 1] for i in range(len(s) - 1)):
                raise ValueError(f"{name} must be strictly increasing")
            if 2 * s[0] < self.N or s[-1] >= self.N:
                raise ValueError(f"{name} must sit inside [N/2, N)")
        if len(self.A) * len(self.B) < self.N ** (2.0 - 2.0 * self.delta) / 5.0:
            raise ValueError("density hypothesis |A||B| >= N^(2-2 delta)/5 fails")


@dataclass(frozen=True, eq=False)
class ProductProfile:
    """Shared read-only arrays over an integer window [lo, hi).

    indicator[m - lo] is the exact PS membership of m; ceil_gamma[m - lo] is
    the exact integer ceil(m^gamma) (anchored once, then cumulative, since
    membership is precisely the ceil increment); pow_gamma[m - lo] is the
    float64 m^gamma.  ceil_gamma and pow_gamma run one entry past hi so that
    m + 1 lookups stay in range.
    """

    c: ExponentParam
    lo: int
    hi: int
    indicator: np.ndarray
    ceil_gamma: np.ndarray
    pow_gamma: np.ndarray


def build_profile(
    lo: int,
    hi: int,
    c: ExponentParam,
    pol: PrecisionPolicy = DEFAULT_POLICY,
    allow_large: bool = False,
) -> ProductProfile:
    """Precompute membership, exact ceilings, and float powers on [lo, hi)."""
    if not 1 <= lo < hi:
        raise ValueError("need 1 <= lo < hi")
    width = hi - lo
    if width > _PROFILE_WIDTH_BUDGET and not allow_large:
        raise CapacityExceeded(
            f"profile of width {width} exceeds budget {_PROFILE_WIDTH_BUDGET}; "
            "pass allow_large=True to override"
        )
    ind = ps_membership(lo, hi, c, pol)
    ceil_gamma = np.empty(width + 1, dtype=np.int64)
    ceil_gamma[0] = ceil_pow_gamma(lo, c, pol)
    np.cumsum(ind, dtype=np.int64, out=ceil_gamma[1:])
    ceil_gamma[1:] += ceil_gamma[0]
    pow_gamma = np.power(np.arange(lo, hi + 1, dtype=np.float64), c.gamma_float)
    return ProductProfile(c=c, lo=lo, hi=hi, indicator=ind,
                          ceil_gamma=ceil_gamma, pow_gamma=pow_gamma)


def count_solutions(
    pair: DenseSetPair,
    c: ExponentParam,
    profile: Optional[ProductProfile] = None,
    work_budget: int = DEFAULT_PAIR_BUDGET,
) -> tuple[int, float, float]:
    """Count pairs (a, b) whose product is a PS value, split per the identity
    U = sum((ab+1)^gamma - (ab)^gamma) + sum(psi(-(ab+1)^gamma) - psi(-(ab)^gamma)).

    U is exact.  principal and psi_error are float sums whose per-pair terms
    are built from one shared power array and exact integer ceilings, so
    each pair's two terms cancel to its indicator without rounding (the
    subtractions are exact by Sterbenz's lemma) and U - principal - psi_error
    stays at the few-ulp level rather than accumulating.
    """
    n_pairs = len(pair.A) * len(pair.B)
    if n_pairs > work_budget:
        raise CapacityExceeded(f"{n_pairs} pairs exceed the budget {work_budget}")
    if profile is None:
        lo = (pair.A[0] * pair.B[0])
        hi = pair.A[-1] * pair.B[-1] + 1
        profile = build_profile(lo, hi, c)
    else:
        if profile.c != c:
            raise ValueError("profile was built for a different exponent")
        if pair.A[0] * pair.B[0] < profile.lo or pair.A[-1] * pair.B[-1] >= profile.hi:
            raise ValueError("profile window does not cover all products")
    b_arr = np.asarray(pair.B, dtype=np.int64)
    ind, ceil_g, pow_g = profile.indicator, profile.ceil_gamma, profile.pow_gamma
    u_total = 0
    principal_rows = []
    psi_rows = []
    for a in pair.A:
        idx = a * b_arr - profile.lo
        u_total += int(ind[idx].sum())
        p1 = pow_g[idx]
        p2 = pow_g[idx + 1]
        c1 = ceil_g[idx].astype(np.float64)
        c2 = ceil_g[idx + 1].astype(np.float64)
        principal_rows.append(math.fsum(p2 - p1))
        psi_rows.append(math.fsum((c2 - p2) - (c1 - p1)))
    return u_total, math.fsum(principal_rows), math.fsum(psi_rows)


def sample_dense_pair(
    N: int, delta: float, seed: int, trial: int = 0
) -> DenseSetPair:
    """Sample A, B uniformly among subsets of [N/2, N) of size ceil(P^(1-delta)).

    P is the population size (the count of integers in [N/2, N)); taking the
    exponent against P rather than N keeps the size feasible for every
    delta >= 0 while meeting the density hypothesis, and delta = 0 yields the
    full sets.  Streams are named per trial so trials are independent and
    any one of them is reproducible in isolation.
    """
    if not 0.0 <= delta < 1.0:
        raise ValueError("delta must lie in [0, 1)")
    population = list(range((N + 1) // 2, N))
    size = max(1, math.ceil(len(population) ** (1.0 - delta)))
    a = Stream(seed, f"thm1:{trial}:A").sample_without_replacement(population, size)
    b = Stream(seed, f"thm1:{trial}:B").sample_without_replacement(population, size)
    return DenseSetPair(N=N, A=tuple(a), B=tuple(b), delta=delta, seed=seed)


def iter_thm1_trials(
    N: int,
    delta: float,
    c: ExponentParam,
    trials: int,
    seed: int,
    work_budget: int = DEFAULT_PAIR_BUDGET,
) -> Iterator[VerifyReport]:
    """Seeded random-pair trials, yielded one report at a time.

    Each report carries U as lhs and the principal term as main_term, so
    U/principal and solvability (U > 0) are read straight off the rows.
    Trials draw from per-trial named streams, so a longer run reproduces a
    shorter one's rows unchanged.
    """
    if N < 100:
        raise ValueError("N must be at least 100")
    if trials < 1:
        raise ValueError("trials must be positive")
    profile = build_profile((N * N) // 4, N * N, c)
    for trial in range(trials):
        pair = sample_dense_pair(N, delta, seed, trial)
        u, principal, _ = count_solutions(pair, c, profile, work_budget)
        yield VerifyReport(
            experiment="thm1",
            params={"N": N, "delta": delta, "c": str(c), "seed": seed,
                    "trial": trial, "set_size": len(pair.A)},
            lhs=float(u),
            main_term=principal,
        )


def thm1_experiment(
    N: int,
    delta: float,
    c: ExponentParam,
    trials: int,
    seed: int,
    work_budget: int = DEFAULT_PAIR_BUDGET,
) -> list[VerifyReport]:
    """All trial reports at once; see iter_thm1_trials."""
    return list(iter_thm1_trials(N, delta, c, trials, seed, work_budget))


def solvable_fraction(reports: Sequence[VerifyReport]) -> float:
    """Fraction of trial rows with at least one solution (U > 0)."""
    if not reports:
        raise InsufficientPoints("no reports")
    return sum(1 for r in reports if r.lhs > 0) / len(reports)


def sum_f_over_ps(
    f: ArithTable,
    c: ExponentParam,
    x: int,
    pol: PrecisionPolicy = DEFAULT_POLICY,
) -> int:
    """Exact sum of f over the PS values [n^c] for n = 1..x."""
    if x < 1:
        raise ValueError("x must be positive")
    top = floor_pow(x, c, pol)
    if f.limit < top:
        raise TableTooSmall(f"table reaches {f.limit}, need {top}")
    floors = floor_pow_bulk(np.arange(1, x + 1, dtype=np.int64), c, pol)
    return int(f.values[floors].sum())


def stieltjes_main_term(
    f: ArithTable,
    c: ExponentParam,
    x: int,
    pol: PrecisionPolicy = DEFAULT_POLICY,
) -> float:
    """The Stieltjes-form main term sum_{m <= floor(x^c)} f(m) gamma m^(gamma-1).

    Integrating gamma u^(gamma-1) against the summatory step function of f
    gives exactly this weighted sum.  Terms are float64 and the accumulation
    is exactly rounded (fsum), leaving a total error of a few times
    10^-16 * sum|terms| from the power evaluations, orders below every
    residual this term is compared against.
    """
    if x < 1:
        raise ValueError("x must be positive")
    top = floor_pow(x, c, pol)
    if f.limit < top:
        raise TableTooSmall(f"table reaches {f.limit}, need {top}")
    gamma = c.gamma_float
    m = np.arange(1, top + 1, dtype=np.float64)
    return math.fsum(f.values[1 : top + 1] * (gamma * np.power(m, gamma - 1.0)))


def fit_error_exponent(points: Sequence[tuple[float, float]]) -> tuple[float, float]:
    """Least-squares slope of log residual against log x, with r squared.

    Zero (and negative) residuals are dropped rather than clamped; at least
    three distinct-x points must survive or InsufficientPoints is raised.
    """
    kept = [(float(x), float(r)) for x, r in points if r > 0.0]
    if len(kept) < 3:
        raise InsufficientPoints(
            f"need at least 3 positive residuals, have {len(kept)} "
            f"(dropped {len(points) - len(kept)} zero rows)"
        )
    xs = np.array([p[0] for p in kept])
    if np.unique(xs).size != xs.size:
        raise InsufficientPoints("x values must be distinct")
    lx = np.log(xs)
    lr = np.log(np.array([p[1] for p in kept]))
    slope, intercept = np.polyfit(lx, lr, 1)
    pred = slope * lx + intercept
    ss_res = float(((lr - pred) ** 2).sum())
    ss_tot = float(((lr - lr.mean()) ** 2).sum())
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), r_squared


def _grid_fit(xs: Sequence[int], residuals: Sequence[float]) -> Optional[float]:
    # grid-level slope, or None when the grid cannot support a fit
    try:
        slope, _ = fit_error_exponent(list(zip(xs, residuals)))
    except InsufficientPoints:
        return None
    return slope


def _require_table(
    table: Optional[ArithTable],
    kind: ArithKind,
    k: int,
    limit: int,
) -> ArithTable:
    if table is None:
        if kind is ArithKind.TAU:
            return sieve_tau(limit)
        return sieve_tau_k(k, limit)
    if table.kind is not kind or (kind is ArithKind.TAUK and table.k != k):
        raise ValueError("table kind does not match the experiment")
    if table.limit < limit:
        raise TableTooSmall(f"table reaches {table.limit}, need {limit}")
    return table


def corollary_verify(
    c: ExponentParam,
    x_grid: Sequence[int],
    table: Optional[ArithTable] = None,
) -> list[VerifyReport]:
    """Check sum tau([n^c]) against c x log x + (2 gamma_0 - c) x."""
    xs = sorted(set(int(x) for x in x_grid))
    if not xs or xs[0] < 1:
        raise ValueError("x_grid must contain positive integers")
    table = _require_table(table, ArithKind.TAU, 0, floor_pow(xs[-1], c))
    lhs_values = [sum_f_over_ps(table, c, x) for x in xs]
    with mp.workprec(128):
        g0 = mp.mpf(EULER_GAMMA_LITERAL)
        cc = mp.mpf(c.c_num) / c.c_den
        mains = [float(cc * x * mp.log(x) + (2 * g0 - cc) * x) for x in xs]
    residuals = [abs(lhs - main) for lhs, main in zip(lhs_values, mains)]
    fitted = _grid_fit(xs, residuals)
    return [
        VerifyReport(
            experiment="corollary",
            params={"c": str(c), "x": x},
            lhs=float(lhs),
            main_term=main,
            fitted_exponent=fitted,
        )
        for x, lhs, main in zip(xs, lhs_values, mains)
    ]


def thm2_verify(
    k: int,
    c: ExponentParam,
    x_grid: Sequence[int],
    table: Optional[ArithTable] = None,
    constants: Optional[AnalyticConstants] = None,
) -> list[VerifyReport]:
    """Check sum tau_(k)([n^c]) against both coefficient variants.

    main_term is the plain variant, c x log x + ((2 gamma_0 - 1)/zeta(k)
    - k zeta'(k)/zeta(k)^2 + 1 - c) x; alt_main_term is the zeta-normalized
    variant that carries 1/zeta(k) on the x log x and (1-c) x pieces as well.
    The two differ by (1 - 1/zeta(k)) (c x log x + (1-c) x); data decides
    which one tracks the sum (see thm2_adjudicate).  residual and the fitted
    exponent refer to the plain variant.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    xs = sorted(set(int(x) for x in x_grid))
    if not xs or xs[0] < 1:
        raise ValueError("x_grid must contain positive integers")
    table = _require_table(table, ArithKind.TAUK, k, floor_pow(xs[-1], c))
    if constants is None:
        constants = compute_constants(k, 128)
    lhs_values = [sum_f_over_ps(table, c, x) for x in xs]
    with mp.workprec(128):
        g0 = +constants.euler_gamma
        z = +constants.zeta_k
        zp = +constants.zeta_prime_k
        cc = mp.mpf(c.c_num) / c.c_den
        plain_linear = (2 * g0 - 1) / z - k * zp / z**2 + 1 - cc
        norm_linear = (2 * g0 - cc) / z - k * zp / z**2
        mains = [float(cc * x * mp.log(x) + plain_linear * x) for x in xs]
        alts = [float(cc / z * x * mp.log(x) + norm_linear * x) for x in xs]
    residuals = [abs(lhs - main) for lhs, main in zip(lhs_values, mains)]
    fitted = _grid_fit(xs, residuals)
    return [
        VerifyReport(
            experiment="thm2",
            params={"k": k, "c": str(c), "x": x},
            lhs=float(lhs),
            main_term=main,
            alt_main_term=alt,
            fitted_exponent=fitted,
        )
        for x, lhs, main, alt in zip(xs, lhs_values, mains, alts)
    ]


@dataclass(frozen=True)
class Thm2Adjudication:
    """Which coefficient variant the data favors, with both fits."""

    winner: str  # "plain", "zeta_normalized", "both", or "neither"
    plain_slope: float
    plain_r2: float
    normalized_slope: float
    normalized_r2: float
    threshold: float = 0.98


def thm2_adjudicate(
    reports: Sequence[VerifyReport], threshold: float = 0.98
) -> Thm2Adjudication:
    """Fit both variants' residual exponents and name the sublinear one."""
    xs = [r.params["x"] for r in reports]
    plain = [(x, r.residual) for x, r in zip(xs, reports)]
    normalized = [(x, abs(r.lhs - r.alt_main_term)) for x, r in zip(xs, reports)]
    plain_slope, plain_r2 = fit_error_exponent(plain)
    norm_slope, norm_r2 = fit_error_exponent(normalized)
    plain_ok = plain_slope <= threshold
    norm_ok = norm_slope <= threshold
    if plain_ok and not norm_ok:
        winner = "plain"
    elif norm_ok and not plain_ok:
        winner = "zeta_normalized"
    elif plain_ok and norm_ok:
        winner = "both"
    else:
        winner = "neither"
    return Thm2Adjudication(
        winner=winner,
        plain_slope=plain_slope,
        plain_r2=plain_r2,
        normalized_slope=norm_slope,
        normalized_r2=norm_r2,
        threshold=threshold,
    )


def thm3_verify(
    f: ArithTable,
    c: ExponentParam,
    x_grid: Sequence[int],
) -> list[VerifyReport]:
    """Compare sum of f over PS values with its Stieltjes main term."""
    xs = sorted(set(int(x) for x in x_grid))
    if not xs or xs[0] < 1:
        raise ValueError("x_grid must contain positive integers")
    lhs_values = [sum_f_over_ps(f, c, x) for x in xs]
    mains = [stieltjes_main_term(f, c, x) for x in xs]
    residuals = [abs(lhs - main) for lhs, main in zip(lhs_values, mains)]
    fitted = _grid_fit(xs, residuals)
    return [
        VerifyReport(
            experiment="thm3",
            params={"c": str(c), "x": x, "f_kind": f.kind.name.lower(), "k": f.k},
            lhs=float(lhs),
            main_term=main,
            fitted_exponent=fitted,
        )
        for x, lhs, main in zip(xs, lhs_values, mains)
    ]
