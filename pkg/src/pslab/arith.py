"""Sieved arithmetic-function tables and certified analytic constants.

Tables hold exact integer values for n in [1, X]; no floating point ever
enters a sieve, so the convolution identities the tables satisfy can serve
as oracles for one another. The analytic constants (Euler's gamma, zeta(k),
zeta'(k)) are computed by Euler-Maclaurin summation with exact Bernoulli
numbers and a certified remainder bound.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from enum import IntEnum

import gmpy2
import mpmath as mp
import numpy as np

from .errors import CapacityExceeded, PrecisionUnreachable

__all__ = [
    "ArithKind",
    "ArithTable",
    "AnalyticConstants",
    "sieve_tau",
    "sieve_kfree",
    "g_factor",
    "dirichlet_convolve",
    "sieve_tau_k",
    "custom_table",
    "compute_constants",
    "EULER_GAMMA_LITERAL",
]

# Desk-scale guardrail: tables beyond this refuse to build unless the
# caller passes allow_large=True.
MEMORY_BUDGET = 200_000_000

_MAGIC = b"PSLAB\0"
_HEADER = struct.Struct("<6sBBQ")  # magic, kind, k, X; 16 bytes total


class ArithKind(IntEnum):
    TAU = 0
    KFREE = 1
    TAUK = 2
    GFACTOR = 3
    CUSTOM = 4


@dataclass(frozen=True)
class ArithTable:
    """Values of an arithmetic function on [1, X].

    values has length X + 1 with index 0 unused (kept at 0), so that
    table.values[n] is the value at n. Tables are immutable after
    construction and safe to share across threads.
    """

    kind: ArithKind
    k: int
    limit: int
    values: np.ndarray

    def __getitem__(self, n: int) -> int:
        if not 1 <= n <= self.limit:
            raise IndexError(f"n={n} outside [1, {self.limit}]")
        return int(self.values[n])

    def to_binary(self, path) -> None:
        """Flat export: 16-byte header, then X little-endian int64 values."""
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(_MAGIC, int(self.kind), self.k, self.limit))
            fh.write(self.values[1:].astype("<i8").tobytes())

    @classmethod
    def from_binary(cls, path) -> "ArithTable":
        with open(path, "rb") as fh:
            magic, kind, k, limit = _HEADER.unpack(fh.read(_HEADER.size))
            if magic != _MAGIC:
                raise ValueError("not a pslab table file")
            body = np.frombuffer(fh.read(), dtype="<i8")
        if body.size != limit:
            raise ValueError("truncated table file")
        values = np.zeros(limit + 1, dtype=np.int64)
        values[1:] = body
        return cls(kind=ArithKind(kind), k=k, limit=limit, values=values)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["n", "value"])
            for n in range(1, self.limit + 1):
                writer.writerow([n, int(self.values[n])])


def _check_budget(X: int, allow_large: bool) -> None:
    if X < 1:
        raise ValueError("X must be >= 1")
    if X > MEMORY_BUDGET and not allow_large:
        raise CapacityExceeded(
            f"table of size {X} exceeds budget {MEMORY_BUDGET}; "
            "pass allow_large=True to override"
        )


def _primes_upto(limit: int) -> np.ndarray:
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(limit**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.nonzero(sieve)[0].astype(np.int64)


def _mobius_upto(limit: int) -> np.ndarray:
    mob = np.ones(limit + 1, dtype=np.int64)
    for p in _primes_upto(limit):
        mob[p::p] *= -1
        sq = int(p) * int(p)
        if sq <= limit:
            mob[sq::sq] = 0
    mob[0] = 0
    return mob


def _iroot(n: int, k: int) -> int:
    """Exact floor(n^(1/k)); avoids float boundary errors."""
    return int(gmpy2.iroot(gmpy2.mpz(n), k)[0])


def sieve_tau(X: int, allow_large: bool = False) -> ArithTable:
    """Divisor-count table: values[n] = tau(n) for n <= X.

    Harmonic double loop folded over divisor pairs (d, n/d) with
    d <= sqrt(n): each d marks 2 for every multiple from d^2 on, minus 1
    at the square itself. Cost O(X log X) element updates.
    """
    _check_budget(X, allow_large)
    values = np.zeros(X + 1, dtype=np.int64)
    for d in range(1, _iroot(X, 2) + 1):
        sq = d * d
        values[sq::d] += 2
        values[sq] -= 1
    return ArithTable(kind=ArithKind.TAU, k=0, limit=X, values=values)


def sieve_kfree(k: int, X: int, allow_large: bool = False) -> ArithTable:
    """Indicator of k-free numbers: 1 iff no p^k divides n."""
    if k < 2:
        raise ValueError("k must be >= 2")
    _check_budget(X, allow_large)
    values = np.ones(X + 1, dtype=np.int64)
    values[0] = 0
    for p in _primes_upto(_iroot(X, k)):
        pk = int(p) ** k
        values[pk::pk] = 0
    return ArithTable(kind=ArithKind.KFREE, k=k, limit=X, values=values)


def g_factor(k: int, X: int, allow_large: bool = False) -> ArithTable:
    """Dirichlet factor g_k with tau * g_k = tau_(k).

    g_k(n) = mu(m) when n = m^k, else 0; supported on the O(X^(1/k))
    perfect k-th powers, built explicitly rather than by inverting the
    table so it can be tested against inversion.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    _check_budget(X, allow_large)
    root = _iroot(X, k)
    mob = _mobius_upto(root)
    values = np.zeros(X + 1, dtype=np.int64)
    for m in range(1, root + 1):
        values[m**k] = mob[m]
    return ArithTable(kind=ArithKind.GFACTOR, k=k, limit=X, values=values)


def dirichlet_convolve(a: ArithTable, b: ArithTable) -> ArithTable:
    """(a * b)[n] = sum over de = n of a[d] b[e], exact integers.

    The operand with fewer nonzero entries drives the outer loop, so
    convolving with a sparse factor like g_k costs only
    sum over its support of X/d element updates.
    """
    if a.limit != b.limit:
        raise ValueError("operands must share the same limit")
    X = a.limit
    _check_budget(X, allow_large=True)
    outer, inner = a, b
    if np.count_nonzero(b.values) < np.count_nonzero(a.values):
        outer, inner = b, a
    result = np.zeros(X + 1, dtype=np.int64)
    for d in np.nonzero(outer.values)[0]:
        d = int(d)
        coeff = int(outer.values[d])
        result[d :: d] += coeff * inner.values[1 : X // d + 1]
    return ArithTable(kind=ArithKind.CUSTOM, k=0, limit=X, values=result)


def sieve_tau_k(k: int, X: int, allow_large: bool = False) -> ArithTable:
    """k-free divisor count: values[n] = #{d | n : d is k-free}.

    Harmonic loop over k-free d, bumping every multiple of d by one.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    _check_budget(X, allow_large)
    kfree = sieve_kfree(k, X, allow_large=allow_large)
    values = np.zeros(X + 1, dtype=np.int64)
    for d in np.nonzero(kfree.values)[0]:
        d = int(d)
        values[d::d] += 1
    return ArithTable(kind=ArithKind.TAUK, k=k, limit=X, values=values)


def custom_table(values, k: int = 0) -> ArithTable:
    """Wrap a 1-indexed sequence (values[0] ignored) as a Custom table."""
    arr = np.asarray(values, dtype=np.int64).copy()
    arr[0] = 0
    return ArithTable(kind=ArithKind.CUSTOM, k=k, limit=arr.size - 1, values=arr)


# ---------------------------------------------------------------------------
# analytic constants

# Euler's constant, 112 digits, standard published value.
EULER_GAMMA_LITERAL = (
    "0.5772156649015328606065120900824024310421593359399235988057672348"
    "848677267776646709369470632917467495146314472498"
)

# Series cutoffs. With a >= 700 every Euler-Maclaurin derivative term used
# below is single-signed on [a, infinity) (the root of alpha*log u + beta
# sits below exp(H_302) < 700), so the first-omitted-term remainder bound
# applies to both zeta(k) and zeta'(k).
_MIN_CUTOFF = 700
_MAX_EM_TERMS = 150
_MAX_PRECISION_BITS = 65536


@dataclass(frozen=True)
class AnalyticConstants:
    """gamma_0, zeta(k), zeta'(k) with certified error bounds."""

    euler_gamma: mp.mpf
    zeta_k: mp.mpf
    zeta_prime_k: mp.mpf
    k: int
    precision_bits: int
    zeta_k_err: mp.mpf
    zeta_prime_k_err: mp.mpf


def _em_tail(k: int, a: int, target: mp.mpf, with_log: bool):
    """Euler-Maclaurin tail of sum_{n >= a} f(n) with certified bound.

    f(u) = u^-k (with_log=False) or (log u) u^-k (with_log=True).
    Returns (tail_value, error_bound). Derivatives satisfy
    f^(j)(u) = u^(-k-j) (alpha_j log u + beta_j) with the recurrence
    alpha_{j+1} = -(k+j) alpha_j, beta_{j+1} = alpha_j - (k+j) beta_j;
    for the log-free case alpha_j = 0 throughout.
    """
    af = mp.mpf(a)
    log_a = mp.log(af)
    if with_log:
        integral = af ** (1 - k) * (log_a / (k - 1) + mp.mpf(1) / (k - 1) ** 2)
        f_a = log_a * af**-k
        alpha, beta = mp.mpf(1), mp.mpf(0)
    else:
        integral = af ** (1 - k) / (k - 1)
        f_a = af**-k
        alpha, beta = mp.mpf(0), mp.mpf(1)

    tail = integral + f_a / 2
    # walk derivatives up to order 2j-1, adding -B_2j/(2j)! f^(2j-1)(a)
    deriv_order = 0
    for j in range(1, _MAX_EM_TERMS + 1):
        while deriv_order < 2 * j - 1:
            alpha, beta = -(k + deriv_order) * alpha, alpha - (k + deriv_order) * beta
            deriv_order += 1
        f_deriv = af ** (-k - deriv_order) * (alpha * log_a + beta)
        p, q = mp.bernfrac(2 * j)
        term = -mp.mpf(p) / q / mp.factorial(2 * j) * f_deriv
        # remainder after including term j is bounded by term j+1; use the
        # current term as a (one-step-early, conservative) stopping gauge
        if abs(term) <= target:
            return tail, abs(term)
        tail += term
    raise PrecisionUnreachable(
        f"Euler-Maclaurin tail did not certify {float(target):.3e} "
        f"within {_MAX_EM_TERMS} terms"
    )


def compute_constants(k: int, precision_bits: int) -> AnalyticConstants:
    """Certified gamma_0, zeta(k), zeta'(k).

    zeta(k) = sum_{n < a} n^-k + Euler-Maclaurin tail from a, with the
    remainder bounded by the first omitted term (the summands' derivatives
    are single-signed beyond the cutoff). Error bounds are returned and
    guaranteed <= 2^(-precision_bits + 4).
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if precision_bits < 64:
        raise ValueError("precision_bits must be >= 64")
    if precision_bits > _MAX_PRECISION_BITS:
        raise PrecisionUnreachable(
            f"precision_bits {precision_bits} exceeds cap {_MAX_PRECISION_BITS}"
        )
    dps = int(precision_bits * 0.30103) + 25
    with mp.workdps(dps):
        target = mp.mpf(2) ** (-precision_bits + 2)
        a = max(_MIN_CUTOFF, precision_bits)
        # arithmetic roundoff allowance on top of series truncation: every
        # quantity handled is O(1), each of the ~a head terms and ~150 tail
        # terms contributes a few ulp at working precision mp.prec
        roundoff = (a + 200) * mp.mpf(2) ** (12 - mp.mp.prec)
        ns = [mp.mpf(n) for n in range(1, a)]
        zeta_head = mp.fsum(n**-k for n in ns)
        zeta_tail, zeta_err = _em_tail(k, a, target, with_log=False)
        zetap_head = mp.fsum(mp.log(n) * n**-k for n in ns)
        zetap_tail, zetap_err = _em_tail(k, a, target, with_log=True)
        gamma0 = mp.mpf(EULER_GAMMA_LITERAL)
        result = AnalyticConstants(
            euler_gamma=+gamma0,
            zeta_k=zeta_head + zeta_tail,
            zeta_prime_k=-(zetap_head + zetap_tail),
            k=k,
            precision_bits=precision_bits,
            zeta_k_err=zeta_err + roundoff,
            zeta_prime_k_err=zetap_err + roundoff,
        )
    return result
