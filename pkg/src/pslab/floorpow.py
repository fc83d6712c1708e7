"""Exact evaluation of [n^c] and Piatetski-Shapiro membership.

The exponent c is an exact rational c_num/c_den in (1, 2), never a binary
float: "the floor of n^c" is only well-defined when c itself is exact. All
floors and ceilings of rational powers are computed with a two-stage
strategy:

  1. exact-power fast path: if n is a perfect c_den-th power r^c_den, then
     n^c = r^c_num exactly (gcd(c_num, c_den) = 1), and no rounding can
     occur at all;
  2. otherwise n^c is irrational, and an interval [lo, hi] around it is
     computed with MPFR directed rounding, doubling the working precision
     until no integer lies inside, at which point the floor is certain.

Stage 2 always terminates for non-exact-power inputs because the distance
from the irrational value to the nearest integer is a fixed positive
number. If the precision policy's max_bits is reached first, the failure
is loud (PrecisionExhausted), never a silent round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
import numpy as np
from gmpy2 import mpz

from .errors import PrecisionExhausted

__all__ = [
    "ExponentParam",
    "PrecisionPolicy",
    "DEFAULT_POLICY",
    "floor_pow",
    "ceil_pow_gamma",
    "ps_indicator",
    "ps_membership",
    "floor_pow_bulk",
    "psi",
]


@dataclass(frozen=True)
class ExponentParam:
    """The exponent c = c_num/c_den in lowest terms, 1 < c < 2.

    gamma = 1/c is represented implicitly by the swapped pair
    (c_den, c_num); no float ever enters an exactness-critical path.
    """

    c_num: int
    c_den: int

    def __post_init__(self):
        if not (isinstance(self.c_num, int) and isinstance(self.c_den, int)):
            raise ValueError("c_num and c_den must be integers")
        if self.c_num <= 0 or self.c_den <= 0:
            raise ValueError("c_num and c_den must be positive")
        if math.gcd(self.c_num, self.c_den) != 1:
            raise ValueError("c_num/c_den must be in lowest terms")
        if not self.c_den < self.c_num < 2 * self.c_den:
            raise ValueError("c must satisfy 1 < c < 2")

    @classmethod
    def from_string(cls, text: str) -> "ExponentParam":
        """Parse 'p/q' (or a bare integer-free fraction) exactly."""
        frac = Fraction(text.strip())
        return cls(frac.numerator, frac.denominator)

    @property
    def as_float(self) -> float:
        return self.c_num / self.c_den

    @property
    def gamma_float(self) -> float:
        return self.c_den / self.c_num

    def __str__(self) -> str:
        return f"{self.c_num}/{self.c_den}"


@dataclass(frozen=True)
class PrecisionPolicy:
    """Escalation schedule for interval evaluation."""

    start_bits: int = 128
    max_bits: int = 8192
    escalation_factor: int = 2

    def __post_init__(self):
        if self.start_bits < 64:
            raise ValueError("start_bits must be >= 64")
        if self.max_bits < self.start_bits:
            raise ValueError("max_bits must be >= start_bits")
        if self.escalation_factor < 2:
            raise ValueError("escalation_factor must be >= 2")

    def schedule(self):
        bits = self.start_bits
        while bits < self.max_bits:
            yield bits
            bits *= self.escalation_factor
        yield self.max_bits


DEFAULT_POLICY = PrecisionPolicy()


def _floor_root(n: int, p: int, q: int, pol: PrecisionPolicy) -> tuple[int, bool]:
    """(floor(n^{p/q}), is_exact) for n >= 1, p, q >= 1, gcd(p, q) = 1.

    n^{p/q} is an integer iff n is a perfect q-th power (since gcd(p,q)=1),
    so the iroot test below is the complete exact-power test.
    """
    if n == 1:
        return 1, True
    root, exact = gmpy2.iroot(mpz(n), q)
    if exact:
        return int(root**p), True
    target = mpz(n) ** p
    for bits in pol.schedule():
        with gmpy2.context(precision=bits, round=gmpy2.RoundDown):
            lo = gmpy2.rootn(target, q)
        with gmpy2.context(precision=bits, round=gmpy2.RoundUp):
            hi = gmpy2.rootn(target, q)
        # mpfr -> exact dyadic rational -> integer floor; context-independent
        num, den = lo.as_integer_ratio()
        floor_lo = int(num // den)
        num, den = hi.as_integer_ratio()
        floor_hi = int(num // den)
        if floor_lo == floor_hi:
            return floor_lo, False
    raise PrecisionExhausted(
        f"floor({n}^({p}/{q})) still ambiguous at {pol.max_bits} bits; "
        "raise max_bits"
    )


def floor_pow(n: int, c: ExponentParam, pol: PrecisionPolicy = DEFAULT_POLICY) -> int:
    """Exactly floor(n^c) for n >= 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    value, _ = _floor_root(n, c.c_num, c.c_den, pol)
    return value


def ceil_pow_gamma(m: int, c: ExponentParam, pol: PrecisionPolicy = DEFAULT_POLICY) -> int:
    """Exactly ceil(m^gamma) where gamma = 1/c = c_den/c_num, m >= 1."""
    if m < 1:
        raise ValueError("m must be >= 1")
    value, exact = _floor_root(m, c.c_den, c.c_num, pol)
    return value if exact else value + 1


def ps_indicator(m: int, c: ExponentParam, pol: PrecisionPolicy = DEFAULT_POLICY) -> int:
    """1 if m = [n^c] for some positive integer n, else 0.

    Computed as [-m^gamma] - [-(m+1)^gamma]; since [-u] = -ceil(u) this is
    ceil((m+1)^gamma) - ceil(m^gamma), which for c in (1, 2) is 0 or 1.
    """
    return ceil_pow_gamma(m + 1, c, pol) - ceil_pow_gamma(m, c, pol)


def psi(t):
    """Centered sawtooth psi(t) = t - [t] - 1/2, in [-1/2, 1/2).

    Accepts a float or a numpy array; machine precision is sufficient here
    because psi only feeds kernel checks with explicit tolerances.
    """
    return t - np.floor(t) - 0.5


# Margin accounting for floor_pow_bulk's float64 candidates. np.power on
# float64 is within a few ulp; the rounding of c itself to binary adds a
# relative error up to 2^-52 * ln(n). The factor below is deliberately
# loose: a too-large margin only sends more inputs down the exact path.
_BULK_EPS = 2.0**-53


def floor_pow_bulk(
    ns, c: ExponentParam, pol: PrecisionPolicy = DEFAULT_POLICY
) -> np.ndarray:
    """Vectorized floor(n^c); elementwise identical to floor_pow.

    Float64 powers decide every n whose computed value sits farther from
    an integer than a certified error margin; the few ambiguous ones fall
    back to exact interval evaluation. Returns an int64 array.
    """
    ns = np.asarray(ns, dtype=np.int64)
    if ns.size == 0:
        return np.zeros(0, dtype=np.int64)
    if ns.min() < 1:
        raise ValueError("all n must be >= 1")
    if ns.max() >= 2**53:
        raise ValueError("bulk path requires n < 2**53")
    nf = ns.astype(np.float64)
    x = np.power(nf, c.as_float)
    margin = x * (4.0 * np.log(np.maximum(nf, 2.0)) + 16.0) * _BULK_EPS
    nearest = np.rint(x)
    ambiguous = np.abs(x - nearest) <= margin
    out = np.floor(x).astype(np.int64)
    if np.any(ambiguous):
        for idx in np.nonzero(ambiguous)[0]:
            out[idx] = floor_pow(int(ns[idx]), c, pol)
    return out


def ps_membership(
    lo: int, hi: int, c: ExponentParam, pol: PrecisionPolicy = DEFAULT_POLICY
) -> np.ndarray:
    """Boolean array ind with ind[m - lo] = (m is a PS value), lo <= m < hi.

    Built from the n side: every [n^c] landing in [lo, hi) is marked. The
    n range is bracketed with exact ceilings so no boundary value can be
    missed.
    """
    if not (1 <= lo < hi):
        raise ValueError("need 1 <= lo < hi")
    n_start = max(1, ceil_pow_gamma(lo, c, pol) - 1)
    n_end = ceil_pow_gamma(hi, c, pol) + 1
    values = floor_pow_bulk(np.arange(n_start, n_end + 1, dtype=np.int64), c, pol)
    ind = np.zeros(hi - lo, dtype=bool)
    inside = values[(values >= lo) & (values < hi)]
    ind[inside - lo] = True
    return ind
