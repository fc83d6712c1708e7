"""arith tests.

Oracles: trial-division divisor counting and prime factorization for the
tables (shares nothing with the sieves), mpmath's zeta for the constants
(an independent implementation of a different algorithm).
"""

import numpy as np
import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pslab.arith import (
    ArithKind,
    ArithTable,
    EULER_GAMMA_LITERAL,
    compute_constants,
    custom_table,
    dirichlet_convolve,
    g_factor,
    sieve_kfree,
    sieve_tau,
    sieve_tau_k,
)
from pslab.errors import CapacityExceeded, PrecisionUnreachable


def divisors(n: int) -> list[int]:
    out = [d for d in range(1, n + 1) if n % d == 0]
    return out


def factorize(n: int) -> dict[int, int]:
    out = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_kfree(n: int, k: int) -> bool:
    return all(e < k for e in factorize(n).values())


def mobius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


class TestSieveTau:
    def test_trivial(self):
        t = sieve_tau(12)
        assert t[12] == 6  # 1,2,3,4,6,12
        assert t[1] == 1

    def test_derived_total(self):
        # independent oracle: sum of floor(X/d)
        t = sieve_tau(10**6)
        assert int(t.values.sum()) == 13970034

    def test_against_trial_division(self):
        t = sieve_tau(2000)
        for n in range(1, 2001):
            assert t[n] == len(divisors(n)), n

    def test_budget(self):
        with pytest.raises(CapacityExceeded):
            sieve_tau(300_000_000)

    def test_index_bounds(self):
        t = sieve_tau(10)
        with pytest.raises(IndexError):
            t[11]
        with pytest.raises(IndexError):
            t[0]


class TestSieveKfree:
    def test_trivial(self):
        t = sieve_kfree(2, 12)
        assert t[4] == 0 and t[6] == 1 and t[12] == 0
        t3 = sieve_kfree(3, 8)
        assert t3[8] == 0 and t3[4] == 1

    def test_derived_count(self):
        # oracle: sum of mu(d) floor(X/d^2)
        t = sieve_kfree(2, 10**6)
        assert int(t.values.sum()) == 607926

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_against_factorization(self, k):
        t = sieve_kfree(k, 1000)
        for n in range(1, 1001):
            assert t[n] == (1 if is_kfree(n, k) else 0)

    def test_k_validation(self):
        with pytest.raises(ValueError):
            sieve_kfree(1, 100)


class TestGFactor:
    def test_trivial(self):
        g = g_factor(2, 20)
        assert g[4] == -1  # mu(2)
        assert g[6] == 0  # not a square
        assert g[9] == -1 and g[16] == 0 and g[1] == 1

    def test_derived_support_size(self):
        # |g_3| sums to the number of squarefree m <= 100
        g = g_factor(3, 10**6)
        assert int(np.abs(g.values).sum()) == 61

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_explicit_construction(self, k):
        g = g_factor(k, 3000)
        for n in range(1, 3001):
            m = round(n ** (1.0 / k))
            expect = mobius(m) if any(m_**k == n for m_ in (m - 1, m, m + 1)) else 0
            if expect != 0 or all(m_**k != n for m_ in (m - 1, m, m + 1)):
                assert g[n] == expect, n

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_hypothesis_bound_of_theorem(self, k):
        # sum |g_k(n)| <= X^(1/k) <= X^(5/8), the growth hypothesis on g
        g = g_factor(k, 10**6)
        total = int(np.abs(g.values).sum())
        assert total <= 10 ** (6 / k) <= 10 ** (6 * 5 / 8)


class TestDirichletConvolve:
    def test_tau_is_one_star_one(self):
        one = custom_table(np.ones(11, dtype=np.int64))
        conv = dirichlet_convolve(one, one)
        assert conv[10] == 4
        assert np.array_equal(conv.values, sieve_tau(10).values)

    def test_derived_tau2_of_12(self):
        conv = dirichlet_convolve(sieve_tau(12), g_factor(2, 12))
        assert conv[12] == 4  # squarefree divisors of 12: 1,2,3,6

    def test_identity_element(self):
        e = np.zeros(101, dtype=np.int64)
        e[1] = 1
        ident = custom_table(e)
        t = sieve_tau(100)
        conv = dirichlet_convolve(t, ident)
        assert np.array_equal(conv.values, t.values)
        conv2 = dirichlet_convolve(ident, t)
        assert np.array_equal(conv2.values, t.values)

    def test_brute_force_small(self):
        rng = np.random.default_rng(7)
        a = custom_table(rng.integers(-5, 6, size=41))
        b = custom_table(rng.integers(-5, 6, size=41))
        conv = dirichlet_convolve(a, b)
        for n in range(1, 41):
            expect = sum(a[d] * b[n // d] for d in divisors(n))
            assert conv[n] == expect

    def test_commutative(self):
        t = sieve_tau(500)
        g = g_factor(2, 500)
        ab = dirichlet_convolve(t, g)
        ba = dirichlet_convolve(g, t)
        assert np.array_equal(ab.values, ba.values)

    def test_limit_mismatch(self):
        with pytest.raises(ValueError):
            dirichlet_convolve(sieve_tau(10), sieve_tau(11))


class TestSieveTauK:
    def test_trivial(self):
        t = sieve_tau_k(2, 12)
        assert t[12] == 4  # 1,2,3,6
        assert t[4] == 2  # 1,2
        for p in (2, 3, 5, 7, 11):
            assert t[p] == 2

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_counts_kfree_divisors(self, k):
        t = sieve_tau_k(k, 500)
        for n in range(1, 501):
            assert t[n] == sum(1 for d in divisors(n) if is_kfree(d, k))

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_convolution_identity(self, k):
        # the factorization tau_(k) = tau * g_k, exactly, for n <= 1e5
        X = 10**5
        t = sieve_tau_k(k, X)
        conv = dirichlet_convolve(sieve_tau(X), g_factor(k, X))
        assert np.array_equal(t.values, conv.values)

    def test_multiplicative_spot_check(self):
        X = 10**5
        t = sieve_tau_k(2, X)
        rng = np.random.default_rng(12345)
        found = 0
        while found < 200:
            m = int(rng.integers(2, 300))
            n = int(rng.integers(2, 300))
            if np.gcd(m, n) == 1 and m * n <= X:
                assert t[m * n] == t[m] * t[n]
                found += 1

    def test_bounded_by_tau(self):
        t = sieve_tau_k(2, 2000)
        tau = sieve_tau(2000)
        assert np.all(t.values[1:] >= 1)
        assert np.all(t.values[1:] <= tau.values[1:])


class TestTableIO:
    def test_binary_roundtrip(self, tmp_path):
        t = sieve_tau_k(3, 1000)
        path = tmp_path / "t.bin"
        t.to_binary(path)
        back = ArithTable.from_binary(path)
        assert back.kind == ArithKind.TAUK
        assert back.k == 3
        assert back.limit == 1000
        assert np.array_equal(back.values, t.values)

    def test_header_layout(self, tmp_path):
        t = sieve_tau(5)
        path = tmp_path / "t.bin"
        t.to_binary(path)
        raw = path.read_bytes()
        assert raw[:6] == b"PSLAB\0"
        assert raw[6] == 0  # kind tau
        assert raw[7] == 0  # k unused
        assert int.from_bytes(raw[8:16], "little") == 5
        assert len(raw) == 16 + 5 * 8
        # values 1..5: tau = 1,2,2,3,2
        vals = np.frombuffer(raw[16:], dtype="<i8")
        assert list(vals) == [1, 2, 2, 3, 2]

    def test_csv_export(self, tmp_path):
        t = sieve_tau(3)
        path = tmp_path / "t.csv"
        t.to_csv(path)
        assert path.read_text() == "n,value\n1,1\n2,2\n3,2\n"

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(b"NOTPSL" + b"\0" * 18)
        with pytest.raises(ValueError):
            ArithTable.from_binary(path)


class TestConstants:
    def test_euler_gamma_literal_against_mpmath(self):
        with mp.workdps(115):
            assert abs(mp.mpf(EULER_GAMMA_LITERAL) - mp.euler) < mp.mpf(10) ** -110

    def test_zeta2_closed_form(self):
        c = compute_constants(2, 128)
        with mp.workdps(60):
            assert abs(c.zeta_k - mp.pi**2 / 6) < mp.mpf(2) ** -124

    def test_zeta_prime_2_derived_digits(self):
        c = compute_constants(2, 128)
        with mp.workdps(60):
            ref = mp.mpf("-0.93754825431584375370257409456786497789786028861483")
            assert abs(c.zeta_prime_k - ref) < mp.mpf(10) ** -40

    @pytest.mark.parametrize("k,bits", [(2, 64), (2, 128), (3, 256), (4, 128), (50, 64)])
    def test_certified_bounds_hold(self, k, bits):
        c = compute_constants(k, bits)
        cap = mp.mpf(2) ** (-bits + 4)
        assert c.zeta_k_err <= cap
        assert c.zeta_prime_k_err <= cap
        with mp.workdps(int(bits * 0.31) + 30):
            assert abs(c.zeta_k - mp.zeta(k)) <= c.zeta_k_err
            assert abs(c.zeta_prime_k - mp.zeta(k, derivative=1)) <= c.zeta_prime_k_err

    def test_signs(self):
        c = compute_constants(3, 64)
        assert c.zeta_k > 1
        assert c.zeta_prime_k < 0

    def test_precision_unreachable(self):
        with pytest.raises(PrecisionUnreachable):
            compute_constants(2, 100_000)

    def test_validation(self):
        with pytest.raises(ValueError):
            compute_constants(1, 128)
        with pytest.raises(ValueError):
            compute_constants(2, 32)


@given(
    n=st.integers(min_value=1, max_value=5000),
    k=st.integers(min_value=2, max_value=4),
)
@settings(max_examples=60, deadline=None)
def test_tau_k_range_property(n, k):
    # 1 <= tau_(k)(n) <= tau(n), with equality to tau on k-free n
    t = _CACHED.setdefault(("tauk", k), sieve_tau_k(k, 5000))
    tau = _CACHED.setdefault("tau", sieve_tau(5000))
    kf = _CACHED.setdefault(("kfree", k), sieve_kfree(k, 5000))
    assert 1 <= t[n] <= tau[n]
    if kf[n] == 1:
        assert t[n] == tau[n]


_CACHED: dict = {}
