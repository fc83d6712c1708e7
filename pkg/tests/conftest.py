"""Shared session fixtures: the large sieve tables are built once.

Both the corollary and the thm2/thm3 experiments need tables reaching
floor(10^6 ^ c) at c = 11/10, which takes a couple of seconds each; every
other fixture is cheap enough to stay local to its test module.
"""

import pytest

from pslab.arith import sieve_tau, sieve_tau_k
from pslab.floorpow import ExponentParam, floor_pow

C_MAIN = ExponentParam(11, 10)
X_TOP = 10**6


@pytest.fixture(scope="session")
def tau_table_1e6():
    return sieve_tau(floor_pow(X_TOP, C_MAIN))


@pytest.fixture(scope="session")
def tau2_table_1e6():
    return sieve_tau_k(2, floor_pow(X_TOP, C_MAIN))
