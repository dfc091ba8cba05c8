import pytest

from pslab.primes import build_prime_table


@pytest.fixture(scope="session")
def table_1e4():
    return build_prime_table(10**4, with_smallest_factor=True)


@pytest.fixture(scope="session")
def table_1e6():
    return build_prime_table(10**6)
