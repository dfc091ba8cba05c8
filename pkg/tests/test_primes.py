import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pslab.errors import CacheFormatError, UnsupportedRangeError
from pslab.primes import (Factorization, PrimeTable, build_prime_table, factorize,
                          is_prime, largest_prime_factor, primes_in_class)


def trial_division_is_prime(n):
    """Independent naive oracle."""
    if n < 2:
        return False
    for d in range(2, math.isqrt(n) + 1):
        if n % d == 0:
            return False
    return True


def naive_sieve(limit):
    flags = bytearray([1]) * (limit + 1)
    flags[0] = flags[1] = 0
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p:: p] = bytes(len(range(p * p, limit + 1, p)))
    return flags


class TestBuildPrimeTable:
    def test_limit_30(self):
        assert build_prime_table(30).prime_count == 10

    def test_smallest_case(self):
        t = build_prime_table(2)
        assert t.prime_count == 1 and t.is_prime(2)

    def test_million_against_naive_sieve(self, table_1e6):
        assert table_1e6.prime_count == 78498
        flags = naive_sieve(10**6)
        assert np.array_equal(table_1e6.bits,
                              np.frombuffer(bytes(flags), dtype=np.uint8).astype(bool))

    def test_invalid_limit(self):
        with pytest.raises(ValueError):
            build_prime_table(1)

    def test_segment_size_does_not_matter(self):
        a = build_prime_table(10**4, segment=37)
        b = build_prime_table(10**4, segment=1 << 20)
        assert np.array_equal(a.bits, b.bits)

    def test_construction_deterministic(self):
        assert build_prime_table(5000).to_bytes() == build_prime_table(5000).to_bytes()


class TestIsPrime:
    def test_units_and_small(self):
        assert not is_prime(0) and not is_prime(1)
        assert is_prime(2) and is_prime(3)

    def test_million_three(self):
        assert trial_division_is_prime(1000003)
        assert is_prime(1000003)

    def test_agrees_with_oracle_to_1e5(self, table_1e6):
        flags = naive_sieve(10**5)
        for n in range(10**5 + 1):
            assert is_prime(n, table_1e6) == bool(flags[n]), n
        rng = random.Random(5)
        for n in rng.sample(range(10**5 + 1), 2000):
            assert is_prime(n) == trial_division_is_prime(n), n

    def test_above_table_uses_witnesses(self):
        # primes and near-primes straddling 2^32 and 10^12
        assert is_prime(4294967311)
        assert not is_prime(4294967297)  # 641 * 6700417
        assert is_prime(999999999989)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            is_prime(-3)

    def test_beyond_certified_range(self):
        with pytest.raises(UnsupportedRangeError):
            is_prime(2**82)


class TestFactorize:
    def test_one_is_empty(self):
        f = factorize(1)
        assert f.factors == () and f.value == 1 and f.omega == 0

    def test_examples(self):
        assert factorize(130).factors == ((2, 1), (5, 1), (13, 1))
        assert factorize(49).factors == ((7, 2),)

    def test_invalid(self):
        with pytest.raises(ValueError):
            factorize(0)
        with pytest.raises(UnsupportedRangeError):
            factorize(10**12 + 1)

    def test_spf_path_matches_general(self, table_1e4):
        for n in range(1, 2000):
            assert factorize(n, table_1e4).factors == factorize(n).factors

    def test_derived_quantities(self):
        f = factorize(360)  # 2^3 3^2 5
        assert f.big_omega == 6 and f.omega == 3
        assert not f.is_squarefree and f.divisor_count == 24
        assert f.divisors()[:6] == [1, 2, 3, 4, 5, 6]

    def test_random_roundtrip_bulk(self):
        rng = random.Random(1234)
        for _ in range(10**4):
            n = rng.randrange(1, 10**10)
            f = factorize(n)
            assert f.value == n
            assert all(is_prime(p) for p, _ in f.factors)
            assert all(e >= 1 for _, e in f.factors)
            ps = [p for p, _ in f.factors]
            assert ps == sorted(ps)

    @given(st.integers(min_value=1, max_value=10**12))
    @settings(max_examples=150, deadline=None)
    def test_roundtrip_property(self, n):
        f = factorize(n)
        assert f.value == n
        assert all(is_prime(p) for p, _ in f.factors)


class TestLargestPrimeFactor:
    def test_convention_at_one(self):
        assert largest_prime_factor(1) == 1

    def test_examples(self):
        assert largest_prime_factor(130) == 13
        assert largest_prime_factor(8) == 2


class TestPrimesInClass:
    def test_examples(self):
        assert list(primes_in_class(30, 1, 4)) == [5, 13, 17, 29]
        assert list(primes_in_class(30, 3, 4)) == [3, 7, 11, 19, 23]
        assert list(primes_in_class(2, 0, 1)) == [2]

    def test_invalid_class(self):
        with pytest.raises(ValueError):
            list(primes_in_class(30, 4, 4))
        with pytest.raises(ValueError):
            list(primes_in_class(30, 0, 0))

    def test_partition_of_odd_primes(self, table_1e4):
        ones = list(primes_in_class(10**4, 1, 4, table_1e4))
        threes = list(primes_in_class(10**4, 3, 4, table_1e4))
        everything = sorted(ones + threes + [2])
        assert everything == [int(p) for p in table_1e4.primes()]
        assert not set(ones) & set(threes)


class TestSmallestFactor:
    def test_divides_and_prime(self, table_1e4):
        rng = random.Random(99)
        for _ in range(500):
            n = rng.randrange(2, 10**4 + 1)
            p = table_1e4.smallest_factor(n)
            assert n % p == 0 and is_prime(p)
            assert all(n % q for q in range(2, p))

    def test_not_built_by_default(self, table_1e6):
        with pytest.raises(ValueError):
            table_1e6.smallest_factor(12)


class TestTableCache:
    def test_roundtrip(self, tmp_path):
        t = build_prime_table(12345)
        path = tmp_path / "t.pslb"
        t.save(path)
        back = PrimeTable.load(path)
        assert back.limit == t.limit
        assert np.array_equal(back.bits, t.bits)
        assert back.to_bytes() == t.to_bytes()

    def test_header_layout(self):
        blob = build_prime_table(100).to_bytes()
        assert blob[:4] == b"PSLB"
        assert int.from_bytes(blob[4:8], "little") == 1      # version
        assert int.from_bytes(blob[8:16], "little") == 100   # limit

    def test_bad_magic(self):
        with pytest.raises(CacheFormatError):
            PrimeTable.from_bytes(b"XXXX" + bytes(20))

    def test_truncated(self):
        blob = build_prime_table(100).to_bytes()
        with pytest.raises(CacheFormatError):
            PrimeTable.from_bytes(blob[:-1])


def test_factorization_is_value_object():
    assert Factorization(((2, 1), (3, 2))) == Factorization(((2, 1), (3, 2)))
