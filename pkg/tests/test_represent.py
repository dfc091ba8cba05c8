import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pslab.errors import NoRepresentationError
from pslab.represent import (R2, canonical_reps, chi4, enumerate_reps, in_class_M,
                             is_two_prime_square, omega_star, r0, r0_counts, r1, r2,
                             rep_profile, represent_prime)


def r0_divisor_sum(n):
    """Literal divisor-sum oracle."""
    return sum(chi4(d) for d in range(1, n + 1) if n % d == 0)


def test_chi4_period():
    assert [chi4(n) for n in range(1, 9)] == [1, 0, -1, 0, 1, 0, -1, 0]


class TestR0:
    def test_examples(self):
        assert r0(1) == 1
        assert r0(5) == 2
        assert r0(25) == 3

    def test_divisor_sum_oracle(self):
        for n in range(1, 3000):
            assert r0(n) == r0_divisor_sum(n), n

    def test_two_paths_to_1e5(self):
        # multiplicative evaluation vs quadrant-lattice enumeration
        counts = r0_counts(10**5)
        for n in range(1, 10**5 + 1):
            assert r0(n) == counts[n], n

    def test_matches_enumeration_length(self):
        for n in range(1, 2000):
            assert r0(n) == len(enumerate_reps(n)), n

    def test_invalid(self):
        with pytest.raises(ValueError):
            r0(0)


class TestEnumerateReps:
    def test_examples(self):
        assert enumerate_reps(3) == []
        assert enumerate_reps(5) == [(1, 2), (2, 1)]
        assert enumerate_reps(2) == [(1, 1)]

    def test_sorted_by_a_and_valid(self):
        for n in (25, 325, 1105):
            reps = enumerate_reps(n)
            assert reps == sorted(reps)
            assert all(a * a + b * b == n and a >= 0 and b > 0 for a, b in reps)

    def test_signed_count_is_four_r0(self):
        for n in range(1, 500):
            signed = {(sa * a, sb * b) for a, b in enumerate_reps(n)
                      for sa in (1, -1) for sb in (1, -1)}
            signed |= {(v, u) for u, v in signed}
            assert len(signed) == 4 * r0(n), n

    def test_canonical_covers_unordered(self):
        for n in (25, 50, 65, 325):
            cr = canonical_reps(n)
            assert all(a <= b for a, b in cr)
            assert {frozenset((a, b)) for a, b in enumerate_reps(n)} == \
                   {frozenset((a, b)) for a, b in cr}


class TestRepresentPrime:
    def test_examples(self):
        assert represent_prime(2) == (1, 1)
        assert represent_prime(5) == (1, 2)

    def test_large_prime(self):
        r, s = represent_prime(1000033)
        assert r * r + s * s == 1000033 and 1 <= r <= s

    def test_exhaustive_oracle(self, table_1e4):
        for p in table_1e4.primes_list():
            if p != 2 and p % 4 != 1:
                continue
            r, s = represent_prime(p)
            scan = [(a, math.isqrt(p - a * a)) for a in range(1, math.isqrt(p // 2) + 1)
                    if math.isqrt(p - a * a) ** 2 == p - a * a]
            assert (r, s) in scan and len(scan) == 1

    def test_errors(self):
        with pytest.raises(NoRepresentationError):
            represent_prime(7)
        with pytest.raises(ValueError):
            represent_prime(9)


class TestPrimePairCounts:
    def test_examples(self):
        assert (r2(8), R2(8)) == (1, 0)
        assert (r2(13), R2(13)) == (2, 1)
        assert (r2(3), R2(3)) == (0, 0)

    def test_splitting_identity_range(self):
        for n in range(1, 20000):
            assert r2(n) == 2 * R2(n) + is_two_prime_square(n), n

    @given(st.integers(min_value=1, max_value=10**6))
    @settings(max_examples=200, deadline=None)
    def test_splitting_identity_property(self, n):
        assert r2(n) == 2 * R2(n) + is_two_prime_square(n)

    def test_r2_brute_force(self, table_1e4):
        ps = table_1e4.primes_list()[:30]
        for n in range(1, 3000):
            brute = sum(1 for p in ps for q in ps if p * p + q * q == n)
            assert r2(n) == brute, n


class TestR1:
    def test_examples(self):
        assert r1(5) == 1
        assert r1(13) == 2
        assert r1(3) == 0

    def test_m_zero_excluded(self):
        # n = p^2 would need m = 0
        assert r1(4) == 0 and r1(9) == 0
        assert r1(25) == 1  # only (m, p) = (4, 3); (0, 5) is excluded

    def test_dominates_half_r2(self):
        for n in range(1, 10**5 + 1):
            assert r1(n) >= r2(n) / 2, n


class TestStructure:
    def test_omega_star_examples(self):
        assert omega_star(2) == 0
        assert omega_star(130) == 2
        assert omega_star(90) == 2

    def test_in_class_M_examples(self):
        assert in_class_M(2)
        assert in_class_M(10)
        assert not in_class_M(4)

    def test_class_M_shape_of_prime_pair_sums(self):
        # any n <= 1e5 with r2 > 0, other than 2p^2, has only prime factors
        # 2 or 1 (mod 4), with 2 exactly once when even
        from pslab.primes import factorize
        from pslab.sweep import SweepConfig, sweep_prime_pairs
        m = sweep_prime_pairs(SweepConfig(x=10**5))
        for n, u, e in zip(m.ns, m.r2_counts, m.flags):
            n = int(n)
            if e:
                continue
            fac = factorize(n).factors
            assert all(p == 2 or p % 4 == 1 for p, _ in fac), n
            if n % 2 == 0:
                assert dict(fac)[2] == 1, n

    def test_submultiplicative_on_class_M(self):
        members = [n for n in range(2, 10**5, 4) if in_class_M(n)]
        rng = random.Random(7)
        for _ in range(10**4):
            m, n = rng.choice(members), rng.choice(members)
            if m * n <= 10**10:
                assert r0(m * n) <= r0(m) * r0(n), (m, n)


def test_rep_profile_consistency():
    for n in (8, 13, 50, 338, 100000):
        p = rep_profile(n)
        assert p.r2 == 2 * p.R2 + p.is_2p2
        assert p.r0 == len(enumerate_reps(n))


def test_log_average_growth_of_r0_powers():
    """The weighted sums sum(r0^k(n)/n) should grow no faster than
    C * (log x)^(2^(k-1)); the ratio is monotone decreasing on the sampled
    grid, so the fitted C is the first sample's ratio."""
    import math

    import numpy as np

    samples = (10**4, 10**5, 10**6)
    counts = r0_counts(samples[-1]).astype(np.float64)
    inv_n = np.zeros_like(counts)
    inv_n[1:] = 1.0 / np.arange(1, len(counts))
    for k in (1, 2, 3):
        weighted = counts**k * inv_n
        ratios = []
        for x in samples:
            total = float(weighted[: x + 1].sum())
            ratios.append(total / math.log(x) ** (2 ** (k - 1)))
        fitted_c = max(ratios)
        assert ratios[0] >= ratios[1] >= ratios[2]
        assert fitted_c == ratios[0]
        print(f"k={k}: fitted C = {fitted_c:.5f}, ratios {ratios}")
