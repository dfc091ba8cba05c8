"""Exact two-squares representation counting for individual integers.

Counts live in the first quadrant (a >= 0, b > 0); ordered/signed counts
are 4x the quadrant count.  No floating point is used here: square tests
go through math.isqrt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoRepresentationError
from .primes import PrimeTable, factorize, is_prime, shared_table


def chi4(n: int) -> int:
    """Non-principal character mod 4: 0 on evens, +1 on 1 (4), -1 on 3 (4)."""
    if n % 2 == 0:
        return 0
    return 1 if n % 4 == 1 else -1


def r0(n: int, table: PrimeTable | None = None) -> int:
    """Number of (a, b), a >= 0 < b, with a^2 + b^2 = n.

    Evaluated as the divisor sum of chi4 in multiplicative form: zero if
    any prime 3 (mod 4) divides n to an odd power, else the product of
    (e_p + 1) over primes p = 1 (mod 4).
    """
    if n < 1:
        raise ValueError("r0 expects n >= 1")
    out = 1
    for p, e in factorize(n, table).factors:
        if p % 4 == 1:
            out *= e + 1
        elif p % 4 == 3 and e % 2 == 1:
            return 0
    return out


def r0_counts(limit: int) -> np.ndarray:
    """r0(n) for every n <= limit at once, by walking the quadrant lattice."""
    if limit < 1:
        raise ValueError("limit must be >= 1")
    chunks = []
    a = 0
    while a * a <= limit:
        bmax = math.isqrt(limit - a * a)
        if bmax >= 1:
            b = np.arange(1, bmax + 1, dtype=np.int64)
            chunks.append(a * a + b * b)
        a += 1
    return np.bincount(np.concatenate(chunks), minlength=limit + 1)


def enumerate_reps(n: int) -> list[tuple[int, int]]:
    """All (a, b) with a^2 + b^2 = n, a >= 0, b > 0, sorted by a."""
    if n < 1:
        raise ValueError("enumerate_reps expects n >= 1")
    out = []
    a = 0
    while a * a <= n:
        b2 = n - a * a
        b = math.isqrt(b2)
        if b > 0 and b * b == b2:
            out.append((a, b))
        a += 1
    return out


def canonical_reps(n: int) -> list[tuple[int, int]]:
    """One (min, max) pair per unordered representation of n."""
    return [(a, b) for a, b in enumerate_reps(n) if a <= b]


def represent_prime(p: int) -> tuple[int, int]:
    """The unique (r, s), r <= s, with r^2 + s^2 = p for p = 2 or p = 1 (mod 4).

    Descent: take z with z^2 = -1 (mod p), then the first remainder below
    sqrt(p) in the Euclidean chain for (p, z) is one leg.
    """
    if p == 2:
        return (1, 1)
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if p % 4 == 3:
        raise NoRepresentationError(f"{p} = 3 (mod 4) is not a sum of two squares")
    z = _sqrt_minus_one(p)
    a, b = p, z
    while b * b > p:
        a, b = b, a % b
    r = b
    s = math.isqrt(p - r * r)
    return (r, s) if r <= s else (s, r)


def _sqrt_minus_one(p: int) -> int:
    # first quadratic non-residue, raised to (p-1)/4
    for a in range(2, p):
        if pow(a, (p - 1) // 2, p) == p - 1:
            return pow(a, (p - 1) // 4, p)
    raise ArithmeticError(f"no square root of -1 mod {p}")


def _point_table(n: int, table: PrimeTable | None) -> PrimeTable:
    root = max(math.isqrt(n), 2)
    if table is not None and table.limit >= root:
        return table
    return shared_table(root)


def r2(n: int, table: PrimeTable | None = None) -> int:
    """Ordered prime pairs (p, q) with p^2 + q^2 = n."""
    if n < 1:
        raise ValueError("r2 expects n >= 1")
    tab = _point_table(n, table)
    bits = tab.bits
    count = 0
    for p in tab.primes_list():
        rem = n - p * p
        if rem < 4:
            break
        q = math.isqrt(rem)
        if q * q == rem and bits[q]:
            count += 1
    return count


def R2(n: int, table: PrimeTable | None = None) -> int:
    """Prime pairs p < q with p^2 + q^2 = n."""
    if n < 1:
        raise ValueError("R2 expects n >= 1")
    tab = _point_table(n, table)
    bits = tab.bits
    count = 0
    for p in tab.primes_list():
        if 2 * p * p >= n:
            break
        rem = n - p * p
        q = math.isqrt(rem)
        if q * q == rem and bits[q]:
            count += 1
    return count


def is_two_prime_square(n: int, table: PrimeTable | None = None) -> bool:
    """Whether n = 2p^2 for a prime p."""
    if n < 2 or n % 2:
        return False
    h = n // 2
    p = math.isqrt(h)
    return p * p == h and is_prime(p, table)


def r1(n: int, table: PrimeTable | None = None) -> int:
    """Pairs (m, p), m >= 1 integer and p prime, with m^2 + p^2 = n.

    m = 0 is excluded: the sieving variables this feeds are strictly
    positive, so n = p^2 does not count.
    """
    if n < 1:
        raise ValueError("r1 expects n >= 1")
    tab = _point_table(n, table)
    count = 0
    for p in tab.primes_list():
        rem = n - p * p
        if rem < 1:
            break
        m = math.isqrt(rem)
        if m * m == rem:
            count += 1
    return count


def omega_star(n: int, table: PrimeTable | None = None) -> int:
    """Number of distinct odd prime factors of n."""
    if n < 1:
        raise ValueError("omega_star expects n >= 1")
    return sum(1 for p, _ in factorize(n, table).factors if p != 2)


def in_class_M(n: int, table: PrimeTable | None = None) -> bool:
    """Whether 2 || n and every prime factor of n/2 is 1 (mod 4)."""
    if n < 1:
        raise ValueError("in_class_M expects n >= 1")
    if n % 2 or (n // 2) % 2 == 0:
        return False
    return all(p % 4 == 1 for p, _ in factorize(n // 2, table).factors)


@dataclass(frozen=True)
class RepProfile:
    """Point summary of one integer's prime-square representation structure."""

    n: int
    r0: int
    r2: int
    R2: int
    is_2p2: bool
    omega_star: int
    in_M: bool


def rep_profile(n: int, table: PrimeTable | None = None) -> RepProfile:
    return RepProfile(
        n=n,
        r0=r0(n, table),
        r2=r2(n, table),
        R2=R2(n, table),
        is_2p2=is_two_prime_square(n, table),
        omega_star=omega_star(n, table),
        in_M=in_class_M(n, table),
    )
