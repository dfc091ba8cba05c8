"""Prime generation, primality testing, and factorization services.

Everything here is deterministic: the sieve is segmented with a fixed
segment order, primality above the sieve limit uses a fixed Miller-Rabin
witness set, and the large-factor splitter is Brent's rho cycling with
parameters derived from the input itself.
"""

from __future__ import annotations

import math
import struct
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .errors import CacheFormatError, UnsupportedRangeError

FACTOR_LIMIT = 10**12          # supported factorization range
DEFAULT_SEGMENT = 1 << 20      # integers sieved per segment

# The first twelve primes are a valid deterministic Miller-Rabin witness
# set for every n < 3_317_044_064_679_887_385_961_981 (> 2^64).
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_MR_CERTIFIED = 3_317_044_064_679_887_385_961_981

_TABLE_MAGIC = b"PSLB"
_TABLE_VERSION = 1


class PrimeTable:
    """Immutable primality table over [0, limit].

    Optionally carries a smallest-prime-factor array over the same range,
    which makes factorization of table-sized integers a linear walk.
    """

    def __init__(self, limit: int, bits: np.ndarray, smallest: np.ndarray | None = None):
        self.limit = int(limit)
        self._bits = bits
        self._smallest = smallest
        self._primes: np.ndarray | None = None
        bits.setflags(write=False)
        if smallest is not None:
            smallest.setflags(write=False)

    def __contains__(self, n: int) -> bool:
        return self.is_prime(n)

    def is_prime(self, n: int) -> bool:
        if n < 0 or n > self.limit:
            raise ValueError(f"{n} outside table range [0, {self.limit}]")
        return bool(self._bits[n])

    def primes(self) -> np.ndarray:
        """All primes <= limit, increasing, as an int64 array."""
        if self._primes is None:
            self._primes = np.flatnonzero(self._bits).astype(np.int64)
            self._primes.setflags(write=False)
        return self._primes

    @property
    def bits(self) -> np.ndarray:
        """Read-only boolean primality array indexed by n."""
        return self._bits

    def primes_list(self) -> list[int]:
        """primes() as plain ints; cached, for tight point-evaluation loops."""
        if not hasattr(self, "_primes_list"):
            self._primes_list = [int(p) for p in self.primes()]
        return self._primes_list

    @property
    def prime_count(self) -> int:
        return len(self.primes())

    @property
    def has_smallest_factor(self) -> bool:
        return self._smallest is not None

    def smallest_factor(self, n: int) -> int:
        if self._smallest is None:
            raise ValueError("table built without smallest-factor support")
        if not 2 <= n <= self.limit:
            raise ValueError(f"{n} outside smallest-factor range [2, {self.limit}]")
        return int(self._smallest[n])

    # -- on-disk cache: magic, u32 version, u64 limit, packed primality bits --

    def to_bytes(self) -> bytes:
        head = _TABLE_MAGIC + struct.pack("<IQ", _TABLE_VERSION, self.limit)
        packed = np.packbits(self._bits, bitorder="little")
        return head + packed.tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "PrimeTable":
        if len(blob) < 16 or blob[:4] != _TABLE_MAGIC:
            raise CacheFormatError("not a prime-table cache (bad magic)")
        version, limit = struct.unpack("<IQ", blob[4:16])
        if version != _TABLE_VERSION:
            raise CacheFormatError(f"prime-table cache version {version} unsupported")
        nbytes = (limit + 1 + 7) // 8
        if len(blob) != 16 + nbytes:
            raise CacheFormatError("prime-table cache truncated")
        packed = np.frombuffer(blob[16:], dtype=np.uint8)
        bits = np.unpackbits(packed, count=limit + 1, bitorder="little").astype(bool)
        return cls(limit, bits)

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "PrimeTable":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


def build_prime_table(limit: int, with_smallest_factor: bool = False,
                      segment: int = DEFAULT_SEGMENT) -> PrimeTable:
    """Sieve of Eratosthenes over [0, limit], segmented to bound working set."""
    if limit < 2:
        raise ValueError(f"limit must be >= 2, got {limit}")
    if segment < 2:
        raise ValueError("segment must be >= 2")
    bits = np.ones(limit + 1, dtype=bool)
    bits[:2] = False
    root = math.isqrt(limit)
    base = np.ones(root + 1, dtype=bool)
    base[:2] = False
    for p in range(2, math.isqrt(root) + 1):
        if base[p]:
            base[p * p:: p] = False
    base_primes = np.flatnonzero(base)
    for lo in range(0, limit + 1, segment):
        hi = min(lo + segment, limit + 1)
        for p in base_primes:
            p = int(p)
            start = max(p * p, ((lo + p - 1) // p) * p)
            if start < hi:
                bits[start:hi:p] = False
    smallest = _smallest_factor_sieve(limit) if with_smallest_factor else None
    return PrimeTable(limit, bits, smallest)


def _smallest_factor_sieve(limit: int) -> np.ndarray:
    if limit >= 1 << 32:
        raise UnsupportedRangeError("smallest-factor table limited to 32-bit range")
    spf = np.zeros(limit + 1, dtype=np.uint32)
    for p in range(2, limit + 1):
        if spf[p] == 0:
            spf[p] = p
            if p * p <= limit:
                view = spf[p * p:: p]
                view[view == 0] = p
    spf[1] = 1
    return spf


# Lazily grown table shared by point operations that need small primes.
_shared: PrimeTable | None = None


def shared_table(min_limit: int) -> PrimeTable:
    global _shared
    if _shared is None or _shared.limit < min_limit:
        limit = max(min_limit, 1 << 16)
        if _shared is not None:
            limit = max(limit, 2 * _shared.limit)
        _shared = build_prime_table(limit)
    return _shared


def is_prime(n: int, table: PrimeTable | None = None) -> bool:
    """Primality of n >= 0; table lookup when available, Miller-Rabin above."""
    if n < 0:
        raise ValueError("is_prime expects n >= 0")
    if table is not None and n <= table.limit:
        return table.is_prime(n)
    if n < 2:
        return False
    if n <= shared_table(2).limit:
        return shared_table(2).is_prime(n)
    if n >= _MR_CERTIFIED:
        raise UnsupportedRangeError("deterministic witness set certified below 3.3e24")
    return _miller_rabin(n)


def _miller_rabin(n: int) -> bool:
    for b in _MR_BASES:
        if n % b == 0:
            return n == b
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for b in _MR_BASES:
        x = pow(b, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class Factorization:
    """Ordered (prime, exponent) pairs; empty for 1."""

    factors: tuple[tuple[int, int], ...]

    @property
    def value(self) -> int:
        out = 1
        for p, e in self.factors:
            out *= p**e
        return out

    @property
    def omega(self) -> int:
        return len(self.factors)

    @property
    def big_omega(self) -> int:
        return sum(e for _, e in self.factors)

    @property
    def is_squarefree(self) -> bool:
        return all(e == 1 for _, e in self.factors)

    @property
    def divisor_count(self) -> int:
        out = 1
        for _, e in self.factors:
            out *= e + 1
        return out

    def divisors(self) -> list[int]:
        out = [1]
        for p, e in self.factors:
            out = [d * p**i for d in out for i in range(e + 1)]
        return sorted(out)


def factorize(n: int, table: PrimeTable | None = None) -> Factorization:
    """Factor 1 <= n <= 10**12 into increasing prime powers."""
    if n < 1:
        raise ValueError(f"factorize expects n >= 1, got {n}")
    if n > FACTOR_LIMIT:
        raise UnsupportedRangeError(f"factorize supports n <= {FACTOR_LIMIT}")
    if n == 1:
        return Factorization(())
    if table is not None and table.has_smallest_factor and n <= table.limit:
        return _factorize_spf(n, table)
    return _factorize_general(n)


def _factorize_spf(n: int, table: PrimeTable) -> Factorization:
    out = []
    while n > 1:
        p = table.smallest_factor(n)
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        out.append((p, e))
    return Factorization(tuple(out))


_TRIAL_BOUND = 10_000


def _factorize_general(n: int) -> Factorization:
    found: dict[int, int] = {}
    for p in shared_table(_TRIAL_BOUND).primes():
        p = int(p)
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            found[p] = e
    if n > 1:
        for p in _split(n):
            found[p] = found.get(p, 0) + 1
    return Factorization(tuple(sorted(found.items())))


def _split(n: int) -> list[int]:
    """Prime factors (with multiplicity) of n whose factors all exceed the trial bound."""
    if n == 1:
        return []
    if is_prime(n):
        return [n]
    d = _pollard_brent(n)
    return sorted(_split(d) + _split(n // d))


def _pollard_brent(n: int) -> int:
    """Brent-cycle rho; parameters stepped deterministically from n."""
    if n % 2 == 0:
        return 2
    for salt in range(1, 1000):
        y = (salt * 0x9E3779B97F4A7C15 + 1) % n
        c = (salt * salt + salt + 1) % n
        if c == 0 or c == n - 2:
            continue
        m, g, r, q = 128, 1, 1, 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    raise ArithmeticError(f"rho failed to split {n}")  # unreachable in supported range


def largest_prime_factor(n: int, table: PrimeTable | None = None) -> int:
    """P+(n); by convention 1 for n = 1 so smoothness predicates are total."""
    if n == 1:
        return 1
    f = factorize(n, table)
    return f.factors[-1][0]


def primes_in_class(limit: int, residue: int, modulus: int,
                    table: PrimeTable | None = None):
    """Yield primes p <= limit with p = residue (mod modulus), increasing."""
    if modulus < 1 or not 0 <= residue < modulus:
        raise ValueError(f"invalid residue class {residue} mod {modulus}")
    tab = table if table is not None and table.limit >= limit else shared_table(limit)
    ps = tab.primes()
    cut = bisect_right(ps, limit)
    for p in ps[:cut]:
        if p % modulus == residue:
            yield int(p)
