"""Bulk sweeps over prime pairs (p, q) with p^2 + q^2 <= x, and the
statistics derived from the resulting multiplicity map: power moments,
falling-factorial sums, non-diagonal tuple counts, and mass functions.

Only the upper triangle p <= q is enumerated; each sum is recorded once
with its p < q multiplicity and a flag for the diagonal p = q case, and
ordered-pair quantities are reconstructed from the splitting identity
r2(n) = 2*R2(n) + [n = 2p^2].  All statistic folds run on a tally of
distinct (R2, flag) values in exact integer arithmetic.
"""

from __future__ import annotations

import math
import os
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import CacheFormatError, ResourceLimitError
from .primes import PrimeTable, build_prime_table, primes_in_class, shared_table

MAP_MAGIC = b"PSMM"
MAP_VERSION = 1
DEFAULT_SEGMENT_SPAN = 1 << 26
_MEMORY_BUDGET = 3 << 30  # bytes; guards sweeps that cannot fit even segmented

_REC_DTYPE = np.dtype([("n", "<u8"), ("r2", "<u4"), ("flags", "<u1")])


@dataclass
class SweepConfig:
    x: int
    segment_span: int = DEFAULT_SEGMENT_SPAN
    worker_count: int = 1
    cache_dir: str | None = None

    def __post_init__(self):
        if self.x < 1:
            raise ValueError("sweep bound x must be >= 1")
        if self.segment_span < 1:
            raise ValueError("segment_span must be >= 1")
        if self.worker_count < 1:
            raise ValueError("worker_count must be >= 1")


class RepMultiplicityMap:
    """Sparse association n -> (R2(n), n = 2p^2 flag) for all n <= x with r2(n) > 0."""

    def __init__(self, x: int, ns: np.ndarray, r2_counts: np.ndarray, flags: np.ndarray):
        self.x = int(x)
        self.ns = ns.astype(np.uint64, copy=False)
        self.r2_counts = r2_counts.astype(np.uint32, copy=False)
        self.flags = flags.astype(np.uint8, copy=False)
        for arr in (self.ns, self.r2_counts, self.flags):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return len(self.ns)

    def __eq__(self, other) -> bool:
        return (isinstance(other, RepMultiplicityMap) and self.x == other.x
                and np.array_equal(self.ns, other.ns)
                and np.array_equal(self.r2_counts, other.r2_counts)
                and np.array_equal(self.flags, other.flags))

    @property
    def total_pairs(self) -> int:
        """Number of ordered prime pairs (p, q) with p^2 + q^2 <= x."""
        return 2 * int(self.r2_counts.sum(dtype=np.int64)) + int(self.flags.sum(dtype=np.int64))

    def lookup(self, n: int) -> tuple[int, bool] | None:
        i = np.searchsorted(self.ns, np.uint64(n))
        if i < len(self.ns) and self.ns[i] == n:
            return int(self.r2_counts[i]), bool(self.flags[i])
        return None

    def r2_of(self, n: int) -> int:
        hit = self.lookup(n)
        if hit is None:
            return 0
        u, e = hit
        return 2 * u + int(e)

    def tally(self) -> dict[tuple[int, int], int]:
        """Counts of distinct (R2, flag) pairs; statistics fold over this."""
        key = self.r2_counts.astype(np.int64) * 2 + self.flags
        vals, counts = np.unique(key, return_counts=True)
        return {(int(v) // 2, int(v) % 2): int(c) for v, c in zip(vals, counts)}

    # -- serialization: magic, u32 version, u64 x, sorted fixed-width records --

    def to_bytes(self) -> bytes:
        rec = np.empty(len(self.ns), dtype=_REC_DTYPE)
        rec["n"] = self.ns
        rec["r2"] = self.r2_counts
        rec["flags"] = self.flags
        return MAP_MAGIC + struct.pack("<IQ", MAP_VERSION, self.x) + rec.tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "RepMultiplicityMap":
        if len(blob) < 16 or blob[:4] != MAP_MAGIC:
            raise CacheFormatError("not a multiplicity-map cache (bad magic)")
        version, x = struct.unpack("<IQ", blob[4:16])
        if version != MAP_VERSION:
            raise CacheFormatError(f"map cache version {version} unsupported")
        body = blob[16:]
        if len(body) % _REC_DTYPE.itemsize:
            raise CacheFormatError("map cache truncated")
        rec = np.frombuffer(body, dtype=_REC_DTYPE)
        ns = rec["n"].astype(np.uint64)
        if len(ns) > 1 and not np.all(ns[1:] > ns[:-1]):
            raise CacheFormatError("map cache records out of order")
        return cls(x, ns, rec["r2"].astype(np.uint32), rec["flags"].astype(np.uint8))

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "RepMultiplicityMap":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


def _sweep_segment(args) -> tuple[int, np.ndarray, np.ndarray, np.ndarray]:
    """Pairs p <= q with lo <= p^2 + q^2 <= min(hi - 1, x), tallied by sum."""
    x, lo, hi, pbytes = args
    ps = np.frombuffer(pbytes, dtype=np.int64)
    top = min(hi - 1, x)
    parts = []
    diag = []
    for p in ps:
        p = int(p)
        pp = p * p
        if 2 * pp > top:
            break
        qhi = math.isqrt(top - pp)
        if lo > pp:
            qlo = max(p, math.isqrt(lo - pp - 1) + 1)
        else:
            qlo = p
        if qlo > qhi:
            continue
        i = np.searchsorted(ps, qlo, side="left")
        j = np.searchsorted(ps, qhi, side="right")
        if i < j:
            qs = ps[i:j]
            parts.append(pp + qs * qs)
        if qlo == p and p <= qhi:
            diag.append(2 * pp)
    if not parts:
        empty = np.empty(0, dtype=np.int64)
        return lo, empty, empty.astype(np.int64), np.empty(0, dtype=np.uint8)
    alln = np.concatenate(parts)
    ns, counts = np.unique(alln, return_counts=True)
    flags = np.zeros(len(ns), dtype=np.uint8)
    if diag:
        flags[np.searchsorted(ns, np.asarray(diag, dtype=np.int64))] = 1
    return lo, ns, counts - flags, flags


def _check_budget(config: SweepConfig) -> None:
    x = config.x
    if x < 100:
        return
    est_pairs = 3.3 * x / math.log(x) ** 2
    if est_pairs * 21 > _MEMORY_BUDGET:
        raise ResourceLimitError(
            f"sweep to x={x} needs ~{est_pairs * 21 / 2**30:.0f} GiB for the map; "
            "reduce x or raise the budget")
    span_share = min(1.0, config.segment_span / x)
    if est_pairs * span_share * 40 > _MEMORY_BUDGET:
        raise ResourceLimitError(
            f"segment span {config.segment_span} too wide for x={x}; "
            "lower segment_span so per-segment buffers fit in memory")


def sweep_prime_pairs(config: SweepConfig) -> RepMultiplicityMap:
    """Build the multiplicity map for n <= x.

    Deterministic for fixed x: segments tile [1, x], workers own disjoint
    segments, and the merge is concatenation in segment order, so the
    result is independent of worker_count and segment_span.
    """
    _check_budget(config)
    x = config.x
    root = math.isqrt(x)
    if root < 2:
        return RepMultiplicityMap(x, np.empty(0, dtype=np.uint64),
                                  np.empty(0, dtype=np.uint32), np.empty(0, dtype=np.uint8))
    ps = shared_table(root).primes()
    ps = ps[ps <= root]
    pbytes = ps.astype(np.int64).tobytes()
    jobs = [(x, lo, min(lo + config.segment_span, x + 1), pbytes)
            for lo in range(1, x + 1, config.segment_span)]
    if config.worker_count == 1 or len(jobs) == 1:
        results = [_sweep_segment(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=config.worker_count) as pool:
            results = list(pool.map(_sweep_segment, jobs))
    results.sort(key=lambda r: r[0])
    ns = np.concatenate([r[1] for r in results]) if results else np.empty(0, dtype=np.int64)
    r2c = np.concatenate([r[2] for r in results]) if results else np.empty(0, dtype=np.int64)
    fl = np.concatenate([r[3] for r in results]) if results else np.empty(0, dtype=np.uint8)
    return RepMultiplicityMap(x, ns.astype(np.uint64), r2c.astype(np.uint32), fl)


def cached_sweep(config: SweepConfig, notice=None) -> RepMultiplicityMap:
    """Sweep with an on-disk cache keyed by x and format version.

    A corrupt or mismatched cache file is rebuilt in place; `notice` (a
    callable taking one string) is told when that happens.  Writes hold an
    advisory lock so concurrent processes do not interleave.
    """
    if config.cache_dir is None:
        return sweep_prime_pairs(config)
    os.makedirs(config.cache_dir, exist_ok=True)
    path = os.path.join(config.cache_dir, f"map-x{config.x}-v{MAP_VERSION}.psmm")
    if os.path.exists(path):
        try:
            m = RepMultiplicityMap.load(path)
            if m.x == config.x:
                return m
            raise CacheFormatError(f"cache holds x={m.x}, wanted {config.x}")
        except CacheFormatError as exc:
            if notice:
                notice(f"rebuilding cache {path}: {exc}")
    m = sweep_prime_pairs(config)
    _locked_write(path, m.to_bytes())
    return m


def _locked_write(path: str, blob: bytes) -> None:
    import fcntl

    lock_path = path + ".lock"
    with open(lock_path, "w") as lock:
        fcntl.flock(lock, fcntl.LOCK_EX)
        tmp = path + ".tmp"
        with open(tmp, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, path)
        fcntl.flock(lock, fcntl.LOCK_UN)


# ---------------------------------------------------------------------------
# statistics over a map (exact integer arithmetic throughout)
# ---------------------------------------------------------------------------


def raw_moment(m: RepMultiplicityMap, k: int) -> int:
    """Sum of r2(n)^k over n <= x, with r2 = 2*R2 + [n = 2p^2]."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return sum(c * (2 * u + e) ** k for (u, e), c in m.tally().items())


def falling_sum(m: RepMultiplicityMap, k: int) -> int:
    """S_k = k! * sum of C(R2(n), k); supported on n with R2(n) >= k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    kf = math.factorial(k)
    return kf * sum(c * math.comb(u, k) for (u, e), c in m.tally().items())


def stirling2_row(k: int) -> list[int]:
    """Stirling subset numbers {k, j} for j = 0..k, by the additive recurrence."""
    row = [1]
    for n in range(1, k + 1):
        nxt = [0] * (n + 1)
        for j in range(1, n + 1):
            nxt[j] = j * row[j] if j < n else 0
            nxt[j] += row[j - 1]
        row = nxt
    return row


def stirling_convert(falling: list[int], k: int) -> int:
    """Recover sum of R2^k from the falling sums S_1..S_k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(falling) < k:
        raise ValueError(f"need S_1..S_{k}, got {len(falling)} values")
    row = stirling2_row(k)
    return sum(row[j] * falling[j - 1] for j in range(1, k + 1))


def power_sum_R2(m: RepMultiplicityMap, k: int) -> int:
    """Direct sum of R2(n)^k; the independent side of the Stirling check."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return sum(c * u**k for (u, e), c in m.tally().items())


def nondiagonal_count(m: RepMultiplicityMap, k: int) -> int:
    """Ordered 2k-tuples of primes with a common sum of squares <= x and
    pairwise distinct unordered pairs.

    Per n with u = R2(n) and e = [n = 2p^2], the contribution is
    k! * sum over j in {0, 1}, j <= e of C(u, k - j) * C(e, j) * 2^(k - j):
    each off-diagonal pair admits two orderings, the diagonal pair one.
    """
    if k < 2:
        raise ValueError("non-diagonal level k must be >= 2")
    kf = math.factorial(k)
    total = 0
    for (u, e), c in m.tally().items():
        for j in (0, 1):
            if j <= e and k - j >= 0:
                total += c * kf * math.comb(u, k - j) * math.comb(e, j) * 2 ** (k - j)
    return total


@dataclass(frozen=True)
class MassFunctionTable:
    """Rows r -> N_r(x) = #{n <= x : R2(n) = r} for r >= 1 with N_r > 0."""

    x: int
    rows: dict[int, int]

    @property
    def support_size(self) -> int:
        return sum(self.rows.values())


def mass_function(m: RepMultiplicityMap) -> MassFunctionTable:
    rows: dict[int, int] = {}
    for (u, e), c in m.tally().items():
        if u >= 1:
            rows[u] = rows.get(u, 0) + c
    return MassFunctionTable(m.x, dict(sorted(rows.items())))


def count_M_by_omega(x: int, table: PrimeTable | None = None) -> dict[int, int]:
    """Exact counts of n <= x with 2 || n, odd part built only from primes
    1 (mod 4), keyed by the number of distinct odd prime factors.

    Enumerates the sparse class directly as 2 * (products of primes
    1 mod 4) instead of factoring every integer up to x.
    """
    if x < 2:
        raise ValueError("x must be >= 2")
    counts = {0: 1}  # n = 2
    half = x // 2
    ps = list(primes_in_class(half, 1, 4, table)) if half >= 5 else []

    def extend(start: int, value: int, m: int) -> None:
        for i in range(start, len(ps)):
            p = ps[i]
            v = value * p
            if v > half:
                break
            while v <= half:
                counts[m + 1] = counts.get(m + 1, 0) + 1
                extend(i + 1, v, m + 1)
                v *= p

    extend(0, 1, 0)
    return dict(sorted(counts.items()))


@dataclass(frozen=True)
class MomentRow:
    k: int
    raw: int
    falling: int
    nondiagonal: int | None
    predicted: float | None
    ratio: float | None


@dataclass(frozen=True)
class MomentReport:
    x: int
    rows: list[MomentRow] = field(default_factory=list)


# Main-term constants for the first three power moments of r2.
_MOMENT_MAIN = {1: math.pi, 2: 2 * math.pi, 3: 4 * math.pi}


def predicted_moment(x: int, k: int) -> float | None:
    """c_k * x / log^2 x for k <= 3; no main-term prediction beyond that."""
    c = _MOMENT_MAIN.get(k)
    if c is None or x < 2:
        return None
    return c * x / math.log(x) ** 2


def moment_report(m: RepMultiplicityMap, k_max: int, nondiagonal: bool = True) -> MomentReport:
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    rows = []
    for k in range(1, k_max + 1):
        raw = raw_moment(m, k)
        fall = falling_sum(m, k)
        nd = nondiagonal_count(m, k) if nondiagonal and k >= 2 else None
        pred = predicted_moment(m.x, k)
        ratio = raw / pred if pred else None
        rows.append(MomentRow(k, raw, fall, nd, pred, ratio))
    return MomentReport(m.x, rows)
