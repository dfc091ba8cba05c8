"""Representation tuples and their sieve-theoretic invariants.

A RepTuple holds k distinct representations (m_i, n_i) of one integer N as
a sum of two squares.  The machinery here evaluates, exactly at desk
scale: the pairwise product R whose prime divisors mark degenerate
reductions, the local densities nu_p with their projective root counts,
the Euler-product singular series, admissibility (no prime covers every
residue), the greedy admissible-subset extraction, and the prime-counting
functions f_k / f_k* over the sieving wedge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import UnsupportedRangeError
from .primes import PrimeTable, factorize, is_prime, largest_prime_factor, shared_table
from .represent import canonical_reps, chi4, r0

# Exhaustive F_p x F_p counting is used (and trusted as the oracle) up to here.
EXHAUSTIVE_NU_LIMIT = 101

CASE_DIVIDES_N = "divides_N"
CASE_GENERIC = "generic"
CASE_DIVIDES_R_ONLY = "divides_R_only"


@dataclass(frozen=True)
class RepTuple:
    """k slots (m_i, n_i) with m_i^2 + n_i^2 = N, pairwise distinct."""

    N: int
    m: tuple[int, ...]
    n: tuple[int, ...]
    coprime: bool = False

    def __post_init__(self):
        if len(self.m) != len(self.n) or not self.m:
            raise ValueError("m and n must be equal-length and non-empty")
        for a, b in zip(self.m, self.n):
            if a * a + b * b != self.N:
                raise ValueError(f"slot ({a}, {b}) does not represent {self.N}")
        if len(set(zip(self.m, self.n))) != len(self.m):
            raise ValueError("tuple slots must be pairwise distinct")
        if self.coprime:
            for a, b in zip(self.m, self.n):
                if math.gcd(a, b) != 1:
                    raise ValueError(f"slot ({a}, {b}) is not coprime")

    @property
    def k(self) -> int:
        return len(self.m)

    @property
    def slots(self) -> tuple[tuple[int, int], ...]:
        return tuple(zip(self.m, self.n))

    def restrict(self, indices) -> "RepTuple":
        idx = sorted(indices)
        if not idx:
            raise ValueError("cannot restrict to an empty index set")
        return RepTuple(self.N, tuple(self.m[i] for i in idx),
                        tuple(self.n[i] for i in idx), self.coprime)


def build_rep_tuple(N: int, k: int, require_coprime: bool = False) -> list[RepTuple]:
    """All k-subsets of the canonical (min, max) representations of N."""
    if N < 1 or k < 1:
        raise ValueError("need N >= 1 and k >= 1")
    reps = canonical_reps(N)
    if require_coprime:
        reps = [(a, b) for a, b in reps if math.gcd(a, b) == 1]
    out = []
    for combo in combinations(reps, k):
        ms = tuple(a for a, _ in combo)
        ns = tuple(b for _, b in combo)
        coprime = all(math.gcd(a, b) == 1 for a, b in combo)
        out.append(RepTuple(N, ms, ns, coprime))
    return out


def signed_rep_count(N: int) -> int:
    """Number of signed ordered pairs (u, v) in Z^2 with u^2 + v^2 = N,
    derived from the canonical representations by symmetry: 8 per pair
    0 < a < b, 4 when a = 0 or a = b."""
    total = 0
    for a, b in canonical_reps(N):
        total += 4 if (a == 0 or a == b) else 8
    return total


def ordered_signed_tuple_count(N: int, k: int) -> int:
    """Ordered k-tuples of distinct signed representations of N.

    Falling factorial of the signed count; equals k! * C(4*r0(N), k).
    """
    s = signed_rep_count(N)
    out = 1
    for i in range(k):
        out *= s - i
    return max(out, 0)


def pair_product(t: RepTuple) -> int:
    """R = product over i < j of (m_i n_j - m_j n_i)(m_i m_j + n_i n_j);
    zero exactly when two slots are projectively degenerate."""
    if t.k < 2:
        raise ValueError("pair product needs k >= 2")
    out = 1
    for i, j in combinations(range(t.k), 2):
        out *= (t.m[i] * t.n[j] - t.m[j] * t.n[i]) * (t.m[i] * t.m[j] + t.n[i] * t.n[j])
    return out


def _pair_factors(t: RepTuple) -> list[int]:
    """The individual pairwise factors of R, each bounded by N in magnitude."""
    out = []
    for i, j in combinations(range(t.k), 2):
        out.append(t.m[i] * t.n[j] - t.m[j] * t.n[i])
        out.append(t.m[i] * t.m[j] + t.n[i] * t.n[j])
    return out


def nu_p_exhaustive(t: RepTuple, p: int) -> int:
    """#{(r, s) in F_p^2 : (r^2+s^2) * prod (m_i r - n_i s)(n_i r + m_i s) = 0},
    counted by evaluating the form on the full p x p grid."""
    if p > EXHAUSTIVE_NU_LIMIT:
        raise ValueError(f"exhaustive count capped at p <= {EXHAUSTIVE_NU_LIMIT}")
    r = np.arange(p, dtype=np.int64)[:, None]
    s = np.arange(p, dtype=np.int64)[None, :]
    acc = (r * r + s * s) % p
    for a, b in t.slots:
        acc = acc * ((a * r - b * s) % p) % p
        acc = acc * ((b * r + a * s) % p) % p
    return int((acc == 0).sum())


def _sqrt_minus_one_mod(p: int) -> int:
    for a in range(2, p):
        if pow(a, (p - 1) // 2, p) == p - 1:
            return pow(a, (p - 1) // 4, p)
    raise ArithmeticError(f"no sqrt(-1) mod {p}")


def _proj_normalize(a: int, b: int, p: int) -> tuple[int, int]:
    a %= p
    b %= p
    if b:
        return (a * pow(b, p - 2, p)) % p, 1
    return 1, 0


def projective_root_count(t: RepTuple, p: int) -> int:
    """Distinct roots of the sieve form in P^1(F_p).

    The quadratic contributes the square roots of -1 (two for p = 1 mod 4,
    one for p = 2, none otherwise); slot i contributes (n_i : m_i) and
    (-m_i : n_i).  Coprimality keeps every slot point well defined.
    """
    pts: set[tuple[int, int]] = set()
    if p == 2:
        pts.add((1, 1))
    elif p % 4 == 1:
        z = _sqrt_minus_one_mod(p)
        pts.add(_proj_normalize(z, 1, p))
        pts.add(_proj_normalize(-z, 1, p))
    for a, b in t.slots:
        pts.add(_proj_normalize(b, a, p))
        pts.add(_proj_normalize(-a, b, p))
    return len(pts)


def nu_p(t: RepTuple, p: int, method: str = "auto") -> int:
    """Local density: exhaustive grid count below the threshold, projective
    root count q_p(p - 1) + 1 above; the two agree wherever both run."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if method == "exhaustive" or (method == "auto" and p <= EXHAUSTIVE_NU_LIMIT):
        return nu_p_exhaustive(t, p)
    if method not in ("auto", "projective"):
        raise ValueError(f"unknown method {method!r}")
    return projective_root_count(t, p) * (p - 1) + 1


@dataclass(frozen=True)
class LocalDensity:
    p: int
    nu_p: int
    q_p: int
    case: str


def classify_qp(t: RepTuple, p: int) -> LocalDensity:
    """q_p with its trichotomy tag: p | N; p generic; p | R only.

    q_p itself comes from the exact projective root count; below the
    exhaustive threshold the grid count is re-derived and must agree.
    """
    if not t.coprime:
        raise ValueError("classify_qp requires a coprime-flagged tuple")
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    q = projective_root_count(t, p)
    nu = q * (p - 1) + 1
    if p <= EXHAUSTIVE_NU_LIMIT:
        grid = nu_p_exhaustive(t, p)
        if grid != nu:
            raise AssertionError(
                f"projective count disagrees with grid at p={p}: {nu} vs {grid}")
    if t.N % p == 0:
        case = CASE_DIVIDES_N
    elif t.k < 2 or all(f % p for f in _pair_factors(t)):
        case = CASE_GENERIC
    else:
        case = CASE_DIVIDES_R_ONLY
    return LocalDensity(p, nu, q, case)


@dataclass(frozen=True)
class SingularSeriesValue:
    value: float
    cutoff_prime: int
    exceptional_primes: tuple[int, ...]
    tail_bound: float


def exceptional_primes(t: RepTuple) -> list[int]:
    """Primes dividing N * R, found by factoring N and each pairwise factor
    of R separately (each factor is at most N in magnitude)."""
    ps = {p for p, _ in factorize(t.N).factors}
    if t.k >= 2:
        for f in _pair_factors(t):
            if f == 0:
                raise ValueError("degenerate tuple: pairwise product vanishes")
            ps.update(p for p, _ in factorize(abs(f)).factors)
    return sorted(ps)


def singular_series(t: RepTuple, cutoff: int) -> SingularSeriesValue:
    """Euler product prod (1 - nu_p/p^2)(1 - 1/p)^-(2k+1).

    Primes dividing N*R get their exact factor.  Generic primes have
    factor (1 - (2k + chi4(p))/p)(1 - 1/p)^-2k; multiplying each by
    (1 - chi4(p)/p)^-1 leaves a residual converging like sum 1/p^2, and
    the removed character product is restored globally through
    L(1, chi4) = pi/4.  The tail bound is the crude (2k+2)^2 / cutoff.
    """
    if not t.coprime:
        raise ValueError("singular_series requires a coprime-flagged tuple")
    k = t.k
    if cutoff < 2 * k + 2:
        raise ValueError(f"cutoff must be >= {2 * k + 2}")
    exc = exceptional_primes(t)
    # small primes join the exactly-evaluated set so the generic closed form
    # (whose factor can vanish when p <= 2k + 1) never goes through logs
    exact = sorted(set(exc) | set(_small_primes(2 * k + 2)))
    log_value = math.log(4 / math.pi)
    for p in exact:
        nu = nu_p(t, p)
        if nu == p * p:
            return SingularSeriesValue(0.0, cutoff, tuple(exc), 0.0)
        factor = (1 - nu / p**2) * (1 - 1 / p) ** -(2 * k + 1) / (1 - chi4(p) / p)
        log_value += math.log(factor)
    ps = shared_table(cutoff).primes()
    ps = ps[ps <= cutoff]
    gen = ps[~np.isin(ps, np.asarray(exact, dtype=np.int64))].astype(np.float64)
    if len(gen):
        chi = np.where(gen % 4 == 1, 1.0, -1.0)
        logs = (np.log1p(-(2 * k + chi) / gen)
                - 2 * k * np.log1p(-1.0 / gen)
                - np.log1p(-chi / gen))
        log_value += math.fsum(np.sort(logs).tolist())
    tail = (2 * k + 2) ** 2 / cutoff
    return SingularSeriesValue(math.exp(log_value), cutoff, tuple(exc), tail)


@dataclass(frozen=True)
class AdmissibilityWitness:
    """Residues a_p, one per prime p <= 2k + 2, avoiding every root."""

    assignments: dict[int, int]

    def check(self, t: RepTuple, convention: str = "definition") -> bool:
        return all(_survives(t, p, a, convention) for p, a in self.assignments.items())


def _survives(t: RepTuple, p: int, a: int, convention: str) -> bool:
    if (a * a + 1) % p == 0:
        return False
    for m, n in t.slots:
        if convention == "definition":
            f1, f2 = m * a - n, n * a + m
        elif convention == "lemma":
            f1, f2 = m * a + n, n * a - m
        else:
            raise ValueError(f"unknown convention {convention!r}")
        if f1 % p == 0 or f2 % p == 0:
            return False
    return True


def _small_primes(bound: int) -> list[int]:
    return [int(p) for p in shared_table(max(bound, 2)).primes() if p <= bound]


def is_admissible(t: RepTuple, convention: str = "definition"
                  ) -> tuple[bool, AdmissibilityWitness | None]:
    """Whether some residue avoids every root at each prime.

    Only p <= 2k + 2 need checking: the avoidance polynomial has degree
    2k + 2, so larger primes always have a free residue.  On success the
    witness lists one residue per checked prime.
    """
    if not t.coprime:
        raise ValueError("is_admissible requires a coprime-flagged tuple")
    found: dict[int, int] = {}
    for p in _small_primes(2 * t.k + 2):
        for a in range(p):
            if _survives(t, p, a, convention):
                found[p] = a
                break
        else:
            return False, None
    return True, AdmissibilityWitness(found)


def admissible_subset(t: RepTuple) -> tuple[tuple[int, ...], AdmissibilityWitness]:
    """Greedy slot elimination yielding an admissible restriction.

    For each prime p <= 2k + 2 in increasing order, pick the residue j
    with p not dividing j^2 + 1 that kills the fewest surviving slots
    (smallest j on ties), and discard those slots.  At most a 2/(p - 1 -
    chi4(p)) fraction dies per prime, so the survivor set is never empty.
    Requires 2 || N so that j = 0 works at p = 2.
    """
    if not t.coprime:
        raise ValueError("admissible_subset requires a coprime-flagged tuple")
    if t.k < 2:
        raise ValueError("admissible_subset requires k >= 2")
    if t.N % 2 != 0 or (t.N // 2) % 2 == 0:
        raise ValueError("admissible_subset requires 2 || N")
    alive = list(range(t.k))
    chosen: dict[int, int] = {}
    for p in _small_primes(2 * t.k + 2):
        best_j, best_kill = None, None
        for j in range(p):
            if (j * j + 1) % p == 0:
                continue
            kill = [i for i in alive
                    if (t.m[i] * j - t.n[i]) % p == 0 or (t.n[i] * j + t.m[i]) % p == 0]
            if best_kill is None or len(kill) < len(best_kill):
                best_j, best_kill = j, kill
        chosen[p] = best_j
        dead = set(best_kill)
        alive = [i for i in alive if i not in dead]
    return tuple(alive), AdmissibilityWitness(chosen)


# ---------------------------------------------------------------------------
# sieving-wedge prime counts
# ---------------------------------------------------------------------------

_QUAD_TABLE_LIMIT = 1 << 25  # primality of r^2+s^2 via table below, Miller-Rabin above


def count_fk(z: int, t: RepTuple, star: bool = False) -> int:
    """#{(r, s) : r, s >= 1, r^2 + s^2 <= z, 0 < m_i r - n_i s < n_i r + m_i s
    for every slot, and r^2 + s^2 and all 2k linear forms prime}.

    With star=True the quadratic value must also be at least the largest
    prime factor of N.
    """
    if z < 2:
        raise ValueError("count_fk expects z >= 2")
    if not t.coprime:
        raise ValueError("count_fk requires a coprime-flagged tuple")
    if z > 10**12:
        raise UnsupportedRangeError("count_fk supports z <= 1e12")
    rmax = math.isqrt(z)
    form_limit = max((m + n) * rmax for m, n in t.slots)
    table = shared_table(max(form_limit, min(z, _QUAD_TABLE_LIMIT), 4))
    bits = table.bits
    floor_pn = largest_prime_factor(t.N) if star else 0
    use_table_for_quad = z <= table.limit
    total = 0
    for r in range(1, rmax + 1):
        smax = math.isqrt(z - r * r)
        if smax < 1:
            continue
        s = np.arange(1, smax + 1, dtype=np.int64)
        mask = np.ones(len(s), dtype=bool)
        forms = []
        for m, n in t.slots:
            a = m * r - n * s
            b = n * r + m * s
            mask &= (a > 0) & (a < b)
            forms.append((a, b))
        if not mask.any():
            continue
        for a, b in forms:
            mask[mask] = bits[a[mask]] & bits[b[mask]]
            if not mask.any():
                break
        if not mask.any():
            continue
        quad = r * r + s[mask] * s[mask]
        if star:
            quad = quad[quad >= floor_pn]
        if use_table_for_quad:
            total += int(bits[quad].sum())
        else:
            total += sum(1 for v in quad.tolist() if is_prime(v))
    return total


def sieve_ratio(z: int, t: RepTuple, cutoff: int = 10**4) -> float:
    """Diagnostic f_k(z) * (log z)^(2k+1) / (S * z); needs a nonzero
    singular series, i.e. an admissible tuple."""
    if z < 3:
        raise ValueError("sieve_ratio needs log z > 1")
    s = singular_series(t, max(cutoff, 2 * t.k + 2))
    if s.value == 0.0:
        raise ZeroDivisionError("singular series vanishes: tuple is not admissible")
    fk = count_fk(z, t)
    return fk * math.log(z) ** (2 * t.k + 1) / (s.value * z)


# ---------------------------------------------------------------------------
# corpus files: one tuple per line, "N k m1 n1 ... mk nk"
# ---------------------------------------------------------------------------


def parse_corpus_line(line: str, lineno: int = 0) -> RepTuple:
    parts = line.split()
    try:
        vals = [int(tok) for tok in parts]
    except ValueError as exc:
        raise ValueError(f"line {lineno}: non-integer token ({exc})") from None
    if len(vals) < 4:
        raise ValueError(f"line {lineno}: expected 'N k m1 n1 ...', got {len(vals)} tokens")
    N, k = vals[0], vals[1]
    if len(vals) != 2 + 2 * k:
        raise ValueError(f"line {lineno}: k={k} needs {2 + 2 * k} tokens, got {len(vals)}")
    ms = tuple(vals[2 + 2 * i] for i in range(k))
    ns = tuple(vals[3 + 2 * i] for i in range(k))
    try:
        coprime = all(math.gcd(a, b) == 1 for a, b in zip(ms, ns))
        return RepTuple(N, ms, ns, coprime)
    except ValueError as exc:
        raise ValueError(f"line {lineno}: {exc}") from None


def read_corpus(path) -> list[RepTuple]:
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            out.append(parse_corpus_line(line, lineno))
    return out


def write_corpus(path, tuples: list[RepTuple]) -> None:
    with open(path, "w") as fh:
        for t in tuples:
            flat = " ".join(f"{m} {n}" for m, n in t.slots)
            fh.write(f"{t.N} {t.k} {flat}\n")


def coprime_rep_index(nmax: int) -> dict[int, list[tuple[int, int]]]:
    """N -> coprime canonical representations, for all N <= nmax."""
    index: dict[int, list[tuple[int, int]]] = {}
    a = 0
    while a * a <= nmax:
        bmax = math.isqrt(nmax - a * a)
        for b in range(max(a, 1), bmax + 1):
            if math.gcd(a, b) == 1:
                index.setdefault(a * a + b * b, []).append((a, b))
        a += 1
    return index


def sample_corpus(count: int, seed: int, nmax: int = 10**5,
                  k_choices: tuple[int, ...] = (2, 3)) -> list[RepTuple]:
    """Seeded random coprime tuples drawn from N <= nmax with r0(N) >= 3
    and at least two coprime representations."""
    import random

    from .represent import r0_counts

    rng = random.Random(seed)
    index = coprime_rep_index(nmax)
    r0v = r0_counts(nmax)
    candidates = sorted(N for N, reps in index.items()
                        if len(reps) >= 2 and r0v[N] >= 3)
    if not candidates:
        raise ValueError("no candidate integers below nmax")
    out = []
    while len(out) < count:
        N = rng.choice(candidates)
        reps = index[N]
        ks = [k for k in k_choices if k <= len(reps)]
        k = rng.choice(ks) if ks else 2
        combo = rng.sample(reps, k)
        combo.sort()
        ms = tuple(a for a, _ in combo)
        ns = tuple(b for _, b in combo)
        out.append(RepTuple(N, ms, ns, True))
    return out
