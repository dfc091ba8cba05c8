"""Numerical evaluation of the heuristic constants and predictors.

The closed-form constants come straight from their defining expressions.
The Euler-product constant c_lambda is evaluated over the first N primes
with character-paired acceleration: each local factor behaves like
1 + chi4(p) * lambda / p, so multiplying by (1 - chi4(p)/p)^lambda and
restoring L(1, chi4)^lambda = (pi/4)^lambda globally leaves a residual
product that converges absolutely like sum 1/p^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .primes import build_prime_table

LAMBDA = 2.0 / math.log(2.0)
DELTA = 1.0 - (1.0 + math.log(math.log(2.0))) / math.log(2.0)
TAU = math.log(1.0 / math.log(2.0)) / math.log(2.0)

DEFAULT_PRIME_CUTOFF = 10**6   # count of primes in the reference evaluation
DEFAULT_HALFWIDTH = 64
_TERM_FLOOR = 1e-30            # relative size below which lattice terms are dropped


def closed_form_constants() -> tuple[float, float, float]:
    """(lambda, delta, tau) at working precision."""
    return LAMBDA, DELTA, TAU


@dataclass(frozen=True)
class HeuristicConstants:
    lam: float
    delta: float
    tau: float
    c_lambda: float
    rho: float
    kappa_tilde: float
    prime_cutoff: int
    acceleration: str
    sensitivity: float

    def as_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "delta": self.delta,
            "tau": self.tau,
            "c_lambda": self.c_lambda,
            "rho": self.rho,
            "kappa_tilde": self.kappa_tilde,
            "prime_cutoff": self.prime_cutoff,
            "acceleration": self.acceleration,
            "sensitivity": self.sensitivity,
        }


def _first_primes(count: int) -> np.ndarray:
    # Rosser-style upper bound on the count-th prime, padded
    n = max(count, 6)
    bound = int(n * (math.log(n) + math.log(math.log(n)))) + 10
    while True:
        ps = build_prime_table(bound).primes()
        if len(ps) >= count:
            return ps[:count]
        bound = int(bound * 1.3) + 100


def _log_c_lambda(primes: np.ndarray) -> float:
    p = primes.astype(np.float64)
    p1 = p[p % 4 == 1]
    p3 = p[p % 4 == 3]
    logs = np.concatenate([
        np.log1p(2 * LAMBDA / (p1 - 1)) + 2 * LAMBDA * np.log1p(-1.0 / p1),
        LAMBDA * np.log1p(-1.0 / (p3 * p3)),
    ])
    residual = math.fsum(np.sort(logs).tolist())
    prefactor = math.log(3.0) - (LAMBDA + 2) * math.log(2.0) - math.lgamma(LAMBDA + 1)
    return prefactor + LAMBDA * math.log(math.pi / 4.0) + residual


def euler_c_lambda(prime_cutoff: int = DEFAULT_PRIME_CUTOFF) -> HeuristicConstants:
    """Evaluate c_lambda over the first `prime_cutoff` primes and derive
    rho = 8 c_lambda and kappa_tilde = c_lambda * sqrt((2 lambda)^3 / pi).

    The reported sensitivity is the relative change against the half-size
    truncation.
    """
    if prime_cutoff < 10**3:
        raise ValueError("prime_cutoff must be at least 1000 primes")
    primes = _first_primes(prime_cutoff)
    c = math.exp(_log_c_lambda(primes))
    c_half = math.exp(_log_c_lambda(primes[: prime_cutoff // 2]))
    sensitivity = abs(c - c_half) / c
    return HeuristicConstants(
        lam=LAMBDA,
        delta=DELTA,
        tau=TAU,
        c_lambda=c,
        rho=8.0 * c,
        kappa_tilde=c * math.sqrt((2 * LAMBDA) ** 3 / math.pi),
        prime_cutoff=prime_cutoff,
        acceleration="character-paired, L(1,chi4)^lambda compensator",
        sensitivity=sensitivity,
    )


# ---------------------------------------------------------------------------
# the doubling-lattice sum f_R and the periodic mass-function profile phi_r
# ---------------------------------------------------------------------------


def _lattice_terms(R: float, beta: float, halfwidth: int, center: int) -> list[float]:
    if beta <= 0:
        raise ValueError("beta must be positive")
    if halfwidth < 1:
        raise ValueError("halfwidth must be >= 1")
    terms = []
    peak = 0.0
    for k in range(center - halfwidth, center + halfwidth + 1):
        # beta * 2^k by exponent shift: windows for beta and 2*beta shifted by
        # one index produce bitwise-identical u, hence identical terms
        u = math.ldexp(beta, k)
        if u == 0.0 or math.isinf(u):
            continue
        expo = R * math.log(u) - u
        if expo < -745.0:
            continue
        t = math.exp(expo)
        peak = max(peak, t)
        terms.append(t)
    if peak > 0.0:
        terms = [t for t in terms if t >= peak * _TERM_FLOOR]
    return terms


def f_R(R: float, beta: float, halfwidth: int = DEFAULT_HALFWIDTH, center: int = 0) -> float:
    """Truncated bilateral sum over k in [center - halfwidth, center + halfwidth]
    of (2^k beta)^R exp(-2^k beta), rounded once via exact summation.

    The window can be recentered so that f_R(beta) and f_R(2 beta) sum the
    identical multiset of terms (index shift k -> k - 1), making the
    doubling invariance exact in floating point.
    """
    return math.fsum(_lattice_terms(R, beta, halfwidth, center))


def f_R_remainder(R: float, beta: float, halfwidth: int = DEFAULT_HALFWIDTH,
                  center: int = 0) -> float:
    """Bound on the omitted bilateral tail.

    The right tail is controlled by the super-exponential decay of
    exp(-2^k beta); the left tail is geometric with ratio 2^-R and is
    infinite for R <= 0 (the terms tend to 1), in which case inf is
    returned and only the truncated value is meaningful.
    """
    if R <= 0:
        return math.inf

    def _term(k: int) -> float:
        u = math.ldexp(beta, k)
        expo = R * math.log(u) - u
        if expo > 700.0:
            return math.inf
        return math.exp(expo) if expo > -745.0 else 0.0

    u_hi = math.ldexp(beta, center + halfwidth + 1)
    ratio_hi = (2.0**R) * math.exp(-u_hi) if R < 1000 else math.inf
    right = _term(center + halfwidth + 1) / (1 - ratio_hi) if ratio_hi < 1 else math.inf
    u_lo = math.ldexp(beta, center - halfwidth - 1)
    left = (u_lo**R if R * abs(math.log(u_lo)) < 700 else math.inf) / (1 - 2.0**-R)
    return right + left


@dataclass(frozen=True)
class PhiEvaluation:
    r: int
    t: float
    value: float
    truncation_halfwidth: int
    truncation_error: float


def phi_r(r: int, t: float, halfwidth: int = DEFAULT_HALFWIDTH,
          kappa_tilde: float | None = None) -> PhiEvaluation:
    """The 1-periodic profile phi_r(t) = kappa/r! * f_(r-2-tau)(2^(1-t)).

    Defined for r >= 3, where the lattice exponent r - 2 - tau is positive
    and the bilateral sum converges.
    """
    if r < 3:
        raise ValueError("phi_r is defined for r >= 3")
    if kappa_tilde is None:
        kappa_tilde = _default_kappa()
    beta = 2.0 ** (1.0 - t)
    scale = kappa_tilde / math.factorial(r)
    value = scale * f_R(r - 2 - TAU, beta, halfwidth)
    err = scale * f_R_remainder(r - 2 - TAU, beta, halfwidth)
    return PhiEvaluation(r, t, value, halfwidth, err)


_kappa_cache: float | None = None
_rho_cache: float | None = None
_FAST_CUTOFF = 10**4  # prediction-grade truncation; the constant is stable to ~1e-4 here


def _default_kappa() -> float:
    global _kappa_cache, _rho_cache
    if _kappa_cache is None:
        c = euler_c_lambda(_FAST_CUTOFF)
        _kappa_cache, _rho_cache = c.kappa_tilde, c.rho
    return _kappa_cache


def _default_rho() -> float:
    _default_kappa()
    return _rho_cache


# ---------------------------------------------------------------------------
# conjectured predictors
# ---------------------------------------------------------------------------

QUANTITIES = ("N1", "N2", "Nr", "Sk_order", "moment_k_exponent")


def moment_exponent(k: int) -> int:
    """Log-power exponent 2^(k-1) - 2k - 1 of the k-th moment's growth."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return 2 ** (k - 1) - 2 * k - 1


def predict(quantity: str, x: int | None = None, r: int | None = None,
            k: int | None = None, constants: HeuristicConstants | None = None,
            halfwidth: int = DEFAULT_HALFWIDTH) -> float | int:
    """Evaluate one of the conjectured asymptotic predictors.

    N1 -> (pi/2) x / log^2 x;  N2 -> rho x / log^3 x;
    Nr -> phi_r(2 loglog x / log 2) * x / ((log x)^(3+2 delta) sqrt(loglog x));
    Sk_order -> x (log x)^(2^(k-1) - 2k - 1);  moment_k_exponent -> that exponent.
    """
    if quantity == "moment_k_exponent":
        if k is None:
            raise ValueError("moment_k_exponent needs k")
        return moment_exponent(k)
    if quantity == "Sk_order":
        if x is None or k is None:
            raise ValueError("Sk_order needs x and k")
        if x < 16:
            raise ValueError("asymptotic predictors need x >= 16")
        return x * math.log(x) ** moment_exponent(k)
    if x is None or x < 16:
        raise ValueError("asymptotic predictors need x >= 16")
    L = math.log(x)
    if quantity == "N1":
        return (math.pi / 2) * x / L**2
    if quantity == "N2":
        rho = constants.rho if constants is not None else _default_rho()
        return rho * x / L**3
    if quantity == "Nr":
        if r is None or r < 3:
            raise ValueError("Nr needs r >= 3")
        kappa = constants.kappa_tilde if constants is not None else None
        ll = math.log(L)
        t = 2.0 * ll / math.log(2.0)
        pe = phi_r(r, t, halfwidth, kappa)
        return pe.value * x / (L ** (3 + 2 * DELTA) * math.sqrt(ll))
    raise ValueError(f"unknown quantity {quantity!r}; expected one of {QUANTITIES}")
