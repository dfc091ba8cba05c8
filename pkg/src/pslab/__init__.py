"""pslab: a computational laboratory for sums of two prime squares.

Exact desk-scale evaluation of the representation counts r0, r1, r2, R2,
bulk prime-pair sweeps with moment and mass-function statistics, the
local-density / singular-series machinery for representation tuples, and
numerical values for the heuristic constants and predictors.
"""

__version__ = "0.1.0"

from .errors import (CacheFormatError, NoRepresentationError, ResourceLimitError,
                     UnsupportedRangeError)
from .heuristics import (HeuristicConstants, PhiEvaluation, closed_form_constants,
                         euler_c_lambda, f_R, f_R_remainder, moment_exponent, phi_r,
                         predict)
from .primes import (Factorization, PrimeTable, build_prime_table, factorize,
                     is_prime, largest_prime_factor, primes_in_class)
from .represent import (RepProfile, canonical_reps, chi4, enumerate_reps, in_class_M,
                        omega_star, r0, r0_counts, r1, r2, R2, rep_profile,
                        represent_prime)
from .sweep import (MassFunctionTable, MomentReport, RepMultiplicityMap, SweepConfig,
                    count_M_by_omega, falling_sum, mass_function, moment_report,
                    nondiagonal_count, raw_moment, stirling_convert, sweep_prime_pairs)
from .tuples import (AdmissibilityWitness, LocalDensity, RepTuple, SingularSeriesValue,
                     admissible_subset, build_rep_tuple, classify_qp, count_fk,
                     is_admissible, nu_p, ordered_signed_tuple_count, pair_product,
                     read_corpus, sample_corpus, sieve_ratio, singular_series,
                     write_corpus)

__all__ = [name for name in dir() if not name.startswith("_")]
