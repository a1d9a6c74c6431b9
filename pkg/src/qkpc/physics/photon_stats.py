"""
Photon-counting distributions and entropy primitives.

All infinite Poisson sums are truncated at index
``ceil(lam_max + 12 * sqrt(lam_max) + 30)``, which leaves a tail below 1e-12
for every rate used in the capacity optimisation. Terms are evaluated in log
space once a rate exceeds 50 or an index exceeds 100.
"""

import logging
import math

import numpy as np
from scipy.special import entr, gammaln, logsumexp

from qkpc.exceptions import ConsistencyError, DomainError

logger = logging.getLogger(__name__)

PROBABILITY_TOLERANCE = 1e-12
LOG_SPACE_RATE = 50.0
LOG_SPACE_INDEX = 100


def check_rate(value: float, name: str = "lambda") -> float:
    """Validate a Poisson mean and return it as a float."""
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise DomainError(f"{name} must be finite and non-negative, got {value}")
    return value


def clamp_probability(value: float) -> float:
    """
    Clamp a computed probability into [0, 1].

    Raises:
        ConsistencyError: If the value is off by more than PROBABILITY_TOLERANCE
    """
    value = float(value)
    if not (-PROBABILITY_TOLERANCE <= value <= 1.0 + PROBABILITY_TOLERANCE):
        raise ConsistencyError(f"Probability {value!r} outside [0, 1]")
    return min(max(value, 0.0), 1.0)


def truncation_index(*rates: float) -> int:
    """Last index kept in a truncated Poisson series over the given rates."""
    lam_max = max(rates, default=0.0)
    return math.ceil(lam_max + 12.0 * math.sqrt(lam_max) + 30.0)


def poisson_pmf_vector(lam: float, n_max: int) -> np.ndarray:
    """Poisson pmf evaluated at 0..n_max inclusive."""
    lam = check_rate(lam)
    n = np.arange(n_max + 1, dtype=np.float64)
    if lam == 0.0:
        pmf = np.zeros(n_max + 1)
        pmf[0] = 1.0
        return pmf
    if lam > LOG_SPACE_RATE or n_max > LOG_SPACE_INDEX:
        return np.exp(n * math.log(lam) - lam - gammaln(n + 1.0))
    return math.exp(-lam) * np.cumprod(np.concatenate(([1.0], lam / n[1:])))


def poisson_pmf(lam: float, n: int) -> float:
    """
    Probability of exactly ``n`` events for a Poisson variable of mean ``lam``.

    Raises:
        DomainError: If ``lam`` is negative/non-finite or ``n`` is negative
    """
    lam = check_rate(lam)
    if n < 0:
        raise DomainError(f"n must be non-negative, got {n}")
    if lam == 0.0:
        return 1.0 if n == 0 else 0.0
    if lam > LOG_SPACE_RATE or n > LOG_SPACE_INDEX:
        value = math.exp(n * math.log(lam) - lam - math.lgamma(n + 1))
    else:
        value = math.exp(-lam) * lam**n / math.factorial(n)
    return clamp_probability(value)


def poisson_cdf_below(lam: float, k: int) -> float:
    """
    Probability that a Poisson variable of mean ``lam`` is strictly below ``k``.

    ``k <= 0`` is the empty sum and returns 0.
    """
    lam = check_rate(lam)
    if k <= 0:
        return 0.0
    n_max = min(k - 1, truncation_index(lam))
    if n_max < k - 1:
        # Remaining mass beyond the truncation index is below tolerance.
        return 1.0
    if lam > LOG_SPACE_RATE:
        n = np.arange(n_max + 1, dtype=np.float64)
        log_terms = n * math.log(lam) - lam - gammaln(n + 1.0)
        return clamp_probability(math.exp(logsumexp(log_terms)))
    return clamp_probability(poisson_pmf_vector(lam, n_max).sum())


def _difference_vectors(lam0: float, lam1: float) -> tuple[np.ndarray, np.ndarray]:
    lam0 = check_rate(lam0, "lambda0")
    lam1 = check_rate(lam1, "lambda1")
    n_max = truncation_index(lam0, lam1)
    return poisson_pmf_vector(lam0, n_max), poisson_pmf_vector(lam1, n_max)


def click_difference_pmf(lam0: float, lam1: float, m: int) -> float:
    """
    Skellam probability P(X0 - X1 = m) for independent Poisson counts.

    Evaluated as the truncated series ``sum_l p0(l + m) p1(l)``.
    """
    p0, p1 = _difference_vectors(lam0, lam1)
    size = p0.size
    if abs(m) >= size:
        return 0.0
    if m >= 0:
        value = np.dot(p0[m:], p1[: size - m])
    else:
        value = np.dot(p0[: size + m], p1[-m:])
    return clamp_probability(value)


def click_difference_stats(lam0: float, lam1: float) -> tuple[float, float]:
    """
    Return ``(P(X0 - X1 >= 0), P(X0 - X1 = 0))`` from one pair of pmf vectors.

    The tail is the double series summed over the second detector's count,
    with the inner sum over the first detector taken as a reversed cumulative
    sum.
    """
    p0, p1 = _difference_vectors(lam0, lam1)
    survival0 = np.cumsum(p0[::-1])[::-1]
    tail = np.dot(p1, survival0)
    tie = np.dot(p0, p1)
    return clamp_probability(tail), clamp_probability(tie)


def click_difference_tail(lam0: float, lam1: float) -> float:
    """Probability that the first detector registers at least as many clicks."""
    return click_difference_stats(lam0, lam1)[0]


def binary_entropy(p: float) -> float:
    """
    Binary entropy in bits, with h_b(0) = h_b(1) = 0.

    Raises:
        DomainError: If ``p`` lies outside [0, 1] beyond tolerance
    """
    p = float(p)
    if not (-PROBABILITY_TOLERANCE <= p <= 1.0 + PROBABILITY_TOLERANCE):
        raise DomainError(f"p must lie in [0, 1], got {p}")
    p = min(max(p, 0.0), 1.0)
    return float((entr(p) + entr(1.0 - p)) / math.log(2.0))
