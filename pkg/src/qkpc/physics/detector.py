"""
Photon-number resolution from a time-multiplexed threshold detector.

A long pulse is cut into N dead-time intervals; each interval reports click or
no-click, so the count of clicked intervals is Binomial(N, 1 - exp(-|alpha|^2/N)).
Photons sharing an interval are lost.
"""

import logging
import math

import numpy as np
from scipy.stats import binom

from qkpc.exceptions import DomainError
from qkpc.models.detector import CountingMode, DetectorModel
from qkpc.physics.photon_stats import (
    check_rate,
    clamp_probability,
    poisson_pmf,
    poisson_pmf_vector,
    truncation_index,
)

logger = logging.getLogger(__name__)

SAMPLING_CHUNK = 65_536


def _check_intervals(n: int) -> int:
    if n < 1:
        raise DomainError(f"interval count must be positive, got {n}")
    return int(n)


def interval_click_prob(mean_photons: float, n: int) -> float:
    """Probability that a single interval registers a click."""
    mean_photons = check_rate(mean_photons, "mean_photons")
    n = _check_intervals(n)
    return -math.expm1(-mean_photons / n)


def pnr_count_pmf(mean_photons: float, n: int, k: int) -> float:
    """Probability of ``k`` clicked intervals out of ``n``; zero for ``k > n``."""
    if k < 0:
        raise DomainError(f"k must be non-negative, got {k}")
    if k > n:
        return 0.0
    p = interval_click_prob(mean_photons, n)
    return clamp_probability(binom.pmf(k, n, p))


def pnr_count_pmf_vector(mean_photons: float, n: int) -> np.ndarray:
    """Binomial click-count pmf over 0..n."""
    p = interval_click_prob(mean_photons, n)
    return binom.pmf(np.arange(n + 1), n, p)


def expected_lost_photons(mean_photons: float, n: int) -> float:
    """Mean number of photons that share an interval with an earlier one."""
    p = interval_click_prob(mean_photons, n)
    return max(mean_photons - n * p, 0.0)


def expected_lost_photons_truncated(
    mean_photons: float, n: int, max_lost: int = 3
) -> float:
    """
    Lost-photon estimate keeping only events with at most ``max_lost`` losses.

    Each interval loses ``max(c - 1, 0)`` photons with ``c ~ Poisson(|alpha|^2/N)``;
    the total is the N-fold convolution of that per-interval law.
    """
    n = _check_intervals(n)
    per_interval_mean = check_rate(mean_photons, "mean_photons") / n
    single = np.array(
        [poisson_pmf(per_interval_mean, j + 1) for j in range(max_lost + 1)]
    )
    single[0] = math.exp(-per_interval_mean) * (1.0 + per_interval_mean)
    total = np.zeros(max_lost + 1)
    total[0] = 1.0
    for _ in range(n):
        total = np.convolve(total, single)[: max_lost + 1]
    return float(np.dot(np.arange(max_lost + 1), total))


def binomial_poisson_distance(
    mean_photons: float, n: int, matched_mean: bool = False
) -> float:
    """
    Total-variation distance between the interval count law and a Poisson law.

    The reference Poisson has mean ``|alpha|^2``, or the binomial mean
    ``N p`` when ``matched_mean`` is set.
    """
    p = interval_click_prob(mean_photons, n)
    reference_mean = n * p if matched_mean else mean_photons
    size = max(n, truncation_index(reference_mean)) + 1
    binomial = np.zeros(size)
    binomial[: n + 1] = pnr_count_pmf_vector(mean_photons, n)
    poisson = poisson_pmf_vector(reference_mean, size - 1)
    return 0.5 * float(np.abs(binomial - poisson).sum())


def _dead_time_clicks(
    rng: np.random.Generator, counts: np.ndarray, model: DetectorModel
) -> np.ndarray:
    clicks = np.minimum(counts, 1)
    crowded = np.flatnonzero(counts > 1)
    for start in range(0, crowded.size, SAMPLING_CHUNK):
        rows = crowded[start : start + SAMPLING_CHUNK]
        row_counts = counts[rows]
        width = int(row_counts.max())
        times = rng.uniform(0.0, model.pulse_width, size=(rows.size, width))
        times[np.arange(width)[None, :] >= row_counts[:, None]] = np.inf
        times.sort(axis=1)
        last_click = times[:, 0].copy()
        registered = np.ones(rows.size, dtype=np.int64)
        for j in range(1, width):
            arrival = times[:, j]
            live = np.isfinite(arrival) & (arrival - last_click >= model.dead_time)
            last_click = np.where(live, arrival, last_click)
            registered += live
        clicks[rows] = registered
    return clicks


def sample_pulse_clicks(
    rng: np.random.Generator,
    model: DetectorModel,
    arrival_rate: float | np.ndarray,
    size: int | None = None,
) -> int | np.ndarray:
    """
    Draw registered click counts for pulses with the given mean arrivals.

    ``arrival_rate`` already folds signal, background and dark counts into a
    per-pulse mean. The caller owns ``rng``; identical generator state gives
    identical draws.
    """
    rates = np.asarray(arrival_rate, dtype=np.float64)
    if np.any(rates < 0) or not np.all(np.isfinite(rates)):
        raise DomainError("arrival rates must be finite and non-negative")
    match model.counting:
        case CountingMode.IDEAL:
            clicks = rng.poisson(rates, size=size)
        case CountingMode.INTERVAL:
            n = model.intervals_n
            clicks = rng.binomial(n, -np.expm1(-rates / n), size=size)
        case CountingMode.DEAD_TIME:
            counts = np.atleast_1d(rng.poisson(rates, size=size))
            clicks = _dead_time_clicks(rng, counts, model)
            if size is None and rates.ndim == 0:
                clicks = clicks[0]
    if np.ndim(clicks) == 0:
        return int(clicks)
    return clicks


def simulate_lost_photons(
    rng: np.random.Generator, mean_photons: float, n: int, trials: int
) -> float:
    """
    Monte Carlo mean of photons lost to bin collisions.

    Each trial draws a Poisson photon number, drops every photon into a
    uniformly chosen interval and counts photons beyond the first per interval.
    """
    mean_photons = check_rate(mean_photons, "mean_photons")
    n = _check_intervals(n)
    photons = rng.poisson(mean_photons, size=trials)
    total = int(photons.sum())
    if total == 0:
        return 0.0
    trial_of_photon = np.repeat(np.arange(trials, dtype=np.int64), photons)
    bins = rng.integers(0, n, size=total, dtype=np.int64)
    occupied = np.unique(trial_of_photon * n + bins).size
    return (total - occupied) / trials
