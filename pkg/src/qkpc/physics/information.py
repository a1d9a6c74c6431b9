"""Mutual information of the induced channels, including the erasure (USD) receiver."""

import logging
import math

import numpy as np
from scipy.special import entr

from qkpc.exceptions import DomainError
from qkpc.models.channel import BinaryChannel
from qkpc.physics.photon_stats import PROBABILITY_TOLERANCE, binary_entropy

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)


def channel_mutual_information(q0: float, rows: np.ndarray) -> float:
    """
    I(X;Y) in bits for a binary-input channel with transition ``rows`` (2 x J).

    Row ``x`` holds P(y | x) over the J outputs.
    """
    rows = np.asarray(rows, dtype=np.float64)
    prior = np.array([q0, 1.0 - q0])
    output = prior @ rows
    conditional = float(prior @ entr(rows).sum(axis=1))
    value = (float(entr(output).sum()) - conditional) / LN2
    return max(value, 0.0)


def mutual_info_bob(ch: BinaryChannel, q0: float = 0.5) -> float:
    """
    Bob's mutual information for input prior ``q0``.

    At ``q0 = 1/2`` this is h_b((eps00 + eps10)/2) - (h_b(eps00) + h_b(eps10))/2.
    """
    output_zero = q0 * ch.eps00 + (1.0 - q0) * ch.eps10
    value = binary_entropy(output_zero) - (
        q0 * binary_entropy(ch.eps00) + (1.0 - q0) * binary_entropy(ch.eps10)
    )
    return max(value, 0.0)


def mutual_info_eve(eps_gamma: float) -> float:
    """
    Capacity of Eve's binary symmetric channel with crossover ``eps_gamma``.

    Raises:
        DomainError: If ``eps_gamma`` exceeds 1/2
    """
    if eps_gamma > 0.5 + PROBABILITY_TOLERANCE:
        raise DomainError(f"Helstrom error never exceeds 1/2, got {eps_gamma}")
    return 1.0 - binary_entropy(eps_gamma)


def usd_inconclusive_probability(
    eta: float, mean_photons: float, theta: float
) -> float:
    """Erasure probability of unambiguous discrimination between the PM states."""
    if not 0.0 <= theta <= math.pi:
        raise DomainError(f"theta must lie in [0, pi], got {theta}")
    return math.exp(-eta * mean_photons * (1.0 - math.cos(theta)))


def usd_channel_rows(
    eta: float, mean_photons: float, theta: float, delta: float
) -> np.ndarray:
    """
    Transition rows over outputs (0, 1, erasure) of a noisy USD receiver.

    Each detector sits behind a displacement that nulls one of the two states;
    a click on exactly one detector is conclusive, no click or two clicks is an
    erasure. Both detectors see ``delta`` noise clicks per pulse.
    """
    signal_dark = usd_inconclusive_probability(eta, mean_photons, theta)
    noise_dark = math.exp(-delta)
    # silent probability of the detector that receives the signal
    lit_dark = signal_dark * noise_dark
    right = (1.0 - lit_dark) * noise_dark
    wrong = lit_dark * (1.0 - noise_dark)
    erasure = 1.0 - right - wrong
    return np.array([[right, wrong, erasure], [wrong, right, erasure]])


def usd_bob_info(
    eta: float, mean_photons: float, theta: float, delta: float = 0.0
) -> float:
    """
    Bob's information with unambiguous state discrimination.

    Without noise this is the erasure-channel capacity ``1 - p_inconclusive``;
    with noise the ternary channel from :func:`usd_channel_rows` is used.
    """
    if delta == 0.0:
        return 1.0 - usd_inconclusive_probability(eta, mean_photons, theta)
    return channel_mutual_information(
        0.5, usd_channel_rows(eta, mean_photons, theta, delta)
    )


def eve_usd_info(eve_efficiency: float, mean_photons: float, theta: float) -> float:
    """Eve's information if she opts for unambiguous discrimination herself."""
    return 1.0 - usd_inconclusive_probability(eve_efficiency, mean_photons, theta)
