"""
Induced classical channels for Bob and the Helstrom error of Eve.

Bob's OOK receiver thresholds a photon count; his PM receiver compares the
counts of two detectors placed after a polarization rotation. Eve is granted
ideal noiseless detection limited only by the flux she intercepts.
"""

import logging
import math

from qkpc.models.channel import (
    BinaryChannel,
    LinkEnvironment,
    OokParams,
    PmParams,
    TieRule,
)
from qkpc.physics.photon_stats import (
    clamp_probability,
    click_difference_stats,
    poisson_cdf_below,
)

logger = logging.getLogger(__name__)


def ook_correct_pair(
    mean_photons: float, threshold_k: int, env: LinkEnvironment
) -> tuple[float, float]:
    """Return ``(eps00, eps10)`` of the OOK threshold receiver."""
    eps00 = poisson_cdf_below(env.delta, threshold_k)
    eps10 = poisson_cdf_below(env.eta * mean_photons + env.delta, threshold_k)
    return eps00, eps10


def ook_channel(params: OokParams, env: LinkEnvironment) -> BinaryChannel:
    """Binary channel induced by the OOK encoder and a PNR threshold decoder."""
    eps00, eps10 = ook_correct_pair(params.mean_photons, params.threshold_k, env)
    return BinaryChannel.from_correct(eps00, eps10)


def pm_detector_rates(
    mean_photons: float, theta: float, kappa: float, env: LinkEnvironment
) -> tuple[tuple[float, float], tuple[float, float]]:
    """
    Per-detector click rates for inputs 0 and 1 after the measurement rotation.

    Returns:
        ``((lam0, lam1), (lam0_prime, lam1_prime))``
    """
    delta_rot = -theta / 2.0 + math.pi / 4.0
    received = env.eta * mean_photons
    rates_zero = (
        received * math.cos(delta_rot) ** 2 + env.delta,
        received * math.sin(delta_rot) ** 2 + env.delta,
    )
    rates_one = (
        kappa * received * math.cos(theta + delta_rot) ** 2 + env.delta,
        kappa * received * math.sin(theta + delta_rot) ** 2 + env.delta,
    )
    return rates_zero, rates_one


def _output_zero(tail: float, tie: float, tie_rule: TieRule, q0: float) -> float:
    strict = tail - tie
    match tie_rule:
        case TieRule.ALWAYS_ZERO:
            return clamp_probability(tail)
        case TieRule.ALWAYS_ONE:
            return clamp_probability(strict)
        case TieRule.RANDOM:
            return clamp_probability(strict + q0 * tie)


def pm_correct_pair(
    mean_photons: float,
    theta: float,
    kappa: float,
    env: LinkEnvironment,
    tie_rule: TieRule = TieRule.ALWAYS_ONE,
    q0: float = 0.5,
) -> tuple[float, float]:
    """Return ``(eps00, eps10)`` of the majority-click receiver."""
    rates_zero, rates_one = pm_detector_rates(mean_photons, theta, kappa, env)
    tail0, tie0 = click_difference_stats(*rates_zero)
    tail1, tie1 = click_difference_stats(*rates_one)
    return (
        _output_zero(tail0, tie0, tie_rule, q0),
        _output_zero(tail1, tie1, tie_rule, q0),
    )


def pm_channel(params: PmParams, env: LinkEnvironment) -> BinaryChannel:
    """Binary channel induced by the PM encoder and the majority-click decoder."""
    eps00, eps10 = pm_correct_pair(
        params.mean_photons,
        params.theta,
        params.kappa,
        env,
        tie_rule=params.tie_rule,
        q0=params.q0,
    )
    return BinaryChannel.from_correct(eps00, eps10)


def pm_tie_probabilities(params: PmParams, env: LinkEnvironment) -> tuple[float, float]:
    """Probabilities of equal counts on both detectors under inputs 0 and 1."""
    rates_zero, rates_one = pm_detector_rates(
        params.mean_photons, params.theta, params.kappa, env
    )
    return click_difference_stats(*rates_zero)[1], click_difference_stats(*rates_one)[1]


def helstrom_error(exponent: float) -> float:
    """Minimum error for two equiprobable pure states, |overlap|^2 = exp(-exponent)."""
    # 1 - exp(-x) via expm1 keeps precision for tiny exponents
    return 0.5 * (1.0 - math.sqrt(-math.expm1(-exponent)))


def eve_error_ook(
    gamma: float, eta: float, mean_photons: float, include_eta: bool = True
) -> float:
    """Eve's Helstrom error against vacuum vs. a coherent state."""
    eve_flux = gamma * eta if include_eta else gamma
    return helstrom_error(eve_flux * mean_photons)


def eve_error_pm(
    gamma: float,
    eta: float,
    mean_photons: float,
    theta: float,
    kappa: float = 1.0,
    include_eta: bool = True,
) -> float:
    """
    Eve's Helstrom error against two polarized coherent states.

    The squared overlap is ``exp(-g |alpha|^2 (1 + kappa - 2 sqrt(kappa) cos theta))``
    with ``g`` Eve's efficiency; ``kappa = 1`` gives the equal-amplitude case and
    ``kappa = 0`` the OOK case.
    """
    eve_flux = gamma * eta if include_eta else gamma
    separation = 1.0 + kappa - 2.0 * math.sqrt(kappa) * math.cos(theta)
    return helstrom_error(eve_flux * mean_photons * max(separation, 0.0))


def eve_error(params: OokParams | PmParams, env: LinkEnvironment) -> float:
    """Eve's minimum error for the encoder described by ``params``."""
    include_eta = env.eve_includes_receiver_efficiency
    if isinstance(params, OokParams):
        return eve_error_ook(env.gamma, env.eta, params.mean_photons, include_eta)
    return eve_error_pm(
        env.gamma,
        env.eta,
        params.mean_photons,
        params.theta,
        kappa=params.kappa,
        include_eta=include_eta,
    )
