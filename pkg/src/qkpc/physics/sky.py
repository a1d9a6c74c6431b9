"""Background photons collected from a bright sky."""

import logging
import math

from scipy.constants import c as SPEED_OF_LIGHT
from scipy.constants import h as PLANCK

from qkpc.models.sky import (
    REFERENCE_FILTER_BANDWIDTH,
    REFERENCE_FOV_HALF_ANGLE,
    REFERENCE_GATE_TIME,
    REFERENCE_WAVELENGTH,
    SKY_CONDITIONS,
    SkyCondition,
    SkyScene,
)

logger = logging.getLogger(__name__)


def fov_solid_angle(half_angle: float, exact: bool = False) -> float:
    """Solid angle of a circular field of view; ``pi theta^2`` unless ``exact``."""
    if exact:
        return 4.0 * math.pi * math.sin(half_angle / 2.0) ** 2
    return math.pi * half_angle**2


def background_power(scene: SkyScene) -> float:
    """Background power in W: brightness x solid angle x aperture x bandwidth."""
    return (
        scene.brightness
        * fov_solid_angle(scene.fov_half_angle)
        * scene.aperture_area
        * scene.filter_bandwidth
    )


def photon_energy(wavelength: float) -> float:
    """Photon energy in J."""
    return PLANCK * SPEED_OF_LIGHT / wavelength


def photons_per_pulse(scene: SkyScene) -> float:
    """Mean background photons collected during one gate."""
    return background_power(scene) * scene.gate_time / photon_energy(scene.wavelength)


def reference_aperture(reference: SkyCondition = SKY_CONDITIONS[0]) -> float:
    """
    Aperture area (m^2) implied by a tabulated row.

    The table does not state the aperture; it is inferred by inverting the
    photon budget of the reference row (the cloudy-day row by default).
    """
    unit_scene = reference_scene(reference, aperture_area=1.0)
    aperture = reference.expected_photons / photons_per_pulse(unit_scene)
    logger.debug(f"Inferred table aperture {aperture:.6g} m^2 from '{reference.name}'")
    return aperture


def reference_scene(
    condition: SkyCondition, aperture_area: float | None = None
) -> SkyScene:
    """Scene for one table row, using the inferred aperture unless given."""
    if aperture_area is None:
        aperture_area = reference_aperture()
    return SkyScene(
        brightness=condition.brightness,
        fov_half_angle=REFERENCE_FOV_HALF_ANGLE,
        aperture_area=aperture_area,
        filter_bandwidth=REFERENCE_FILTER_BANDWIDTH,
        wavelength=REFERENCE_WAVELENGTH,
        gate_time=REFERENCE_GATE_TIME,
    )


def noise_per_pulse(noise_rate: float, source_frequency: float) -> float:
    """Noise clicks per pulse from a noise rate (Hz) at a given pulse rate (Hz)."""
    return noise_rate / source_frequency
