"""Pydantic models for sky-background scenes and daylight reference data."""

from pydantic import BaseModel, ConfigDict, Field


class SkyScene(BaseModel):
    """Receiver geometry and sky brightness for a background-photon budget."""

    model_config = ConfigDict(frozen=True)

    brightness: float = Field(
        ..., gt=0, description="Sky brightness in W m^-2 sr^-1 um^-1"
    )
    fov_half_angle: float = Field(
        ..., gt=0, description="Field-of-view half angle (rad)"
    )
    aperture_area: float = Field(..., gt=0, description="Receiver aperture area in m^2")
    filter_bandwidth: float = Field(..., gt=0, description="Filter bandwidth in um")
    wavelength: float = Field(..., gt=0, description="Wavelength in m")
    gate_time: float = Field(..., ge=0, description="Detector gate time in s")


class SkyCondition(BaseModel):
    """One weather/illumination row of the daylight background table."""

    model_config = ConfigDict(frozen=True)

    name: str
    relative_brightness: float = Field(..., gt=0)
    brightness: float = Field(..., gt=0, description="W m^-2 sr^-1 um^-1")
    expected_photons: float = Field(
        ..., gt=0, description="Tabulated photons per pulse"
    )


class DaylightExperiment(BaseModel):
    """Noise figures of a daylight quantum communication experiment."""

    model_config = ConfigDict(frozen=True)

    name: str
    source_frequency: float = Field(..., gt=0, description="Pulse rate in Hz")
    noise_rate: float = Field(..., ge=0, description="Photon noise in Hz")


# 100 urad half-angle, 0.2 nm filter, 850 nm, 3 ns gate
REFERENCE_FOV_HALF_ANGLE = 100e-6
REFERENCE_FILTER_BANDWIDTH = 0.2e-3
REFERENCE_WAVELENGTH = 850e-9
REFERENCE_GATE_TIME = 3e-9

SKY_CONDITIONS: list[SkyCondition] = [
    SkyCondition(
        name="Cloudy Daytime",
        relative_brightness=1.0,
        brightness=150.0,
        expected_photons=7.4,
    ),
    SkyCondition(
        name="Hazy Daytime",
        relative_brightness=1e-1,
        brightness=15.0,
        expected_photons=7.4e-1,
    ),
    SkyCondition(
        name="Clear Daytime",
        relative_brightness=1e-2,
        brightness=1.5,
        expected_photons=7.4e-2,
    ),
    SkyCondition(
        name="Full Moon Clear Night",
        relative_brightness=1e-5,
        brightness=1.5e-3,
        expected_photons=7.4e-5,
    ),
    SkyCondition(
        name="New Moon Clear Night",
        relative_brightness=1e-6,
        brightness=1.5e-4,
        expected_photons=7.4e-6,
    ),
    SkyCondition(
        name="Moonless Clear Night",
        relative_brightness=1e-7,
        brightness=1.5e-5,
        expected_photons=7.4e-7,
    ),
]

DAYLIGHT_EXPERIMENTS: list[DaylightExperiment] = [
    DaylightExperiment(
        name="OOK testbed (50 kHz)", source_frequency=50e3, noise_rate=1.5e3
    ),
    DaylightExperiment(
        name="Padua 145 m link", source_frequency=50e6, noise_rate=240.0
    ),
    DaylightExperiment(
        name="Daylight free-space QKD", source_frequency=100e6, noise_rate=578e3
    ),
]
