"""Pydantic models for Monte Carlo transmission runs and QBER curves."""

from enum import StrEnum

from pydantic import BaseModel, ConfigDict, Field, model_validator

from qkpc.models.channel import BinaryChannel, LinkEnvironment, OokParams, PmParams
from qkpc.models.detector import DEFAULT_DETECTOR, DetectorModel

MAX_SEED = 2**64 - 1


class Encoding(StrEnum):
    """Physical encodings the transmission simulator can run."""

    OOK = "ook"
    PM = "pm"


class TransmissionConfig(BaseModel):
    """Inputs of one simulated transmission campaign."""

    model_config = ConfigDict(frozen=True)

    encoding: Encoding
    params: OokParams | PmParams
    env: LinkEnvironment
    detector: DetectorModel = Field(DEFAULT_DETECTOR, description="Counting model")
    n_pulses: int = Field(500_000, ge=1, description="Pulses per repetition")
    repetitions: int = Field(10, ge=1, description="Independent repetitions")
    seed: int = Field(0, ge=0, le=MAX_SEED, description="Master seed")
    message: str | None = Field(
        None,
        min_length=1,
        description="Send the UTF-8 bits of this text (cycled) instead of random bits",
    )

    @model_validator(mode="after")
    def _params_match_encoding(self) -> "TransmissionConfig":
        expected = OokParams if self.encoding is Encoding.OOK else PmParams
        if not isinstance(self.params, expected):
            raise ValueError(
                f"encoding '{self.encoding}' needs {expected.__name__}, "
                f"got {type(self.params).__name__}"
            )
        return self


class TransmissionReport(BaseModel):
    """Aggregated QBER statistics of a transmission campaign."""

    model_config = ConfigDict(frozen=True)

    qber_mean: float = Field(..., ge=0, le=1, description="Mean error fraction")
    qber_stddev: float = Field(..., ge=0, description="Std. dev. across repetitions")
    mean_clicks_per_pulse: float = Field(
        ..., ge=0, description="Registered clicks per pulse, all detectors, all inputs"
    )
    mean_clicks_bit_one: float | None = Field(
        None, ge=0, description="Clicks per bit-1 pulse; None if no bit 1 was sent"
    )
    tie_fraction: float = Field(
        0.0, ge=0, le=1, description="PM pulses with equal counts"
    )
    confusion: BinaryChannel = Field(..., description="Empirical P(y | x)")
    per_repetition: list[float] = Field(..., min_length=1, description="QBER per run")
    n_pulses: int = Field(..., ge=1)

    @property
    def standard_error(self) -> float:
        """Binomial standard error of the pooled QBER estimate."""
        pulses = self.n_pulses * len(self.per_repetition)
        return (self.qber_mean * (1.0 - self.qber_mean) / pulses) ** 0.5

    def record(self) -> dict[str, float | int | None]:
        """Tidy output record for the CLI layer."""
        return {
            "qber_mean": self.qber_mean,
            "qber_stddev": self.qber_stddev,
            "mean_clicks_per_pulse": self.mean_clicks_per_pulse,
            "mean_clicks_bit_one": self.mean_clicks_bit_one,
            "tie_fraction": self.tie_fraction,
            "eps00": self.confusion.eps00,
            "eps01": self.confusion.eps01,
            "eps10": self.confusion.eps10,
            "eps11": self.confusion.eps11,
            "n_pulses": self.n_pulses,
            "repetitions": len(self.per_repetition),
        }


class CurvePoint(BaseModel):
    """One (series, received photon number) sample of a QBER curve."""

    model_config = ConfigDict(frozen=True)

    series: str = Field(..., description="e.g. 'bob-k1', 'bob-k1-mc', 'eve-gamma0.1'")
    eta_alpha2: float = Field(..., ge=0, description="Received mean photon number")
    qber: float = Field(..., ge=0, le=1)
    qber_stddev: float | None = Field(None, ge=0, description="Monte Carlo series only")
