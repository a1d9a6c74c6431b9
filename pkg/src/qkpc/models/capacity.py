"""Pydantic models for private-capacity results, constraints and sweep grids."""

import math
from enum import StrEnum

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from qkpc.models.channel import OokParams, PmParams

DEFAULT_MIN_THETA = math.radians(2.0)


class Scheme(StrEnum):
    """Encoder/decoder families whose private capacity can be optimized."""

    OOK_THRESHOLD1 = "ook-k1"
    OOK_PNR = "ook-pnr"
    PM = "pm"
    PM_CONSTRAINED = "pm-constrained"
    USD_PM = "usd-pm"


class Constraints(BaseModel):
    """Bounds on the tunable parameters searched by the optimizer."""

    model_config = ConfigDict(frozen=True)

    min_mean_photons: float = Field(1e-3, gt=0, description="Lower bound on |alpha|^2")
    max_mean_photons: float = Field(1e3, gt=0, description="Upper bound on |alpha|^2")
    min_theta: float = Field(
        DEFAULT_MIN_THETA, ge=0, le=math.pi, description="Lower bound on theta (rad)"
    )
    max_theta: float = Field(
        math.pi / 2, ge=0, le=math.pi, description="Upper bound on theta (rad)"
    )
    max_threshold_k: int = Field(40, ge=1, description="Largest PNR threshold tried")

    @model_validator(mode="after")
    def _bounds_ordered(self) -> "Constraints":
        if self.min_mean_photons > self.max_mean_photons:
            raise ValueError("min_mean_photons must not exceed max_mean_photons")
        if self.min_theta > self.max_theta:
            raise ValueError("min_theta must not exceed max_theta")
        return self

    @classmethod
    def for_scheme(cls, scheme: Scheme, **overrides: float) -> "Constraints":
        """Default bounds; constrained PM caps |alpha|^2 at 20 and theta at 10 deg."""
        if scheme is Scheme.PM_CONSTRAINED:
            caps = {"max_mean_photons": 20.0, "max_theta": math.radians(10.0)}
            overrides = caps | overrides
        return cls(**overrides)


class CapacityResult(BaseModel):
    """Private capacity at an (optimal) parameter point."""

    model_config = ConfigDict(frozen=True)

    scheme: Scheme
    c_p: float = Field(..., ge=0, le=1, description="Private capacity (bits/use)")
    i_bob: float = Field(..., ge=0, le=1, description="Bob's mutual information")
    i_eve: float = Field(..., ge=0, le=1, description="Eve's mutual information")
    best_params: OokParams | PmParams = Field(..., description="Encoder/decoder point")

    @model_validator(mode="after")
    def _floor_consistent(self) -> "CapacityResult":
        if abs(self.c_p - max(self.i_bob - self.i_eve, 0.0)) > 1e-9:
            raise ValueError("c_p must equal max(i_bob - i_eve, 0)")
        return self

    def record(self, gamma: float, delta: float) -> dict[str, float | int | str]:
        """Tidy output record for the CLI layer."""
        params = self.best_params
        is_pm = isinstance(params, PmParams)
        return {
            "gamma": gamma,
            "delta": delta,
            "scheme": self.scheme.value,
            "c_p": self.c_p,
            "i_bob": self.i_bob,
            "i_eve": self.i_eve,
            "alpha2": params.mean_photons,
            "k": params.threshold_k if not is_pm else 0,
            "theta_deg": math.degrees(params.theta) if is_pm else 0.0,
            "kappa": params.kappa if is_pm else 0.0,
            "q0": params.q0,
        }


class SweepGrid(BaseModel):
    """(delta, gamma) grid over which a scheme's capacity is optimized."""

    model_config = ConfigDict(frozen=True)

    delta_values: list[float] = Field(..., min_length=1, description="Noise per pulse")
    gamma_values: list[float] = Field(..., min_length=1, description="Eve's fraction")
    scheme: Scheme
    eta: float = Field(1.0, gt=0, le=1, description="Bob's end-to-end efficiency")
    constraints: Constraints | None = None

    @field_validator("delta_values", "gamma_values")
    @classmethod
    def _strictly_increasing(cls, values: list[float]) -> list[float]:
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("grid values must be strictly increasing")
        return values

    @field_validator("delta_values")
    @classmethod
    def _non_negative(cls, values: list[float]) -> list[float]:
        if any(v < 0 or not math.isfinite(v) for v in values):
            raise ValueError("delta values must be finite and non-negative")
        return values

    @field_validator("gamma_values")
    @classmethod
    def _fractions(cls, values: list[float]) -> list[float]:
        if any(not 0 < v <= 1 for v in values):
            raise ValueError("gamma values must lie in (0, 1]")
        return values

    def cells(self) -> list[tuple[float, float]]:
        """(gamma, delta) pairs in row-major order, gamma outer."""
        return [(g, d) for g in self.gamma_values for d in self.delta_values]


class SweepCell(BaseModel):
    """One cell of a capacity sweep; failed cells carry an error message."""

    model_config = ConfigDict(frozen=True)

    index: int = Field(..., ge=0)
    gamma: float
    delta: float
    result: CapacityResult | None = None
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.result is None
