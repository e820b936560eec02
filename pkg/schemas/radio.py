import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


class CoverOffsets(BaseModel):
    """Loss at the ground terminal per land-cover class, in dB."""

    water: float = Field(0.0, ge=0)
    open: float = Field(0.0, ge=0)
    sparse: float = Field(6.0, ge=0)
    dense: float = Field(15.0, ge=0)

    def as_array(self) -> np.ndarray:
        # indexed by LandCover code
        return np.array([self.water, self.open, self.sparse, self.dense], dtype=np.float64)

    model_config = ConfigDict(frozen=True, extra="forbid")


class LinkParams(BaseModel):
    freq_mhz: float = Field(2400.0, gt=0)
    uav_tx_dbm: float = 30.0
    bs_tx_dbm: float = 40.0
    nlos_penalty_db: float = Field(20.0, ge=0)
    cover_offset_db: CoverOffsets = CoverOffsets()
    los_sample_step_cells: float = Field(0.5, gt=0, le=1)
    shadowing_sigma_db: float = Field(0.0, ge=0)

    @field_validator("shadowing_sigma_db")
    @classmethod
    def validate_shadowing(cls, value: float) -> float:
        if value != 0.0:
            raise ValueError("log-normal shadowing is reserved; shadowing_sigma_db must be 0")
        return value

    model_config = ConfigDict(frozen=True, extra="forbid")


class ThresholdSet(BaseModel):
    tau_a_dbm: float = Field(-90.0, allow_inf_nan=False)
    tau_b_dbm: float = Field(-90.0, allow_inf_nan=False)

    model_config = ConfigDict(frozen=True, extra="forbid")


class RadioConfig(BaseModel):
    link: LinkParams = LinkParams()
    thresholds: ThresholdSet = ThresholdSet()

    model_config = ConfigDict(frozen=True, extra="forbid")
