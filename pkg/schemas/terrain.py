from pydantic import BaseModel, ConfigDict, Field, model_validator


class MapGenConfig(BaseModel):
    height: int = Field(64, ge=2, description="Cell rows (y axis)")
    width: int = Field(40, ge=2, description="Cell columns (x axis)")
    cell_size_m: float = Field(400.0, gt=0)
    elevation_amplitude_m: float = Field(300.0, ge=0)
    noise_octaves: int = Field(4, ge=1)
    water_fraction: float = Field(0.1, ge=0, le=1)
    sparse_fraction: float = Field(0.0, ge=0, le=1)
    dense_fraction: float = Field(0.2, ge=0, le=1)
    seed: int | None = Field(None, ge=0, lt=2**64)

    @model_validator(mode="after")
    def validate_fractions(self) -> "MapGenConfig":
        total = self.water_fraction + self.sparse_fraction + self.dense_fraction
        if total > 1.0:
            raise ValueError(f"land-cover fractions sum to {total}, must be <= 1")
        return self

    model_config = ConfigDict(frozen=True, extra="forbid")
