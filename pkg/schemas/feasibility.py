from pydantic import BaseModel, ConfigDict, Field, model_validator


class CandidateConfig(BaseModel):
    grid_x: int = Field(8, ge=0)
    grid_y: int = Field(5, ge=0)
    altitudes_m: list[float] = Field(default_factory=lambda: [60.0, 120.0, 240.0])
    include_above_users: bool = True
    include_centroid: bool = True
    include_current_uav: bool = True
    local_altitude_m: float = Field(120.0, gt=0, description="AGL for above-user and centroid points")

    @property
    def grid_enabled(self) -> bool:
        return self.grid_x > 0 and self.grid_y > 0 and len(self.altitudes_m) > 0

    @model_validator(mode="after")
    def validate_sources(self) -> "CandidateConfig":
        if not (
            self.grid_enabled
            or self.include_above_users
            or self.include_centroid
            or self.include_current_uav
        ):
            raise ValueError("at least one candidate source must be enabled")
        return self

    model_config = ConfigDict(frozen=True, extra="forbid")
