from pydantic import BaseModel, ConfigDict, Field, model_validator


class EnvConfig(BaseModel):
    num_users: int = Field(3, ge=1)
    episode_len: int = Field(600, ge=1)
    dt_s: float = Field(10.0, gt=0)
    user_speed_mps: float = Field(10.0, gt=0)
    user_height_m: float = Field(1.5, ge=0)
    bs_height_m: float = Field(20.0, ge=0)
    bs_xy: tuple[float, float] | None = Field(
        None, description="Base station xy in meters; map centre when unset"
    )
    uav_step_xy_m: float = Field(100.0, gt=0)
    uav_step_z_m: float = Field(10.0, gt=0)
    uav_alt_min_m: float = Field(30.0, ge=0)
    uav_alt_max_m: float = Field(300.0, gt=0)
    user_region_radius_m: float = Field(4000.0, gt=0)
    obs_map_h: int = Field(64, ge=1)
    obs_map_w: int = Field(40, ge=1)
    state_dim: int = Field(5136, ge=1)
    seed: int | None = Field(None, ge=0)

    @property
    def dynamic_dim(self) -> int:
        # uav xyz, user xyz, access rssi per user, backhaul rssi
        return 3 + 3 * self.num_users + self.num_users + 1

    @property
    def obs_dim(self) -> int:
        return 2 * self.obs_map_h * self.obs_map_w + self.dynamic_dim

    @model_validator(mode="after")
    def validate_dims(self) -> "EnvConfig":
        if self.uav_alt_min_m >= self.uav_alt_max_m:
            raise ValueError(
                f"uav_alt_min_m ({self.uav_alt_min_m}) must be below uav_alt_max_m ({self.uav_alt_max_m})"
            )
        if self.obs_dim != self.state_dim:
            raise ValueError(
                f"observation layout gives {self.obs_dim} entries but state_dim is {self.state_dim}"
            )
        return self

    model_config = ConfigDict(frozen=True, extra="forbid")
