from pydantic import BaseModel, ConfigDict, Field


class EvalConfig(BaseModel):
    episodes: int = Field(30, ge=1)
    seeds: list[int] = Field(default_factory=lambda: [0, 1, 2], min_length=1)
    episode_seed_base: int = Field(100_000, ge=0)
    gamma: float = Field(0.99, gt=0, lt=1)
    write_traces: bool = True

    model_config = ConfigDict(frozen=True, extra="forbid")
