import math

from pydantic import BaseModel, ConfigDict, Field, model_validator

BEHAVIOR_POLICIES = ("random", "centroid", "coverage", "oracle")


class PolicyMix(BaseModel):
    random: float = Field(0.3, ge=0)
    centroid: float = Field(0.3, ge=0)
    coverage: float = Field(0.3, ge=0)
    oracle: float = Field(0.1, ge=0)

    @property
    def weights(self) -> list[float]:
        return [getattr(self, name) for name in BEHAVIOR_POLICIES]

    @model_validator(mode="after")
    def validate_sum(self) -> "PolicyMix":
        total = sum(self.weights)
        if not math.isclose(total, 1.0, abs_tol=1e-9):
            raise ValueError(f"policy mix weights sum to {total}, must be 1")
        return self

    model_config = ConfigDict(frozen=True, extra="forbid")


class DatasetConfig(BaseModel):
    n_transitions: int = Field(50_000, ge=1)
    mix: PolicyMix = PolicyMix()
    seed: int | None = Field(None, ge=0)

    model_config = ConfigDict(frozen=True, extra="forbid")
