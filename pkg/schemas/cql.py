from pydantic import BaseModel, ConfigDict, Field, PositiveInt


class CqlConfig(BaseModel):
    batch_size: int = Field(128, ge=1)
    gamma: float = Field(0.99, gt=0, lt=1)
    train_steps: int = Field(100_000, ge=0)
    q_lr: float = Field(3e-5, gt=0)
    actor_lr: float = Field(5e-5, gt=0)
    alpha: float = Field(0.5, ge=0)
    tau: float = Field(0.005, gt=0, le=1)
    use_actor: bool = True
    entropy_weight: float = Field(0.01, ge=0)
    hidden_dims: list[PositiveInt] = Field(default_factory=lambda: [256, 256], min_length=1)
    log_every: int = Field(1000, ge=1)
    seed: int | None = Field(None, ge=0)

    model_config = ConfigDict(frozen=True, extra="forbid")
