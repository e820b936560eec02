from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, PositiveInt


class CodecKind(str, Enum):
    PCA = "pca"
    AE = "ae"
    VAE = "vae"


class ReprConfig(BaseModel):
    kind: CodecKind = CodecKind.VAE
    d_z: int = Field(64, ge=1)
    beta_kl: float = Field(1e-3, ge=0)
    epochs: int = Field(20, ge=0)
    lr: float = Field(1e-3, gt=0)
    batch: int = Field(256, ge=1)
    hidden_dims: list[PositiveInt] = Field(default_factory=lambda: [512, 128], min_length=1)
    pca_max_samples: int = Field(8192, ge=2)
    # latent sizes swept by `reproduce` for the VAE rows
    latent_dims: list[int] = Field(default_factory=lambda: [32, 64, 128])
    seed: int | None = Field(None, ge=0)

    model_config = ConfigDict(frozen=True, extra="forbid")
