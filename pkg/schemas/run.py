import hashlib
import sys
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import orjson
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from core.exceptions.config import ConfigurationError
from core.exceptions.formats import ArtifactMissing
from schemas.codecs import ReprConfig
from schemas.cql import CqlConfig
from schemas.dataset import DatasetConfig
from schemas.env import EnvConfig
from schemas.evaluation import EvalConfig
from schemas.feasibility import CandidateConfig
from schemas.radio import RadioConfig
from schemas.terrain import MapGenConfig

_SEEDED_SECTIONS = ("map", "env", "dataset", "repr", "cql")


class RunConfig(BaseModel):
    seed: int = Field(0, ge=0)
    map: MapGenConfig = MapGenConfig()
    env: EnvConfig = EnvConfig()
    radio: RadioConfig = RadioConfig()
    csfub: CandidateConfig = CandidateConfig()
    dataset: DatasetConfig = DatasetConfig()
    repr: ReprConfig = ReprConfig()
    cql: CqlConfig = CqlConfig()
    eval: EvalConfig = EvalConfig()

    @model_validator(mode="before")
    @classmethod
    def resolve_seeds(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        seed = data.get("seed", 0)
        for name in _SEEDED_SECTIONS:
            section = data.get(name, {})
            if isinstance(section, dict) and section.get("seed") is None:
                data[name] = {**section, "seed": seed}
        return data

    @model_validator(mode="after")
    def validate_cross_sections(self) -> "RunConfig":
        env = self.env
        for altitude in self.csfub.altitudes_m + [self.csfub.local_altitude_m]:
            if not env.uav_alt_min_m <= altitude <= env.uav_alt_max_m:
                raise ValueError(
                    f"candidate altitude {altitude} m outside [{env.uav_alt_min_m}, {env.uav_alt_max_m}]"
                )
        if self.repr.d_z >= env.obs_dim:
            raise ValueError(f"repr.d_z ({self.repr.d_z}) must be below the observation size {env.obs_dim}")
        return self

    def snapshot(self) -> dict[str, Any]:
        return self.model_dump(mode="json")

    def config_hash(self) -> str:
        return hashlib.sha256(orjson.dumps(self.snapshot(), option=orjson.OPT_SORT_KEYS)).hexdigest()

    model_config = ConfigDict(frozen=True, extra="forbid")


def load_run_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ArtifactMissing(f"config file not found: {path}")

    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as e:
        raise ConfigurationError(f"{path}: {e}")

    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"]) or "<root>"
        raise ConfigurationError(f"{path}: {location}: {first['msg']}")
