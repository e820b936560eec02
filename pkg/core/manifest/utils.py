import hashlib
import platform
from pathlib import Path
from typing import Any, Optional

import matplotlib
import numpy as np
import orjson
import pydantic
from loguru import logger

from config import APP_NAME, APP_VERSION

MANIFEST_NAME = "manifest.json"
_CHUNK = 1 << 20


def file_digest(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(_CHUNK), b""):
            digest.update(chunk)
    return digest.hexdigest()


def build_stage_key(stage: str, payload: Any) -> str:
    return f"{stage}:{hashlib.sha256(orjson.dumps(payload, option=orjson.OPT_SORT_KEYS)).hexdigest()}"


def manifest_path(output: str | Path) -> Path:
    """`<dir>/manifest.json` for directory outputs, `<file>.manifest.json` otherwise."""
    output = Path(output)
    if output.is_dir() or not output.suffix:
        return output / MANIFEST_NAME
    return output.with_name(output.name + ".manifest.json")


def versions() -> dict[str, str]:
    return {
        APP_NAME: APP_VERSION,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "pydantic": pydantic.VERSION,
        "matplotlib": matplotlib.__version__,
    }


def _digests(paths: list[str | Path]) -> dict[str, str]:
    return {str(path): file_digest(path) for path in paths}


def write_manifest(
    stage: str,
    output: str | Path,
    inputs: list[str | Path],
    outputs: list[str | Path],
    params: dict[str, Any],
) -> Path:
    """Record inputs, outputs and parameters of a finished stage next to its output."""
    target = manifest_path(output)
    input_digests = _digests(inputs)
    body = {
        "stage": stage,
        "key": build_stage_key(stage, {"inputs": input_digests, "params": params}),
        "inputs": input_digests,
        "outputs": _digests(outputs),
        "params": params,
        "versions": versions(),
    }
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(orjson.dumps(body, option=orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2))
    return target


def read_manifest(output: str | Path) -> Optional[dict[str, Any]]:
    path = manifest_path(output)
    if not path.is_file():
        return None
    try:
        return orjson.loads(path.read_bytes())
    except orjson.JSONDecodeError as e:
        logger.warning(f"Ignoring unreadable manifest {path}: {e}")
        return None


def stage_is_current(
    stage: str,
    output: str | Path,
    inputs: list[str | Path],
    params: dict[str, Any],
) -> bool:
    """True when a manifest matches these inputs and params and every recorded output is intact."""
    manifest = read_manifest(output)
    if manifest is None or manifest.get("stage") != stage:
        return False
    if any(not Path(path).is_file() for path in inputs):
        return False
    if manifest.get("key") != build_stage_key(stage, {"inputs": _digests(inputs), "params": params}):
        return False
    for path, digest in manifest.get("outputs", {}).items():
        if not Path(path).is_file() or file_digest(path) != digest:
            return False
    return True
