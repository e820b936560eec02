import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from core.env.actions import N_ACTIONS
from core.exceptions.domain import DimensionMismatch, DomainError
from core.exceptions.formats import ArtifactMissing, FormatError
from core.formats.binary import ByteCursor, U32, U64

DATASET_MAGIC = b"UVDS"
DATASET_VERSION = 1
HEADER_SIZE = 4 + 4 + 8 + 4
COUNT_OFFSET = 8


def record_dtype(state_dim: int) -> np.dtype:
    return np.dtype(
        [
            ("state", "<f4", (state_dim,)),
            ("action", "<u2"),
            ("reward", "<f4"),
            ("next_state", "<f4", (state_dim,)),
            ("done", "u1"),
        ]
    )


@dataclass(frozen=True)
class Transition:
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    done: bool

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Transition):
            return NotImplemented
        return (
            self.action == other.action
            and np.float32(self.reward) == np.float32(other.reward)
            and self.done == other.done
            and np.array_equal(self.state, other.state)
            and np.array_equal(self.next_state, other.next_state)
        )


@dataclass(frozen=True)
class DatasetFile:
    path: Path
    count: int
    state_dim: int
    records: np.ndarray  # structured, read-only view over the file

    @property
    def states(self) -> np.ndarray:
        return self.records["state"]

    def batch(self, indices: np.ndarray) -> np.ndarray:
        return np.asarray(self.records[indices])

    def __len__(self) -> int:
        return self.count


class DatasetWriter:
    """Streams records to `path.partial` and moves them into place on close."""

    def __init__(self, path: str | Path, state_dim: int) -> None:
        self.path = Path(path)
        self.state_dim = state_dim
        self.dtype = record_dtype(state_dim)
        self.count = 0
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._tmp = self.path.with_name(self.path.name + ".partial")
        self._fh = open(self._tmp, "wb")
        self._fh.write(DATASET_MAGIC)
        self._fh.write(np.array(DATASET_VERSION, dtype=U32).tobytes())
        self._fh.write(np.array(0, dtype=U64).tobytes())
        self._fh.write(np.array(state_dim, dtype=U32).tobytes())

    def __enter__(self) -> "DatasetWriter":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        if exc_type is None:
            self.close()
        else:
            self.abort()

    def append(
        self,
        states: np.ndarray,
        actions: np.ndarray,
        rewards: np.ndarray,
        next_states: np.ndarray,
        dones: np.ndarray,
    ) -> None:
        states = np.asarray(states, dtype=np.float32).reshape(-1, self.state_dim)
        next_states = np.asarray(next_states, dtype=np.float32).reshape(-1, self.state_dim)
        actions = np.asarray(actions).reshape(-1)
        rewards = np.asarray(rewards, dtype=np.float32).reshape(-1)
        dones = np.asarray(dones).reshape(-1)

        n = len(states)
        if not (len(next_states) == len(actions) == len(rewards) == len(dones) == n):
            raise DimensionMismatch("transition batch length", n, (len(next_states), len(actions), len(rewards), len(dones)))
        if n and (actions.min() < 0 or actions.max() >= N_ACTIONS):
            raise DomainError(f"action outside 0..{N_ACTIONS - 1} in transition batch")
        if n and not np.all((rewards >= 0.0) & (rewards <= 1.0)):
            raise DomainError("reward outside [0, 1] in transition batch")

        block = np.empty(n, dtype=self.dtype)
        block["state"] = states
        block["action"] = actions
        block["reward"] = rewards
        block["next_state"] = next_states
        block["done"] = dones.astype(np.uint8)
        self._fh.write(block.tobytes())
        self.count += n

    def write(self, transition: Transition) -> None:
        self.append(
            transition.state[None, :],
            np.array([transition.action]),
            np.array([transition.reward]),
            transition.next_state[None, :],
            np.array([transition.done]),
        )

    def close(self) -> None:
        self._fh.seek(COUNT_OFFSET)
        self._fh.write(np.array(self.count, dtype=U64).tobytes())
        self._fh.close()
        os.replace(self._tmp, self.path)

    def abort(self) -> None:
        self._fh.close()
        if self._tmp.exists():
            self._tmp.unlink()


def write_dataset(path: str | Path, transitions: Iterable[Transition], state_dim: int) -> int:
    with DatasetWriter(path, state_dim) as writer:
        for transition in transitions:
            writer.write(transition)
        return writer.count


def open_dataset(path: str | Path, expected_state_dim: int | None = None) -> DatasetFile:
    path = Path(path)
    if not path.is_file():
        raise ArtifactMissing(f"dataset file not found: {path}")

    with open(path, "rb") as fh:
        cursor = ByteCursor(fh.read(HEADER_SIZE), source=str(path))
    cursor.expect_magic(DATASET_MAGIC)
    cursor.expect_version(DATASET_VERSION)
    count = cursor.scalar(U64, "record count")
    state_dim = cursor.scalar(U32, "state_dim")

    if expected_state_dim is not None and state_dim != expected_state_dim:
        raise DimensionMismatch(f"{path}: state_dim", expected_state_dim, state_dim)

    dtype = record_dtype(state_dim)
    expected_size = HEADER_SIZE + count * dtype.itemsize
    actual_size = path.stat().st_size
    if actual_size != expected_size:
        raise FormatError(
            f"{path}: header declares {count} records of state_dim {state_dim} "
            f"({expected_size} bytes) but file has {actual_size} bytes",
            offset=min(actual_size, expected_size),
        )

    if count == 0:
        records = np.empty(0, dtype=dtype)
    else:
        records = np.memmap(path, dtype=dtype, mode="r", offset=HEADER_SIZE, shape=(count,))
    return DatasetFile(path=path, count=count, state_dim=state_dim, records=records)


def read_dataset(path: str | Path, expected_state_dim: int | None = None) -> Iterator[Transition]:
    dataset = open_dataset(path, expected_state_dim)
    for record in dataset.records:
        yield Transition(
            state=np.array(record["state"]),
            action=int(record["action"]),
            reward=float(record["reward"]),
            next_state=np.array(record["next_state"]),
            done=bool(record["done"]),
        )
