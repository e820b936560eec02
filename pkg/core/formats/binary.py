import os
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator

import numpy as np

from core.exceptions.formats import ArtifactMissing, FormatError

U8 = np.dtype("u1")
U16 = np.dtype("<u2")
U32 = np.dtype("<u4")
U64 = np.dtype("<u8")
F32 = np.dtype("<f4")


def read_file(path: str | Path, what: str = "file") -> bytes:
    path = Path(path)
    if not path.is_file():
        raise ArtifactMissing(f"{what} not found: {path}")
    return path.read_bytes()


def pack(dtype: np.dtype, value: int | float) -> bytes:
    return np.array(value, dtype=dtype).tobytes()


@contextmanager
def atomic_path(path: str | Path) -> Iterator[Path]:
    """Yield a sibling temporary path that replaces `path` only on success."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".partial")
    try:
        yield tmp
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()


class ByteCursor:
    def __init__(self, buf: bytes, source: str) -> None:
        self.buf = buf
        self.source = source
        self.offset = 0

    @property
    def remaining(self) -> int:
        return len(self.buf) - self.offset

    def take(self, n: int, what: str) -> bytes:
        if n > self.remaining:
            raise FormatError(
                f"{self.source}: truncated {what}: expected {n} bytes, found {self.remaining}",
                offset=self.offset,
            )
        chunk = self.buf[self.offset : self.offset + n]
        self.offset += n
        return chunk

    def array(self, dtype: np.dtype, count: int, what: str) -> np.ndarray:
        raw = self.take(dtype.itemsize * count, what)
        return np.frombuffer(raw, dtype=dtype, count=count).copy()

    def scalar(self, dtype: np.dtype, what: str) -> int | float:
        return self.array(dtype, 1, what)[0].item()

    def expect_magic(self, magic: bytes) -> None:
        found = self.take(len(magic), "magic")
        if found != magic:
            raise FormatError(
                f"{self.source}: bad magic {found!r}, expected {magic!r}", offset=0
            )

    def expect_version(self, version: int) -> None:
        at = self.offset
        found = self.scalar(U32, "version")
        if found != version:
            raise FormatError(
                f"{self.source}: unsupported version {found}, expected {version}",
                offset=at,
            )

    def expect_end(self) -> None:
        if self.remaining:
            raise FormatError(
                f"{self.source}: {self.remaining} trailing bytes", offset=self.offset
            )
