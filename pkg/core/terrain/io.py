from pathlib import Path

import numpy as np

from core.exceptions.domain import DomainError
from core.exceptions.formats import FormatError
from core.formats.binary import F32, U8, U32, ByteCursor, atomic_path, pack, read_file
from core.terrain.grid import TerrainMap

MAP_MAGIC = b"TMAP"
MAP_VERSION = 1


def save_map(terrain: TerrainMap, path: str | Path) -> None:
    with atomic_path(path) as tmp:
        with open(tmp, "wb") as fh:
            fh.write(MAP_MAGIC)
            fh.write(pack(U32, MAP_VERSION))
            fh.write(pack(U32, terrain.height))
            fh.write(pack(U32, terrain.width))
            fh.write(pack(F32, terrain.cell_size_m))
            fh.write(terrain.elevation.astype(F32).tobytes())
            fh.write(terrain.cover.astype(U8).tobytes())


def load_map(path: str | Path) -> TerrainMap:
    cursor = ByteCursor(read_file(path, "map file"), source=str(path))
    cursor.expect_magic(MAP_MAGIC)
    cursor.expect_version(MAP_VERSION)
    height = cursor.scalar(U32, "height")
    width = cursor.scalar(U32, "width")
    cell_size_m = cursor.scalar(F32, "cell_size_m")

    n_cells = height * width
    grid_offset = cursor.offset
    elevation = cursor.array(F32, n_cells, "elevation grid").reshape(height, width)
    cover = cursor.array(U8, n_cells, "cover grid").reshape(height, width)
    cursor.expect_end()

    try:
        return TerrainMap(elevation=elevation, cover=cover, cell_size_m=cell_size_m)
    except DomainError as e:
        raise FormatError(f"{path}: {e.message}", offset=grid_offset)
