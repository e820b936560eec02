import math
from typing import Sequence

from core.exceptions.domain import DomainError

N_ACTIONS = 27
HOLD_ACTION = 13

Displacement = tuple[int, int, int]


def encode_action(dx: int, dy: int, dz: int) -> int:
    for component in (dx, dy, dz):
        if component not in (-1, 0, 1):
            raise DomainError(f"displacement components must be in {{-1, 0, 1}}, got {(dx, dy, dz)}")
    return (dx + 1) * 9 + (dy + 1) * 3 + (dz + 1)


def decode_action(index: int) -> Displacement:
    if isinstance(index, bool) or not 0 <= int(index) < N_ACTIONS or int(index) != index:
        raise DomainError(f"action index {index} outside 0..{N_ACTIONS - 1}")
    index = int(index)
    return index // 9 - 1, (index // 3) % 3 - 1, index % 3 - 1


def _quantize_component(value: float) -> int:
    if value < -1.0 / 3.0:
        return -1
    if value > 1.0 / 3.0:
        return 1
    return 0


def quantize_action(action: Sequence[float]) -> int:
    """Map a continuous displacement in [-1, 1]^3 to the discrete action grid."""
    if len(action) != 3:
        raise DomainError(f"continuous action must have 3 components, got {len(action)}")
    if not all(math.isfinite(float(v)) for v in action):
        raise DomainError(f"continuous action must be finite, got {tuple(action)}")
    dx, dy, dz = (_quantize_component(float(v)) for v in action)
    return encode_action(dx, dy, dz)
