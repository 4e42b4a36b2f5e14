from ._dispatch import KERNEL_BACKEND, kernel
from .api import (
    InterceptResult,
    PackedState,
    PassSpec,
    ball_trajectory,
    cycles_to_reach,
    fast_forward,
    intercept_free_ball,
    pack_state,
    packed_index,
    receiver_interception,
    simulate_pass,
)

__all__ = [
    "KERNEL_BACKEND",
    "kernel",
    "InterceptResult",
    "PackedState",
    "PassSpec",
    "ball_trajectory",
    "cycles_to_reach",
    "fast_forward",
    "intercept_free_ball",
    "pack_state",
    "packed_index",
    "receiver_interception",
    "simulate_pass",
]
