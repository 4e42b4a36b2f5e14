"""Kernel backend selection: compiled extension when built, pure Python otherwise.

Set TACTIC2D_KERNEL=py or =c to force a backend (c raises if the extension
is missing).
"""
import os

_forced = os.environ.get("TACTIC2D_KERNEL", "").strip().lower()
if _forced not in ("", "c", "py"):
    raise RuntimeError(f"TACTIC2D_KERNEL must be 'c' or 'py', got {_forced!r}")

if _forced == "py":
    from . import _pykernel as kernel
else:
    try:
        from . import _ckernel as kernel  # type: ignore[attr-defined]
    except ImportError:
        if _forced == "c":
            raise
        from . import _pykernel as kernel

KERNEL_BACKEND: str = kernel.BACKEND
