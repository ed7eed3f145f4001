"""Kernel backend selection.

The compiled extension is used when it was built; otherwise, or when
``MBLSIM_PURE_PYTHON=1`` is set, the numpy implementations are used.
``BACKEND`` names the active choice.
"""
import os

from . import _fallback

if os.environ.get("MBLSIM_PURE_PYTHON", "") not in ("", "0"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

diagonal_energies = _impl.diagonal_energies
build_block = _impl.build_block
apply_offdiag = _impl.apply_offdiag
z_moments = _impl.z_moments
x_expectations = _impl.x_expectations

__all__ = [
    "BACKEND",
    "diagonal_energies",
    "build_block",
    "apply_offdiag",
    "z_moments",
    "x_expectations",
]
