"""Exception types raised across the package."""

from __future__ import annotations


class MpdError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(MpdError, ValueError):
    """Tensor extents or system sizes do not agree."""


class NotIsometricError(MpdError, ValueError):
    """A matrix expected to be an isometry (or unitary) is not.

    The measured defect ``||V^dag V - I||`` is stored on ``defect``.
    """

    def __init__(self, message: str, defect: float):
        super().__init__(message)
        self.defect = defect


class BondTooLargeError(MpdError, ValueError):
    """An MPS bond exceeds the physical dimension where that is forbidden."""


class SizeLimitError(MpdError, ValueError):
    """A dense routine was asked to handle too many sites or wires."""


class ZeroNormError(MpdError, ValueError):
    """A state with zero norm cannot be normalized."""
