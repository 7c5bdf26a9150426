"""Shared helpers for coefficient-domain augmentations."""

from __future__ import annotations

import numpy as np

DC_MIN = -1024.0
DC_MAX = 1016.0


def clamp(x: np.ndarray) -> np.ndarray:
    return np.clip(x, DC_MIN, DC_MAX)


def as_float(plane: np.ndarray) -> np.ndarray:
    return plane.astype(np.float64, copy=True)


def set_dc(plane: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Copy of ``plane`` (as float64) with its DC terms replaced by ``clamp(values)``."""
    out = as_float(plane)
    out[..., 0, 0] = clamp(values)
    return out


def parity_matrix(n: int) -> np.ndarray:
    """``R = diag(1, -1, 1, -1, ...)``: the DCT image of mirroring one axis."""
    return np.diag((-1.0) ** np.arange(n))


def parity_signs(n: int) -> np.ndarray:
    return (-1) ** np.arange(n)
