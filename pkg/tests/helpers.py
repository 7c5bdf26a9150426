"""Shared test utilities: a reference coefficient reader and small image builders."""

from __future__ import annotations

import os
import tempfile

import numpy as np

from dctjpeg.bitstream import DctImage
from dctjpeg.transform import dct_forward_8


def reference_coefficients(data: bytes) -> list[np.ndarray]:
    """Dequantized coefficients from libjpeg (via jpegio) as ``(rows, cols, 8, 8)`` planes."""
    import jpegio

    fd, path = tempfile.mkstemp(suffix=".jpg")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        j = jpegio.read(path)
        planes = []
        for arr, info in zip(j.coef_arrays, j.comp_info):
            q = j.quant_tables[info.quant_tbl_no].astype(np.int64)
            h, w = arr.shape
            blocks = arr.reshape(h // 8, 8, w // 8, 8).transpose(0, 2, 1, 3).astype(np.int64)
            planes.append(blocks * q)
        return planes
    finally:
        os.unlink(path)


def pixels_to_image(y: np.ndarray, cb: np.ndarray, cr: np.ndarray, subsampling: str = "4:2:0",
                    dtype=np.int32) -> DctImage:
    """Forward DCT of level-shifted sample planes (multiples of 8 on a side)."""

    def plane(p):
        h, w = p.shape
        blocks = (p.astype(np.float64) - 128.0).reshape(h // 8, 8, w // 8, 8).transpose(0, 2, 1, 3)
        c = dct_forward_8(blocks)
        return np.round(c).astype(dtype) if np.issubdtype(np.dtype(dtype), np.integer) else c

    return DctImage(plane(y), plane(cb), plane(cr), y.shape[1], y.shape[0], subsampling)


def random_image(rng: np.random.Generator, rows: int = 4, cols: int = 6, subsampling: str = "4:2:0",
                 smooth: bool = True) -> DctImage:
    """Image with realistic, in-range coefficients built from random pixel content."""
    f = 2 if subsampling == "4:2:0" else 1
    h, w = rows * 8, cols * 8
    if smooth:
        base = rng.uniform(20, 235, (h // 8 + 1, w // 8 + 1))
        yy = np.linspace(0, base.shape[0] - 1, h)
        xx = np.linspace(0, base.shape[1] - 1, w)
        y = np.array([np.interp(xx, np.arange(base.shape[1]), r) for r in base])
        y = np.array([np.interp(yy, np.arange(base.shape[0]), c) for c in y.T]).T
        y = np.clip(y + rng.normal(0, 12, (h, w)), 0, 255)
    else:
        y = rng.uniform(0, 255, (h, w))
    cb = rng.uniform(60, 196, (h // f, w // f))
    cr = rng.uniform(60, 196, (h // f, w // f))
    return pixels_to_image(y, cb, cr, subsampling)
