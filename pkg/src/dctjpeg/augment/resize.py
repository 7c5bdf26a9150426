"""Sub-band approximation resizing and factor-constrained random resized crop.

Resizing by ``P/Q`` along an axis runs separably: each 8-point block is
zero-padded to ``8P`` points (scaled by ``sqrt(P)``) and split into ``P``
blocks with the sub-block conversion; then runs of ``Q`` blocks are combined
to ``8Q`` points and truncated to their low 8 (scaled by ``1/sqrt(Q)``).
Up-then-down by the same factor is exact.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from ..bitstream import DctImage, crop_blocks
from ..errors import UnsupportedRatio
from ..transform import conversion_matrix

#: largest numerator / denominator accepted for a resize ratio
MAX_FACTOR = 32


def _up_axis(p: np.ndarray, factor: int, axis: int) -> np.ndarray:
    """Upsample along grid axis ``axis`` (0 rows, 1 cols) of a ``(R, C, b, b)`` plane."""
    if factor == 1:
        return p
    b = p.shape[-1]
    Ainv = conversion_matrix(factor, b).inverse  # (fb, fb)
    # columns of A^T that see the low b frequencies, pre-scaled
    U = math.sqrt(factor) * Ainv[:, :b]  # (fb, b)
    if axis == 1:
        q = p @ U.T  # (..., b, fb): act on the horizontal frequency axis
        R, C = q.shape[:2]
        q = q.reshape(R, C, b, factor, b).transpose(0, 1, 3, 2, 4)
        return q.reshape(R, C * factor, b, b)
    q = U @ p  # (R, C, fb, b)
    R, C = q.shape[:2]
    q = q.reshape(R, C, factor, b, b).transpose(0, 2, 1, 3, 4)
    return q.reshape(R * factor, C, b, b)


def _down_axis(p: np.ndarray, factor: int, axis: int) -> np.ndarray:
    if factor == 1:
        return p
    b = p.shape[-1]
    A = conversion_matrix(factor, b).A
    Dm = A[:b, :] / math.sqrt(factor)  # (b, fb): combine then keep the low band
    R, C = p.shape[:2]
    if axis == 1:
        g = p.reshape(R, C // factor, factor, b, b).transpose(0, 1, 3, 2, 4)
        g = g.reshape(R, C // factor, b, factor * b)
        return g @ Dm.T
    g = p.reshape(R // factor, factor, C, b, b).transpose(0, 2, 1, 3, 4)
    g = g.reshape(R // factor, C, factor * b, b)
    return Dm @ g


def _ratio(n_in: int, n_out: int) -> Fraction:
    r = Fraction(n_out, n_in)
    if r.numerator > MAX_FACTOR or r.denominator > MAX_FACTOR:
        raise UnsupportedRatio(f"ratio {r} needs factors above {MAX_FACTOR}")
    return r


def resize_plane(p: np.ndarray, rows_out: int, cols_out: int) -> np.ndarray:
    out = p.astype(np.float64)
    for axis, n_out in ((0, rows_out), (1, cols_out)):
        r = _ratio(p.shape[axis], n_out)
        out = _down_axis(_up_axis(out, r.numerator, axis), r.denominator, axis)
    return out


def resize(img: DctImage, out_w: int, out_h: int) -> DctImage:
    """Resize to ``out_w x out_h`` pixels (multiples of the MCU size)."""
    b = img.block_size
    mcu = b * img.chroma_factor
    if out_w <= 0 or out_h <= 0 or out_w % mcu or out_h % mcu:
        raise UnsupportedRatio(f"output size {out_w}x{out_h} must be positive multiples of {mcu}")
    rows, cols = img.grid_shape
    if (rows * b, cols * b) == (out_h, out_w):
        return img
    f = img.chroma_factor
    ro, co = out_h // b, out_w // b
    y = resize_plane(img.y_plane, ro, co)
    cb = resize_plane(img.cb_plane, ro // f, co // f)
    cr = resize_plane(img.cr_plane, ro // f, co // f)
    lw = min(out_w, round(img.logical_width * out_w / (cols * b)))
    lh = min(out_h, round(img.logical_height * out_h / (rows * b)))
    return img.with_planes(y, cb, cr, logical_width=lw, logical_height=lh)


def legal_crop_sizes(target_blocks: int, limit: int, step: int = 1) -> list[int]:
    """Block counts that divide ``target_blocks`` or are multiples of it, up to ``limit``.

    ``step`` keeps only multiples of the chroma factor so crops stay MCU aligned.
    """
    sizes = {d for d in range(1, target_blocks + 1) if target_blocks % d == 0}
    sizes |= set(range(target_blocks, limit + 1, target_blocks))
    return sorted(s for s in sizes if s <= limit and s % step == 0)


def _nearest(options: list[int], want: float) -> int:
    return min(options, key=lambda s: (abs(math.log(s / want)), s))


def random_resized_crop(
    img: DctImage,
    rng: np.random.Generator | int | None,
    scale_range: tuple[float, float] = (0.08, 1.0),
    target: int = 224,
    ratio_range: tuple[float, float] = (3 / 4, 4 / 3),
) -> DctImage:
    """Crop a window whose block sides are factors/multiples of the target, resize to target.

    Only integer up- or down-sampling factors ever occur. Area fraction and
    aspect ratio are sampled as in the usual random-resized-crop and snapped
    to the nearest legal side; a window that does not fit falls back to the
    largest legal centred square.
    """
    rng = np.random.default_rng(rng)
    b = img.block_size
    f = img.chroma_factor
    if target % (b * f):
        raise UnsupportedRatio(f"target {target} must be a multiple of {b * f}")
    tb = target // b
    rows, cols = img.grid_shape
    opts_h = legal_crop_sizes(tb, rows, f)
    opts_w = legal_crop_sizes(tb, cols, f)
    if not opts_h or not opts_w:
        raise UnsupportedRatio(f"no legal crop side for target {tb} blocks in grid {rows}x{cols}")
    area = rows * cols * rng.uniform(*scale_range)
    aspect = math.exp(rng.uniform(math.log(ratio_range[0]), math.log(ratio_range[1])))
    h = _nearest(opts_h, math.sqrt(area / aspect))
    w = _nearest(opts_w, math.sqrt(area * aspect))
    if h > rows or w > cols:
        h = w = max(s for s in set(opts_h) & set(opts_w)) if set(opts_h) & set(opts_w) else min(opts_h[-1], opts_w[-1])
    y0 = f * int(rng.integers(0, (rows - h) // f + 1))
    x0 = f * int(rng.integers(0, (cols - w) // f + 1))
    crop = crop_blocks(img, x0, y0, w, h)
    crop = crop.with_planes(*crop.planes, logical_width=w * b, logical_height=h * b)
    return resize(crop, target, target)
