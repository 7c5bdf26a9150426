"""Photometric augmentations on DC and AC coefficients.

Luma DC is ``8 * (block mean - 128)``, so most colour ops reduce to an affine
map on ``Y[..., 0, 0]`` (luma) or on the chroma DCs. Arithmetic ops return
float64 planes and clamp the coefficients they touch to [-1024, 1016]; sign
and zeroing ops keep the input dtype.
"""

from __future__ import annotations

import numpy as np

from ..bitstream import DctImage
from ..errors import BadBitCount, NegativeFactor
from ._common import DC_MAX, DC_MIN, as_float, clamp, set_dc

EQUALIZE_BINS = 256
_BIN = (DC_MAX - DC_MIN + 8) / EQUALIZE_BINS  # 8: one pixel level per bin


def _check_factor(t: float, name: str) -> None:
    if t < 0:
        raise NegativeFactor(f"{name} factor must be >= 0, got {t}")


def brightness(img: DctImage, t: float) -> DctImage:
    """Shift every luma DC by ``t * mean(|Y_00|)``."""
    dc = img.y_plane[..., 0, 0].astype(np.float64)
    shift = t * np.abs(dc).mean() if dc.size else 0.0
    return img.with_planes(set_dc(img.y_plane, dc + shift), img.cb_plane, img.cr_plane)


def contrast(img: DctImage, t: float) -> DctImage:
    _check_factor(t, "contrast")
    dc = img.y_plane[..., 0, 0].astype(np.float64)
    return img.with_planes(set_dc(img.y_plane, t * dc), img.cb_plane, img.cr_plane)


def color(img: DctImage, t: float) -> DctImage:
    """Scale both chroma DCs by ``t``; chroma AC is kept."""
    _check_factor(t, "color")
    cb, cr = (set_dc(p, t * p[..., 0, 0].astype(np.float64)) for p in (img.cb_plane, img.cr_plane))
    return img.with_planes(img.y_plane, cb, cr)


def equalize(img: DctImage) -> DctImage:
    """Histogram-equalize luma DC with 256 bins spanning [-1024, 1016].

    Bin ``i`` covers DCs of pixel level ``i``; the mapping is the classic
    ``(cdf - cdf_min) / (n - cdf_min)`` lookup scaled back to the DC range. A
    single occupied bin leaves the image unchanged.
    """
    dc = img.y_plane[..., 0, 0].astype(np.float64)
    bins = np.clip(np.floor((dc - DC_MIN) / _BIN), 0, EQUALIZE_BINS - 1).astype(np.int64)
    cdf = np.bincount(bins.ravel(), minlength=EQUALIZE_BINS).cumsum()
    cdf_min = cdf[cdf > 0][0] if dc.size else 0
    if dc.size == 0 or cdf_min == cdf[-1]:
        return img
    levels = np.floor((cdf - cdf_min) / (cdf[-1] - cdf_min) * (EQUALIZE_BINS - 1) + 0.5)
    return img.with_planes(set_dc(img.y_plane, DC_MIN + _BIN * levels[bins]), img.cb_plane, img.cr_plane)


def _stretch(dc: np.ndarray, lo: float, hi: float) -> np.ndarray:
    return (dc - lo) / (hi - lo) * (DC_MAX - DC_MIN) + DC_MIN


def auto_contrast(img: DctImage) -> DctImage:
    dc = img.y_plane[..., 0, 0].astype(np.float64)
    if dc.size == 0 or dc.max() == dc.min():
        return img
    return img.with_planes(set_dc(img.y_plane, _stretch(dc, dc.min(), dc.max())), img.cb_plane, img.cr_plane)


def auto_saturation(img: DctImage) -> DctImage:
    """Auto-contrast on the chroma DCs, one range shared by Cb and Cr."""
    cb, cr = (p[..., 0, 0].astype(np.float64) for p in (img.cb_plane, img.cr_plane))
    lo = min(cb.min(), cr.min())
    hi = max(cb.max(), cr.max())
    if hi == lo:
        return img
    return img.with_planes(
        img.y_plane,
        set_dc(img.cb_plane, _stretch(cb, lo, hi)),
        set_dc(img.cr_plane, _stretch(cr, lo, hi)),
    )


def _scale_luma_ac(img: DctImage, gain: np.ndarray) -> DctImage:
    b = img.block_size
    g = np.asarray(gain, dtype=np.float64).reshape(b, b).copy()
    g[0, 0] = 1.0
    y = as_float(img.y_plane)
    ac = np.ones((b, b), dtype=bool)
    ac[0, 0] = False
    y[..., ac] = clamp(y[..., ac] * g[ac])
    return img.with_planes(y, img.cb_plane, img.cr_plane)


def sharpness_gain(t: float, n: int = 8) -> np.ndarray:
    r = np.maximum(1.0 + t * np.arange(n) / (n - 1), 0.0)
    return np.outer(r, r)


def sharpness(img: DctImage, t: float) -> DctImage:
    """Ramp luma AC by ``max(1 + t u/7, 0) max(1 + t v/7, 0)``; t < 0 blurs."""
    return _scale_luma_ac(img, sharpness_gain(t, img.block_size))


def midfreq_profile(n: int = 8) -> np.ndarray:
    """Triangular per-axis weight: 0 at u = 0 and u = n-1, 1 at the middle pair."""
    u = np.arange(n)
    tri = np.minimum(u, n - 1 - u).astype(np.float64)
    return tri / tri.max() if tri.max() > 0 else tri


def midfreq_gain(t: float, n: int = 8) -> np.ndarray:
    r = np.maximum(1.0 + t * midfreq_profile(n), 0.0)
    return np.outer(r, r)


def midfreq_aug(img: DctImage, t: float) -> DctImage:
    """Like sharpness, but the gain peaks at u, v in {3, 4} instead of 7."""
    return _scale_luma_ac(img, midfreq_gain(t, img.block_size))


def freq_enhance(img: DctImage, t: float) -> DctImage:
    """Scale every luma AC coefficient by ``t``."""
    _check_factor(t, "freq_enhance")
    b = img.block_size
    return _scale_luma_ac(img, np.full((b, b), float(t)))


def invert(img: DctImage) -> DctImage:
    """Negate every coefficient; an exact involution, so no clamping."""
    return img.with_planes(-img.y_plane, -img.cb_plane, -img.cr_plane)


def posterize(img: DctImage, bits: int) -> DctImage:
    """Keep the top ``bits`` bits of the block mean (DC shifted to [0, 2040])."""
    if not 1 <= bits <= 8:
        raise BadBitCount(f"bits must be in [1, 8], got {bits}")
    step = 8.0 * 2 ** (8 - bits)
    dc = img.y_plane[..., 0, 0].astype(np.float64) - DC_MIN
    return img.with_planes(set_dc(img.y_plane, np.floor(dc / step) * step + DC_MIN), img.cb_plane, img.cr_plane)


def solarize(img: DctImage, threshold: float) -> DctImage:
    """Negate every luma block whose DC is ``>= threshold`` (threshold on the DC scale)."""
    mask = img.y_plane[..., 0, 0] >= threshold
    y = img.y_plane.copy()
    y[mask] = -y[mask]
    return img.with_planes(y, img.cb_plane, img.cr_plane)


def solarize_add(img: DctImage, threshold: float, addend: float) -> DctImage:
    dc = img.y_plane[..., 0, 0].astype(np.float64)
    return img.with_planes(
        set_dc(img.y_plane, np.where(dc < threshold, dc + addend, dc)), img.cb_plane, img.cr_plane
    )


def grayscale(img: DctImage) -> DctImage:
    return img.with_planes(img.y_plane, np.zeros_like(img.cb_plane), np.zeros_like(img.cr_plane))


def chroma_drop(img: DctImage, rng: np.random.Generator | int | None = None, channel: str | None = None) -> DctImage:
    """Zero one chroma plane; ``channel`` ("cb"/"cr") or a seeded coin flip picks which."""
    if channel is None:
        channel = "cb" if np.random.default_rng(rng).integers(2) == 0 else "cr"
    if channel == "cb":
        return img.with_planes(img.y_plane, np.zeros_like(img.cb_plane), img.cr_plane)
    if channel == "cr":
        return img.with_planes(img.y_plane, img.cb_plane, np.zeros_like(img.cr_plane))
    raise ValueError(f"channel must be 'cb' or 'cr', got {channel!r}")
