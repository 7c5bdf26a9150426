"""Geometric augmentations: block-grid moves plus per-block parity algebra.

Mirroring an 8-pixel axis multiplies that axis of the DCT block by
``R = diag(1, -1, 1, ...)``, so flips and quarter turns are exact. Rotation
and shear by arbitrary amounts go through the DFT of a whole tile: combine
the blocks to DFT coefficients, resample the centred spectrum under the
inverse map, decompose back.

Flips and rotations act on the padded block grid; when the logical size is
not block aligned the result exposes the full padded extent.
"""

from __future__ import annotations

import math

import numpy as np

from ..bitstream import DctImage
from ..errors import AngleOutOfRange, MisalignedShift
from ..transform import DFT, MAX_CONVERSION_SIZE, combine_blocks, decompose_blocks
from ._common import parity_signs

HORIZONTAL = "horizontal"
VERTICAL = "vertical"
CW = "cw"
CCW = "ccw"

#: zero margin added on each side of a tile before warping, as a fraction of its size
WARP_PAD = 0.25


def _padded_logical(img: DctImage, swap: bool = False) -> dict:
    w, h = img.padded_width, img.padded_height
    if swap:
        w, h = h, w
    return {"logical_width": w, "logical_height": h}


def _check_even(img: DctImage, *values: int) -> None:
    f = img.chroma_factor
    if any(v % f for v in values):
        raise MisalignedShift(f"offsets {values} must be multiples of {f} luma blocks")


def _shift_plane(p: np.ndarray, dx: int, dy: int) -> np.ndarray:
    out = np.zeros_like(p)
    rows, cols = p.shape[:2]
    if abs(dx) >= cols or abs(dy) >= rows:
        return out
    src_r = slice(max(0, -dy), rows - max(0, dy))
    dst_r = slice(max(0, dy), rows - max(0, -dy))
    src_c = slice(max(0, -dx), cols - max(0, dx))
    dst_c = slice(max(0, dx), cols - max(0, -dx))
    out[dst_r, dst_c] = p[src_r, src_c]
    return out


def translate(img: DctImage, dx: int, dy: int) -> DctImage:
    """Move content by ``(dx, dy)`` luma blocks (right/down positive); zeros fill."""
    _check_even(img, dx, dy)
    f = img.chroma_factor
    return img.with_planes(
        _shift_plane(img.y_plane, dx, dy),
        _shift_plane(img.cb_plane, dx // f, dy // f),
        _shift_plane(img.cr_plane, dx // f, dy // f),
    )


def cutout(img: DctImage, x0: int, y0: int, w: int, h: int) -> DctImage:
    """Zero a rectangle of luma blocks (and the matching chroma blocks)."""
    _check_even(img, x0, y0, w, h)
    f = img.chroma_factor
    planes = []
    for p, s in zip(img.planes, (1, f, f)):
        q = p.copy()
        q[max(0, y0 // s) : max(0, (y0 + h) // s), max(0, x0 // s) : max(0, (x0 + w) // s)] = 0
        planes.append(q)
    return img.with_planes(*planes)


def _flip_plane(p: np.ndarray, axis: str) -> np.ndarray:
    b = p.shape[-1]
    if axis == HORIZONTAL:
        return p[:, ::-1] * parity_signs(b).astype(p.dtype)[None, :]
    return p[::-1] * parity_signs(b).astype(p.dtype)[:, None]


def flip(img: DctImage, axis: str = HORIZONTAL) -> DctImage:
    if axis not in (HORIZONTAL, VERTICAL):
        raise ValueError(f"axis must be {HORIZONTAL!r} or {VERTICAL!r}, got {axis!r}")
    planes = [np.ascontiguousarray(_flip_plane(p, axis)) for p in img.planes]
    return img.with_planes(*planes, **_padded_logical(img))


def _rot90_plane(p: np.ndarray, direction: str) -> np.ndarray:
    # clockwise: grid turns cw, each block becomes X^T R
    b = p.shape[-1]
    r = parity_signs(b).astype(p.dtype)
    t = p.swapaxes(-1, -2)
    if direction == CW:
        return np.rot90(t, -1, axes=(0, 1)) * r[None, :]
    return np.rot90(t, 1, axes=(0, 1)) * r[:, None]


def rotate90(img: DctImage, direction: str = CW) -> DctImage:
    if direction not in (CW, CCW):
        raise ValueError(f"direction must be {CW!r} or {CCW!r}, got {direction!r}")
    planes = [np.ascontiguousarray(_rot90_plane(p, direction)) for p in img.planes]
    return img.with_planes(*planes, **_padded_logical(img, swap=True))


# -- DFT resampling --------------------------------------------------------------


def _bilinear(grid: np.ndarray, r: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Sample ``grid`` at fractional indices; points outside the grid read 0."""
    rows, cols = grid.shape
    r0 = np.floor(r).astype(np.int64)
    c0 = np.floor(c).astype(np.int64)
    fr = r - r0
    fc = c - c0
    out = np.zeros(r.shape, dtype=grid.dtype)
    for dr, wr in ((0, 1 - fr), (1, fr)):
        for dc, wc in ((0, 1 - fc), (1, fc)):
            rr, cc = r0 + dr, c0 + dc
            ok = (rr >= 0) & (rr < rows) & (cc >= 0) & (cc < cols)
            out[ok] += (wr * wc)[ok] * grid[rr[ok], cc[ok]]
    return out


def _warp_spectrum(D: np.ndarray, A: np.ndarray) -> np.ndarray:
    """Spectrum of ``out(p) = in(A p)`` about the tile centre, given the DFT ``D`` of ``in``.

    ``A`` is the 2x2 output-to-input map in (x, y) order; the output spectrum
    is ``In(A^-T f)`` (for rotations ``A^-T = A``).
    """
    H, W = D.shape
    ky = np.fft.fftfreq(H) * H
    kx = np.fft.fftfreq(W) * W
    # move the tile centre to the origin so the spectrum is smooth before resampling
    cy, cx = (H - 1) / 2.0, (W - 1) / 2.0
    ramp = np.exp(2j * np.pi * (ky[:, None] * cy / H + kx[None, :] * cx / W))
    G = np.fft.fftshift(D * ramp)
    fy, fx = np.meshgrid(ky / H, kx / W, indexing="ij")
    B = np.linalg.inv(A).T
    sx = B[0, 0] * fx + B[0, 1] * fy
    sy = B[1, 0] * fx + B[1, 1] * fy
    # fftshift puts frequency 0 at index N//2
    out = _bilinear(G, sy * H + H // 2, sx * W + W // 2) / abs(np.linalg.det(A))
    return out * np.conj(ramp)


def _tiles(n: int, cap: int) -> list[slice]:
    return [slice(s, min(s + cap, n)) for s in range(0, n, cap)]


def _warp_plane(p: np.ndarray, A: np.ndarray, pad: float) -> np.ndarray:
    rows, cols, b, _ = p.shape
    limit = MAX_CONVERSION_SIZE // b
    cap = max(1, int(limit / (1 + 2 * pad)))
    out = np.empty(p.shape, dtype=np.float64)
    for rs in _tiles(rows, cap):
        for cs in _tiles(cols, cap):
            tile = p[rs, cs].astype(np.float64)
            L, M = tile.shape[:2]
            # zero (mid-gray) margin keeps the circular DFT from wrapping content around
            pl = min(int(np.ceil(pad * L)), (limit - L) // 2)
            pm = min(int(np.ceil(pad * M)), (limit - M) // 2)
            big = np.pad(tile, ((pl, pl), (pm, pm), (0, 0), (0, 0)))
            D = combine_blocks(big, DFT)
            warped = decompose_blocks(_warp_spectrum(D, A), L + 2 * pl, M + 2 * pm, b, DFT)
            out[rs, cs] = warped[pl : pl + L, pm : pm + M]
    return out


def _warp(img: DctImage, A: np.ndarray, pad: float = WARP_PAD) -> DctImage:
    return img.with_planes(*(_warp_plane(p, A, pad) for p in img.planes), **_padded_logical(img))


def rotation_map(degrees: float) -> np.ndarray:
    """Output-to-input map of a counter-clockwise turn in (x right, y down) coords."""
    th = math.radians(degrees)
    c, s = math.cos(th), math.sin(th)
    return np.array([[c, -s], [s, c]])


def shear_map(axis: str, factor: float) -> np.ndarray:
    if axis == HORIZONTAL:
        return np.array([[1.0, -factor], [0.0, 1.0]])
    if axis == VERTICAL:
        return np.array([[1.0, 0.0], [-factor, 1.0]])
    raise ValueError(f"axis must be {HORIZONTAL!r} or {VERTICAL!r}, got {axis!r}")


def rotate(img: DctImage, degrees: float) -> DctImage:
    """Counter-clockwise rotation about the image centre.

    Whole quarter turns are taken losslessly with :func:`rotate90`; only the
    residual (at most 45 degrees) goes through spectrum resampling.
    """
    if not math.isfinite(degrees) or abs(degrees) > 360:
        raise AngleOutOfRange(f"rotation must be finite and within [-360, 360], got {degrees}")
    k = int(round(degrees / 90.0))
    residual = degrees - 90.0 * k
    out = img
    for _ in range(k % 4):
        out = rotate90(out, CCW)
    if residual == 0:
        return out
    return _warp(out, rotation_map(residual))


def shear(img: DctImage, axis: str, factor: float) -> DctImage:
    """Shear about the image centre: ``x' = x + factor * y`` for the horizontal axis."""
    if not math.isfinite(factor) or abs(factor) > 1:
        raise AngleOutOfRange(f"shear factor must be within [-1, 1], got {factor}")
    A = shear_map(axis, factor)
    if factor == 0:
        return img
    return _warp(img, A)
