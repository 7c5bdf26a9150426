"""Reference full decoder, pixel-domain augmentations and quality metrics.

Used only to check the coefficient-domain code: ``full_decode`` runs inverse
DCT, level shift, chroma replication and YCbCr to RGB conversion; the RGB ops
are the pixel-space counterparts of ``dctjpeg.augment``; ``compare`` scores
two rasters with PSNR and SSIM.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .bitstream import DctImage
from .errors import SizeMismatch, UnknownOp
from .transform import dct_basis


@dataclass(eq=False)
class RgbImage:
    """Interleaved 8-bit RGB raster, ``data.shape == (height, width, 3)``."""

    data: np.ndarray

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.uint8)
        if self.data.ndim != 3 or self.data.shape[2] != 3:
            raise SizeMismatch(f"expected (H, W, 3) samples, got {self.data.shape}")

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    def __eq__(self, other):
        if not isinstance(other, RgbImage):
            return NotImplemented
        return np.array_equal(self.data, other.data)


@dataclass
class YccImage:
    """Full-resolution float YCbCr planes (level-shifted, clamped to [0, 255])."""

    y: np.ndarray
    cb: np.ndarray
    cr: np.ndarray


@dataclass(frozen=True)
class QualityReport:
    psnr: float
    ssim: float
    max_abs_pixel_diff: int

    def to_dict(self) -> dict:
        return {
            "psnr": self.psnr if math.isfinite(self.psnr) else "inf",
            "ssim": self.ssim,
            "max_abs_pixel_diff": self.max_abs_pixel_diff,
        }


def round_half_away(x: np.ndarray) -> np.ndarray:
    r = np.abs(x)
    r += 0.5
    np.floor(r, out=r)
    return np.copysign(r, x, out=r)


def _to_pixels(plane: np.ndarray) -> np.ndarray:
    """Inverse DCT every block of a ``(rows, cols, b, b)`` plane into a raster."""
    rows, cols, b, _ = plane.shape
    T = dct_basis(b).T
    px = T.T @ plane.astype(np.float64) @ T
    return px.transpose(0, 2, 1, 3).reshape(rows * b, cols * b)


def _level(px: np.ndarray) -> np.ndarray:
    # integer coefficients often land exactly on .5; snap float noise first so
    # mathematically equal blocks always round the same way
    return np.clip(round_half_away(np.round(px, 6) + 128.0), 0, 255)


def decode_ycc(img: DctImage, crop: bool = True) -> YccImage:
    """Inverse DCT, level shift, clamp and replicate chroma to luma resolution."""
    y = _level(_to_pixels(img.y_plane))
    f = img.y_plane.shape[0] * img.block_size // (img.cb_plane.shape[0] * img.cb_plane.shape[-1])
    chroma = []
    for plane in (img.cb_plane, img.cr_plane):
        c = _level(_to_pixels(plane))
        if f > 1:
            c = np.repeat(np.repeat(c, f, axis=0), f, axis=1)
        chroma.append(c[: y.shape[0], : y.shape[1]])
    if crop:
        h, w = img.logical_height, img.logical_width
        y, chroma = y[:h, :w], [c[:h, :w] for c in chroma]
    return YccImage(y, chroma[0], chroma[1])


def ycc_to_rgb(y: np.ndarray, cb: np.ndarray, cr: np.ndarray) -> np.ndarray:
    cb = cb - 128.0
    cr = cr - 128.0
    rgb = np.empty(y.shape + (3,))
    rgb[..., 0] = y + 1.402 * cr
    rgb[..., 1] = y - 0.344136 * cb - 0.714136 * cr
    rgb[..., 2] = y + 1.772 * cb
    rgb = round_half_away(np.round(rgb, 6, out=rgb))
    return np.clip(rgb, 0, 255, out=rgb).astype(np.uint8)


def rgb_to_ycc(rgb: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Float JFIF forward conversion (no rounding)."""
    r, g, b = (rgb[..., i].astype(np.float64) for i in range(3))
    y = 0.299 * r + 0.587 * g + 0.114 * b
    cb = -0.168736 * r - 0.331264 * g + 0.5 * b + 128.0
    cr = 0.5 * r - 0.418688 * g - 0.081312 * b + 128.0
    return y, cb, cr


def full_decode(img: DctImage, crop: bool = True) -> RgbImage:
    """Complete the decode: pixels of the logical area (or the padded grid)."""
    ycc = decode_ycc(img, crop=crop)
    return RgbImage(ycc_to_rgb(ycc.y, ycc.cb, ycc.cr))


# -- metrics -----------------------------------------------------------------


def psnr(a: np.ndarray, b: np.ndarray, peak: float = 255.0) -> float:
    mse = np.mean((a.astype(np.float64) - b.astype(np.float64)) ** 2)
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def _box_mean(x: np.ndarray, win: int) -> np.ndarray:
    # mean over every win x win window fully inside x
    c = np.pad(x, ((1, 0), (1, 0))).cumsum(0).cumsum(1)
    s = c[win:, win:] - c[:-win, win:] - c[win:, :-win] + c[:-win, :-win]
    return s / (win * win)


def ssim(a: np.ndarray, b: np.ndarray, win: int = 8, data_range: float = 255.0) -> float:
    """Mean SSIM over sliding ``win x win`` uniform windows (population statistics)."""
    a = a.astype(np.float64)
    b = b.astype(np.float64)
    if a.shape != b.shape:
        raise SizeMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    if min(a.shape) < win:
        win = min(a.shape)
    c1 = (0.01 * data_range) ** 2
    c2 = (0.03 * data_range) ** 2
    ma, mb = _box_mean(a, win), _box_mean(b, win)
    va = _box_mean(a * a, win) - ma * ma
    vb = _box_mean(b * b, win) - mb * mb
    cov = _box_mean(a * b, win) - ma * mb
    s = ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2))
    return float(s.mean())


def luma(rgb: np.ndarray) -> np.ndarray:
    return rgb_to_ycc(rgb)[0]


def compare(a: RgbImage, b: RgbImage) -> QualityReport:
    """PSNR over RGB samples, SSIM on luma, and the largest per-sample difference."""
    if a.data.shape != b.data.shape:
        raise SizeMismatch(f"image sizes differ: {a.data.shape} vs {b.data.shape}")
    if np.array_equal(a.data, b.data):
        return QualityReport(math.inf, 1.0, 0)
    diff = np.abs(a.data.astype(np.int16) - b.data.astype(np.int16))
    return QualityReport(psnr(a.data, b.data), ssim(luma(a.data), luma(b.data)), int(diff.max()))


# -- PPM ---------------------------------------------------------------------


def write_ppm(img: RgbImage) -> bytes:
    return b"P6\n%d %d\n255\n" % (img.width, img.height) + img.data.tobytes()


def read_ppm(data: bytes) -> RgbImage:
    fields = []
    pos = 0
    while len(fields) < 4:
        while data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        end = pos
        while not data[end : end + 1].isspace():
            end += 1
        fields.append(data[pos:end])
        pos = end
    if fields[0] != b"P6" or int(fields[3]) != 255:
        raise SizeMismatch("only 8-bit binary PPM (P6) is supported")
    w, h = int(fields[1]), int(fields[2])
    raw = np.frombuffer(data[pos + 1 : pos + 1 + 3 * w * h], dtype=np.uint8)
    return RgbImage(raw.reshape(h, w, 3))


# -- pixel-domain augmentations ------------------------------------------------
# Geometric ops take block units (8 px) so they line up with the DCT versions.
# Photometric ops act on the JFIF luma/chroma of the raster, the same channel
# split the coefficient ops use.


def _ycc_op(rgb: np.ndarray, fy=None, fc=None) -> np.ndarray:
    y, cb, cr = rgb_to_ycc(rgb)
    if fy is not None:
        y = fy(y)
    if fc is not None:
        cb, cr = fc(cb, cr)
    return ycc_to_rgb(y, cb, cr)


def _pil(rgb: np.ndarray) -> Image.Image:
    return Image.fromarray(rgb, "RGB")


def _translate(x, dx=0, dy=0):
    out = np.full_like(x, 128)
    h, w = x.shape[:2]
    px, py = 8 * dx, 8 * dy
    ys, yd = (slice(0, h - py), slice(py, h)) if py >= 0 else (slice(-py, h), slice(0, h + py))
    xs, xd = (slice(0, w - px), slice(px, w)) if px >= 0 else (slice(-px, w), slice(0, w + px))
    out[yd, xd] = x[ys, xs]
    return out


def _cutout(x, x0, y0, w, h):
    out = x.copy()
    out[8 * y0 : 8 * (y0 + h), 8 * x0 : 8 * (x0 + w)] = 128
    return out


def _rotate90(x, direction="cw"):
    return np.rot90(x, -1 if direction == "cw" else 1).copy()


def _flip(x, axis="horizontal"):
    return (x[:, ::-1] if axis == "horizontal" else x[::-1]).copy()


def _equalize(y):
    yi = np.clip(round_half_away(y), 0, 255).astype(np.int64)
    hist = np.bincount(yi.ravel(), minlength=256)
    cdf = hist.cumsum()
    nz = cdf[cdf > 0]
    if nz[0] == cdf[-1]:
        return y
    lut = np.floor((cdf - nz[0]) / (cdf[-1] - nz[0]) * 255.0 + 0.5).clip(0, 255)
    return lut[yi]


def _auto_contrast(y):
    lo, hi = y.min(), y.max()
    return y if hi == lo else (y - lo) / (hi - lo) * 255.0


def _auto_saturation(cb, cr):
    lo = min(cb.min(), cr.min())
    hi = max(cb.max(), cr.max())
    if hi == lo:
        return cb, cr
    return tuple((c - lo) / (hi - lo) * 255.0 for c in (cb, cr))


def _box(y, k):
    from scipy.ndimage import uniform_filter

    return uniform_filter(y, size=k, mode="reflect")


def _brightness(rgb, t):
    y = rgb_to_ycc(rgb)[0]
    shift = t * np.abs(y - 128.0).mean()
    return _ycc_op(rgb, lambda v: v + shift)


def _posterize(y, bits):
    step = 2 ** (8 - bits)
    return np.floor(y / step) * step


def _solarize(y, threshold):
    return np.where(y >= threshold, 255.0 - y, y)


def _solarize_add(y, threshold, addend):
    return np.where(y < threshold, y + addend, y)


def _affine(rgb, matrix):
    h, w = rgb.shape[:2]
    cx, cy = w / 2.0, h / 2.0
    a, b, c, d = matrix
    # PIL wants the output->input map
    coeffs = (a, b, cx - a * cx - b * cy, c, d, cy - c * cx - d * cy)
    out = _pil(rgb).transform((w, h), Image.AFFINE, coeffs, Image.BILINEAR, fillcolor=(128, 128, 128))
    return np.asarray(out)


def _rotate(rgb, degrees):
    # positive angles turn the content counter-clockwise
    th = math.radians(degrees)
    c, s = math.cos(th), math.sin(th)
    return _affine(rgb, (c, -s, s, c))


def _shear(rgb, axis, factor):
    m = (1.0, -factor, 0.0, 1.0) if axis == "horizontal" else (1.0, 0.0, -factor, 1.0)
    return _affine(rgb, m)


def _resize(rgb, scale=None, out_w=None, out_h=None):
    h, w = rgb.shape[:2]
    if scale is not None:
        out_w, out_h = int(round(w * scale)), int(round(h * scale))
    return np.asarray(_pil(rgb).resize((out_w, out_h), Image.BILINEAR))


def _chroma_drop(rgb, channel):
    def drop(cb, cr):
        return (np.full_like(cb, 128.0), cr) if channel == "cb" else (cb, np.full_like(cr, 128.0))

    return _ycc_op(rgb, fc=drop)


RGB_OPS = {
    "none": lambda x: x.copy(),
    "flip": _flip,
    "rotate90": _rotate90,
    "translate": _translate,
    "cutout": _cutout,
    "grayscale": lambda x: _ycc_op(x, fc=lambda cb, cr: (np.full_like(cb, 128.0), np.full_like(cr, 128.0))),
    "chroma_drop": _chroma_drop,
    "invert": lambda x: 255 - x,
    "brightness": _brightness,
    "contrast": lambda x, t: _ycc_op(x, lambda y: 128.0 + t * (y - 128.0)),
    "color": lambda x, t: _ycc_op(x, fc=lambda cb, cr: (128.0 + t * (cb - 128.0), 128.0 + t * (cr - 128.0))),
    "equalize": lambda x: _ycc_op(x, _equalize),
    "auto_contrast": lambda x: _ycc_op(x, _auto_contrast),
    "auto_saturation": lambda x: _ycc_op(x, fc=_auto_saturation),
    "posterize": lambda x, bits: _ycc_op(x, lambda y: _posterize(y, bits)),
    "solarize": lambda x, threshold: _ycc_op(x, lambda y: _solarize(y, threshold)),
    "solarize_add": lambda x, threshold, addend: _ycc_op(x, lambda y: _solarize_add(y, threshold, addend)),
    "sharpness": lambda x, t: _ycc_op(x, lambda y: y + t * (y - _box(y, 3))),
    "freq_enhance": lambda x, t: _ycc_op(x, lambda y: _box(y, 8) + t * (y - _box(y, 8))),
    "midfreq_aug": lambda x, t: _ycc_op(x, lambda y: y + t * (_box(y, 2) - _box(y, 8))),
    "resize": _resize,
    "rotate": _rotate,
    "shear": _shear,
}


def rgb_augment(img: RgbImage, op: str, **params) -> RgbImage:
    """Pixel-domain counterpart of the coefficient op ``op``."""
    try:
        fn = RGB_OPS[op]
    except KeyError:
        raise UnknownOp(f"no RGB counterpart for op {op!r}") from None
    return RgbImage(fn(img.data, **params))
