"""Two-path comparisons: coefficient op then decode, versus decode then pixel op.

Both paths start from the padded block grid so geometric ops see the same
raster. Op parameters are given in coefficient-domain units; thresholds and
addends on the DC scale are divided by 8 for the pixel path.
"""

from __future__ import annotations

from .augment import DCT_OPS
from .bitstream import DctImage
from .errors import UnknownOp
from .oracle import QualityReport, RgbImage, compare, full_decode, rgb_augment

#: ops whose decoded result must match the pixel op to within one level
EXACT_PARITY = ("flip", "rotate90", "translate", "cutout", "grayscale")

#: parameters used when reporting every op side by side
DEFAULT_PARAMS: dict[str, dict] = {
    "none": {},
    "brightness": {"t": 0.5},
    "contrast": {"t": 1.3},
    "color": {"t": 1.5},
    "equalize": {},
    "auto_contrast": {},
    "auto_saturation": {},
    "sharpness": {"t": 0.5},
    "midfreq_aug": {"t": 0.5},
    "freq_enhance": {"t": 1.5},
    "invert": {},
    "posterize": {"bits": 4},
    "solarize": {"threshold": 8.0 * (192 - 128)},
    "solarize_add": {"threshold": 0.0, "addend": 8.0 * 40},
    "grayscale": {},
    "chroma_drop": {"channel": "cb"},
    "translate": {"dx": 4, "dy": 2},
    "cutout": {"x0": 4, "y0": 4, "w": 8, "h": 8},
    "flip": {"axis": "horizontal"},
    "rotate90": {"direction": "cw"},
    "resize": {"scale": 2},
    "rotate": {"degrees": 15.0},
    "shear": {"axis": "horizontal", "factor": 0.2},
}


def expose_padding(img: DctImage) -> DctImage:
    return img.with_planes(*img.planes, logical_width=img.padded_width, logical_height=img.padded_height)


def rgb_params(op: str, params: dict) -> dict:
    p = dict(params)
    if op == "solarize":
        p["threshold"] = p["threshold"] / 8.0 + 128.0
    elif op == "solarize_add":
        p["threshold"] = p["threshold"] / 8.0 + 128.0
        p["addend"] = p["addend"] / 8.0
    return p


def _dct_params(op: str, params: dict, img: DctImage) -> dict:
    p = dict(params)
    if op == "resize" and "scale" in p:
        mcu = img.block_size * img.chroma_factor
        s = p.pop("scale")
        p["out_w"] = max(mcu, int(round(img.padded_width * s / mcu)) * mcu)
        p["out_h"] = max(mcu, int(round(img.padded_height * s / mcu)) * mcu)
    return p


def run_paths(img: DctImage, op: str, **params) -> tuple[RgbImage, RgbImage]:
    """Return ``(decode(dct_op(img)), rgb_op(decode(img)))`` for one op."""
    if op != "none" and op not in DCT_OPS:
        raise UnknownOp(f"unknown augmentation {op!r}")
    img = expose_padding(img)
    dparams = _dct_params(op, params, img)
    dct_out = img if op == "none" else DCT_OPS[op](img, **dparams)
    rparams = rgb_params(op, dparams if op == "resize" else params)
    rgb_out = rgb_augment(full_decode(img), op, **rparams)
    return full_decode(dct_out), rgb_out


def compare_op(img: DctImage, op: str, **params) -> QualityReport:
    a, b = run_paths(img, op, **params)
    return compare(a, b)


def compare_table(img: DctImage, ops=None) -> dict[str, dict]:
    """``compare_op`` with ``DEFAULT_PARAMS`` for every op; JSON-ready."""
    out = {}
    for op in ops or DEFAULT_PARAMS:
        params = DEFAULT_PARAMS[op]
        out[op] = {**compare_op(img, op, **params).to_dict(), "params": params}
    return out
