"""RandAugment-style policy driver over the coefficient-domain ops.

A policy is a list of ``(op, magnitude)`` pairs with ``m`` in [0, 30]. For
each image ``num_ops_per_image`` entries are drawn with replacement and
turned into a *plan*: concrete keyword arguments for each op, signs and
positions included. Plans are plain data, so the same plan can be replayed
on the pixel path for comparisons.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..bitstream import DctImage
from ..errors import UnknownOp
from . import geometric, photometric, resize

MAX_MAGNITUDE = 30.0

DCT_OPS: dict[str, Callable[..., DctImage]] = {
    "identity": lambda img: img,
    "brightness": photometric.brightness,
    "contrast": photometric.contrast,
    "color": photometric.color,
    "equalize": photometric.equalize,
    "auto_contrast": photometric.auto_contrast,
    "auto_saturation": photometric.auto_saturation,
    "sharpness": photometric.sharpness,
    "midfreq_aug": photometric.midfreq_aug,
    "freq_enhance": photometric.freq_enhance,
    "invert": photometric.invert,
    "posterize": photometric.posterize,
    "solarize": photometric.solarize,
    "solarize_add": photometric.solarize_add,
    "grayscale": photometric.grayscale,
    "chroma_drop": photometric.chroma_drop,
    "translate": geometric.translate,
    "cutout": geometric.cutout,
    "flip": geometric.flip,
    "rotate90": geometric.rotate90,
    "rotate": geometric.rotate,
    "shear": geometric.shear,
    "resize": resize.resize,
}

#: RandAugment subsets used for the JPEG models
JPEG_TI_SUBSET = (
    "Brightness", "Contrast", "Color", "AutoContrast", "AutoSaturation", "MidfreqAug",
    "Posterize", "SolarizeAdd", "Grayscale", "ChromaDrop", "Translate", "Cutout", "Rotate90",
)
JPEG_S_SUBSET = (
    "Brightness", "Contrast", "Color", "AutoContrast", "AutoSaturation", "MidfreqAug",
    "Sharpness", "Posterize", "Grayscale", "ChromaDrop", "Translate", "Cutout", "Rotate90",
)
RGB_SUBSET = (
    "Brightness", "Contrast", "Equalize", "Color", "AutoContrast", "Sharpness", "Invert",
    "Posterize", "Solarize", "SolarizeAdd", "Translate", "Cutout", "Rotate", "Shear",
)


def canonical_name(name: str) -> str:
    """``"AutoContrast"`` / ``"auto-contrast"`` / ``"auto_contrast"`` -> ``"auto_contrast"``."""
    snake = re.sub(r"(?<=[a-z])(?=[A-Z0-9])", "_", name.strip()).replace("-", "_").lower()
    snake = snake.replace("rotate_90", "rotate90")
    if snake not in DCT_OPS:
        raise UnknownOp(f"unknown augmentation {name!r}")
    return snake


def _sign(rng: np.random.Generator) -> float:
    return -1.0 if rng.random() < 0.5 else 1.0


def _even(x: float, f: int) -> int:
    return int(f * round(x / f))


# Each entry maps (m, rng, grid rows, grid cols, chroma factor) to op kwargs.
MagnitudeFn = Callable[[float, np.random.Generator, int, int, int], dict]


def _translate(m, rng, rows, cols, f):
    axis = rng.integers(2)
    span = (cols, rows)[axis]
    d = _even(_sign(rng) * 0.45 * span * m / MAX_MAGNITUDE, f)
    return {"dx": d, "dy": 0} if axis == 0 else {"dx": 0, "dy": d}


def _cutout(m, rng, rows, cols, f):
    size = min(_even(0.4 * min(rows, cols) * m / MAX_MAGNITUDE, f), rows - rows % f, cols - cols % f)
    y0 = _even(rng.uniform(0, rows - size), f) if rows > size else 0
    x0 = _even(rng.uniform(0, cols - size), f) if cols > size else 0
    y0 = min(y0, rows - size - (rows - size) % f)
    x0 = min(x0, cols - size - (cols - size) % f)
    return {"x0": x0, "y0": y0, "w": size, "h": size}


MAGNITUDE_MAP: dict[str, MagnitudeFn] = {
    "identity": lambda m, rng, *_: {},
    "brightness": lambda m, rng, *_: {"t": _sign(rng) * 0.1 * m},
    "contrast": lambda m, rng, *_: {"t": max(0.0, 1.0 + _sign(rng) * 0.03 * m)},
    "color": lambda m, rng, *_: {"t": max(0.0, 1.0 + _sign(rng) * 0.03 * m)},
    "freq_enhance": lambda m, rng, *_: {"t": max(0.0, 1.0 + _sign(rng) * 0.03 * m)},
    "sharpness": lambda m, rng, *_: {"t": _sign(rng) * 0.03 * m},
    "midfreq_aug": lambda m, rng, *_: {"t": _sign(rng) * 0.03 * m},
    "equalize": lambda m, rng, *_: {},
    "auto_contrast": lambda m, rng, *_: {},
    "auto_saturation": lambda m, rng, *_: {},
    "invert": lambda m, rng, *_: {},
    "grayscale": lambda m, rng, *_: {},
    "posterize": lambda m, rng, *_: {"bits": int(8 - round(4 * m / MAX_MAGNITUDE))},
    # thresholds on the DC scale: 8 * (pixel threshold - 128)
    "solarize": lambda m, rng, *_: {"threshold": 8.0 * (128.0 - 256.0 * m / MAX_MAGNITUDE)},
    "solarize_add": lambda m, rng, *_: {"threshold": 0.0, "addend": 8.0 * 110.0 * m / MAX_MAGNITUDE},
    "chroma_drop": lambda m, rng, *_: {"channel": "cb" if rng.random() < 0.5 else "cr"},
    "translate": _translate,
    "cutout": _cutout,
    "flip": lambda m, rng, *_: {"axis": "horizontal" if rng.random() < 0.5 else "vertical"},
    "rotate90": lambda m, rng, *_: {"direction": "cw" if rng.random() < 0.5 else "ccw"},
    "rotate": lambda m, rng, *_: {"degrees": _sign(rng) * m},
    "shear": lambda m, rng, *_: {
        "axis": "horizontal" if rng.random() < 0.5 else "vertical",
        "factor": _sign(rng) * 0.01 * m,
    },
}


@dataclass
class AugmentPolicy:
    ops: list[tuple[str, float]]
    num_ops_per_image: int = 2
    seed: int = 0
    magnitude_map: dict[str, MagnitudeFn] = field(default_factory=lambda: dict(MAGNITUDE_MAP))

    def __post_init__(self):
        ops = []
        for name, m in self.ops:
            if not 0 <= m <= MAX_MAGNITUDE:
                raise ValueError(f"magnitude for {name!r} must be in [0, {MAX_MAGNITUDE:g}], got {m}")
            name = canonical_name(name)
            if name not in self.magnitude_map:
                raise UnknownOp(f"{name!r} has no magnitude mapping and cannot be used in a policy")
            ops.append((name, float(m)))
        self.ops = ops
        if self.num_ops_per_image < 0:
            raise ValueError("num_ops_per_image must be >= 0")

    @classmethod
    def from_names(cls, names, magnitude: float, **kw) -> AugmentPolicy:
        return cls([(n, magnitude) for n in names], **kw)

    @classmethod
    def from_dict(cls, d: dict) -> AugmentPolicy:
        return cls(
            [(o["name"], o.get("magnitude", 10.0)) for o in d.get("ops", [])],
            num_ops_per_image=int(d.get("num_ops", 2)),
            seed=int(d.get("seed", 0)),
        )

    @classmethod
    def from_json(cls, text: str) -> AugmentPolicy:
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return {
            "ops": [{"name": n, "magnitude": m} for n, m in self.ops],
            "num_ops": self.num_ops_per_image,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def __reduce__(self):
        # the default map holds lambdas; ship only the fields so worker processes can rebuild it
        if self.magnitude_map == MAGNITUDE_MAP:
            return (type(self), (list(self.ops), self.num_ops_per_image, self.seed))
        return (type(self), (list(self.ops), self.num_ops_per_image, self.seed, self.magnitude_map))


def sample_plan(
    policy: AugmentPolicy, grid_shape: tuple[int, int], chroma_factor: int = 2,
    rng: np.random.Generator | None = None,
) -> list[tuple[str, dict]]:
    """Draw ops and concrete parameters; uses ``policy.seed`` unless ``rng`` is given."""
    rng = np.random.default_rng(policy.seed) if rng is None else rng
    if not policy.ops:
        return []
    rows, cols = grid_shape
    plan = []
    for i in rng.integers(0, len(policy.ops), size=policy.num_ops_per_image):
        name, m = policy.ops[int(i)]
        plan.append((name, policy.magnitude_map[name](m, rng, rows, cols, chroma_factor)))
    return plan


def apply_plan(img: DctImage, plan: list[tuple[str, dict]]) -> DctImage:
    for name, params in plan:
        try:
            fn = DCT_OPS[name]
        except KeyError:
            raise UnknownOp(f"unknown augmentation {name!r}") from None
        img = fn(img, **params)
    return img


def apply_policy(img: DctImage, policy: AugmentPolicy, rng: np.random.Generator | None = None) -> DctImage:
    """Sample ``num_ops_per_image`` ops from ``policy`` and apply them in order."""
    return apply_plan(img, sample_plan(policy, img.grid_shape, img.chroma_factor, rng))
