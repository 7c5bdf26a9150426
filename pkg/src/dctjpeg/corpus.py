"""Deterministic JPEG test corpora built from the images bundled with scikit-image.

Everything is encoded in memory with Pillow (libjpeg), so the corpus is
reproducible from a seed without downloads.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from PIL import Image
from skimage import data as skdata

_COLOR = ("astronaut", "chelsea", "coffee", "rocket", "immunohistochemistry",
          "hubble_deep_field", "retina", "colorwheel", "logo", "stereo_motorcycle")
_GRAY = ("camera", "moon", "coins", "grass", "gravel", "brick", "cell", "page", "text")

SUBSAMPLING = {"4:4:4": 0, "4:2:0": 2}


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    data: bytes
    subsampling: str
    quality: int
    width: int
    height: int


def _tint(gray: np.ndarray, seed: int) -> np.ndarray:
    # give grayscale sources some chroma so every plane carries signal
    rng = np.random.default_rng(seed)
    lo, hi = rng.uniform(0, 255, 3), rng.uniform(0, 255, 3)
    g = gray.astype(np.float64)[..., None] / 255.0
    return np.clip(lo + (hi - lo) * g, 0, 255).astype(np.uint8)


@lru_cache(maxsize=1)
def source_images() -> dict[str, np.ndarray]:
    out = {}
    for i, name in enumerate(_COLOR + _GRAY):
        img = getattr(skdata, name)()
        if isinstance(img, tuple):
            img = img[0]
        if img.ndim == 2:
            img = _tint(img, i)
        out[name] = np.ascontiguousarray(img[..., :3])
    # smooth synthetic content: gradients and a colour checkerboard
    yy, xx = np.mgrid[0:384, 0:384] / 383.0
    out["gradient"] = (np.stack([xx, yy, 1 - xx * yy], -1) * 255).astype(np.uint8)
    checker = ((np.arange(384)[:, None] // 24 + np.arange(384)[None, :] // 24) % 2).astype(bool)
    out["checker"] = np.where(checker[..., None], [230, 40, 60], [20, 200, 220]).astype(np.uint8)
    return out


def encode(rgb: np.ndarray, quality: int = 75, subsampling: str = "4:2:0", **kw) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(rgb, "RGB").save(
        buf, "JPEG", quality=quality, subsampling=SUBSAMPLING[subsampling], **kw
    )
    return buf.getvalue()


def _window(src: np.ndarray, rng: np.random.Generator, w: int, h: int) -> np.ndarray:
    H, W = src.shape[:2]
    if w > W or h > H:
        scale = max(w / W, h / H)
        src = np.asarray(Image.fromarray(src).resize((int(np.ceil(W * scale)), int(np.ceil(H * scale))), Image.BILINEAR))
        H, W = src.shape[:2]
    y0 = int(rng.integers(0, H - h + 1))
    x0 = int(rng.integers(0, W - w + 1))
    return src[y0 : y0 + h, x0 : x0 + w]


def make_corpus(n: int = 120, seed: int = 0) -> list[CorpusEntry]:
    """Mixed baseline corpus: both subsamplings, qualities 20-100, varied sizes.

    Most sizes are MCU multiples; every fourth image has an odd size and every
    fifth uses restart markers.
    """
    rng = np.random.default_rng(seed)
    sources = source_images()
    names = sorted(sources)
    out = []
    for i in range(n):
        src_name = names[i % len(names)]
        sub = ("4:2:0", "4:4:4")[i % 2]
        quality = int(rng.choice([20, 50, 75, 90, 95, 100]))
        if i % 4 == 3:
            w, h = int(rng.integers(9, 300)), int(rng.integers(9, 300))
        else:
            w, h = 16 * int(rng.integers(2, 25)), 16 * int(rng.integers(2, 25))
        kw = {"optimize": bool(i % 3 == 0)}
        if i % 5 == 4:
            kw["restart_marker_blocks"] = int(rng.integers(1, 8))
        pixels = _window(sources[src_name], rng, w, h)
        out.append(CorpusEntry(f"{i:04d}_{src_name}_{sub.replace(':', '')}_q{quality}",
                               encode(pixels, quality, sub, **kw), sub, quality, w, h))
    return out


def make_square_corpus(n: int = 1000, size: int = 512, seed: int = 0, quality: int = 90) -> list[CorpusEntry]:
    """``n`` 4:2:0 images of ``size x size`` (random crops and rescales of the sources)."""
    rng = np.random.default_rng(seed)
    sources = source_images()
    names = sorted(sources)
    out = []
    for i in range(n):
        src = sources[names[i % len(names)]]
        s = int(rng.integers(size // 2, max(size // 2 + 1, min(src.shape[:2]) + 1)))
        crop = _window(src, rng, s, s)
        pixels = np.asarray(Image.fromarray(crop).resize((size, size), Image.BILINEAR))
        if rng.random() < 0.5:
            pixels = pixels[:, ::-1]
        out.append(CorpusEntry(f"sq{i:04d}", encode(np.ascontiguousarray(pixels), quality, "4:2:0"),
                               "4:2:0", quality, size, size))
    return out


def write_corpus(entries: list[CorpusEntry], directory: str | Path) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for e in entries:
        p = directory / f"{e.name}.jpg"
        p.write_bytes(e.data)
        paths.append(p)
    return paths


def regression_images(n: int = 8) -> list[tuple[str, bytes]]:
    """Fixed images for recorded-value regression checks: a 256x256 astronaut crop plus ``n`` corpus images."""
    crop = np.ascontiguousarray(source_images()["astronaut"][:256, 96:352])
    return [("astronaut256", encode(crop, 90, "4:2:0"))] + [(e.name, e.data) for e in make_corpus(120, seed=0)[:n]]
