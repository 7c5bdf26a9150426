from __future__ import annotations

import io
import math

import numpy as np
import pytest
from helpers import pixels_to_image
from hypothesis import given, settings
from hypothesis import strategies as st
from PIL import Image
from skimage.metrics import structural_similarity

from dctjpeg.errors import SizeMismatch, UnknownOp
from dctjpeg.oracle import (
    RgbImage, compare, decode_ycc, full_decode, luma, psnr, read_ppm, rgb_augment,
    round_half_away, ssim, write_ppm, ycc_to_rgb,
)


def _pil_ycc(data: bytes) -> np.ndarray:
    im = Image.open(io.BytesIO(data))
    im.draft("YCbCr", im.size)  # stop libjpeg before colour conversion
    assert im.mode == "YCbCr"
    return np.asarray(im).astype(np.int64)


def test_round_half_away():
    x = np.array([-2.5, -1.5, -0.5, 0.5, 1.5, 2.5, 0.49, -0.49])
    assert round_half_away(x).tolist() == [-3, -2, -1, 1, 2, 3, 0, 0]


def test_gray_block_decodes_to_128():
    z = np.full((16, 16), 128.0)
    img = pixels_to_image(z, z[:8, :8], z[:8, :8])
    assert (full_decode(img).data == 128).all()


def test_neutral_colour_point():
    one = np.full((1, 1), 128.0)
    assert ycc_to_rgb(one, one, one).tolist() == [[[128, 128, 128]]]


def test_planes_within_one_of_libjpeg(corpus):
    entries = [e for e in corpus if e.subsampling == "4:4:4"][:20]
    from dctjpeg.bitstream import decode_to_dct

    for e in entries:
        img, _ = decode_to_dct(e.data)
        ycc = decode_ycc(img)
        ref = _pil_ycc(e.data)
        mine = np.stack([ycc.y, ycc.cb, ycc.cr], -1)
        assert np.abs(mine - ref).max() <= 1, e.name


def test_colour_conversion_within_one_of_pillow(rng):
    ycc = rng.integers(0, 256, (64, 64, 3), dtype=np.uint8)
    ref = np.asarray(Image.fromarray(ycc, "YCbCr").convert("RGB")).astype(int)
    mine = ycc_to_rgb(*(ycc[..., i].astype(np.float64) for i in range(3))).astype(int)
    assert np.abs(mine - ref).max() <= 1


def test_chroma_replication(rng):
    y = rng.uniform(0, 255, (16, 16))
    cb = rng.uniform(0, 255, (8, 8))
    img = pixels_to_image(y, cb, np.full((8, 8), 128.0), dtype=np.float64)
    ycc = decode_ycc(img)
    assert np.array_equal(ycc.cb[::2, ::2], ycc.cb[1::2, 1::2])
    assert np.abs(ycc.cb[::2, ::2] - cb).max() <= 0.5 + 1e-9


class TestMetrics:
    def test_identical(self, rng):
        a = RgbImage(rng.integers(0, 256, (16, 16, 3), dtype=np.uint8))
        r = compare(a, a)
        assert (r.psnr, r.ssim, r.max_abs_pixel_diff) == (math.inf, 1.0, 0)
        assert r.to_dict()["psnr"] == "inf"

    def test_psnr_hand_value(self):
        a = np.zeros((16, 16, 3), np.uint8)
        b = a.copy()
        b[3, 4, 1] = 255
        expected = 10 * math.log10(255**2 / (255**2 / 768))
        assert psnr(a, b) == pytest.approx(expected)
        assert compare(RgbImage(a), RgbImage(b)).max_abs_pixel_diff == 255

    def test_psnr_constant_offset(self):
        a = np.full((8, 8, 3), 100, np.uint8)
        assert psnr(a, a + 5) == pytest.approx(10 * math.log10(255**2 / 25))

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_ssim_matches_skimage(self, seed):
        r = np.random.default_rng(seed)
        a = r.uniform(0, 255, (40, 48))
        b = np.clip(a + r.normal(0, 20, a.shape), 0, 255)
        ref = structural_similarity(a, b, win_size=7, data_range=255, use_sample_covariance=False)
        assert ssim(a, b, win=7) == pytest.approx(ref, abs=1e-10)

    def test_ssim_symmetric(self, rng):
        a = RgbImage(rng.integers(0, 256, (24, 24, 3), dtype=np.uint8))
        b = RgbImage(rng.integers(0, 256, (24, 24, 3), dtype=np.uint8))
        assert compare(a, b).ssim == pytest.approx(compare(b, a).ssim, abs=1e-12)

    def test_size_mismatch(self, rng):
        a = RgbImage(np.zeros((8, 8, 3), np.uint8))
        with pytest.raises(SizeMismatch):
            compare(a, RgbImage(np.zeros((8, 16, 3), np.uint8)))

    def test_luma_weights(self):
        px = np.array([[[255, 0, 0], [0, 255, 0], [0, 0, 255]]], np.uint8)
        assert luma(px).ravel() == pytest.approx([0.299 * 255, 0.587 * 255, 0.114 * 255])


def test_ppm_round_trip(rng):
    img = RgbImage(rng.integers(0, 256, (7, 11, 3), dtype=np.uint8))
    data = write_ppm(img)
    assert data.startswith(b"P6\n11 7\n255\n")
    assert read_ppm(data) == img
    assert np.array_equal(np.asarray(Image.open(io.BytesIO(data))), img.data)


class TestRgbOps:
    @pytest.fixture
    def img(self, rng):
        return RgbImage(rng.integers(0, 256, (32, 48, 3), dtype=np.uint8))

    def test_flip_twice(self, img):
        for axis in ("horizontal", "vertical"):
            assert rgb_augment(rgb_augment(img, "flip", axis=axis), "flip", axis=axis) == img

    def test_rotate90_round_trip(self, img):
        assert rgb_augment(rgb_augment(img, "rotate90", direction="cw"), "rotate90", direction="ccw") == img

    def test_grayscale_keeps_neutral_image(self):
        g = np.repeat(np.arange(0, 256, 4, dtype=np.uint8)[None, :, None], 3, axis=2)
        img = RgbImage(np.repeat(g, 8, axis=0))
        assert rgb_augment(img, "grayscale") == img

    def test_resize_constant(self):
        img = RgbImage(np.full((16, 16, 3), 77, np.uint8))
        out = rgb_augment(img, "resize", scale=2)
        assert out.data.shape == (32, 32, 3) and (out.data == 77).all()

    def test_invert(self, img):
        assert np.array_equal(rgb_augment(img, "invert").data, 255 - img.data)

    def test_unknown(self, img):
        with pytest.raises(UnknownOp):
            rgb_augment(img, "warp_drive")


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 255))
def test_neutral_chroma_is_gray(y):
    mid = np.full((1, 1), 128.0)
    assert ycc_to_rgb(np.full((1, 1), float(y)), mid, mid).ravel().tolist() == [y, y, y]
