from __future__ import annotations

import numpy as np
import pytest
from helpers import random_image
from hypothesis import given, settings
from hypothesis import strategies as st

from dctjpeg.embed import (
    CONCATENATED, GROUPED, PATCH_SIZES, SEPARATE, EmbedConfig, decompose_for_small_patches,
    embed_flops, identity_weights, layout_concatenated, layout_grouped, layout_separate, make_weights,
    project, reassemble, recompose_blocks,
)
from dctjpeg.errors import BadPatchSize, DimMismatch, ShapeMismatch
from dctjpeg.oracle import full_decode
from dctjpeg.transform import combine_blocks


@pytest.fixture(scope="module")
def img224():
    return random_image(np.random.default_rng(21), 28, 28)


@pytest.fixture(scope="module")
def img256():
    return random_image(np.random.default_rng(22), 32, 32)


def coefficients(img):
    return np.sort(np.concatenate([p.ravel() for p in img.planes]).astype(np.float64))


def values(tokens):
    parts = tokens if isinstance(tokens, tuple) else (tokens,)
    return np.sort(np.concatenate([t.data.ravel() for t in parts]).astype(np.float64))


class TestConfig:
    def test_blocks_per_patch(self):
        assert EmbedConfig(SEPARATE, 16, 192).blocks_per_patch == 6
        assert EmbedConfig(GROUPED, 16, 192).token_dim == 384
        assert EmbedConfig(GROUPED, 4, 192).block_size == 2

    def test_invalid(self):
        with pytest.raises(BadPatchSize):
            EmbedConfig(GROUPED, 12, 192)
        with pytest.raises(DimMismatch):
            EmbedConfig(SEPARATE, 16, 100)
        with pytest.raises(DimMismatch):
            EmbedConfig(CONCATENATED, 16, 200)
        with pytest.raises(ValueError):
            EmbedConfig("stacked", 16, 192)


class TestShapes:
    def test_grouped_224(self, img224):
        t = layout_grouped(img224, EmbedConfig(GROUPED, 16, 192))
        assert t.data.shape == (196, 384)
        assert (t.token_count, t.token_dim) == (196, 384)

    def test_separate_224(self, img224):
        t = layout_separate(img224, EmbedConfig(SEPARATE, 16, 192))
        assert t.data.shape == (196, 6, 64)

    def test_concatenated_224(self, img224):
        luma, chroma = layout_concatenated(img224, EmbedConfig(CONCATENATED, 16, 384))
        assert luma.data.shape == (196, 256) and chroma.data.shape == (98, 256)
        assert luma.token_count + chroma.token_count == 3 * 196 // 2
        emb = project(luma, EmbedConfig(CONCATENATED, 16, 384))
        assert emb.data.shape == (196, 256)

    def test_token_order_is_y_cb_cr(self, img224):
        t = layout_separate(img224, EmbedConfig(SEPARATE, 16, 192))
        first = t.data[0]
        assert np.array_equal(first[0], img224.y_plane[0, 0].ravel())
        assert np.array_equal(first[1], img224.y_plane[0, 1].ravel())
        assert np.array_equal(first[2], img224.y_plane[1, 0].ravel())
        assert np.array_equal(first[4], img224.cb_plane[0, 0].ravel())
        assert np.array_equal(first[5], img224.cr_plane[0, 0].ravel())

    def test_misfit_grid(self):
        odd = random_image(np.random.default_rng(0), 6, 6)
        with pytest.raises(ShapeMismatch):
            layout_grouped(odd, EmbedConfig(GROUPED, 32, 192))


@pytest.mark.parametrize("p", PATCH_SIZES)
@pytest.mark.parametrize("strategy", [GROUPED, SEPARATE, CONCATENATED])
def test_layout_is_a_bijection(img224, img256, p, strategy):
    img = img256 if p == 32 else img224
    dim = 192 if strategy != SEPARATE else 24 * EmbedConfig(SEPARATE, p, 24 * 64).blocks_per_patch
    cfg = EmbedConfig(strategy, p, dim)
    fn = {GROUPED: layout_grouped, SEPARATE: layout_separate, CONCATENATED: layout_concatenated}[strategy]
    tokens = fn(img, cfg)
    parts = tokens if isinstance(tokens, tuple) else (tokens,)
    n = (img.padded_width // p) * (img.padded_height // p)
    assert sum(t.token_count for t in parts) == (3 * n // 2 if strategy == CONCATENATED else n)
    back = recompose_blocks(reassemble(tokens))
    for a, b in zip(back.planes, img.planes):
        assert np.abs(a - b).max() < 1e-9
    if p >= 16:
        # pure gathers: the multiset of values is preserved
        assert np.array_equal(values(tokens), coefficients(img))


@pytest.mark.parametrize("p", [16, 32])
def test_conversion_round_trip(img256, p):
    cfg = EmbedConfig(GROUPED, p, 192, use_sub_block_conversion=True)
    tokens = layout_grouped(img256, cfg)
    back = reassemble(tokens)
    assert np.abs(full_decode(back).data.astype(int) - full_decode(img256).data).max() == 0
    for a, b in zip(back.planes, img256.planes):
        assert np.abs(a - b).max() < 1e-9


def test_conversion_consistency(img224):
    on = layout_grouped(img224, EmbedConfig(GROUPED, 16, 192, True))
    off = layout_grouped(img224, EmbedConfig(GROUPED, 16, 192, False))
    k = 2
    luma_blocks = off.data[:, : k * k * 64].reshape(-1, k, k, 8, 8).astype(np.float64)
    assert np.abs(combine_blocks(luma_blocks).reshape(len(on.data), -1) - on.data[:, :256]).max() < 1e-9
    assert np.array_equal(on.data[:, 256:], off.data[:, 256:])


class TestSmallPatches:
    def test_p4_gives_sixteen_2x2(self, img224):
        d = decompose_for_small_patches(img224, 4)
        assert d.block_size == 2
        assert d.y_plane.shape[:2] == (28 * 4, 28 * 4)
        back = recompose_blocks(d)
        assert np.abs(back.y_plane - img224.y_plane).max() < 1e-9

    def test_p8_gives_four_4x4(self, img224):
        d = decompose_for_small_patches(img224, 8)
        assert d.block_size == 4 and d.cb_plane.shape[:2] == (28, 28)

    def test_dc_of_constant_block_splits_evenly(self):
        img = random_image(np.random.default_rng(1), 2, 2)
        flat = img.with_planes(*(np.where(np.arange(64).reshape(8, 8) == 0, p, 0) for p in img.planes))
        d = decompose_for_small_patches(flat, 4)
        # a DC-only 8x8 block is 16 equal DC-only 2x2 blocks, each DC scaled by 2/8
        sub = d.y_plane[:4, :4]
        assert np.allclose(sub[..., 0, 0], flat.y_plane[0, 0, 0, 0] / 4)
        assert np.abs(sub[..., 1:, :]).max() < 1e-9

    def test_bad_size(self, img224):
        with pytest.raises(BadPatchSize):
            decompose_for_small_patches(img224, 16)


class TestProjection:
    def test_seeded_weights_are_deterministic(self, img224):
        cfg = EmbedConfig(GROUPED, 16, 192)
        t = layout_grouped(img224, cfg)
        a, b = project(t, cfg, 3), project(t, cfg, 3)
        assert a.data.shape == (196, 192)
        assert np.array_equal(a.data, b.data)
        assert not np.array_equal(a.data, project(t, cfg, 4).data)

    @pytest.mark.parametrize("cfg", [
        EmbedConfig(GROUPED, 16, 384),
        EmbedConfig(SEPARATE, 16, 384),
        EmbedConfig(CONCATENATED, 16, 384),
    ])
    def test_identity_weights_reproduce_input(self, img224, cfg):
        fn = {GROUPED: layout_grouped, SEPARATE: layout_separate, CONCATENATED: layout_concatenated}[cfg.strategy]
        tokens = fn(img224, cfg)
        for t in tokens if isinstance(tokens, tuple) else (tokens,):
            out = project(t, cfg, identity_weights(cfg))
            assert np.array_equal(out.data, t.data.reshape(len(t.data), -1).astype(np.float64))

    def test_identity_needs_square(self):
        with pytest.raises(DimMismatch):
            identity_weights(EmbedConfig(GROUPED, 16, 192))

    @settings(max_examples=20, deadline=None)
    @given(i=st.integers(0, 195), j=st.integers(0, 383), delta=st.floats(-50, 50))
    def test_affine_in_each_coefficient(self, img224, i, j, delta):
        cfg = EmbedConfig(GROUPED, 16, 192)
        w = make_weights(cfg, 0)
        t = layout_grouped(img224, cfg)
        base = project(t, cfg, w).data
        t2 = type(t)(t.data.astype(np.float64).copy(), t.layout, t.meta)
        t2.data[i, j] += delta
        diff = project(t2, cfg, w).data - base
        assert np.allclose(diff[i], delta * w.matrices["proj"][j], atol=1e-9)
        assert not np.delete(diff, i, axis=0).any()

    def test_mismatched_weights(self, img224):
        t = layout_grouped(img224, EmbedConfig(GROUPED, 16, 192))
        with pytest.raises(DimMismatch):
            project(t, EmbedConfig(GROUPED, 32, 192), 0)


class TestFlops:
    @pytest.mark.parametrize("E,rgb,dct", [(192, 28.9e6, 16.1e6), (384, 57.8e6, 30.5e6)])
    def test_table_values(self, E, rgb, dct):
        cfg = EmbedConfig(GROUPED, 16, E, use_sub_block_conversion=True)
        assert embed_flops(cfg, 224, "rgb") == pytest.approx(rgb, rel=0.01)
        assert embed_flops(cfg, 224, "dct") == pytest.approx(dct, rel=0.01)

    def test_hand_decomposition(self):
        cfg = EmbedConfig(GROUPED, 16, 192, use_sub_block_conversion=True)
        assert embed_flops(cfg) == 196 * 384 * 192 + 196 * 2 * 16**3
        assert embed_flops(EmbedConfig(GROUPED, 16, 192)) == 196 * 384 * 192

    def test_small_patch_adds_decomposition(self):
        cfg = EmbedConfig(GROUPED, 8, 192)
        assert embed_flops(cfg) == 784 * 96 * 192 + 28 * 28 * 3 // 2 * 2 * 512

    def test_bad_kind(self):
        with pytest.raises(ValueError):
            embed_flops(EmbedConfig(), 224, "yuv")
