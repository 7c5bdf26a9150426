"""Acceptance criteria 1-10, one PASS/FAIL line each (see the terminal summary).

Run alone with ``pytest tests/test_acceptance.py -v -s``.
"""

from __future__ import annotations

import json
import time
from pathlib import Path

import numpy as np
import pytest
from helpers import reference_coefficients

from dctjpeg.augment import (
    DCT_OPS, brightness, color, contrast, flip, freq_enhance, invert, midfreq_aug, resize, rotate,
    rotate90, sharpness, shear,
)
from dctjpeg.bench import COST_MODEL, FULL, MINIMAL, cost_reduction, measure_decode_latency, theoretical_cost
from dctjpeg.bitstream import decode_to_dct
from dctjpeg.cli import main as cli_main
from dctjpeg.corpus import make_square_corpus, regression_images
from dctjpeg.embed import (
    CONCATENATED, GROUPED, PATCH_SIZES, SEPARATE, EmbedConfig, decompose_for_small_patches, embed_flops,
    layout_concatenated, layout_grouped, layout_separate, reassemble, recompose_blocks,
)
from dctjpeg.oracle import full_decode
from dctjpeg.transform import (
    DCT, DFT, combine_blocks, conversion_matrix, dct_basis, dct_forward_8, decompose_blocks, dft_basis,
    subband_resize_block,
)
from dctjpeg.twopath import compare_table, run_paths

BASELINE = Path(__file__).parent / "data" / "compare_baseline.json"


def max_diff(a, b) -> int:
    return int(np.abs(a.data.astype(np.int64) - b.data.astype(np.int64)).max())


# -- 1 ---------------------------------------------------------------------------


def test_c01_coefficient_parity(corpus, criterion):
    t0 = time.perf_counter()
    blocks = bad = 0
    subs = set()
    for e in corpus:
        img, _ = decode_to_dct(e.data)
        subs.add(e.subsampling)
        for mine, ref in zip(img.planes, reference_coefficients(e.data)):
            r, c = ref.shape[:2]
            blocks += r * c
            bad += int((mine[:r, :c] != ref).any(axis=(2, 3)).sum())
    dt = time.perf_counter() - t0
    ok = len(corpus) >= 100 and subs == {"4:2:0", "4:4:4"} and bad == 0 and dt < 60
    criterion(1, ok, f"{len(corpus)} images, {blocks} blocks, {bad} mismatched, {dt:.1f}s")
    assert ok


# -- 2 ---------------------------------------------------------------------------


def test_c02_cost_model(criterion):
    lo, hi = theoretical_cost(32, MINIMAL), theoretical_cost(32, FULL)
    ok = (
        lo == 224 and round(hi) == 1813 and round(100 * cost_reduction(32), 1) == 87.6
        and COST_MODEL.idct == 1184 and round(COST_MODEL.full_constant, 1) == 1717.3
    )
    criterion(2, ok, f"minimal {lo:g}, full {hi:.2f}, reduction {100 * cost_reduction(32):.2f}%, "
                     f"constant {COST_MODEL.full_constant:.2f}")
    assert ok


# -- 3 ---------------------------------------------------------------------------


def test_c03_embed_flops(criterion):
    targets = {("rgb", 192): 28.9e6, ("rgb", 384): 57.8e6, ("dct", 192): 16.1e6, ("dct", 384): 30.5e6}
    got = {k: embed_flops(EmbedConfig(GROUPED, 16, k[1], True), 224, k[0]) for k in targets}
    errs = {k: abs(got[k] - v) / v for k, v in targets.items()}
    ok = max(errs.values()) <= 0.01
    criterion(3, ok, ", ".join(f"{k[0]}-{k[1]} {got[k] / 1e6:.2f}M" for k in targets))
    assert ok


# -- 4 ---------------------------------------------------------------------------

EXACT_CASES = [
    ("flip", {"axis": "horizontal"}),
    ("flip", {"axis": "vertical"}),
    ("rotate90", {"direction": "cw"}),
    ("rotate90", {"direction": "ccw"}),
    ("translate", {"dx": 2, "dy": 0}),     # 16 px
    ("translate", {"dx": -2, "dy": 2}),
    ("cutout", {"x0": 0, "y0": 0, "w": 2, "h": 2}),
]


@pytest.fixture(scope="module")
def grayscale_diffs(decoded):
    return [max_diff(*run_paths(img, "grayscale")) for img in decoded]


def test_c04_exact_parity_geometric(decoded, criterion):
    worst = {}
    for img in decoded:
        for op, p in EXACT_CASES:
            key = f"{op}{p}"
            worst[key] = max(worst.get(key, 0), max_diff(*run_paths(img, op, **p)))
    ok = max(worst.values()) <= 1
    criterion(4, ok, f"flip/rotate90/translate/cutout on {len(decoded)} images, max diff {max(worst.values())}")
    assert ok, worst


@pytest.mark.xfail(reason="pixel-path grayscale sees RGB after clipping; see the decisions ledger", strict=True)
def test_c04_exact_parity_grayscale(grayscale_diffs, criterion):
    failing = sum(d > 1 for d in grayscale_diffs)
    ok = failing == 0
    criterion(4, ok, f"grayscale: {failing}/{len(grayscale_diffs)} images exceed 1 (max {max(grayscale_diffs)})")
    assert ok


def test_c04_grayscale_exact_where_unclipped(decoded):
    # where no channel of the source decode saturates, both paths agree to one level
    for img in decoded[:40]:
        a, b = run_paths(img, "grayscale")
        src = full_decode(img.with_planes(*img.planes, logical_width=img.padded_width,
                                          logical_height=img.padded_height)).data
        ok = ((src > 0) & (src < 255)).all(axis=-1)
        assert np.abs(a.data.astype(int) - b.data)[ok].max(initial=0) <= 1


# -- 5 ---------------------------------------------------------------------------


def in_range(img) -> bool:
    return all(p[..., 0, 0].min() >= -1024 and p[..., 0, 0].max() <= 1016 for p in img.planes)


def test_c05_involutions_and_identities(decoded, rng, criterion):
    failures = []
    skipped = 0
    for img in decoded[:30]:
        if invert(invert(img)) != img:
            failures.append("invert^2")
        for axis in ("horizontal", "vertical"):
            if flip(flip(img, axis), axis) != img.with_planes(*img.planes, logical_width=img.padded_width,
                                                              logical_height=img.padded_height):
                failures.append("flip^2")
        r = img
        for _ in range(4):
            r = rotate90(r, "cw")
        if not all(np.array_equal(a, b) for a, b in zip(r.planes, img.planes)):
            failures.append("rotate90^4")
        if not in_range(img):
            skipped += 1  # ops clamp DCs the decoder produced outside the range
            continue
        f = img.with_planes(*(p.astype(np.float64) for p in img.planes))
        for name, out in [
            ("brightness0", brightness(img, 0.0)), ("contrast1", contrast(img, 1.0)), ("color1", color(img, 1.0)),
            ("sharpness0", sharpness(img, 0.0)), ("midfreq0", midfreq_aug(img, 0.0)),
            ("freq_enhance1", freq_enhance(img, 1.0)), ("rotate0", rotate(img, 0.0)),
            ("shear0", shear(img, "horizontal", 0.0)),
            ("resize_same", resize(img, img.padded_width, img.padded_height)),
        ]:
            if max(np.abs(a - b).max() for a, b in zip(out.planes, f.planes)) > 1e-9:
                failures.append(name)
    for L, M, N in [(2, 2, 8), (4, 4, 8), (2, 3, 4), (1, 1, 2)]:
        g = rng.normal(0, 200, (L, M, N, N))
        for v in (DCT, DFT):
            if np.abs(decompose_blocks(combine_blocks(g, v), L, M, N, v) - g).max() > 1e-9:
                failures.append(f"combine/decompose {v} {L}x{M}x{N}")
    for L, M in [(2, 2), (3, 2), (4, 4)]:
        X = rng.normal(0, 200, (8, 8))
        if np.abs(subband_resize_block(subband_resize_block(X, L, M, "up"), L, M, "down") - X).max() > 1e-9:
            failures.append(f"subband {L}x{M}")
    ok = not failures
    note = f"all within 1e-9 ({skipped} out-of-range images skipped for t-identities)"
    criterion(5, ok, note if ok else ", ".join(sorted(set(failures))))
    assert ok


# -- 6 ---------------------------------------------------------------------------


def test_c06_range_property(criterion):
    r = np.random.default_rng(6)
    lo, hi = np.inf, -np.inf
    n = 0
    for _ in range(10):
        x = r.integers(-128, 128, (100_000, 8, 8)).astype(np.float64)
        c = dct_forward_8(x)
        lo, hi, n = min(lo, c.min()), max(hi, c.max()), n + len(x)
    # DC extremes: constant blocks and every DC-maximizing sign pattern is a constant
    ce = dct_forward_8(np.array([np.full((8, 8), 127.0), np.full((8, 8), -128.0)]))
    lo, hi = min(lo, ce.min()), max(hi, ce.max())
    floor, ceil = ce[1, 0, 0], ce[0, 0, 0]
    ok = lo >= -1024 - 1e-9 and hi <= 1016 + 1e-9 and abs(floor + 1024) < 1e-9 and abs(ceil - 1016) < 1e-9
    ok = ok and n == 10**6
    criterion(6, ok, f"{n} random + constant blocks, range [{lo:.3f}, {hi:.3f}], const -128 -> {floor:.3f}")
    assert ok


def ac_extremal_blocks() -> np.ndarray:
    # for each basis function, put 127 where it is positive and -128 where it is negative (and vice versa)
    T = dct_basis(8).T
    out = []
    for u in range(8):
        for v in range(8):
            s = np.outer(T[u], T[v]) >= 0
            out += [np.where(s, 127.0, -128.0), np.where(s, -128.0, 127.0)]
    return np.array(out)


@pytest.mark.xfail(reason="AC coefficients reach +-1020; the bound is a DC bound, see the decisions ledger",
                   strict=True)
def test_c06_range_property_extremal_ac(criterion):
    c = dct_forward_8(ac_extremal_blocks())
    ok = c.min() >= -1024 - 1e-9 and c.max() <= 1016 + 1e-9
    u, v = np.unravel_index(c.reshape(len(c), 64).max(0).argmax(), (8, 8))
    criterion(6, ok, f"extremal AC blocks: range [{c.min():.3f}, {c.max():.3f}] (peak at ({u},{v}))")
    assert ok


def test_c06_extremal_ac_bound_is_1020():
    # the true bound: every coefficient lies in [-1024, 1020]
    c = dct_forward_8(ac_extremal_blocks())
    assert c.min() >= -1024 - 1e-9 and c.max() == pytest.approx(1020, abs=1e-9)


# -- 7 ---------------------------------------------------------------------------


def test_c07_matrix_properties(criterion):
    worst = 0.0
    for N in (2, 4, 8):
        T = dct_basis(N).T
        worst = max(worst, np.abs(T @ T.T - np.eye(N)).max())
        W = dft_basis(N)
        worst = max(worst, np.abs(W @ W.conj().T - np.eye(N)).max())
        for L in (1, 2, 4):
            A = conversion_matrix(L, N, DCT).A
            Ah = conversion_matrix(L, N, DFT).A
            worst = max(worst, np.abs(A @ A.T - np.eye(L * N)).max(),
                        np.abs(Ah @ Ah.conj().T - np.eye(L * N)).max())
    ok = worst <= 1e-12
    criterion(7, ok, f"max deviation {worst:.2e}")
    assert ok


# -- 8 ---------------------------------------------------------------------------


def _close(now: dict, then: dict) -> bool:
    if (now["psnr"] == "inf") != (then["psnr"] == "inf"):
        return False
    if now["psnr"] != "inf" and abs(now["psnr"] - then["psnr"]) > 0.5:
        return False
    return abs(now["ssim"] - then["ssim"]) <= 0.01


def test_c08_approximate_augmentation_report(tmp_path, capsys, criterion):
    baseline = json.loads(BASELINE.read_text())
    images = dict(regression_images(len(baseline) - 1))
    drift = []
    ops = set()
    for name, data in images.items():
        table = compare_table(decode_to_dct(data)[0])
        ops |= set(table)
        for op, rec in table.items():
            if not _close(rec, baseline[name][op]):
                drift.append(f"{name}/{op}")
    # the CLI reports the same numbers
    path = tmp_path / "a.jpg"
    path.write_bytes(images["astronaut256"])
    for op in ("brightness", "rotate", "resize", "chroma_drop"):
        assert cli_main(["compare", str(path), "--op", op]) == 0
        out = json.loads(capsys.readouterr().out)
        drift += [f"cli/{op}"] if not _close(out, baseline["astronaut256"][op]) else []
    missing = set(DCT_OPS) - ops - {"identity"}
    ok = not drift and not missing
    criterion(8, ok, f"{len(ops)} ops x {len(images)} images within 0.5 dB / 0.01 SSIM"
              if ok else f"drift: {drift[:6]} missing: {sorted(missing)}")
    assert ok


# -- 9 ---------------------------------------------------------------------------


def test_c09_minimal_decode_speedup(criterion):
    t0 = time.perf_counter()
    corpus = make_square_corpus(1000, 512, seed=0)
    lo = measure_decode_latency(corpus, 1, MINIMAL).per_stage["decode"]["mean_ms"]
    hi = measure_decode_latency(corpus, 1, FULL).per_stage["decode"]["mean_ms"]
    dt = time.perf_counter() - t0
    ok = hi / lo >= 1.5 and dt < 600
    criterion(9, ok, f"minimal {lo:.2f} ms, full {hi:.2f} ms, speedup {hi / lo:.2f}x "
                     f"({100 * (1 - lo / hi):.1f}% lower), {dt:.0f}s total")
    assert ok


# -- 10 --------------------------------------------------------------------------


def test_c10_layout_bijectivity(decoded, criterion):
    # p=32 concatenated chroma needs whole 32x32 chroma patches
    imgs = [img for img in decoded if all(s % (4 * img.chroma_factor) == 0 for s in img.grid_shape)][:6]
    fns = {GROUPED: layout_grouped, SEPARATE: layout_separate, CONCATENATED: layout_concatenated}
    failures = []
    for img in imgs:
        for p in PATCH_SIZES:
            for s, fn in fns.items():
                dim = 96 * EmbedConfig(SEPARATE, p, 96 * 64).blocks_per_patch if s == SEPARATE else 192
                cfg = EmbedConfig(s, p, dim)
                tokens = fn(img, cfg)
                parts = tokens if isinstance(tokens, tuple) else (tokens,)
                n = (img.padded_width // p) * (img.padded_height // p)
                f2 = img.chroma_factor ** 2
                want = n + 2 * n // f2 if s == CONCATENATED else n
                if sum(t.token_count for t in parts) != want:
                    failures.append(f"{s}/p{p} count")
                if s == GROUPED and parts[0].token_dim != p * p + 2 * p * p // f2:
                    failures.append(f"{s}/p{p} width")
                back = recompose_blocks(reassemble(tokens))
                if max(np.abs(a - b).max() for a, b in zip(back.planes, img.planes)) > 1e-9:
                    failures.append(f"{s}/p{p} round trip")
        for p, b in ((4, 2), (8, 4)):
            d = decompose_for_small_patches(img, p)
            if d.block_size != b or d.y_plane.shape[:2] != tuple(8 // b * s for s in img.grid_shape):
                failures.append(f"decompose p{p}")
    ok = bool(imgs) and not failures
    criterion(10, ok, f"p in {PATCH_SIZES} x 3 strategies on {len(imgs)} images"
              if ok else ", ".join(sorted(set(failures))))
    assert ok

