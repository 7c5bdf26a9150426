"""Patch-embedding layouts for ViT-style models fed with DCT blocks.

Three layouts turn a :class:`DctImage` into tokens:

* grouped: one token per ``p x p`` patch holding its luma blocks, then the
  matching Cb and Cr blocks (``3p^2/2`` values for 4:2:0);
* separate: the same blocks kept apart, ``(tokens, N_B, b*b)``, to be embedded
  per block and mixed;
* concatenated: luma and chroma patches become separate tokens of ``p^2``
  values each.

Patches smaller than 16 px first split every 8x8 block into ``p/2``-sized
sub-blocks so a patch still covers whole chroma blocks. Projections use
seeded random weights; they exist for shape and FLOP accounting, not
training.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bitstream import DctImage
from .errors import BadPatchSize, DimMismatch, ShapeMismatch
from .transform import combine_blocks, decompose_blocks

GROUPED = "grouped"
SEPARATE = "separate"
CONCATENATED = "concatenated"
STRATEGIES = (GROUPED, SEPARATE, CONCATENATED)
PATCH_SIZES = (4, 8, 16, 32)


@dataclass(frozen=True)
class EmbedConfig:
    strategy: str = GROUPED
    patch_size: int = 16
    embed_dim: int = 192
    use_sub_block_conversion: bool = False

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.patch_size not in PATCH_SIZES:
            raise BadPatchSize(f"patch size must be one of {PATCH_SIZES}, got {self.patch_size}")
        if self.strategy == SEPARATE and self.embed_dim % self.blocks_per_patch:
            raise DimMismatch(f"embed_dim {self.embed_dim} not divisible by N_B={self.blocks_per_patch}")
        if self.strategy == CONCATENATED and self.embed_dim % 3:
            raise DimMismatch(f"embed_dim {self.embed_dim} not divisible by 3")

    @property
    def block_size(self) -> int:
        """Coefficient block size the layout works on (8, or p/2 for small patches)."""
        return min(8, self.patch_size // 2)

    @property
    def blocks_per_patch(self) -> int:
        """``N_B = 3p^2 / (2 b^2)`` for 4:2:0."""
        return 3 * self.patch_size ** 2 // (2 * self.block_size ** 2)

    @property
    def token_dim(self) -> int:
        return 3 * self.patch_size ** 2 // 2


@dataclass(eq=False)
class PatchTensor:
    data: np.ndarray
    layout: str
    meta: dict = field(default_factory=dict)

    @property
    def token_count(self) -> int:
        return self.data.shape[0]

    @property
    def token_dim(self) -> int:
        return int(np.prod(self.data.shape[1:]))


# -- sub-block decomposition --------------------------------------------------


def _split_plane(p: np.ndarray, sub: int) -> np.ndarray:
    rows, cols, b, _ = p.shape
    k = b // sub
    parts = decompose_blocks(p.astype(np.float64), k, k, sub)  # (rows, cols, k, k, sub, sub)
    return parts.transpose(0, 2, 1, 3, 4, 5).reshape(rows * k, cols * k, sub, sub)


def _merge_plane(p: np.ndarray, b: int) -> np.ndarray:
    rows, cols, sub, _ = p.shape
    k = b // sub
    g = p.reshape(rows // k, k, cols // k, k, sub, sub).transpose(0, 2, 1, 3, 4, 5)
    return combine_blocks(g)


def decompose_for_small_patches(img: DctImage, p: int) -> DctImage:
    """Split every block into ``(p/2) x (p/2)`` sub-blocks (p in {4, 8})."""
    if p not in (4, 8):
        raise BadPatchSize(f"sub-block decomposition applies to p in (4, 8), got {p}")
    sub = p // 2
    if img.block_size % sub:
        raise BadPatchSize(f"block size {img.block_size} cannot split into {sub}x{sub}")
    if img.block_size == sub:
        return img
    return img.with_planes(*(_split_plane(q, sub) for q in img.planes))


def recompose_blocks(img: DctImage, b: int = 8) -> DctImage:
    """Inverse of :func:`decompose_for_small_patches`."""
    if img.block_size == b:
        return img
    return img.with_planes(*(_merge_plane(q, b) for q in img.planes))


# -- layouts -------------------------------------------------------------------


def _prepare(img: DctImage, cfg: EmbedConfig) -> DctImage:
    if img.block_size != cfg.block_size:
        if img.block_size == 8 and cfg.patch_size < 16:
            img = decompose_for_small_patches(img, cfg.patch_size)
        else:
            raise ShapeMismatch(f"image blocks are {img.block_size}x{img.block_size}, config needs {cfg.block_size}")
    return img


def _patch_blocks(plane: np.ndarray, k: int) -> np.ndarray:
    """``(R, C, b, b)`` -> ``(patches, k, k, b, b)`` with patches in raster order."""
    R, C, b, _ = plane.shape
    if R % k or C % k:
        raise ShapeMismatch(f"block grid {R}x{C} not divisible into {k}x{k} patches")
    g = plane.reshape(R // k, k, C // k, k, b, b).transpose(0, 2, 1, 3, 4, 5)
    return g.reshape(-1, k, k, b, b)


def _unpatch(blocks: np.ndarray, R: int, C: int) -> np.ndarray:
    _, k, _, b, _ = blocks.shape
    return blocks.reshape(R // k, C // k, k, k, b, b).transpose(0, 2, 1, 3, 4, 5).reshape(R, C, b, b)


def _meta(img: DctImage, cfg: EmbedConfig) -> dict:
    return {
        "grid": img.grid_shape,
        "chroma_grid": img.cb_plane.shape[:2],
        "block": img.block_size,
        "factor": img.chroma_factor,
        "patch": cfg.patch_size,
        "conversion": cfg.use_sub_block_conversion,
        "logical": (img.logical_width, img.logical_height),
        "subsampling": img.subsampling,
    }


def _split(img: DctImage, cfg: EmbedConfig):
    img = _prepare(img, cfg)
    b = img.block_size
    k = cfg.patch_size // b
    f = img.chroma_factor
    if k % f:
        raise ShapeMismatch(f"patch {cfg.patch_size} does not cover whole chroma blocks")
    y = _patch_blocks(img.y_plane, k)
    cb = _patch_blocks(img.cb_plane, k // f)
    cr = _patch_blocks(img.cr_plane, k // f)
    if len(cb) != len(y):
        raise ShapeMismatch("luma and chroma grids give different patch counts")
    return img, y, cb, cr


def _raster(blocks: np.ndarray) -> np.ndarray:
    return blocks.reshape(len(blocks), -1)


def layout_grouped(img: DctImage, cfg: EmbedConfig) -> PatchTensor:
    """One token per patch: Y blocks (raster, each block raster), then Cb, then Cr.

    With sub-block conversion the luma blocks of a patch are first combined
    into one ``p x p`` DCT block.
    """
    img, y, cb, cr = _split(img, cfg)
    if cfg.use_sub_block_conversion:
        luma = combine_blocks(y).reshape(len(y), -1)
    else:
        luma = _raster(y)
    data = np.concatenate([luma, _raster(cb), _raster(cr)], axis=1)
    return PatchTensor(data, GROUPED, _meta(img, cfg))


def layout_separate(img: DctImage, cfg: EmbedConfig) -> PatchTensor:
    """``(patches, N_B, b*b)``: every block of a patch as its own row."""
    img, y, cb, cr = _split(img, cfg)
    n = len(y)
    b2 = img.block_size ** 2
    data = np.concatenate([y.reshape(n, -1, b2), cb.reshape(n, -1, b2), cr.reshape(n, -1, b2)], axis=1)
    return PatchTensor(data, SEPARATE, _meta(img, cfg))


def layout_concatenated(img: DctImage, cfg: EmbedConfig) -> tuple[PatchTensor, PatchTensor]:
    """Luma tokens from ``p x p`` luma patches, chroma tokens from ``p x p`` chroma patches."""
    img = _prepare(img, cfg)
    k = cfg.patch_size // img.block_size
    meta = _meta(img, cfg)
    luma = _raster(_patch_blocks(img.y_plane, k))
    chroma = np.concatenate([_raster(_patch_blocks(p, k)) for p in (img.cb_plane, img.cr_plane)])
    return PatchTensor(luma, CONCATENATED + ":luma", meta), PatchTensor(chroma, CONCATENATED + ":chroma", meta)


def _image_from_meta(meta: dict, y, cb, cr) -> DctImage:
    lw, lh = meta["logical"]
    return DctImage(y, cb, cr, lw, lh, meta["subsampling"])


def reassemble(tokens: PatchTensor | tuple[PatchTensor, PatchTensor]) -> DctImage:
    """Invert any layout back to a :class:`DctImage` (float64 planes)."""
    if isinstance(tokens, tuple):
        luma, chroma = tokens
        m = luma.meta
        b, k = m["block"], m["patch"] // m["block"]
        R, C = m["grid"]
        cR, cC = m["chroma_grid"]
        y = _unpatch(luma.data.reshape(-1, k, k, b, b), R, C)
        half = len(chroma.data) // 2
        cb = _unpatch(chroma.data[:half].reshape(-1, k, k, b, b), cR, cC)
        cr = _unpatch(chroma.data[half:].reshape(-1, k, k, b, b), cR, cC)
        return _image_from_meta(m, y, cb, cr)
    m = tokens.meta
    b, f = m["block"], m["factor"]
    k = m["patch"] // b
    kc = k // f
    R, C = m["grid"]
    cR, cC = m["chroma_grid"]
    n = tokens.token_count
    flat = tokens.data.reshape(n, -1).astype(np.float64)
    ny = k * k * b * b
    nc = kc * kc * b * b
    if tokens.layout == GROUPED and m["conversion"]:
        big = flat[:, :ny].reshape(n, k * b, k * b)
        yb = decompose_blocks(big, k, k, b)
    else:
        yb = flat[:, :ny].reshape(n, k, k, b, b)
    y = _unpatch(yb, R, C)
    cb = _unpatch(flat[:, ny : ny + nc].reshape(n, kc, kc, b, b), cR, cC)
    cr = _unpatch(flat[:, ny + nc :].reshape(n, kc, kc, b, b), cR, cC)
    return _image_from_meta(m, y, cb, cr)


# -- projection ------------------------------------------------------------------


@dataclass
class ProjectionWeights:
    """Named weight matrices (``(in, out)``) and biases for :func:`project`."""

    matrices: dict[str, np.ndarray]
    biases: dict[str, np.ndarray]


def _dense(rng, n_in, n_out):
    return rng.normal(0.0, 1.0 / np.sqrt(n_in), size=(n_in, n_out)), rng.normal(0.0, 0.02, size=n_out)


def make_weights(cfg: EmbedConfig, seed: int = 0) -> ProjectionWeights:
    rng = np.random.default_rng(seed)
    E = cfg.embed_dim
    p2 = cfg.patch_size ** 2
    mats, biases = {}, {}
    if cfg.strategy == GROUPED:
        mats["proj"], biases["proj"] = _dense(rng, cfg.token_dim, E)
    elif cfg.strategy == SEPARATE:
        nb, b2 = cfg.blocks_per_patch, cfg.block_size ** 2
        per = [_dense(rng, b2, E // nb) for _ in range(nb)]
        mats["block"] = np.stack([w for w, _ in per])
        biases["block"] = np.stack([v for _, v in per])
        mats["mix"], biases["mix"] = _dense(rng, E, E)
    else:
        mats["luma"], biases["luma"] = _dense(rng, p2, 2 * E // 3)
        mats["chroma"], biases["chroma"] = _dense(rng, p2, 2 * E // 3)
    return ProjectionWeights(mats, biases)


def identity_weights(cfg: EmbedConfig) -> ProjectionWeights:
    """Identity maps; only possible when every projection is square."""
    if cfg.strategy == GROUPED and cfg.token_dim == cfg.embed_dim:
        n = cfg.embed_dim
        return ProjectionWeights({"proj": np.eye(n)}, {"proj": np.zeros(n)})
    if cfg.strategy == SEPARATE and cfg.block_size ** 2 == cfg.embed_dim // cfg.blocks_per_patch:
        nb, b2 = cfg.blocks_per_patch, cfg.block_size ** 2
        E = cfg.embed_dim
        return ProjectionWeights(
            {"block": np.stack([np.eye(b2)] * nb), "mix": np.eye(E)},
            {"block": np.zeros((nb, b2)), "mix": np.zeros(E)},
        )
    if cfg.strategy == CONCATENATED and cfg.patch_size ** 2 == 2 * cfg.embed_dim // 3:
        n = cfg.patch_size ** 2
        return ProjectionWeights({"luma": np.eye(n), "chroma": np.eye(n)}, {"luma": np.zeros(n), "chroma": np.zeros(n)})
    raise DimMismatch("identity weights need square projections for this config")


def project(tokens: PatchTensor, cfg: EmbedConfig, weights: ProjectionWeights | int = 0) -> PatchTensor:
    """Affine embedding of a layout's tokens; ``weights`` may be a seed."""
    if not isinstance(weights, ProjectionWeights):
        weights = make_weights(cfg, int(weights))
    W, B = weights.matrices, weights.biases
    x = tokens.data.astype(np.float64)
    if tokens.layout == GROUPED:
        if x.shape[1] != W["proj"].shape[0]:
            raise DimMismatch(f"token dim {x.shape[1]} != projection input {W['proj'].shape[0]}")
        out = x @ W["proj"] + B["proj"]
    elif tokens.layout == SEPARATE:
        if x.shape[1:] != W["block"].shape[:2]:
            raise DimMismatch(f"token shape {x.shape[1:]} != per-block weights {W['block'].shape[:2]}")
        per = np.einsum("tni,nio->tno", x, W["block"]) + B["block"]
        out = per.reshape(len(x), -1) @ W["mix"] + B["mix"]
    elif tokens.layout.startswith(CONCATENATED):
        key = tokens.layout.split(":")[1]
        if x.shape[1] != W[key].shape[0]:
            raise DimMismatch(f"token dim {x.shape[1]} != projection input {W[key].shape[0]}")
        out = x @ W[key] + B[key]
    else:
        raise DimMismatch(f"cannot project layout {tokens.layout!r}")
    return PatchTensor(out, tokens.layout + ":embedded", dict(tokens.meta))


# -- FLOPs --------------------------------------------------------------------------


def embed_flops(cfg: EmbedConfig, image_size: int | tuple[int, int] = 224, input_kind: str = "dct") -> int:
    """Multiply-accumulates of the patch projection (bias ignored).

    RGB input projects ``3p^2`` values per token. DCT input adds ``2 p^3`` per
    patch for sub-block conversion (two dense ``p x p`` products) and, for
    ``p < 16``, ``2 * 8^3`` per decomposed 8x8 block.
    """
    h, w = (image_size, image_size) if isinstance(image_size, int) else image_size
    p, E = cfg.patch_size, cfg.embed_dim
    tokens = (h // p) * (w // p)
    if input_kind == "rgb":
        return tokens * 3 * p * p * E
    if input_kind != "dct":
        raise ValueError(f"input_kind must be 'rgb' or 'dct', got {input_kind!r}")
    if cfg.strategy == GROUPED:
        flops = tokens * cfg.token_dim * E
    elif cfg.strategy == SEPARATE:
        nb = cfg.blocks_per_patch
        flops = tokens * nb * cfg.block_size ** 2 * (E // nb) + tokens * E * E
    else:
        flops = (3 * tokens // 2) * p * p * (2 * E // 3)
    if cfg.use_sub_block_conversion:
        flops += tokens * 2 * p ** 3
    if p < 16:
        blocks_8 = (h // 8) * (w // 8) * 3 // 2
        flops += blocks_8 * 2 * 8 ** 3
    return flops
