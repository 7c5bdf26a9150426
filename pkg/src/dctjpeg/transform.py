"""DCT/DFT linear algebra on coefficient blocks.

Orthonormal DCT-II bases, the sub-block conversion operator that merges an
``L x M`` grid of ``N x N`` DCT blocks into one ``LN x MN`` block (DCT or
unitary DFT target), and sub-band approximation resizing. All arithmetic is
float64 (complex128 for the DFT variant).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import block_diag

from .errors import ShapeMismatch

DCT = "dct"
DFT = "dft"

#: largest LN accepted by conversion_matrix (a padded 512-pixel warp tile fits)
MAX_CONVERSION_SIZE = 1024


@dataclass(frozen=True)
class DctBasis:
    N: int
    T: np.ndarray


@dataclass(frozen=True)
class ConversionMatrix:
    L: int
    N: int
    A: np.ndarray
    variant: str = DCT

    @property
    def inverse(self) -> np.ndarray:
        return self.A.conj().T


@lru_cache(maxsize=None)
def dct_basis(N: int) -> DctBasis:
    """Orthonormal 1-D DCT-II basis; row ``u`` holds frequency ``u``."""
    m = np.arange(N)
    u = m[:, None]
    T = np.sqrt(2.0 / N) * np.cos(np.pi * (2 * m[None, :] + 1) * u / (2 * N))
    T[0] /= np.sqrt(2.0)
    T.flags.writeable = False
    return DctBasis(N, T)


@lru_cache(maxsize=None)
def dft_basis(N: int) -> np.ndarray:
    """Unitary DFT matrix ``W[k, n] = exp(-2j pi k n / N) / sqrt(N)``."""
    k = np.arange(N)
    W = np.exp(-2j * np.pi * np.outer(k, k) / N) / np.sqrt(N)
    W.flags.writeable = False
    return W


def dct_forward(x: np.ndarray, N: int | None = None) -> np.ndarray:
    """2-D DCT of the trailing ``N x N`` axes (any leading batch shape)."""
    x = np.asarray(x, dtype=np.float64)
    N = N or x.shape[-1]
    if x.shape[-2:] != (N, N):
        raise ShapeMismatch(f"expected trailing shape ({N}, {N}), got {x.shape[-2:]}")
    T = dct_basis(N).T
    return T @ x @ T.T


def dct_inverse(X: np.ndarray, N: int | None = None) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    N = N or X.shape[-1]
    if X.shape[-2:] != (N, N):
        raise ShapeMismatch(f"expected trailing shape ({N}, {N}), got {X.shape[-2:]}")
    T = dct_basis(N).T
    return T.T @ X @ T


def dct_forward_8(block: np.ndarray) -> np.ndarray:
    """8x8 forward DCT; the DC term is 8x the block mean."""
    return dct_forward(block, 8)


def dct_inverse_8(coeffs: np.ndarray) -> np.ndarray:
    return dct_inverse(coeffs, 8)


@lru_cache(maxsize=None)
def conversion_matrix(L: int, N: int, variant: str = DCT) -> ConversionMatrix:
    """Operator mapping ``L`` stacked N-point DCT blocks to one LN-point transform.

    ``A = B_large @ B_small.T`` where ``B_small`` is block-diagonal in the
    N-point DCT basis and ``B_large`` is the LN-point DCT basis (or the unitary
    DFT matrix for ``variant="dft"``).
    """
    if L < 1 or N < 1:
        raise ValueError(f"L and N must be positive, got L={L}, N={N}")
    if L * N > MAX_CONVERSION_SIZE:
        raise ValueError(f"L*N = {L * N} exceeds cap {MAX_CONVERSION_SIZE}")
    small = block_diag(*([dct_basis(N).T] * L))
    if variant == DCT:
        large = dct_basis(L * N).T
    elif variant == DFT:
        large = dft_basis(L * N)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    A = large @ small.T
    A.flags.writeable = False
    return ConversionMatrix(L, N, A, variant)


def _grid_to_matrix(blocks: np.ndarray) -> np.ndarray:
    # (..., L, M, N, N) -> (..., LN, MN)
    *lead, L, M, n1, n2 = blocks.shape
    return blocks.swapaxes(-3, -2).reshape(*lead, L * n1, M * n2)


def _matrix_to_grid(big: np.ndarray, L: int, M: int, N: int) -> np.ndarray:
    *lead, _, _ = big.shape
    return big.reshape(*lead, L, N, M, N).swapaxes(-3, -2)


def combine_blocks(blocks: np.ndarray, variant: str = DCT) -> np.ndarray:
    """Merge an ``(L, M, N, N)`` grid of DCT blocks into one ``LN x MN`` block.

    Leading batch axes are allowed. The DFT variant returns complex
    coefficients of the unitary 2-D DFT of the same pixels.
    """
    blocks = np.asarray(blocks)
    if blocks.ndim < 4 or blocks.shape[-1] != blocks.shape[-2]:
        raise ShapeMismatch(f"expected (..., L, M, N, N) grid, got {blocks.shape}")
    L, M, N = blocks.shape[-4], blocks.shape[-3], blocks.shape[-1]
    AL = conversion_matrix(L, N, variant).A
    AM = conversion_matrix(M, N, variant).A
    return AL @ _grid_to_matrix(blocks.astype(np.float64, copy=False)) @ AM.T


def decompose_blocks(big: np.ndarray, L: int, M: int, N: int, variant: str = DCT) -> np.ndarray:
    """Inverse of :func:`combine_blocks`: ``LN x MN`` block -> ``(L, M, N, N)`` grid.

    For the DFT variant the real part is returned, which is exact whenever the
    input has Hermitian symmetry (i.e. comes from real pixels).
    """
    big = np.asarray(big)
    if big.shape[-2:] != (L * N, M * N):
        raise ShapeMismatch(f"expected trailing shape ({L * N}, {M * N}), got {big.shape[-2:]}")
    AL = conversion_matrix(L, N, variant)
    AM = conversion_matrix(M, N, variant)
    out = AL.inverse @ big @ AM.inverse.T
    if variant == DFT:
        out = out.real
    return _matrix_to_grid(out, L, M, N)


def subband_resize_block(block: np.ndarray, L: int, M: int, direction: str) -> np.ndarray:
    """Sub-band approximation resize of the trailing two axes.

    ``up``: ``N x N`` -> ``LN x MN``, coefficients scaled by ``sqrt(LM)`` and
    high frequencies zero. ``down``: ``LN x MN`` -> ``N x N`` low-frequency
    corner scaled by ``1 / sqrt(LM)``.
    """
    block = np.asarray(block, dtype=np.float64)
    rows, cols = block.shape[-2:]
    s = np.sqrt(L * M)
    if direction == "up":
        if rows != cols:
            raise ShapeMismatch(f"upsampling expects a square block, got {rows}x{cols}")
        out = np.zeros(block.shape[:-2] + (L * rows, M * cols))
        out[..., :rows, :cols] = s * block
        return out
    if direction == "down":
        if rows % L or cols % M or rows // L != cols // M:
            raise ShapeMismatch(f"cannot downsample {rows}x{cols} by {L}x{M} to a square block")
        n = rows // L
        return block[..., :n, :n] / s
    raise ValueError(f"direction must be 'up' or 'down', got {direction!r}")
