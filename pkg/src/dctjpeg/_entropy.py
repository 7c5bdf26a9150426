"""Numba kernel for baseline Huffman/RLE decoding of one scan.

The kernel works on byte-unstuffed restart segments concatenated into a single
buffer. It writes quantized coefficients in natural (row-major) order into a
flat ``(total_blocks, 64)`` array and never raises; failures come back as an
error code that the Python wrapper turns into an exception.
"""

import numpy as np
from numba import njit

OK = 0
ERR_EXHAUSTED = 1
ERR_BAD_CODE = 2
ERR_DC_RANGE = 3
ERR_AC_OVERRUN = 4

ZIGZAG = np.array(
    [
        0, 1, 8, 16, 9, 2, 3, 10,
        17, 24, 32, 25, 18, 11, 4, 5,
        12, 19, 26, 33, 40, 48, 41, 34,
        27, 20, 13, 6, 7, 14, 21, 28,
        35, 42, 49, 56, 57, 50, 43, 36,
        29, 22, 15, 23, 30, 37, 44, 51,
        58, 59, 52, 45, 38, 31, 39, 46,
        53, 60, 61, 54, 47, 55, 62, 63,
    ],
    dtype=np.int64,
)


@njit(cache=True, inline="always")
def _peek16(buf, bitpos, end_byte):
    byte = bitpos >> 3
    b0 = np.int64(buf[byte]) if byte < end_byte else 0xFF
    b1 = np.int64(buf[byte + 1]) if byte + 1 < end_byte else 0xFF
    b2 = np.int64(buf[byte + 2]) if byte + 2 < end_byte else 0xFF
    window = (b0 << 16) | (b1 << 8) | b2
    return (window >> (8 - (bitpos & 7))) & 0xFFFF


@njit(cache=True, inline="always")
def _extend(v, s):
    if s == 0:
        return 0
    if v < (1 << (s - 1)):
        return v - (1 << s) + 1
    return v


@njit(cache=True)
def decode_scan(
    buf,
    seg_starts,
    seg_ends,
    restart_interval,
    mcus_x,
    mcus_y,
    comp_h,
    comp_v,
    comp_offset,
    comp_bw,
    dc_len,
    dc_val,
    ac_len,
    ac_val,
    zigzag,
    out,
    out_ns,
):
    """Decode one scan into ``out``; returns ``(error, mcu_index, n_symbols)``.

    Per scan component ``i``: ``comp_h[i] x comp_v[i]`` blocks per MCU, blocks
    stored at ``comp_offset[i] + row * comp_bw[i] + col`` and Huffman lookup rows
    ``dc_len[i]`` / ``ac_len[i]`` (65536 entries indexed by the next 16 bits).
    """
    ncomp = comp_h.shape[0]
    total_mcus = mcus_x * mcus_y
    preds = np.zeros(ncomp, dtype=np.int64)
    n_symbols = 0
    seg = -1
    bitpos = 0
    end_bits = 0
    end_byte = 0
    for mcu in range(total_mcus):
        if mcu == 0 or (restart_interval > 0 and mcu % restart_interval == 0):
            seg += 1
            if seg >= seg_starts.shape[0]:
                return ERR_EXHAUSTED, mcu, n_symbols
            bitpos = seg_starts[seg] * 8
            end_byte = seg_ends[seg]
            end_bits = end_byte * 8
            for i in range(ncomp):
                preds[i] = 0
        my = mcu // mcus_x
        mx = mcu - my * mcus_x
        for i in range(ncomp):
            for bv in range(comp_v[i]):
                for bh in range(comp_h[i]):
                    row = my * comp_v[i] + bv
                    col = mx * comp_h[i] + bh
                    blk = comp_offset[i] + row * comp_bw[i] + col
                    # DC
                    look = _peek16(buf, bitpos, end_byte)
                    length = dc_len[i, look]
                    if length == 0:
                        if bitpos + 16 > end_bits:
                            return ERR_EXHAUSTED, mcu, n_symbols
                        return ERR_BAD_CODE, mcu, n_symbols
                    s = np.int64(dc_val[i, look])
                    bitpos += length
                    n_symbols += 1
                    if s > 11:
                        return ERR_DC_RANGE, mcu, n_symbols
                    diff = 0
                    if s > 0:
                        raw = _peek16(buf, bitpos, end_byte) >> (16 - s)
                        bitpos += s
                        diff = _extend(raw, s)
                    if bitpos > end_bits:
                        return ERR_EXHAUSTED, mcu, n_symbols
                    preds[i] += diff
                    if preds[i] > 2047 or preds[i] < -2048:
                        return ERR_DC_RANGE, mcu, n_symbols
                    out[blk, 0] = preds[i]
                    # AC
                    k = 1
                    ns = 0
                    while k < 64:
                        look = _peek16(buf, bitpos, end_byte)
                        length = ac_len[i, look]
                        if length == 0:
                            if bitpos + 16 > end_bits:
                                return ERR_EXHAUSTED, mcu, n_symbols
                            return ERR_BAD_CODE, mcu, n_symbols
                        rs = np.int64(ac_val[i, look])
                        bitpos += length
                        n_symbols += 1
                        ns += 1
                        r = rs >> 4
                        s = rs & 15
                        if s == 0:
                            if r == 15:
                                k += 16
                                continue
                            break
                        k += r
                        if k > 63 or s > 10:
                            return ERR_AC_OVERRUN, mcu, n_symbols
                        raw = _peek16(buf, bitpos, end_byte) >> (16 - s)
                        bitpos += s
                        out[blk, zigzag[k]] = _extend(raw, s)
                        k += 1
                    if k > 64:
                        return ERR_AC_OVERRUN, mcu, n_symbols
                    if bitpos > end_bits:
                        return ERR_EXHAUSTED, mcu, n_symbols
                    out_ns[blk] = ns
    return OK, total_mcus, n_symbols
