"""Baseline JPEG parsing down to dequantized DCT coefficients.

Decoding stops after entropy decoding, run-length expansion and
dequantization: no inverse DCT, no chroma upsampling and no colour conversion
happen here. Only 8-bit Huffman-coded sequential files (SOF0/SOF1) with 4:2:0
or 4:4:4 sampling are accepted.
"""

from __future__ import annotations

import re
import struct
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _entropy
from .errors import (
    BitstreamExhausted,
    DcOutOfRange,
    InvalidHuffmanCode,
    MalformedMarker,
    MisalignedCrop,
    OutOfBounds,
    UnsupportedCoding,
    UnsupportedDepth,
    UnsupportedSampling,
)

ZIGZAG = _entropy.ZIGZAG
#: natural index -> zigzag position
UNZIGZAG = np.argsort(ZIGZAG)

SOI, EOI, SOS, DQT, DHT, DRI = 0xD8, 0xD9, 0xDA, 0xDB, 0xC4, 0xDD
_SEQUENTIAL_HUFFMAN = {0xC0, 0xC1}
_OTHER_SOF = {0xC2, 0xC3, 0xC5, 0xC6, 0xC7, 0xC9, 0xCA, 0xCB, 0xCD, 0xCE, 0xCF}
_DAC = 0xCC
_DNL = 0xDC
_RST = range(0xD0, 0xD8)

_SCAN_END = re.compile(rb"\xff[^\x00\xd0-\xd7]")
_RST_MARKER = re.compile(rb"\xff[\xd0-\xd7]")


@dataclass(frozen=True)
class Component:
    id: int
    h: int
    v: int
    tq: int


@dataclass(frozen=True)
class Frame:
    width: int
    height: int
    precision: int
    components: tuple[Component, ...]
    marker: int = 0xC0

    @property
    def hmax(self) -> int:
        return max(c.h for c in self.components)

    @property
    def vmax(self) -> int:
        return max(c.v for c in self.components)

    @property
    def mcus_x(self) -> int:
        return -(-self.width // (8 * self.hmax))

    @property
    def mcus_y(self) -> int:
        return -(-self.height // (8 * self.vmax))


@dataclass(frozen=True, eq=False)
class HuffmanTable:
    table_class: int  # 0 = DC, 1 = AC
    table_id: int
    counts: tuple[int, ...]  # number of codes of length 1..16
    values: bytes

    @cached_property
    def lookup(self) -> tuple[np.ndarray, np.ndarray]:
        """16-bit lookahead tables ``(code_length, symbol)``; length 0 = no code."""
        lengths = np.zeros(1 << 16, dtype=np.uint8)
        symbols = np.zeros(1 << 16, dtype=np.uint8)
        code = 0
        k = 0
        for size in range(1, 17):
            for _ in range(self.counts[size - 1]):
                if code >= (1 << size):
                    raise MalformedMarker("Huffman table has more codes than fit in its lengths")
                lo = code << (16 - size)
                hi = (code + 1) << (16 - size)
                lengths[lo:hi] = size
                symbols[lo:hi] = self.values[k]
                k += 1
                code += 1
            code <<= 1
        return lengths, symbols

    def codes(self) -> dict[tuple[int, int], int]:
        """Canonical ``(length, code) -> symbol`` mapping."""
        out = {}
        code = 0
        k = 0
        for size in range(1, 17):
            for _ in range(self.counts[size - 1]):
                out[(size, code)] = self.values[k]
                k += 1
                code += 1
            code <<= 1
        return out


@dataclass(frozen=True)
class ScanHeader:
    component_ids: tuple[int, ...]
    dc_table_ids: tuple[int, ...]
    ac_table_ids: tuple[int, ...]
    data_start: int
    data_end: int
    huffman_tables: dict = field(hash=False)
    quant_tables: dict = field(hash=False)
    restart_interval: int | None = None


@dataclass
class JpegTables:
    """Everything parsed from the headers up to the first scan."""

    quant_tables: dict[int, np.ndarray]  # id -> 64 uint16 values, zigzag order
    huffman_tables: dict[tuple[int, int], HuffmanTable]  # (class, id) -> table
    frame: Frame
    restart_interval: int | None

    @property
    def width(self) -> int:
        return self.frame.width

    @property
    def height(self) -> int:
        return self.frame.height

    @property
    def subsampling(self) -> str:
        return _subsampling(self.frame)

    def quant_table_natural(self, table_id: int) -> np.ndarray:
        """Quantization table as an 8x8 array in natural order."""
        return self.quant_tables[table_id][UNZIGZAG].reshape(8, 8)


@dataclass(eq=False)
class DctImage:
    """Dequantized coefficients: luma plane plus two chroma planes.

    Planes have shape ``(rows, cols, b, b)`` where ``b`` is the block size
    (8 for decoded files; smaller after sub-block decomposition). The block grid
    is padded to whole MCUs; ``logical_width`` / ``logical_height`` record the
    visible size in pixels.
    """

    y_plane: np.ndarray
    cb_plane: np.ndarray
    cr_plane: np.ndarray
    logical_width: int
    logical_height: int
    subsampling: str = "4:2:0"

    @property
    def planes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.y_plane, self.cb_plane, self.cr_plane

    @property
    def block_size(self) -> int:
        return self.y_plane.shape[-1]

    @property
    def chroma_factor(self) -> int:
        return 2 if self.subsampling == "4:2:0" else 1

    @property
    def grid_shape(self) -> tuple[int, int]:
        """Luma block grid ``(rows, cols)``."""
        return self.y_plane.shape[0], self.y_plane.shape[1]

    @property
    def padded_width(self) -> int:
        return self.y_plane.shape[1] * self.block_size

    @property
    def padded_height(self) -> int:
        return self.y_plane.shape[0] * self.block_size

    def with_planes(self, y, cb, cr, **changes) -> DctImage:
        return DctImage(
            y, cb, cr,
            changes.get("logical_width", self.logical_width),
            changes.get("logical_height", self.logical_height),
            changes.get("subsampling", self.subsampling),
        )

    def astype(self, dtype) -> DctImage:
        return self.with_planes(*(p.astype(dtype) for p in self.planes))

    def __eq__(self, other):
        if not isinstance(other, DctImage):
            return NotImplemented
        return (
            self.logical_width == other.logical_width
            and self.logical_height == other.logical_height
            and self.subsampling == other.subsampling
            and all(
                a.dtype == b.dtype and np.array_equal(a, b)
                for a, b in zip(self.planes, other.planes)
            )
        )


@dataclass
class RleSymbolStats:
    """Run-length symbol counts.

    ``per_block[c]`` holds, for every block of component ``c``, the number of
    AC (run, size) symbols decoded for it, EOB and ZRL included; 0 marks a
    padding block that no scan coded. ``total_symbols`` counts every Huffman
    symbol consumed from the scans, DC symbols included.
    """

    per_block: tuple[np.ndarray, np.ndarray, np.ndarray]
    total_symbols: int
    dc_symbols: int

    @property
    def counts(self) -> np.ndarray:
        """Flat array of Ns over all coded blocks."""
        flat = np.concatenate([p.ravel() for p in self.per_block])
        return flat[flat > 0]

    @property
    def histogram(self) -> np.ndarray:
        """``histogram[n]`` = number of coded blocks with Ns == n, n in 0..64."""
        return np.bincount(self.counts, minlength=65)[:65]

    @property
    def mean(self) -> float:
        c = self.counts
        return float(c.mean()) if c.size else 0.0


def _subsampling(frame: Frame) -> str:
    comps = frame.components
    if len(comps) != 3:
        raise UnsupportedSampling(f"expected 3 components, found {len(comps)}")
    factors = [(c.h, c.v) for c in comps]
    if factors == [(2, 2), (1, 1), (1, 1)]:
        return "4:2:0"
    if factors == [(1, 1), (1, 1), (1, 1)]:
        return "4:4:4"
    raise UnsupportedSampling(f"sampling factors {factors} are neither 4:2:0 nor 4:4:4")


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def u8(self) -> int:
        if self.pos >= len(self.data):
            raise MalformedMarker("unexpected end of file")
        v = self.data[self.pos]
        self.pos += 1
        return v

    def segment(self) -> bytes:
        """Read a length-prefixed segment body."""
        if self.pos + 2 > len(self.data):
            raise MalformedMarker("truncated segment length")
        (length,) = struct.unpack_from(">H", self.data, self.pos)
        if length < 2 or self.pos + length > len(self.data):
            raise MalformedMarker(f"segment length {length} runs past end of file")
        body = self.data[self.pos + 2 : self.pos + length]
        self.pos += length
        return body

    def marker(self) -> int:
        b = self.u8()
        if b != 0xFF:
            raise MalformedMarker(f"expected marker at offset {self.pos - 1}, found 0x{b:02x}")
        m = self.u8()
        while m == 0xFF:  # fill bytes
            m = self.u8()
        return m


def _parse_dqt(body: bytes, tables: dict) -> None:
    i = 0
    while i < len(body):
        pq, tq = body[i] >> 4, body[i] & 15
        i += 1
        if pq > 1 or tq > 3:
            raise MalformedMarker(f"bad DQT precision/id {pq}/{tq}")
        n = 64 * (pq + 1)
        if i + n > len(body):
            raise MalformedMarker("truncated DQT")
        if pq == 0:
            q = np.frombuffer(body, dtype=np.uint8, count=64, offset=i).astype(np.uint16)
        else:
            q = np.frombuffer(body, dtype=">u2", count=64, offset=i).astype(np.uint16)
        if (q == 0).any():
            raise MalformedMarker("quantization table contains a zero entry")
        tables[tq] = q
        i += n


def _parse_dht(body: bytes, tables: dict) -> None:
    i = 0
    while i < len(body):
        if i + 17 > len(body):
            raise MalformedMarker("truncated DHT")
        tc, th = body[i] >> 4, body[i] & 15
        if tc > 1 or th > 3:
            raise MalformedMarker(f"bad DHT class/id {tc}/{th}")
        counts = tuple(body[i + 1 : i + 17])
        n = sum(counts)
        if n > 256 or i + 17 + n > len(body):
            raise MalformedMarker("truncated or oversized DHT")
        table = HuffmanTable(tc, th, counts, bytes(body[i + 17 : i + 17 + n]))
        table.lookup  # validates code lengths
        tables[(tc, th)] = table
        i += 17 + n


def _parse_sof(marker: int, body: bytes) -> Frame:
    if len(body) < 6:
        raise MalformedMarker("truncated SOF")
    precision, height, width, nf = struct.unpack_from(">BHHB", body, 0)
    if precision != 8:
        raise UnsupportedDepth(f"{precision}-bit samples are not supported")
    if height == 0 or width == 0:
        raise UnsupportedCoding("zero frame dimension (DNL-defined height) is not supported")
    if len(body) < 6 + 3 * nf:
        raise MalformedMarker("truncated SOF component list")
    comps = []
    for k in range(nf):
        cid, hv, tq = body[6 + 3 * k : 9 + 3 * k]
        h, v = hv >> 4, hv & 15
        if not (1 <= h <= 4 and 1 <= v <= 4) or tq > 3:
            raise MalformedMarker(f"bad component spec {cid}: h={h} v={v} tq={tq}")
        comps.append(Component(cid, h, v, tq))
    frame = Frame(width, height, precision, tuple(comps), marker)
    _subsampling(frame)
    return frame


def _parse(data: bytes, first_scan_only: bool = False):
    """Walk the marker stream; returns ``(JpegTables, [ScanHeader, ...])``."""
    data = bytes(data)
    if data[:2] != b"\xff\xd8":
        raise MalformedMarker("missing SOI marker")
    r = _Reader(data)
    r.pos = 2
    quant: dict[int, np.ndarray] = {}
    huff: dict[tuple[int, int], HuffmanTable] = {}
    frame: Frame | None = None
    restart: int | None = None
    tables: JpegTables | None = None
    scans: list[ScanHeader] = []
    while True:
        m = r.marker()
        if m == EOI:
            break
        if m == SOI or m in _RST or m == 0x01:
            raise MalformedMarker(f"unexpected standalone marker 0x{m:02x}")
        body = r.segment()
        if m in _SEQUENTIAL_HUFFMAN:
            if frame is not None:
                raise MalformedMarker("multiple frames")
            frame = _parse_sof(m, body)
        elif m in _OTHER_SOF or m == _DAC:
            raise UnsupportedCoding(f"SOF/DAC marker 0x{m:02x}: only baseline Huffman coding is supported")
        elif m == _DNL:
            raise UnsupportedCoding("DNL marker is not supported")
        elif m == DQT:
            _parse_dqt(body, quant)
        elif m == DHT:
            _parse_dht(body, huff)
        elif m == DRI:
            if len(body) != 2:
                raise MalformedMarker("bad DRI length")
            (ri,) = struct.unpack(">H", body)
            restart = ri or None
        elif m == SOS:
            if frame is None:
                raise MalformedMarker("SOS before SOF")
            scan = _parse_sos(body, frame, quant, huff, restart, r.pos, data)
            scans.append(scan)
            if tables is None:
                tables = JpegTables(dict(quant), dict(huff), frame, restart)
                if first_scan_only:
                    return tables, scans
            r.pos = scan.data_end
        elif 0xE0 <= m <= 0xEF or m == 0xFE or 0xF0 <= m <= 0xFD or m == 0xC8:
            pass  # APPn, COM, JPGn: skipped
        else:
            raise MalformedMarker(f"unknown marker 0x{m:02x}")
    if tables is None:
        raise MalformedMarker("no scan found")
    return tables, scans


def _parse_sos(body, frame, quant, huff, restart, data_start, data) -> ScanHeader:
    if len(body) < 1:
        raise MalformedMarker("truncated SOS")
    ns = body[0]
    if ns < 1 or ns > 4 or len(body) != 4 + 2 * ns:
        raise MalformedMarker("bad SOS length")
    ids, dcs, acs = [], [], []
    known = {c.id for c in frame.components}
    for k in range(ns):
        cid, t = body[1 + 2 * k], body[2 + 2 * k]
        if cid not in known:
            raise MalformedMarker(f"scan references unknown component {cid}")
        td, ta = t >> 4, t & 15
        if (0, td) not in huff or (1, ta) not in huff:
            raise MalformedMarker(f"scan references undefined Huffman table for component {cid}")
        ids.append(cid)
        dcs.append(td)
        acs.append(ta)
    ss, se, a = body[1 + 2 * ns], body[2 + 2 * ns], body[3 + 2 * ns]
    if (ss, se, a) != (0, 63, 0):
        raise UnsupportedCoding(f"spectral selection {ss}..{se}/{a} implies progressive coding")
    for c in frame.components:
        if c.id in ids and c.tq not in quant:
            raise MalformedMarker(f"component {c.id} uses undefined quantization table {c.tq}")
    m = _SCAN_END.search(data, data_start)
    data_end = m.start() if m else len(data)
    return ScanHeader(
        tuple(ids), tuple(dcs), tuple(acs), data_start, data_end,
        dict(huff), dict(quant), restart,
    )


def parse_headers(data: bytes) -> JpegTables:
    """Parse markers up to the first scan and validate the supported subset."""
    tables, _ = _parse(data, first_scan_only=True)
    return tables


def _segments(data: bytes, scan: ScanHeader) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    raw = data[scan.data_start : scan.data_end]
    parts = _RST_MARKER.split(raw) if scan.restart_interval else [raw]
    parts = [p.replace(b"\xff\x00", b"\xff") for p in parts]
    lengths = np.array([len(p) for p in parts], dtype=np.int64)
    ends = np.cumsum(lengths)
    starts = ends - lengths
    buf = np.frombuffer(b"".join(parts) + b"\x00\x00\x00", dtype=np.uint8)
    return buf, starts, ends


_ERRORS = {
    _entropy.ERR_EXHAUSTED: (BitstreamExhausted, "entropy-coded data ran out"),
    _entropy.ERR_BAD_CODE: (InvalidHuffmanCode, "bit pattern matches no Huffman code"),
    _entropy.ERR_DC_RANGE: (DcOutOfRange, "DC value outside the 8-bit baseline range"),
    _entropy.ERR_AC_OVERRUN: (InvalidHuffmanCode, "AC run/size symbol runs past the end of the block"),
}


def decode_to_dct(data: bytes) -> tuple[DctImage, RleSymbolStats]:
    """Entropy-decode and dequantize every scan; return coefficients and Ns stats."""
    data = bytes(data)
    tables, scans = _parse(data)
    frame = tables.frame
    comps = frame.components
    index = {c.id: i for i, c in enumerate(comps)}
    grids = [(frame.mcus_y * c.v, frame.mcus_x * c.h) for c in comps]
    offsets = np.cumsum([0] + [h * w for h, w in grids])
    out = np.zeros((offsets[-1], 64), dtype=np.int32)
    out_ns = np.zeros(offsets[-1], dtype=np.int16)
    quant_for: dict[int, np.ndarray] = {}
    total = 0
    dc_symbols = 0
    for scan in scans:
        idx = [index[cid] for cid in scan.component_ids]
        for i in idx:
            quant_for.setdefault(i, scan.quant_tables[comps[i].tq])
        if len(idx) == 1:
            # non-interleaved: one block per MCU over the component's own extent
            c = comps[idx[0]]
            cw = -(-frame.width * c.h // frame.hmax)
            ch = -(-frame.height * c.v // frame.vmax)
            mcus_x, mcus_y = -(-cw // 8), -(-ch // 8)
            hs = np.ones(1, dtype=np.int64)
            vs = np.ones(1, dtype=np.int64)
        else:
            mcus_x, mcus_y = frame.mcus_x, frame.mcus_y
            hs = np.array([comps[i].h for i in idx], dtype=np.int64)
            vs = np.array([comps[i].v for i in idx], dtype=np.int64)
        dc_len = np.stack([scan.huffman_tables[(0, t)].lookup[0] for t in scan.dc_table_ids])
        dc_val = np.stack([scan.huffman_tables[(0, t)].lookup[1] for t in scan.dc_table_ids])
        ac_len = np.stack([scan.huffman_tables[(1, t)].lookup[0] for t in scan.ac_table_ids])
        ac_val = np.stack([scan.huffman_tables[(1, t)].lookup[1] for t in scan.ac_table_ids])
        buf, starts, ends = _segments(data, scan)
        err, mcu, nsym = _entropy.decode_scan(
            buf, starts, ends, scan.restart_interval or 0, mcus_x, mcus_y,
            hs, vs,
            np.array([offsets[i] for i in idx], dtype=np.int64),
            np.array([grids[i][1] for i in idx], dtype=np.int64),
            dc_len, dc_val, ac_len, ac_val, ZIGZAG, out, out_ns,
        )
        if err:
            cls, msg = _ERRORS[err]
            raise cls(f"{msg} (scan components {scan.component_ids}, MCU {mcu})")
        total += nsym
        dc_symbols += mcus_x * mcus_y * int((hs * vs).sum())
    planes = []
    per_block = []
    for i, (h, w) in enumerate(grids):
        q = quant_for.get(i)
        if q is None:
            q = tables.quant_tables.get(comps[i].tq, np.ones(64, dtype=np.uint16))
        qn = q[UNZIGZAG].astype(np.int32)
        coef = out[offsets[i] : offsets[i + 1]] * qn
        planes.append(coef.reshape(h, w, 8, 8))
        per_block.append(out_ns[offsets[i] : offsets[i + 1]].reshape(h, w))
    img = DctImage(planes[0], planes[1], planes[2], frame.width, frame.height, tables.subsampling)
    return img, RleSymbolStats(tuple(per_block), total, dc_symbols)


def crop_blocks(img: DctImage, x0: int, y0: int, w: int, h: int) -> DctImage:
    """Slice a rectangle given in luma-block units out of every plane.

    With 4:2:0 sampling all four values must be even so the chroma planes are
    cut on whole blocks.
    """
    f = img.chroma_factor
    if any(v % f for v in (x0, y0, w, h)):
        raise MisalignedCrop(f"crop ({x0}, {y0}, {w}, {h}) is not a multiple of {f} luma blocks")
    rows, cols = img.grid_shape
    if x0 < 0 or y0 < 0 or w <= 0 or h <= 0 or x0 + w > cols or y0 + h > rows:
        raise OutOfBounds(f"crop ({x0}, {y0}, {w}, {h}) outside block grid {cols}x{rows}")
    y = img.y_plane[y0 : y0 + h, x0 : x0 + w]
    cs = (slice(y0 // f, (y0 + h) // f), slice(x0 // f, (x0 + w) // f))
    b = img.block_size
    return img.with_planes(
        y.copy(), img.cb_plane[cs].copy(), img.cr_plane[cs].copy(),
        logical_width=max(0, min(w * b, img.logical_width - x0 * b)),
        logical_height=max(0, min(h * b, img.logical_height - y0 * b)),
    )
