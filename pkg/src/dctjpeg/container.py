"""DCTZ: a flat little-endian container for coefficient planes and token tensors.

Layout::

    b"DCTZ"  u8 version  u32 header_length  header (UTF-8 JSON)  payload

The header always carries ``kind`` ("dct" or "patches"), ``dtype`` ("i32" or
"f32") and ``shapes``, one entry per stored array. For ``kind == "dct"`` the
arrays are the Y, Cb and Cr planes, each ``(rows, cols, b, b)`` so the payload
is block-raster then in-block raster. ``kind == "patches"`` stores one array
per token tensor plus the layout name and metadata needed to reassemble.

JSON is written with sorted keys and no whitespace, so writing what was read
reproduces the input bytes exactly.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .bitstream import DctImage
from .embed import PatchTensor
from .errors import UnsupportedInput

MAGIC = b"DCTZ"
VERSION = 1
DTYPES = {"i32": np.dtype("<i4"), "f32": np.dtype("<f4")}


class BadContainer(UnsupportedInput):
    pass


def _dtype_tag(arrays) -> str:
    # integer data stays integer; anything else is stored as 32-bit float
    return "i32" if all(np.issubdtype(a.dtype, np.integer) for a in arrays) else "f32"


def _pack(header: dict, arrays) -> bytes:
    tag = header["dtype"]
    head = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    body = b"".join(np.ascontiguousarray(a, dtype=DTYPES[tag]).tobytes() for a in arrays)
    return MAGIC + struct.pack("<BI", VERSION, len(head)) + head + body


def _unpack(buf: bytes) -> tuple[dict, list[np.ndarray]]:
    if buf[:4] != MAGIC:
        raise BadContainer("not a DCTZ container (bad magic)")
    if len(buf) < 9:
        raise BadContainer("truncated DCTZ header")
    version, n = struct.unpack_from("<BI", buf, 4)
    if version != VERSION:
        raise BadContainer(f"unsupported DCTZ version {version}")
    try:
        header = json.loads(buf[9 : 9 + n])
    except ValueError as e:
        raise BadContainer(f"unreadable DCTZ header: {e}") from None
    dt = DTYPES.get(header.get("dtype"))
    if dt is None:
        raise BadContainer(f"unknown dtype {header.get('dtype')!r}")
    shapes = [tuple(s) for s in header["shapes"]]
    need = sum(int(np.prod(s)) for s in shapes) * dt.itemsize
    off = 9 + n
    if len(buf) - off != need:
        raise BadContainer(f"payload is {len(buf) - off} bytes, header implies {need}")
    arrays = []
    for s in shapes:
        k = int(np.prod(s))
        a = np.frombuffer(buf, dtype=dt, count=k, offset=off).reshape(s)
        arrays.append(a.astype(dt.newbyteorder("=")))
        off += k * dt.itemsize
    return header, arrays


# -- coefficient images --------------------------------------------------------


def dumps(img: DctImage) -> bytes:
    header = {
        "kind": "dct",
        "width": int(img.logical_width),
        "height": int(img.logical_height),
        "subsampling": img.subsampling,
        "dtype": _dtype_tag(img.planes),
        "shapes": [list(p.shape) for p in img.planes],
    }
    return _pack(header, img.planes)


def loads(buf: bytes) -> DctImage:
    header, arrays = _unpack(buf)
    if header.get("kind") != "dct" or len(arrays) != 3:
        raise BadContainer(f"expected a coefficient image, found kind {header.get('kind')!r}")
    return DctImage(*arrays, header["width"], header["height"], header["subsampling"])


# -- token tensors ---------------------------------------------------------------


def dumps_patches(tokens: PatchTensor | tuple[PatchTensor, ...]) -> bytes:
    parts = tokens if isinstance(tokens, tuple) else (tokens,)
    header = {
        "kind": "patches",
        "layouts": [t.layout for t in parts],
        "meta": json.loads(json.dumps(parts[0].meta)),
        "dtype": _dtype_tag([t.data for t in parts]),
        "shapes": [list(t.data.shape) for t in parts],
    }
    return _pack(header, [t.data for t in parts])


def loads_patches(buf: bytes) -> PatchTensor | tuple[PatchTensor, ...]:
    header, arrays = _unpack(buf)
    if header.get("kind") != "patches":
        raise BadContainer(f"expected token tensors, found kind {header.get('kind')!r}")
    meta = header["meta"]
    for k, v in meta.items():
        if isinstance(v, list):
            meta[k] = tuple(v)
    parts = tuple(PatchTensor(a, layout, dict(meta)) for a, layout in zip(arrays, header["layouts"]))
    return parts[0] if len(parts) == 1 else parts


def read_header(buf: bytes) -> dict:
    return _unpack(buf)[0]


def write(path: str | Path, obj) -> None:
    data = dumps(obj) if isinstance(obj, DctImage) else dumps_patches(obj)
    Path(path).write_bytes(data)


def read(path: str | Path):
    buf = Path(path).read_bytes()
    kind = read_header(buf).get("kind")
    return loads(buf) if kind == "dct" else loads_patches(buf)
