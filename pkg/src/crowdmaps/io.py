"""Bit-exact map serialization and PNG visualization.

DMAP file layout (all integers little-endian):

    bytes 0..3    magic "DMAP"
    bytes 4..7    format version, uint32, currently 1
    bytes 8..11   height, uint32
    bytes 12..15  width, uint32
    bytes 16..    height * width float32 values, row-major

Values are stored as IEEE-754 binary32; write followed by read returns a
bit-identical array.  PNG output is produced by a built-in encoder (8-bit
gray or RGB, zlib level 9) so identical maps always yield identical bytes.
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    MalformedInputError,
    TruncatedPayloadError,
    UnsupportedVersionError,
)
from .postprocess import Detection

MAGIC = b"DMAP"
VERSION = 1
_HEADER = struct.Struct("<4sIII")  # magic, version, height, width


def write_map(path, values) -> None:
    """Write a 2-D map to `path` in DMAP format (float32 payload)."""
    arr = np.asarray(values)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a non-empty 2-D map, got shape {arr.shape}")
    h, w = arr.shape
    payload = np.ascontiguousarray(arr, dtype="<f4").tobytes()
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, VERSION, h, w))
        f.write(payload)


def read_map(path) -> np.ndarray:
    """Read a DMAP file back into an (h, w) float32 array."""
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise BadMagicError(f"not a DMAP file: magic {data[:4]!r}")
    if len(data) < _HEADER.size:
        raise TruncatedPayloadError("file ends inside the header")
    _, version, h, w = _HEADER.unpack_from(data)
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported DMAP version {version}")
    if h < 1 or w < 1:
        raise MalformedInputError(f"invalid dimensions {w}x{h}")
    expected = h * w * 4
    body = data[_HEADER.size :]
    if len(body) < expected:
        raise TruncatedPayloadError(
            f"payload has {len(body)} bytes, expected {expected}"
        )
    if len(body) > expected:
        raise MalformedInputError(f"{len(body) - expected} trailing bytes")
    return np.frombuffer(body, dtype="<f4").reshape(h, w).copy()


# viridis sampled at ten evenly spaced stops, linearly interpolated between
_VIRIDIS_STOPS = np.array(
    [
        [68, 1, 84],
        [72, 40, 120],
        [62, 74, 137],
        [49, 104, 142],
        [38, 130, 142],
        [31, 158, 137],
        [53, 183, 121],
        [109, 205, 89],
        [180, 222, 44],
        [253, 231, 37],
    ],
    dtype=np.float64,
)


def _viridis_lut() -> np.ndarray:
    xs = np.linspace(0.0, 1.0, len(_VIRIDIS_STOPS))
    t = np.linspace(0.0, 1.0, 256)
    lut = np.stack([np.interp(t, xs, _VIRIDIS_STOPS[:, c]) for c in range(3)], axis=1)
    return np.clip(np.rint(lut), 0, 255).astype(np.uint8)


def _png_chunk(tag: bytes, body: bytes) -> bytes:
    return (
        struct.pack(">I", len(body))
        + tag
        + body
        + struct.pack(">I", zlib.crc32(tag + body))
    )


def _encode_png(img: np.ndarray) -> bytes:
    """Minimal PNG writer for (h, w) gray or (h, w, 3) RGB uint8 images."""
    if img.ndim == 2:
        color_type = 0
        rows = img[:, :, None]
    elif img.ndim == 3 and img.shape[2] == 3:
        color_type = 2
        rows = img
    else:
        raise ValueError(f"cannot encode image of shape {img.shape}")
    h, w = rows.shape[:2]
    raw = b"".join(
        b"\x00" + rows[i].tobytes() for i in range(h)
    )  # filter type 0 per scanline
    ihdr = struct.pack(">IIBBBBB", w, h, 8, color_type, 0, 0, 0)
    return (
        b"\x89PNG\r\n\x1a\n"
        + _png_chunk(b"IHDR", ihdr)
        + _png_chunk(b"IDAT", zlib.compress(raw, 9))
        + _png_chunk(b"IEND", b"")
    )


def render_png(values, colormap: str = "viridis", normalize: bool = True) -> bytes:
    """Encode a map as PNG bytes.

    With normalize the map maximum becomes full brightness (an all-zero
    map stays black); otherwise values are clipped to [0, 1] first.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D map, got shape {arr.shape}")
    if normalize:
        mx = float(arr.max()) if arr.size else 0.0
        scaled = arr / mx if mx > 0.0 else np.zeros_like(arr)
    else:
        scaled = np.clip(arr, 0.0, 1.0)
    u8 = np.clip(np.rint(scaled * 255.0), 0, 255).astype(np.uint8)
    if colormap == "gray":
        return _encode_png(u8)
    if colormap == "viridis":
        return _encode_png(_viridis_lut()[u8])
    raise ValueError(f"unknown colormap {colormap!r}")


def write_png(path, values, colormap: str = "viridis", normalize: bool = True) -> None:
    Path(path).write_bytes(render_png(values, colormap=colormap, normalize=normalize))


def detections_to_json(detections: list[Detection]) -> str:
    """Serialize detections as a JSON array of {x, y, score, box:[x,y,w,h]}."""
    rows = [
        {
            "x": d.x,
            "y": d.y,
            "score": d.score,
            "box": list(d.box) if d.box is not None else None,
        }
        for d in detections
    ]
    return json.dumps(rows, indent=2)
