"""File formats: PNG images, the RAWF container, sidecars, manifests.

RAWF layout (little-endian, 32-byte header, then the payload):

    bytes  0..3   magic "RAWF"
    bytes  4..7   uint32 version (1)
    bytes  8..11  uint32 width
    bytes 12..15  uint32 height
    bytes 16..19  float32 white-balance gain g_r
    bytes 20..23  float32 white-balance gain g_g
    bytes 24..27  float32 white-balance gain g_b
    bytes 28..31  reserved, zero
    payload       height*width float32 samples, row-major

PNG values are clipped to [0, 1] and quantized at write time (16-bit by
default); everything upstream of export stays unclipped.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np

from .image import GreyImage, Image, clip01
from .rawpath import RawImage

SCHEMA = "acutance-bench/1"

RAWF_MAGIC = b"RAWF"
RAWF_VERSION = 1
_RAWF_HEADER = struct.Struct("<4sIIIfff4x")  # 32 bytes


def read_image(path) -> Image:
    """Read a PNG (8- or 16-bit, grey or RGB) into [0, 1] floats."""
    arr = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if arr is None:
        raise OSError(f"cannot read image: {path}")
    if arr.ndim == 3:
        if arr.shape[2] == 4:
            arr = arr[:, :, :3]
        arr = arr[:, :, ::-1]  # BGR -> RGB
    if arr.dtype == np.uint8:
        data = arr.astype(np.float64) / 255.0
    elif arr.dtype == np.uint16:
        data = arr.astype(np.float64) / 65535.0
    else:
        raise OSError(f"unsupported PNG sample type {arr.dtype} in {path}")
    return GreyImage(data) if data.ndim == 2 else Image(data)


def write_image(path, img: Image, bit_depth: int = 16) -> None:
    """Write a PNG, clipping to [0, 1] and quantizing to bit_depth."""
    if bit_depth not in (8, 16):
        raise ValueError("bit_depth must be 8 or 16")
    peak = 255 if bit_depth == 8 else 65535
    dtype = np.uint8 if bit_depth == 8 else np.uint16
    q = np.round(clip01(img).data * peak).astype(dtype)
    if q.ndim == 3:
        q = q[:, :, ::-1]  # RGB -> BGR
    if not cv2.imwrite(str(path), q):
        raise OSError(f"cannot write image: {path}")


def read_rawf(path) -> RawImage:
    """Read a RAWF container."""
    blob = Path(path).read_bytes()
    if len(blob) < _RAWF_HEADER.size:
        raise OSError(f"truncated RAWF header in {path}")
    magic, version, width, height, g_r, g_g, g_b = _RAWF_HEADER.unpack_from(blob)
    if magic != RAWF_MAGIC:
        raise OSError(f"not a RAWF file: {path}")
    if version != RAWF_VERSION:
        raise OSError(f"unsupported RAWF version {version} in {path}")
    payload = np.frombuffer(blob, dtype="<f4", offset=_RAWF_HEADER.size)
    if payload.size != width * height:
        raise OSError(
            f"RAWF payload size {payload.size} != {width}x{height} in {path}"
        )
    data = payload.reshape(height, width).astype(np.float64)
    return RawImage(data, (g_r, g_g, g_b))


def write_rawf(path, raw: RawImage) -> None:
    """Write a RAWF container (samples stored as float32)."""
    g_r, g_g, g_b = raw.wb_gains
    header = _RAWF_HEADER.pack(
        RAWF_MAGIC, RAWF_VERSION, raw.width, raw.height, g_r, g_g, g_b
    )
    payload = raw.data.astype("<f4").tobytes()
    Path(path).write_bytes(header + payload)


def sidecar_path(path) -> Path:
    return Path(str(path) + ".json")


def write_sidecar(path, payload: dict) -> None:
    """Write a schema-tagged JSON sidecar next to an output file."""
    doc = {"schema": SCHEMA, **payload}
    sidecar_path(path).write_text(json.dumps(doc, indent=2) + "\n")


def read_sidecar(path) -> dict:
    doc = json.loads(sidecar_path(path).read_text())
    if doc.get("schema") != SCHEMA:
        raise OSError(f"unexpected sidecar schema {doc.get('schema')!r}")
    return doc


def json_float(x: float):
    """JSON-safe float: infinities map to null (strict JSON has none)."""
    return None if np.isinf(x) else float(x)


@dataclass(frozen=True)
class ManifestItem:
    clean: str
    restored: str
    is_dead_leaves: bool


def read_manifest(path) -> list[ManifestItem]:
    """Parse a batch manifest: one 'clean,restored,flag' line per item.

    Blank lines and lines starting with '#' are skipped; the flag is
    0 or 1.
    """
    items = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise ValueError(f"{path}:{lineno}: expected 'clean,restored,flag'")
        if parts[2] not in ("0", "1"):
            raise ValueError(f"{path}:{lineno}: flag must be 0 or 1")
        items.append(ManifestItem(parts[0], parts[1], parts[2] == "1"))
    return items
