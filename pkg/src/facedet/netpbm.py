"""Binary netpbm I/O: 8-bit PGM (P5) and PPM (P6).

These are the fixture formats for all golden tests, so reads and writes are
bit-exact: the writer emits a canonical single-whitespace header and the
reader accepts arbitrary whitespace and '#' comments before the raster.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "read_pgm",
    "write_pgm",
    "read_ppm",
    "write_ppm",
    "read_image",
    "read_mask",
    "write_mask",
]


class NetpbmError(ValueError):
    pass


def _parse_header(data: bytes, path: str) -> tuple[bytes, int, int, int, int]:
    """Return (magic, width, height, maxval, raster_offset)."""
    if len(data) < 2:
        raise NetpbmError(f"{path}: truncated file")
    magic = data[:2]
    if magic not in (b"P5", b"P6"):
        raise NetpbmError(f"{path}: unsupported magic {magic!r}")
    pos = 2
    fields: list[int] = []
    while len(fields) < 3:
        # skip whitespace and comments
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        token = data[start:pos]
        if not token.isdigit():
            raise NetpbmError(f"{path}: bad header token {token!r}")
        fields.append(int(token))
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise NetpbmError(f"{path}: missing whitespace after maxval")
    pos += 1
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise NetpbmError(f"{path}: bad dimensions {width}x{height}")
    if not 1 <= maxval <= 255:
        raise NetpbmError(f"{path}: only 8-bit rasters supported (maxval {maxval})")
    return magic, width, height, maxval, pos


def read_pgm(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    magic, w, h, _, off = _parse_header(data, str(path))
    if magic != b"P5":
        raise NetpbmError(f"{path}: expected P5, got {magic!r}")
    raster = data[off : off + w * h]
    if len(raster) != w * h:
        raise NetpbmError(f"{path}: truncated raster")
    return np.frombuffer(raster, dtype=np.uint8).reshape(h, w).copy()


def write_pgm(path: str, img: np.ndarray) -> None:
    img = np.asarray(img, dtype=np.uint8)
    if img.ndim != 2:
        raise NetpbmError("PGM writer expects an (H, W) array")
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def read_ppm(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    magic, w, h, _, off = _parse_header(data, str(path))
    if magic != b"P6":
        raise NetpbmError(f"{path}: expected P6, got {magic!r}")
    raster = data[off : off + 3 * w * h]
    if len(raster) != 3 * w * h:
        raise NetpbmError(f"{path}: truncated raster")
    return np.frombuffer(raster, dtype=np.uint8).reshape(h, w, 3).copy()


def write_ppm(path: str, img: np.ndarray) -> None:
    img = np.asarray(img, dtype=np.uint8)
    if img.ndim != 3 or img.shape[2] != 3:
        raise NetpbmError("PPM writer expects an (H, W, 3) array")
    h, w = img.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def read_image(path: str) -> np.ndarray:
    """Read either format by magic; (H, W) for PGM, (H, W, 3) for PPM."""
    with open(path, "rb") as fh:
        magic = fh.read(2)
    if magic == b"P5":
        return read_pgm(path)
    if magic == b"P6":
        return read_ppm(path)
    raise NetpbmError(f"{path}: unsupported magic {magic!r}")


def read_mask(path: str) -> np.ndarray:
    """Read a PGM ground-truth mask, mapping any nonzero value to 1."""
    return (read_pgm(path) > 0).astype(np.uint8)


def write_mask(path: str, mask: np.ndarray) -> None:
    """Write a {0,1} mask as a {0,255} PGM."""
    mask = np.asarray(mask)
    write_pgm(path, (mask > 0).astype(np.uint8) * 255)
