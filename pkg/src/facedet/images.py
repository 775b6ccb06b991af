"""Raster image primitives: color conversion, preprocessing filters, resizing.

Arrays are indexed [row, col]. Grayscale images are (H, W) uint8, RGB and
YCbCr images are (H, W, 3) uint8, binary masks are (H, W) uint8 with values
in {0, 1}. All functions are pure; inputs are never modified in place.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "to_grayscale",
    "rgb_to_ycbcr",
    "ycbcr_to_rgb",
    "downscale",
    "median_filter",
    "histogram_equalization",
    "resize_bilinear",
    "draw_boxes",
]


def _round_u8(x: np.ndarray) -> np.ndarray:
    # half-up rounding, then clamp into the 8-bit range
    return np.clip(np.floor(np.asarray(x, dtype=np.float64) + 0.5), 0.0, 255.0).astype(np.uint8)


def _require_color(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError("expected an (H, W, 3) color image")
    return img


def _require_gray(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 2 or img.size == 0:
        raise ValueError("expected a non-empty (H, W) grayscale image")
    return img


def to_grayscale(img: np.ndarray) -> np.ndarray:
    """Full-range BT.601 luma: round(0.299 R + 0.587 G + 0.114 B)."""
    img = _require_color(img)
    r, g, b = (img[..., c].astype(np.float64) for c in range(3))
    return _round_u8(0.299 * r + 0.587 * g + 0.114 * b)


def rgb_to_ycbcr(img: np.ndarray) -> np.ndarray:
    """Full-range BT.601 RGB -> YCbCr, rounded and clamped per channel."""
    img = _require_color(img)
    r, g, b = (img[..., c].astype(np.float64) for c in range(3))
    y = 0.299 * r + 0.587 * g + 0.114 * b
    cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b
    cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b
    return np.stack([_round_u8(y), _round_u8(cb), _round_u8(cr)], axis=-1)


def ycbcr_to_rgb(img: np.ndarray) -> np.ndarray:
    """Inverse full-range BT.601 transform (round-trip accurate to +-2)."""
    img = _require_color(img)
    y, cb, cr = (img[..., c].astype(np.float64) for c in range(3))
    cb = cb - 128.0
    cr = cr - 128.0
    r = y + 1.402 * cr
    g = y - 0.344136 * cb - 0.714136 * cr
    b = y + 1.772 * cb
    return np.stack([_round_u8(r), _round_u8(g), _round_u8(b)], axis=-1)


def downscale(img: np.ndarray, factor: int) -> np.ndarray:
    """Keep every factor-th row and column, starting at index 0."""
    img = np.asarray(img)
    if factor < 1:
        raise ValueError(f"downscale factor must be >= 1, got {factor}")
    if img.size == 0:
        raise ValueError("cannot downscale an empty image")
    return img[::factor, ::factor].copy()


def median_filter(img: np.ndarray, radius: int) -> np.ndarray:
    """Median over a (2*radius+1)^2 window; borders use edge replication."""
    img = _require_gray(img)
    if radius < 1:
        raise ValueError(f"median radius must be >= 1, got {radius}")
    padded = np.pad(img, radius, mode="edge")
    side = 2 * radius + 1
    windows = np.lib.stride_tricks.sliding_window_view(padded, (side, side))
    # window size is odd, so the median is an exact sample value
    return np.median(windows, axis=(2, 3)).astype(np.uint8)


def histogram_equalization(img: np.ndarray) -> np.ndarray:
    """CDF remap out(v) = round((cdf(v) - cdf_min) / (N - cdf_min) * 255).

    A constant image maps to all zeros (zero numerator by construction).
    """
    img = _require_gray(img)
    hist = np.bincount(img.ravel(), minlength=256)
    cdf = np.cumsum(hist)
    cdf_min = int(cdf[np.flatnonzero(hist)[0]])
    denom = img.size - cdf_min
    if denom == 0:
        return np.zeros_like(img)
    lut = _round_u8((cdf - cdf_min) / denom * 255.0)
    return lut[img]


def resize_bilinear(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resample with corner alignment (endpoints map to endpoints)."""
    img = _require_gray(img)
    h, w = img.shape
    if h < 2 or w < 2:
        raise ValueError("bilinear resize needs at least a 2x2 source")
    if out_h < 1 or out_w < 1:
        raise ValueError("output dimensions must be positive")
    ys = np.linspace(0.0, h - 1.0, out_h)
    xs = np.linspace(0.0, w - 1.0, out_w)
    y0 = np.minimum(ys.astype(np.int64), h - 2)
    x0 = np.minimum(xs.astype(np.int64), w - 2)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    src = img.astype(np.float64)
    tl = src[np.ix_(y0, x0)]
    tr = src[np.ix_(y0, x0 + 1)]
    bl = src[np.ix_(y0 + 1, x0)]
    br = src[np.ix_(y0 + 1, x0 + 1)]
    top = tl + (tr - tl) * fx
    bot = bl + (br - bl) * fx
    return _round_u8(top + (bot - top) * fy)


def draw_boxes(
    img: np.ndarray,
    boxes: list[tuple[int, int, int, int]],
    color: tuple[int, int, int] = (255, 0, 0),
) -> np.ndarray:
    """Return a copy of an RGB image with 1-px rectangles drawn on it."""
    out = _require_color(img).copy()
    h, w = out.shape[:2]
    col = np.array(color, dtype=np.uint8)
    for (bx, by, bw, bh) in boxes:
        x0, y0 = max(bx, 0), max(by, 0)
        x1, y1 = min(bx + bw - 1, w - 1), min(by + bh - 1, h - 1)
        if x1 < x0 or y1 < y0:
            continue
        out[y0, x0 : x1 + 1] = col
        out[y1, x0 : x1 + 1] = col
        out[y0 : y1 + 1, x0] = col
        out[y0 : y1 + 1, x1] = col
    return out
