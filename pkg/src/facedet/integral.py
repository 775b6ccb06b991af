"""Integral images for O(1) axis-aligned and 45-degree-rotated rectangle sums.

The upright variant is the classic summed-area table with a zero top row and
left column: ``grid[y, x]`` holds the sum of all pixels in [0, x) x [0, y).
An optional companion table of squared values supports per-window variance.

The tilted variant serves rectangles rotated by 45 degrees. A tilted
rectangle is parameterised by its top corner (apex) and two arm lengths:
``(x, y, w, h)`` covers the pixel set {(x + i - j, y + i + j) : 0 <= i < w,
0 <= j < h}, i.e. w diagonal steps down-right and h steps down-left.
Rotating coordinates to (u, v) = (x + y, y - x) turns that set into an
axis-aligned box on one colour of the checkerboard lattice, so the
implementation keeps one summed-area table per pixel parity; a tilted sum is
then again four table lookups. Accumulators are int64 throughout: squared
8-bit sums overflow 32 bits already on megapixel images.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["IntegralImage", "IntegralSet", "integral_image", "integral_set", "rect_sum"]

UPRIGHT = "upright"
TILTED = "tilted"


@dataclass(frozen=True)
class IntegralImage:
    """Prefix-sum tables over one image, either upright or tilted."""

    variant: str
    width: int
    height: int
    grid: np.ndarray  # upright SAT, or the even-parity diagonal SAT
    grid_odd: np.ndarray | None = None  # tilted only: odd-parity diagonal SAT
    sq: np.ndarray | None = None  # upright only: squared-value SAT, if requested
    voff: int = 0  # tilted only: even shift making y - x non-negative


@dataclass(frozen=True)
class IntegralSet:
    """Upright (with squares) plus tilted tables for one image."""

    upright: IntegralImage
    tilted: IntegralImage | None


def _upright_grid(img: np.ndarray, squared: bool) -> np.ndarray:
    h, w = img.shape
    vals = img.astype(np.int64)
    if squared:
        vals = vals * vals
    grid = np.zeros((h + 1, w + 1), dtype=np.int64)
    np.cumsum(vals, axis=0, out=grid[1:, 1:])
    np.cumsum(grid[1:, 1:], axis=1, out=grid[1:, 1:])
    return grid


def _tilted_grids(img: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    h, w = img.shape
    voff = (w - 1) + ((w - 1) & 1)
    umax = (w - 1) + (h - 1)
    vmax = (h - 1) + voff
    ys, xs = np.indices((h, w))
    u = xs + ys
    v = ys - xs + voff
    grids: list[np.ndarray] = []
    for parity in (0, 1):
        m = (u & 1) == parity
        nu = max(0, (umax - parity) // 2 + 1)
        nv = max(0, (vmax - parity) // 2 + 1)
        g = np.zeros((nu + 1, nv + 1), dtype=np.int64)
        g[(u[m] - parity) // 2 + 1, (v[m] - parity) // 2 + 1] = img[m]
        np.cumsum(g, axis=0, out=g)
        np.cumsum(g, axis=1, out=g)
        grids.append(g)
    return grids[0], grids[1], voff


def integral_image(img: np.ndarray, variant: str = UPRIGHT, with_squares: bool = False) -> IntegralImage:
    img = np.asarray(img)
    if img.ndim != 2 or img.size == 0:
        raise ValueError("expected a non-empty (H, W) image")
    h, w = img.shape
    if variant == UPRIGHT:
        sq = _upright_grid(img, squared=True) if with_squares else None
        return IntegralImage(UPRIGHT, w, h, _upright_grid(img, squared=False), sq=sq)
    if variant == TILTED:
        even, odd, voff = _tilted_grids(img)
        return IntegralImage(TILTED, w, h, even, grid_odd=odd, voff=voff)
    raise ValueError(f"unknown integral variant {variant!r}")


def integral_set(img: np.ndarray, with_tilted: bool = True) -> IntegralSet:
    upright = integral_image(img, UPRIGHT, with_squares=True)
    tilted = integral_image(img, TILTED) if with_tilted else None
    return IntegralSet(upright, tilted)


def _check_upright_bounds(ii: IntegralImage, x: int, y: int, w: int, h: int) -> None:
    if w < 0 or h < 0 or x < 0 or y < 0 or x + w > ii.width or y + h > ii.height:
        raise ValueError(f"rect ({x},{y},{w},{h}) outside {ii.width}x{ii.height} image")


def _check_tilted_bounds(ii: IntegralImage, x: int, y: int, w: int, h: int) -> None:
    if w < 0 or h < 0:
        raise ValueError("negative tilted rect arms")
    if w == 0 or h == 0:
        return
    ok = (
        y >= 0
        and x - (h - 1) >= 0
        and x + (w - 1) <= ii.width - 1
        and y + (w - 1) + (h - 1) <= ii.height - 1
    )
    if not ok:
        raise ValueError(f"tilted rect ({x},{y},{w},{h}) outside {ii.width}x{ii.height} image")


def _upright_sums(grid: np.ndarray, x, y, w: int, h: int):
    return grid[y + h, x + w] - grid[y, x + w] - grid[y + h, x] + grid[y, x]


def _tilted_sums(ii: IntegralImage, x, y, w: int, h: int):
    """Tilted sums for scalar or ndarray apex coordinates (fixed arms)."""
    x = np.asarray(x)
    y = np.asarray(y)
    u = x + y
    v = y - x + ii.voff
    parity = u & 1
    out = np.empty(np.broadcast(x, y).shape, dtype=np.int64)
    for p, g in ((0, ii.grid), (1, ii.grid_odd)):
        m = parity == p
        if not np.any(m):
            continue
        u0 = (u[m] - p) // 2
        v0 = (v[m] - p) // 2
        out[m] = g[u0 + w, v0 + h] - g[u0, v0 + h] - g[u0 + w, v0] + g[u0, v0]
    return out


def rect_sum(ii: IntegralImage, rect: tuple[int, int, int, int]) -> int:
    """Exact pixel sum of a rectangle, four lookups for either variant.

    For the tilted variant ``rect`` is (apex_x, apex_y, w_arm, h_arm) as
    described in the module docstring. Zero-area rectangles sum to 0;
    out-of-bounds rectangles are rejected.
    """
    x, y, w, h = (int(v) for v in rect)
    if ii.variant == UPRIGHT:
        _check_upright_bounds(ii, x, y, w, h)
        if w == 0 or h == 0:
            return 0
        return int(_upright_sums(ii.grid, x, y, w, h))
    _check_tilted_bounds(ii, x, y, w, h)
    if w == 0 or h == 0:
        return 0
    return int(_tilted_sums(ii, np.array([x]), np.array([y]), w, h)[0])
