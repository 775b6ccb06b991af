"""Two-stage local-binary-pattern descriptor for candidate validation.

The label operator compares each interior pixel against its 8 ring
neighbors (radius 1). Conventions, fixed so tests can be exact: neighbors
are taken clockwise starting at the top-left, bit i belongs to the i-th
neighbor, and a neighbor >= center sets its bit (so a constant image labels
as 255 everywhere).

The coarse stage is a 59-bin histogram over the whole window: the 58
uniform labels (at most two circular 0/1 transitions) in ascending order,
plus one catch-all bin. The fine stage resamples the window to 16x16,
labels it (14x14), splits it into nine 6x6 blocks with 2-px overlap at
offsets {0, 4, 8}, and keeps a 16-bin histogram of label // 16 per block:
9 * 16 = 144 values. Both parts are L1-normalized independently and
concatenated into the 203-value descriptor; fine blocks accept optional
emphasis weights (default all ones).
"""

from __future__ import annotations

import numpy as np

from .images import resize_bilinear

__all__ = [
    "lbp_label_image",
    "uniform_pattern_table",
    "coarse_histogram",
    "resize_to_16",
    "fine_features",
    "validation_feature",
    "FINE_BLOCK_OFFSETS",
    "DESCRIPTOR_LENGTH",
]

# clockwise ring starting at the top-left neighbor; bit i = 2**i
_NEIGHBOR_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1))

FINE_BLOCK_OFFSETS = (0, 4, 8)
DESCRIPTOR_LENGTH = 203

_uniform_table: np.ndarray | None = None


def lbp_label_image(img: np.ndarray) -> np.ndarray:
    """(H-2, W-2) label image; the 1-px border has no full neighborhood."""
    img = np.asarray(img)
    if img.ndim != 2 or img.shape[0] < 3 or img.shape[1] < 3:
        raise ValueError("label image needs a source of at least 3x3")
    h, w = img.shape
    center = img[1 : h - 1, 1 : w - 1]
    labels = np.zeros(center.shape, dtype=np.uint8)
    for bit, (dy, dx) in enumerate(_NEIGHBOR_OFFSETS):
        neighbor = img[1 + dy : h - 1 + dy, 1 + dx : w - 1 + dx]
        labels |= (neighbor >= center).astype(np.uint8) << bit
    return labels


def _transitions(label: int) -> int:
    bits = [(label >> i) & 1 for i in range(8)]
    return sum(bits[i] != bits[(i + 1) % 8] for i in range(8))


def uniform_pattern_table() -> np.ndarray:
    """Map label [0,255] -> coarse bin [0,58]; built once, then cached."""
    global _uniform_table
    if _uniform_table is None:
        table = np.full(256, 58, dtype=np.uint8)
        uniform = [label for label in range(256) if _transitions(label) <= 2]
        for bin_idx, label in enumerate(uniform):
            table[label] = bin_idx
        _uniform_table = table
    return _uniform_table


def coarse_histogram(labels: np.ndarray) -> np.ndarray:
    """59 bin counts of the label image through the uniform-pattern table."""
    labels = np.asarray(labels)
    if labels.size == 0:
        raise ValueError("empty label image")
    return np.bincount(uniform_pattern_table()[labels].ravel(), minlength=59).astype(np.int64)


def resize_to_16(patch: np.ndarray) -> np.ndarray:
    return resize_bilinear(patch, 16, 16)


def fine_features(patch16: np.ndarray) -> np.ndarray:
    """144 counts: nine overlapping 6x6 label blocks, 16 bins of label // 16."""
    patch16 = np.asarray(patch16)
    if patch16.shape != (16, 16):
        raise ValueError(f"fine stage expects a 16x16 patch, got {patch16.shape}")
    bands = lbp_label_image(patch16) // 16  # 14x14 values in [0, 15]
    out = np.empty(144, dtype=np.int64)
    idx = 0
    for by in FINE_BLOCK_OFFSETS:
        for bx in FINE_BLOCK_OFFSETS:
            block = bands[by : by + 6, bx : bx + 6]
            out[idx * 16 : (idx + 1) * 16] = np.bincount(block.ravel(), minlength=16)
            idx += 1
    return out


def validation_feature(window: np.ndarray, block_weights=None) -> np.ndarray:
    """The 203-value descriptor: normalized coarse part then fine part."""
    coarse = coarse_histogram(lbp_label_image(window)).astype(np.float64)
    coarse /= coarse.sum()
    fine = fine_features(resize_to_16(window)).astype(np.float64)
    fine /= fine.sum()
    if block_weights is not None:
        weights = np.asarray(block_weights, dtype=np.float64)
        if weights.shape != (9,):
            raise ValueError("expected 9 fine-block weights")
        fine = fine * np.repeat(weights, 16)
    return np.concatenate([coarse, fine])
