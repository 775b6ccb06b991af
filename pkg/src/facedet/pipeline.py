"""End-to-end pipeline wiring: preprocess, segment, detect, validate, score.

Everything here is deterministic given (inputs, config): detection boxes
found on a downscaled image are mapped back to original coordinates.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .boost import Cascade, train_cascade
from .config import PipelineConfig
from .detect import Detection, ScanStats, detect_multiscale_counted, merge_detections
from .evaluate import DatasetManifest, match_detections
from .images import (
    downscale,
    histogram_equalization,
    median_filter,
    resize_bilinear,
    to_grayscale,
    rgb_to_ycbcr,
)
from .lbp import validation_feature
from .netpbm import read_image, read_mask, read_pgm
from .skin import Region, SkinThresholds, classify_skin, extract_regions, refine_mask, skin_ratio, sobel_edges
from .svm import LinearSvmModel, train_svm
from .validate import validate_detections

__all__ = [
    "preprocess_gray",
    "SegmentResult",
    "segment_image",
    "detect_faces",
    "load_sample_dir",
    "train_models",
    "train_validator_from_crops",
    "crop_square",
    "pick_svm_threshold",
    "evaluate_images",
]


def preprocess_gray(gray: np.ndarray, config: PipelineConfig) -> np.ndarray:
    out = gray
    if config.downscale > 1:
        out = downscale(out, config.downscale)
    if config.median_radius > 0:
        out = median_filter(out, config.median_radius)
    if config.equalize:
        out = histogram_equalization(out)
    return out


@dataclass(frozen=True)
class SegmentResult:
    mask: np.ndarray
    regions: list[Region]
    ratio: float  # percentage of mask pixels marked skin


def segment_image(rgb: np.ndarray, config: PipelineConfig) -> SegmentResult:
    """Skin classification, Sobel-edge refinement, and region extraction."""
    thresholds = SkinThresholds(config.cb_min, config.cb_max, config.cr_min, config.cr_max)
    skin = classify_skin(rgb_to_ycbcr(rgb), thresholds)
    edges = sobel_edges(to_grayscale(rgb), config.sobel_threshold)
    mask = refine_mask(skin, edges)
    min_area = config.min_area or max(1, round(mask.size * 0.001))
    return SegmentResult(mask, extract_regions(mask, min_area), skin_ratio(mask))


def detect_faces(
    gray: np.ndarray,
    cascade: Cascade,
    config: PipelineConfig,
    skin: np.ndarray | None = None,
    svm: LinearSvmModel | None = None,
) -> tuple[list[Detection], ScanStats]:
    """Preprocess, scan, merge, and (with a model) validate.

    ``gray`` and ``skin`` are full-resolution; preprocessing (including any
    downscale) happens here and boxes come back in input coordinates.
    """
    work = preprocess_gray(gray, config)
    factor = config.downscale
    gate = skin
    if gate is not None and factor > 1:
        gate = downscale(gate, factor)
    raw, stats = detect_multiscale_counted(
        cascade,
        work,
        skin=gate,
        scale_factor=config.scale_factor,
        step=config.step,
        min_skin_fraction=config.min_skin_fraction,
    )
    merged = merge_detections(raw, config.min_neighbors, config.overlap)
    if factor > 1:
        merged = [
            Detection(d.x * factor, d.y * factor, d.w * factor, d.h * factor, d.score, d.scale)
            for d in merged
        ]
    if svm is not None:
        kept, _ = validate_detections(
            merged, gray, svm, config.svm_threshold, config.block_weights
        )
        merged = kept
    return merged, stats


def load_sample_dir(path: str) -> list[np.ndarray]:
    """All PGM samples in a directory, sorted by filename."""
    names = sorted(n for n in os.listdir(path) if n.endswith(".pgm"))
    if not names:
        raise ValueError(f"{path}: no .pgm samples found")
    return [read_pgm(os.path.join(path, n)) for n in names]


def crop_square(img: np.ndarray, box: tuple[int, int, int, int], size: int) -> np.ndarray:
    """Clamp a box inside the image, crop, and resize to size x size."""
    h, w = img.shape
    x, y, bw, bh = box
    x = max(0, min(x, w - 2))
    y = max(0, min(y, h - 2))
    bw = max(2, min(bw, w - x))
    bh = max(2, min(bh, h - y))
    crop = img[y : y + bh, x : x + bw]
    return crop if crop.shape == (size, size) else resize_bilinear(crop, size, size)


def train_models(
    pos_samples: list[np.ndarray],
    neg_samples: list[np.ndarray],
    config: PipelineConfig,
    pool: list[np.ndarray] | None = None,
    with_svm: bool = False,
):
    """Cascade (and optionally a validator trained on the same samples)."""
    cascade = train_cascade(
        pos_samples,
        neg_samples,
        n_stages=config.stages,
        target_dr=config.target_dr,
        max_fpr=config.max_fpr,
        max_stumps=config.max_stumps,
        base_window=config.base_window,
        pool=pool,
        feature_subsample=config.feature_subsample,
        seed=config.seed,
    )
    svm = None
    if with_svm:
        svm = train_validator_from_crops(pos_samples, neg_samples, config)
    return cascade, svm


def train_validator_from_crops(
    pos_crops: list[np.ndarray], neg_crops: list[np.ndarray], config: PipelineConfig
) -> LinearSvmModel:
    features = np.stack(
        [validation_feature(c, config.block_weights) for c in pos_crops + neg_crops]
    )
    labels = np.concatenate([np.ones(len(pos_crops)), -np.ones(len(neg_crops))])
    return train_svm(features, labels, reg=config.svm_reg, epochs=config.svm_epochs, seed=config.seed)


def pick_svm_threshold(
    model: LinearSvmModel,
    pos_crops: list[np.ndarray],
    config: PipelineConfig,
    keep_fraction: float = 0.99,
) -> float:
    """Decision threshold passing at least ``keep_fraction`` of the crops.

    Same quantile rule as the stage-threshold adjustment: the k-th lowest
    decision value with k = ceil((1 - keep) * n), so fewer than k fail.
    """
    values = np.sort(
        [float(model.decision(validation_feature(c, config.block_weights))) for c in pos_crops]
    )
    k = max(1, int(np.ceil((1.0 - keep_fraction) * len(values))))
    return float(values[k - 1])


def evaluate_images(
    entries,
    cascade: Cascade,
    config: PipelineConfig,
    svm: LinearSvmModel | None = None,
    threads: int = 1,
):
    """Per-entry (cascade detections, validated detections, truth, stats).

    Aggregation is order-independent; results always come back in manifest
    order regardless of the worker count.
    """
    manifest_entries = entries.entries if isinstance(entries, DatasetManifest) else list(entries)

    def run(entry):
        img = read_image(entry.path)
        gray = to_grayscale(img) if img.ndim == 3 else img
        skin = read_mask(entry.mask_path) if entry.mask_path else None
        dets, stats = detect_faces(gray, cascade, config, skin=skin)
        validated = dets
        if svm is not None:
            validated, _ = validate_detections(
                dets, gray, svm, config.svm_threshold, config.block_weights
            )
        return dets, validated, entry.boxes, stats

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(run, manifest_entries))
    return [run(e) for e in manifest_entries]


def summarize(results, iou_min: float = 0.5) -> dict:
    """Aggregate hits/misses/false positives for cascade-only and validated."""
    agg = {
        "cascade": [0, 0, 0],
        "validated": [0, 0, 0],
        "total_windows": 0,
        "evaluated_windows": 0,
        "images": len(results),
    }
    for dets, validated, truth, stats in results:
        for key, dd in (("cascade", dets), ("validated", validated)):
            h, m, f = match_detections(dd, truth, iou_min)
            agg[key][0] += h
            agg[key][1] += m
            agg[key][2] += f
        agg["total_windows"] += stats.total_windows
        agg["evaluated_windows"] += stats.evaluated_windows
    return agg
