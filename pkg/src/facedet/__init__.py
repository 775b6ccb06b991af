"""Trainable face detection: skin-color gating, a boosted Haar cascade, and
local-binary-pattern + linear-SVM false-positive rejection."""

from .boost import (
    Cascade,
    Stage,
    WeakClassifier,
    classify_window,
    load_cascade,
    save_cascade,
    train_cascade,
    train_stage,
    train_stump,
)
from .config import PipelineConfig, load_config_file
from .detect import Detection, ScanStats, detect_multiscale, detect_multiscale_counted, merge_detections
from .evaluate import (
    DatasetManifest,
    RocCurve,
    detection_rate,
    emit_report,
    emit_report_csv,
    false_alarm_rate,
    load_manifest,
    match_detections,
    roc_sweep,
)
from .haar import HaarFeature, eval_feature, generate_feature_set
from .images import (
    downscale,
    histogram_equalization,
    median_filter,
    resize_bilinear,
    rgb_to_ycbcr,
    to_grayscale,
    ycbcr_to_rgb,
)
from .integral import IntegralImage, IntegralSet, integral_image, integral_set, rect_sum
from .lbp import (
    coarse_histogram,
    fine_features,
    lbp_label_image,
    resize_to_16,
    uniform_pattern_table,
    validation_feature,
)
from .skin import (
    Region,
    SegmentationMetrics,
    SkinThresholds,
    classify_skin,
    evaluate_segmentation,
    extract_regions,
    morphology,
    refine_mask,
    skin_ratio,
    sobel_edges,
)
from .svm import LinearSvmModel, load_svm, save_svm, train_svm
from .validate import validate_detections

__version__ = "0.1.0"
