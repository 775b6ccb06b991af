"""Command-line entry point.

Subcommands: segment, train, detect, eval, roc. Configuration precedence is
built-in defaults < --config file < explicit flags. Exit codes: 0 success,
1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import pipeline
from .boost import load_cascade, save_cascade
from .config import PipelineConfig, load_config_file
from .detect import Detection
from .evaluate import (
    ManifestError,
    detection_rate,
    emit_report,
    emit_report_csv,
    false_alarm_rate,
    load_manifest,
    roc_sweep,
)
from .images import draw_boxes, to_grayscale
from .netpbm import NetpbmError, read_image, write_mask, write_ppm
from .svm import load_svm, save_svm
from .validate import decision_values

__all__ = ["main"]

USAGE_EXIT = 1
DATA_EXIT = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    grp = common.add_argument_group("pipeline configuration")
    grp.add_argument("--config", help="key = value config file")
    grp.add_argument("--seed", type=int, help="RNG seed (default 0)")
    grp.add_argument("--threads", type=int, default=1, help="worker threads for eval (default 1)")
    grp.add_argument("--downscale", type=int, help="keep every n-th row/column (default 1)")
    grp.add_argument("--median-radius", type=int, dest="median_radius", help="median filter radius, 0 = off (default 0)")
    grp.add_argument("--equalize", action=argparse.BooleanOptionalAction, default=None, help="histogram equalization (default off)")
    grp.add_argument("--cb-min", type=int, dest="cb_min", help="skin Cb lower bound (default 77)")
    grp.add_argument("--cb-max", type=int, dest="cb_max", help="skin Cb upper bound (default 127)")
    grp.add_argument("--cr-min", type=int, dest="cr_min", help="skin Cr lower bound (default 133)")
    grp.add_argument("--cr-max", type=int, dest="cr_max", help="skin Cr upper bound (default 173)")
    grp.add_argument("--sobel-threshold", type=float, dest="sobel_threshold", help="edge magnitude threshold (default 100)")
    grp.add_argument("--min-area", type=int, dest="min_area", help="minimum region pixels, 0 = 0.1%% of image (default 0)")
    grp.add_argument("--stages", type=int, help="cascade stages to train (default 15)")
    grp.add_argument("--target-dr", type=float, dest="target_dr", help="per-stage detection-rate target (default 0.99)")
    grp.add_argument("--max-fpr", type=float, dest="max_fpr", help="per-stage false-positive ceiling (default 0.5)")
    grp.add_argument("--max-stumps", type=int, dest="max_stumps", help="stump cap per stage (default 20)")
    grp.add_argument("--base-window", type=int, dest="base_window", help="training window side (default 24)")
    grp.add_argument("--feature-subsample", type=int, dest="feature_subsample", help="features kept from the bank, 0 = all (default 0)")
    grp.add_argument("--scale-factor", type=float, dest="scale_factor", help="window growth per level (default 1.25)")
    grp.add_argument("--step", type=int, help="scan step at base scale (default 2)")
    grp.add_argument("--min-skin-fraction", type=float, dest="min_skin_fraction", help="skin gating fraction (default 0.25)")
    grp.add_argument("--min-neighbors", type=int, dest="min_neighbors", help="merge group minimum (default 2)")
    grp.add_argument("--overlap", type=float, help="merge IoU threshold (default 0.3)")
    grp.add_argument("--svm-threshold", type=float, dest="svm_threshold", help="validation decision threshold (default 0)")
    grp.add_argument("--svm-reg", type=float, dest="svm_reg", help="SVM regularization (default 1e-3)")
    grp.add_argument("--svm-epochs", type=int, dest="svm_epochs", help="SVM training epochs (default 30)")
    grp.add_argument("--block-weights", dest="block_weights", help="9 comma-separated fine-block weights")
    return common


_CONFIG_KEYS = [
    "downscale", "median_radius", "equalize", "cb_min", "cb_max", "cr_min", "cr_max",
    "sobel_threshold", "min_area", "stages", "target_dr", "max_fpr", "max_stumps",
    "base_window", "feature_subsample", "seed", "scale_factor", "step",
    "min_skin_fraction", "min_neighbors", "overlap", "svm_threshold", "svm_reg",
    "svm_epochs", "block_weights",
]


def _build_config(args) -> PipelineConfig:
    config = PipelineConfig()
    if args.config:
        config = load_config_file(args.config, config)
    overrides = {}
    for key in _CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is None:
            continue
        if key == "block_weights" and isinstance(value, str):
            value = tuple(float(v) for v in value.split(","))
        overrides[key] = value
    return config.override(**overrides)


def _write_detections(path: str, detections: list[Detection]) -> None:
    lines = [f"{d.x} {d.y} {d.w} {d.h} {d.score:.9g}" for d in detections]
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + ("\n" if lines else ""))


def _cmd_segment(args) -> int:
    config = _build_config(args)
    img = read_image(args.input)
    if img.ndim != 3:
        raise ValueError(f"{args.input}: segmentation needs a color (PPM) input")
    result = pipeline.segment_image(img, config)
    write_mask(args.output, result.mask)
    print(f"skin_ratio={result.ratio:.9g} regions={len(result.regions)}")
    return 0


def _cmd_train(args) -> int:
    config = _build_config(args)
    pos = pipeline.load_sample_dir(args.pos)
    neg = pipeline.load_sample_dir(args.neg)
    pool = pipeline.load_sample_dir(args.pool) if args.pool else None
    cascade, svm = pipeline.train_models(pos, neg, config, pool=pool, with_svm=bool(args.svm_out))
    save_cascade(cascade, args.out)
    for i, (dr, fpr) in enumerate(cascade.metadata):
        print(f"stage {i}: dr={dr:.9g} fpr={fpr:.9g}")
    if args.svm_out:
        save_svm(svm, args.svm_out)
    return 0


def _cmd_detect(args) -> int:
    config = _build_config(args)
    cascade = load_cascade(args.cascade)
    svm = load_svm(args.svm) if args.svm and not args.no_validate else None
    img = read_image(args.image)
    color = img if img.ndim == 3 else None
    gray = to_grayscale(img) if img.ndim == 3 else img
    work_h = gray.shape[0] // config.downscale
    work_w = gray.shape[1] // config.downscale
    if min(work_h, work_w) < cascade.base_window:
        raise ValueError(
            f"{args.image}: preprocessed image {work_w}x{work_h} is smaller than "
            f"the {cascade.base_window}px model window"
        )
    skin = None
    if color is not None and not args.no_gate:
        skin = pipeline.segment_image(color, config).mask
    detections, stats = pipeline.detect_faces(gray, cascade, config, skin=skin, svm=svm)
    _write_detections(args.out, detections)
    if args.annotate:
        canvas = color if color is not None else np.stack([gray] * 3, axis=-1)
        boxes = [(d.x, d.y, d.w, d.h) for d in detections]
        write_ppm(args.annotate, draw_boxes(canvas, boxes))
    print(
        f"detections={len(detections)} evaluated_windows={stats.evaluated_windows} "
        f"total_windows={stats.total_windows}"
    )
    return 0


def _rescore(results, svm, config):
    """Replace detection scores with validator decision values."""
    from .netpbm import read_image as _read

    rescored = []
    for (dets, _validated, truth, _stats), entry in results:
        img = _read(entry.path)
        gray = to_grayscale(img) if img.ndim == 3 else img
        values = decision_values(dets, gray, svm, config.block_weights)
        scored = [
            Detection(d.x, d.y, d.w, d.h, float(v), d.scale) for d, v in zip(dets, values)
        ]
        rescored.append((scored, truth))
    return rescored


def _roc_thresholds(per_image, limit: int = 64):
    scores = sorted({float(d.score) for dets, _ in per_image for d in dets})
    if not scores:
        return [0.0]
    if len(scores) > limit:
        idx = np.linspace(0, len(scores) - 1, limit).astype(int)
        scores = [scores[i] for i in idx]
    return scores + [scores[-1] + 1.0]


def _write_roc(path: str, curve) -> None:
    lines = [f"{t:.9g},{tpr:.9g},{fpi:.9g}" for t, tpr, fpi in curve.points]
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + ("\n" if lines else ""))


def _cmd_eval(args) -> int:
    config = _build_config(args)
    cascade = load_cascade(args.cascade)
    svm = load_svm(args.svm) if args.svm else None
    manifest = load_manifest(args.manifest, args.mask_manifest)
    if not manifest.entries:
        raise ValueError(f"{args.manifest}: empty manifest")
    results = pipeline.evaluate_images(manifest, cascade, config, svm=svm, threads=args.threads)
    summary = pipeline.summarize(results)
    rows = [("Adaboost Cascade", *summary["cascade"], detection_rate(summary["cascade"][0], summary["cascade"][1]))]
    if svm is not None:
        rows.append(
            ("Cascade + validation", *summary["validated"],
             detection_rate(summary["validated"][0], summary["validated"][1]))
        )
    print(emit_report_csv(rows) if args.csv else emit_report(rows))
    windows = summary["evaluated_windows"]
    if windows:
        for (name, _h, _m, fps, _r) in rows:
            print(f"false_alarm_rate[{name}]={false_alarm_rate(fps, windows):.9g}")
    if args.roc:
        if svm is not None:
            per_image = _rescore(list(zip(results, manifest.entries)), svm, config)
        else:
            per_image = [(dets, truth) for dets, _v, truth, _s in results]
        curve = roc_sweep(per_image, _roc_thresholds(per_image))
        _write_roc(args.roc, curve)
    return 0


def _cmd_roc(args) -> int:
    args.csv = False
    args.roc = args.out
    return _cmd_eval(args)


def main(argv=None) -> int:
    common = _common_flags()
    parser = _Parser(prog="facedet", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_seg = sub.add_parser("segment", parents=[common], help="write a refined skin mask")
    p_seg.add_argument("--in", dest="input", required=True, help="input PPM image")
    p_seg.add_argument("--out", dest="output", required=True, help="output PGM mask")

    p_train = sub.add_parser("train", parents=[common], help="train cascade (and validator)")
    p_train.add_argument("--pos", required=True, help="directory of positive PGM tiles")
    p_train.add_argument("--neg", required=True, help="directory of negative PGM tiles")
    p_train.add_argument("--pool", help="directory of background images for mining")
    p_train.add_argument("--out", required=True, help="output cascade model path")
    p_train.add_argument("--svm-out", dest="svm_out", help="also train and write a validator model")

    p_det = sub.add_parser("detect", parents=[common], help="detect faces in one image")
    p_det.add_argument("--cascade", required=True, help="cascade model path")
    p_det.add_argument("--svm", help="validator model path")
    p_det.add_argument("--image", required=True, help="input PGM/PPM image")
    p_det.add_argument("--out", required=True, help="output detections ('x y w h score' lines)")
    p_det.add_argument("--annotate", help="write a PPM copy with boxes drawn")
    p_det.add_argument("--no-validate", dest="no_validate", action="store_true", help="skip validation even with --svm")
    p_det.add_argument("--no-gate", dest="no_gate", action="store_true", help="disable skin gating")

    p_eval = sub.add_parser("eval", parents=[common], help="evaluate over a manifest")
    p_eval.add_argument("--cascade", required=True)
    p_eval.add_argument("--svm")
    p_eval.add_argument("--manifest", required=True)
    p_eval.add_argument("--mask-manifest", dest="mask_manifest", help="optional image->skin-mask manifest")
    p_eval.add_argument("--roc", help="write a 'threshold,tpr,fp_per_image' curve file")
    p_eval.add_argument("--csv", action="store_true", help="machine-readable report")

    p_roc = sub.add_parser("roc", parents=[common], help="write an ROC curve for a manifest")
    p_roc.add_argument("--cascade", required=True)
    p_roc.add_argument("--svm")
    p_roc.add_argument("--manifest", required=True)
    p_roc.add_argument("--mask-manifest", dest="mask_manifest")
    p_roc.add_argument("--out", required=True)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code == 0:  # --help
            raise
        return USAGE_EXIT
    handlers = {
        "segment": _cmd_segment,
        "train": _cmd_train,
        "detect": _cmd_detect,
        "eval": _cmd_eval,
        "roc": _cmd_roc,
    }
    try:
        return handlers[args.command](args)
    except (OSError, ValueError, ManifestError, NetpbmError) as exc:
        print(f"facedet: error: {exc}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    sys.exit(main())
