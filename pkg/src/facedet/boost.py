"""Decision stumps, boosted stages, and the attentional cascade.

A stump predicts +1 (face) iff polarity * value < polarity * threshold.
Stage voting follows the usual cascade convention: each stump contributes
alpha if it votes face, 0 otherwise, and the stage passes when the weighted
vote reaches the stage threshold (default: half the total alpha, lowered
after every boosting round until the detection-rate target is met on the
training positives).

Stump search is a single sorted sweep per feature, run simultaneously over
the whole feature bank as an (F, N) value matrix. Candidate thresholds are
the midpoints between consecutive distinct sorted values plus one sentinel
below the minimum and one above the maximum; ties are broken towards the
smaller threshold, then polarity +1, and across features towards the lowest
feature index, which makes training fully deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .haar import HaarFeature, eval_feature, generate_feature_set, scaled_parts
from .integral import IntegralSet, integral_set

__all__ = [
    "WeakClassifier",
    "Stage",
    "StageResult",
    "Cascade",
    "train_stump",
    "train_stage",
    "train_cascade",
    "classify_window",
    "feature_value_matrix",
    "save_cascade",
    "load_cascade",
]

MIN_EPSILON = 1e-10


@dataclass(frozen=True)
class WeakClassifier:
    feature: HaarFeature | int | None  # bank feature, or a raw column index
    threshold: float
    polarity: int  # +1 or -1

    def predict(self, value):
        """+1 (face) / -1 votes for scalar or ndarray feature values."""
        return np.where(self.polarity * np.asarray(value) < self.polarity * self.threshold, 1, -1)


@dataclass(frozen=True)
class Stage:
    stumps: list[tuple[WeakClassifier, float]]  # (stump, alpha >= 0)
    threshold: float

    @property
    def total_alpha(self) -> float:
        return sum(alpha for _, alpha in self.stumps)


@dataclass(frozen=True)
class StageResult:
    stage: Stage
    detection_rate: float
    false_positive_rate: float
    scores: np.ndarray  # per-sample weighted face votes at the final round


@dataclass(frozen=True)
class Cascade:
    base_window: int
    stages: list[Stage]
    # per-stage (detection_rate, false_positive_rate) on the data each stage
    # was trained on; NaN pairs for models loaded from disk
    metadata: list[tuple[float, float]]

    def __post_init__(self) -> None:
        if len(self.stages) != len(self.metadata):
            raise ValueError("cascade metadata length must match stage count")


class _StumpSearch:
    """Sorted-order cache over a value matrix, reusable across rounds."""

    def __init__(self, values: np.ndarray, labels: np.ndarray):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError("expected an (F, N) value matrix")
        f, n = values.shape
        self.order = np.argsort(values, axis=1, kind="stable")
        vs = np.take_along_axis(values, self.order, axis=1)
        self.pos_sorted = (labels > 0)[self.order]
        # candidate j = number of samples strictly below the threshold
        self.valid = np.ones((f, n + 1), dtype=bool)
        self.valid[:, 1:n] = vs[:, :-1] < vs[:, 1:]
        self.thresholds = np.empty((f, n + 1))
        self.thresholds[:, 0] = vs[:, 0] - 1.0
        self.thresholds[:, 1:n] = 0.5 * (vs[:, :-1] + vs[:, 1:])
        self.thresholds[:, n] = vs[:, -1] + 1.0

    def best(self, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-feature (error, threshold, polarity) of the optimal stump."""
        f, n = self.order.shape
        ws = weights[self.order]
        wpos = np.where(self.pos_sorted, ws, 0.0)
        wneg = ws - wpos
        cp = np.zeros((f, n + 1))
        cn = np.zeros((f, n + 1))
        np.cumsum(wpos, axis=1, out=cp[:, 1:])
        np.cumsum(wneg, axis=1, out=cn[:, 1:])
        tp = cp[:, -1:]
        tn = cn[:, -1:]
        err_pos = cn + (tp - cp)  # polarity +1: face iff value < threshold
        err_neg = cp + (tn - cn)  # polarity -1: face iff value > threshold
        err_pos[~self.valid] = np.inf
        err_neg[~self.valid] = np.inf
        rows = np.arange(f)
        j_pos = np.argmin(err_pos, axis=1)  # first minimum = smallest threshold
        j_neg = np.argmin(err_neg, axis=1)
        e_pos = err_pos[rows, j_pos]
        e_neg = err_neg[rows, j_neg]
        t_pos = self.thresholds[rows, j_pos]
        t_neg = self.thresholds[rows, j_neg]
        use_neg = (e_neg < e_pos) | ((e_neg == e_pos) & (t_neg < t_pos))
        err = np.where(use_neg, e_neg, e_pos)
        thr = np.where(use_neg, t_neg, t_pos)
        pol = np.where(use_neg, -1, 1)
        return err, thr, pol


def train_stump(
    values: np.ndarray, labels: np.ndarray, weights: np.ndarray
) -> tuple[float, int, float]:
    """Optimal (threshold, polarity, weighted_error) for one feature column.

    One sorted sweep over the samples; the returned error is at most 0.5
    because both polarities are searched.
    """
    values = np.asarray(values, dtype=np.float64)
    labels = np.asarray(labels)
    weights = np.asarray(weights, dtype=np.float64)
    if values.ndim != 1 or values.shape != labels.shape or values.shape != weights.shape:
        raise ValueError("values, labels, and weights must be equal-length 1-d arrays")
    if not (np.any(labels > 0) and np.any(labels < 0)):
        raise ValueError("need at least one sample of each label")
    if np.any(weights < 0):
        raise ValueError("weights must be non-negative")
    weights = weights / weights.sum()
    search = _StumpSearch(values[None, :], labels)
    err, thr, pol = search.best(weights)
    return float(thr[0]), int(pol[0]), float(err[0])


def train_stage(
    values: np.ndarray,
    labels: np.ndarray,
    *,
    target_dr: float = 0.99,
    max_fpr: float = 0.5,
    max_stumps: int = 20,
    features: list[HaarFeature] | None = None,
    round_log: list[dict] | None = None,
) -> StageResult:
    """Boost stumps over the value matrix into one cascade stage.

    Rounds add the globally best stump (alpha = ln((1-e)/e)/2, e floored at
    1e-10), reweight with the exponential-loss update, and re-adjust the
    stage threshold so at least ``target_dr`` of the positives pass; training
    stops once the false-positive rate at that threshold reaches ``max_fpr``
    or ``max_stumps`` rounds have run.
    """
    values = np.asarray(values, dtype=np.float64)
    labels = np.asarray(labels)
    if not 0.0 < target_dr <= 1.0:
        raise ValueError("target_dr must be in (0, 1]")
    pos = labels > 0
    neg = ~pos
    n_pos = int(pos.sum())
    n_neg = int(neg.sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("need non-empty positive and negative sets")
    weights = np.where(pos, 0.5 / n_pos, 0.5 / n_neg)
    search = _StumpSearch(values, labels)
    stumps: list[tuple[WeakClassifier, float]] = []
    scores = np.zeros(labels.shape[0])
    stage_threshold = 0.0
    dr = fpr = 0.0
    k_fail = max(1, math.ceil((1.0 - target_dr) * n_pos))
    for rnd in range(max_stumps):
        err_f, thr_f, pol_f = search.best(weights)
        f_idx = int(np.argmin(err_f))
        err = float(err_f[f_idx])
        thr = float(thr_f[f_idx])
        pol = int(pol_f[f_idx])
        if err >= 0.5:
            if rnd == 0:
                raise ValueError("no stump beats chance on the first round")
            break
        eps = max(err, MIN_EPSILON)
        alpha = 0.5 * math.log((1.0 - eps) / eps)
        feature = features[f_idx] if features is not None else f_idx
        stumps.append((WeakClassifier(feature, thr, pol), alpha))
        pred = np.where(pol * values[f_idx] < pol * thr, 1, -1)
        scores = scores + alpha * (pred > 0)
        total_alpha = sum(a for _, a in stumps)
        pos_sorted = np.sort(scores[pos])
        stage_threshold = min(total_alpha / 2.0, float(pos_sorted[k_fail - 1]))
        dr = float(np.mean(scores[pos] >= stage_threshold))
        fpr = float(np.mean(scores[neg] >= stage_threshold))
        mis = pred != labels
        if np.any(mis):
            weights = weights * np.exp(np.where(mis, alpha, -alpha))
            weights = weights / weights.sum()
        if round_log is not None:
            round_log.append(
                {
                    "error": err,
                    "alpha": alpha,
                    "weight_sum": float(weights.sum()),
                    "post_error": float(weights[mis].sum()),
                    "detection_rate": dr,
                    "false_positive_rate": fpr,
                }
            )
        if fpr <= max_fpr:
            break
    return StageResult(Stage(stumps, float(stage_threshold)), dr, fpr, scores)


def stage_score(stage: Stage, iset: IntegralSet, x: int, y: int, size: int, variance_norm: bool = True) -> float:
    total = 0.0
    for wc, alpha in stage.stumps:
        value = eval_feature(wc.feature, iset, x, y, size, variance_norm)
        if wc.polarity * value < wc.polarity * wc.threshold:
            total += alpha
    return total


def classify_window(
    cascade: Cascade, iset: IntegralSet, x: int, y: int, size: int, variance_norm: bool = True
) -> tuple[bool, float]:
    """Run the stages in order with early exit.

    Returns (accepted, margin): the final stage's vote margin when accepted
    (0.0 for an empty cascade), else the failing stage's margin.
    """
    margin = 0.0
    for stage in cascade.stages:
        margin = stage_score(stage, iset, x, y, size, variance_norm) - stage.threshold
        if margin < 0:
            return False, margin
    return True, margin


def feature_value_matrix(
    features: list[HaarFeature], samples: list[np.ndarray], variance_norm: bool = True
) -> np.ndarray:
    """(F, N) responses of every feature on every base-window sample."""
    if not samples:
        raise ValueError("no samples")
    base = samples[0].shape[0]
    n = len(samples)
    up = np.empty((n, base + 1, base + 1), dtype=np.int64)
    sq = np.empty_like(up)
    t_even: list[np.ndarray] = []
    t_odd: list[np.ndarray] = []
    voff = 0
    for i, sample in enumerate(samples):
        if sample.shape != (base, base):
            raise ValueError(f"sample {i} is {sample.shape}, expected {(base, base)}")
        iset = integral_set(sample)
        up[i] = iset.upright.grid
        sq[i] = iset.upright.sq
        t_even.append(iset.tilted.grid)
        t_odd.append(iset.tilted.grid_odd)
        voff = iset.tilted.voff
    te = np.stack(t_even)
    to = np.stack(t_odd)
    area = base * base
    total = up[:, base, base].astype(np.float64)
    var = sq[:, base, base] / area - (total / area) ** 2
    sigma = np.maximum(np.sqrt(np.maximum(var, 0.0)), 1.0)

    out = np.empty((len(features), n), dtype=np.float64)
    for fi, feature in enumerate(features):
        parts = scaled_parts(feature, base)
        acc = np.zeros(n, dtype=np.int64)
        if feature.tilted:
            for px, py, pw, ph, wt in parts:
                p = (px + py) & 1
                grid = te if p == 0 else to
                u0 = (px + py - p) // 2
                v0 = (py - px + voff - p) // 2
                acc += wt * (
                    grid[:, u0 + pw, v0 + ph]
                    - grid[:, u0, v0 + ph]
                    - grid[:, u0 + pw, v0]
                    + grid[:, u0, v0]
                )
        else:
            for px, py, pw, ph, wt in parts:
                acc += wt * (
                    up[:, py + ph, px + pw]
                    - up[:, py, px + pw]
                    - up[:, py + ph, px]
                    + up[:, py, px]
                )
        out[fi] = acc
    if variance_norm:
        out /= sigma[None, :]
    return out


def _mine_false_positives(
    cascade: Cascade, pool: list[np.ndarray], needed: int, scan_step: int = 3
) -> list[np.ndarray]:
    """Crop windows from pool images that the current cascade accepts,
    drawing evenly across the pool so one image cannot fill the quota."""
    from .detect import detect_multiscale
    from .images import resize_bilinear

    base = cascade.base_window
    per_image: list[list[np.ndarray]] = []
    for img in pool:
        if min(img.shape) < base:
            continue
        crops: list[np.ndarray] = []
        for det in detect_multiscale(cascade, img, step=scan_step):
            crop = img[det.y : det.y + det.h, det.x : det.x + det.w]
            crops.append(crop if crop.shape == (base, base) else resize_bilinear(crop, base, base))
            if len(crops) >= needed:
                break
        per_image.append(crops)
    mined: list[np.ndarray] = []
    rank = 0
    while len(mined) < needed and any(rank < len(c) for c in per_image):
        for crops in per_image:
            if rank < len(crops):
                mined.append(crops[rank])
                if len(mined) >= needed:
                    break
        rank += 1
    return mined


def train_cascade(
    pos_samples: list[np.ndarray],
    neg_samples: list[np.ndarray],
    *,
    n_stages: int = 15,
    target_dr: float = 0.99,
    max_fpr: float = 0.5,
    max_stumps: int = 20,
    base_window: int = 24,
    pool: list[np.ndarray] | None = None,
    feature_subsample: int = 0,
    seed: int = 0,
) -> Cascade:
    """Train stages sequentially on base-window grayscale samples.

    After each stage the negatives it correctly rejects are dropped; when a
    background pool is supplied they are replaced by windows the cascade
    still accepts there. Training halts early once no negatives remain.
    """
    if not pos_samples or not neg_samples:
        raise ValueError("need non-empty positive and negative sample sets")
    features = generate_feature_set(base_window)
    if feature_subsample and feature_subsample < len(features):
        rng = np.random.default_rng(seed)
        chosen = np.sort(rng.choice(len(features), size=feature_subsample, replace=False))
        features = [features[i] for i in chosen]
    v_pos = feature_value_matrix(features, pos_samples)
    negatives = list(neg_samples)
    neg_target = len(negatives)
    stages: list[Stage] = []
    metadata: list[tuple[float, float]] = []
    labels_pos = np.ones(len(pos_samples))
    for _ in range(n_stages):
        if not negatives:
            break
        v_neg = feature_value_matrix(features, negatives)
        values = np.concatenate([v_pos, v_neg], axis=1)
        labels = np.concatenate([labels_pos, -np.ones(len(negatives))])
        result = train_stage(
            values,
            labels,
            target_dr=target_dr,
            max_fpr=max_fpr,
            max_stumps=max_stumps,
            features=features,
        )
        stages.append(result.stage)
        metadata.append((result.detection_rate, result.false_positive_rate))
        neg_scores = result.scores[len(pos_samples) :]
        survivors = [s for s, sc in zip(negatives, neg_scores) if sc >= result.stage.threshold]
        negatives = survivors
        if pool is not None and len(negatives) < neg_target:
            current = Cascade(base_window, list(stages), list(metadata))
            negatives.extend(_mine_false_positives(current, pool, neg_target - len(negatives)))
    return Cascade(base_window, stages, metadata)


def _fmt(value: float) -> str:
    return f"{value:.9g}"


def save_cascade(cascade: Cascade, path: str) -> None:
    lines = [f"CASCADE v1 {cascade.base_window} {len(cascade.stages)}"]
    for stage in cascade.stages:
        lines.append(f"STAGE {len(stage.stumps)} {_fmt(stage.threshold)}")
        for wc, alpha in stage.stumps:
            f = wc.feature
            lines.append(
                f"STUMP {f.kind} {f.x} {f.y} {f.w} {f.h} "
                f"{_fmt(wc.threshold)} {wc.polarity:+d} {_fmt(alpha)}"
            )
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_cascade(path: str) -> Cascade:
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("CASCADE v1 "):
        raise ValueError(f"{path}: not a cascade model file")
    header = lines[0].split()
    base_window = int(header[2])
    n_stages = int(header[3])
    stages: list[Stage] = []
    pos = 1
    for _ in range(n_stages):
        toks = lines[pos].split()
        if toks[0] != "STAGE":
            raise ValueError(f"{path}: expected STAGE line, got {lines[pos]!r}")
        n_stumps = int(toks[1])
        threshold = float(toks[2])
        pos += 1
        stumps: list[tuple[WeakClassifier, float]] = []
        for _ in range(n_stumps):
            st = lines[pos].split()
            if st[0] != "STUMP":
                raise ValueError(f"{path}: expected STUMP line, got {lines[pos]!r}")
            kind, x, y, w, h = st[1], int(st[2]), int(st[3]), int(st[4]), int(st[5])
            feature = HaarFeature(kind, x, y, w, h, base_window)
            stumps.append((WeakClassifier(feature, float(st[6]), int(st[7])), float(st[8])))
            pos += 1
        stages.append(Stage(stumps, threshold))
    nan = float("nan")
    return Cascade(base_window, stages, [(nan, nan)] * len(stages))
