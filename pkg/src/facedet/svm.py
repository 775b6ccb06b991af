"""Linear SVM trained by seeded stochastic subgradient descent."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["LinearSvmModel", "train_svm", "svm_objective", "save_svm", "load_svm"]


@dataclass(frozen=True)
class LinearSvmModel:
    weights: np.ndarray
    bias: float
    reg: float = float("nan")  # hyperparameters as trained; NaN/0 when loaded
    epochs: int = 0
    seed: int = 0

    def decision(self, features: np.ndarray):
        """w . x + b for one feature vector or a stack of them."""
        return np.asarray(features, dtype=np.float64) @ self.weights + self.bias


def svm_objective(weights: np.ndarray, bias: float, features: np.ndarray, labels: np.ndarray, reg: float) -> float:
    """L2-regularized mean hinge loss (bias unregularized)."""
    margins = labels * (features @ weights + bias)
    hinge = np.maximum(0.0, 1.0 - margins)
    return 0.5 * reg * float(weights @ weights) + float(hinge.mean())


def train_svm(
    features: np.ndarray,
    labels: np.ndarray,
    reg: float = 1e-3,
    epochs: int = 30,
    seed: int = 0,
) -> LinearSvmModel:
    """Minimize the regularized hinge loss with Pegasos-style updates.

    The bias rides along as an augmented coordinate during the updates; the
    returned model is the end-of-epoch iterate with the lowest objective
    (the zero model is the baseline candidate, so the final objective never
    exceeds the initial one).
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] != labels.shape[0]:
        raise ValueError("features must be (n, d) with one label per row")
    if not (np.any(labels > 0) and np.any(labels < 0)):
        raise ValueError("need both classes to train")
    if reg <= 0:
        raise ValueError("regularization strength must be positive")
    n, dim = features.shape
    aug = np.concatenate([features, np.ones((n, 1))], axis=1)
    w = np.zeros(dim + 1)
    best_obj = svm_objective(w[:dim], 0.0, features, labels, reg)
    best_w = w.copy()
    rng = np.random.default_rng(seed)
    t = 0
    for _ in range(epochs):
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (reg * t)
            margin = labels[i] * (aug[i] @ w)
            w *= 1.0 - eta * reg
            if margin < 1.0:
                w += eta * labels[i] * aug[i]
        obj = svm_objective(w[:dim], float(w[dim]), features, labels, reg)
        if obj < best_obj:
            best_obj = obj
            best_w = w.copy()
    return LinearSvmModel(best_w[:dim].copy(), float(best_w[dim]), reg=reg, epochs=epochs, seed=seed)


def _fmt(value: float) -> str:
    return f"{value:.9g}"


def save_svm(model: LinearSvmModel, path: str) -> None:
    lines = [f"SVM v1 {model.weights.shape[0]}"]
    lines.extend(_fmt(w) for w in model.weights)
    lines.append(f"BIAS {_fmt(model.bias)}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_svm(path: str) -> LinearSvmModel:
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("SVM v1 "):
        raise ValueError(f"{path}: not an SVM model file")
    dim = int(lines[0].split()[2])
    if len(lines) != dim + 2 or not lines[-1].startswith("BIAS "):
        raise ValueError(f"{path}: malformed SVM model file")
    weights = np.array([float(v) for v in lines[1 : dim + 1]], dtype=np.float64)
    bias = float(lines[-1].split()[1])
    return LinearSvmModel(weights, bias)
