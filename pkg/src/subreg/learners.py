"""Linear learners and margin diagnostics, written from scratch on numpy."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels

DEFAULT_LR = 0.5
DEFAULT_EPOCHS = 5000
DEFAULT_TOL = 1e-8
DEFAULT_L2_NOISY = 1e-4


class DivergenceError(FloatingPointError):
    pass


class ZeroWeightsError(ValueError):
    pass


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    feature_names: List[str] = field(default_factory=list)
    config: Dict = field(default_factory=dict)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if not self.feature_names:
            self.feature_names = [f"x{j}" for j in range(len(self.weights))]
        if len(self.feature_names) != len(self.weights):
            raise ValueError("feature_names and weights differ in length")
        if not (np.all(np.isfinite(self.weights)) and math.isfinite(self.bias)):
            raise ValueError("model parameters must be finite")

    def scores(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != len(self.weights):
            raise ValueError(f"dimension mismatch: model has {len(self.weights)} features, input has {X.shape[1]}")
        return X @ self.weights + self.bias

    def scaled(self, c: float) -> "LinearModel":
        return LinearModel(self.weights * c, self.bias * c, list(self.feature_names), dict(self.config))

    def to_dict(self) -> dict:
        return {
            "feature_names": list(self.feature_names),
            "weights": [float(w) for w in self.weights],
            "bias": float(self.bias),
            "config": self.config,
        }

    @classmethod
    def from_dict(cls, d) -> "LinearModel":
        return cls(np.array(d["weights"], dtype=np.float64), float(d["bias"]),
                   list(d["feature_names"]), dict(d.get("config", {})))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path) -> "LinearModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    confusion: Tuple[Tuple[int, int], Tuple[int, int]]  # ((TP, FN), (FP, TN))

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int, tn: int) -> "Metrics":
        n = tp + fp + fn + tn
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        return cls((tp + tn) / n if n else 0.0, precision, recall, f1, ((tp, fn), (fp, tn)))

    def to_dict(self) -> dict:
        return {"accuracy": self.accuracy, "precision": self.precision, "recall": self.recall,
                "f1": self.f1, "confusion": {"tp": self.confusion[0][0], "fn": self.confusion[0][1],
                                             "fp": self.confusion[1][0], "tn": self.confusion[1][1]}}


def _labels(y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if not np.all((y == 1) | (y == -1)):
        raise ValueError("labels must be +1/-1")
    return y


def train_perceptron(X, y, max_epochs: int = 100, fit_bias: bool = True,
                     feature_names: Optional[Sequence[str]] = None) -> Tuple[LinearModel, int]:
    """Rosenblatt perceptron from zero; returns the model and total mistakes.

    Ties predict -1.  On one-hot minterm features use ``fit_bias=False``:
    the bias is redundant there and the mistake bound is the homogeneous one.
    """
    X = np.asarray(X, dtype=np.float64)
    y = _labels(y)
    w, b, mistakes, epochs = _kernels.perceptron(X, y, np.zeros(X.shape[1]), 0.0, max_epochs, fit_bias)
    cfg = {"learner": "perceptron", "max_epochs": max_epochs, "fit_bias": fit_bias, "epochs_run": epochs}
    return LinearModel(w, b, list(feature_names or []), cfg), mistakes


def _log1pexp(z):
    # log(1 + exp(z)) without overflow
    return np.logaddexp(0.0, z)


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_loss_grad(w, b, X, y, l2: float = 0.0):
    """Mean logistic loss plus ``l2/2 * ||w||^2`` and its gradient in (w, b)."""
    z = y * (X @ w + b)
    loss = float(np.mean(_log1pexp(-z)) + 0.5 * l2 * w @ w)
    coef = -y * _sigmoid(-z) / len(y)
    gw = X.T @ coef + l2 * w
    gb = float(coef.sum())
    return loss, gw, gb


def train_logreg(X, y, l2: float = 0.0, lr: float = DEFAULT_LR, epochs: int = DEFAULT_EPOCHS,
                 tol: float = DEFAULT_TOL, feature_names: Optional[Sequence[str]] = None) -> LinearModel:
    """Full-batch gradient descent from zero on the regularized logistic loss."""
    if l2 < 0:
        raise ValueError("l2 must be >= 0")
    X = np.asarray(X, dtype=np.float64)
    y = _labels(y)
    if not np.all(np.isfinite(X)):
        raise ValueError("features must be finite")
    w = np.zeros(X.shape[1])
    b = 0.0
    run = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for run in range(1, epochs + 1):
            loss, gw, gb = logistic_loss_grad(w, b, X, y, l2)
            if not math.isfinite(loss):
                raise DivergenceError(f"logistic loss became non-finite at epoch {run}")
            if max(np.max(np.abs(gw), initial=0.0), abs(gb)) < tol:
                break
            w -= lr * gw
            b -= lr * gb
    cfg = {"learner": "logreg", "l2": l2, "lr": lr, "epochs": epochs, "tol": tol, "epochs_run": run}
    return LinearModel(w, b, list(feature_names or []), cfg)


def predict(m: LinearModel, X) -> np.ndarray:
    return np.where(m.scores(X) > 0, 1, -1)


def evaluate(m: LinearModel, X, y) -> Metrics:
    y = _labels(y)
    pred = predict(m, X)
    tp = int(np.sum((pred == 1) & (y == 1)))
    fp = int(np.sum((pred == 1) & (y == -1)))
    fn = int(np.sum((pred == -1) & (y == 1)))
    tn = int(np.sum((pred == -1) & (y == -1)))
    return Metrics.from_counts(tp, fp, fn, tn)


def normalized_margin(m: LinearModel, X, y) -> np.ndarray:
    """``y * (w.x + b) / ||w||``; vectorized over rows."""
    norm = float(np.linalg.norm(m.weights))
    if norm == 0.0:
        raise ZeroWeightsError("normalized margin undefined for zero weight vector")
    return np.asarray(y, dtype=np.float64) * m.scores(X) / norm


def margin_quantile(margins, q: float) -> float:
    """Nearest-rank lower empirical quantile."""
    vals = np.sort(np.asarray(margins, dtype=np.float64))
    if len(vals) == 0:
        raise ValueError("empty margin list")
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie in (0, 1)")
    idx = math.ceil(round(q * len(vals), 9)) - 1
    return float(vals[max(idx, 0)])
