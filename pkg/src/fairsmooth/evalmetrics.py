"""Fairness and accuracy evaluation metrics.

Prediction consistency works over alteration groups: each group contains
one original input plus its perturbed variants, and a group counts as
consistent when every member receives the same predicted class as the
original.  The violation histogram bins constrained pairs by fair distance
and reports, per bin, how many pairs exceed their Lipschitz bound.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    EmptyGroup,
    EmptyPairs,
    EmptySubset,
    InvalidParameter,
    NoLabels,
)

DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class GroupedPredictions:
    """Model outputs with an alteration-group structure.

    ``group_of[i]`` names the group of row i; ``is_original[i]`` marks the
    one canonical member per group.
    """

    outputs: np.ndarray
    group_of: np.ndarray
    is_original: np.ndarray

    def __post_init__(self):
        outputs = np.asarray(self.outputs, dtype=float)
        if outputs.ndim == 1:
            outputs = outputs[:, None]
        group_of = np.asarray(self.group_of)
        is_original = np.asarray(self.is_original, dtype=bool)
        if not (len(group_of) == len(is_original) == outputs.shape[0]):
            raise InvalidParameter("outputs, group_of, is_original must have equal length")
        for gid in np.unique(group_of):
            originals = int(np.sum(is_original[group_of == gid]))
            if originals != 1:
                raise EmptyGroup(f"group {gid!r} has {originals} originals, expected 1")
        object.__setattr__(self, "outputs", outputs)
        object.__setattr__(self, "group_of", group_of)
        object.__setattr__(self, "is_original", is_original)


@dataclass
class EvaluationReport:
    prediction_consistency: Optional[float] = None
    accuracy: Optional[float] = None
    balanced_accuracy: Optional[float] = None
    output_std: Optional[float] = None
    group_gap: Optional[float] = None
    violation_histogram: Optional[List[Tuple[float, float, int, int]]] = None

    def to_dict(self) -> Dict:
        out = {}
        for key, val in self.__dict__.items():
            if val is None:
                continue
            if key == "violation_histogram":
                out[key] = [[lo, hi, total, violated] for lo, hi, total, violated in val]
            else:
                out[key] = val
        return out


def predicted_classes(outputs: np.ndarray, threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
    """Predicted class per row: argmax for K >= 2 (ties to the lowest class
    index), threshold on the single column for K = 1."""
    arr = np.asarray(outputs, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.shape[1] == 1:
        return (arr[:, 0] >= threshold).astype(int)
    return np.argmax(arr, axis=1)


def prediction_consistency(
    g: GroupedPredictions, threshold: float = DEFAULT_THRESHOLD
) -> float:
    """Fraction of groups whose every member matches the original's class."""
    preds = predicted_classes(g.outputs, threshold)
    consistent = 0
    gids = np.unique(g.group_of)
    for gid in gids:
        mask = g.group_of == gid
        original_pred = preds[mask & g.is_original][0]
        if np.all(preds[mask] == original_pred):
            consistent += 1
    return consistent / len(gids)


def output_std(outputs: np.ndarray, subset: Sequence[int], column: int = 0) -> float:
    """Population standard deviation of one output column over a subset."""
    idx = np.asarray(subset, dtype=int)
    if idx.size == 0:
        raise EmptySubset("subset is empty")
    arr = np.asarray(outputs, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    return float(np.std(arr[idx, column]))


def group_gap(
    outputs: np.ndarray,
    group_a: Sequence[int],
    group_b: Sequence[int],
    column: int = 0,
) -> float:
    """mean(column over A) - mean(column over B)."""
    a = np.asarray(group_a, dtype=int)
    b = np.asarray(group_b, dtype=int)
    if a.size == 0 or b.size == 0:
        raise EmptySubset("both groups must be nonempty")
    arr = np.asarray(outputs, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    return float(np.mean(arr[a, column]) - np.mean(arr[b, column]))


def accuracy(
    outputs: np.ndarray, labels: Sequence[int], threshold: float = DEFAULT_THRESHOLD
) -> float:
    labels = np.asarray(labels, dtype=int)
    if labels.size == 0:
        raise NoLabels("labels are empty")
    preds = predicted_classes(outputs, threshold)
    if preds.shape[0] != labels.shape[0]:
        raise InvalidParameter("labels and outputs have different lengths")
    return float(np.mean(preds == labels))


def balanced_accuracy(
    outputs: np.ndarray, labels: Sequence[int], threshold: float = DEFAULT_THRESHOLD
) -> float:
    """Unweighted mean of per-class recalls over classes with support."""
    labels = np.asarray(labels, dtype=int)
    if labels.size == 0:
        raise NoLabels("labels are empty")
    preds = predicted_classes(outputs, threshold)
    if preds.shape[0] != labels.shape[0]:
        raise InvalidParameter("labels and outputs have different lengths")
    recalls = []
    for cls in np.unique(labels):
        mask = labels == cls
        recalls.append(float(np.mean(preds[mask] == cls)))
    return float(np.mean(recalls))


def violation_histogram(
    f: np.ndarray,
    distances: Sequence[Tuple[int, int, float]],
    lipschitz: float,
    num_bins: int = 10,
) -> List[Tuple[float, float, int, int]]:
    """Bin constrained pairs by fair distance; count violations per bin.

    Bins are equal-width over [0, max distance], right-open except the
    last.  A pair violates when ||f_i - f_j||_2 > lipschitz * d.
    """
    if not lipschitz > 0:
        raise InvalidParameter(f"lipschitz constant must be positive, got {lipschitz}")
    if num_bins < 1:
        raise InvalidParameter(f"num_bins must be >= 1, got {num_bins}")
    pairs = list(distances)
    if not pairs:
        raise EmptyPairs("no distance pairs supplied")
    arr = np.asarray(f, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    d = np.array([p[2] for p in pairs], dtype=float)
    ii = np.array([p[0] for p in pairs], dtype=int)
    jj = np.array([p[1] for p in pairs], dtype=int)
    gaps = np.linalg.norm(arr[ii] - arr[jj], axis=1)
    violated = gaps > lipschitz * d

    dmax = float(d.max())
    if dmax == 0.0:
        return [(0.0, 0.0, len(pairs), int(violated.sum()))]
    edges = np.linspace(0.0, dmax, num_bins + 1)
    which = np.minimum((d / dmax * num_bins).astype(int), num_bins - 1)
    out = []
    for b in range(num_bins):
        mask = which == b
        out.append(
            (float(edges[b]), float(edges[b + 1]), int(mask.sum()), int(violated[mask].sum()))
        )
    return out
