"""
Scores of a surrogate prediction against the simulated fields: field
errors, the training loss, force-coefficient errors and rank correlation.
"""
import logging
from typing import Dict, Sequence, Tuple

import numpy as np
from scipy.stats import rankdata

from ..cloud import FIELD_COLUMNS, P
from ..errors import DataError, ParameterError

l = logging.getLogger(__name__)

SURFACE_PRESSURE = "p_surface"


def _check_pair(pred: np.ndarray, true: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred, dtype=float)
    true = np.asarray(true, dtype=float)
    if pred.shape != true.shape:
        raise DataError("prediction of shape {} for truth of shape {}".format(pred.shape, true.shape))
    if pred.ndim != 2 or pred.shape[1] != len(FIELD_COLUMNS):
        raise DataError("expected (nodes, {}) fields, got {}".format(len(FIELD_COLUMNS), pred.shape))
    return pred, true


def field_mse(
    pred: np.ndarray, true: np.ndarray, volume_mask: np.ndarray, surface_mask: np.ndarray
) -> Dict[str, float]:
    """
    Mean squared error of each field over the volume nodes and of the
    pressure over the surface nodes.
    """
    pred, true = _check_pair(pred, true)
    volume_mask = np.asarray(volume_mask, dtype=bool)
    surface_mask = np.asarray(surface_mask, dtype=bool)
    if np.any(volume_mask & surface_mask):
        raise DataError("volume and surface masks overlap")
    if not np.all(volume_mask | surface_mask):
        raise DataError("volume and surface masks do not cover every node")
    if not volume_mask.any() or not surface_mask.any():
        raise DataError("need volume and surface nodes")

    squared = (pred - true) ** 2
    volume = squared[volume_mask].mean(axis=0)
    scores = {name: float(volume[k]) for k, name in enumerate(FIELD_COLUMNS)}
    scores[SURFACE_PRESSURE] = float(squared[surface_mask, P].mean())
    return scores


def composite_loss(
    pred: np.ndarray,
    true: np.ndarray,
    volume_ids: np.ndarray,
    surface_ids: np.ndarray,
    lam: float = 1.0,
) -> float:
    """Volume loss plus lam times surface loss, each a mean of squared 4-norms."""
    pred, true = _check_pair(pred, true)
    if len(volume_ids) == 0 or len(surface_ids) == 0:
        raise DataError("volume and surface node sets must not be empty")
    if lam < 0:
        raise ParameterError("loss weight must not be negative")
    norms = np.sum((pred - true) ** 2, axis=1)
    return float(norms[volume_ids].mean() + lam * norms[surface_ids].mean())


def relative_error(pred: Sequence[float], true: Sequence[float]) -> Tuple[float, float]:
    """
    Mean and population standard deviation of |pred - true| / |true|.
    Cases with a zero true value are left out.
    """
    pred = np.asarray(pred, dtype=float)
    true = np.asarray(true, dtype=float)
    if pred.shape != true.shape or pred.ndim != 1:
        raise DataError("coefficient lists differ in length")
    zero = true == 0.0
    if np.any(zero):
        l.warning("%d cases with a zero true coefficient left out", int(zero.sum()))
    if np.all(zero):
        raise DataError("no case with a nonzero true coefficient")
    errors = np.abs(pred[~zero] - true[~zero]) / np.abs(true[~zero])
    return float(errors.mean()), float(errors.std())


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """
    Rank correlation with average ranks for ties. Without ties this is
    1 - 6 sum(d^2) / (n (n^2 - 1)).
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise DataError("rank correlation needs two sequences of equal length")
    n = len(xs)
    if n < 2:
        raise DataError("rank correlation needs at least two values, got {}".format(n))
    rx = rankdata(xs)
    ry = rankdata(ys)
    if len(np.unique(rx)) == n and len(np.unique(ry)) == n:
        d2 = float(np.sum((rx - ry) ** 2))
        return 1.0 - 6.0 * d2 / (n * (n * n - 1))
    cx = rx - rx.mean()
    cy = ry - ry.mean()
    denominator = np.sqrt(np.sum(cx * cx) * np.sum(cy * cy))
    if denominator == 0.0:
        l.warning("rank correlation of a constant sequence is undefined")
        return float("nan")
    return float(np.clip(np.sum(cx * cy) / denominator, -1.0, 1.0))


__all__ = ["field_mse", "composite_loss", "relative_error", "spearman"]
