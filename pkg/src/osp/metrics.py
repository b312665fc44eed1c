"""Post-processing of predicted distance matrices and the error metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class EvalResult:
    mean_error: float
    ahde: float
    pair_count: int


def postprocess(m: np.ndarray) -> np.ndarray:
    """Zero the diagonal and lift every off-diagonal value below 1 up to 1.

    Real distances off the diagonal are at least one hop, so negative
    outputs are lifted too.
    """
    m = np.array(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise MetricError("expected a square matrix")
    off = ~np.eye(len(m), dtype=bool)
    m[off & (m < 1.0)] = 1.0
    np.fill_diagonal(m, 0.0)
    return m


def _abs_errors(pred, truth, eval_mask):
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    eval_mask = np.asarray(eval_mask, dtype=bool)
    if not pred.shape == truth.shape == eval_mask.shape:
        raise MetricError("pred, truth and eval_mask shapes differ")
    if not eval_mask.any():
        raise MetricError("evaluation mask selects no pairs")
    t = truth[eval_mask]
    return np.abs(pred[eval_mask] - t), t


def mean_error(pred, truth, eval_mask) -> float:
    """Summed absolute error over summed true distance on the masked pairs."""
    err, t = _abs_errors(pred, truth, eval_mask)
    denom = t.sum()
    if denom == 0:
        raise MetricError("true distances on the mask sum to zero")
    return float(err.sum() / denom)


def ahde(pred, truth, eval_mask) -> float:
    """Average absolute hop-distance error over the masked pairs."""
    err, _ = _abs_errors(pred, truth, eval_mask)
    return float(err.sum() / err.size)


def evaluate(pred, truth, eval_mask) -> EvalResult:
    err, t = _abs_errors(pred, truth, eval_mask)
    if t.sum() == 0:
        raise MetricError("true distances on the mask sum to zero")
    return EvalResult(float(err.sum() / t.sum()), float(err.sum() / err.size), int(err.size))


def trivial_baselines(truth, eval_mask) -> tuple[EvalResult, EvalResult]:
    """Scores of the constant-0 and constant-1 predictions."""
    truth = np.asarray(truth, dtype=np.float64)
    return (evaluate(np.zeros_like(truth), truth, eval_mask),
            evaluate(np.ones_like(truth), truth, eval_mask))
