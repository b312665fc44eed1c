"""Low-rank matrix completion by singular value thresholding."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

# largest step that provably never increases the observed residual
_SAFE_STEP = 2.0


class CompletionError(RuntimeError):
    pass


@dataclass(frozen=True)
class CompletionParams:
    tau: float
    delta: float
    max_iters: int = 500
    tol: float = 1e-4

    def __post_init__(self):
        if self.tau <= 0 or self.delta <= 0 or self.max_iters < 1 or self.tol <= 0:
            raise ValueError("completion parameters must all be positive")


@dataclass
class CompletionResult:
    matrix: np.ndarray
    iterations: int
    converged: bool
    residuals: list[float] = field(default_factory=list)


def default_params(p) -> CompletionParams:
    """Standard SVT heuristics: threshold 5N and step 1.2 / sampled fraction."""
    f = p.sampled_fraction
    if f <= 0:
        raise ValueError("sampled fraction must be positive")
    return CompletionParams(tau=5.0 * p.n, delta=1.2 / f)


def shrink(y: np.ndarray, tau: float) -> tuple[np.ndarray, int]:
    """Singular value soft-thresholding; returns the matrix and its rank.

    Symmetric inputs go through an eigendecomposition, where the singular
    values are the absolute eigenvalues.
    """
    try:
        if np.array_equal(y, y.T):
            lam, u = np.linalg.eigh(y)
            mag = np.maximum(np.abs(lam) - tau, 0.0)
            keep = mag > 0
            s = np.sign(lam[keep]) * mag[keep]
            uk = u[:, keep]
            x = (uk * s) @ uk.T
            return (x + x.T) / 2.0, int(keep.sum())
        u, sv, vt = np.linalg.svd(y, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise CompletionError(f"SVD failed: {exc}") from exc
    sv = np.maximum(sv - tau, 0.0)
    keep = sv > 0
    return (u[:, keep] * sv[keep]) @ vt[keep], int(keep.sum())


def svt_complete(values: np.ndarray, mask: np.ndarray, params: CompletionParams) -> CompletionResult:
    """Complete ``values`` from the entries under ``mask``.

    Iterates ``X = shrink(Y, tau); Y += step * mask * (values - X)`` from
    ``Y = 0`` until the relative residual on the observed entries drops
    below ``tol``. The residual is the gradient of a dual function whose
    gradient is 1-Lipschitz, so any step <= 2 cannot increase it. Longer
    steps (``delta``) are tried first and halved whenever the residual would
    grow; the step never grows back. If ``tol`` is not reached the iterate
    with the smallest residual is returned with ``converged=False``.
    """
    values = np.asarray(values, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise CompletionError("no observed entries")
    observed = np.where(mask, values, 0.0)
    norm = np.linalg.norm(observed)
    if norm == 0:
        norm = 1.0

    def residual(y):
        x, _ = shrink(y, params.tau)
        r = np.where(mask, observed - x, 0.0)
        return x, r, float(np.linalg.norm(r) / norm)

    y = np.zeros_like(observed)
    x, r, res = residual(y)
    residuals = [res]
    step = params.delta
    for it in range(1, params.max_iters + 1):
        if res <= params.tol:
            return CompletionResult(_sym(x), it, True, residuals)
        while True:
            y_try = y + step * r
            x_try, r_try, res_try = residual(y_try)
            if res_try <= res or step <= _SAFE_STEP:
                break
            step = max(step / 2.0, _SAFE_STEP)
        if not np.isfinite(res_try):
            raise CompletionError(f"non-finite residual at iteration {it}")
        y, x, r, res = y_try, x_try, r_try, res_try
        residuals.append(res)
    if res <= params.tol:
        return CompletionResult(_sym(x), params.max_iters, True, residuals)
    log.warning("SVT did not reach tol %.1e in %d iterations (residual %.3e)",
                params.tol, params.max_iters, res)
    return CompletionResult(_sym(x), params.max_iters, False, residuals)


def _sym(x):
    return (x + x.T) / 2.0


def complete_lowrank(p, params: CompletionParams | None = None) -> CompletionResult:
    """Matrix-completion baseline for a PartialMatrix (diagonal counts as observed)."""
    if params is None:
        params = default_params(p)
    return svt_complete(p.values, p.mask, params)
