"""Uniform random sampling of node-pair distances."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np


class SamplingError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PartialMatrix:
    """Hop-distance matrix with only some unordered pairs observed.

    ``values`` holds the true hop count where ``mask`` is set and 0 elsewhere.
    The diagonal is always observed as 0.
    """

    values: np.ndarray
    mask: np.ndarray
    sampled_fraction: float

    def __post_init__(self):
        v, m = self.values, self.mask
        if v.ndim != 2 or v.shape[0] != v.shape[1] or m.shape != v.shape:
            raise SamplingError("values and mask must be matching square matrices")
        if m.dtype != bool:
            raise SamplingError("mask must be boolean")
        if not (m == m.T).all():
            raise SamplingError("mask must be symmetric")
        if not (v == v.T).all():
            raise SamplingError("values must be symmetric")
        if (v[~m] != 0).any():
            raise SamplingError("unobserved entries must hold 0")
        diag = np.diagonal(v)
        if (diag != 0).any():
            raise SamplingError("diagonal entries must be 0")
        off = m & ~np.eye(len(v), dtype=bool)
        if (v[off] < 1).any():
            raise SamplingError("observed off-diagonal values must be >= 1")
        if not 0.0 <= self.sampled_fraction <= 1.0:
            raise SamplingError("sampled_fraction must lie in [0, 1]")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def observed_pairs(self) -> np.ndarray:
        """Observed unordered off-diagonal pairs as a (k, 2) array with i < j."""
        i, j = np.nonzero(np.triu(self.mask, k=1))
        return np.stack([i, j], axis=1)

    def restricted(self, keep: np.ndarray) -> PartialMatrix:
        """Copy keeping only observations where ``keep`` is set (diagonal stays)."""
        mask = self.mask & (keep | np.eye(self.n, dtype=bool))
        return PartialMatrix(np.where(mask, self.values, 0.0), mask,
                             self.sampled_fraction)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["i", "j", "hop"])
        for i, j in self.observed_pairs:
            w.writerow([int(i), int(j), _fmt(self.values[i, j])])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, n: int) -> PartialMatrix:
        values = np.zeros((n, n))
        mask = np.eye(n, dtype=bool)
        rows = csv.reader(io.StringIO(text))
        if next(rows, None) != ["i", "j", "hop"]:
            raise SamplingError("expected header i,j,hop")
        for rec in rows:
            i, j, hop = int(rec[0]), int(rec[1]), float(rec[2])
            values[i, j] = values[j, i] = hop
            mask[i, j] = mask[j, i] = True
        k = int(np.triu(mask, 1).sum())
        return cls(values, mask, k / (n * (n - 1) / 2) if n > 1 else 1.0)


@dataclass(frozen=True, eq=False)
class SplitMask:
    train_mask: np.ndarray
    validation_mask: np.ndarray


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def _pair_index(n: int):
    return np.triu_indices(n, k=1)


def sample_random_pairs(h: np.ndarray, fraction: float, seed: int) -> PartialMatrix:
    """Observe ``ceil(fraction * N(N-1)/2)`` distinct unordered pairs, uniformly."""
    if not 0.0 < fraction <= 1.0:
        raise SamplingError(f"fraction must lie in (0, 1], got {fraction}")
    h = np.asarray(h)
    n = h.shape[0]
    iu, ju = _pair_index(n)
    total = len(iu)
    k = min(total, math.ceil(fraction * total))
    rng = np.random.default_rng(seed)
    chosen = rng.choice(total, size=k, replace=False)
    mask = np.eye(n, dtype=bool)
    mask[iu[chosen], ju[chosen]] = True
    mask[ju[chosen], iu[chosen]] = True
    values = np.where(mask, h, 0).astype(np.float64)
    return PartialMatrix(values, mask, float(fraction))


def split_observed(p: PartialMatrix, validation_share: float, seed: int) -> SplitMask:
    """Partition observed unordered pairs into train and validation sets.

    The diagonal, which is always known, goes to the train side.
    """
    if not 0.0 < validation_share < 1.0:
        raise SamplingError("validation_share must lie in (0, 1)")
    pairs = p.observed_pairs
    k = len(pairs)
    if k < 2:
        raise SamplingError(f"need at least 2 observed pairs to split, have {k}")
    n_val = min(max(round(validation_share * k), 1), k - 1)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(k)
    val = pairs[perm[:n_val]]
    validation = np.zeros_like(p.mask)
    validation[val[:, 0], val[:, 1]] = True
    validation[val[:, 1], val[:, 0]] = True
    return SplitMask(p.mask & ~validation, validation)


def unobserved_mask(p: PartialMatrix) -> np.ndarray:
    return ~p.mask & ~np.eye(p.n, dtype=bool)
