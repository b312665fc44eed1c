"""Single-hidden-layer autoencoder with Leaky ReLU, trained by plain SGD on a
masked mean squared error."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit

CHECKPOINT_VERSION = 1


class ModelError(ValueError):
    pass


class TrainingDivergedError(RuntimeError):
    def __init__(self, epoch: int, loss: float):
        super().__init__(f"training diverged at epoch {epoch} (loss={loss})")
        self.epoch = epoch
        self.loss = loss


@dataclass(eq=False)
class AutoencoderModel:
    """Encoder ``W_enc`` (h x N), ``b_enc`` (h); decoder ``W_dec`` (N x h), ``b_dec`` (N)."""

    W_enc: np.ndarray
    b_enc: np.ndarray
    W_dec: np.ndarray
    b_dec: np.ndarray
    alpha: float = 0.01

    def __post_init__(self):
        h, n = self.W_enc.shape
        if self.b_enc.shape != (h,) or self.W_dec.shape != (n, h) or self.b_dec.shape != (n,):
            raise ModelError("inconsistent parameter shapes")
        if not 0.0 < self.alpha <= 1.0:
            raise ModelError(f"leaky ReLU slope must lie in (0, 1], got {self.alpha}")

    @property
    def input_dim(self) -> int:
        return self.W_enc.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.W_enc.shape[0]

    def params(self) -> tuple[np.ndarray, ...]:
        return self.W_enc, self.b_enc, self.W_dec, self.b_dec

    def copy(self) -> AutoencoderModel:
        return AutoencoderModel(*(a.copy() for a in self.params()), alpha=self.alpha)

    def is_finite(self) -> bool:
        return all(np.isfinite(a).all() for a in self.params())

    def save(self, path: str | Path) -> None:
        """Write an ``.npz`` checkpoint; float64 arrays round-trip bit-exactly."""
        meta = {"version": CHECKPOINT_VERSION, "alpha": self.alpha,
                "input_dim": self.input_dim, "hidden_dim": self.hidden_dim}
        with open(path, "wb") as fh:
            np.savez(fh, meta=np.array(json.dumps(meta)), W_enc=self.W_enc,
                     b_enc=self.b_enc, W_dec=self.W_dec, b_dec=self.b_dec)

    @classmethod
    def load(cls, path: str | Path) -> AutoencoderModel:
        with np.load(path, allow_pickle=False) as z:
            meta = json.loads(str(z["meta"]))
            if meta.get("version") != CHECKPOINT_VERSION:
                raise ModelError(f"unsupported checkpoint version {meta.get('version')}")
            model = cls(z["W_enc"], z["b_enc"], z["W_dec"], z["b_dec"], alpha=meta["alpha"])
        if (model.input_dim, model.hidden_dim) != (meta["input_dim"], meta["hidden_dim"]):
            raise ModelError("checkpoint dimensions disagree with stored arrays")
        return model


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.001
    batch_size: int = 1
    max_epochs: int = 50
    patience: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ModelError("learning_rate must be non-negative")
        if self.batch_size < 1 or self.max_epochs < 1 or self.patience < 0:
            raise ModelError("batch_size and max_epochs must be >= 1, patience >= 0")


@dataclass(eq=False)
class TrainingCorpus:
    """Rows presented to the network: input, target and which outputs carry loss."""

    inputs: np.ndarray
    targets: np.ndarray
    loss_mask: np.ndarray

    def __post_init__(self):
        self.inputs = np.ascontiguousarray(self.inputs, dtype=np.float64)
        self.targets = np.ascontiguousarray(self.targets, dtype=np.float64)
        self.loss_mask = np.ascontiguousarray(self.loss_mask, dtype=bool)
        if not (self.inputs.ndim == 2 and self.inputs.shape == self.targets.shape
                == self.loss_mask.shape):
            raise ModelError("inputs, targets and loss_mask must share one 2-D shape")
        if len(self.inputs) and not self.loss_mask.any(axis=1).all():
            raise ModelError("every row needs at least one loss position")

    def __len__(self) -> int:
        return len(self.inputs)

    @property
    def width(self) -> int:
        return self.inputs.shape[1]

    @classmethod
    def concat(cls, parts: list[TrainingCorpus]) -> TrainingCorpus:
        return cls(np.concatenate([c.inputs for c in parts]),
                   np.concatenate([c.targets for c in parts]),
                   np.concatenate([c.loss_mask for c in parts]))


@dataclass
class LossHistory:
    train: list[float] = field(default_factory=list)
    validation: list[float] = field(default_factory=list)
    initial_validation: float | None = None
    # None when no epoch beat the starting parameters
    best_epoch: int | None = None


def init_model(input_dim: int, hidden_dim: int, alpha: float = 0.01,
               seed: int = 0) -> AutoencoderModel:
    """Glorot-uniform weights, zero biases."""
    if input_dim < 1 or hidden_dim < 1:
        raise ModelError("dimensions must be >= 1")
    rng = np.random.default_rng(seed)
    limit = np.sqrt(6.0 / (input_dim + hidden_dim))
    W_enc = rng.uniform(-limit, limit, size=(hidden_dim, input_dim))
    W_dec = rng.uniform(-limit, limit, size=(input_dim, hidden_dim))
    return AutoencoderModel(W_enc, np.zeros(hidden_dim), W_dec, np.zeros(input_dim), alpha)


def leaky_relu(z, alpha: float):
    z = np.asarray(z, dtype=np.float64)
    return np.where(z > 0, z, alpha * z)


def _leaky_slope(z, alpha):
    return np.where(z > 0, 1.0, alpha)


def _check_row(model: AutoencoderModel, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != model.input_dim:
        raise ModelError(f"expected length {model.input_dim}, got {x.shape[-1]}")
    return x


def forward(model: AutoencoderModel, x) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(reconstruction, hidden)``; ``x`` may be one row or a stack of rows."""
    x = _check_row(model, x)
    hidden = leaky_relu(x @ model.W_enc.T + model.b_enc, model.alpha)
    out = leaky_relu(hidden @ model.W_dec.T + model.b_dec, model.alpha)
    return out, hidden


def masked_mse(pred, target, loss_mask) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    loss_mask = np.asarray(loss_mask, dtype=bool)
    if pred.shape != target.shape or pred.shape != loss_mask.shape:
        raise ModelError("shape mismatch")
    count = loss_mask.sum()
    if count == 0:
        raise ModelError("loss mask selects no entries")
    diff = (target - pred)[loss_mask]
    return float(diff @ diff / count)


def gradient(model: AutoencoderModel, x, target, loss_mask):
    """Analytic gradient of ``masked_mse(forward(x), target, loss_mask)``.

    Returns arrays shaped like ``(W_enc, b_enc, W_dec, b_dec)``.
    """
    x = _check_row(model, x)
    target = _check_row(model, target)
    loss_mask = np.asarray(loss_mask, dtype=bool)
    count = loss_mask.sum()
    if count == 0:
        raise ModelError("loss mask selects no entries")
    a = model.alpha
    z1 = model.W_enc @ x + model.b_enc
    h = leaky_relu(z1, a)
    z2 = model.W_dec @ h + model.b_dec
    out = leaky_relu(z2, a)
    d_out = np.where(loss_mask, 2.0 * (out - target) / count, 0.0)
    d_z2 = d_out * _leaky_slope(z2, a)
    d_z1 = (model.W_dec.T @ d_z2) * _leaky_slope(z1, a)
    return np.outer(d_z1, x), d_z1, np.outer(d_z2, h), d_z2


@njit(cache=True, nogil=True)
def _sgd_epoch(W1, b1, W2, b2, X, T, M, order, lr, alpha, batch):
    """One pass over ``order``; updates parameters in place, returns summed loss."""
    hdim, n = W1.shape
    z1 = np.empty(hdim)
    a1 = np.empty(hdim)
    d1 = np.empty(hdim)
    d2 = np.empty(n)
    nz = np.empty(n, dtype=np.int64)
    if batch > 1:
        gW1 = np.zeros_like(W1)
        gb1 = np.zeros_like(b1)
        gW2 = np.zeros_like(W2)
        gb2 = np.zeros_like(b2)
    else:
        gW1 = np.zeros((1, 1))
        gb1 = np.zeros(1)
        gW2 = np.zeros((1, 1))
        gb2 = np.zeros(1)
    total = 0.0
    in_batch = 0
    for step in range(order.shape[0]):
        r = order[step]
        x = X[r]
        # inputs are mostly zeros at low sampling rates
        nnz = 0
        for j in range(n):
            if x[j] != 0.0:
                nz[nnz] = j
                nnz += 1
        for k in range(hdim):
            s = b1[k]
            for q in range(nnz):
                j = nz[q]
                s += W1[k, j] * x[j]
            z1[k] = s
            a1[k] = s if s > 0.0 else alpha * s
        count = 0
        for i in range(n):
            if M[r, i]:
                count += 1
        loss = 0.0
        for i in range(n):
            s = b2[i]
            for k in range(hdim):
                s += W2[i, k] * a1[k]
            if M[r, i]:
                o = s if s > 0.0 else alpha * s
                e = o - T[r, i]
                loss += e * e
                g = 2.0 * e / count
                d2[i] = g if s > 0.0 else alpha * g
            else:
                d2[i] = 0.0
        total += loss / count
        for k in range(hdim):
            d1[k] = 0.0
        if batch == 1:
            # backward and update share one row-major pass over W2; d1 must
            # see the pre-update weights
            for i in range(n):
                g = d2[i]
                if g != 0.0:
                    b2[i] -= lr * g
                    for k in range(hdim):
                        d1[k] += W2[i, k] * g
                        W2[i, k] -= lr * g * a1[k]
            for k in range(hdim):
                g = d1[k] if z1[k] > 0.0 else alpha * d1[k]
                b1[k] -= lr * g
                for q in range(nnz):
                    j = nz[q]
                    W1[k, j] -= lr * g * x[j]
        else:
            for i in range(n):
                g = d2[i]
                if g != 0.0:
                    gb2[i] += g
                    for k in range(hdim):
                        d1[k] += W2[i, k] * g
                        gW2[i, k] += g * a1[k]
            for k in range(hdim):
                g = d1[k] if z1[k] > 0.0 else alpha * d1[k]
                gb1[k] += g
                for q in range(nnz):
                    j = nz[q]
                    gW1[k, j] += g * x[j]
            in_batch += 1
            if in_batch == batch or step == order.shape[0] - 1:
                scale = lr / in_batch
                W1 -= scale * gW1
                b1 -= scale * gb1
                W2 -= scale * gW2
                b2 -= scale * gb2
                gW1[:] = 0.0
                gb1[:] = 0.0
                gW2[:] = 0.0
                gb2[:] = 0.0
                in_batch = 0
    return total


def corpus_loss(model: AutoencoderModel, corpus: TrainingCorpus) -> float:
    """Mean over rows of each row's masked MSE."""
    out, _ = forward(model, corpus.inputs)
    sq = np.where(corpus.loss_mask, (out - corpus.targets) ** 2, 0.0)
    return float(np.mean(sq.sum(axis=1) / corpus.loss_mask.sum(axis=1)))


def train(model: AutoencoderModel, corpus: TrainingCorpus, cfg: TrainConfig,
          validation: TrainingCorpus | None = None
          ) -> tuple[AutoencoderModel, LossHistory]:
    """Stochastic gradient descent on the masked MSE.

    Rows are reshuffled every epoch from ``cfg.seed``. With a validation
    corpus, training stops after ``cfg.patience`` epochs without improvement
    (0 disables the stop) and the best-scoring parameters are returned, the
    starting parameters included; otherwise the final parameters are. The
    input model is left untouched.
    """
    if len(corpus) == 0:
        raise ModelError("training corpus is empty")
    if corpus.width != model.input_dim:
        raise ModelError(f"corpus rows have length {corpus.width}, model expects {model.input_dim}")
    if validation is not None and len(validation) == 0:
        validation = None
    model = model.copy()
    rng = np.random.default_rng(cfg.seed)
    history = LossHistory()
    best, best_loss, stale = None, np.inf, 0
    if validation is not None:
        best, best_loss = model.copy(), corpus_loss(model, validation)
        history.initial_validation = best_loss
    for epoch in range(cfg.max_epochs):
        order = rng.permutation(len(corpus))
        total = _sgd_epoch(model.W_enc, model.b_enc, model.W_dec, model.b_dec,
                           corpus.inputs, corpus.targets, corpus.loss_mask, order,
                           float(cfg.learning_rate), float(model.alpha), int(cfg.batch_size))
        loss = total / len(corpus)
        if not np.isfinite(loss) or not model.is_finite():
            raise TrainingDivergedError(epoch, loss)
        history.train.append(loss)
        if validation is None:
            continue
        val = corpus_loss(model, validation)
        if not np.isfinite(val):
            raise TrainingDivergedError(epoch, val)
        history.validation.append(val)
        if val < best_loss:
            best, best_loss, stale = model.copy(), val, 0
            history.best_epoch = epoch
        else:
            stale += 1
            if cfg.patience and stale >= cfg.patience:
                break
    if best is not None:
        return best, history
    return model, history


def predict_matrix(model: AutoencoderModel, values: np.ndarray) -> np.ndarray:
    """Feed every row of a partial matrix through the network and symmetrise.

    ``values`` is a square matrix with unknown entries set to 0 (or a
    PartialMatrix).
    """
    values = getattr(values, "values", values)
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape != (model.input_dim, model.input_dim):
        raise ModelError(f"expected a {model.input_dim}x{model.input_dim} matrix, got {values.shape}")
    out, _ = forward(model, values)
    return (out + out.T) / 2.0
