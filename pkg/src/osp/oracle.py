"""Window search over the generator's attachment parameter, pre-training on
synthetic graphs, fine-tuning and final prediction."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .autoencoder import (AutoencoderModel, TrainConfig, TrainingCorpus,
                          TrainingDivergedError, init_model, predict_matrix, train)
from .graph import GeneratorParams, hop_distance_matrix, powerlaw_cluster_graph
from .metrics import evaluate, postprocess
from .sampling import PartialMatrix, SplitMask, sample_random_pairs, split_observed

log = logging.getLogger(__name__)

DEFAULT_P_VALUES = tuple(round(0.1 * k, 1) for k in range(1, 10))


class OracleError(RuntimeError):
    pass


@dataclass(frozen=True, order=True)
class Window:
    m_values: tuple[int, ...]

    def __init__(self, m_values):
        object.__setattr__(self, "m_values", tuple(int(m) for m in m_values))
        ms = self.m_values
        if not ms or ms[0] < 1 or any(a >= b for a, b in zip(ms, ms[1:])):
            raise ValueError(f"window values must be strictly increasing and >= 1: {ms}")

    def __str__(self):
        return "[" + ",".join(map(str, self.m_values)) + "]"

    def __iter__(self):
        return iter(self.m_values)

    @property
    def lead(self) -> int:
        return self.m_values[0]

    @classmethod
    def parse(cls, text: str) -> Window:
        return cls(int(t) for t in text.strip().strip("[]").split(",") if t.strip())


@dataclass(frozen=True)
class OracleConfig:
    n_d: int = 20
    p_values: tuple[float, ...] = DEFAULT_P_VALUES
    networks_per_combo: int = 1
    train_fraction_match: bool = True
    top_k: int = 3
    seed: int = 0
    hidden_dim: int = 20
    alpha: float = 0.01
    validation_share: float = 0.2
    broad_max: int = 100
    narrow_width: int = 3
    narrow_stride: int = 2
    train: TrainConfig = field(default_factory=lambda: TrainConfig(max_epochs=50, patience=10))
    finetune: TrainConfig = field(default_factory=lambda: TrainConfig(max_epochs=200, patience=10))

    def __post_init__(self):
        if self.n_d < 2:
            raise ValueError("n_d must be >= 2")
        if self.top_k < 1 or self.networks_per_combo < 1:
            raise ValueError("top_k and networks_per_combo must be >= 1")
        if not self.p_values or any(not 0.0 <= p <= 1.0 for p in self.p_values):
            raise ValueError("p_values must be a non-empty list in [0, 1]")
        if not 0.0 <= self.validation_share < 1.0:
            raise ValueError("validation_share must lie in [0, 1)")


@dataclass(frozen=True)
class WindowReport:
    window: Window
    validation_mean_error: float
    validation_ahde: float
    rank: int = 0
    stage: str = ""


@dataclass
class OracleResult:
    stage0: list[WindowReport]
    stage1: list[WindowReport]
    selected: list[Window]

    def to_csv(self) -> str:
        return reports_to_csv(self.stage0 + self.stage1)


def reports_to_csv(reports: list[WindowReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["stage", "window", "mean_error", "ahde", "rank"])
    for r in reports:
        w.writerow([r.stage, str(r.window), repr(r.validation_mean_error),
                    repr(r.validation_ahde), r.rank])
    return buf.getvalue()


def reports_from_csv(text: str) -> list[WindowReport]:
    rows = list(csv.DictReader(io.StringIO(text)))
    return [WindowReport(Window.parse(r["window"]), float(r["mean_error"]),
                         float(r["ahde"]), int(r["rank"]), r["stage"]) for r in rows]


def _seed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1, np.uint64)[0])


# salts keep the derived random streams apart
_GRAPH, _MASK, _SPLIT, _INIT, _SHUFFLE = range(5)


def build_stage0_windows(cfg: OracleConfig) -> list[Window]:
    """Broad windows [1,5,10], [10,15,20], ... up to ``cfg.broad_max``.

    Empty when ``n_d < 10``: the broad scan is then skipped.
    """
    if cfg.n_d < 10:
        return []
    windows = [Window([1, 5, 10])] if cfg.broad_max >= 10 else []
    k = 1
    while 10 * (k + 1) <= cfg.broad_max:
        windows.append(Window([10 * k, 10 * k + 5, 10 * (k + 1)]))
        k += 1
    return windows


def build_stage1_windows(broad: Window, width: int = 3, stride: int = 2) -> list[Window]:
    """Consecutive-integer windows covering ``min(broad) .. max(broad) + 1``."""
    lo, hi = broad.m_values[0], broad.m_values[-1] + 1
    out = []
    start = lo
    while start + width - 1 <= hi:
        out.append(Window(range(start, start + width)))
        start += stride
    return out or [broad]


def default_broad_window(n_d: int) -> Window:
    return Window(sorted({1, (1 + n_d) // 2, n_d}))


@lru_cache(maxsize=128)
def _synthetic_hdm(n: int, m: int, p: float, seed: int) -> np.ndarray:
    h = hop_distance_matrix(powerlaw_cluster_graph(GeneratorParams(n, m, p, seed)))
    h.flags.writeable = False
    return h


def generate_corpus(window: Window, n: int, cfg: OracleConfig, fraction: float) -> TrainingCorpus:
    """Rows of synthetic hop-distance matrices for every (m, p, replicate).

    With ``cfg.train_fraction_match`` each input row comes from the synthetic
    matrix sampled at ``fraction`` (unknown entries 0), mirroring what the
    network sees at prediction time; the target is always the full row.
    """
    bad = [m for m in window if m >= n]
    if bad:
        raise OracleError(f"window {window} has m >= n={n}: {bad}")
    inputs, targets = [], []
    for m in window:
        for pi, p in enumerate(cfg.p_values):
            for rep in range(cfg.networks_per_combo):
                h = _synthetic_hdm(n, m, float(p), _seed(cfg.seed, _GRAPH, m, pi, rep))
                targets.append(h)
                if cfg.train_fraction_match and fraction < 1.0:
                    ps = sample_random_pairs(h, fraction, _seed(cfg.seed, _MASK, m, pi, rep))
                    inputs.append(ps.values)
                else:
                    inputs.append(h)
    x = np.concatenate(inputs).astype(np.float64)
    t = np.concatenate(targets).astype(np.float64)
    return TrainingCorpus(x, t, np.ones_like(t, dtype=bool))


def make_split(p: PartialMatrix, cfg: OracleConfig) -> SplitMask:
    """Held-out observed pairs for scoring; share 0 scores on all observed pairs."""
    off = ~np.eye(p.n, dtype=bool)
    if cfg.validation_share == 0:
        return SplitMask(p.mask.copy(), p.mask & off)
    return split_observed(p, cfg.validation_share, _seed(cfg.seed, _SPLIT))


def _target_corpora(p: PartialMatrix, split: SplitMask):
    """Fine-tuning rows (loss on train entries) and validation rows
    (loss on held-out entries), both fed the train-only input."""
    x = np.where(split.train_mask, p.values, 0.0)
    fit = TrainingCorpus(x, p.values, split.train_mask)
    rows = split.validation_mask.any(axis=1)
    val = TrainingCorpus(x[rows], p.values[rows], split.validation_mask[rows])
    return fit, val


def _fresh_model(n: int, cfg: OracleConfig) -> AutoencoderModel:
    # every window starts from the same weights so only the data differs
    return init_model(n, cfg.hidden_dim, cfg.alpha, _seed(cfg.seed, _INIT))


def _with_seed(tc: TrainConfig, cfg: OracleConfig) -> TrainConfig:
    return replace(tc, seed=_seed(cfg.seed, _SHUFFLE, tc.seed))


def pretrain(m_values, p: PartialMatrix, split: SplitMask, cfg: OracleConfig) -> AutoencoderModel:
    window = m_values if isinstance(m_values, Window) else Window(m_values)
    corpus = generate_corpus(window, p.n, cfg, p.sampled_fraction)
    _, val = _target_corpora(p, split)
    try:
        model, _ = train(_fresh_model(p.n, cfg), corpus, _with_seed(cfg.train, cfg), val)
    except TrainingDivergedError as exc:
        raise OracleError(f"pre-training on window {window} diverged at epoch {exc.epoch}") from exc
    return model


def evaluate_window(window: Window, p: PartialMatrix, split: SplitMask,
                    cfg: OracleConfig) -> WindowReport:
    """Pre-train a fresh network on the window and score it on held-out observed pairs.

    Only entries under the observation mask are ever read from ``p``.
    """
    model = pretrain(window, p, split, cfg)
    x = np.where(split.train_mask, p.values, 0.0)
    pred = postprocess(predict_matrix(model, x))
    res = evaluate(pred, p.values, split.validation_mask)
    log.info("window %s: mean error %.4f, AHDE %.4f", window, res.mean_error, res.ahde)
    return WindowReport(window, res.mean_error, res.ahde)


def _rank(reports: list[WindowReport], stage: str) -> list[WindowReport]:
    order = sorted(reports, key=lambda r: (r.validation_mean_error, r.window.lead))
    return [replace(r, rank=k, stage=stage) for k, r in enumerate(order, start=1)]


def run_oracle(p: PartialMatrix, cfg: OracleConfig) -> OracleResult:
    """Broad scan (when ``n_d >= 10``), narrow scan, top-k selection.

    Windows needing ``m >= N`` are left out since the generator cannot
    build them.
    """
    split = make_split(p, cfg)
    n = p.n
    stage0 = []
    broad_windows = [w for w in build_stage0_windows(cfg) if w.m_values[-1] < n]
    if broad_windows:
        stage0 = _rank([evaluate_window(w, p, split, cfg) for w in broad_windows], "0")
        broad = stage0[0].window
    else:
        broad = default_broad_window(min(cfg.n_d, n - 1))
    narrow = [w for w in build_stage1_windows(broad, cfg.narrow_width, cfg.narrow_stride)
              if w.m_values[-1] < n]
    if not narrow:
        raise OracleError(f"no narrow window fits a graph of {n} nodes")
    stage1 = _rank([evaluate_window(w, p, split, cfg) for w in narrow], "I")
    return OracleResult(stage0, stage1, [r.window for r in stage1[:cfg.top_k]])


def covering_m_values(selected: list[Window]) -> list[int]:
    """m values to pre-train on for the final model.

    Three or more windows forming an overlapping chain are represented by
    their lead values (e.g. [5,6,7], [7,8,9], [9,10,11] -> [5,7,9]);
    anything else uses the sorted union of all values.
    """
    if not selected:
        raise OracleError("no windows selected")
    ws = sorted(selected)
    chained = all(set(a) & set(b) for a, b in zip(ws, ws[1:]))
    if len(ws) >= 3 and chained:
        return sorted({w.lead for w in ws})
    return sorted({m for w in ws for m in w})


def finetune(model: AutoencoderModel, p: PartialMatrix, split: SplitMask,
             cfg: OracleConfig) -> AutoencoderModel:
    fit, val = _target_corpora(p, split)
    model, _ = train(model, fit, _with_seed(cfg.finetune, cfg), val)
    return model


def stage2_predict(p: PartialMatrix, selected: list[Window], fine_tune: bool,
                   cfg: OracleConfig) -> np.ndarray:
    """Pre-train on the covering m values, optionally fine-tune on the observed
    entries, and return the post-processed prediction of the full matrix."""
    split = make_split(p, cfg)
    model = pretrain(covering_m_values(selected), p, split, cfg)
    if fine_tune:
        model = finetune(model, p, split, cfg)
    return postprocess(predict_matrix(model, p.values))


def observed_only_predict(p: PartialMatrix, cfg: OracleConfig) -> np.ndarray:
    """Baseline without pre-training: a fresh network trained on the observed entries only."""
    split = make_split(p, cfg)
    model = finetune(_fresh_model(p.n, cfg), p, split, cfg)
    return postprocess(predict_matrix(model, p.values))
