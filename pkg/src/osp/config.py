"""Flat ``key = value`` experiment configuration files."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .autoencoder import TrainConfig
from .oracle import OracleConfig

METHODS = ("osp", "osp_no_finetune", "observed_only", "mc", "trivial0", "trivial1")
DEFAULT_FRACTIONS = (0.001, 0.005, 0.01, 0.05, 0.1, 0.2, 0.4, 0.6, 0.8)


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str
    fractions: tuple[float, ...] = DEFAULT_FRACTIONS
    methods: tuple[str, ...] = METHODS
    oracle: OracleConfig = field(default_factory=OracleConfig)
    seeds: tuple[int, ...] = (0,)
    output_dir: str = "results"

    @property
    def train(self) -> TrainConfig:
        return self.oracle.train

    def __post_init__(self):
        if not self.fractions or any(not 0.0 < f <= 1.0 for f in self.fractions):
            raise ConfigError("fractions", "each fraction must lie in (0, 1]")
        if not self.methods:
            raise ConfigError("methods", "at least one method required")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ConfigError("methods", f"unknown method(s) {unknown}")
        if not self.seeds:
            raise ConfigError("seeds", "at least one seed required")


def _floats(v):
    return tuple(float(x) for x in _items(v))


def _ints(v):
    return tuple(int(x) for x in _items(v))


def _items(v):
    return [x.strip() for x in v.split(",") if x.strip()]


def _bool(v):
    low = v.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


# key -> (section, field, converter); section None is ExperimentConfig itself
_KEYS = {
    "dataset": (None, "dataset", str.strip),
    "fractions": (None, "fractions", _floats),
    "methods": (None, "methods", lambda v: tuple(_items(v))),
    "seeds": (None, "seeds", _ints),
    "output_dir": (None, "output_dir", str.strip),
    "n_d": ("oracle", "n_d", int),
    "p_values": ("oracle", "p_values", _floats),
    "networks_per_combo": ("oracle", "networks_per_combo", int),
    "train_fraction_match": ("oracle", "train_fraction_match", _bool),
    "top_k": ("oracle", "top_k", int),
    "oracle_seed": ("oracle", "seed", int),
    "hidden_dim": ("oracle", "hidden_dim", int),
    "alpha": ("oracle", "alpha", float),
    "validation_share": ("oracle", "validation_share", float),
    "broad_max": ("oracle", "broad_max", int),
    "narrow_width": ("oracle", "narrow_width", int),
    "narrow_stride": ("oracle", "narrow_stride", int),
    "learning_rate": ("train", "learning_rate", float),
    "batch_size": ("train", "batch_size", int),
    "pretrain_epochs": ("train", "max_epochs", int),
    "patience": ("train", "patience", int),
    "finetune_epochs": ("finetune", "max_epochs", int),
}


def parse_config(text: str) -> ExperimentConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment, lists are comma-separated.

    ``learning_rate``, ``batch_size`` and ``patience`` apply to both
    pre-training and fine-tuning.
    """
    top: dict = {}
    ocfg = OracleConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(key, "unknown key")
        section, name, conv = _KEYS[key]
        try:
            v = conv(value)
            if section is None:
                top[name] = v
            elif section == "oracle":
                ocfg = replace(ocfg, **{name: v})
            else:
                changes = {section: replace(getattr(ocfg, section), **{name: v})}
                if section == "train" and name != "max_epochs":
                    changes["finetune"] = replace(ocfg.finetune, **{name: v})
                ocfg = replace(ocfg, **changes)
        except ValueError as exc:
            raise ConfigError(key, str(exc)) from None
    if "dataset" not in top:
        raise ConfigError("dataset", "required")
    return ExperimentConfig(oracle=ocfg, **top)


def format_config(cfg: ExperimentConfig) -> str:
    """Render a config in the same syntax ``parse_config`` reads."""
    o = cfg.oracle
    fields = {
        "dataset": cfg.dataset,
        "fractions": ",".join(map(repr, cfg.fractions)),
        "methods": ",".join(cfg.methods),
        "seeds": ",".join(map(str, cfg.seeds)),
        "output_dir": cfg.output_dir,
        "n_d": o.n_d,
        "p_values": ",".join(map(repr, o.p_values)),
        "networks_per_combo": o.networks_per_combo,
        "train_fraction_match": str(o.train_fraction_match).lower(),
        "top_k": o.top_k,
        "oracle_seed": o.seed,
        "hidden_dim": o.hidden_dim,
        "alpha": repr(o.alpha),
        "validation_share": repr(o.validation_share),
        "broad_max": o.broad_max,
        "narrow_width": o.narrow_width,
        "narrow_stride": o.narrow_stride,
        "learning_rate": repr(o.train.learning_rate),
        "batch_size": o.train.batch_size,
        "pretrain_epochs": o.train.max_epochs,
        "patience": o.train.patience,
        "finetune_epochs": o.finetune.max_epochs,
    }
    return "".join(f"{k} = {v}\n" for k, v in fields.items())
