"""Sampling-fraction sweeps comparing prediction methods, and report files."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .completion import complete_lowrank
from .config import ExperimentConfig
from .graph import (GeneratorParams, Graph, hop_distance_matrix, largest_connected_component,
                    powerlaw_cluster_graph, read_edge_list, singular_value_profile)
from .metrics import EvalResult, evaluate, postprocess
from .oracle import (OracleConfig, Window, WindowReport, observed_only_predict, run_oracle,
                     stage2_predict)
from .sampling import sample_random_pairs, unobserved_mask

log = logging.getLogger(__name__)

CSV_FIELDS = ["method", "fraction", "seed", "mean_error", "ahde", "pair_count"]


@dataclass
class Cell:
    method: str
    fraction: float
    seed: int
    result: EvalResult | None = None
    error: str | None = None


@dataclass
class OracleRecord:
    fraction: float
    seed: int
    reports: list[WindowReport]
    selected: list[Window]


@dataclass
class ExperimentReport:
    cells: list[Cell] = field(default_factory=list)
    oracle: list[OracleRecord] = field(default_factory=list)
    singular_values: list[float] = field(default_factory=list)

    @property
    def failed(self) -> list[Cell]:
        return [c for c in self.cells if c.error is not None]

    def get(self, method: str, fraction: float, seed: int) -> Cell:
        for c in self.cells:
            if (c.method, c.fraction, c.seed) == (method, fraction, seed):
                return c
        raise KeyError((method, fraction, seed))


def load_dataset(spec: str) -> tuple[Graph, np.ndarray]:
    """Graph and hop-distance matrix for ``powerlaw:N,m,p,seed`` or an edge-list path.

    Files are reduced to their largest connected component.
    """
    if spec.startswith("powerlaw:"):
        parts = spec.split(":", 1)[1].split(",")
        if len(parts) != 4:
            raise ValueError(f"expected powerlaw:N,m,p,seed, got {spec!r}")
        n, m, p, seed = int(parts[0]), int(parts[1]), float(parts[2]), int(parts[3])
        g = powerlaw_cluster_graph(GeneratorParams(n, m, p, seed))
    else:
        g = largest_connected_component(read_edge_list(spec))
    return g, hop_distance_matrix(g)


def _sample_seed(seed: int, fraction: float) -> int:
    return int(np.random.SeedSequence([int(seed), round(fraction * 1e9)]).generate_state(1)[0])


def _constant_result(value: float, h: np.ndarray, mask: np.ndarray) -> EvalResult:
    # trivial fills replace the missing entries as-is; no post-processing
    return evaluate(np.full(h.shape, value), h, mask)


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Run every configured (seed, fraction, method) cell and score it on the
    unobserved pairs. A failing cell is recorded and the sweep continues."""
    _, h = load_dataset(cfg.dataset)
    report = ExperimentReport(singular_values=[float(s) for s in singular_value_profile(h)])
    for seed in cfg.seeds:
        ocfg: OracleConfig = replace(cfg.oracle, seed=int(seed))
        for fraction in cfg.fractions:
            p = sample_random_pairs(h, fraction, _sample_seed(seed, fraction))
            eval_mask = unobserved_mask(p)
            oracle_state: dict = {}

            def oracle_windows():
                # osp and osp_no_finetune share one oracle run per (seed, fraction)
                if "error" in oracle_state:
                    raise oracle_state["error"]
                if "selected" not in oracle_state:
                    try:
                        res = run_oracle(p, ocfg)
                    except Exception as exc:
                        oracle_state["error"] = exc
                        raise
                    report.oracle.append(OracleRecord(fraction, seed, res.stage0 + res.stage1,
                                                      res.selected))
                    oracle_state["selected"] = res.selected
                return oracle_state["selected"]

            runners = {
                "trivial0": lambda: _constant_result(0.0, h, eval_mask),
                "trivial1": lambda: _constant_result(1.0, h, eval_mask),
                "mc": lambda: evaluate(postprocess(complete_lowrank(p).matrix), h, eval_mask),
                "observed_only": lambda: evaluate(observed_only_predict(p, ocfg), h, eval_mask),
                "osp": lambda: evaluate(stage2_predict(p, oracle_windows(), True, ocfg),
                                        h, eval_mask),
                "osp_no_finetune": lambda: evaluate(
                    stage2_predict(p, oracle_windows(), False, ocfg), h, eval_mask),
            }
            for method in cfg.methods:
                cell = Cell(method, float(fraction), int(seed))
                try:
                    cell.result = runners[method]()
                except Exception as exc:  # one bad cell must not void the sweep
                    log.exception("cell %s f=%s seed=%s failed", method, fraction, seed)
                    cell.error = f"{type(exc).__name__}: {exc}"
                report.cells.append(cell)
                if cell.result is not None:
                    log.info("%s f=%g seed=%d: mean error %.4f, AHDE %.4f", method, fraction,
                             seed, cell.result.mean_error, cell.result.ahde)
    return report


def report_to_csv(report: ExperimentReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for c in report.cells:
        r = c.result
        w.writerow([c.method, repr(c.fraction), c.seed,
                    repr(r.mean_error) if r else "", repr(r.ahde) if r else "",
                    r.pair_count if r else ""])
    return buf.getvalue()


def report_from_csv(text: str) -> ExperimentReport:
    cells = []
    for row in csv.DictReader(io.StringIO(text)):
        result = None
        if row["mean_error"]:
            result = EvalResult(float(row["mean_error"]), float(row["ahde"]),
                                int(row["pair_count"]))
        cells.append(Cell(row["method"], float(row["fraction"]), int(row["seed"]), result,
                          None if result else "failed"))
    return ExperimentReport(cells)


def report_to_json(report: ExperimentReport) -> str:
    doc = {
        "cells": [
            {"method": c.method, "fraction": c.fraction, "seed": c.seed,
             "mean_error": c.result.mean_error if c.result else None,
             "ahde": c.result.ahde if c.result else None,
             "pair_count": c.result.pair_count if c.result else None,
             "error": c.error}
            for c in report.cells],
        "oracle": [
            {"fraction": o.fraction, "seed": o.seed,
             "selected": [str(w) for w in o.selected],
             "reports": [{"stage": r.stage, "window": str(r.window), "rank": r.rank,
                          "mean_error": r.validation_mean_error, "ahde": r.validation_ahde}
                         for r in o.reports]}
            for o in report.oracle],
        "singular_values": report.singular_values,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def report_from_json(text: str) -> ExperimentReport:
    doc = json.loads(text)
    cells = []
    for c in doc["cells"]:
        result = None
        if c["mean_error"] is not None:
            result = EvalResult(c["mean_error"], c["ahde"], c["pair_count"])
        cells.append(Cell(c["method"], c["fraction"], c["seed"], result, c["error"]))
    oracle = [OracleRecord(o["fraction"], o["seed"],
                           [WindowReport(Window.parse(r["window"]), r["mean_error"], r["ahde"],
                                         r["rank"], r["stage"]) for r in o["reports"]],
                           [Window.parse(w) for w in o["selected"]]) for o in doc["oracle"]]
    return ExperimentReport(cells, oracle, doc["singular_values"])


def emit_report(report: ExperimentReport, fmt: str, out: str | Path) -> Path:
    if fmt == "csv":
        text = report_to_csv(report)
    elif fmt == "json":
        text = report_to_json(report)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    return out


def load_report(path: str | Path) -> ExperimentReport:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return report_from_json(text) if path.suffix == ".json" else report_from_csv(text)


def lowrank_diagnostic(dataset: str | np.ndarray) -> str:
    """CSV of the hop-distance matrix's singular values with their log10."""
    h = load_dataset(dataset)[1] if isinstance(dataset, str) else dataset
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "sigma", "log10_sigma"])
    for i, s in enumerate(singular_value_profile(h)):
        w.writerow([i, repr(float(s)), repr(math.log10(s)) if s > 0 else "-inf"])
    return buf.getvalue()


def energy_share(sigma, top: int = 10) -> float:
    """Fraction of the singular-value sum carried by the ``top`` largest values."""
    sigma = np.asarray(sigma, dtype=np.float64)
    return float(sigma[:top].sum() / sigma.sum())
