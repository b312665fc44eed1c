"""Command line entry point.

    osp run --config experiment.cfg
    osp oracle --dataset edges.txt --fraction 0.01 --seed 0
    osp svd --dataset powerlaw:500,5,0.5,1
    osp complete --dataset edges.txt --fraction 0.01 --method mc

Output files go to the config's ``output_dir`` (``results`` by default) unless
``OSP_OUTPUT_DIR`` is set. Exit status is 2 when some cells of a run failed.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from .config import METHODS, ConfigError, ExperimentConfig, format_config, parse_config
from .experiment import emit_report, load_dataset, lowrank_diagnostic, report_to_csv, run_experiment
from .oracle import OracleConfig, run_oracle
from .sampling import sample_random_pairs

OUTPUT_ENV = "OSP_OUTPUT_DIR"
EXIT_PARTIAL = 2


def _output_dir(default: str) -> Path:
    out = Path(os.environ.get(OUTPUT_ENV) or default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _finish(report, out: Path, stem: str) -> int:
    emit_report(report, "csv", out / f"{stem}.csv")
    emit_report(report, "json", out / f"{stem}.json")
    sys.stdout.write(report_to_csv(report))
    if report.failed:
        for c in report.failed:
            print(f"failed: {c.method} f={c.fraction} seed={c.seed}: {c.error}", file=sys.stderr)
        return EXIT_PARTIAL
    return 0


def cmd_run(args) -> int:
    cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
    out = _output_dir(cfg.output_dir)
    (out / "config.cfg").write_text(format_config(cfg), encoding="utf-8")
    return _finish(run_experiment(cfg), out, "report")


def cmd_oracle(args) -> int:
    _, h = load_dataset(args.dataset)
    p = sample_random_pairs(h, args.fraction, args.seed)
    cfg = OracleConfig(n_d=args.n_d, broad_max=args.broad_max, top_k=args.top_k, seed=args.seed)
    res = run_oracle(p, cfg)
    text = res.to_csv()
    (_output_dir("results") / "oracle.csv").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    print("selected: " + " ".join(str(w) for w in res.selected), file=sys.stderr)
    return 0


def cmd_svd(args) -> int:
    text = lowrank_diagnostic(args.dataset)
    (_output_dir("results") / "singular_values.csv").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return 0


def cmd_complete(args) -> int:
    cfg = ExperimentConfig(dataset=args.dataset, fractions=(args.fraction,),
                           methods=(args.method,), seeds=(args.seed,))
    cfg = replace(cfg, oracle=replace(cfg.oracle, n_d=args.n_d))
    return _finish(run_experiment(cfg), _output_dir(cfg.output_dir), f"complete_{args.method}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="osp", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment sweep from a config file")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("oracle", help="rank generator windows for a sampled network")
    p.add_argument("--dataset", required=True, help="edge-list path or powerlaw:N,m,p,seed")
    p.add_argument("--fraction", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-d", type=int, default=20, help="assumed bound on the average degree")
    p.add_argument("--broad-max", type=int, default=100)
    p.add_argument("--top-k", type=int, default=3)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("svd", help="singular values of the hop-distance matrix")
    p.add_argument("--dataset", required=True)
    p.set_defaults(func=cmd_svd)

    p = sub.add_parser("complete", help="predict missing distances with one method")
    p.add_argument("--dataset", required=True)
    p.add_argument("--fraction", type=float, required=True)
    p.add_argument("--method", choices=METHODS, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-d", type=int, default=20)
    p.set_defaults(func=cmd_complete)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
