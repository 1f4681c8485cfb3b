"""Command-line interface.

Subcommands: gen, fit-norm, train, eval, grid, report. Exit codes:
0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from ..features import MelConfig, load_norm_stats, save_norm_stats
from ..metrics import binarize, segment_metrics
from ..nn import Crnn, load_checkpoint, restore_model
from ..scene.dataset import DatasetConfig, generate_dataset
from .config import DataError, ExperimentConfig, NumericError, load_config
from .data import fit_split_norm, load_split, normalize_split
from .grid import GRID_NAMES, RESULTS_HEADER, parse_results, report, run_grid
from .train import evaluate_split, model_config, train_run

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; this lab reserves 2 for data."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="flat key=value config file")
    for f in dataclasses.fields(ExperimentConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.type == "bool":
            p.add_argument(flag, type=int, choices=(0, 1), default=None)
        else:
            kind = {"int": int, "float": float}.get(f.type, str)
            p.add_argument(flag, type=kind, default=None)


def _build_config(args) -> ExperimentConfig:
    overrides = {}
    for f in dataclasses.fields(ExperimentConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            overrides[f.name] = bool(v) if f.type == "bool" else v
    if args.config is not None:
        return load_config(args.config, **overrides)
    return ExperimentConfig(**overrides)


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sedlab", description="polyphonic SED laboratory")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="synthesize a dataset")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--trains", type=int, default=60)
    p.add_argument("--vals", type=int, default=15)
    p.add_argument("--tests", type=int, default=15)
    p.add_argument("--duration", type=float, default=20.0)
    p.add_argument("--classes", type=int, default=12)
    p.add_argument("--polyphony", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("fit-norm", help="fit normalization stats on the train split")
    p.add_argument("--dataset", type=Path, required=True)
    p.add_argument("--format", choices=("foa", "mic"), default="foa")
    p.add_argument("--channels", choices=("all", "mono"), default="all")
    p.add_argument("--classes", type=int, default=12)
    p.add_argument("--mels", type=int, default=128)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("train", help="run one training configuration")
    _add_config_args(p)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a split")
    _add_config_args(p)
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--norm", type=Path, required=True)
    p.add_argument("--split", choices=("train", "val", "test"), default="test")

    p = sub.add_parser("grid", help="run (or resume) an experiment grid")
    _add_config_args(p)
    p.add_argument("--name", choices=GRID_NAMES, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--seeds", type=str, default="0", help="comma-separated seeds")

    p = sub.add_parser("report", help="render a grid results CSV as Markdown")
    p.add_argument("--results", type=Path, required=True)
    p.add_argument("--out", type=Path, help="write Markdown here (default stdout)")
    return parser


def _cmd_gen(args) -> int:
    cfg = DatasetConfig(
        root=args.out,
        n_train=args.trains,
        n_val=args.vals,
        n_test=args.tests,
        scene_duration=args.duration,
        n_classes=args.classes,
        max_polyphony=args.polyphony,
        seed=args.seed,
        n_workers=args.workers,
    )
    root = generate_dataset(cfg)
    print(f"dataset written to {root}")
    return EXIT_OK


def _cmd_fit_norm(args) -> int:
    data = load_split(
        args.dataset,
        "train",
        args.format,
        args.channels,
        args.classes,
        mel_cfg=MelConfig(n_mels=args.mels),
    )
    stats = fit_split_norm(data)
    save_norm_stats(args.out, stats)
    print(f"norm stats ({stats.mean.shape[0]}x{stats.mean.shape[1]}) -> {args.out}")
    return EXIT_OK


def _cmd_train(args) -> int:
    cfg = _build_config(args)
    record = train_run(cfg, args.out)
    print(f"best epoch {record.best_epoch} (val SEDE {min(record.val_sede):.6f})")
    print(record.test.text_block(), end="")
    print(f"checkpoint: {record.ckpt_path}")
    (Path(args.out) / "metrics.csv").write_text(
        record.test.CSV_HEADER + "\n" + record.test.csv_row() + "\n", encoding="utf-8"
    )
    return EXIT_OK


def _cmd_eval(args) -> int:
    cfg = _build_config(args)
    data = load_split(
        cfg.dataset,
        args.split,
        cfg.format,
        cfg.channels,
        cfg.n_classes,
        mel_cfg=MelConfig(n_mels=cfg.n_mels),
    )
    stats = load_norm_stats(args.norm)
    data = normalize_split(data, stats)
    model = Crnn(model_config(cfg))
    restore_model(model, load_checkpoint(args.checkpoint))
    report_ = evaluate_split(model, data, cfg.chunk_s)
    print(report_.text_block(), end="")
    return EXIT_OK


def _cmd_grid(args) -> int:
    base = _build_config(args)
    seeds = tuple(int(s) for s in args.seeds.split(",") if s.strip())
    rows = run_grid(args.name, base, args.out, seeds=seeds)
    print(f"{len(rows)} cells finished; results in {Path(args.out) / 'results.csv'}")
    return EXIT_OK


def _cmd_report(args) -> int:
    try:
        text = Path(args.results).read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise DataError(str(exc)) from exc
    parsed = parse_results(text)  # validates schema
    rows = [ln for ln in text.splitlines()[1:] if ln.strip()]
    md = report(rows)
    if args.out:
        Path(args.out).write_text(md, encoding="utf-8")
        print(f"report with {len(parsed)} rows -> {args.out}")
    else:
        print(md, end="")
    return EXIT_OK


_COMMANDS = {
    "gen": _cmd_gen,
    "fit-norm": _cmd_fit_norm,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "grid": _cmd_grid,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.cmd](args)
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
