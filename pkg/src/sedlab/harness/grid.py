"""Experiment grids: cell enumeration, resumable execution, reporting.

Four named grids mirror the experiment designs:

    aug           16 augmentation combinations x both formats
    loss_transfer {bce, bce_dice} x {scratch, mono_pretrained} x formats
    chunk         chunk length {4, 8, 12} s x formats
    channels      {mono, all} x formats

Cells are keyed by config hash; each finished cell writes one CSV row to
cells/<hash>.row via temp-file + rename, so an interrupted grid resumes
exactly. Failures are recorded as cells/<hash>.err and the grid continues.
"""

from __future__ import annotations

import dataclasses
import logging
import os
from itertools import combinations
from pathlib import Path

from .config import ExperimentConfig, default_aug_flags
from .train import train_run

logger = logging.getLogger(__name__)

RESULTS_HEADER = "format,mu,co,fs,cs,loss,transfer,chunk_s,channels,seed,er,f1,sede"

GRID_NAMES = ("aug", "loss_transfer", "chunk", "channels")

# Table-style row order for the augmentation grid: none, singles, pairs,
# triples, all, with flags ordered (mu, co, fs, cs)
AUG_COMBOS = (
    [()]
    + [(i,) for i in range(4)]
    + list(combinations(range(4), 2))
    + list(combinations(range(4), 3))
    + [(0, 1, 2, 3)]
)


def _flags(combo) -> dict:
    names = ("mu", "co", "fs", "cs")
    return {n: (i in combo) for i, n in enumerate(names)}


def grid_cells(name: str, base: ExperimentConfig, seeds=(0,)) -> list:
    """Ordered list of ExperimentConfig cells for a named grid."""
    if name not in GRID_NAMES:
        raise ValueError(f"unknown grid {name!r}; choose from {GRID_NAMES}")
    cells = []
    for fmt in ("foa", "mic"):
        mu, co, fs, cs = default_aug_flags(fmt)
        fmt_default = dict(mu=mu, co=co, fs=fs, cs=cs)
        for seed in seeds:
            common = dict(format=fmt, seed=seed)
            if name == "aug":
                for combo in AUG_COMBOS:
                    cells.append(
                        dataclasses.replace(base, **common, **_flags(combo))
                    )
            elif name == "loss_transfer":
                for loss in ("bce", "bce_dice"):
                    for transfer in ("scratch", "mono_pretrained"):
                        cells.append(
                            dataclasses.replace(
                                base, **common, **fmt_default, loss=loss, transfer=transfer
                            )
                        )
            elif name == "chunk":
                for chunk_s in (4.0, 8.0, 12.0):
                    cells.append(
                        dataclasses.replace(base, **common, **fmt_default, chunk_s=chunk_s)
                    )
            else:
                for channels in ("mono", "all"):
                    cells.append(
                        dataclasses.replace(base, **common, **fmt_default, channels=channels)
                    )
    return cells


def result_row(cfg: ExperimentConfig, er: float, f1: float, sede: float) -> str:
    return (
        f"{cfg.format},{int(cfg.mu)},{int(cfg.co)},{int(cfg.fs)},{int(cfg.cs)},"
        f"{cfg.loss},{cfg.transfer},{cfg.chunk_s:g},{cfg.channels},{cfg.seed},"
        f"{er:.6f},{f1:.6f},{sede:.6f}"
    )


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def run_cell(cfg: ExperimentConfig, grid_dir: Path) -> str:
    """Run one cell (or reuse its finished row); returns the CSV row."""
    grid_dir = Path(grid_dir)
    cells = grid_dir / "cells"
    cells.mkdir(parents=True, exist_ok=True)
    key = cfg.config_hash()
    row_path = cells / f"{key}.row"
    if row_path.exists():
        return row_path.read_text(encoding="utf-8").strip()
    record = train_run(cfg, grid_dir / "runs" / key, pretrain_dir=grid_dir / "pretrain")
    row = result_row(cfg, record.test.er, record.test.f1, record.test.sede)
    _atomic_write(row_path, row + "\n")
    return row


def run_grid(
    name: str,
    base: ExperimentConfig,
    grid_dir: Path,
    seeds=(0,),
) -> list:
    """Execute (or resume) a named grid; returns finished rows in order."""
    grid_dir = Path(grid_dir)
    cells = grid_cells(name, base, seeds)
    rows = []
    for i, cfg in enumerate(cells):
        key = cfg.config_hash()
        err_path = grid_dir / "cells" / f"{key}.err"
        try:
            row = run_cell(cfg, grid_dir)
        except Exception as exc:  # record and continue with remaining cells
            logger.error("cell %d/%d (%s) failed: %s", i + 1, len(cells), key, exc)
            err_path.parent.mkdir(parents=True, exist_ok=True)
            _atomic_write(err_path, f"{type(exc).__name__}: {exc}\n")
            continue
        if err_path.exists():
            err_path.unlink()
        rows.append(row)
        logger.info("cell %d/%d done: %s", i + 1, len(cells), row)
    _atomic_write(grid_dir / "results.csv", "\n".join([RESULTS_HEADER] + rows) + "\n")
    return rows


def parse_results(text: str) -> list:
    """CSV text -> list of dict rows (numeric fields converted)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != RESULTS_HEADER:
        raise ValueError("unrecognized results CSV header")
    keys = RESULTS_HEADER.split(",")
    out = []
    for ln in lines[1:]:
        vals = ln.split(",")
        if len(vals) != len(keys):
            raise ValueError(f"bad results row: {ln!r}")
        row = dict(zip(keys, vals))
        for k in ("er", "f1", "sede"):
            row[k] = float(row[k])
        for k in ("mu", "co", "fs", "cs", "seed"):
            row[k] = int(row[k])
        row["chunk_s"] = float(row["chunk_s"])
        out.append(row)
    return out


def report(rows: list) -> str:
    """Markdown report: one table per format, best ER / best F1 in bold.

    `rows` are CSV strings as produced by result_row. Ties are broken by
    the earlier row.
    """
    if not rows:
        raise ValueError("report needs at least one row")
    parsed = parse_results("\n".join([RESULTS_HEADER] + list(rows)))
    md = ["# Results", ""]
    for fmt in ("foa", "mic"):
        fmt_rows = [r for r in parsed if r["format"] == fmt]
        if not fmt_rows:
            continue
        best_er = min(range(len(fmt_rows)), key=lambda i: fmt_rows[i]["er"])
        best_f1 = max(range(len(fmt_rows)), key=lambda i: (fmt_rows[i]["f1"], -i))
        md.append(f"## {fmt.upper()}")
        md.append("")
        md.append("| MU | CO | FS | CS | loss | transfer | chunk | ch | seed | ER | F1 | SEDE |")
        md.append("|---|---|---|---|---|---|---|---|---|---|---|---|")
        for i, r in enumerate(fmt_rows):
            er = f"{r['er']:.6f}"
            f1 = f"{r['f1']:.6f}"
            if i == best_er:
                er = f"**{er}**"
            if i == best_f1:
                f1 = f"**{f1}**"
            md.append(
                f"| {r['mu']} | {r['co']} | {r['fs']} | {r['cs']} | {r['loss']} "
                f"| {r['transfer']} | {r['chunk_s']:g} | {r['channels']} | {r['seed']} "
                f"| {er} | {f1} | {r['sede']:.6f} |"
            )
        md.append("")
    return "\n".join(md) + "\n"
