"""CLI surface: subcommands, exit codes, config file handling."""

import subprocess
import sys

import numpy as np
import pytest

from sedlab.features import load_norm_stats
from sedlab.harness.cli import EXIT_DATA, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main
from sedlab.harness.config import load_config
from sedlab.harness.grid import RESULTS_HEADER, result_row
from sedlab.harness.config import ExperimentConfig

TINY_FLAGS = [
    "--chunk-s", "2", "--chunk-hop-s", "2", "--epochs", "2", "--batch", "8",
    "--width", "2", "--gru-units", "2", "--n-mels", "32",
]


def _flags(dataset):
    return ["--dataset", str(dataset), *TINY_FLAGS]


# -- usage errors -----------------------------------------------------------------


def test_no_subcommand_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == EXIT_USAGE


def test_unknown_flag_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["train", "--nonsense", "1"])
    assert exc.value.code == EXIT_USAGE


def test_bad_int_literal_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["train", "--epochs", "three", "--out", "x"])
    assert exc.value.code == EXIT_USAGE


def test_bad_enum_value_is_data_error(tmp_path, tiny_ds):
    # flags parse fine; config validation rejects the value
    code = main(
        ["train", *_flags(tiny_ds), "--format", "binaural", "--out", str(tmp_path / "r")]
    )
    assert code == EXIT_DATA


# -- gen / fit-norm -----------------------------------------------------------------


def test_gen_and_fit_norm(tmp_path, capsys):
    root = tmp_path / "ds"
    code = main(
        ["gen", "--out", str(root), "--trains", "2", "--vals", "1", "--tests", "1",
         "--duration", "4", "--seed", "9"]
    )
    assert code == EXIT_OK
    assert "dataset written" in capsys.readouterr().out
    assert (root / "train" / "foa").exists()

    norm = tmp_path / "norm.bin"
    code = main(
        ["fit-norm", "--dataset", str(root), "--format", "mic", "--mels", "32",
         "--out", str(norm)]
    )
    assert code == EXIT_OK
    stats = load_norm_stats(norm)
    assert stats.mean.shape == (4, 32)


def test_fit_norm_missing_dataset(tmp_path):
    code = main(
        ["fit-norm", "--dataset", str(tmp_path / "nope"), "--out", str(tmp_path / "n.bin")]
    )
    assert code == EXIT_DATA


# -- train / eval --------------------------------------------------------------------


def test_train_then_eval(tmp_path, tiny_ds, capsys):
    out = tmp_path / "run"
    code = main(["train", *_flags(tiny_ds), "--out", str(out)])
    assert code == EXIT_OK
    text = capsys.readouterr().out
    assert "best epoch" in text and "checkpoint:" in text
    metrics = (out / "metrics.csv").read_text().splitlines()
    assert len(metrics) == 2
    assert metrics[0].count(",") == metrics[1].count(",")

    code = main(
        ["eval", *_flags(tiny_ds), "--checkpoint", str(out / "best.ckpt"),
         "--norm", str(out / "norm.bin"), "--split", "val"]
    )
    assert code == EXIT_OK
    assert "F1" in capsys.readouterr().out


def test_eval_missing_checkpoint(tmp_path, tiny_ds):
    code = main(
        ["eval", *_flags(tiny_ds), "--checkpoint", str(tmp_path / "no.ckpt"),
         "--norm", str(tmp_path / "no.bin")]
    )
    assert code == EXIT_DATA


def test_eval_corrupt_checkpoint(tmp_path, tiny_ds):
    ckpt = tmp_path / "bad.ckpt"
    ckpt.write_bytes(b"JUNKJUNKJUNKJUNK")
    norm = tmp_path / "n.bin"
    main(["fit-norm", "--dataset", str(tiny_ds), "--mels", "32", "--out", str(norm)])
    code = main(
        ["eval", *_flags(tiny_ds), "--checkpoint", str(ckpt), "--norm", str(norm)]
    )
    assert code == EXIT_DATA


def test_numeric_failure_exit_code(tmp_path, tiny_ds, monkeypatch):
    import sedlab.harness.train as train_mod

    monkeypatch.setattr(
        train_mod, "compute_loss", lambda c, p, t: (float("nan"), np.zeros_like(p))
    )
    code = main(["train", *_flags(tiny_ds), "--out", str(tmp_path / "r")])
    assert code == EXIT_NUMERIC


def test_config_file_with_flag_overrides(tmp_path, tiny_ds):
    cfg_file = tmp_path / "exp.cfg"
    cfg_file.write_text(
        f"# tiny setup\ndataset={tiny_ds}\nchunk_s=2.0\nchunk_hop_s=2.0\n"
        "epochs=2\nbatch=8\nwidth=2\ngru_units=2\nn_mels=32\nseed=3\nmu=1\n"
    )
    out = tmp_path / "run"
    code = main(["train", "--config", str(cfg_file), "--seed", "7", "--out", str(out)])
    assert code == EXIT_OK
    locked = load_config(out / "config.lock")
    assert locked.seed == 7  # flag wins over file
    assert locked.mu is True
    assert locked.chunk_s == 2.0
    assert locked.epochs == 2


# -- grid / report --------------------------------------------------------------------


def test_grid_and_report(tmp_path, tiny_ds, capsys):
    gdir = tmp_path / "grid"
    code = main(["grid", "--name", "channels", *_flags(tiny_ds), "--out", str(gdir)])
    assert code == EXIT_OK
    assert "4 cells finished" in capsys.readouterr().out
    assert (gdir / "results.csv").exists()

    code = main(["report", "--results", str(gdir / "results.csv")])
    assert code == EXIT_OK
    assert "## FOA" in capsys.readouterr().out

    md = tmp_path / "out.md"
    code = main(["report", "--results", str(gdir / "results.csv"), "--out", str(md)])
    assert code == EXIT_OK
    assert md.read_text().startswith("# Results")


def test_report_missing_and_malformed(tmp_path):
    assert main(["report", "--results", str(tmp_path / "none.csv")]) == EXIT_DATA
    bad = tmp_path / "bad.csv"
    bad.write_text("not,a,results,file\n")
    assert main(["report", "--results", str(bad)]) == EXIT_DATA


def test_grid_bad_name_is_usage_error(tiny_ds, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["grid", "--name", "bogus", *_flags(tiny_ds), "--out", str(tmp_path)])
    assert exc.value.code == EXIT_USAGE


def test_console_script_smoke(tmp_path):
    base = ExperimentConfig(dataset="d")
    csv = tmp_path / "r.csv"
    csv.write_text(RESULTS_HEADER + "\n" + result_row(base, 1.0, 0.5, 0.75) + "\n")
    proc = subprocess.run(
        [sys.executable, "-m", "sedlab", "report", "--results", str(csv)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "## FOA" in proc.stdout
