"""Acceptance gate: one test per shipped guarantee, one verdict line each.

Each criterion prints `CRITERION n: PASS/FAIL/WARN - detail` directly to the
real stdout so the lines show up live even under pytest capture. Criterion 6
is the stochastic trend check and dominates the runtime (~25 min: dataset
synthesis plus 20 training runs plus 5 mono pretrains on one CPU).
"""

import math
import statistics
import time

import numpy as np
import pytest

from sedlab.augment import AugmentConfig, Sample, draw_gates, mixup, sample_stream
from sedlab.features import FeatureTensor, MelConfig
from sedlab.harness.cli import main as cli_main
from sedlab.harness.config import ExperimentConfig
from sedlab.harness.data import chunk, fit_split_norm, load_split, normalize_split
from sedlab.harness.grid import run_grid
from sedlab.harness.train import overfit_probe, train_run
from sedlab.labels import LabelGrid, events_to_grid, read_label_csv
from sedlab.losses import LossConfig, compute_loss, dice_loss
from sedlab.metrics import segment_metrics
from sedlab.nn import Crnn, CrnnConfig, lr_schedule
from sedlab.nn.gradcheck import grad_check
from sedlab.scene.arrays import (
    SPEED_OF_SOUND,
    ArrayFormat,
    foa_response,
    mic_delays_samples,
)
from sedlab.scene.atoms import DEFAULT_ATOMS, render_atom
from sedlab.scene.dataset import SPLITS, DatasetConfig, generate_dataset, read_manifest
from sedlab.scene.render import render_scene
from sedlab.scene.types import EventSpec, SceneSpec

FS = 24000


@pytest.fixture
def say(capfd):
    """Print a line both into the captured log and live past fd capture."""

    def _emit(line: str) -> None:
        print(line)
        with capfd.disabled():
            print(line, flush=True)

    return _emit


def _verdict(say_fn, n: int, ok: bool, detail: str, warn: bool = False) -> None:
    status = "WARN" if warn else ("PASS" if ok else "FAIL")
    say_fn(f"CRITERION {n}: {status} - {detail}")


def _static_traj(az: float, el: float, duration: float) -> np.ndarray:
    n = math.ceil(duration / 0.1 - 1e-9)
    return np.tile([az, el], (n, 1))


# -- 1. gradient correctness -------------------------------------------------------


def test_criterion_1_gradient_correctness(say):
    cfg = CrnnConfig(
        conv_blocks=((2, 2, 2), (3, 2, 2), (4, 1, 2)),
        gru_units=3,
        n_classes=2,
        input_channels=4,
        n_mels=8,
        seed=0,
    )
    rng = np.random.Generator(np.random.PCG64(11))
    x = rng.standard_normal((2, 4, 16, 8))
    target = (rng.random((2, 2, 2)) < 0.4).astype(np.float64)
    t0 = time.perf_counter()
    worsts = {}
    for kind in ("bce", "dice", "bce_dice"):
        model = Crnn(cfg, dtype=np.float64)
        loss_cfg = LossConfig(kind=kind)
        worsts[kind] = grad_check(
            model, x, target, lambda p, t: compute_loss(loss_cfg, p, t)
        )
    wall = time.perf_counter() - t0
    ok = all(w < 1e-4 for w in worsts.values()) and wall < 60.0
    detail = (
        "micro-CRNN FD rel err "
        + " ".join(f"{k}={v:.2e}" for k, v in worsts.items())
        + f" (< 1e-4), wall {wall:.1f}s (< 60s)"
    )
    _verdict(say, 1, ok, detail)
    assert ok


# -- 2. metric oracle equivalence -------------------------------------------------


def _brute_counts(pred, ref):
    """Pure-Python segment counter: any-pooling over 10-frame segments."""
    t_len, k_len = len(ref), len(ref[0])
    n = s = d = ins = tp = fp = fn = 0
    for start in range(0, t_len, 10):
        rows = range(start, min(start + 10, t_len))
        for k in range(k_len):
            p_any = any(pred[t][k] for t in rows)
            r_any = any(ref[t][k] for t in rows)
            tp += p_any and r_any
            fp += p_any and not r_any
            fn += r_any and not p_any
            n += r_any
        seg_fp = sum(
            any(pred[t][k] for t in rows) and not any(ref[t][k] for t in rows)
            for k in range(k_len)
        )
        seg_fn = sum(
            any(ref[t][k] for t in rows) and not any(pred[t][k] for t in rows)
            for k in range(k_len)
        )
        s += min(seg_fp, seg_fn)
        d += max(0, seg_fn - seg_fp)
        ins += max(0, seg_fp - seg_fn)
    return n, s, d, ins, tp, fp, fn


def test_criterion_2_metric_oracle(say):
    rng = np.random.Generator(np.random.PCG64(2))
    t0 = time.perf_counter()
    worst_er = worst_f1 = 0.0
    for _ in range(1000):
        t_len = int(rng.integers(1, 51))
        k_len = int(rng.integers(1, 13))
        p = rng.random()
        pred = (rng.random((t_len, k_len)) < p).astype(bool)
        ref = (rng.random((t_len, k_len)) < rng.random()).astype(bool)
        rep = segment_metrics(pred, ref)
        n, s, d, ins, tp, fp, fn = _brute_counts(pred.tolist(), ref.tolist())
        assert (rep.sum_n, rep.sum_s, rep.sum_d, rep.sum_i) == (n, s, d, ins)
        assert (rep.sum_tp, rep.sum_fp, rep.sum_fn) == (tp, fp, fn)
        er = float(ins) if n == 0 else (s + d + ins) / n
        f1 = 0.0 if tp == 0 else 2.0 * tp / (2.0 * tp + fp + fn)
        worst_er = max(worst_er, abs(rep.er - er))
        worst_f1 = max(worst_f1, abs(rep.f1 - f1))
    wall = time.perf_counter() - t0
    ok = worst_er < 1e-12 and worst_f1 < 1e-12 and wall < 10.0
    _verdict(
        say,
        2,
        ok,
        f"1000 grids vs brute force: max |dER|={worst_er:.1e} "
        f"|dF1|={worst_f1:.1e} (< 1e-12), wall {wall:.1f}s (< 10s)",
    )
    assert ok


# -- 3. dice / F1 identity ----------------------------------------------------------


def test_criterion_3_dice_f1_identity(say):
    rng = np.random.Generator(np.random.PCG64(3))
    worst = 0.0
    for _ in range(500):
        t_len = int(rng.integers(2, 40))
        k_len = int(rng.integers(1, 13))
        pred = (rng.random((t_len, k_len)) < rng.uniform(0.2, 0.8)).astype(np.float64)
        ref = (rng.random((t_len, k_len)) < rng.uniform(0.2, 0.8)).astype(np.float64)
        if not pred.any() and not ref.any():
            ref[0, 0] = 1.0
        loss, _ = dice_loss(pred, ref, epsilon=1e-7)
        tp = float(np.sum(pred * ref))
        fp = float(np.sum(pred * (1 - ref)))
        fn = float(np.sum((1 - pred) * ref))
        f1 = 2.0 * tp / (2.0 * tp + fp + fn)
        worst = max(worst, abs(loss - (1.0 - f1)))
    ok = worst < 1e-6
    _verdict(say, 3, ok, f"500 binary grids: max |dice - (1-F1)| = {worst:.2e} (< 1e-6)")
    assert ok


# -- 4. array-model fidelity ----------------------------------------------------------


def test_criterion_4_array_fidelity(say):
    rng = np.random.Generator(np.random.PCG64(4))
    mic = ArrayFormat("mic")
    foa = ArrayFormat("foa")

    worst_delay = 0.0
    sq_err, n_err = 0.0, 0
    for trial in range(100):
        az = float(rng.uniform(-math.pi, math.pi))
        el = float(rng.uniform(-math.pi / 2, math.pi / 2))

        # MIC: inter-channel delay of a broadband event vs geometry
        ev = EventSpec(7, 0.0, 1.0, _static_traj(az, el, 1.0), gain=0.3)
        spec = SceneSpec(1.0, [ev], noise_snr_db=math.inf, seed=40_000 + trial)
        audio, _ = render_scene(spec, mic)
        lo, hi = int(0.1 * FS), int(0.9 * FS)
        ref = audio.samples[0, lo:hi].astype(np.float64)
        delays = mic_delays_samples(mic, az, el, FS)
        n = len(ref)
        up = 32
        for c in range(1, 4):
            sig = audio.samples[c, lo:hi].astype(np.float64)
            cross = np.fft.rfft(sig, 2 * n) * np.conj(np.fft.rfft(ref, 2 * n))
            xc = np.fft.irfft(cross, 2 * n * up)
            lag = (np.argmax(np.roll(xc, n * up)) - n * up) / up
            worst_delay = max(worst_delay, abs(lag - (delays[c] - delays[0])))

        # FOA: per-frame channel gains vs the directional response
        ev = EventSpec(7, 0.0, 0.5, _static_traj(az, el, 0.5), gain=0.3)
        spec = SceneSpec(0.5, [ev], noise_snr_db=math.inf, seed=41_000 + trial)
        audio, _ = render_scene(spec, foa)
        mono = render_atom(
            DEFAULT_ATOMS[7],
            int(0.5 * FS),
            FS,
            np.random.Generator(np.random.PCG64(np.random.SeedSequence([spec.seed, 0]))),
        )
        resp = foa_response(az, el)
        for frame in range(1, 10):  # interior 1024-sample frames
            sl = slice(frame * 1024, (frame + 1) * 1024)
            m = mono[sl]
            denom = float(m @ m)
            for c in range(4):
                g = float(audio.samples[c, sl] @ m) / denom / ev.gain
                sq_err += (g - resp[c]) ** 2
                n_err += 1

    rms = math.sqrt(sq_err / n_err)
    ok = worst_delay <= 0.5 and rms < 1e-3
    _verdict(
        say,
        4,
        ok,
        f"100 DOAs: MIC delay err max {worst_delay:.3f} samples (<= 0.5); "
        f"FOA gain RMS {rms:.2e} (< 1e-3)",
    )
    assert ok


# -- 5. schedule anchors --------------------------------------------------------------


def test_criterion_5_schedule_anchors(say):
    anchors_ok = (
        lr_schedule(0.0) == 1e-4
        and lr_schedule(0.10) == 1e-3
        and lr_schedule(0.70) == 1e-3
        and lr_schedule(1.0) == 1e-4
    )
    mid = lr_schedule(0.05)
    mid_ok = abs(mid - 10**-3.5) < 1e-12
    ok = anchors_ok and mid_ok
    _verdict(
        say,
        5,
        ok,
        f"anchors (0,0.1,0.7,1) -> (1e-4,1e-3,1e-3,1e-4) exact; "
        f"lr(0.05) = {mid:.6e} vs 10^-3.5",
    )
    assert ok


# -- 6. trend reproduction ------------------------------------------------------------

C6_SEEDS = (0, 1, 2, 3, 4)


def _c6_config(dataset: str, **over) -> ExperimentConfig:
    # smallest setup observed to reproduce both trends: 12 epochs, width 4,
    # 64 mels, 2 s chunks, no augmentation (isolates the compared variable)
    base = dict(
        dataset=dataset,
        channels="all",
        mu=False,
        co=False,
        fs=False,
        cs=False,
        chunk_s=2.0,
        chunk_hop_s=2.0,
        epochs=12,
        batch=32,
        width=4,
        gru_units=8,
        n_mels=64,
    )
    base.update(over)
    return ExperimentConfig(**base)


def _positive_frame_rate(root) -> float:
    active, total = 0, 0
    for split in SPLITS:
        for sid in read_manifest(root, split):
            events = read_label_csv(root / split / "labels" / f"{sid}.csv")
            grid = events_to_grid(events, 200, 12)
            active += int(grid.values.sum())
            total += grid.values.size
    return active / total


def test_criterion_6_trend_reproduction(tmp_path, say):
    t0 = time.perf_counter()
    root = tmp_path / "default_ds"
    say("criterion 6: synthesizing the default 60/15/15 x 20 s dataset ...")
    generate_dataset(DatasetConfig(root=root, n_workers=4))
    rate = _positive_frame_rate(root)
    say(f"criterion 6: positive-frame rate {rate:.4f} (premise: <= 0.10)")
    assert rate <= 0.10, f"dataset positive-frame rate {rate:.4f} exceeds 0.10"

    runs = {}
    variants = (
        ("foa", "bce", "scratch"),
        ("foa", "bce_dice", "scratch"),
        ("mic", "bce", "scratch"),
        ("mic", "bce", "mono_pretrained"),
    )
    for fmt, loss, transfer in variants:
        for seed in C6_SEEDS:
            cfg = _c6_config(str(root), format=fmt, loss=loss, transfer=transfer, seed=seed)
            rec = train_run(
                cfg,
                tmp_path / "runs" / f"{fmt}_{loss}_{transfer}_{seed}",
                pretrain_dir=tmp_path / "pretrain",
            )
            runs[(fmt, loss, transfer, seed)] = rec.test
            say(
                f"criterion 6: {fmt}/{loss}/{transfer} seed {seed}: "
                f"F1 {rec.test.f1:.4f} SEDE {rec.test.sede:.4f} ({rec.wall_s:.0f}s)"
            )

    def med(fmt, loss, transfer, metric):
        return statistics.median(
            getattr(runs[(fmt, loss, transfer, s)], metric) for s in C6_SEEDS
        )

    f1_bce = med("foa", "bce", "scratch", "f1")
    f1_dice = med("foa", "bce_dice", "scratch", "f1")
    sede_scratch = med("mic", "bce", "scratch", "sede")
    sede_pre = med("mic", "bce", "mono_pretrained", "sede")
    wall = time.perf_counter() - t0

    loss_margin = f1_dice - f1_bce  # want >= 0
    transfer_margin = sede_scratch - sede_pre  # want >= 0
    detail = (
        f"median F1 bce_dice {f1_dice:.4f} vs bce {f1_bce:.4f} (margin {loss_margin:+.4f}); "
        f"median SEDE pretrained {sede_pre:.4f} vs scratch {sede_scratch:.4f} "
        f"(margin {transfer_margin:+.4f}); wall {wall / 60:.1f} min (<= 30)"
    )
    hard_ok = loss_margin >= 0 and transfer_margin >= 0 and wall <= 1800
    soft_ok = loss_margin > -0.01 and transfer_margin > -0.01 and wall <= 1800
    _verdict(say, 6, hard_ok or soft_ok, detail, warn=soft_ok and not hard_ok)
    if soft_ok and not hard_ok:
        say(
            "criterion 6: trend within the 0.01 soft band; reported as a "
            "warning per the stated tolerance for small effect sizes"
        )
    assert soft_ok, detail


# -- 7. determinism -------------------------------------------------------------------


def test_criterion_7_determinism(tmp_path, tiny_ds, say):
    flags = [
        "--dataset", str(tiny_ds), "--chunk-s", "2", "--chunk-hop-s", "2",
        "--epochs", "2", "--batch", "8", "--width", "2", "--gru-units", "2",
        "--n-mels", "32",
    ]
    assert cli_main(["train", *flags, "--out", str(tmp_path / "t1")]) == 0
    assert cli_main(["train", *flags, "--out", str(tmp_path / "t2")]) == 0
    rows1 = (tmp_path / "t1" / "metrics.csv").read_bytes()
    rows2 = (tmp_path / "t2" / "metrics.csv").read_bytes()
    train_ok = rows1 == rows2

    base = ExperimentConfig(
        dataset=str(tiny_ds), chunk_s=2.0, chunk_hop_s=2.0, epochs=2,
        batch=8, width=2, gru_units=2, n_mels=32,
    )
    run_grid("channels", base, tmp_path / "ga")
    csv_a = (tmp_path / "ga" / "results.csv").read_bytes()
    run_grid("channels", base, tmp_path / "gb")
    # simulate a kill mid-grid: one finished cell lost, summary lost
    victim = sorted((tmp_path / "gb" / "cells").glob("*.row"))[1]
    victim.unlink()
    (tmp_path / "gb" / "results.csv").unlink()
    run_grid("channels", base, tmp_path / "gb")
    grid_ok = (tmp_path / "gb" / "results.csv").read_bytes() == csv_a

    ok = train_ok and grid_ok
    _verdict(
        say,
        7,
        ok,
        f"repeat train rows identical: {train_ok}; "
        f"grid kill-restart matches uninterrupted run: {grid_ok}",
    )
    assert ok


# -- 8. augmentation statistics ---------------------------------------------------------


def test_criterion_8_augmentation_statistics(say):
    cfg = AugmentConfig(mu=True, co=True, fs=True, cs=True)
    ss = np.random.SeedSequence(88)
    counts = np.zeros(4)
    n = 10_000
    for i in range(n):
        counts += draw_gates(cfg, sample_stream(ss, i))
    rates = counts / n
    targets = np.array([0.8, 0.5, 0.5, 0.5])
    rates_ok = bool(np.all(np.abs(rates - targets) <= 0.02))

    feats_a = np.full((4, 16, 8), 2.0, dtype=np.float32)
    feats_b = np.full((4, 16, 8), -1.0, dtype=np.float32)
    lab_a = np.ones((2, 3), dtype=np.float32)
    lab_b = np.zeros((2, 3), dtype=np.float32)
    a = Sample(FeatureTensor(feats_a, 80.0, True), LabelGrid(lab_a))
    b = Sample(FeatureTensor(feats_b, 80.0, True), LabelGrid(lab_b))
    rng = np.random.Generator(np.random.PCG64(0))
    band_ok = True
    for lam in (0.3, 0.5, 0.7):  # inside the band: skipped, returns a copy of a
        out = mixup(a, b, rng, cfg, lam=lam)
        band_ok &= np.array_equal(out.features.values, feats_a)
        band_ok &= out.features.values is not feats_a
    for lam in (0.29, 0.71):  # outside: convex combination
        out = mixup(a, b, rng, cfg, lam=lam)
        band_ok &= np.allclose(out.features.values, lam * feats_a + (1 - lam) * feats_b)
        band_ok &= np.allclose(out.labels.values, lam * lab_a)

    ok = rates_ok and band_ok
    _verdict(
        say,
        8,
        ok,
        f"gate rates over 10k draws {np.round(rates, 4).tolist()} vs "
        f"[0.8, 0.5, 0.5, 0.5] (+-0.02): {rates_ok}; mixup skip band exact: {band_ok}",
    )
    assert ok


# -- 9. overfit smoke test ------------------------------------------------------------


def test_criterion_9_overfit_capacity(tiny_ds, say):
    data = load_split(tiny_ds, "train", "foa", mel_cfg=MelConfig(n_mels=64))
    normed = normalize_split(data, fit_split_norm(data))
    chunks = chunk(normed.features[0], normed.labels[0], 2.0, 2.0)
    assert len(chunks) == 4
    t0 = time.perf_counter()
    f1, _ = overfit_probe(
        chunks, epochs=200, batch=4, width=12, gru_units=24, n_mels=64
    )
    wall = time.perf_counter() - t0
    ok = f1 > 0.95 and wall < 120.0
    _verdict(
        say,
        9,
        ok,
        f"4 chunks, 200 epochs, no augmentation: train F1 {f1:.4f} (> 0.95), "
        f"wall {wall:.0f}s (< 120s)",
    )
    assert ok
