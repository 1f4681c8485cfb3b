"""Training runs: epoch loop, checkpoint selection, transfer pretraining.

A run fits norm stats on the train split, chunks it, and trains for the
configured epochs with the log-linear LR ramp. After every epoch the
validation split is scored (threshold 0.3, 1 s segments) and the model
minimizing validation SEDE is kept; ties go to the earlier epoch. Test
metrics are computed exactly once, from that best checkpoint.
"""

from __future__ import annotations

import dataclasses
import logging
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..augment import AugmentConfig, apply_pipeline
from ..features import MelConfig, save_norm_stats
from ..losses import LossConfig, compute_loss
from ..metrics import MetricsReport, binarize, segment_metrics
from ..nn import Adam, Crnn, CrnnConfig, lr_schedule, replicate_first_layer
from ..nn.checkpoint import load_checkpoint, restore_model, save_checkpoint
from .config import DataError, ExperimentConfig, NumericError
from .data import SplitData, chunk, eval_windows, fit_split_norm, load_split, normalize_split

logger = logging.getLogger(__name__)

EVAL_BATCH = 32


@dataclass
class RunRecord:
    config_hash: str
    best_epoch: int
    train_loss: list
    val_sede: list
    test: MetricsReport
    wall_s: float
    ckpt_path: str = ""
    train_report: MetricsReport | None = None


def model_config(cfg: ExperimentConfig) -> CrnnConfig:
    w = cfg.width
    return CrnnConfig(
        conv_blocks=((w, 2, 2), (2 * w, 2, 2), (4 * w, 1, 2)),
        gru_units=cfg.gru_units,
        n_classes=cfg.n_classes,
        input_channels=1 if cfg.channels == "mono" else 4,
        n_mels=cfg.n_mels,
        use_bn=cfg.use_bn,
        seed=cfg.seed,
    )


def effective_aug_config(cfg: ExperimentConfig) -> AugmentConfig:
    # channel swap needs 4 channels; it is a no-op concept for mono input
    cs = cfg.cs and cfg.channels != "mono"
    return AugmentConfig(mu=cfg.mu, co=cfg.co, fs=cfg.fs, cs=cs, seed=cfg.seed)


def progress_at(epoch: int, total: int) -> float:
    """Schedule position: first epoch 0.0, last epoch 1.0."""
    if total <= 1:
        return 0.0
    return epoch / (total - 1)


def load_splits(cfg: ExperimentConfig):
    """Load all three splits, fit norm on train, normalize everything."""
    mel_cfg = MelConfig(n_mels=cfg.n_mels)
    splits = {}
    for name in ("train", "val", "test"):
        splits[name] = load_split(
            cfg.dataset, name, cfg.format, cfg.channels, cfg.n_classes, mel_cfg=mel_cfg
        )
    if not splits["train"].features:
        raise DataError("training split is empty")
    stats = fit_split_norm(splits["train"])
    return {k: normalize_split(v, stats) for k, v in splits.items()}, stats


def evaluate_split(model: Crnn, data: SplitData, chunk_s: float) -> MetricsReport:
    """Segment metrics over full recordings via non-overlapping windows."""
    report = MetricsReport()
    for feats, labels in zip(data.features, data.labels):
        blocks, keeps = [], []
        for block, keep in eval_windows(feats, labels, chunk_s):
            blocks.append(block)
            keeps.append(keep)
        preds = []
        for start in range(0, len(blocks), EVAL_BATCH):
            x = np.stack(blocks[start : start + EVAL_BATCH])
            preds.extend(model.predict(x))
        pred = np.concatenate([p[:keep] for p, keep in zip(preds, keeps)])
        report += segment_metrics(binarize(pred) > 0, labels.values > 0.5)
    return report


def _train_epoch(
    model: Crnn,
    adam: Adam,
    chunks: list,
    cfg: ExperimentConfig,
    aug_cfg: AugmentConfig,
    loss_cfg: LossConfig,
    epoch: int,
    lr: float,
) -> float:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([cfg.seed, 0xE90C, epoch])))
    order = rng.permutation(len(chunks))
    losses = []
    augment_on = any(aug_cfg.flags)
    n_batches = len(chunks) // cfg.batch  # incomplete trailing batch dropped
    if n_batches == 0:
        raise DataError(
            f"not enough chunks ({len(chunks)}) for one batch of {cfg.batch}"
        )
    for b in range(n_batches):
        idx = order[b * cfg.batch : (b + 1) * cfg.batch]
        batch = [chunks[i] for i in idx]
        if augment_on:
            batch = apply_pipeline(
                batch, aug_cfg, np.random.SeedSequence([cfg.seed, 0xA06, epoch, b])
            )
        x = np.stack([s.features.values for s in batch])
        y = np.stack([s.labels.values for s in batch])
        model.zero_grad()
        pred = model.forward(x)
        loss, grad = compute_loss(loss_cfg, pred, y)
        if not np.isfinite(loss):
            raise NumericError(f"non-finite loss {loss} at epoch {epoch} batch {b} (lr={lr:g})")
        model.backward(grad)
        if not adam.step(lr):
            logger.warning("skipped batch %d of epoch %d: non-finite gradient", b, epoch)
        losses.append(loss)
    return float(np.mean(losses))


def _pretrained_first_conv(cfg: ExperimentConfig, out_dir: Path, pretrain_dir: Path | None):
    """Train (or reuse) the mono variant and return its parameter blobs."""
    pre_cfg = dataclasses.replace(cfg, channels="mono", transfer="scratch", cs=False)
    pre_dir = Path(pretrain_dir) if pretrain_dir else Path(out_dir) / "pretrain"
    pre_dir.mkdir(parents=True, exist_ok=True)
    ckpt = pre_dir / f"pre_{pre_cfg.config_hash()}.ckpt"
    if not ckpt.exists():
        logger.info("pretraining mono model for transfer -> %s", ckpt.name)
        record = train_run(pre_cfg, pre_dir / f"run_{pre_cfg.config_hash()}")
        Path(record.ckpt_path).replace(ckpt)
    return load_checkpoint(ckpt)


def _install_transfer(model: Crnn, pre: dict) -> None:
    params = model.parameters()
    first = "block0.conv.weight"
    for name, p in params.items():
        if name == first:
            p.value[...] = replicate_first_layer(
                pre["blobs"][name], p.value.shape[1]
            ).astype(p.value.dtype)
        elif name in pre["blobs"]:
            blob = pre["blobs"][name]
            if blob.shape == p.value.shape:
                p.value[...] = blob.astype(p.value.dtype)


def train_run(
    cfg: ExperimentConfig,
    out_dir: Path,
    pretrain_dir: Path | None = None,
    eval_train: bool = False,
) -> RunRecord:
    t0 = time.perf_counter()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg.write_lock(out_dir)

    splits, stats = load_splits(cfg)
    save_norm_stats(out_dir / "norm.bin", stats)

    train_chunks = []
    for feats, labels in zip(splits["train"].features, splits["train"].labels):
        train_chunks.extend(chunk(feats, labels, cfg.chunk_s, cfg.chunk_hop_s))

    model = Crnn(model_config(cfg))
    if cfg.transfer == "mono_pretrained":
        _install_transfer(model, _pretrained_first_conv(cfg, out_dir, pretrain_dir))
    adam = Adam(model.parameters())
    aug_cfg = effective_aug_config(cfg)
    loss_cfg = LossConfig(kind=cfg.loss)
    cfg_hash = cfg.config_hash()
    ckpt_path = out_dir / "best.ckpt"

    train_loss, val_sede = [], []
    best = (float("inf"), -1)
    for epoch in range(cfg.epochs):
        lr = lr_schedule(progress_at(epoch, cfg.epochs))
        train_loss.append(
            _train_epoch(model, adam, train_chunks, cfg, aug_cfg, loss_cfg, epoch, lr)
        )
        report = evaluate_split(model, splits["val"], cfg.chunk_s)
        val_sede.append(report.sede)
        if report.sede < best[0]:
            best = (report.sede, epoch)
            save_checkpoint(ckpt_path, model.parameters(), adam.t, cfg_hash, "norm.bin")
        logger.info(
            "epoch %d/%d loss %.4f val SEDE %.4f lr %.2e",
            epoch + 1,
            cfg.epochs,
            train_loss[-1],
            report.sede,
            lr,
        )

    restore_model(model, load_checkpoint(ckpt_path))
    test_report = evaluate_split(model, splits["test"], cfg.chunk_s)
    record = RunRecord(
        config_hash=cfg_hash,
        best_epoch=best[1],
        train_loss=train_loss,
        val_sede=val_sede,
        test=test_report,
        wall_s=time.perf_counter() - t0,
        ckpt_path=str(ckpt_path),
    )
    if eval_train:
        record.train_report = evaluate_split(model, splits["train"], cfg.chunk_s)
    return record


def overfit_probe(
    chunks: list,
    epochs: int = 200,
    batch: int = 4,
    seed: int = 0,
    loss_kind: str = "bce",
    n_classes: int = 12,
    n_mels: int = 128,
    gru_units: int = 32,
    width: int = 16,
) -> tuple:
    """Capacity smoke test: fit a fresh model to the given chunks only.

    Returns (train F1 on those chunks, per-epoch losses). No validation,
    no checkpointing, no augmentation.
    """
    n_ch = chunks[0].features.n_channels
    model = Crnn(
        CrnnConfig(
            conv_blocks=((width, 2, 2), (2 * width, 2, 2), (4 * width, 1, 2)),
            gru_units=gru_units,
            n_classes=n_classes,
            input_channels=n_ch,
            n_mels=n_mels,
            seed=seed,
        )
    )
    adam = Adam(model.parameters())
    loss_cfg = LossConfig(kind=loss_kind)
    x = np.stack([s.features.values for s in chunks])
    y = np.stack([s.labels.values for s in chunks])
    losses = []
    rng = np.random.Generator(np.random.PCG64(seed))
    for epoch in range(epochs):
        lr = lr_schedule(progress_at(epoch, epochs))
        order = rng.permutation(len(chunks))
        for start in range(0, len(chunks), batch):
            idx = order[start : start + batch]
            if len(idx) < min(batch, len(chunks)):
                continue
            model.zero_grad()
            pred = model.forward(x[idx])
            loss, grad = compute_loss(loss_cfg, pred, y[idx])
            if not np.isfinite(loss):
                raise NumericError(f"non-finite loss {loss} at epoch {epoch}")
            model.backward(grad)
            adam.step(lr)
            losses.append(loss)
    pred = model.predict(x)
    report = MetricsReport()
    for i in range(len(chunks)):
        report += segment_metrics(binarize(pred[i]) > 0, y[i] > 0.5)
    return report.f1, losses
