"""Segment-based SED evaluation: error rate, F1, and their combination.

Frames are pooled into 1 s segments (10 frames at the 100 ms hop; the
final partial segment is kept). Per segment the class-wise activity is
"any active frame", and substitutions/deletions/insertions follow the
standard segment-based ER bookkeeping. Counts aggregate by summation, so
reports from independent clips merge exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

BINARIZE_THRESHOLD = 0.3
FRAMES_PER_SEGMENT = 10


def binarize(pred: np.ndarray, threshold: float = BINARIZE_THRESHOLD) -> np.ndarray:
    """1.0 where pred > threshold (strict), else 0.0."""
    return (np.asarray(pred) > threshold).astype(np.float32)


@dataclass
class MetricsReport:
    sum_n: int = 0
    sum_s: int = 0
    sum_d: int = 0
    sum_i: int = 0
    sum_tp: int = 0
    sum_fp: int = 0
    sum_fn: int = 0

    @property
    def er(self) -> float:
        if self.sum_n == 0:
            # no reference activity: only insertions can be charged
            return float(self.sum_i)
        return (self.sum_s + self.sum_d + self.sum_i) / self.sum_n

    @property
    def f1(self) -> float:
        if self.sum_tp == 0:
            return 0.0
        return 2.0 * self.sum_tp / (2.0 * self.sum_tp + self.sum_fp + self.sum_fn)

    @property
    def sede(self) -> float:
        return sede(self.er, self.f1)

    def __add__(self, other: "MetricsReport") -> "MetricsReport":
        return MetricsReport(
            *(getattr(self, f.name) + getattr(other, f.name) for f in fields(self))
        )

    def csv_row(self) -> str:
        return (
            f"{self.er:.6f},{self.f1:.6f},{self.sede:.6f},"
            f"{self.sum_n},{self.sum_s},{self.sum_d},{self.sum_i},"
            f"{self.sum_tp},{self.sum_fp},{self.sum_fn}"
        )

    CSV_HEADER = "er,f1,sede,sumN,sumS,sumD,sumI,sumTP,sumFP,sumFN"

    def text_block(self) -> str:
        return (
            f"segment-based metrics (1 s segments)\n"
            f"  ER   {self.er:.6f}   (S={self.sum_s} D={self.sum_d} "
            f"I={self.sum_i} N={self.sum_n})\n"
            f"  F1   {self.f1:.6f}   (TP={self.sum_tp} FP={self.sum_fp} "
            f"FN={self.sum_fn})\n"
            f"  SEDE {self.sede:.6f}\n"
        )


def segment_metrics(
    pred: np.ndarray,
    ref: np.ndarray,
    frames_per_segment: int = FRAMES_PER_SEGMENT,
) -> MetricsReport:
    """Count-level report for one clip; pred/ref are binary T x L grids."""
    pred = np.asarray(pred)
    ref = np.asarray(ref)
    if pred.shape != ref.shape or pred.ndim != 2:
        raise ValueError(f"need equal T x L shapes, got {pred.shape} vs {ref.shape}")
    rep = MetricsReport()
    t = pred.shape[0]
    for start in range(0, t, frames_per_segment):
        p = pred[start : start + frames_per_segment].any(axis=0)
        r = ref[start : start + frames_per_segment].any(axis=0)
        tp = int(np.sum(p & r))
        fp = int(np.sum(p & ~r))
        fn = int(np.sum(~p & r))
        rep.sum_tp += tp
        rep.sum_fp += fp
        rep.sum_fn += fn
        rep.sum_n += int(np.sum(r))
        rep.sum_s += min(fn, fp)
        rep.sum_d += max(0, fn - fp)
        rep.sum_i += max(0, fp - fn)
    return rep


def sede(er: float, f1: float) -> float:
    """0.5*ER + 0.5*(1 - F1); lower is better."""
    return 0.5 * er + 0.5 * (1.0 - f1)
