"""Frame-level activity grids and the event-list CSV format.

A label grid holds one row per 100 ms frame and one column per class.
Targets are binary; predictions and mixup targets live in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

FRAME_HOP_S = 0.1
FRAME_HOP_MS = 100

CSV_HEADER = "onset_s,offset_s,class_id"


@dataclass
class LabelGrid:
    """T_lab x L activity matrix at 100 ms frame resolution."""

    values: np.ndarray
    frame_hop: float = FRAME_HOP_S

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float32)
        if self.values.ndim != 2:
            raise ValueError(f"label grid must be 2-D, got shape {self.values.shape}")
        if np.any(self.values < 0) or np.any(self.values > 1):
            raise ValueError("label values must lie in [0, 1]")

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    @property
    def n_classes(self) -> int:
        return self.values.shape[1]

    def copy(self) -> "LabelGrid":
        return LabelGrid(self.values.copy(), self.frame_hop)


def events_to_grid(events, n_frames: int, n_classes: int) -> LabelGrid:
    """Rasterize (onset_s, offset_s, class_id) triples onto the 100 ms grid.

    Frame k covers [k, k+1) * 100 ms; a frame is active for a class if the
    event interval [onset, offset) overlaps it. Times are compared in whole
    milliseconds so that 3-decimal CSV values round-trip exactly.
    """
    grid = np.zeros((n_frames, n_classes), dtype=np.float32)
    for onset_s, offset_s, class_id in events:
        if not (0 <= class_id < n_classes):
            raise ValueError(f"class_id {class_id} outside [0, {n_classes})")
        onset_ms = int(round(onset_s * 1000))
        offset_ms = int(round(offset_s * 1000))
        if offset_ms <= onset_ms:
            continue
        first = max(0, onset_ms // FRAME_HOP_MS)
        # last frame whose start lies strictly before the offset
        last = min(n_frames, -(-offset_ms // FRAME_HOP_MS))
        grid[first:last, class_id] = 1.0
    return LabelGrid(grid)


def write_label_csv(path, events) -> None:
    """Write events as `onset_s,offset_s,class_id` rows, 3 decimals, LF."""
    lines = [CSV_HEADER]
    for onset_s, offset_s, class_id in events:
        lines.append(f"{onset_s:.3f},{offset_s:.3f},{int(class_id)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_label_csv(path):
    """Parse a label CSV back to (onset_s, offset_s, class_id) triples."""
    events = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"unexpected label CSV header: {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            onset_s, offset_s, class_id = line.split(",")
            events.append((float(onset_s), float(offset_s), int(class_id)))
    return events
