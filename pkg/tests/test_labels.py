"""Label grids and the event CSV format."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sedlab.labels import LabelGrid, events_to_grid, read_label_csv, write_label_csv


def test_grid_shape_and_validation():
    g = LabelGrid(np.zeros((5, 3)))
    assert g.n_frames == 5 and g.n_classes == 3
    with pytest.raises(ValueError):
        LabelGrid(np.zeros(5))
    with pytest.raises(ValueError):
        LabelGrid(np.full((2, 2), 1.5))
    with pytest.raises(ValueError):
        LabelGrid(np.full((2, 2), -0.1))


def test_events_to_grid_frame_coverage():
    # frame k covers [k, k+1) * 100 ms; [0.15, 0.35) touches frames 1..3
    g = events_to_grid([(0.15, 0.35, 0)], n_frames=5, n_classes=2).values
    assert g[:, 0].tolist() == [0, 1, 1, 1, 0]
    # an event ending exactly on a boundary does not touch the next frame
    g = events_to_grid([(0.1, 0.3, 1)], n_frames=5, n_classes=2).values
    assert g[:, 1].tolist() == [0, 1, 1, 0, 0]


def test_events_to_grid_clips_and_rejects():
    g = events_to_grid([(0.35, 9.0, 0)], n_frames=5, n_classes=1).values
    assert g[:, 0].tolist() == [0, 0, 0, 1, 1]
    with pytest.raises(ValueError):
        events_to_grid([(0.0, 1.0, 3)], n_frames=5, n_classes=2)
    # zero-length after ms rounding: ignored
    g = events_to_grid([(0.2, 0.2, 0)], n_frames=5, n_classes=1).values
    assert not g.any()


def test_label_csv_round_trip(tmp_path):
    events = [(0.0, 1.234, 0), (3.481, 7.2, 11), (0.001, 0.002, 5)]
    path = tmp_path / "labels.csv"
    write_label_csv(path, events)
    text = path.read_text()
    assert text.startswith("onset_s,offset_s,class_id\n")
    assert "\r" not in text
    assert read_label_csv(path) == events


def test_label_csv_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("onset,offset,class\n0.0,1.0,0\n")
    with pytest.raises(ValueError):
        read_label_csv(path)


@settings(max_examples=50, deadline=None)
@given(
    st.lists(
        st.tuples(
            st.integers(0, 4800),  # onset in ms
            st.integers(1, 3000),  # duration in ms
            st.integers(0, 3),
        ),
        max_size=6,
    )
)
def test_grid_survives_csv_round_trip(tmp_path_factory, raw):
    """Writing 3-decimal CSV and re-reading reproduces the same grid."""
    events = [(on / 1000.0, (on + dur) / 1000.0, cid) for on, dur, cid in raw]
    path = tmp_path_factory.mktemp("rt") / "e.csv"
    write_label_csv(path, events)
    direct = events_to_grid(events, n_frames=80, n_classes=4).values
    reread = events_to_grid(read_label_csv(path), n_frames=80, n_classes=4).values
    assert np.array_equal(direct, reread)
