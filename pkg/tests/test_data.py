"""Synthetic generation, CSV format and splits."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from autoansatz.data import (
    CSV_COLUMNS,
    Dataset,
    Standardizer,
    generate_synthetic,
    load_csv,
    save_csv,
    split_by_session,
    split_random,
    subsample,
)
from autoansatz.models import N_CLASSES, N_FEATURES, SynthConfig


class TestGenerate:
    def test_default_shape(self):
        dataset = generate_synthetic(SynthConfig())
        assert len(dataset) == 11200
        assert dataset.features.shape == (11200, N_FEATURES)
        assert np.bincount(dataset.labels).tolist() == [1400] * N_CLASSES

    def test_session_major_order(self, small_dataset):
        assert small_dataset.sessions.tolist() == sorted(small_dataset.sessions.tolist())
        assert small_dataset.labels[:6].tolist() == [0, 0, 0, 1, 1, 1]

    def test_seeded(self):
        a = generate_synthetic(SynthConfig(per_class=2, seed=5))
        b = generate_synthetic(SynthConfig(per_class=2, seed=5))
        c = generate_synthetic(SynthConfig(per_class=2, seed=6))
        assert np.array_equal(a.features, b.features)
        assert not np.array_equal(a.features, c.features)


class TestDataset:
    def test_rejects_wrong_width(self):
        with pytest.raises(ValueError, match="shape"):
            Dataset(np.zeros((2, 5)), np.zeros(2), np.zeros(2))

    def test_rejects_out_of_range_labels(self):
        with pytest.raises(ValueError, match="labels"):
            Dataset(np.zeros((1, N_FEATURES)), np.array([8]), np.array([0]))
        with pytest.raises(ValueError, match="sessions"):
            Dataset(np.zeros((1, N_FEATURES)), np.array([0]), np.array([7]))


class TestCsv:
    def test_round_trip(self, small_csv, small_dataset):
        loaded = load_csv(small_csv)
        assert_allclose(loaded.features, small_dataset.features, rtol=1e-12)
        assert np.array_equal(loaded.labels, small_dataset.labels)
        assert np.array_equal(loaded.sessions, small_dataset.sessions)

    def test_metadata_comment_then_header(self, small_csv):
        lines = small_csv.read_text().splitlines()
        assert lines[0].startswith("# seed=11")
        assert lines[1] == ",".join(CSV_COLUMNS)

    def test_identical_bytes_on_rewrite(self, tmp_path, small_dataset):
        save_csv(small_dataset, tmp_path / "a.csv", metadata={"seed": 11})
        save_csv(small_dataset, tmp_path / "b.csv", metadata={"seed": 11})
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def _corrupt(self, path, index, replacement):
        lines = path.read_text().splitlines()
        lines[index] = replacement(lines[index])
        path.write_text("\n".join(lines) + "\n")

    def test_bad_header_names_line(self, small_csv):
        self._corrupt(small_csv, 1, lambda line: line.replace("session", "day"))
        with pytest.raises(ValueError, match="line 2"):
            load_csv(small_csv)

    def test_non_numeric_cell_names_line(self, small_csv):
        self._corrupt(small_csv, 3, lambda line: "x" + line[1:])
        with pytest.raises(ValueError, match="line 4: non-numeric"):
            load_csv(small_csv)

    def test_short_row_names_line(self, small_csv):
        self._corrupt(small_csv, 2, lambda line: ",".join(line.split(",")[:5]))
        with pytest.raises(ValueError, match="line 3"):
            load_csv(small_csv)

    def test_long_row_rejected(self, small_csv):
        self._corrupt(small_csv, 5, lambda line: line + ",1.0")
        with pytest.raises(ValueError, match="column count"):
            load_csv(small_csv)

    def test_non_finite_value(self, small_csv):
        self._corrupt(small_csv, 4, lambda line: line.rsplit(",", 1)[0] + ",inf")
        with pytest.raises(ValueError, match="line 5: non-finite"):
            load_csv(small_csv)

    def test_label_out_of_range(self, small_csv):
        self._corrupt(small_csv, 6, lambda line: "9" + line[1:])
        with pytest.raises(ValueError, match="line 7: label 9 outside"):
            load_csv(small_csv)

    def test_blank_line_is_column_count_error(self, small_csv):
        self._corrupt(small_csv, 3, lambda line: "")
        with pytest.raises(ValueError, match="line 4: expected 38 columns"):
            load_csv(small_csv)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_csv(tmp_path / "absent.csv")


class TestSplits:
    def test_by_session(self, small_dataset):
        train, test = split_by_session(small_dataset)
        assert set(train.sessions.tolist()) == {0, 1, 2, 3}
        assert set(test.sessions.tolist()) == {4, 5, 6}
        assert len(train) + len(test) == len(small_dataset)

    def test_by_session_needs_every_session(self, small_dataset):
        partial = small_dataset.take(np.flatnonzero(small_dataset.sessions < 6))
        with pytest.raises(ValueError, match="missing sessions"):
            split_by_session(partial)

    def test_random_split(self, small_dataset):
        train, test = split_random(small_dataset, 0.25, seed=3)
        assert len(test) == round(0.25 * len(small_dataset))
        assert len(train) + len(test) == len(small_dataset)
        again, _ = split_random(small_dataset, 0.25, seed=3)
        assert np.array_equal(train.features, again.features)

    def test_random_split_bounds(self, small_dataset):
        with pytest.raises(ValueError):
            split_random(small_dataset, 1.0)

    def test_subsample_is_class_balanced(self, small_dataset):
        subset = subsample(small_dataset, 16, seed=2)
        assert np.bincount(subset.labels, minlength=N_CLASSES).tolist() == [2] * N_CLASSES
        with pytest.raises(ValueError):
            subsample(small_dataset, len(small_dataset) + 1)


class TestStandardizer:
    def test_fit_and_transform(self, rng):
        features = rng.normal(3.0, 2.0, size=(200, N_FEATURES))
        features[:, 0] = 7.0
        scaler = Standardizer.fit(features)
        z = scaler.transform(features)
        assert_allclose(z[:, 1:].mean(axis=0), 0.0, atol=1e-12)
        assert_allclose(z[:, 1:].std(axis=0), 1.0)
        assert scaler.scale[0] == 1.0
        assert np.all(z[:, 0] == 0.0)

    def test_empty_fit_rejected(self):
        with pytest.raises(ValueError):
            Standardizer.fit(np.zeros((0, N_FEATURES)))
