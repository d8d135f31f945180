"""End-to-end runs of the command-line entry point."""

import json

import pandas as pd
import pytest

from autoansatz.automl import optimize_objective
from autoansatz.main import main
from autoansatz.models import SearchSpace
from autoansatz.trial_store import TrialStore, replay


@pytest.fixture
def store_path(tmp_path):
    path = tmp_path / "trials.jsonl"
    store = TrialStore.open(path)
    for record in optimize_objective(lambda c: c.L * 0.1 + c.n * 0.01, SearchSpace(), 25, seed=2):
        store.append(record)
    return path


def _json_out(capsys):
    return json.loads(capsys.readouterr().out)


class TestGenData:
    def test_writes_requested_rows(self, tmp_path):
        out = tmp_path / "data.csv"
        assert main(["gen-data", "--out", str(out), "--per-class", "2", "--seed", "4"]) == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("# seed=4")
        assert len(lines) == 2 + 2 * 8 * 7

    def test_reruns_are_byte_identical(self, tmp_path):
        for name in ("a.csv", "b.csv"):
            assert main(["gen-data", "--out", str(tmp_path / name), "--per-class", "2"]) == 0
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_missing_out_is_usage_error(self):
        assert main(["gen-data"]) == 2

    def test_out_of_range_value_is_usage_error(self, tmp_path):
        assert main(["gen-data", "--out", str(tmp_path / "data.csv"), "--per-class", "0"]) == 2
        assert not (tmp_path / "data.csv").exists()

    def test_unwritable_out_is_io_error(self, tmp_path):
        assert main(["gen-data", "--out", str(tmp_path / "missing" / "data.csv"), "--per-class", "1"]) == 1


class TestTrain:
    def test_baseline_counts(self, small_csv, capsys):
        assert main(["train", "--data", str(small_csv), "--epochs", "0"]) == 0
        summary = _json_out(capsys)
        assert summary["variational_params"] == 18
        assert summary["trainable_params"] == 476
        assert summary["epochs"] == 0
        assert 0.0 <= summary["test_acc"] <= 1.0

    def test_mps_three_layers(self, small_csv, capsys):
        assert main(["train", "--data", str(small_csv), "--ansatz", "mps", "--layers", "3", "--epochs", "0"]) == 0
        assert _json_out(capsys)["variational_params"] == 54

    def test_one_epoch_writes_outputs(self, tmp_path, small_csv, capsys):
        checkpoint, metrics = tmp_path / "model.json", tmp_path / "history.csv"
        argv = ["train", "--data", str(small_csv), "--qubits", "5", "--epochs", "1", "--batch-size", "32"]
        assert main([*argv, "--checkpoint", str(checkpoint), "--metrics", str(metrics)]) == 0
        assert _json_out(capsys)["epochs"] == 1
        assert checkpoint.exists()
        assert len(pd.read_csv(metrics)) == 1

    def test_qubit_bounds(self, small_csv):
        assert main(["train", "--data", str(small_csv), "--qubits", "4"]) == 2
        assert main(["train", "--data", str(small_csv), "--qubits", "21"]) == 2
        assert main(["train", "--data", str(small_csv), "--qubits", "1", "--allow-small"]) == 2

    def test_allow_small(self, small_csv, capsys):
        assert main(["train", "--data", str(small_csv), "--qubits", "3", "--allow-small", "--epochs", "0"]) == 0
        assert _json_out(capsys)["variational_params"] == 4

    def test_unknown_ansatz(self, small_csv):
        assert main(["train", "--data", str(small_csv), "--ansatz", "hea"]) == 2

    def test_out_of_range_values_are_usage_errors(self, small_csv):
        assert main(["train", "--data", str(small_csv), "--layers", "0"]) == 2
        assert main(["train", "--data", str(small_csv), "--lr", "-1"]) == 2

    def test_missing_data_file(self, tmp_path):
        assert main(["train", "--data", str(tmp_path / "absent.csv"), "--epochs", "0"]) == 1


class TestSearch:
    def test_single_trial(self, tmp_path, small_csv, capsys):
        store = tmp_path / "search.jsonl"
        argv = ["search", "--data", str(small_csv), "--trials", "1", "--store", str(store), "--max-epochs", "1"]
        assert main(argv) == 0
        summary = _json_out(capsys)
        assert summary["trials"] == 1
        assert [record.id for record in replay(store)] == [0]

    def test_trials_required(self, tmp_path, small_csv):
        assert main(["search", "--data", str(small_csv), "--store", str(tmp_path / "s.jsonl")]) == 2

    def test_nonpositive_trials_is_usage_error(self, tmp_path, small_csv):
        store = tmp_path / "s.jsonl"
        assert main(["search", "--data", str(small_csv), "--trials", "0", "--store", str(store)]) == 2
        assert not store.exists()


class TestReport:
    def test_slice_to_stdout(self, store_path, capsys):
        assert main(["report", "--store", str(store_path), "--kind", "slice", "--param", "n"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "n,objective,trial_id,pruned"
        assert len(lines) == 26

    def test_slice_needs_param(self, store_path):
        assert main(["report", "--store", str(store_path), "--kind", "slice"]) == 2

    def test_contour_to_file(self, tmp_path, store_path):
        out = tmp_path / "contour.csv"
        argv = ["report", "--store", str(store_path), "--kind", "contour", "--params", "n", "L"]
        assert main([*argv, "--resolution", "4", "--out", str(out)]) == 0
        assert len(pd.read_csv(out)) == 16

    def test_importance(self, store_path, capsys):
        assert main(["report", "--store", str(store_path), "--kind", "importance"]) == 0
        report = _json_out(capsys)
        assert report["n_trials"] == 25
        assert sum(report["scores"].values()) + report["residual"] == pytest.approx(1.0)

    def test_importance_with_too_few_trials(self, tmp_path):
        path = tmp_path / "few.jsonl"
        store = TrialStore.open(path)
        for record in optimize_objective(lambda c: c.n, SearchSpace(), 5):
            store.append(record)
        assert main(["report", "--store", str(path), "--kind", "importance"]) == 1

    def test_unknown_kind(self, store_path):
        assert main(["report", "--store", str(store_path), "--kind", "pie"]) == 2

    def test_missing_store(self, tmp_path):
        assert main(["report", "--store", str(tmp_path / "absent.jsonl"), "--kind", "scatter"]) == 1


class TestBaselines:
    def test_table(self, tmp_path, small_csv):
        out = tmp_path / "baselines.csv"
        assert main(["baselines", "--data", str(small_csv), "--epochs", "1", "--out", str(out)]) == 0
        frame = pd.read_csv(out)
        assert frame["method"].tolist() == ["mlp", "knn", "gnb"]
        assert frame["test_acc"].between(0.0, 1.0).all()

    def test_learning_curve(self, small_csv, capsys):
        assert main(["baselines", "--data", str(small_csv), "--epochs", "1", "--sizes", "8", "16", "--k", "3"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "method,n_train,test_acc"
        assert len(lines) == 1 + 2 * 3
