#!/usr/bin/env python

"""Pytest configuration and fixtures for autoansatz tests."""

from pathlib import Path
from typing import List, Optional

import numpy as np
import pytest

from autoansatz.data import Dataset, generate_synthetic, save_csv
from autoansatz.models import SynthConfig, TrialConfig, TrialRecord, TrialStatus

# Small enough for the whole suite to run in seconds
SMALL_SYNTH = SynthConfig(per_class=3, separation=3.0, noise=0.5, session_shift=0.2, seed=11)


def make_trial(
    trial_id: int,
    epochs: List[float],
    status: TrialStatus = TrialStatus.COMPLETED,
    embedding: str = "angle",
    variational: str = "s2d",
    n: int = 5,
    L: int = 1,
    lr0: float = 0.01,
    test_acc: Optional[float] = None,
    param_count: int = 0,
) -> TrialRecord:
    """A trial record as the search would append it, for pruner, sampler and analysis tests."""
    final = {}
    if status == TrialStatus.COMPLETED and epochs:
        final = {"val_loss": epochs[-1], "val_acc": 0.5, "test_acc": test_acc}
    return TrialRecord(
        id=trial_id,
        config=TrialConfig(embedding=embedding, variational=variational, n=n, L=L, lr0=lr0),
        seed=trial_id,
        epochs=epochs,
        status=status,
        final=final,
        param_count=param_count,
    )


def pytest_configure(config):
    """Configure pytest with custom markers."""
    config.addinivalue_line("markers", "integration: mark test as a desk-scale end-to-end test")
    config.addinivalue_line("markers", "slow: mark test as slow running")


def pytest_collection_modifyitems(config, items):
    """Skip integration tests unless --run-integration is given."""
    if config.getoption("--run-integration", default=False):
        return
    skip_integration = pytest.mark.skip(reason="needs --run-integration")
    for item in items:
        if "integration" in item.keywords:
            item.add_marker(skip_integration)


def pytest_addoption(parser):
    """Add custom command line options."""
    parser.addoption(
        "--run-integration",
        action="store_true",
        default=False,
        help="Run integration tests (they are skipped by default)",
    )


@pytest.fixture
def small_dataset() -> Dataset:
    """Seven sessions, three rows per class per session."""
    return generate_synthetic(SMALL_SYNTH)


@pytest.fixture
def small_csv(tmp_path: Path, small_dataset: Dataset) -> Path:
    path = tmp_path / "small.csv"
    save_csv(small_dataset, path, metadata=SMALL_SYNTH.model_dump())
    return path


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
