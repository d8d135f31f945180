"""Beam-SNR-like datasets: synthetic generation, CSV round trip and splits."""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np
import pandas as pd

from .models import N_CLASSES, N_FEATURES, N_SESSIONS, TRAIN_SESSIONS, SynthConfig

logger = logging.getLogger(__name__)

FEATURE_COLUMNS = [f"f{i}" for i in range(N_FEATURES)]
CSV_COLUMNS = ["label", "session", *FEATURE_COLUMNS]


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    sessions: np.ndarray

    def __post_init__(self) -> None:
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        sessions = np.asarray(self.sessions, dtype=np.int64)
        if features.ndim != 2 or features.shape[1] != N_FEATURES:
            raise ValueError(f"features must have shape (rows, {N_FEATURES}), got {features.shape}")
        if labels.shape != (len(features),) or sessions.shape != (len(features),):
            raise ValueError("labels and sessions must have one entry per row")
        if len(labels) and (labels.min() < 0 or labels.max() >= N_CLASSES):
            raise ValueError(f"labels must lie in [0, {N_CLASSES})")
        if len(sessions) and (sessions.min() < 0 or sessions.max() >= N_SESSIONS):
            raise ValueError(f"sessions must lie in [0, {N_SESSIONS})")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "sessions", sessions)

    def __len__(self) -> int:
        return len(self.labels)

    def take(self, indices: np.ndarray) -> "Dataset":
        return Dataset(self.features[indices], self.labels[indices], self.sessions[indices])


def generate_synthetic(config: SynthConfig) -> Dataset:
    """Gaussian class prototypes plus a per-session offset plus per-sample noise.

    Rows are ordered session-major, then class, then sample.
    """
    rng = np.random.default_rng(config.seed)
    prototypes = rng.normal(0.0, config.separation, size=(N_CLASSES, N_FEATURES))
    offsets = rng.normal(0.0, config.session_shift, size=(N_SESSIONS, N_FEATURES))

    features, labels, sessions = [], [], []
    for session in range(N_SESSIONS):
        for label in range(N_CLASSES):
            noise = rng.normal(0.0, config.noise, size=(config.per_class, N_FEATURES))
            features.append(prototypes[label] + offsets[session] + noise)
            labels.append(np.full(config.per_class, label))
            sessions.append(np.full(config.per_class, session))

    dataset = Dataset(np.concatenate(features), np.concatenate(labels), np.concatenate(sessions))
    logger.info(f"Generated {len(dataset)} synthetic rows (seed={config.seed})")
    return dataset


def split_by_session(dataset: Dataset) -> Tuple[Dataset, Dataset]:
    """Sessions 0-3 train, sessions 4-6 test."""
    missing = sorted(set(range(N_SESSIONS)) - set(np.unique(dataset.sessions).tolist()))
    if missing:
        raise ValueError(f"dataset is missing sessions {missing}")
    is_train = np.isin(dataset.sessions, TRAIN_SESSIONS)
    return dataset.take(np.flatnonzero(is_train)), dataset.take(np.flatnonzero(~is_train))


def split_random(dataset: Dataset, test_fraction: float, seed: int = 0) -> Tuple[Dataset, Dataset]:
    """Seeded shuffle split; both halves keep the original row order."""
    if not 0 < test_fraction < 1:
        raise ValueError(f"test fraction must lie in (0, 1), got {test_fraction}")
    if len(dataset) < 2:
        raise ValueError("need at least two rows to split")
    order = np.random.default_rng(seed).permutation(len(dataset))
    n_test = min(max(int(round(test_fraction * len(dataset))), 1), len(dataset) - 1)
    return dataset.take(np.sort(order[n_test:])), dataset.take(np.sort(order[:n_test]))


def split_validation(dataset: Dataset, fraction: float = 0.2, seed: int = 0) -> Tuple[Dataset, Dataset]:
    return split_random(dataset, fraction, seed)


def subsample(dataset: Dataset, size: int, seed: int = 0) -> Dataset:
    """Class-balanced seeded subset of ``size`` rows."""
    if not 1 <= size <= len(dataset):
        raise ValueError(f"subsample size {size} outside [1, {len(dataset)}]")
    rng = np.random.default_rng(seed)
    rank = np.empty(len(dataset), dtype=np.int64)
    for label in np.unique(dataset.labels):
        members = np.flatnonzero(dataset.labels == label)
        rank[rng.permutation(members)] = np.arange(len(members))
    # Round-robin over classes: every class gets its first pick before any gets a second
    order = np.lexsort((dataset.labels, rank))
    return dataset.take(np.sort(order[:size]))


@dataclass(frozen=True, eq=False)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, features: np.ndarray) -> "Standardizer":
        features = np.asarray(features, dtype=np.float64)
        if len(features) == 0:
            raise ValueError("cannot fit a standardizer on zero rows")
        scale = features.std(axis=0)
        return cls(features.mean(axis=0), np.where(scale > 0, scale, 1.0))

    @classmethod
    def identity(cls, width: int = N_FEATURES) -> "Standardizer":
        return cls(np.zeros(width), np.ones(width))

    def transform(self, features: np.ndarray) -> np.ndarray:
        return (np.asarray(features, dtype=np.float64) - self.mean) / self.scale


def _metadata_line(metadata: Dict[str, object]) -> str:
    return "# " + " ".join(f"{key}={value}" for key, value in metadata.items()) + "\n"


def save_csv(dataset: Dataset, path: Union[str, Path], metadata: Optional[Dict[str, object]] = None) -> None:
    """Write ``label,session,f0..f35`` with a leading ``# seed=...`` comment line."""
    metadata = dict(metadata or {})
    metadata.setdefault("seed", "unknown")
    frame = pd.DataFrame(dataset.features, columns=FEATURE_COLUMNS)
    frame.insert(0, "session", dataset.sessions)
    frame.insert(0, "label", dataset.labels)

    path = Path(path)
    with open(path, "w", newline="") as f:
        f.write(_metadata_line({"seed": metadata.pop("seed"), **metadata}))
        frame.to_csv(f, index=False, lineterminator="\n")
    logger.info(f"Wrote {len(dataset)} rows to {path}")


def _leading_comment_lines(path: Path) -> int:
    count = 0
    with open(path) as f:
        for line in f:
            if not line.startswith("#"):
                break
            count += 1
    return count


def load_csv(path: Union[str, Path]) -> Dataset:
    """Parse a dataset CSV; every format error names its 1-based file line."""
    path = Path(path)
    skip = _leading_comment_lines(path)
    try:
        frame = pd.read_csv(
            path, skiprows=skip, dtype=str, keep_default_na=False, na_values=[], skip_blank_lines=False
        )
    except pd.errors.EmptyDataError as e:
        raise ValueError(f"{path}: no header row") from e
    except pd.errors.ParserError as e:
        raise ValueError(f"{path}: wrong column count ({e})") from e

    header_line = skip + 1
    if list(frame.columns) != CSV_COLUMNS:
        raise ValueError(f"{path}: line {header_line}: expected header label,session,f0..f{N_FEATURES - 1}")

    cells = frame.to_numpy(dtype=object)
    values = np.empty(cells.shape, dtype=np.float64)
    for row, line_cells in enumerate(cells):
        line = header_line + 1 + row
        missing = [cell is None or (isinstance(cell, float) and np.isnan(cell)) for cell in line_cells]
        # A blank line parses as a row of missing cells
        if any(missing) or all(cell == "" for cell in line_cells):
            raise ValueError(f"{path}: line {line}: expected {len(CSV_COLUMNS)} columns")
        try:
            values[row] = np.asarray(line_cells, dtype=str).astype(np.float64)
        except ValueError as e:
            raise ValueError(f"{path}: line {line}: non-numeric cell ({e})") from e
        if not np.all(np.isfinite(values[row])):
            raise ValueError(f"{path}: line {line}: non-finite value")

    for column, limit in ((0, N_CLASSES), (1, N_SESSIONS)):
        column_values = values[:, column]
        valid = (column_values == np.floor(column_values)) & (column_values >= 0) & (column_values < limit)
        bad = np.flatnonzero(~valid)
        if len(bad):
            raise ValueError(
                f"{path}: line {header_line + 1 + bad[0]}: {CSV_COLUMNS[column]} "
                f"{values[bad[0], column]:g} outside [0, {limit})"
            )

    return Dataset(values[:, 2:], values[:, 0].astype(np.int64), values[:, 1].astype(np.int64))
