"""Plot-ready tables derived from a trial store."""

import logging
from pathlib import Path
from typing import Dict, List, Sequence, Union

import numpy as np
import pandas as pd
from scipy.spatial.distance import cdist

from ..models import CATEGORICAL_PARAMS, PARAM_NAMES, ImportanceReport, SearchSpace, TrialRecord, TrialStatus

logger = logging.getLogger(__name__)

CONTOUR_RADIUS = 0.75
IDW_POWER = 2.0


def _check_param(param: str) -> None:
    if param not in PARAM_NAMES:
        raise ValueError(f"unknown parameter '{param}', expected one of {', '.join(PARAM_NAMES)}")


def _choices(param: str, space: SearchSpace) -> List[str]:
    kinds = space.embeddings if param == "embedding" else space.variationals
    return [kind.value for kind in kinds]


def _numeric_range(param: str, space: SearchSpace) -> tuple:
    return {"n": space.n_range, "L": space.L_range, "lr0": space.lr0_range}[param]


def _finite(trials: Sequence[TrialRecord]) -> List[TrialRecord]:
    return [trial for trial in trials if np.isfinite(trial.objective())]


def trials_frame(trials: Sequence[TrialRecord]) -> pd.DataFrame:
    """One flat row per trial."""
    rows = [
        {
            "trial_id": trial.id,
            **trial.config.model_dump(),
            "status": trial.status,
            "objective": trial.objective(),
            "epochs": len(trial.epochs),
            "val_loss": trial.final.val_loss,
            "val_acc": trial.final.val_acc,
            "test_acc": trial.final.test_acc,
            "param_count": trial.param_count,
            "seed": trial.seed,
            "wall_s": trial.wall_s,
        }
        for trial in trials
    ]
    columns = ["trial_id", *PARAM_NAMES, "status", "objective", "epochs", "val_loss", "val_acc"]
    columns += ["test_acc", "param_count", "seed", "wall_s"]
    return pd.DataFrame(rows, columns=columns)


def slice_export(trials: Sequence[TrialRecord], param: str, space: SearchSpace = SearchSpace()) -> pd.DataFrame:
    """Objective against one parameter, sorted by that parameter's value.

    Categorical values follow the enum order; ties keep trial id order.
    """
    _check_param(param)
    usable = _finite(trials)
    if param in CATEGORICAL_PARAMS:
        order = {value: index for index, value in enumerate(_choices(param, space))}

        def rank(trial: TrialRecord) -> float:
            return order.get(getattr(trial.config, param), len(order))

    else:

        def rank(trial: TrialRecord) -> float:
            return float(getattr(trial.config, param))

    usable.sort(key=lambda trial: (rank(trial), trial.id))
    return pd.DataFrame(
        {
            param: [getattr(trial.config, param) for trial in usable],
            "objective": [trial.objective() for trial in usable],
            "trial_id": [trial.id for trial in usable],
            "pruned": [trial.status == TrialStatus.PRUNED for trial in usable],
        }
    )


def _axis_cells(param: str, resolution: int, space: SearchSpace) -> np.ndarray:
    if param in CATEGORICAL_PARAMS:
        return np.array(_choices(param, space), dtype=object)
    low, high = _numeric_range(param, space)
    if param == "lr0":
        return np.geomspace(low, high, resolution)
    return np.linspace(low, high, resolution)


def _normalize(param: str, values: Sequence, space: SearchSpace) -> np.ndarray:
    """Map numeric parameter values onto [0, 1]; learning rates on a log scale."""
    low, high = _numeric_range(param, space)
    x = np.asarray(values, dtype=np.float64)
    if param == "lr0":
        x, low, high = np.log10(x), np.log10(low), np.log10(high)
    if high == low:
        return np.zeros_like(x)
    return (x - low) / (high - low)


def _cell_distances(
    params: Sequence[str], grids: Sequence[np.ndarray], trials: Sequence[TrialRecord], space: SearchSpace
) -> np.ndarray:
    """(cells, trials) distances over the numeric axes; inf where a categorical axis disagrees."""
    numeric = [(param, grid) for param, grid in zip(params, grids) if param not in CATEGORICAL_PARAMS]
    if numeric:
        cells = np.column_stack([_normalize(param, grid, space) for param, grid in numeric])
        points = np.column_stack(
            [_normalize(param, [getattr(t.config, param) for t in trials], space) for param, _ in numeric]
        )
        distances = cdist(cells, points)
    else:
        distances = np.zeros((len(grids[0]), len(trials)))
    for param, grid in zip(params, grids):
        if param in CATEGORICAL_PARAMS:
            values = np.array([getattr(t.config, param) for t in trials], dtype=object)
            distances[grid[:, None] != values[None, :]] = np.inf
    return distances


def contour_export(
    trials: Sequence[TrialRecord],
    param_a: str,
    param_b: str,
    resolution: int = 20,
    radius: float = CONTOUR_RADIUS,
    space: SearchSpace = SearchSpace(),
) -> pd.DataFrame:
    """Inverse-distance-weighted objective over a (param_a, param_b) grid.

    Numeric axes are smoothed in normalized coordinates; a categorical axis has one cell per
    category and only trials of that category contribute to it. Cells with no trial within
    ``radius`` carry NaN. A cell that coincides with trials takes their mean objective.
    """
    _check_param(param_a)
    _check_param(param_b)
    if param_a == param_b:
        raise ValueError(f"contour needs two distinct parameters, got '{param_a}' twice")
    if resolution < 2:
        raise ValueError(f"resolution must be at least 2, got {resolution}")

    cells_a = _axis_cells(param_a, resolution, space)
    cells_b = _axis_cells(param_b, resolution, space)
    grid_a, grid_b = np.meshgrid(cells_a, cells_b, indexing="ij")
    grid_a, grid_b = grid_a.ravel(), grid_b.ravel()

    usable = _finite(trials)
    values = np.full(len(grid_a), np.nan)
    if usable:
        distances = _cell_distances((param_a, param_b), (grid_a, grid_b), usable, space)
        objective = np.array([t.objective() for t in usable])
        for cell, row in enumerate(distances):
            exact = row < 1e-12
            if exact.any():
                values[cell] = float(objective[exact].mean())
                continue
            near = row <= radius
            if not near.any():
                continue
            weights = row[near] ** -IDW_POWER
            values[cell] = float(weights @ objective[near] / weights.sum())

    logger.debug(f"Contour {param_a} x {param_b}: {int(np.isfinite(values).sum())}/{len(values)} cells filled")
    return pd.DataFrame({param_a: grid_a, param_b: grid_b, "objective": values})


def scatter_export(trials: Sequence[TrialRecord]) -> pd.DataFrame:
    """Test accuracy against trainable parameter count, completed trials only."""
    completed = [trial for trial in trials if trial.status == TrialStatus.COMPLETED]
    return pd.DataFrame(
        {
            "trial_id": [trial.id for trial in completed],
            "param_count": [trial.param_count for trial in completed],
            "test_acc": [trial.final.test_acc for trial in completed],
            "variational": [trial.config.variational for trial in completed],
        }
    )


def trajectory_export(trials: Sequence[TrialRecord]) -> pd.DataFrame:
    rows = [
        {"trial_id": trial.id, "epoch": epoch, "val_loss": loss, "status": trial.status}
        for trial in trials
        for epoch, loss in enumerate(trial.epochs, start=1)
    ]
    return pd.DataFrame(rows, columns=["trial_id", "epoch", "val_loss", "status"])


def importance_frame(report: ImportanceReport) -> pd.DataFrame:
    scores: Dict[str, float] = {**report.scores, "residual": report.residual}
    return pd.DataFrame({"param": list(scores), "importance": list(scores.values())})


def save_frame(frame: pd.DataFrame, path: Union[str, Path]) -> None:
    frame.to_csv(path, index=False, lineterminator="\n")
    logger.info(f"Wrote {len(frame)} rows to {path}")


def save_importance(report: ImportanceReport, path: Union[str, Path]) -> Path:
    """Write the report as ``<stem>.json`` and its table as ``<stem>.csv`` beside ``path``."""
    path = Path(path)
    json_path = path.with_suffix(".json")
    json_path.write_text(report.model_dump_json(indent=2) + "\n")
    save_frame(importance_frame(report), path.with_suffix(".csv"))
    return json_path
