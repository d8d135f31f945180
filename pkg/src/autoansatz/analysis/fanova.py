"""First-order functional ANOVA importance from a random forest fitted to the trial history.

Each tree is read back as a set of leaf boxes. Under the uniform product measure of
the search space (numeric axes as intervals, categoricals as their one-hot points),
a parameter's marginal is piecewise constant over the cells cut by the tree's split
thresholds, so its variance is an exact finite sum.
"""

import logging
from dataclasses import dataclass
from typing import Any, List, Sequence, Tuple

import numpy as np
from sklearn.ensemble import RandomForestRegressor

from ..models import CATEGORICAL_PARAMS, PARAM_NAMES, ImportanceReport, SearchSpace, TrialRecord

logger = logging.getLogger(__name__)

N_TREES = 32
MAX_DEPTH = 8
MIN_TRIALS = 20


@dataclass(frozen=True)
class ParamAxis:
    """Encoded columns of one parameter and the measure it is integrated over."""

    name: str
    columns: Tuple[int, ...]
    low: float = 0.0
    high: float = 0.0

    @property
    def is_categorical(self) -> bool:
        return self.name in CATEGORICAL_PARAMS


def encode_axes(space: SearchSpace) -> List[ParamAxis]:
    axes: List[ParamAxis] = []
    column = 0
    for name in PARAM_NAMES:
        if name in CATEGORICAL_PARAMS:
            width = len(space.embeddings if name == "embedding" else space.variationals)
            axes.append(ParamAxis(name, tuple(range(column, column + width))))
            column += width
        else:
            low, high = {
                "n": space.n_range,
                "L": space.L_range,
                "lr0": tuple(np.log10(space.lr0_range)),
            }[name]
            axes.append(ParamAxis(name, (column,), float(low), float(high)))
            column += 1
    return axes


def encode_trials(trials: Sequence[TrialRecord], space: SearchSpace) -> np.ndarray:
    """One-hot categoricals, raw integers, log10 learning rate."""
    choices = {
        "embedding": [e.value for e in space.embeddings],
        "variational": [v.value for v in space.variationals],
    }
    rows = []
    for trial in trials:
        row: List[float] = []
        for name in PARAM_NAMES:
            value = getattr(trial.config, name)
            if name in CATEGORICAL_PARAMS:
                row.extend(1.0 if value == choice else 0.0 for choice in choices[name])
            else:
                row.append(float(np.log10(value)) if name == "lr0" else float(value))
        rows.append(row)
    return np.array(rows, dtype=np.float64)


class FanovaTree:
    """Leaf boxes of a fitted sklearn regression tree and their marginal variances."""

    def __init__(self, tree: Any, axes: Sequence[ParamAxis]) -> None:
        self.axes = list(axes)
        n_columns = sum(len(axis.columns) for axis in axes)
        lower: List[np.ndarray] = []
        upper: List[np.ndarray] = []
        values: List[float] = []

        stack = [(0, np.full(n_columns, -np.inf), np.full(n_columns, np.inf))]
        while stack:
            node, low, high = stack.pop()
            left, right = tree.children_left[node], tree.children_right[node]
            if left == right:
                lower.append(low)
                upper.append(high)
                values.append(float(tree.value[node].ravel()[0]))
                continue
            feature, threshold = tree.feature[node], tree.threshold[node]
            left_high = high.copy()
            left_high[feature] = min(high[feature], threshold)
            right_low = low.copy()
            right_low[feature] = max(low[feature], threshold)
            stack.append((left, low, left_high))
            stack.append((right, right_low, high))

        self.lower = np.array(lower)
        self.upper = np.array(upper)
        self.values = np.array(values)
        # (leaves, params) share of each axis' measure inside the leaf box
        self.fractions = np.stack([self._axis_fractions(axis) for axis in self.axes], axis=1)
        weights = self.fractions.prod(axis=1)
        self.mean = float(weights @ self.values)
        self.variance = max(float(weights @ self.values**2) - self.mean**2, 0.0)

    def _contains(self, columns: Tuple[int, ...], point: np.ndarray) -> np.ndarray:
        """Leaves whose box holds ``point`` on ``columns`` (splits send x <= threshold left)."""
        cols = list(columns)
        return np.all((self.lower[:, cols] < point) & (point <= self.upper[:, cols]), axis=1)

    def _cells(self, axis: ParamAxis) -> Tuple[np.ndarray, np.ndarray]:
        """Representative points on ``axis`` and their probability weights."""
        if axis.is_categorical:
            points = np.eye(len(axis.columns))
            return points, np.full(len(points), 1.0 / len(points))
        if axis.high == axis.low:
            return np.array([[axis.low]]), np.array([1.0])
        column = axis.columns[0]
        cuts = np.concatenate([self.lower[:, column], self.upper[:, column]])
        cuts = cuts[(cuts > axis.low) & (cuts < axis.high)]
        edges = np.unique(np.concatenate([[axis.low, axis.high], cuts]))
        midpoints = 0.5 * (edges[:-1] + edges[1:])
        return midpoints[:, None], np.diff(edges) / (axis.high - axis.low)

    def _axis_fractions(self, axis: ParamAxis) -> np.ndarray:
        points, weights = self._cells(axis)
        inside = np.stack([self._contains(axis.columns, point) for point in points], axis=1)
        return inside.astype(np.float64) @ weights

    def marginal_variance(self, index: int) -> float:
        """Variance over parameter ``index`` of the tree averaged over all other parameters."""
        axis = self.axes[index]
        others = np.prod(np.delete(self.fractions, index, axis=1), axis=1)
        points, weights = self._cells(axis)
        marginal = np.array(
            [float((self._contains(axis.columns, point) * others) @ self.values) for point in points]
        )
        mean = float(weights @ marginal)
        return max(float(weights @ marginal**2) - mean**2, 0.0)


def fanova_importance(
    trials: Sequence[TrialRecord], space: SearchSpace = SearchSpace(), seed: int = 0
) -> ImportanceReport:
    """Share of objective variance explained by each parameter alone; the rest is residual."""
    usable = [trial for trial in trials if np.isfinite(trial.objective())]
    if len(usable) < MIN_TRIALS:
        raise ValueError(f"importance needs at least {MIN_TRIALS} trials with a finite objective, got {len(usable)}")

    zero = {name: 0.0 for name in PARAM_NAMES}
    y = np.array([trial.objective() for trial in usable])
    if np.all(y == y[0]):
        logger.warning("Objective is constant over all trials; every importance is zero")
        return ImportanceReport(scores=zero, residual=1.0, n_trials=len(usable), seed=seed)

    axes = encode_axes(space)
    forest = RandomForestRegressor(n_estimators=N_TREES, max_depth=MAX_DEPTH, bootstrap=True, random_state=seed)
    forest.fit(encode_trials(usable, space), y)
    trees = [FanovaTree(estimator.tree_, axes) for estimator in forest.estimators_]
    trees = [tree for tree in trees if tree.variance > 0.0]
    if not trees:
        return ImportanceReport(scores=zero, residual=1.0, n_trials=len(usable), seed=seed)

    fractions = np.array(
        [[tree.marginal_variance(index) / tree.variance for index in range(len(axes))] for tree in trees]
    )
    scores = np.clip(fractions.mean(axis=0), 0.0, None)
    total = float(scores.sum())
    if total > 1.0:
        scores = scores / total
    residual = max(1.0 - float(scores.sum()), 0.0)
    return ImportanceReport(
        scores={axis.name: float(score) for axis, score in zip(axes, scores)},
        residual=residual,
        n_trials=len(usable),
        seed=seed,
    )
