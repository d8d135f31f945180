"""Classical reference classifiers: residual Mish MLP, k-nearest neighbours and Gaussian naive Bayes."""

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.spatial.distance import cdist
from scipy.special import expit, logsumexp

from .data import Dataset, Standardizer, split_validation, subsample
from .models import N_CLASSES, N_FEATURES, AnsatzSpec, MlpCheckpoint, TrainConfig
from .qnn import init_model, predict
from .train import TrainResult, evaluate, train
from .trainable import Params, Trainable, cross_entropy, cross_entropy_grad

logger = logging.getLogger(__name__)

HIDDEN = 100
N_RESIDUAL_BLOCKS = 3
VARIANCE_FLOOR = 1e-9
LEARNING_CURVE_METHODS = ("qnn", "mlp", "knn", "gnb")

_BLOCK_KEYS = [(f"w{i}", f"b{i}") for i in range(1, N_RESIDUAL_BLOCKS + 1)]
MLP_PARAM_KEYS = ("w0", "b0", *[key for pair in _BLOCK_KEYS for key in pair], "w_out", "b_out")


def mish(x: np.ndarray) -> np.ndarray:
    return x * np.tanh(np.logaddexp(0.0, x))


def mish_grad(x: np.ndarray) -> np.ndarray:
    t = np.tanh(np.logaddexp(0.0, x))
    return t + x * (1.0 - t * t) * expit(x)


def mlp_param_count() -> int:
    projection = N_FEATURES * HIDDEN + HIDDEN
    blocks = N_RESIDUAL_BLOCKS * (HIDDEN * HIDDEN + HIDDEN)
    return projection + blocks + HIDDEN * N_CLASSES + N_CLASSES


@dataclass(frozen=True, eq=False)
class MlpModel(Trainable):
    """36 -> 100 projection, three residual 100 -> 100 Mish blocks, 100 -> 8 output."""

    params: Params
    scaler: Standardizer = field(default_factory=Standardizer.identity)
    seed: int = 0

    def __post_init__(self) -> None:
        if set(self.params) != set(MLP_PARAM_KEYS):
            raise ValueError(f"MLP parameters must be exactly {MLP_PARAM_KEYS}")

    def get_params(self) -> Params:
        return {key: self.params[key] for key in MLP_PARAM_KEYS}

    def with_params(self, params: Params) -> "MlpModel":
        return replace(self, params=dict(params))

    def _forward(self, features: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray], List[np.ndarray]]:
        p = self.params
        z = self.scaler.transform(np.atleast_2d(features))
        pre = [z @ p["w0"].T + p["b0"]]
        hidden = [mish(pre[0])]
        for w_key, b_key in _BLOCK_KEYS:
            pre.append(hidden[-1] @ p[w_key].T + p[b_key])
            hidden.append(hidden[-1] + mish(pre[-1]))
        return hidden[-1] @ p["w_out"].T + p["b_out"], pre, [z, *hidden]

    def logits(self, features: np.ndarray) -> np.ndarray:
        return self._forward(features)[0]

    def loss_and_grads(self, features: np.ndarray, labels: np.ndarray, method: str = "") -> Tuple[float, Params]:
        labels = np.asarray(labels, dtype=np.int64)
        if len(labels) == 0:
            raise ValueError("backward needs a non-empty batch")
        logits, pre, activations = self._forward(features)
        mean_loss = float(cross_entropy(logits, labels).mean())

        p = self.params
        d_logits = cross_entropy_grad(logits, labels)
        grads: Params = {"w_out": d_logits.T @ activations[-1], "b_out": d_logits.sum(axis=0)}
        d_hidden = d_logits @ p["w_out"]
        for block in range(N_RESIDUAL_BLOCKS, 0, -1):
            w_key, b_key = _BLOCK_KEYS[block - 1]
            d_pre = d_hidden * mish_grad(pre[block])
            grads[w_key] = d_pre.T @ activations[block]
            grads[b_key] = d_pre.sum(axis=0)
            d_hidden = d_hidden + d_pre @ p[w_key]
        d_pre = d_hidden * mish_grad(pre[0])
        grads["w0"] = d_pre.T @ activations[0]
        grads["b0"] = d_pre.sum(axis=0)
        return mean_loss, grads


def init_mlp(seed: int = 0, scaler: Optional[Standardizer] = None) -> MlpModel:
    rng = np.random.default_rng(seed)
    shapes = {"w0": (HIDDEN, N_FEATURES)}
    shapes.update({w_key: (HIDDEN, HIDDEN) for w_key, _ in _BLOCK_KEYS})
    shapes["w_out"] = (N_CLASSES, HIDDEN)

    params: Params = {}
    for key in MLP_PARAM_KEYS:
        if key in shapes:
            fan_out, fan_in = shapes[key]
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            params[key] = rng.uniform(-limit, limit, size=(fan_out, fan_in))
        else:
            params[key] = np.zeros(shapes["w" + key[1:]][0])
    return MlpModel(params=params, scaler=scaler or Standardizer.identity(), seed=seed)


def mlp_train(train_set: Dataset, val_set: Dataset, config: TrainConfig) -> TrainResult:
    """Fit the MLP with the same optimiser, schedule and preprocessing as the QNN."""
    model = init_mlp(config.seed, Standardizer.fit(train_set.features))
    result = train(model, train_set, val_set, config)
    logger.info(f"MLP ({mlp_param_count()} parameters) trained for {len(result.history)} epochs")
    return result


def mlp_predict(model: MlpModel, features: np.ndarray) -> np.ndarray:
    return predict(model, features)


def save_mlp_checkpoint(model: MlpModel, path: Union[str, Path]) -> None:
    checkpoint = MlpCheckpoint(
        params={key: value.tolist() for key, value in model.get_params().items()},
        feature_mean=model.scaler.mean.tolist(),
        feature_scale=model.scaler.scale.tolist(),
        seed=model.seed,
    )
    Path(path).write_text(checkpoint.model_dump_json(indent=2))


def load_mlp_checkpoint(path: Union[str, Path]) -> MlpModel:
    checkpoint = MlpCheckpoint.model_validate_json(Path(path).read_text())
    return MlpModel(
        params={key: np.array(value, dtype=np.float64) for key, value in checkpoint.params.items()},
        scaler=Standardizer(np.array(checkpoint.feature_mean), np.array(checkpoint.feature_scale)),
        seed=checkpoint.seed,
    )


def knn_predict(train_set: Dataset, features: np.ndarray, k: int = 5, chunk_size: int = 1024) -> np.ndarray:
    """Majority vote of the k Euclidean-nearest rows.

    Distance ties go to the lower row index, vote ties to the lower label.
    """
    if len(train_set) == 0:
        raise ValueError("kNN needs a non-empty training set")
    if not 1 <= k <= len(train_set):
        raise ValueError(f"k must lie in [1, {len(train_set)}], got {k}")
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))

    labels = np.empty(len(features), dtype=np.int64)
    for start in range(0, len(features), chunk_size):
        distances = cdist(features[start : start + chunk_size], train_set.features)
        nearest = np.argsort(distances, axis=1, kind="stable")[:, :k]
        for row, neighbours in enumerate(nearest):
            votes = np.bincount(train_set.labels[neighbours], minlength=N_CLASSES)
            labels[start + row] = int(np.argmax(votes))
    return labels


@dataclass(frozen=True, eq=False)
class GnbModel:
    means: np.ndarray
    variances: np.ndarray
    log_priors: np.ndarray

    def joint_log_likelihood(self, features: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(features, dtype=np.float64))[:, None, :]
        per_feature = -0.5 * (np.log(2.0 * np.pi * self.variances) + (x - self.means) ** 2 / self.variances)
        return self.log_priors + per_feature.sum(axis=-1)

    def posterior(self, features: np.ndarray) -> np.ndarray:
        joint = self.joint_log_likelihood(features)
        return np.exp(joint - logsumexp(joint, axis=-1, keepdims=True))


def gnb_fit(dataset: Dataset) -> GnbModel:
    counts = np.bincount(dataset.labels, minlength=N_CLASSES)
    absent = np.flatnonzero(counts == 0)
    if len(absent):
        raise ValueError(f"classes {absent.tolist()} have no training samples")
    means = np.stack([dataset.features[dataset.labels == c].mean(axis=0) for c in range(N_CLASSES)])
    variances = np.stack([dataset.features[dataset.labels == c].var(axis=0) for c in range(N_CLASSES)])
    return GnbModel(
        means=means,
        variances=np.maximum(variances, VARIANCE_FLOOR),
        log_priors=np.log(counts / counts.sum()),
    )


def gnb_predict(model: GnbModel, features: np.ndarray) -> np.ndarray:
    """Argmax of log prior plus Gaussian log-likelihood; ties go to the lowest class."""
    return np.argmax(model.joint_log_likelihood(features), axis=-1)


BASELINE_QNN = AnsatzSpec(embedding="angle", variational="s2d", n=10, L=1)

# Below this many rows the model validates on its own training rows
MIN_HOLDOUT_ROWS = 10


def qnn_train(train_set: Dataset, val_set: Dataset, config: TrainConfig) -> TrainResult:
    """Fit the baseline QNN (angle embedding, S2D, 10 qubits, 1 layer)."""
    model = init_model(BASELINE_QNN, config.seed, Standardizer.fit(train_set.features))
    return train(model, train_set, val_set, config)


def _holdout(train_set: Dataset, seed: int) -> Tuple[Dataset, Dataset]:
    if len(train_set) < MIN_HOLDOUT_ROWS:
        return train_set, train_set
    return split_validation(train_set, 0.2, seed)


def fit_and_score(
    method: str, train_set: Dataset, test_set: Dataset, config: TrainConfig, k: int = 5
) -> float:
    """Test accuracy of one method trained on ``train_set``.

    The MLP and the QNN hold out a seeded fifth of ``train_set`` for their validation metrics.
    """
    if method == "knn":
        scaler = Standardizer.fit(train_set.features)
        scaled = Dataset(scaler.transform(train_set.features), train_set.labels, train_set.sessions)
        predicted = knn_predict(scaled, scaler.transform(test_set.features), min(k, len(train_set)))
    elif method == "gnb":
        predicted = gnb_predict(gnb_fit(train_set), test_set.features)
    elif method in ("mlp", "qnn"):
        fit_set, val_set = _holdout(train_set, config.seed)
        result = (mlp_train if method == "mlp" else qnn_train)(fit_set, val_set, config)
        if result.diverged:
            logger.warning(f"{method} diverged on {len(fit_set)} samples")
        return evaluate(result.model, test_set)[1]
    else:
        raise ValueError(f"unknown baseline {method!r}, expected one of {LEARNING_CURVE_METHODS}")
    return float(np.mean(predicted == test_set.labels))


def learning_curve(
    train_set: Dataset,
    test_set: Dataset,
    sizes: Sequence[int],
    methods: Sequence[str] = LEARNING_CURVE_METHODS,
    config: Optional[TrainConfig] = None,
    k: int = 5,
    seed: int = 0,
) -> pd.DataFrame:
    """Test accuracy against the number of labelled training rows, one row per (method, size)."""
    config = config or TrainConfig(seed=seed)
    rows: List[Dict[str, object]] = []
    for size in sizes:
        subset = subsample(train_set, size, seed)
        for method in methods:
            accuracy = fit_and_score(method, subset, test_set, config, k)
            logger.info(f"{method} with {size} training rows: test accuracy {accuracy:.3f}")
            rows.append({"method": method, "n_train": size, "test_acc": accuracy})
    return pd.DataFrame(rows, columns=["method", "n_train", "test_acc"])
