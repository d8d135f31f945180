"""Hybrid quantum neural network.

Standardized features pass through a dense input layer whose outputs drive the
embedding, the variational circuit is read out as <Z> per qubit and a dense output
layer maps the readouts to class logits.
"""

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, Optional, Tuple, Union

import numpy as np
from scipy.special import softmax

from .data import Standardizer
from .models import N_CLASSES, N_FEATURES, AnsatzSpec, EmbeddingKind, QnnCheckpoint
from .quantum.ansatz import build_circuit, count_params, embedding_values, embedding_vjp
from .quantum.gradients import GradientRequest, adjoint_vjp, finite_diff_grad, param_shift_grad
from .quantum.statevector import Circuit, run_circuit
from .trainable import Params, Trainable, cross_entropy, cross_entropy_grad

logger = logging.getLogger(__name__)

PARAM_KEYS = ("w_in", "b_in", "theta", "w_out", "b_out")
GRADIENT_METHODS = ("adjoint", "parameter-shift", "finite-diff")

# Amplitudes per simulated chunk of rows, small enough to stay in cache
_MAX_AMPLITUDES = 1 << 16


def _chunks(rows: int, n: int) -> Iterator[slice]:
    step = max(1, _MAX_AMPLITUDES >> n)
    for start in range(0, rows, step):
        yield slice(start, min(start + step, rows))


@dataclass(frozen=True, eq=False)
class QnnModel(Trainable):
    spec: AnsatzSpec
    w_in: np.ndarray
    b_in: np.ndarray
    theta: np.ndarray
    w_out: np.ndarray
    b_out: np.ndarray
    scaler: Standardizer = field(default_factory=Standardizer.identity)
    seed: int = 0
    circuit: Optional[Circuit] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        n = self.spec.n
        expected = {
            "w_in": (n, N_FEATURES),
            "b_in": (n,),
            "theta": (count_params(self.spec.variational, n, self.spec.L),),
            "w_out": (N_CLASSES, n),
            "b_out": (N_CLASSES,),
        }
        for key, shape in expected.items():
            value = np.asarray(getattr(self, key), dtype=np.float64)
            if value.shape != shape:
                raise ValueError(f"{key} must have shape {shape}, got {value.shape}")
            object.__setattr__(self, key, value)
        if self.circuit is None:
            object.__setattr__(self, "circuit", build_circuit(self.spec))

    @property
    def embedding(self) -> EmbeddingKind:
        return EmbeddingKind(self.spec.embedding)

    def get_params(self) -> Params:
        return {key: getattr(self, key) for key in PARAM_KEYS}

    def with_params(self, params: Params) -> "QnnModel":
        return replace(self, **{key: params[key] for key in PARAM_KEYS})

    def pre_activations(self, features: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        z = self.scaler.transform(features)
        return z, z @ self.w_in.T + self.b_in

    def readout(self, a: np.ndarray) -> np.ndarray:
        values = embedding_values(self.embedding, a)
        out = np.empty(a.shape[:-1] + (self.spec.n,))
        for rows in _chunks(len(a), self.spec.n):
            out[rows] = run_circuit(self.circuit, self.theta, values[rows])
        return out

    def logits(self, features: np.ndarray) -> np.ndarray:
        features = _check_features(features)
        _, a = self.pre_activations(features)
        return self.readout(a) @ self.w_out.T + self.b_out

    def loss_and_grads(
        self, features: np.ndarray, labels: np.ndarray, method: str = "parameter-shift"
    ) -> Tuple[float, Params]:
        if method not in GRADIENT_METHODS:
            raise ValueError(f"unknown gradient method {method!r}, expected one of {GRADIENT_METHODS}")
        features = _check_features(features)
        labels = np.asarray(labels, dtype=np.int64)
        if len(features) == 0:
            raise ValueError("backward needs a non-empty batch")

        z, a = self.pre_activations(features)
        r = self.readout(a)
        logits = r @ self.w_out.T + self.b_out
        mean_loss = float(cross_entropy(logits, labels).mean())

        d_logits = cross_entropy_grad(logits, labels)
        d_readout = d_logits @ self.w_out
        grad_theta = np.zeros_like(self.theta)
        grad_values = np.zeros(a.shape[:-1] + (self.circuit.n_embedding,))
        values = embedding_values(self.embedding, a)
        n_var = self.circuit.n_variational
        for rows in _chunks(len(a), self.spec.n):
            if method == "adjoint":
                g_theta, g_values = adjoint_vjp(self.circuit, self.theta, values[rows], d_readout[rows])
            else:
                request = GradientRequest(self.circuit, self.theta, values[rows])
                jacobian = param_shift_grad(request) if method == "parameter-shift" else finite_diff_grad(request)
                contracted = np.einsum("bi,bis->bs", d_readout[rows], jacobian)
                g_theta, g_values = contracted[:, :n_var], contracted[:, n_var:]
            grad_theta += g_theta.sum(axis=0)
            grad_values[rows] = g_values

        grad_a = embedding_vjp(self.embedding, a, grad_values)
        grads = {
            "w_in": grad_a.T @ z,
            "b_in": grad_a.sum(axis=0),
            "theta": grad_theta,
            "w_out": d_logits.T @ r,
            "b_out": d_logits.sum(axis=0),
        }
        return mean_loss, grads


def _check_features(features: np.ndarray) -> np.ndarray:
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if features.shape[-1] != N_FEATURES:
        raise ValueError(f"expected {N_FEATURES} features per row, got {features.shape[-1]}")
    if not np.all(np.isfinite(features)):
        raise ValueError("input features must be finite")
    return features


def _glorot(rng: np.random.Generator, fan_out: int, fan_in: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_out, fan_in))


def init_model(spec: AnsatzSpec, seed: int = 0, scaler: Optional[Standardizer] = None) -> QnnModel:
    """Glorot-uniform dense layers, zero biases, circuit angles uniform in [0, 2pi)."""
    rng = np.random.default_rng(seed)
    n = spec.n
    w_in = _glorot(rng, n, N_FEATURES)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=count_params(spec.variational, n, spec.L))
    w_out = _glorot(rng, N_CLASSES, n)
    return QnnModel(
        spec=spec,
        w_in=w_in,
        b_in=np.zeros(n),
        theta=theta,
        w_out=w_out,
        b_out=np.zeros(N_CLASSES),
        scaler=scaler or Standardizer.identity(),
        seed=seed,
    )


def forward(model: QnnModel, x: np.ndarray) -> np.ndarray:
    """Logits ``(8,)`` for one feature vector, or ``(rows, 8)`` for a batch of rows."""
    logits = model.logits(x)
    return logits[0] if np.ndim(x) == 1 else logits


def probabilities(model: QnnModel, x: np.ndarray) -> np.ndarray:
    return softmax(forward(model, x), axis=-1)


def backward(
    model: QnnModel, features: np.ndarray, labels: np.ndarray, method: str = "parameter-shift"
) -> Tuple[Params, float]:
    """Mean-over-batch gradients for every parameter array, plus the mean loss."""
    mean_loss, grads = model.loss_and_grads(features, labels, method)
    return grads, mean_loss


def predict(model: Trainable, features: np.ndarray) -> np.ndarray:
    """Argmax class per row; ties go to the lowest class index."""
    return np.argmax(model.logits(features), axis=-1)


def qnn_trainable_count(spec: AnsatzSpec) -> int:
    n = spec.n
    return (N_FEATURES * n + n) + count_params(spec.variational, n, spec.L) + (N_CLASSES * n + N_CLASSES)


def trainable_count(model: Trainable) -> int:
    return model.trainable_count()


def save_checkpoint(model: QnnModel, path: Union[str, Path]) -> None:
    checkpoint = QnnCheckpoint(
        spec=model.spec,
        w_in=model.w_in.tolist(),
        b_in=model.b_in.tolist(),
        theta=model.theta.tolist(),
        w_out=model.w_out.tolist(),
        b_out=model.b_out.tolist(),
        feature_mean=model.scaler.mean.tolist(),
        feature_scale=model.scaler.scale.tolist(),
        seed=model.seed,
    )
    Path(path).write_text(checkpoint.model_dump_json(indent=2))
    logger.info(f"Saved checkpoint to {path}")


def load_checkpoint(path: Union[str, Path]) -> QnnModel:
    checkpoint = QnnCheckpoint.model_validate_json(Path(path).read_text())
    return QnnModel(
        spec=checkpoint.spec,
        w_in=np.array(checkpoint.w_in),
        b_in=np.array(checkpoint.b_in),
        theta=np.array(checkpoint.theta),
        w_out=np.array(checkpoint.w_out),
        b_out=np.array(checkpoint.b_out),
        scaler=Standardizer(np.array(checkpoint.feature_mean), np.array(checkpoint.feature_scale)),
        seed=checkpoint.seed,
    )
