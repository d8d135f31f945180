from abc import ABC, abstractmethod
from typing import Dict, Tuple

import numpy as np
from scipy.special import log_softmax, softmax

Params = Dict[str, np.ndarray]


class Trainable(ABC):
    """A classifier whose named parameter arrays the training loop can update."""

    @abstractmethod
    def get_params(self) -> Params:
        pass

    @abstractmethod
    def with_params(self, params: Params) -> "Trainable":
        """Copy of the model carrying ``params``."""

    @abstractmethod
    def logits(self, features: np.ndarray) -> np.ndarray:
        """Class logits, shape ``(rows, 8)``, for raw (unstandardized) feature rows."""

    @abstractmethod
    def loss_and_grads(self, features: np.ndarray, labels: np.ndarray, method: str) -> Tuple[float, Params]:
        """Mean cross-entropy over the batch and its gradient for every parameter."""

    def trainable_count(self) -> int:
        return int(sum(p.size for p in self.get_params().values()))


def cross_entropy(logits: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Per-row softmax cross-entropy."""
    logits = np.atleast_2d(np.asarray(logits, dtype=np.float64))
    labels = np.atleast_1d(np.asarray(labels, dtype=np.int64))
    if np.any((labels < 0) | (labels >= logits.shape[-1])):
        raise ValueError(f"labels must lie in [0, {logits.shape[-1]})")
    return -np.take_along_axis(log_softmax(logits, axis=-1), labels[:, None], axis=-1)[:, 0]


def loss(logits: np.ndarray, label: int) -> float:
    return float(cross_entropy(np.asarray(logits)[None, :], np.array([label]))[0])


def cross_entropy_grad(logits: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """d(mean loss)/d(logits)."""
    probabilities = softmax(logits, axis=-1)
    probabilities[np.arange(len(labels)), labels] -= 1.0
    return probabilities / len(labels)
