"""Mini-batch AdamW training with a reduce-on-plateau learning-rate schedule."""

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from .data import Dataset
from .models import EpochMetrics, TrainConfig
from .trainable import Params, Trainable, cross_entropy

logger = logging.getLogger(__name__)

BETA1 = 0.9
BETA2 = 0.999
EPSILON = 1e-8

HISTORY_COLUMNS = ["epoch", "train_loss", "val_loss", "val_acc", "lr"]


class ObserverDecision(str, Enum):
    CONTINUE = "continue"
    PRUNE = "prune"


Observer = Callable[[EpochMetrics], ObserverDecision]


@dataclass
class AdamMoments:
    first: Params
    second: Params

    @classmethod
    def zeros_like(cls, params: Params) -> "AdamMoments":
        return cls(
            first={key: np.zeros_like(value) for key, value in params.items()},
            second={key: np.zeros_like(value) for key, value in params.items()},
        )


def adamw_step(
    params: Params, grads: Params, moments: AdamMoments, t: int, lr: float, weight_decay: float
) -> Tuple[Params, AdamMoments]:
    """One AdamW update with decoupled decay applied to the pre-update parameters."""
    if t < 1:
        raise ValueError(f"step counter starts at 1, got {t}")
    if params.keys() != grads.keys():
        raise ValueError(f"gradient keys {sorted(grads)} do not match parameters {sorted(params)}")

    new_params: Params = {}
    new_moments = AdamMoments(first={}, second={})
    for key, p in params.items():
        g = grads[key]
        if g.shape != p.shape:
            raise ValueError(f"gradient for {key} has shape {g.shape}, parameter has {p.shape}")
        m = BETA1 * moments.first[key] + (1.0 - BETA1) * g
        v = BETA2 * moments.second[key] + (1.0 - BETA2) * g * g
        m_hat = m / (1.0 - BETA1**t)
        v_hat = v / (1.0 - BETA2**t)
        new_params[key] = p - lr * m_hat / (np.sqrt(v_hat) + EPSILON) - lr * weight_decay * p
        new_moments.first[key] = m
        new_moments.second[key] = v
    return new_params, new_moments


class ReduceLROnPlateau:
    """Multiply the rate by ``factor`` once ``patience`` epochs in a row fail to improve the best loss
    by at least ``threshold``."""

    def __init__(self, lr: float, factor: float = 0.5, patience: int = 10, threshold: float = 1e-4):
        self.lr = lr
        self.factor = factor
        self.patience = patience
        self.threshold = threshold
        self.best = np.inf
        self.num_bad_epochs = 0

    def step(self, loss: float) -> float:
        if np.isfinite(loss) and loss < self.best - self.threshold:
            self.best = loss
            self.num_bad_epochs = 0
        else:
            self.num_bad_epochs += 1

        if self.num_bad_epochs >= self.patience:
            self.lr *= self.factor
            self.num_bad_epochs = 0
            logger.debug(f"Plateau reached, learning rate reduced to {self.lr:.3g}")
        return self.lr


@dataclass
class TrainResult:
    model: Trainable
    history: List[EpochMetrics] = field(default_factory=list)
    diverged: bool = False
    pruned: bool = False


def evaluate(model: Trainable, dataset: Dataset) -> Tuple[float, float]:
    """Mean cross-entropy and argmax accuracy (lowest class index wins ties)."""
    if len(dataset) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    logits = model.logits(dataset.features)
    mean_loss = float(cross_entropy(logits, dataset.labels).mean())
    accuracy = float(np.mean(np.argmax(logits, axis=-1) == dataset.labels))
    return mean_loss, accuracy


def train(
    model: Trainable,
    train_set: Dataset,
    val_set: Dataset,
    config: TrainConfig,
    observer: Optional[Observer] = None,
) -> TrainResult:
    if config.max_epochs == 0:
        return TrainResult(model=model)
    if len(train_set) == 0:
        raise ValueError("training set is empty")

    rng = np.random.default_rng(config.seed)
    scheduler = ReduceLROnPlateau(
        config.lr0, config.plateau_factor, config.plateau_patience, config.plateau_threshold
    )
    params = model.get_params()
    moments = AdamMoments.zeros_like(params)
    result = TrainResult(model=model)
    t = 0

    for epoch in range(1, config.max_epochs + 1):
        lr = scheduler.lr
        order = rng.permutation(len(train_set))
        loss_sum = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = order[start : start + config.batch_size]
            batch_loss, grads = result.model.loss_and_grads(
                train_set.features[batch], train_set.labels[batch], config.gradient_method
            )
            loss_sum += batch_loss * len(batch)
            t += 1
            params, moments = adamw_step(params, grads, moments, t, lr, config.weight_decay)
            result.model = result.model.with_params(params)

        train_loss = loss_sum / len(order)
        val_loss, val_acc = evaluate(result.model, val_set)
        diverged = not (np.isfinite(train_loss) and np.isfinite(val_loss)) or val_loss > config.divergence_threshold
        metrics = EpochMetrics(
            epoch=epoch, train_loss=train_loss, val_loss=val_loss, val_acc=val_acc, lr=lr, diverged=diverged
        )
        result.history.append(metrics)
        logger.debug(
            f"epoch {epoch}: train_loss={train_loss:.4f} val_loss={val_loss:.4f} val_acc={val_acc:.3f} lr={lr:.3g}"
        )

        if diverged:
            logger.warning(f"Training diverged at epoch {epoch} (val_loss={val_loss})")
            result.diverged = True
            break
        scheduler.step(train_loss)
        if observer is not None and observer(metrics) == ObserverDecision.PRUNE:
            result.pruned = True
            break

    return result


def history_to_csv(history: List[EpochMetrics], path: Union[str, Path]) -> None:
    frame = pd.DataFrame([metrics.model_dump() for metrics in history], columns=HISTORY_COLUMNS)
    frame.to_csv(path, index=False, lineterminator="\n")
    logger.info(f"Wrote {len(history)} epochs of metrics to {path}")
