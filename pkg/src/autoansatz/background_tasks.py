"""
Per-trial worker: build the sampled model, train it under the pruner and report a record.
"""

import logging
import time
from dataclasses import dataclass
from typing import Callable, List

import numpy as np
import psutil

from .data import Dataset, Standardizer
from .models import (
    EpochMetrics,
    FinalMetrics,
    TrainConfig,
    TrialConfig,
    TrialProgress,
    TrialRecord,
    TrialStatus,
)
from .qnn import init_model, qnn_trainable_count
from .train import ObserverDecision, evaluate, train
from .trial_store import TrialStore

logger = logging.getLogger(__name__)


def get_process_memory_mb() -> float:
    """Get current process memory usage in MB."""
    process = psutil.Process()
    memory_info = process.memory_info()
    return round(memory_info.rss / (1024 * 1024), 2)


@dataclass(frozen=True)
class SearchData:
    """The fixed train/validation/test split shared by every trial of one search."""

    train: Dataset
    val: Dataset
    test: Dataset
    scaler: Standardizer


def run_trial_task(
    trial_id: int,
    config: TrialConfig,
    seed: int,
    data: SearchData,
    base_config: TrainConfig,
    should_prune: Callable[[TrialRecord], bool],
    store: TrialStore,
    record_wall_time: bool = False,
) -> TrialRecord:
    """Train one sampled configuration; never raises for a bad trial.

    Args:
        trial_id: Id the record will carry in the store
        config: Sampled hyperparameters
        seed: Per-trial seed for weight init, shuffling and the random template
        data: Shared dataset split
        base_config: Fixed training settings; lr0 and seed are overridden per trial
        should_prune: Pruning rule applied to the partial record after every epoch
        store: Receives live progress updates
        record_wall_time: Store measured wall time instead of 0.0
    """
    started = time.perf_counter()
    spec = config.to_ansatz_spec(structure_seed=seed)
    record = TrialRecord(
        id=trial_id,
        config=config,
        seed=seed,
        status=TrialStatus.RUNNING,
        param_count=qnn_trainable_count(spec),
    )
    epochs: List[float] = []

    def observe(metrics: EpochMetrics) -> ObserverDecision:
        epochs.append(metrics.val_loss)
        store.set_progress(trial_id, TrialProgress(epoch=metrics.epoch, val_loss=metrics.val_loss))
        partial = record.model_copy(update={"epochs": list(epochs)})
        if should_prune(partial):
            return ObserverDecision.PRUNE
        return ObserverDecision.CONTINUE

    try:
        memory_before = get_process_memory_mb()
        store.set_progress(
            trial_id,
            TrialProgress(trial_id=trial_id, status=TrialStatus.RUNNING, message=f"Training {config.model_dump()}"),
        )

        model = init_model(spec, seed, data.scaler)
        train_config = base_config.model_copy(update={"lr0": config.lr0, "seed": seed})
        result = train(model, data.train, data.val, train_config, observer=observe)

        if result.diverged:
            # The diverging epoch never reaches the observer
            epochs.append(result.history[-1].val_loss)
            status = TrialStatus.DIVERGED
        elif result.pruned:
            status = TrialStatus.PRUNED
        else:
            status = TrialStatus.COMPLETED

        final = FinalMetrics()
        if result.history:
            final = FinalMetrics(val_loss=result.history[-1].val_loss, val_acc=result.history[-1].val_acc)
        if status == TrialStatus.COMPLETED:
            final.test_acc = evaluate(result.model, data.test)[1]

        memory_after = get_process_memory_mb()
        memory_used = np.around(memory_after - memory_before, 2).item()
        logger.info(
            f"Trial {trial_id} {status.value} after {len(epochs)} epochs "
            f"(val_loss={final.val_loss}, memory used: {memory_used} MB)"
        )
        record = record.model_copy(update={"epochs": epochs, "status": status, "final": final})

    except (ValueError, ArithmeticError) as e:
        logger.warning(f"Trial {trial_id} failed numerically: {e}")
        record = record.model_copy(update={"epochs": epochs, "status": TrialStatus.DIVERGED})
    except Exception as e:
        logger.error(f"Trial {trial_id} failed: {e}", exc_info=True)
        record = record.model_copy(update={"epochs": epochs, "status": TrialStatus.DIVERGED})

    if record_wall_time:
        record = record.model_copy(update={"wall_s": round(time.perf_counter() - started, 3)})
    return TrialRecord.model_validate(record.model_dump())
