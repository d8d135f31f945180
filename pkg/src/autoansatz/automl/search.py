"""AutoAnsatz search driver: suggest, train under the pruner, append to the store."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Callable, List, Optional

import numpy as np

from ..background_tasks import SearchData, run_trial_task
from ..data import Dataset, Standardizer, split_by_session, split_validation, subsample
from ..models import FinalMetrics, SearchSettings, SearchSpace, TrainConfig, TrialConfig, TrialRecord, TrialStatus
from ..qnn import qnn_trainable_count
from ..trial_store import TrialStore
from .pruner import hyperband_should_prune, rung_schedule
from .tpe import suggest

logger = logging.getLogger(__name__)


def trial_seed(master_seed: int, trial_id: int) -> int:
    """Independent per-trial seed from the (master seed, trial id) pair."""
    return int(np.random.SeedSequence([master_seed, trial_id]).generate_state(1)[0])


def sampler_rng(master_seed: int, trial_id: int) -> np.random.Generator:
    return np.random.default_rng([master_seed, trial_id, 1])


def prepare_search_data(dataset: Dataset, settings: SearchSettings) -> SearchData:
    """One split per search: training sessions minus a seeded validation share, test sessions held out."""
    train_all, test = split_by_session(dataset)
    if settings.train_fraction < 1.0:
        size = max(2, int(round(settings.train_fraction * len(train_all))))
        train_all = subsample(train_all, size, settings.seed)
    train, val = split_validation(train_all, settings.validation_fraction, settings.seed)
    logger.info(f"Search split: {len(train)} train, {len(val)} validation, {len(test)} test rows")
    return SearchData(train=train, val=val, test=test, scaler=Standardizer.fit(train.features))


@dataclass
class SearchResult:
    best: Optional[TrialRecord]
    records: List[TrialRecord]
    pruned_fraction: float


def run_search(
    space: SearchSpace,
    n_trials: int,
    dataset: Dataset,
    base_config: TrainConfig,
    store: TrialStore,
    settings: Optional[SearchSettings] = None,
    sampler: str = "tpe",
) -> SearchResult:
    """Run trials until the store holds ``n_trials`` records.

    Trials go in waves of ``settings.workers``: every trial of a wave is suggested and
    pruned against the store as it stood before the wave, and the wave's records are
    appended in id order, so the store does not depend on thread timing.
    """
    if n_trials < 1:
        raise ValueError(f"n_trials must be at least 1, got {n_trials}")
    settings = settings or SearchSettings()
    base_config = base_config.model_copy(update={"max_epochs": settings.max_epochs})
    data = prepare_search_data(dataset, settings)
    rungs = rung_schedule(settings.max_epochs)

    if store.records:
        logger.info(f"Resuming search at trial {store.next_id()} ({len(store.records)} trials in store)")

    with ThreadPoolExecutor(max_workers=settings.workers) as executor:
        while len(store.records) < n_trials:
            snapshot = list(store.records)
            first = store.next_id()
            wave = range(first, first + min(settings.workers, n_trials - len(snapshot)))
            should_prune = partial(hyperband_should_prune, peers=snapshot, rung_epochs=rungs)
            configs = [suggest(sampler, snapshot, space, sampler_rng(settings.seed, trial_id)) for trial_id in wave]
            futures = [
                executor.submit(
                    run_trial_task,
                    trial_id,
                    config,
                    trial_seed(settings.seed, trial_id),
                    data,
                    base_config,
                    should_prune,
                    store,
                    settings.record_wall_time,
                )
                for trial_id, config in zip(wave, configs)
            ]
            for future in futures:
                store.append(future.result())

    best = store.best_completed()
    if best is None:
        logger.warning("No trial completed; every trial was pruned or diverged")
    else:
        logger.info(f"Best trial {best.id}: val_loss={best.final.val_loss} config={best.config.model_dump()}")
    return SearchResult(best=best, records=list(store.records), pruned_fraction=store.pruned_fraction())


def optimize_objective(
    objective: Callable[[TrialConfig], float],
    space: SearchSpace,
    n_trials: int,
    seed: int = 0,
    sampler: str = "tpe",
) -> List[TrialRecord]:
    """Ask/tell loop over a closed-form objective; every trial completes after one evaluation."""
    records: List[TrialRecord] = []
    for trial_id in range(n_trials):
        config = suggest(sampler, records, space, sampler_rng(seed, trial_id))
        value = float(objective(config))
        records.append(
            TrialRecord(
                id=trial_id,
                config=config,
                seed=trial_seed(seed, trial_id),
                epochs=[value],
                status=TrialStatus.COMPLETED,
                final=FinalMetrics(val_loss=value),
                param_count=qnn_trainable_count(config.to_ansatz_spec()),
            )
        )
    return records
