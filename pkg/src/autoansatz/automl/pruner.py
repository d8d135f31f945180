"""Single-bracket successive-halving pruner."""

import math
from typing import Sequence, Tuple

from ..models import TrialRecord, TrialStatus

ETA = 3


def rung_schedule(max_epochs: int, eta: int = ETA, min_resource: int = 1) -> Tuple[int, ...]:
    """Rung epochs ``min_resource * eta**k`` strictly below ``max_epochs``."""
    if eta < 2 or min_resource < 1:
        raise ValueError(f"need eta >= 2 and min_resource >= 1, got eta={eta}, min_resource={min_resource}")
    rungs = []
    epoch = min_resource
    while epoch < max_epochs:
        rungs.append(epoch)
        epoch *= eta
    return tuple(rungs)


RUNG_EPOCHS = rung_schedule(100)


def _loss_at(record: TrialRecord, epoch: int) -> float:
    value = record.epochs[epoch - 1]
    return value if math.isfinite(value) else math.inf


def hyperband_should_prune(
    trial: TrialRecord, peers: Sequence[TrialRecord], rung_epochs: Sequence[int] = RUNG_EPOCHS, eta: int = ETA
) -> bool:
    """Prune at a rung unless the trial ranks within the best ceil(k / eta) of the k trials that reached it.

    Ranking is by (loss at the rung, trial id); ``trial`` itself counts among the k.
    Diverged or non-finite trials are always pruned.
    """
    if not trial.epochs:
        raise ValueError(f"trial {trial.id} has no recorded epoch")
    if trial.status == TrialStatus.DIVERGED or not math.isfinite(trial.epochs[-1]):
        return True

    rung = len(trial.epochs)
    if rung not in rung_epochs:
        return False

    reached = [peer for peer in peers if peer.id != trial.id and len(peer.epochs) >= rung]
    ranked = sorted([trial, *reached], key=lambda record: (_loss_at(record, rung), record.id))
    rank = next(position for position, record in enumerate(ranked) if record.id == trial.id)
    return rank >= math.ceil(len(ranked) / eta)
