"""Append-only trial store persisted as JSON lines, plus live per-trial progress."""

import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import jsonlines

from .models import TrialProgress, TrialRecord, TrialStatus

logger = logging.getLogger(__name__)


@dataclass
class TrialStore:
    """Trial records in id order; ``path`` is None for an in-memory store."""

    path: Optional[Path] = None
    records: List[TrialRecord] = field(default_factory=list)
    progress: Dict[int, TrialProgress] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @classmethod
    def open(cls, path: Union[str, Path], repair: bool = True) -> "TrialStore":
        """Replay ``path`` (creating nothing if it does not exist yet)."""
        store = cls(path=Path(path))
        if store.path.exists():
            store.records = replay(store.path, repair=repair)
        return store

    def _update_or_create(
        self, store: dict, key: int, value: TrialProgress, defaults: TrialProgress
    ) -> TrialProgress:
        existing = store.get(key)
        base = existing.model_dump() if existing else defaults.model_dump()
        updates = value.model_dump(exclude_unset=True)
        store[key] = TrialProgress(**{**base, **updates})
        return store[key]

    def set_progress(self, trial_id: int, progress: TrialProgress) -> None:
        with self._lock:
            merged = self._update_or_create(
                self.progress, trial_id, progress, TrialProgress(trial_id=trial_id, status=TrialStatus.RUNNING)
            )
        logger.info(describe_progress(merged))

    def get_progress(self, trial_id: int) -> Optional[TrialProgress]:
        return self.progress.get(trial_id)

    def next_id(self) -> int:
        return self.records[-1].id + 1 if self.records else 0

    def append(self, record: TrialRecord) -> None:
        """Persist one finished trial; ids must keep increasing."""
        if self.records and record.id <= self.records[-1].id:
            raise ValueError(f"trial id {record.id} does not follow {self.records[-1].id}")
        if self.path is not None:
            with jsonlines.open(self.path, mode="a") as writer:
                writer.write(record.model_dump())
        self.records.append(record)
        with self._lock:
            self.progress.pop(record.id, None)

    def completed(self) -> List[TrialRecord]:
        return [record for record in self.records if record.status == TrialStatus.COMPLETED]

    def best_completed(self) -> Optional[TrialRecord]:
        """Completed trial with the lowest validation loss, lowest id on ties."""
        completed = self.completed()
        if not completed:
            return None
        return min(completed, key=lambda record: (record.objective(), record.id))

    def pruned_fraction(self) -> float:
        if not self.records:
            return 0.0
        return sum(1 for record in self.records if record.status == TrialStatus.PRUNED) / len(self.records)


def replay(path: Union[str, Path], repair: bool = True) -> List[TrialRecord]:
    """Rebuild the records from a store file.

    A torn final line (an interrupted append) is dropped with a warning and, with
    ``repair``, cut from the file so later appends start on a clean line. Damage
    anywhere else is an error.
    """
    path = Path(path)
    lines = path.read_text().splitlines()
    while lines and not lines[-1].strip():
        lines.pop()

    records: List[TrialRecord] = []
    torn = False
    with jsonlines.open(path) as reader:
        try:
            for obj in reader.iter(type=dict, skip_empty=True):
                records.append(TrialRecord.model_validate(obj))
        except jsonlines.InvalidLineError as e:
            if e.lineno != len(lines):
                raise ValueError(f"{path}: line {e.lineno}: {e}") from e
            logger.warning(f"{path}: dropping torn final line {e.lineno}")
            torn = True

    for previous, record in zip(records, records[1:]):
        if record.id <= previous.id:
            raise ValueError(f"{path}: trial id {record.id} does not follow {previous.id}")

    if torn and repair:
        with jsonlines.open(path, mode="w") as writer:
            writer.write_all(record.model_dump() for record in records)
    logger.info(f"Replayed {len(records)} trials from {path}")
    return records


def describe_progress(progress: TrialProgress) -> str:
    """One log line for a running trial."""
    parts = [f"Trial {progress.trial_id}"]
    if progress.status is not None:
        parts.append(progress.status.value)
    if progress.epoch is not None:
        parts.append(f"epoch {progress.epoch}")
    if progress.val_loss is not None:
        parts.append(f"val_loss {progress.val_loss:.4f}")
    if progress.message:
        parts.append(progress.message)
    head, *rest = parts
    return f"{head}: {', '.join(rest)}" if rest else head
