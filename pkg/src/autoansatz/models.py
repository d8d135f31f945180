import math
from enum import Enum
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

N_FEATURES = 36
N_CLASSES = 8
N_SESSIONS = 7
TRAIN_SESSIONS = (0, 1, 2, 3)
MAX_QUBITS = 20
MAX_LAYERS = 50


class EmbeddingKind(str, Enum):
    ANGLE = "angle"
    IQP = "iqp"


class VariationalKind(str, Enum):
    S2D = "s2d"
    QAOA = "qaoa"
    TTN = "ttn"
    MPS = "mps"
    STRONG = "strong"
    BASIC = "basic"
    RANDOM = "random"


class TrialStatus(str, Enum):
    RUNNING = "running"
    COMPLETED = "completed"
    PRUNED = "pruned"
    DIVERGED = "diverged"


class AnsatzSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    embedding: EmbeddingKind = EmbeddingKind.ANGLE
    variational: VariationalKind = VariationalKind.S2D
    n: int = Field(default=10, ge=2, le=MAX_QUBITS)
    L: int = Field(default=1, ge=1, le=MAX_LAYERS)

    # Only the random template reads this
    structure_seed: int = 0


class TrainConfig(BaseModel):
    batch_size: int = Field(default=100, ge=1)
    max_epochs: int = Field(default=100, ge=0)
    lr0: float = Field(default=0.02, gt=0)
    weight_decay: float = Field(default=1e-4, ge=0)
    plateau_factor: float = Field(default=0.5, gt=0, lt=1)
    plateau_patience: int = Field(default=10, ge=1)
    plateau_threshold: float = Field(default=1e-4, ge=0)
    divergence_threshold: float = Field(default=50.0, gt=0)
    gradient_method: Literal["adjoint", "parameter-shift"] = "adjoint"
    seed: int = 0


class EpochMetrics(BaseModel):
    epoch: int = Field(..., ge=1)
    train_loss: float
    val_loss: float
    val_acc: float = Field(..., ge=0, le=1)
    lr: float
    diverged: bool = False


class SynthConfig(BaseModel):
    # Samples per class per session
    per_class: int = Field(default=200, ge=1)
    separation: float = Field(default=3.0, ge=0)
    noise: float = Field(default=1.0, ge=0)
    session_shift: float = Field(default=0.5, ge=0)
    seed: int = 0


class SearchSpace(BaseModel):
    model_config = ConfigDict(frozen=True)

    embeddings: Tuple[EmbeddingKind, ...] = tuple(EmbeddingKind)
    variationals: Tuple[VariationalKind, ...] = tuple(VariationalKind)
    n_range: Tuple[int, int] = (5, 15)
    L_range: Tuple[int, int] = (1, 5)
    lr0_range: Tuple[float, float] = (1e-3, 1e-1)

    @model_validator(mode="after")
    def check_ranges(self) -> "SearchSpace":
        if not self.embeddings or not self.variationals:
            raise ValueError("categorical choices must not be empty")
        for name in ("n_range", "L_range", "lr0_range"):
            low, high = getattr(self, name)
            if low > high:
                raise ValueError(f"{name} has low {low} > high {high}")
        if self.n_range[0] < 2 or self.n_range[1] > MAX_QUBITS:
            raise ValueError(f"n_range must lie within [2, {MAX_QUBITS}]")
        if self.L_range[0] < 1:
            raise ValueError("L_range must start at 1 or above")
        if self.lr0_range[0] <= 0:
            raise ValueError("lr0_range must be positive")
        return self

    def contains(self, config: "TrialConfig") -> bool:
        return (
            config.embedding in [e.value for e in self.embeddings]
            and config.variational in [v.value for v in self.variationals]
            and self.n_range[0] <= config.n <= self.n_range[1]
            and self.L_range[0] <= config.L <= self.L_range[1]
            and self.lr0_range[0] <= config.lr0 <= self.lr0_range[1]
        )


PARAM_NAMES: Tuple[str, ...] = ("embedding", "variational", "n", "L", "lr0")
CATEGORICAL_PARAMS: Tuple[str, ...] = ("embedding", "variational")


class TrialConfig(BaseModel):
    model_config = ConfigDict(use_enum_values=True)

    embedding: EmbeddingKind
    variational: VariationalKind
    n: int = Field(..., ge=2, le=MAX_QUBITS)
    L: int = Field(..., ge=1, le=MAX_LAYERS)
    lr0: float = Field(..., gt=0)

    def to_ansatz_spec(self, structure_seed: int = 0) -> AnsatzSpec:
        return AnsatzSpec(
            embedding=EmbeddingKind(self.embedding),
            variational=VariationalKind(self.variational),
            n=self.n,
            L=self.L,
            structure_seed=structure_seed,
        )


class FinalMetrics(BaseModel):
    val_loss: Optional[float] = None
    val_acc: Optional[float] = None
    test_acc: Optional[float] = None


class TrialRecord(BaseModel):
    """One AutoAnsatz trial, serialized as one line of the trial store."""

    model_config = ConfigDict(use_enum_values=True)

    id: int = Field(..., ge=0)
    config: TrialConfig
    seed: int
    epochs: List[float] = Field(default_factory=list)
    status: TrialStatus = TrialStatus.RUNNING
    final: FinalMetrics = Field(default_factory=FinalMetrics)
    param_count: int = Field(..., ge=0)
    wall_s: float = 0.0

    def objective(self) -> float:
        """Final validation loss when completed, else the last observed epoch loss; inf if unusable."""
        if self.status == TrialStatus.COMPLETED and self.final.val_loss is not None:
            value = self.final.val_loss
        elif self.epochs:
            value = self.epochs[-1]
        else:
            return math.inf
        return value if math.isfinite(value) else math.inf


class SearchSettings(BaseModel):
    seed: int = 0
    max_epochs: int = Field(default=100, ge=1)
    workers: int = Field(default=1, ge=1)
    validation_fraction: float = Field(default=0.2, gt=0, lt=1)
    train_fraction: float = Field(default=1.0, gt=0, le=1)
    record_wall_time: bool = False


class TrialProgress(BaseModel):
    trial_id: Optional[int] = None
    status: Optional[TrialStatus] = None
    epoch: Optional[int] = None
    val_loss: Optional[float] = None
    message: Optional[str] = None


class ImportanceReport(BaseModel):
    scores: Dict[str, float]
    residual: float = Field(..., ge=0)
    n_trials: int
    seed: int = 0

    @model_validator(mode="after")
    def check_total(self) -> "ImportanceReport":
        if any(score < 0 for score in self.scores.values()):
            raise ValueError("importance scores must be non-negative")
        total = sum(self.scores.values()) + self.residual
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"importance scores and residual sum to {total}, expected 1")
        return self


class QnnCheckpoint(BaseModel):
    kind: Literal["qnn"] = "qnn"
    spec: AnsatzSpec
    w_in: List[List[float]]
    b_in: List[float]
    theta: List[float]
    w_out: List[List[float]]
    b_out: List[float]
    feature_mean: List[float]
    feature_scale: List[float]
    seed: int


class MlpCheckpoint(BaseModel):
    kind: Literal["mlp"] = "mlp"
    params: Dict[str, List[Any]]
    feature_mean: List[float]
    feature_scale: List[float]
    seed: int
