"""Tree-structured Parzen estimator over the ansatz search space.

Numeric parameters get truncated-Gaussian mixtures. ``lr0`` is modeled in log10 and
scored by density; integers are scored by the mixture mass over [k - 0.5, k + 0.5].
Categoricals get add-one smoothed frequencies. Candidates are drawn from the good-set
model and ranked by l(x)/g(x).
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
from scipy.special import logsumexp
from scipy.stats import truncnorm

from ..models import SearchSpace, TrialConfig, TrialRecord, TrialStatus

logger = logging.getLogger(__name__)

N_STARTUP = 10
GAMMA = 0.25
N_CANDIDATES = 24
MIN_BANDWIDTH_FRACTION = 0.1


def sample_uniform(space: SearchSpace, rng: np.random.Generator) -> TrialConfig:
    embedding = space.embeddings[int(rng.integers(len(space.embeddings)))]
    variational = space.variationals[int(rng.integers(len(space.variationals)))]
    n = int(rng.integers(space.n_range[0], space.n_range[1] + 1))
    L = int(rng.integers(space.L_range[0], space.L_range[1] + 1))
    log_low, log_high = np.log10(space.lr0_range)
    lr0 = _clip(10.0 ** rng.uniform(log_low, log_high), *space.lr0_range)
    return TrialConfig(embedding=embedding, variational=variational, n=n, L=L, lr0=lr0)


def _clip(value: float, low: float, high: float) -> float:
    return float(min(max(value, low), high))


def categorical_weights(choices: Sequence[str], observed: Sequence[str]) -> np.ndarray:
    """(count + 1) / (N + K) per choice; values outside ``choices`` are ignored."""
    counts = np.array([sum(1 for value in observed if value == choice) for choice in choices], dtype=np.float64)
    return (counts + 1.0) / (counts.sum() + len(choices))


@dataclass
class ParzenEstimator:
    """Equal-weight mixture of Gaussians truncated to [low, high]."""

    points: np.ndarray
    low: float
    high: float

    def __post_init__(self) -> None:
        self.points = np.asarray(self.points, dtype=np.float64)

    @property
    def bandwidth(self) -> float:
        width = self.high - self.low
        return width * max(MIN_BANDWIDTH_FRACTION, 1.0 / max(len(self.points), 1))

    def _bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        sigma = self.bandwidth
        return (self.low - self.points) / sigma, (self.high - self.points) / sigma

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.high == self.low:
            return np.full(size, self.low)
        if len(self.points) == 0:
            return rng.uniform(self.low, self.high, size=size)
        a, b = self._bounds()
        component = rng.integers(len(self.points), size=size)
        return truncnorm.rvs(
            a[component], b[component], loc=self.points[component], scale=self.bandwidth, random_state=rng
        )

    def log_pdf(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self.high == self.low:
            return np.zeros_like(x)
        if len(self.points) == 0:
            return np.full_like(x, -np.log(self.high - self.low))
        a, b = self._bounds()
        per_component = truncnorm.logpdf(x[:, None], a, b, loc=self.points, scale=self.bandwidth)
        return logsumexp(per_component, axis=1) - np.log(len(self.points))

    def log_mass(self, centers: np.ndarray, half_width: float = 0.5) -> np.ndarray:
        """Log probability of the cells [c - half_width, c + half_width] clipped to [low, high]."""
        centers = np.asarray(centers, dtype=np.float64)
        lower = np.clip(centers - half_width, self.low, self.high)
        upper = np.clip(centers + half_width, self.low, self.high)
        if self.high == self.low:
            return np.zeros_like(centers)
        if len(self.points) == 0:
            return np.log(np.maximum((upper - lower) / (self.high - self.low), np.finfo(float).tiny))
        a, b = self._bounds()

        def cdf(x: np.ndarray) -> np.ndarray:
            return truncnorm.cdf(x[:, None], a, b, loc=self.points, scale=self.bandwidth)

        mass = (cdf(upper) - cdf(lower)).mean(axis=1)
        return np.log(np.maximum(mass, np.finfo(float).tiny))


def split_history(history: Sequence[TrialRecord], gamma: float = GAMMA) -> Tuple[List[TrialRecord], List[TrialRecord]]:
    """Good set: the best ceil(gamma * N) trials by (objective, id); bad set: the rest."""
    ranked = sorted(history, key=lambda record: (record.objective(), record.id))
    n_good = max(1, math.ceil(gamma * len(ranked)))
    return ranked[:n_good], ranked[n_good:]


def _numeric_bounds(space: SearchSpace) -> Dict[str, Tuple[float, float]]:
    return {
        "n": (space.n_range[0] - 0.5, space.n_range[1] + 0.5),
        "L": (space.L_range[0] - 0.5, space.L_range[1] + 0.5),
        "lr0": tuple(np.log10(space.lr0_range)),
    }


def _numeric_value(config: TrialConfig, name: str) -> float:
    value = getattr(config, name)
    return float(np.log10(value)) if name == "lr0" else float(value)


def _to_config_value(name: str, x: float, space: SearchSpace) -> Union[int, float]:
    if name == "lr0":
        return _clip(10.0**x, *space.lr0_range)
    low, high = space.n_range if name == "n" else space.L_range
    return int(min(max(int(np.rint(x)), low), high))


def tpe_suggest(
    history: Sequence[TrialRecord],
    space: SearchSpace,
    rng: np.random.Generator,
    n_startup: int = N_STARTUP,
    gamma: float = GAMMA,
    n_candidates: int = N_CANDIDATES,
) -> TrialConfig:
    finished = [record for record in history if record.status != TrialStatus.RUNNING]
    if sum(1 for record in finished if record.status != TrialStatus.PRUNED) < n_startup:
        return sample_uniform(space, rng)

    good, bad = split_history(finished, gamma)
    score = np.zeros(n_candidates)
    candidate: Dict[str, list] = {}

    for name, choices in (
        ("embedding", [e.value for e in space.embeddings]),
        ("variational", [v.value for v in space.variationals]),
    ):
        w_good = categorical_weights(choices, [getattr(r.config, name) for r in good])
        w_bad = categorical_weights(choices, [getattr(r.config, name) for r in bad])
        picks = rng.choice(len(choices), size=n_candidates, p=w_good)
        score += np.log(w_good[picks]) - np.log(w_bad[picks])
        candidate[name] = [choices[i] for i in picks]

    for name, (low, high) in _numeric_bounds(space).items():
        below = ParzenEstimator(np.array([_numeric_value(r.config, name) for r in good]), low, high)
        above = ParzenEstimator(np.array([_numeric_value(r.config, name) for r in bad]), low, high)
        draws = below.sample(rng, n_candidates)
        values = [_to_config_value(name, x, space) for x in draws]
        if name == "lr0":
            at = np.log10(values)
            score += below.log_pdf(at) - above.log_pdf(at)
        else:
            at = np.asarray(values, dtype=np.float64)
            score += below.log_mass(at) - above.log_mass(at)
        candidate[name] = values

    best = int(np.argmax(score))
    return TrialConfig(**{name: values[best] for name, values in candidate.items()})


def suggest(
    sampler: str, history: Sequence[TrialRecord], space: SearchSpace, rng: np.random.Generator
) -> TrialConfig:
    if sampler == "tpe":
        return tpe_suggest(history, space, rng)
    if sampler == "random":
        return sample_uniform(space, rng)
    raise ValueError(f"unknown sampler {sampler!r}, expected 'tpe' or 'random'")

