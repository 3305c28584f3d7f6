"""(1 + lambda) evolution strategy over CGP genotypes."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from ..dataset import SEQUENTIAL, Dataset, Layout, Sample
from ..errors import ConfigError
from .functions import DEFAULT_FUNCTIONS, FunctionSet
from .genotype import Genotype, active_nodes, mutate, random_genotype
from .evaluate import Program, predict_outputs

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvolutionConfig:
    n_nodes: int = 50
    mutation_rate: float = 0.1
    max_iterations: int = 15000
    offspring: int = 4
    recurrence_probability: float = 0.0
    decision_threshold: float = 0.0
    static_update_passes: int = 1
    seed: int = 0
    functions: FunctionSet = field(default=DEFAULT_FUNCTIONS)

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ConfigError("n_nodes must be >= 1")
        if not 0.0 < self.mutation_rate <= 1.0:
            raise ConfigError(f"mutation_rate must be in (0, 1], got {self.mutation_rate}")
        if self.max_iterations < 0:
            raise ConfigError("max_iterations must be >= 0")
        if self.offspring < 1:
            raise ConfigError("offspring (lambda) must be >= 1")
        if not 0.0 <= self.recurrence_probability <= 1.0:
            raise ConfigError("recurrence_probability must be in [0, 1]")
        if self.static_update_passes < 1:
            raise ConfigError("static_update_passes must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")

    @classmethod
    def rcgp(cls, **overrides) -> EvolutionConfig:
        """Defaults with 10% recurrent connections."""
        return cls(**{"recurrence_probability": 0.1, **overrides})

    def replace(self, **changes) -> EvolutionConfig:
        return replace(self, **changes)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["functions"] = list(self.functions.names)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> EvolutionConfig:
        data = dict(data)
        if "functions" in data:
            data["functions"] = FunctionSet(tuple(data["functions"]))
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(f"evolution config: {exc}") from None


# --------------------------------------------------------------------------- #
# Objectives: higher is better, ``perfect`` ends the search early.
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class Accuracy:
    threshold: float = 0.0
    perfect: float = 1.0

    def __call__(self, outputs: np.ndarray, targets: np.ndarray) -> float:
        return float(np.count_nonzero(predict_outputs(outputs, self.threshold) == targets)) / len(targets)


@dataclass(frozen=True)
class NegativeAbsError:
    """Negated mean absolute error; scores exactly 0.0 once every error is below ``tolerance``."""

    tolerance: float = 1e-9
    perfect: float = 0.0

    def __call__(self, outputs: np.ndarray, targets: np.ndarray) -> float:
        err = np.abs(outputs - targets)
        if not np.isfinite(err).all():
            return -np.inf
        if err.max() < self.tolerance:
            return 0.0
        return -float(err.mean())


# --------------------------------------------------------------------------- #
# Classification helpers
# --------------------------------------------------------------------------- #


def _batch(samples) -> tuple[np.ndarray, np.ndarray, bool]:
    if isinstance(samples, Dataset):
        return samples.features, samples.labels, samples.layout.kind == SEQUENTIAL
    raise TypeError("expected a Dataset")


def predict(genotype: Genotype, sample: Sample, layout: Layout, threshold: float = 0.0, passes: int = 1) -> int:
    X = np.asarray(sample.features, dtype=np.float64).reshape(1, *layout.shape)
    out = Program(genotype).run(X, layout.kind == SEQUENTIAL, passes)
    return int(predict_outputs(out, threshold)[0])


def fitness(genotype: Genotype, samples: Dataset, threshold: float = 0.0, passes: int = 1) -> float:
    """Fraction of ``samples`` classified correctly."""
    if len(samples) == 0:
        raise ValueError("fitness of an empty sample set is undefined")
    X, y, sequential = _batch(samples)
    return Accuracy(threshold)(Program(genotype).run(X, sequential, passes), y)


# --------------------------------------------------------------------------- #
# Evolution
# --------------------------------------------------------------------------- #


@dataclass
class EvolutionResult:
    best_genotype: Genotype
    best_train_accuracy: float
    best_validation_accuracy: float | None
    history: list[tuple[int, float]]
    iterations: int
    evaluations: int
    final_genotype: Genotype
    final_train_accuracy: float

    def summary(self) -> dict:
        return {
            "best_train_accuracy": self.best_train_accuracy,
            "best_validation_accuracy": self.best_validation_accuracy,
            "iterations": self.iterations,
            "evaluations": self.evaluations,
            "final_train_accuracy": self.final_train_accuracy,
            "history": [list(h) for h in self.history],
        }


def _phenotype_key(genotype: Genotype, active: list[int]) -> bytes:
    rows = genotype.genes[np.asarray(active, dtype=np.int64) - genotype.n_inputs]
    return genotype.output.to_bytes(8, "little") + np.asarray(active, dtype=np.int64).tobytes() + rows.tobytes()


def evolve_arrays(X_train: np.ndarray, y_train: np.ndarray, X_val: np.ndarray | None, y_val: np.ndarray | None,
                  config: EvolutionConfig, sequential: bool = False, objective=None,
                  callback=None) -> EvolutionResult:
    """Run the search on raw ``(n, T, C)`` arrays.

    The parent is replaced by the best of its ``config.offspring`` mutants
    whenever that mutant scores at least as well (neutral drift). Offspring
    whose active subgraph is identical to the parent's inherit its score
    without re-evaluation. The returned ``best_genotype`` is the parent with
    the highest validation score seen during the run (latest wins ties), or
    the final parent if no validation data is given.

    ``callback(iteration, parent_score)``, if given, is called after every
    generation.
    """
    if len(X_train) == 0:
        raise ValueError("training set is empty")
    objective = objective or Accuracy(config.decision_threshold)
    passes = config.static_update_passes
    has_val = X_val is not None and len(X_val) > 0
    rng = np.random.default_rng(config.seed)
    n_inputs = X_train.shape[-1]

    def score(genotype, active, X, y):
        return objective(Program(genotype, active).run(X, sequential, passes), y)

    parent = random_genotype(config, n_inputs, rng)
    p_active = active_nodes(parent)
    p_key = _phenotype_key(parent, p_active)
    p_fit = score(parent, p_active, X_train, y_train)
    evaluations = 1
    history = [(0, p_fit)]

    best, best_fit = parent, p_fit
    best_val = score(parent, p_active, X_val, y_val) if has_val else None
    p_val = best_val

    iteration = 0
    while iteration < config.max_iterations and p_fit < objective.perfect:
        iteration += 1
        child_best = None
        for _ in range(config.offspring):
            child = mutate(parent, config.mutation_rate, rng, config.recurrence_probability)
            c_active = active_nodes(child)
            c_key = _phenotype_key(child, c_active)
            if c_key == p_key:
                c_fit = p_fit
            else:
                c_fit = score(child, c_active, X_train, y_train)
                evaluations += 1
            if child_best is None or c_fit > child_best[1]:
                child_best = (child, c_fit, c_active, c_key)
        child, c_fit, c_active, c_key = child_best
        if c_fit < p_fit:
            if callback is not None:
                callback(iteration, p_fit)
            continue
        if c_fit > p_fit:
            history.append((iteration, c_fit))
        changed = c_key != p_key
        parent, p_fit, p_active, p_key = child, c_fit, c_active, c_key
        if has_val:
            if changed:
                p_val = score(parent, p_active, X_val, y_val)
            if p_val >= best_val:
                best, best_fit, best_val = parent, p_fit, p_val
        else:
            best, best_fit = parent, p_fit
        if callback is not None:
            callback(iteration, p_fit)

    log.debug("evolution stopped after %d iterations, train score %.4f", iteration, p_fit)
    return EvolutionResult(best, best_fit, best_val, history, iteration, evaluations, parent, p_fit)


def evolve(train: Dataset, validation: Dataset | None, config: EvolutionConfig, n_inputs: int | None = None,
           objective=None, callback=None) -> EvolutionResult:
    """Evolve a binary classifier on ``train``, selecting the final model on ``validation``."""
    if n_inputs is not None and n_inputs != train.layout.n_inputs:
        raise ConfigError(f"n_inputs {n_inputs} does not match the dataset layout ({train.layout.n_inputs})")
    sequential = train.layout.kind == SEQUENTIAL
    X_val = validation.features if validation is not None else None
    y_val = validation.labels if validation is not None else None
    return evolve_arrays(train.features, train.labels, X_val, y_val, config, sequential, objective, callback)
