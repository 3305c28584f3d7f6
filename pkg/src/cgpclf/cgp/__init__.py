"""Cartesian Genetic Programming classifiers (feed-forward and recurrent)."""

from .evaluate import Program, evaluate_batch, evaluate_reference, evaluate_sequential, evaluate_static, predict_outputs
from .evolve import (
    Accuracy,
    EvolutionConfig,
    EvolutionResult,
    NegativeAbsError,
    evolve,
    evolve_arrays,
    fitness,
    predict,
)
from .functions import DEFAULT_FUNCTIONS, FunctionSet
from .genotype import Genotype, active_nodes, mutate, random_genotype, used_inputs

__all__ = [
    "Accuracy", "DEFAULT_FUNCTIONS", "EvolutionConfig", "EvolutionResult", "FunctionSet", "Genotype",
    "NegativeAbsError", "Program", "active_nodes", "evaluate_batch", "evaluate_reference",
    "evaluate_sequential", "evaluate_static", "evolve", "evolve_arrays", "fitness", "mutate",
    "predict", "predict_outputs", "random_genotype", "used_inputs",
]
