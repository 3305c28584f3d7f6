"""Single-row CGP genotypes with optional recurrent connections.

Addresses ``0 .. n_inputs-1`` are the program inputs and
``n_inputs .. n_inputs+n_nodes-1`` the function nodes. Each node carries three
genes ``(function, conn0, conn1)``; one extra output gene names the address
whose value is the program output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ..errors import ConfigError
from .functions import DEFAULT_FUNCTIONS, FunctionSet


@dataclass(eq=False)
class Genotype:
    n_inputs: int
    n_nodes: int
    genes: np.ndarray
    output: int
    recurrent: bool = False
    functions: FunctionSet = field(default=DEFAULT_FUNCTIONS)

    def __post_init__(self):
        self.genes = np.asarray(self.genes, dtype=np.int64).reshape(self.n_nodes, 3)
        self.output = int(self.output)

    def __eq__(self, other):
        if not isinstance(other, Genotype):
            return NotImplemented
        return (
            self.n_inputs == other.n_inputs
            and self.n_nodes == other.n_nodes
            and self.output == other.output
            and self.recurrent == other.recurrent
            and self.functions == other.functions
            and np.array_equal(self.genes, other.genes)
        )

    @property
    def n_addresses(self) -> int:
        return self.n_inputs + self.n_nodes

    @property
    def n_genes(self) -> int:
        return 3 * self.n_nodes + 1

    def copy(self) -> Genotype:
        return Genotype(self.n_inputs, self.n_nodes, self.genes.copy(), self.output, self.recurrent, self.functions)

    def validate(self) -> None:
        if self.n_inputs < 1 or self.n_nodes < 1:
            raise ConfigError("genotype needs at least one input and one node")
        funcs, conns = self.genes[:, 0], self.genes[:, 1:]
        if funcs.min() < 0 or funcs.max() >= len(self.functions):
            raise ConfigError("function gene out of range")
        if conns.min() < 0 or conns.max() >= self.n_addresses:
            raise ConfigError("connection gene out of range")
        if not 0 <= self.output < self.n_addresses:
            raise ConfigError("output gene out of range")
        if not self.recurrent:
            limit = self.n_inputs + np.arange(self.n_nodes)[:, None]
            if (conns >= limit).any():
                raise ConfigError("feed-forward genotype has a connection to itself or a later node")

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        data = {
            "n_inputs": self.n_inputs,
            "n_nodes": self.n_nodes,
            "genes": self.genes.tolist(),
            "output": self.output,
            "recurrent": self.recurrent,
        }
        if self.functions != DEFAULT_FUNCTIONS:
            data["functions"] = list(self.functions.names)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> Genotype:
        try:
            functions = FunctionSet(tuple(data["functions"])) if "functions" in data else DEFAULT_FUNCTIONS
            g = cls(int(data["n_inputs"]), int(data["n_nodes"]), np.array(data["genes"], dtype=np.int64),
                    int(data["output"]), bool(data["recurrent"]), functions)
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"malformed genotype: {exc}") from None
        g.validate()
        return g

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> Genotype:
        return cls.from_dict(json.loads(text))


@njit(cache=True)
def _reachable(genes, n_inputs, output):
    mark = np.zeros(genes.shape[0], dtype=np.bool_)
    stack = np.empty(2 * genes.shape[0] + 1, dtype=np.int64)
    stack[0] = output
    top = 1
    while top > 0:
        top -= 1
        addr = stack[top]
        if addr < n_inputs or mark[addr - n_inputs]:
            continue
        mark[addr - n_inputs] = True
        stack[top] = genes[addr - n_inputs, 1]
        stack[top + 1] = genes[addr - n_inputs, 2]
        top += 2
    return mark


def active_nodes(genotype: Genotype) -> list[int]:
    """Node addresses reachable backwards from the output gene, ascending.

    Works for cyclic (recurrent) graphs too: each node is visited once.
    """
    mark = _reachable(genotype.genes, genotype.n_inputs, genotype.output)
    return (np.flatnonzero(mark) + genotype.n_inputs).tolist()


def used_inputs(genotype: Genotype, active: list[int] | None = None) -> set[int]:
    """Input addresses read by an active node or by the output gene."""
    if active is None:
        active = active_nodes(genotype)
    n_in = genotype.n_inputs
    used = {genotype.output} if genotype.output < n_in else set()
    for addr in active:
        for c in genotype.genes[addr - n_in, 1:]:
            if c < n_in:
                used.add(int(c))
    return used


def _resample(genes: np.ndarray, positions: np.ndarray, n_inputs: int, n_functions: int,
              recurrence_probability: float, rng: np.random.Generator) -> None:
    """Redraw the flat gene positions ``positions`` (index into ``genes.ravel()``) in place.

    A connection gene of node ``i`` is drawn from the full address range with
    probability ``recurrence_probability``, otherwise from ``[0, n_inputs + i)``.
    """
    n_nodes = genes.shape[0]
    node, slot = np.divmod(positions, 3)
    u = rng.random(len(positions))
    r = rng.random(len(positions))
    full = r < recurrence_probability
    hi = np.where(slot == 0, n_functions, np.where(full, n_inputs + n_nodes, n_inputs + node))
    genes.ravel()[positions] = (u * hi).astype(np.int64)


def random_genotype(config, n_inputs: int, rng: np.random.Generator) -> Genotype:
    if n_inputs < 1:
        raise ConfigError("n_inputs must be >= 1")
    n_nodes = config.n_nodes
    functions = config.functions
    genes = np.zeros((n_nodes, 3), dtype=np.int64)
    _resample(genes, np.arange(3 * n_nodes), n_inputs, len(functions), config.recurrence_probability, rng)
    output = int(rng.random() * (n_inputs + n_nodes))
    return Genotype(n_inputs, n_nodes, genes, output, config.recurrence_probability > 0, functions)


def mutation_mask(n_genes: int, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Which genes to redraw: independent Bernoulli(rate) per gene, output gene last."""
    return rng.random(n_genes) < rate


def mutate(parent: Genotype, rate: float, rng: np.random.Generator,
           recurrence_probability: float = 0.0) -> Genotype:
    """Point mutation: each gene is redrawn from its legal range with probability ``rate``."""
    if not 0.0 < rate <= 1.0:
        raise ConfigError(f"mutation rate must be in (0, 1], got {rate}")
    if recurrence_probability > 0 and not parent.recurrent:
        raise ConfigError("recurrent mutation of a feed-forward genotype")
    child = parent.copy()
    hits = mutation_mask(parent.n_genes, rate, rng)
    positions = np.flatnonzero(hits[:-1])
    if len(positions):
        _resample(child.genes, positions, parent.n_inputs, len(parent.functions), recurrence_probability, rng)
    if hits[-1]:
        child.output = int(rng.random() * parent.n_addresses)
    return child
