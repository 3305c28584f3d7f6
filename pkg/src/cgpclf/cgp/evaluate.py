"""Program evaluation.

Nodes are swept in ascending address order and write their result into a
per-sample state vector as they go. A connection to an earlier node therefore
sees the value computed in the current sweep, while a connection to the node
itself or to a later node (only possible in recurrent genotypes) sees the
value left by the previous sweep. State starts at 0.0 for every sample.

Static evaluation repeats the sweep ``passes`` times over one input vector.
Sequential evaluation performs one sweep per timestep row, so recurrent
connections carry information forward in time.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ..errors import InputError
from .functions import DIV_EPSILON, apply
from .genotype import Genotype, active_nodes


@njit(cache=True)
def _execute(codes, conns, active, out_addr, n_inputs, X, sweeps, out):
    n_samples, n_steps, _ = X.shape
    state = np.zeros(conns.shape[0])
    for s in range(n_samples):
        for k in range(active.shape[0]):
            state[active[k] - n_inputs] = 0.0
        for t in range(n_steps):
            for _ in range(sweeps):
                for k in range(active.shape[0]):
                    node = active[k] - n_inputs
                    a0 = conns[node, 0]
                    a1 = conns[node, 1]
                    x = X[s, t, a0] if a0 < n_inputs else state[a0 - n_inputs]
                    y = X[s, t, a1] if a1 < n_inputs else state[a1 - n_inputs]
                    op = codes[node]
                    if op == 0:
                        v = x + y
                    elif op == 1:
                        v = x - y
                    elif op == 2:
                        v = x * y
                    elif op == 3:
                        v = x if abs(y) < DIV_EPSILON else x / y
                    elif op == 4:
                        v = x if x < y else y
                    else:
                        v = x if x > y else y
                    state[node] = v
        if out_addr < n_inputs:
            out[s] = X[s, n_steps - 1, out_addr]
        else:
            out[s] = state[out_addr - n_inputs]
    return out


class Program:
    """A decoded genotype ready for repeated batch evaluation."""

    __slots__ = ("genotype", "active", "_codes", "_conns", "_acyclic")

    def __init__(self, genotype: Genotype, active: list[int] | None = None):
        self.genotype = genotype
        if active is None:
            active = active_nodes(genotype)
        self.active = np.asarray(active, dtype=np.int64)
        self._codes = genotype.functions.codes[genotype.genes[:, 0]]
        self._conns = np.ascontiguousarray(genotype.genes[:, 1:])
        rows = self._conns[self.active - genotype.n_inputs]
        # no active connection to the same or a later node: each sweep is a pure
        # function of the current row, so earlier rows and extra sweeps cannot matter
        self._acyclic = bool((rows < self.active[:, None]).all())

    def run(self, X: np.ndarray, sequential: bool, passes: int = 1) -> np.ndarray:
        """Raw outputs for a ``(n, T, C)`` batch.

        ``sequential=False`` requires ``T == 1`` and sweeps ``passes`` times;
        ``sequential=True`` sweeps once per row.
        """
        if not sequential and X.shape[1] != 1:
            raise InputError("static evaluation takes one input row per sample")
        out = np.empty(X.shape[0])
        g = self.genotype
        sweeps = 1 if sequential else passes
        if self._acyclic:
            X, sweeps = X[:, -1:, :], 1
        return _execute(self._codes, self._conns, self.active, g.output, g.n_inputs, X, sweeps, out)


def _check_inputs(genotype: Genotype, X: np.ndarray) -> None:
    if X.shape[-1] != genotype.n_inputs:
        raise InputError(f"expected {genotype.n_inputs} inputs per row, got {X.shape[-1]}")
    if not np.isfinite(X).all():
        raise InputError("non-finite input value")


def evaluate_static(genotype: Genotype, input_vector, passes: int = 1) -> float:
    X = np.asarray(input_vector, dtype=np.float64).reshape(1, 1, -1)
    _check_inputs(genotype, X)
    return float(Program(genotype).run(X, sequential=False, passes=passes)[0])


def evaluate_sequential(genotype: Genotype, input_matrix) -> float:
    X = np.asarray(input_matrix, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise InputError("sequential input must be a non-empty T x C matrix")
    X = X[None]
    _check_inputs(genotype, X)
    return float(Program(genotype).run(X, sequential=True)[0])


def evaluate_batch(genotype: Genotype, X: np.ndarray, sequential: bool, passes: int = 1) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    _check_inputs(genotype, X)
    return Program(genotype).run(X, sequential, passes)


def evaluate_reference(genotype: Genotype, rows, passes: int = 1) -> float:
    """Slow pure-Python evaluator over *all* nodes, for cross-checking the kernel.

    ``rows`` is a list of input vectors; each row gets ``passes`` sweeps.
    For feed-forward genotypes this asserts that no node ever reads a value
    that has not been computed yet in the current sweep.
    """
    n_in = genotype.n_inputs
    names = genotype.functions.names
    values = [0.0] * genotype.n_nodes
    current = [0.0] * n_in
    for row in rows:
        current = [float(v) for v in row]
        for _ in range(passes):
            done = [False] * genotype.n_nodes
            for i in range(genotype.n_nodes):
                f, c0, c1 = (int(v) for v in genotype.genes[i])
                operands = []
                for c in (c0, c1):
                    if c < n_in:
                        operands.append(current[c])
                    else:
                        assert genotype.recurrent or done[c - n_in], "read of an uncomputed node"
                        operands.append(values[c - n_in])
                values[i] = apply(names[f], *operands)
                done[i] = True
    out = genotype.output
    return current[out] if out < n_in else values[out - n_in]


def predict_outputs(outputs: np.ndarray, threshold: float = 0.0) -> np.ndarray:
    """Class 1 iff the raw output is strictly above ``threshold``."""
    return (np.asarray(outputs) > threshold).astype(np.int64)
