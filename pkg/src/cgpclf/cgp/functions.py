"""Node primitives.

Every primitive takes two operands. A :class:`FunctionSet` is an ordered
selection from :data:`PRIMITIVES`; a genotype's function gene indexes into the
set, and the set translates that index into the kernel opcode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Denominators with a magnitude below this make division return its numerator.
DIV_EPSILON = 1e-9

# name -> (opcode understood by the evaluation kernel, symbol used in exports)
PRIMITIVES = {
    "add": (0, "+"),
    "sub": (1, "-"),
    "mul": (2, "*"),
    "div": (3, "/"),
    "min": (4, "min"),
    "max": (5, "max"),
}


def apply(name: str, x: float, y: float) -> float:
    """Scalar reference semantics of each primitive."""
    if name == "add":
        return x + y
    if name == "sub":
        return x - y
    if name == "mul":
        return x * y
    if name == "div":
        return x if abs(y) < DIV_EPSILON else x / y
    if name == "min":
        return x if x < y else y
    if name == "max":
        return x if x > y else y
    raise KeyError(name)


@dataclass(frozen=True)
class FunctionSet:
    names: tuple[str, ...] = ("add", "sub", "mul", "div")

    def __post_init__(self):
        if not self.names:
            raise ValueError("function set is empty")
        unknown = [n for n in self.names if n not in PRIMITIVES]
        if unknown:
            raise ValueError(f"unknown primitives: {unknown}")
        object.__setattr__(self, "names", tuple(self.names))
        codes = np.array([PRIMITIVES[n][0] for n in self.names], dtype=np.int64)
        codes.setflags(write=False)
        object.__setattr__(self, "_codes", codes)

    def __len__(self) -> int:
        return len(self.names)

    @property
    def arity(self) -> int:
        return 2

    @property
    def codes(self) -> np.ndarray:
        return self._codes

    def symbol(self, function_id: int) -> str:
        return PRIMITIVES[self.names[function_id]][1]


DEFAULT_FUNCTIONS = FunctionSet()
