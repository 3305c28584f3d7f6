"""Classifier metrics, the majority-class baseline and Graphviz export of evolved programs."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .cgp.genotype import Genotype, active_nodes, used_inputs

__all__ = [
    "MetricsBundle", "compute_metrics", "export_dot", "format_mean_sd", "majority_baseline",
    "mean_sd", "roc_auc", "used_inputs", "write_metrics_csv",
]


def mean_sd(values: Iterable[float]) -> tuple[float, float]:
    """Mean and sample standard deviation (n - 1 denominator; 0.0 for a single value).

    Uses ``math.fsum`` so the result does not depend on the order of ``values``.
    """
    vals = [float(v) for v in values]
    if not vals:
        return math.nan, math.nan
    n = len(vals)
    mean = math.fsum(vals) / n
    if n == 1:
        return mean, 0.0
    return mean, math.sqrt(math.fsum((v - mean) ** 2 for v in vals) / (n - 1))


def format_mean_sd(values: Iterable[float]) -> str:
    """Accuracies (fractions) as ``"mean (SD)"`` in percent with two decimals, or ``"NA"``."""
    vals = list(values)
    if not vals:
        return "NA"
    mean, sd = mean_sd(vals)
    return f"{100 * mean:.2f} ({100 * sd:.2f})"


def majority_baseline(labels: Sequence[int]) -> float:
    """Accuracy of always predicting the most frequent class."""
    labels = np.asarray(labels)
    if labels.size == 0:
        raise ValueError("baseline of an empty label set")
    _, counts = np.unique(labels, return_counts=True)
    return int(counts.max()) / labels.size


@dataclass(frozen=True)
class MetricsBundle:
    accuracy: float
    sensitivity: float | None
    specificity: float | None
    roc_auc: float | None
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def confusion(self) -> tuple[int, int, int, int]:
        return (self.tp, self.fp, self.tn, self.fn)


def roc_auc(scores: Sequence[float], labels: Sequence[int]) -> float | None:
    """P(score of a random positive > score of a random negative), ties counting one half.

    NaN scores rank below every number. Returns ``None`` when only one class is present.
    """
    s = np.nan_to_num(np.asarray(scores, dtype=np.float64), nan=-np.inf)
    y = np.asarray(labels)
    pos, neg = s[y == 1], np.sort(s[y != 1])
    if len(pos) == 0 or len(neg) == 0:
        return None
    below = np.searchsorted(neg, pos, side="left")
    ties = np.searchsorted(neg, pos, side="right") - below
    return float((below.sum() + 0.5 * ties.sum()) / (len(pos) * len(neg)))


def compute_metrics(outputs: Sequence[float], labels: Sequence[int], threshold: float = 0.0) -> MetricsBundle:
    """Confusion-based metrics with class 1 as the positive class."""
    out = np.asarray(outputs, dtype=np.float64)
    y = np.asarray(labels)
    if out.shape != y.shape or out.size == 0:
        raise ValueError("need one output per label and at least one sample")
    pred = out > threshold
    tp = int(np.sum(pred & (y == 1)))
    fp = int(np.sum(pred & (y == 0)))
    tn = int(np.sum(~pred & (y == 0)))
    fn = int(np.sum(~pred & (y == 1)))
    return MetricsBundle(
        accuracy=(tp + tn) / y.size,
        sensitivity=tp / (tp + fn) if tp + fn else None,
        specificity=tn / (tn + fp) if tn + fp else None,
        roc_auc=roc_auc(out, y),
        tp=tp, fp=fp, tn=tn, fn=fn,
    )


def write_metrics_csv(path: str | Path, rows: Sequence[tuple[str, MetricsBundle]]) -> None:
    fields = ["model", "accuracy", "sensitivity", "specificity", "roc_auc", "tp", "fp", "tn", "fn"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for name, m in rows:
            writer.writerow({"model": name, **{k: ("" if v is None else v) for k, v in asdict(m).items()}})


# --------------------------------------------------------------------------- #
# DOT export
# --------------------------------------------------------------------------- #

_NON_COMMUTATIVE = {"sub", "div"}


def _quote(text: str) -> str:
    return '"' + str(text).replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(genotype: Genotype, input_names: Sequence[str] | None = None, name: str = "cgp") -> str:
    """Graphviz source for the active part of ``genotype``.

    Inputs are boxes, function nodes ellipses labelled with their operator,
    and the output a double circle. Edges follow data flow; an edge from a
    node to itself or to an earlier node (a recurrent connection) is dashed.
    Operand order is shown on edges into ``-`` and ``/`` nodes.
    """
    n_in = genotype.n_inputs
    if input_names is None:
        input_names = [f"x{i}" for i in range(n_in)]
    if len(input_names) != n_in:
        raise ValueError(f"expected {n_in} input names, got {len(input_names)}")
    active = active_nodes(genotype)
    inputs = sorted(used_inputs(genotype, active))

    def vid(addr: int) -> str:
        return f"in{addr}" if addr < n_in else f"n{addr}"

    lines = [f"digraph {_quote(name)} {{", "  rankdir=LR;"]
    for i in inputs:
        lines.append(f"  {vid(i)} [label={_quote(input_names[i])}, shape=box];")
    for a in active:
        f = int(genotype.genes[a - n_in, 0])
        lines.append(f"  {vid(a)} [label={_quote(genotype.functions.symbol(f))}, shape=ellipse];")
    lines.append('  out [label="output", shape=doublecircle];')
    for a in active:
        f, c0, c1 = (int(v) for v in genotype.genes[a - n_in])
        ordered = genotype.functions.names[f] in _NON_COMMUTATIVE
        for slot, src in enumerate((c0, c1)):
            attrs = []
            if ordered:
                attrs.append(f'label="{slot}"')
            if src >= a:
                attrs.append("style=dashed")
            suffix = f" [{', '.join(attrs)}]" if attrs else ""
            lines.append(f"  {vid(src)} -> {vid(a)}{suffix};")
    lines.append(f"  {vid(genotype.output)} -> out;")
    lines.append("}")
    return "\n".join(lines) + "\n"
