"""ADASYN oversampling of the minority class.

Minority points surrounded by many majority neighbours get a larger share of
the synthetic samples. Sequential samples are flattened row-major for the
distance computation and reshaped back afterwards.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import Dataset, round_half_away
from .errors import ConfigError, ImbalanceError


@dataclass(frozen=True)
class AdasynConfig:
    k_neighbors: int = 5
    beta: float = 1.0
    threshold: float = 1.0

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ConfigError("k_neighbors must be >= 1")
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError("beta must be in [0, 1]")
        if not 0.0 < self.threshold <= 1.0:
            raise ConfigError("threshold must be in (0, 1]")


@dataclass(frozen=True)
class MinorityRecord:
    majority_neighbors: int
    ratio: float
    density: float
    quota: int
    minority_neighbors: tuple[int, ...]


@dataclass(frozen=True)
class AdasynPlan:
    n_minority: int
    n_majority: int
    imbalance: float
    total: int
    records: tuple[MinorityRecord, ...]

    @property
    def quotas(self) -> np.ndarray:
        return np.array([r.quota for r in self.records], dtype=np.int64)


@dataclass(frozen=True)
class SyntheticBatch:
    """Synthetic points plus their provenance (indices into the minority array)."""

    features: np.ndarray
    parents: np.ndarray
    neighbors: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return len(self.features)


def _nearest(dist: np.ndarray, keys: np.ndarray, exclude: int, k: int) -> np.ndarray:
    """Positions of the ``k`` smallest distances, ties broken by ``keys``, skipping ``exclude``."""
    order = np.lexsort((keys, dist))
    order = order[order != exclude]
    return order[:k]


def largest_remainder(weights: np.ndarray, total: int) -> np.ndarray:
    """Integer apportionment of ``total`` proportional to ``weights`` (summing to 1), exact sum.

    Leftover units go to the largest fractional parts, lower index first on ties.
    """
    raw = weights * total
    base = np.floor(raw).astype(np.int64)
    short = total - int(base.sum())
    if short > 0:
        frac = raw - base
        order = np.lexsort((np.arange(len(raw)), -frac))
        base[order[:short]] += 1
    return base


def plan(minority: np.ndarray, majority: np.ndarray, cfg: AdasynConfig,
         minority_keys: np.ndarray | None = None, majority_keys: np.ndarray | None = None) -> AdasynPlan:
    """Decide how many synthetic points each minority sample seeds.

    ``minority`` and ``majority`` are ``(n, d)`` arrays. The optional ``*_keys``
    give each point's position in the original training set and break distance
    ties; by default points are ordered minority first, then majority.
    """
    minority = np.asarray(minority, dtype=np.float64).reshape(len(minority), -1)
    majority = np.asarray(majority, dtype=np.float64).reshape(len(majority), -1)
    m_s, m_l = len(minority), len(majority)
    if m_s < 1:
        raise ImbalanceError("no minority samples")
    if m_l < m_s:
        raise ImbalanceError(f"minority ({m_s}) outnumbers majority ({m_l})")
    k = cfg.k_neighbors
    if k >= m_s + m_l:
        raise ConfigError(f"k_neighbors={k} needs more than {m_s + m_l} training samples")

    d = m_s / m_l
    if d >= cfg.threshold:
        records = tuple(MinorityRecord(0, 0.0, 0.0, 0, ()) for _ in range(m_s))
        return AdasynPlan(m_s, m_l, d, 0, records)
    total = round_half_away((m_l - m_s) * cfg.beta)

    points = np.concatenate([minority, majority])
    keys = np.concatenate([
        np.arange(m_s) if minority_keys is None else np.asarray(minority_keys),
        np.arange(m_s, m_s + m_l) if majority_keys is None else np.asarray(majority_keys),
    ])
    min_keys = keys[:m_s]
    deltas = np.zeros(m_s, dtype=np.int64)
    neighbor_lists = []
    for i in range(m_s):
        dist = np.sum((points - minority[i]) ** 2, axis=1)
        nn = _nearest(dist, keys, i, k)
        deltas[i] = int(np.count_nonzero(nn >= m_s))
        neighbor_lists.append(tuple(int(j) for j in _nearest(dist[:m_s], min_keys, i, k)))

    ratios = deltas / k
    if ratios.sum() > 0:
        density = ratios / ratios.sum()
    else:
        density = np.full(m_s, 1.0 / m_s)
    quotas = largest_remainder(density, total)
    records = tuple(
        MinorityRecord(int(deltas[i]), float(ratios[i]), float(density[i]), int(quotas[i]), neighbor_lists[i])
        for i in range(m_s)
    )
    return AdasynPlan(m_s, m_l, d, total, records)


def synthesize(plan: AdasynPlan, minority: np.ndarray, rng: np.random.Generator) -> SyntheticBatch:
    """Interpolate between each minority point and random minority neighbours, per the plan's quotas.

    A point with no minority neighbour (a lone minority sample) is copied.
    """
    minority = np.asarray(minority, dtype=np.float64)
    shape = minority.shape[1:]
    flat = minority.reshape(len(minority), -1)
    feats, parents, neighbors, weights = [], [], [], []
    for i, rec in enumerate(plan.records):
        for _ in range(rec.quota):
            if rec.minority_neighbors:
                z = rec.minority_neighbors[int(rng.integers(len(rec.minority_neighbors)))]
                u = float(rng.random())
            else:
                z, u = i, 0.0
            a, b = flat[i], flat[z]
            s = np.clip(a + (b - a) * u, np.minimum(a, b), np.maximum(a, b))
            feats.append(s)
            parents.append(i)
            neighbors.append(z)
            weights.append(u)
    features = np.array(feats, dtype=np.float64).reshape(len(feats), *shape)
    return SyntheticBatch(features, np.array(parents, dtype=np.int64), np.array(neighbors, dtype=np.int64),
                          np.array(weights, dtype=np.float64))


@dataclass(frozen=True)
class BalanceResult:
    dataset: Dataset
    plan: AdasynPlan
    batch: SyntheticBatch
    minority_class: int
    minority_index: np.ndarray

    @property
    def n_synthetic(self) -> int:
        return len(self.batch)

    def audit_rows(self) -> list[dict]:
        """One row per synthetic sample; indices refer to the un-augmented training set."""
        return [
            {"synthetic_id": f"syn{j}", "parent_index": int(self.minority_index[p]),
             "neighbor_index": int(self.minority_index[z]), "weight": float(u)}
            for j, (p, z, u) in enumerate(zip(self.batch.parents, self.batch.neighbors, self.batch.weights))
        ]


def balance_training(train: Dataset, cfg: AdasynConfig, rng: np.random.Generator) -> BalanceResult:
    """Append ADASYN samples for the smaller class of ``train``."""
    counts = train.class_counts
    if min(counts.values()) == 0:
        missing = [c for c, n in counts.items() if n == 0]
        raise ImbalanceError(f"training set has no samples of class {missing[0]}")
    minority_class = 0 if counts[0] < counts[1] else 1
    min_idx = np.flatnonzero(train.labels == minority_class)
    maj_idx = np.flatnonzero(train.labels != minority_class)
    flat = train.flat_features()
    p = plan(flat[min_idx], flat[maj_idx], cfg, min_idx, maj_idx)
    batch = synthesize(p, train.features[min_idx], rng)
    ids = [f"syn{j}" for j in range(len(batch))]
    augmented = train.with_samples(batch.features, np.full(len(batch), minority_class), ids, synthetic=True)
    return BalanceResult(augmented, p, batch, minority_class, min_idx)


def write_audit_csv(path: str | Path, result: BalanceResult) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=["synthetic_id", "parent_index", "neighbor_index", "weight"],
                                lineterminator="\n")
        writer.writeheader()
        for row in result.audit_rows():
            writer.writerow({**row, "weight": repr(row["weight"])})
