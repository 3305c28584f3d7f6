"""Stratified, repeated k-fold cross-validation with rotating test/validation folds.

In rotation ``t`` fold ``t`` is the test set, fold ``(t + 1) % k`` the
validation set and all other folds are training data. ADASYN, when enabled,
only ever sees the training folds.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cgp import EvolutionConfig, evolve, fitness
from .cgp.genotype import Genotype
from .dataset import Dataset
from .errors import ConfigError, ImbalanceError
from .imbalance import AdasynConfig, balance_training
from .report import mean_sd
from .seeding import derive_seed, rng_for

CSV_FIELDS = ["repetition", "rotation", "n_train", "n_train_synthetic", "n_val", "n_test",
              "acc_train", "acc_val", "acc_test", "skipped", "reason"]


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignment: np.ndarray
    counts: np.ndarray  # (2, k): samples of class c in fold f

    def fold(self, f: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == f)


def make_folds(dataset: Dataset, k: int, seed: int) -> FoldPlan:
    """Shuffle each class and deal it round-robin into ``k`` folds.

    Class 0 is dealt first starting at fold 0; class 1 continues from the fold
    after the last one class 0 received, so total fold sizes differ by at most one.
    """
    n = len(dataset)
    if k < 3:
        raise ConfigError(f"k must be at least 3 (test, validation and training roles), got {k}")
    if k > n:
        raise ConfigError(f"k={k} exceeds the number of samples ({n})")
    rng = np.random.default_rng(seed)
    assignment = np.empty(n, dtype=np.int64)
    counts = np.zeros((2, k), dtype=np.int64)
    start = 0
    for c in (0, 1):
        members = rng.permutation(np.flatnonzero(dataset.labels == c))
        folds = (start + np.arange(len(members))) % k
        assignment[members] = folds
        counts[c] = np.bincount(folds, minlength=k)
        start = (start + len(members)) % k
    return FoldPlan(k, assignment, counts)


@dataclass
class RotationRecord:
    repetition: int
    rotation: int
    n_train: int
    n_train_synthetic: int
    n_val: int
    n_test: int
    acc_train: float | None = None
    acc_val: float | None = None
    acc_test: float | None = None
    skipped: bool = False
    reason: str = ""
    train_index: np.ndarray = field(default=None, repr=False)
    val_index: np.ndarray = field(default=None, repr=False)
    test_index: np.ndarray = field(default=None, repr=False)
    genotype: Genotype | None = field(default=None, repr=False)

    def csv_row(self) -> dict:
        def num(v):
            return "" if v is None else repr(float(v))

        return {
            "repetition": self.repetition, "rotation": self.rotation, "n_train": self.n_train,
            "n_train_synthetic": self.n_train_synthetic, "n_val": self.n_val, "n_test": self.n_test,
            "acc_train": num(self.acc_train), "acc_val": num(self.acc_val), "acc_test": num(self.acc_test),
            "skipped": "true" if self.skipped else "false", "reason": self.reason,
        }


@dataclass
class CvReport:
    k: int
    repetitions: int
    records: list[RotationRecord]

    def completed(self) -> list[RotationRecord]:
        return [r for r in self.records if not r.skipped]

    def values(self, partition: str) -> list[float]:
        attr = {"train": "acc_train", "validation": "acc_val", "test": "acc_test"}[partition]
        return [getattr(r, attr) for r in self.completed() if getattr(r, attr) is not None]

    def aggregate(self, partition: str) -> tuple[float, float]:
        return mean_sd(self.values(partition))

    @property
    def aggregates(self) -> dict[str, tuple[float, float]]:
        return {p: self.aggregate(p) for p in ("train", "validation", "test")}

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
            writer.writeheader()
            for r in self.records:
                writer.writerow(r.csv_row())


def _missing_classes(labels: np.ndarray) -> list[int]:
    return [c for c in (0, 1) if not np.any(labels == c)]


def run_rotation(dataset: Dataset, plan: FoldPlan, repetition: int, rotation: int, evo_config: EvolutionConfig,
                 adasyn: AdasynConfig | None, master_seed: int) -> RotationRecord:
    k = plan.k
    test = plan.fold(rotation)
    val = plan.fold((rotation + 1) % k)
    train = np.flatnonzero((plan.assignment != rotation) & (plan.assignment != (rotation + 1) % k))
    record = RotationRecord(repetition, rotation, len(train), 0, len(val), len(test),
                            train_index=train, val_index=val, test_index=test)
    # evaluation folds come from the loaded data only; synthetic samples exist only in the training copy
    assert not dataset.synthetic[test].any() and not dataset.synthetic[val].any()

    notes = []
    if len(test) == 0:
        record.skipped, record.reason = True, "empty test fold"
        return record
    missing = _missing_classes(dataset.labels[train])
    if missing:
        record.skipped, record.reason = True, f"training folds lack class {missing[0]}"
        return record
    for c in _missing_classes(dataset.labels[test]):
        notes.append(f"test fold lacks class {c}")
    if len(val) == 0:
        notes.append("empty validation fold")
    else:
        for c in _missing_classes(dataset.labels[val]):
            notes.append(f"validation fold lacks class {c}")

    train_set = dataset.subset(train)
    if adasyn is not None:
        try:
            balanced = balance_training(train_set, adasyn, rng_for(master_seed, repetition, rotation, 1))
        except (ConfigError, ImbalanceError) as exc:
            record.skipped, record.reason = True, f"ADASYN: {exc}"
            return record
        train_set = balanced.dataset
        record.n_train_synthetic = balanced.n_synthetic

    config = evo_config.replace(seed=derive_seed(master_seed, repetition, rotation, 0))
    val_set = dataset.subset(val) if len(val) else None
    result = evolve(train_set, val_set, config)
    best = result.best_genotype
    record.acc_train = result.best_train_accuracy
    record.acc_val = result.best_validation_accuracy
    record.acc_test = fitness(best, dataset.subset(test), config.decision_threshold, config.static_update_passes)
    record.genotype = best
    record.reason = "; ".join(notes)
    return record


def _job(args):
    return run_rotation(*args)


def run_cv(dataset: Dataset, evo_config: EvolutionConfig, adasyn: AdasynConfig | None, k: int = 10,
           repetitions: int = 10, master_seed: int = 0, workers: int = 1) -> CvReport:
    """Evaluate ``repetitions`` x ``k`` rotations; records come back in (repetition, rotation) order."""
    if repetitions < 1:
        raise ConfigError("repetitions must be >= 1")
    if _missing_classes(dataset.labels):
        raise ConfigError("cross-validation needs samples of both classes")
    jobs = []
    for rep in range(repetitions):
        plan = make_folds(dataset, k, derive_seed(master_seed, rep))
        for rot in range(k):
            jobs.append((dataset, plan, rep, rot, evo_config, adasyn, master_seed))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_job, jobs))
    else:
        records = [_job(j) for j in jobs]
    return CvReport(k, repetitions, records)
