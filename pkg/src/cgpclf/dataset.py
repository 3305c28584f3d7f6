"""Labeled feature data: CSV loading, region layouts and stratified splits.

Every dataset stores its features as a ``(n_samples, n_timesteps, n_channels)``
float64 array. A flat dataset is the special case ``n_timesteps == 1`` where
the channels are the features, so one evaluation kernel serves both layouts:
the channels are always the classifier inputs, and the timestep axis is what a
sequential (recurrent) evaluation steps through.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import AssemblyError, ConfigError, ConsistencyError, LabelError, ParseError, SplitError

FLAT = "flat"
SEQUENTIAL = "sequential"

# Column order used for the four default-mode-network regions.
REGION_ORDER = ("PCC", "mPFC", "RIPC", "LIPC")


@dataclass(frozen=True)
class Layout:
    kind: str
    n_channels: int
    n_timesteps: int = 1

    def __post_init__(self):
        if self.kind not in (FLAT, SEQUENTIAL):
            raise ValueError(f"unknown layout kind {self.kind!r}")
        if self.n_channels < 1 or self.n_timesteps < 1:
            raise ValueError("layout dimensions must be positive")
        if self.kind == FLAT and self.n_timesteps != 1:
            raise ValueError("flat layouts have exactly one row")

    @classmethod
    def flat(cls, n_features: int) -> Layout:
        return cls(FLAT, n_features, 1)

    @classmethod
    def sequential(cls, n_channels: int, n_timesteps: int) -> Layout:
        return cls(SEQUENTIAL, n_channels, n_timesteps)

    @property
    def n_features(self) -> int:
        return self.n_channels * self.n_timesteps

    @property
    def n_inputs(self) -> int:
        """Number of classifier inputs (one per channel)."""
        return self.n_channels

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_timesteps, self.n_channels)


@dataclass(frozen=True)
class Sample:
    id: str
    features: np.ndarray
    label: int
    synthetic: bool = False


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable collection of samples sharing one layout."""

    layout: Layout
    features: np.ndarray
    labels: np.ndarray
    ids: tuple[str, ...]
    synthetic: np.ndarray = field(default=None)

    def __post_init__(self):
        feats = np.array(self.features, dtype=np.float64, copy=True)
        if feats.ndim == 2 and self.layout.kind == FLAT:
            feats = feats[:, None, :]
        n = len(self.ids)
        if feats.shape != (n, *self.layout.shape):
            if not (n == 0 and feats.size == 0):
                raise ValueError(f"features shape {feats.shape} does not match layout {self.layout}")
            feats = np.zeros((0, *self.layout.shape))
        labels = np.array(self.labels, dtype=np.int64).reshape(-1)
        if labels.shape != (n,):
            raise ValueError("one label per sample required")
        if n and not np.isin(labels, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        synth = np.zeros(n, dtype=bool) if self.synthetic is None else np.array(self.synthetic, dtype=bool)
        if synth.shape != (n,):
            raise ValueError("one synthetic flag per sample required")
        for arr in (feats, labels, synth):
            arr.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "synthetic", synth)
        object.__setattr__(self, "ids", tuple(str(i) for i in self.ids))

    def __len__(self) -> int:
        return len(self.ids)

    def __iter__(self) -> Iterator[Sample]:
        for i in range(len(self)):
            yield self[i]

    def __getitem__(self, i: int) -> Sample:
        feats = self.features[i]
        if self.layout.kind == FLAT:
            feats = feats[0]
        return Sample(self.ids[i], feats, int(self.labels[i]), bool(self.synthetic[i]))

    @property
    def samples(self) -> list[Sample]:
        return list(self)

    @property
    def class_counts(self) -> dict[int, int]:
        return {c: int(np.sum(self.labels == c)) for c in (0, 1)}

    def flat_features(self) -> np.ndarray:
        """Features as ``(n, T*C)``, rows flattened row-major (timestep-major)."""
        return self.features.reshape(len(self), -1)

    def subset(self, indices: Sequence[int]) -> Dataset:
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            self.layout,
            self.features[idx],
            self.labels[idx],
            tuple(self.ids[i] for i in idx),
            self.synthetic[idx],
        )

    def with_samples(self, features: np.ndarray, labels: np.ndarray, ids: Sequence[str], synthetic: bool = True) -> Dataset:
        """Return a copy with extra samples appended."""
        features = np.asarray(features, dtype=np.float64).reshape(-1, *self.layout.shape)
        extra = len(features)
        return Dataset(
            self.layout,
            np.concatenate([self.features, features]),
            np.concatenate([self.labels, np.asarray(labels, dtype=np.int64).reshape(extra)]),
            self.ids + tuple(ids),
            np.concatenate([self.synthetic, np.full(extra, synthetic)]),
        )


# --------------------------------------------------------------------------- #
# CSV ingestion
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class CsvSpec:
    """How to read one CSV file: which column is the label and how it maps to {0, 1}."""

    label_column: str
    class_map: dict[str, int]
    id_column: str | None = None
    feature_columns: tuple[str, ...] | None = None

    def __post_init__(self):
        if sorted(self.class_map.values()) != [0, 1]:
            raise ConfigError("class_map must map exactly two label values onto 0 and 1")


def load_csv(path: str | Path, spec: CsvSpec) -> Dataset:
    """Load a flat dataset from ``path``; samples keep file order.

    Rows are numbered from 1 (the first row after the header) in error
    messages.
    """
    path = Path(path)
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: cannot open ({exc.strerror})") from exc
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: missing header row") from None
        header = [h.strip() for h in header]
        if spec.label_column not in header:
            raise ParseError(f"{path}: label column {spec.label_column!r} not in header")
        if spec.id_column is not None and spec.id_column not in header:
            raise ParseError(f"{path}: id column {spec.id_column!r} not in header")
        if spec.feature_columns is None:
            feature_cols = [h for h in header if h not in (spec.label_column, spec.id_column)]
        else:
            missing = [c for c in spec.feature_columns if c not in header]
            if missing:
                raise ParseError(f"{path}: feature columns missing from header: {missing}")
            feature_cols = list(spec.feature_columns)
        if not feature_cols:
            raise ParseError(f"{path}: no feature columns")
        col = {h: j for j, h in enumerate(header)}
        feat_idx = [col[c] for c in feature_cols]

        rows, labels, ids = [], [], []
        for rownum, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(f"{path}: row {rownum} has {len(row)} columns, expected {len(header)}")
            raw_label = row[col[spec.label_column]].strip()
            if raw_label not in spec.class_map:
                raise LabelError(
                    f"{path}: row {rownum} label {raw_label!r} not in {sorted(spec.class_map)}"
                )
            values = []
            for j in feat_idx:
                try:
                    v = float(row[j])
                except ValueError:
                    raise ParseError(f"{path}: row {rownum} column {header[j]!r}: non-numeric value {row[j]!r}") from None
                if not math.isfinite(v):
                    raise ParseError(f"{path}: row {rownum} column {header[j]!r}: non-finite value")
                values.append(v)
            rows.append(values)
            labels.append(spec.class_map[raw_label])
            ids.append(row[col[spec.id_column]].strip() if spec.id_column else str(rownum))

    if spec.id_column and len(set(ids)) != len(ids):
        raise ParseError(f"{path}: duplicate sample ids")
    layout = Layout.flat(len(feature_cols))
    feats = np.array(rows, dtype=np.float64).reshape(len(rows), 1, len(feature_cols))
    return Dataset(layout, feats, np.array(labels, dtype=np.int64), tuple(ids))


def _align_regions(region_datasets: Sequence[Dataset]) -> tuple[tuple[str, ...], np.ndarray, list[np.ndarray]]:
    if not region_datasets:
        raise AssemblyError("need at least one region dataset")
    first = region_datasets[0]
    ids = first.ids
    idset = set(ids)
    n_feat = first.layout.n_features
    blocks = []
    for r, ds in enumerate(region_datasets):
        if ds.layout.kind != FLAT:
            raise AssemblyError(f"region {r}: expected a flat dataset")
        if ds.layout.n_features != n_feat:
            raise AssemblyError(f"region {r}: {ds.layout.n_features} features, expected {n_feat}")
        if set(ds.ids) != idset or len(ds.ids) != len(ids):
            raise AssemblyError(f"region {r}: sample id set differs from region 0")
        pos = {sid: i for i, sid in enumerate(ds.ids)}
        order = np.array([pos[sid] for sid in ids], dtype=np.int64)
        if len(order) and not np.array_equal(ds.labels[order], first.labels):
            bad = ids[int(np.flatnonzero(ds.labels[order] != first.labels)[0])]
            raise ConsistencyError(f"region {r}: label for sample {bad!r} disagrees with region 0")
        blocks.append(ds.features[order, 0, :])
    return ids, first.labels, blocks


def assemble_sequential(region_datasets: Sequence[Dataset]) -> Dataset:
    """Stack per-region flat datasets into a ``T x n_regions`` sequence per sample.

    Channel ``c`` holds region ``c`` in the order given; samples follow the
    order of the first dataset.
    """
    ids, labels, blocks = _align_regions(region_datasets)
    t = region_datasets[0].layout.n_features
    feats = np.stack(blocks, axis=-1) if ids else np.zeros((0, t, len(blocks)))
    return Dataset(Layout.sequential(len(blocks), t), feats, labels, ids)


def concat_flat(region_datasets: Sequence[Dataset]) -> Dataset:
    """Concatenate per-region vectors into one flat vector, in the order given."""
    ids, labels, blocks = _align_regions(region_datasets)
    width = sum(b.shape[1] for b in blocks) if ids else region_datasets[0].layout.n_features * len(blocks)
    feats = np.concatenate(blocks, axis=1) if ids else np.zeros((0, width))
    return Dataset(Layout.flat(width), feats, labels, ids)


# --------------------------------------------------------------------------- #
# Dataset manifests
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class DatasetManifest:
    layout: str
    files: tuple[str, ...]
    label_column: str
    class_map: dict[str, int]
    region_order: tuple[str, ...] = ()
    id_column: str | None = None
    base_dir: Path = Path(".")

    @classmethod
    def from_dict(cls, data: dict, base_dir: str | Path = ".") -> DatasetManifest:
        try:
            layout = data.get("layout", FLAT)
            files = tuple(data["files"])
            label_column = data["label_column"]
            class_map = {str(k): int(v) for k, v in data["class_map"].items()}
        except (KeyError, TypeError, AttributeError, ValueError) as exc:
            raise ConfigError(f"dataset manifest: missing or malformed field ({exc})") from None
        if layout not in (FLAT, SEQUENTIAL):
            raise ConfigError(f"dataset manifest: layout must be 'flat' or 'sequential', got {layout!r}")
        if not files:
            raise ConfigError("dataset manifest: 'files' is empty")
        region_order = tuple(data.get("region_order", ()))
        if region_order and len(region_order) != len(files):
            raise ConfigError("dataset manifest: region_order must name one region per file")
        return cls(layout, files, label_column, class_map, region_order, data.get("id_column"), Path(base_dir))

    @classmethod
    def read(cls, path: str | Path) -> DatasetManifest:
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read manifest ({exc.strerror})") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(data, path.parent)

    @property
    def csv_spec(self) -> CsvSpec:
        return CsvSpec(self.label_column, self.class_map, self.id_column)

    def load(self, layout: str | None = None) -> Dataset:
        """Load every file and combine them according to ``layout`` (defaults to the manifest's)."""
        layout = layout or self.layout
        parts = [load_csv(self.base_dir / f, self.csv_spec) for f in self.files]
        if layout == SEQUENTIAL:
            # one file per channel; a single file gives a one-channel sequence
            return assemble_sequential(parts)
        return parts[0] if len(parts) == 1 else concat_flat(parts)


# --------------------------------------------------------------------------- #
# Splitting
# --------------------------------------------------------------------------- #


def round_half_away(x: float) -> int:
    return int(math.floor(abs(x) + 0.5)) * (1 if x >= 0 else -1)


@dataclass(frozen=True)
class Split:
    train: np.ndarray
    validation: np.ndarray
    test: np.ndarray
    fractions: tuple[float, float, float]


def split_counts(n_class: int, fractions: tuple[float, float, float]) -> tuple[int, int, int]:
    """Per-class (train, validation, test) sizes: test rounded first, then validation."""
    _, f_val, f_test = fractions
    n_test = round_half_away(f_test * n_class)
    n_val = round_half_away(f_val * n_class)
    return n_class - n_val - n_test, n_val, n_test


def stratified_split(dataset: Dataset, fractions: Sequence[float], seed: int) -> Split:
    fractions = tuple(float(f) for f in fractions)
    if len(fractions) != 3 or any(f <= 0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
        raise ConfigError(f"split fractions must be three positive numbers summing to 1, got {fractions}")
    rng = np.random.default_rng(seed)
    parts: tuple[list, list, list] = ([], [], [])
    for c in (0, 1):
        members = np.flatnonzero(dataset.labels == c)
        if len(members) == 0:
            raise SplitError(f"class {c} has no samples")
        n_train, n_val, n_test = split_counts(len(members), fractions)
        if n_train <= 0:
            raise SplitError(
                f"class {c} has {len(members)} samples: too few for fractions {fractions}"
            )
        perm = rng.permutation(members)
        parts[2].append(perm[:n_test])
        parts[1].append(perm[n_test:n_test + n_val])
        parts[0].append(perm[n_test + n_val:])
    train, val, test = (np.sort(np.concatenate(p)) for p in parts)
    return Split(train, val, test, fractions)
