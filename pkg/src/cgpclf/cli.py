"""Command-line experiment driver.

Commands::

    cgpclf baseline DATASET_JSON
    cgpclf split-run EXPERIMENT_JSON [overrides]
    cgpclf cv-run EXPERIMENT_JSON [overrides]
    cgpclf export-dot GENOTYPE_JSON [--names a,b,...] [--out FILE]
    cgpclf synth-data KIND --out DIR [--seed N]

An experiment manifest is JSON::

    {
      "dataset": "dataset.json",            # dataset manifest path (relative to this file) or inline object
      "layout": "flat",                     # optional override of the dataset's layout
      "mode": "single_split",               # or "cross_validation"
      "single_split": {"fractions": [0.70, 0.15, 0.15]},
      "evolution": {"n_nodes": 50, "mutation_rate": 0.1, "max_iterations": 15000, "offspring": 4,
                    "recurrence_probability": 0.1},
      "adasyn": {"enabled": true, "k_neighbors": 5, "beta": 1.0, "threshold": 1.0},
      "runs": 10,
      "master_seed": 0,
      "output_dir": "results"
    }

Cross-validation manifests carry ``"cross_validation": {"folds": 10, "repetitions": 10}``
instead of the ``single_split`` block. Every random draw descends from
``master_seed``; the output directory is a pure function of the data files and
the manifest. Exit codes: 0 success, 2 input error, 3 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .cgp import EvolutionConfig, Genotype, evaluate_batch, evolve
from .crossval import run_cv
from .dataset import FLAT, SEQUENTIAL, Dataset, DatasetManifest, stratified_split
from .errors import ConfigError, InputError
from .imbalance import AdasynConfig, balance_training
from .report import compute_metrics, export_dot, format_mean_sd, majority_baseline, mean_sd
from .seeding import derive_seed, rng_for

SINGLE_SPLIT = "single_split"
CROSS_VALIDATION = "cross_validation"
DEFAULT_FRACTIONS = (0.70, 0.15, 0.15)
PARTITIONS = ("train", "validation", "test")
SUMMARY_FIELDS = ["model", "training", "validation", "test", "n"]


# --------------------------------------------------------------------------- #
# Experiment manifest
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class ExperimentManifest:
    dataset: str | dict
    mode: str
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)
    adasyn_enabled: bool = True
    adasyn: AdasynConfig = field(default_factory=AdasynConfig)
    fractions: tuple[float, float, float] = DEFAULT_FRACTIONS
    folds: int = 10
    repetitions: int = 10
    runs: int = 10
    master_seed: int = 0
    layout: str | None = None
    output_dir: str | None = None
    base_dir: Path = Path(".")

    def __post_init__(self):
        if self.mode not in (SINGLE_SPLIT, CROSS_VALIDATION):
            raise ConfigError(f"mode must be {SINGLE_SPLIT!r} or {CROSS_VALIDATION!r}, got {self.mode!r}")
        if not isinstance(self.runs, int) or self.runs < 1:
            raise ConfigError(f"runs must be a positive integer, got {self.runs!r}")
        if not isinstance(self.master_seed, int) or self.master_seed < 0:
            raise ConfigError(f"master_seed must be a non-negative integer, got {self.master_seed!r}")
        if self.layout not in (None, FLAT, SEQUENTIAL):
            raise ConfigError(f"layout must be 'flat' or 'sequential', got {self.layout!r}")
        if len(self.fractions) != 3 or any(f <= 0 for f in self.fractions) or abs(sum(self.fractions) - 1) > 1e-9:
            raise ConfigError(f"fractions must be three positive numbers summing to 1, got {self.fractions}")
        if self.folds < 3 or self.repetitions < 1:
            raise ConfigError("cross-validation needs folds >= 3 and repetitions >= 1")

    @classmethod
    def from_dict(cls, data: dict, base_dir: str | Path = ".") -> ExperimentManifest:
        if not isinstance(data, dict):
            raise ConfigError("experiment manifest must be a JSON object")
        known = {"dataset", "mode", SINGLE_SPLIT, CROSS_VALIDATION, "evolution", "adasyn", "runs",
                 "master_seed", "layout", "output_dir"}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"experiment manifest: unknown fields {unknown}")
        if "dataset" not in data:
            raise ConfigError("experiment manifest: missing field 'dataset'")
        blocks = [b for b in (SINGLE_SPLIT, CROSS_VALIDATION) if b in data]
        if len(blocks) != 1:
            raise ConfigError(f"experiment manifest: exactly one of {SINGLE_SPLIT!r} or {CROSS_VALIDATION!r} "
                              f"must be present, found {blocks}")
        mode = data.get("mode", blocks[0])
        if mode != blocks[0]:
            raise ConfigError(f"experiment manifest: mode {mode!r} but parameter block {blocks[0]!r}")

        kw: dict = {}
        try:
            if mode == SINGLE_SPLIT:
                block = data[SINGLE_SPLIT]
                kw["fractions"] = tuple(float(f) for f in block.get("fractions", DEFAULT_FRACTIONS))
            else:
                block = data[CROSS_VALIDATION]
                kw["folds"] = int(block.get("folds", 10))
                kw["repetitions"] = int(block.get("repetitions", 10))
            evo = dict(data.get("evolution", {}))
            if "seed" in evo:
                raise ConfigError("evolution.seed is derived from master_seed; set master_seed instead")
            kw["evolution"] = EvolutionConfig.from_dict(evo)
            ada = dict(data.get("adasyn", {}))
            kw["adasyn_enabled"] = bool(ada.pop("enabled", True))
            kw["adasyn"] = AdasynConfig(**ada)
        except (AttributeError, TypeError, ValueError) as exc:
            raise ConfigError(f"experiment manifest: malformed field ({exc})") from None
        return cls(dataset=data["dataset"], mode=mode, runs=data.get("runs", 10),
                   master_seed=data.get("master_seed", 0), layout=data.get("layout"),
                   output_dir=data.get("output_dir"), base_dir=Path(base_dir), **kw)

    @classmethod
    def read(cls, path: str | Path) -> ExperimentManifest:
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read manifest ({exc.strerror})") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(data, path.parent)

    def replace(self, **changes) -> ExperimentManifest:
        return replace(self, **changes)

    def to_dict(self) -> dict:
        """Canonical form written next to the results; ``output_dir`` is left out on purpose."""
        evo = self.evolution.to_dict()
        del evo["seed"]
        data = {"dataset": self.dataset, "mode": self.mode}
        if self.layout is not None:
            data["layout"] = self.layout
        if self.mode == SINGLE_SPLIT:
            data[SINGLE_SPLIT] = {"fractions": list(self.fractions)}
        else:
            data[CROSS_VALIDATION] = {"folds": self.folds, "repetitions": self.repetitions}
        data["evolution"] = evo
        data["adasyn"] = {"enabled": self.adasyn_enabled, **asdict(self.adasyn)}
        data["runs"] = self.runs
        data["master_seed"] = self.master_seed
        return data

    @property
    def adasyn_config(self) -> AdasynConfig | None:
        return self.adasyn if self.adasyn_enabled else None

    @property
    def model_name(self) -> str:
        return "RCGP" if self.evolution.recurrence_probability > 0 else "CGP"

    def dataset_manifest(self) -> DatasetManifest:
        if isinstance(self.dataset, dict):
            return DatasetManifest.from_dict(self.dataset, self.base_dir)
        return DatasetManifest.read(self.base_dir / self.dataset)

    def load_dataset(self) -> Dataset:
        return self.dataset_manifest().load(self.layout)


# --------------------------------------------------------------------------- #
# Single-split experiments
# --------------------------------------------------------------------------- #


@dataclass
class RunOutcome:
    run: int
    split_seed: int
    evolution_seed: int
    n_train: int
    n_train_synthetic: int
    n_validation: int
    n_test: int
    accuracy: dict
    baseline: dict
    test_metrics: dict | None
    iterations: int
    evaluations: int
    history: list
    genotype: Genotype
    audit: list | None = None

    def result_json(self) -> dict:
        data = asdict(self)
        del data["genotype"], data["audit"]
        return data


def _single_run(dataset: Dataset, manifest: ExperimentManifest, r: int) -> RunOutcome:
    m = manifest.master_seed
    split_seed = derive_seed(m, r, 0)
    evo_seed = derive_seed(m, r, 1)
    split = stratified_split(dataset, manifest.fractions, split_seed)
    train = dataset.subset(split.train)
    validation = dataset.subset(split.validation) if len(split.validation) else None
    test = dataset.subset(split.test)

    n_synthetic, audit = 0, None
    if manifest.adasyn_enabled:
        balanced = balance_training(train, manifest.adasyn, rng_for(m, r, 2))
        n_synthetic, audit = balanced.n_synthetic, balanced
        train = balanced.dataset
    config = manifest.evolution.replace(seed=evo_seed)
    result = evolve(train, validation, config)
    best = result.best_genotype

    metrics = None
    acc_test = None
    if len(test):
        outputs = evaluate_batch(best, test.features, dataset.layout.kind == SEQUENTIAL, config.static_update_passes)
        bundle = compute_metrics(outputs, test.labels, config.decision_threshold)
        metrics, acc_test = asdict(bundle), bundle.accuracy
    baseline = {
        "train": majority_baseline(dataset.labels[split.train]),
        "validation": majority_baseline(dataset.labels[split.validation]) if len(split.validation) else None,
        "test": majority_baseline(dataset.labels[split.test]) if len(split.test) else None,
    }
    return RunOutcome(
        run=r, split_seed=split_seed, evolution_seed=evo_seed,
        n_train=len(split.train), n_train_synthetic=n_synthetic,
        n_validation=len(split.validation), n_test=len(split.test),
        accuracy={"train": result.best_train_accuracy, "validation": result.best_validation_accuracy,
                  "test": acc_test},
        baseline=baseline, test_metrics=metrics,
        iterations=result.iterations, evaluations=result.evaluations,
        history=[list(h) for h in result.history], genotype=best,
        audit=audit.audit_rows() if audit is not None else None,
    )


def _single_run_job(args):
    return _single_run(*args)


def _map(fn, jobs: list, workers: int) -> list:
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def _num(v) -> str:
    return "" if v is None else repr(float(v))


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")


def _stats(values: Sequence[float | None]) -> dict:
    vals = [v for v in values if v is not None]
    if not vals:
        return {"mean": None, "sd": None, "n": 0}
    mean, sd = mean_sd(vals)
    return {"mean": mean, "sd": sd, "n": len(vals)}


def _summary_row(name: str, columns: dict[str, list]) -> dict:
    row = {"model": name}
    for part, header in zip(PARTITIONS, ("training", "validation", "test")):
        row[header] = format_mean_sd(v for v in columns[part] if v is not None)
    row["n"] = sum(v is not None for v in columns["test"])
    return row


def _write_summary(out: Path, manifest: ExperimentManifest, model_cols: dict, baseline_cols: dict,
                   extra: dict) -> None:
    rows = [_summary_row(manifest.model_name, model_cols), _summary_row("majority-baseline", baseline_cols)]
    with open(out / "summary.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_FIELDS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    summary = {
        "model": manifest.model_name,
        "accuracy": {p: _stats(model_cols[p]) for p in PARTITIONS},
        "majority_baseline": {p: _stats(baseline_cols[p]) for p in PARTITIONS},
        "table_row": rows[0],
        **extra,
    }
    _write_json(out / "summary.json", summary)


def _prepare_output(manifest: ExperimentManifest, force: bool) -> Path:
    if manifest.output_dir is None:
        raise ConfigError("no output directory: set output_dir in the manifest or pass --out")
    out = Path(manifest.output_dir)
    if not out.is_absolute():
        out = Path.cwd() / out
    if out.exists() and any(out.iterdir()) and not force:
        raise ConfigError(f"output directory {out} is not empty (use --force to write into it)")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _input_names(manifest: ExperimentManifest, dataset: Dataset) -> list[str]:
    n = dataset.layout.n_inputs
    if dataset.layout.kind == SEQUENTIAL:
        regions = manifest.dataset_manifest().region_order
        if len(regions) == n:
            return list(regions)
        return [f"ch{i}" for i in range(n)]
    return [f"x{i}" for i in range(n)]


def run_single_split(manifest: ExperimentManifest, workers: int = 1, force: bool = False) -> Path:
    if manifest.mode != SINGLE_SPLIT:
        raise ConfigError(f"manifest mode is {manifest.mode!r}; use cv-run")
    dataset = manifest.load_dataset()
    out = _prepare_output(manifest, force)
    outcomes = _map(_single_run_job, [(dataset, manifest, r) for r in range(manifest.runs)], workers)

    names = _input_names(manifest, dataset)
    _write_json(out / "manifest.json", manifest.to_dict())
    fields = ["run", "n_train", "n_train_synthetic", "n_validation", "n_test",
              "acc_train", "acc_validation", "acc_test", "iterations", "evaluations"]
    with open(out / "runs.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for o in outcomes:
            writer.writerow({
                "run": o.run, "n_train": o.n_train, "n_train_synthetic": o.n_train_synthetic,
                "n_validation": o.n_validation, "n_test": o.n_test,
                "acc_train": _num(o.accuracy["train"]), "acc_validation": _num(o.accuracy["validation"]),
                "acc_test": _num(o.accuracy["test"]), "iterations": o.iterations, "evaluations": o.evaluations,
            })
    for o in outcomes:
        run_dir = out / f"run_{o.run:03d}"
        run_dir.mkdir(exist_ok=True)
        (run_dir / "genotype.json").write_text(o.genotype.to_json() + "\n", encoding="utf-8")
        (run_dir / "classifier.dot").write_text(export_dot(o.genotype, names, f"run_{o.run:03d}"), encoding="utf-8")
        _write_json(run_dir / "result.json", o.result_json())
        if o.audit is not None:
            with open(run_dir / "adasyn_audit.csv", "w", newline="", encoding="utf-8") as fh:
                writer = csv.DictWriter(fh, fieldnames=["synthetic_id", "parent_index", "neighbor_index", "weight"],
                                        lineterminator="\n")
                writer.writeheader()
                writer.writerows({**row, "weight": repr(row["weight"])} for row in o.audit)

    model_cols = {p: [o.accuracy[p] for o in outcomes] for p in PARTITIONS}
    baseline_cols = {p: [o.baseline[p] for o in outcomes] for p in PARTITIONS}
    _write_summary(out, manifest, model_cols, baseline_cols, {"runs": manifest.runs})
    return out


# --------------------------------------------------------------------------- #
# Cross-validation experiments
# --------------------------------------------------------------------------- #


def run_cross_validation(manifest: ExperimentManifest, workers: int = 1, force: bool = False) -> Path:
    if manifest.mode != CROSS_VALIDATION:
        raise ConfigError(f"manifest mode is {manifest.mode!r}; use split-run")
    dataset = manifest.load_dataset()
    out = _prepare_output(manifest, force)
    report = run_cv(dataset, manifest.evolution, manifest.adasyn_config, manifest.folds,
                    manifest.repetitions, manifest.master_seed, workers)

    _write_json(out / "manifest.json", manifest.to_dict())
    report.write_csv(out / "rotations.csv")
    with open(out / "genotypes.jsonl", "w", encoding="utf-8") as fh:
        for r in report.records:
            geno = r.genotype.to_dict() if r.genotype is not None else None
            fh.write(json.dumps({"repetition": r.repetition, "rotation": r.rotation, "genotype": geno}) + "\n")

    done = report.completed()
    model_cols = {"train": [r.acc_train for r in done], "validation": [r.acc_val for r in done],
                  "test": [r.acc_test for r in done]}
    labels = dataset.labels
    baseline_cols = {
        "train": [majority_baseline(labels[r.train_index]) for r in done],
        "validation": [majority_baseline(labels[r.val_index]) if len(r.val_index) else None for r in done],
        "test": [majority_baseline(labels[r.test_index]) for r in done],
    }
    extra = {"folds": manifest.folds, "repetitions": manifest.repetitions,
             "rotations": len(report.records), "skipped": len(report.records) - len(done)}
    _write_summary(out, manifest, model_cols, baseline_cols, extra)
    return out


# --------------------------------------------------------------------------- #
# Synthetic datasets
# --------------------------------------------------------------------------- #


SYNTH_KINDS = ("separable", "sequence-sum", "pd-standin", "cv120", "counts")


def _write_table(path: Path, ids, columns: list[str], features: np.ndarray, labels: Sequence[str]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", *columns, "label"])
        for sid, row, lab in zip(ids, features, labels):
            writer.writerow([sid, *(repr(float(v)) for v in row), lab])


def synth_data(kind: str, out: str | Path, seed: int = 0, counts: tuple[int, int] | None = None) -> Path:
    """Write ``data.csv``, ``dataset.json`` and a ready-to-run ``experiment.json`` into ``out``.

    separable     100 x 2 uniform points, label 1 iff x0 > x1 (single split, CGP)
    sequence-sum  200 sequences of 10 uniform values, label 1 iff the sum exceeds 5 (single split, RCGP)
    pd-standin    110 x 210 Gaussian features, 102 class 1 and 8 class 0 (single split, RCGP)
    cv120         120 x 4 features, 102 class 1 and 18 class 0 (cross-validation)
    counts        one noise feature with class counts given by ``counts`` = (n1, n0)
    """
    if kind not in SYNTH_KINDS:
        raise ConfigError(f"unknown dataset kind {kind!r}; choose from {', '.join(SYNTH_KINDS)}")
    rng = np.random.default_rng(seed)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    layout = FLAT
    evolution: dict = {}
    mode_block: dict = {SINGLE_SPLIT: {"fractions": list(DEFAULT_FRACTIONS)}}

    if kind == "separable":
        x = rng.random((100, 2))
        y = (x[:, 0] > x[:, 1]).astype(int)
    elif kind == "sequence-sum":
        x = rng.random((200, 10))
        y = (x.sum(axis=1) > 5.0).astype(int)
        layout = SEQUENTIAL
        evolution = {"recurrence_probability": 0.1}
    elif kind in ("pd-standin", "cv120", "counts"):
        if kind == "pd-standin":
            n1, n0, width = 102, 8, 210
            evolution = {"recurrence_probability": 0.1}
        elif kind == "cv120":
            n1, n0, width = 102, 18, 4
            mode_block = {CROSS_VALIDATION: {"folds": 10, "repetitions": 10}}
        else:
            if counts is None:
                raise ConfigError("the 'counts' kind needs --counts N1,N0")
            (n1, n0), width = counts, 1
            if n1 < 0 or n0 < 0 or n1 + n0 == 0:
                raise ConfigError(f"invalid class counts {counts}")
        y = np.array([1] * n1 + [0] * n0)
        x = rng.normal(size=(n1 + n0, width))
        if kind != "counts":
            # a weak, learnable shift on the first few features
            x[:, : min(4, width)] += 0.75 * y[:, None]
        order = rng.permutation(len(y))
        x, y = x[order], y[order]

    prefix = "t" if layout == SEQUENTIAL else "x"
    columns = [f"{prefix}{i}" for i in range(x.shape[1])]
    ids = [f"s{i:04d}" for i in range(len(y))]
    _write_table(out / "data.csv", ids, columns, x, [str(v) for v in y])
    dataset = {"layout": layout, "files": ["data.csv"], "label_column": "label",
               "class_map": {"0": 0, "1": 1}, "id_column": "id"}
    _write_json(out / "dataset.json", dataset)
    experiment = {"dataset": "dataset.json", "mode": next(iter(mode_block)), **mode_block,
                  "evolution": evolution, "adasyn": {"enabled": True}, "runs": 10, "master_seed": 0}
    _write_json(out / "experiment.json", experiment)
    return out


# --------------------------------------------------------------------------- #
# Command line
# --------------------------------------------------------------------------- #


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _on_off(text: str) -> bool:
    if text.lower() in ("on", "true", "yes", "1"):
        return True
    if text.lower() in ("off", "false", "no", "0"):
        return False
    raise argparse.ArgumentTypeError(f"expected on/off, got {text!r}")


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _experiment_flags(p: argparse.ArgumentParser, cv: bool) -> None:
    p.add_argument("manifest", help="experiment manifest (JSON)")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--nodes", type=int, help="number of CGP nodes (50)")
    p.add_argument("--mutation-rate", type=float, help="per-gene mutation probability (0.1)")
    p.add_argument("--iterations", type=int, help="generations of the evolution strategy (15000)")
    p.add_argument("--lambda", dest="offspring", type=int, help="offspring per generation (4)")
    p.add_argument("--recurrent-prob", type=float, help="probability of a recurrent connection (0.0 CGP, 0.1 RCGP)")
    p.add_argument("--adasyn", type=_on_off, help="ADASYN on the training set: on/off")
    p.add_argument("--beta", type=float, help="ADASYN balance level (1.0)")
    p.add_argument("--k-neighbors", type=int, help="ADASYN neighbourhood size (5)")
    p.add_argument("--layout", choices=(FLAT, SEQUENTIAL), help="override the dataset layout")
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    p.add_argument("--out", help="output directory (overrides output_dir)")
    p.add_argument("--force", action="store_true", help="write into a non-empty output directory")
    if cv:
        p.add_argument("--folds", type=int, help="number of folds k")
        p.add_argument("--reps", type=int, help="number of repetitions")
    else:
        p.add_argument("--runs", type=int, help="independent runs (10)")
        p.add_argument("--fractions", type=_floats, help="train,validation,test fractions (0.7,0.15,0.15)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cgpclf", description="Evolve CGP/RCGP binary classifiers.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("baseline", help="class counts and majority-class accuracy")
    p.add_argument("dataset", help="dataset manifest (JSON)")
    p.add_argument("--layout", choices=(FLAT, SEQUENTIAL))

    _experiment_flags(sub.add_parser("split-run", help="repeated stratified single-split experiment"), cv=False)
    _experiment_flags(sub.add_parser("cv-run", help="repeated k-fold cross-validation"), cv=True)

    p = sub.add_parser("export-dot", help="Graphviz source for a genotype JSON file")
    p.add_argument("genotype")
    p.add_argument("--names", help="comma-separated input names")
    p.add_argument("--out", help="output file (default: stdout)")

    p = sub.add_parser("synth-data", help="write a synthetic dataset with manifests")
    p.add_argument("kind", choices=SYNTH_KINDS)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--counts", type=_ints, help="class counts N1,N0 for the 'counts' kind")
    return parser


def apply_overrides(manifest: ExperimentManifest, args: argparse.Namespace) -> ExperimentManifest:
    evo = {}
    for flag, name in (("nodes", "n_nodes"), ("mutation_rate", "mutation_rate"), ("iterations", "max_iterations"),
                       ("offspring", "offspring"), ("recurrent_prob", "recurrence_probability")):
        if getattr(args, flag, None) is not None:
            evo[name] = getattr(args, flag)
    ada = {}
    if args.beta is not None:
        ada["beta"] = args.beta
    if args.k_neighbors is not None:
        ada["k_neighbors"] = args.k_neighbors
    changes: dict = {}
    if evo:
        changes["evolution"] = manifest.evolution.replace(**evo)
    if ada:
        changes["adasyn"] = replace(manifest.adasyn, **ada)
    for flag, name in (("adasyn", "adasyn_enabled"), ("seed", "master_seed"), ("layout", "layout"),
                       ("out", "output_dir"), ("runs", "runs"), ("fractions", "fractions"),
                       ("folds", "folds"), ("reps", "repetitions")):
        if getattr(args, flag, None) is not None:
            changes[name] = getattr(args, flag)
    return manifest.replace(**changes) if changes else manifest


def cmd_baseline(dataset_manifest: str | Path, layout: str | None = None, stream=None) -> float:
    stream = stream or sys.stdout
    dataset = DatasetManifest.read(dataset_manifest).load(layout)
    counts = dataset.class_counts
    baseline = majority_baseline(dataset.labels)
    print(f"class 0: {counts[0]}", file=stream)
    print(f"class 1: {counts[1]}", file=stream)
    print(f"majority baseline: {100 * baseline:.2f}", file=stream)
    return baseline


def _export_dot(args) -> None:
    try:
        text = Path(args.genotype).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{args.genotype}: cannot read ({exc.strerror})") from None
    try:
        genotype = Genotype.from_json(text)
    except (ValueError, KeyError, TypeError, ConfigError) as exc:
        raise InputError(f"{args.genotype}: not a genotype ({exc})") from None
    names = args.names.split(",") if args.names else None
    try:
        dot = export_dot(genotype, names)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if args.out:
        Path(args.out).write_text(dot, encoding="utf-8")
    else:
        sys.stdout.write(dot)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "baseline":
            cmd_baseline(args.dataset, args.layout)
        elif args.command in ("split-run", "cv-run"):
            manifest = apply_overrides(ExperimentManifest.read(args.manifest), args)
            if args.workers < 1:
                raise ConfigError("--workers must be >= 1")
            runner = run_single_split if args.command == "split-run" else run_cross_validation
            out = runner(manifest, args.workers, args.force)
            print((out / "summary.csv").read_text(encoding="utf-8"), end="")
            print(f"results written to {out}")
        elif args.command == "export-dot":
            _export_dot(args)
        elif args.command == "synth-data":
            out = synth_data(args.kind, args.out, args.seed, args.counts)
            print(f"wrote {out / 'data.csv'}, {out / 'dataset.json'}, {out / 'experiment.json'}")
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
