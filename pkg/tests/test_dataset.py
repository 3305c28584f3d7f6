import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cgpclf.dataset import (
    FLAT,
    SEQUENTIAL,
    CsvSpec,
    Dataset,
    DatasetManifest,
    Layout,
    assemble_sequential,
    concat_flat,
    load_csv,
    split_counts,
    stratified_split,
)
from cgpclf.errors import AssemblyError, ConfigError, ConsistencyError, LabelError, ParseError, SplitError

PD_HC = CsvSpec("group", {"PD": 1, "HC": 0}, id_column="id")


def write_csv(path, header, rows):
    path.write_text("\n".join([",".join(header)] + [",".join(map(str, r)) for r in rows]) + "\n", encoding="utf-8")
    return path


def flat(features, labels, ids=None):
    features = np.asarray(features, dtype=float)
    ids = ids or [f"s{i}" for i in range(len(features))]
    return Dataset(Layout.flat(features.shape[1]), features, labels, tuple(ids))


# --- load_csv ------------------------------------------------------------------


def test_load_pd_vs_hc_counts(tmp_path):
    rng = np.random.default_rng(0)
    labels = ["PD"] * 102 + ["HC"] * 8
    header = ["id", "group"] + [f"t{j}" for j in range(210)]
    rows = [[f"p{i}", lab, *rng.normal(size=210).round(6)] for i, lab in enumerate(labels)]
    ds = load_csv(write_csv(tmp_path / "pcc.csv", header, rows), PD_HC)
    assert len(ds) == 110
    assert ds.layout == Layout.flat(210)
    assert ds.class_counts == {1: 102, 0: 8}
    assert not ds.synthetic.any()
    assert ds.ids[:2] == ("p0", "p1")


def test_load_header_only(tmp_path):
    ds = load_csv(write_csv(tmp_path / "e.csv", ["id", "group", "a", "b"], []), PD_HC)
    assert len(ds) == 0
    assert ds.layout.n_features == 2
    assert ds.class_counts == {0: 0, 1: 0}


def test_label_outside_declared_pair(tmp_path):
    path = write_csv(tmp_path / "x.csv", ["id", "group", "a"], [["p0", "XYZ", 1.0]])
    with pytest.raises(LabelError, match="row 1"):
        load_csv(path, PD_HC)


def test_malformed_row(tmp_path):
    path = write_csv(tmp_path / "x.csv", ["id", "group", "a"], [["p0", "PD", 1.0], ["p1", "HC"]])
    with pytest.raises(ParseError, match="row 2"):
        load_csv(path, PD_HC)


def test_non_numeric_cell(tmp_path):
    path = write_csv(tmp_path / "x.csv", ["id", "group", "a"], [["p0", "PD", "abc"]])
    with pytest.raises(ParseError, match="non-numeric"):
        load_csv(path, PD_HC)


def test_ids_default_to_row_numbers(tmp_path):
    path = write_csv(tmp_path / "x.csv", ["group", "a"], [["PD", 1], ["HC", 2]])
    ds = load_csv(path, CsvSpec("group", {"PD": 1, "HC": 0}))
    assert ds.ids == ("1", "2")
    assert ds.labels.tolist() == [1, 0]


def test_class_map_must_be_binary():
    with pytest.raises(ConfigError):
        CsvSpec("group", {"PD": 1, "HC": 1})


# --- region layouts ------------------------------------------------------------


def test_assemble_sequential_shape():
    rng = np.random.default_rng(1)
    labels = rng.integers(0, 2, 110)
    regions = [flat(rng.normal(size=(110, 210)), labels) for _ in range(4)]
    seq = assemble_sequential(regions)
    assert seq.layout == Layout.sequential(4, 210)
    assert seq[0].features.shape == (210, 4)
    np.testing.assert_array_equal(seq.features[:, :, 2], regions[2].features[:, 0, :])


def test_assemble_minimal():
    regions = [flat([[float(r)]], [1]) for r in range(4)]
    seq = assemble_sequential(regions)
    assert seq[0].features.tolist() == [[0.0, 1.0, 2.0, 3.0]]


def test_assemble_aligns_by_id():
    a = flat([[1.0], [2.0]], [0, 1], ["x", "y"])
    b = flat([[20.0], [10.0]], [1, 0], ["y", "x"])
    seq = assemble_sequential([a, b])
    assert seq.features[:, 0, :].tolist() == [[1.0, 10.0], [2.0, 20.0]]


def test_relabeled_region_is_inconsistent():
    rng = np.random.default_rng(2)
    labels = np.array([0, 1, 1, 0])
    regions = [flat(rng.normal(size=(4, 3)), labels) for _ in range(4)]
    flipped = labels.copy()
    flipped[2] = 0
    regions[3] = flat(regions[3].features[:, 0, :], flipped)
    with pytest.raises(ConsistencyError):
        assemble_sequential(regions)
    with pytest.raises(ConsistencyError):
        concat_flat(regions)


def test_id_mismatch():
    a = flat([[1.0]], [0], ["x"])
    b = flat([[1.0]], [0], ["y"])
    with pytest.raises(AssemblyError):
        assemble_sequential([a, b])


def test_concat_flat_order():
    vecs = [np.array([[1.0, 2.0]]), np.array([[3.0, 4.0]]), np.array([[5.0, 6.0]]), np.array([[7.0, 8.0]])]
    out = concat_flat([flat(v, [1]) for v in vecs])
    assert out.layout == Layout.flat(8)
    assert out[0].features.tolist() == [1, 2, 3, 4, 5, 6, 7, 8]


def test_concat_duplicated_region():
    rng = np.random.default_rng(3)
    region = flat(rng.normal(size=(5, 210)), [0, 1, 0, 1, 1])
    out = concat_flat([region] * 4)
    assert out.layout.n_features == 840
    np.testing.assert_array_equal(out.flat_features(), np.tile(region.flat_features(), 4))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(1, 8), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_layout_closure(n, t, c, seed):
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, n)
    regions = [flat(rng.normal(size=(n, t)), labels) for _ in range(c)]
    seq = assemble_sequential(regions)
    cat = concat_flat(regions)
    # channel-major flattening of the T x C matrices is the concatenated vector
    np.testing.assert_array_equal(seq.features.transpose(0, 2, 1).reshape(n, -1), cat.flat_features())


def test_manifest_loads_both_layouts(tmp_path):
    rng = np.random.default_rng(4)
    files = []
    for r in ("PCC", "mPFC", "RIPC", "LIPC"):
        rows = [[f"p{i}", "PD" if i % 3 else "HC", *rng.normal(size=5).round(4)] for i in range(9)]
        files.append(write_csv(tmp_path / f"{r}.csv", ["id", "group", "a", "b", "c", "d", "e"], rows).name)
    data = {"layout": "sequential", "files": files, "label_column": "group",
            "class_map": {"PD": 1, "HC": 0}, "region_order": ["PCC", "mPFC", "RIPC", "LIPC"], "id_column": "id"}
    (tmp_path / "m.json").write_text(json.dumps(data))
    m = DatasetManifest.read(tmp_path / "m.json")
    assert m.load().layout == Layout.sequential(4, 5)
    assert m.load(FLAT).layout == Layout.flat(20)


def test_manifest_rejects_bad_layout():
    with pytest.raises(ConfigError):
        DatasetManifest.from_dict({"layout": "grid", "files": ["a"], "label_column": "g", "class_map": {"a": 0, "b": 1}})


# --- stratified_split ----------------------------------------------------------


def labelled(counts):
    n1, n0 = counts
    labels = np.array([1] * n1 + [0] * n0)
    return flat(np.arange(len(labels), dtype=float)[:, None], labels)


def per_class(ds, idx):
    lab = ds.labels[idx]
    return int((lab == 1).sum()), int((lab == 0).sum())


def test_split_70_15_15_rounding():
    assert split_counts(102, (0.70, 0.15, 0.15)) == (72, 15, 15)
    assert split_counts(8, (0.70, 0.15, 0.15)) == (6, 1, 1)
    ds = labelled((102, 8))
    s = stratified_split(ds, (0.70, 0.15, 0.15), seed=7)
    assert per_class(ds, s.train) == (72, 6)
    assert per_class(ds, s.validation) == (15, 1)
    assert per_class(ds, s.test) == (15, 1)


def test_split_exact_division():
    ds = labelled((10, 10))
    s = stratified_split(ds, (0.8, 0.1, 0.1), seed=0)
    assert per_class(ds, s.train) == (8, 8)
    assert per_class(ds, s.validation) == (1, 1)
    assert per_class(ds, s.test) == (1, 1)


def test_split_deterministic():
    ds = labelled((30, 12))
    a = stratified_split(ds, (0.7, 0.15, 0.15), seed=11)
    b = stratified_split(ds, (0.7, 0.15, 0.15), seed=11)
    c = stratified_split(ds, (0.7, 0.15, 0.15), seed=12)
    for x, y in zip((a.train, a.validation, a.test), (b.train, b.validation, b.test)):
        np.testing.assert_array_equal(x, y)
    assert not np.array_equal(a.test, c.test)


def test_split_too_small():
    with pytest.raises(SplitError):
        stratified_split(labelled((10, 2)), (0.1, 0.45, 0.45), seed=0)


def test_split_bad_fractions():
    with pytest.raises(ConfigError):
        stratified_split(labelled((10, 10)), (0.5, 0.5, 0.5), seed=0)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 200), st.integers(1, 200),
       st.sampled_from([(0.7, 0.15, 0.15), (0.8, 0.1, 0.1), (0.6, 0.2, 0.2), (0.5, 0.25, 0.25)]),
       st.integers(0, 2**32 - 1))
def test_split_partition_and_stratification(n1, n0, fractions, seed):
    ds = labelled((n1, n0))
    try:
        s = stratified_split(ds, fractions, seed)
    except SplitError:
        assert any(split_counts(n, fractions)[0] <= 0 for n in (n1, n0))
        return
    allidx = np.concatenate([s.train, s.validation, s.test])
    assert sorted(allidx.tolist()) == list(range(len(ds)))
    for c, n_c in ((1, n1), (0, n0)):
        for part, f in zip((s.train, s.validation, s.test), fractions):
            share = np.sum(ds.labels[part] == c) / n_c
            assert abs(share - f) <= 1 / n_c + 1e-12


def test_dataset_immutable():
    ds = labelled((3, 2))
    with pytest.raises(ValueError):
        ds.features[0, 0, 0] = 5.0


def test_sequential_sample_shape():
    ds = Dataset(Layout.sequential(2, 3), np.zeros((1, 3, 2)), [1], ("a",))
    assert ds.layout.kind == SEQUENTIAL
    assert ds[0].features.shape == (3, 2)
