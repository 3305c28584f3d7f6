import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cgpclf.cgp import (
    EvolutionConfig,
    Genotype,
    active_nodes,
    evaluate_batch,
    evaluate_reference,
    evaluate_sequential,
    evaluate_static,
    evolve,
    evolve_arrays,
    fitness,
    mutate,
    predict,
    predict_outputs,
    random_genotype,
    used_inputs,
)
from cgpclf.cgp.genotype import mutation_mask
from cgpclf.dataset import Dataset, Layout, Sample
from cgpclf.errors import ConfigError, InputError

FN = {"add": 0, "sub": 1, "mul": 2, "div": 3}


def build(n_inputs, nodes, output, n_nodes=50, recurrent=False):
    """Genotype with ``nodes = {address: (fname, c0, c1)}``; every other node is add(0, 0)."""
    genes = np.zeros((n_nodes, 3), dtype=np.int64)
    for addr, (f, c0, c1) in nodes.items():
        genes[addr - n_inputs] = (FN[f], c0, c1)
    g = Genotype(n_inputs, n_nodes, genes, output, recurrent)
    g.validate()
    return g


def product_of_sum_and_difference():
    # (a + b) * (c - d) with a..d on addresses 0..3
    return build(4, {10: ("add", 0, 1), 20: ("sub", 2, 3), 30: ("mul", 10, 20)}, output=30)


def closure_oracle(g):
    """Fixed point of 'add every node referenced by the current set'."""
    n_in = g.n_inputs
    current = {g.output} if g.output >= n_in else set()
    while True:
        grown = set(current)
        for a in current:
            grown.update(int(c) for c in g.genes[a - n_in, 1:] if c >= n_in)
        if grown == current:
            return sorted(current)
        current = grown


def random_genotypes(count, seed, n_inputs=4, p=0.0, n_nodes=50):
    rng = np.random.default_rng(seed)
    cfg = EvolutionConfig(n_nodes=n_nodes, recurrence_probability=p)
    return [random_genotype(cfg, n_inputs, rng) for _ in range(count)], rng


# --- genotype geometry ---------------------------------------------------------


def test_gene_count_default():
    g = random_genotype(EvolutionConfig(), 16, np.random.default_rng(0))
    assert g.n_genes == 151
    assert g.genes.shape == (50, 3)


def test_feed_forward_initialization_is_acyclic():
    gs, _ = random_genotypes(200, 1, p=0.0)
    for g in gs:
        assert not g.recurrent
        g.validate()
        limits = g.n_inputs + np.arange(g.n_nodes)
        assert (g.genes[:, 1] < limits).all() and (g.genes[:, 2] < limits).all()


def test_full_recurrence_backward_share():
    n_in, n_nodes = 4, 1000
    g = random_genotype(EvolutionConfig(n_nodes=n_nodes, recurrence_probability=1.0), n_in, np.random.default_rng(5))
    i = np.arange(n_nodes)[:, None]
    hits = (g.genes[:, 1:] >= n_in + i).sum()
    # each connection of node i is uniform over n_in + n_nodes addresses, n_nodes - i of them are >= n_in + i
    p_i = (n_nodes - np.arange(n_nodes)) / (n_in + n_nodes)
    mean = 2 * p_i.sum()
    sd = np.sqrt(2 * (p_i * (1 - p_i)).sum())
    assert abs(hits - mean) <= 3 * sd


def test_random_genotype_deterministic():
    cfg = EvolutionConfig(recurrence_probability=0.1)
    a = random_genotype(cfg, 7, np.random.default_rng(42))
    b = random_genotype(cfg, 7, np.random.default_rng(42))
    assert a == b


def test_json_round_trip():
    gs, _ = random_genotypes(20, 2, p=0.1)
    for g in gs:
        back = Genotype.from_json(g.to_json())
        assert back == g
        assert back.to_json() == g.to_json()
    assert set(json.loads(gs[0].to_json())) == {"n_inputs", "n_nodes", "genes", "output", "recurrent"}


def test_from_dict_rejects_cycle_in_feed_forward():
    g = build(2, {2: ("add", 0, 1)}, output=2, n_nodes=3)
    data = g.to_dict()
    data["genes"][0][1] = 2
    with pytest.raises(ConfigError):
        Genotype.from_dict(data)


# --- active nodes -------------------------------------------------------------


def test_output_on_input_has_no_active_nodes():
    assert active_nodes(build(4, {}, output=0)) == []


def test_chain():
    g = build(4, {53: ("add", 4, 4), 4: ("sub", 0, 1)}, output=53)
    assert active_nodes(g) == [4, 53]


@pytest.mark.parametrize("p", [0.0, 0.1, 0.5])
def test_active_nodes_matches_closure(p):
    gs, _ = random_genotypes(300, 3, p=p)
    for g in gs:
        assert active_nodes(g) == closure_oracle(g)


def test_used_inputs():
    assert used_inputs(build(6, {}, output=0)) == {0}
    assert used_inputs(build(6, {}, output=5)) == {5}
    assert used_inputs(product_of_sum_and_difference()) == {0, 1, 2, 3}


# --- evaluation ---------------------------------------------------------------


def test_add_node():
    g = build(2, {2: ("add", 0, 1)}, output=2)
    assert evaluate_static(g, [2.0, 3.0]) == 5.0


def test_protected_division():
    g = build(2, {2: ("div", 0, 1)}, output=2)
    assert evaluate_static(g, [3.0, 0.0]) == 3.0
    assert evaluate_static(g, [3.0, 1e-10]) == 3.0
    assert evaluate_static(g, [3.0, 2.0]) == 1.5


def test_recurrent_self_loop_static():
    g = build(1, {1: ("add", 0, 1)}, output=1, recurrent=True)
    assert evaluate_static(g, [1.0], passes=1) == 1.0
    assert evaluate_static(g, [1.0], passes=3) == 3.0


def test_forward_reference_reads_previous_pass():
    # node 1 reads node 2, which is only computed after it in the sweep
    g = build(1, {1: ("add", 2, 0), 2: ("mul", 0, 0)}, output=1, n_nodes=2, recurrent=True)
    assert evaluate_static(g, [3.0], passes=1) == 3.0  # 0 + 3
    assert evaluate_static(g, [3.0], passes=2) == 12.0  # 9 + 3


def test_accumulator_sequence():
    g = build(1, {1: ("add", 0, 1)}, output=1, recurrent=True)
    assert evaluate_sequential(g, [[1.0], [2.0], [3.0]]) == 6.0


def test_expressiveness_construction():
    g = product_of_sum_and_difference()
    rng = np.random.default_rng(9)
    for a, b, c, d in rng.normal(size=(50, 4)):
        assert evaluate_static(g, [a, b, c, d]) == (a + b) * (c - d)


def test_non_finite_input_rejected():
    g = build(2, {2: ("add", 0, 1)}, output=2)
    with pytest.raises(InputError):
        evaluate_static(g, [1.0, np.nan])
    with pytest.raises(InputError):
        evaluate_sequential(g, [[1.0, 2.0], [np.inf, 0.0]])


@pytest.mark.parametrize("p", [0.0, 0.1, 1.0])
def test_kernel_matches_reference_static(p):
    gs, rng = random_genotypes(300, 4, p=p)
    for g in gs:
        x = rng.normal(size=4)
        for passes in (1, 2):
            got = evaluate_static(g, x, passes)
            want = evaluate_reference(g, [x], passes)
            assert got == want or (np.isnan(got) and np.isnan(want))


@pytest.mark.parametrize("p", [0.0, 0.1, 1.0])
def test_kernel_matches_reference_sequential(p):
    gs, rng = random_genotypes(200, 5, n_inputs=3, p=p)
    for g in gs:
        m = rng.normal(size=(int(rng.integers(1, 6)), 3))
        got = evaluate_sequential(g, m)
        want = evaluate_reference(g, list(m))
        assert got == want or (np.isnan(got) and np.isnan(want))


def test_single_row_sequence_equals_static():
    gs, rng = random_genotypes(1000, 6, p=0.1)
    X = rng.normal(size=(1000, 1, 4))
    for g, x in zip(gs, X):
        a, b = evaluate_sequential(g, x), evaluate_static(g, x[0])
        assert a == b or (np.isnan(a) and np.isnan(b))


def test_feed_forward_sequence_depends_on_last_row_only():
    gs, rng = random_genotypes(200, 7, p=0.0)
    for g in gs:
        m = rng.normal(size=(5, 4))
        perturbed = m.copy()
        perturbed[:-1] += rng.normal(size=(4, 4))
        a, b = evaluate_sequential(g, m), evaluate_sequential(g, perturbed)
        assert a == b or (np.isnan(a) and np.isnan(b))


def test_sequential_state_resets_between_samples():
    gs, rng = random_genotypes(50, 8, n_inputs=2, p=0.3)
    X = rng.normal(size=(12, 6, 2))
    perm = rng.permutation(12)
    for g in gs:
        out = evaluate_batch(g, X, sequential=True)
        np.testing.assert_array_equal(evaluate_batch(g, X[perm], sequential=True), out[perm])


def test_acyclic_reference_never_reads_uncomputed():
    gs, rng = random_genotypes(300, 10, p=0.0)
    for g in gs:
        evaluate_reference(g, [rng.normal(size=4)])  # asserts internally


# --- prediction and fitness ---------------------------------------------------


def test_predict_threshold_and_tie():
    assert predict_outputs([0.2, -0.2, 0.0]).tolist() == [1, 0, 0]
    g = build(1, {}, output=0)
    layout = Layout.flat(1)
    assert predict(g, Sample("a", np.array([0.2]), 1), layout) == 1
    assert predict(g, Sample("a", np.array([-0.2]), 0), layout) == 0
    assert predict(g, Sample("a", np.array([0.0]), 0), layout) == 0


def test_fitness_arithmetic():
    g = build(1, {}, output=0)
    ds = Dataset(Layout.flat(1), [[1.0], [1.0], [-1.0], [-1.0]], [1, 0, 0, 0], ("a", "b", "c", "d"))
    assert fitness(g, ds) == 0.75
    ds_all = Dataset(Layout.flat(1), np.ones((10, 1)), np.ones(10), tuple(map(str, range(10))))
    assert fitness(g, ds_all) == 1.0


def test_constant_classifier_on_pd_vs_hc():
    g = build(1, {1: ("div", 0, 0)}, output=1)  # x / x == 1 > 0 for x != 0
    x = np.random.default_rng(0).uniform(1, 2, size=(110, 1))
    ds = Dataset(Layout.flat(1), x, [1] * 102 + [0] * 8, tuple(map(str, range(110))))
    assert fitness(g, ds) == pytest.approx(0.9273, abs=5e-5)
    assert fitness(g, ds) == 102 / 110


def test_fitness_empty_subset():
    g = build(1, {}, output=0)
    with pytest.raises(ValueError):
        fitness(g, Dataset(Layout.flat(1), np.zeros((0, 1)), [], ()))


# --- mutation -----------------------------------------------------------------


def test_mutation_mask_binomial_mean():
    rng = np.random.default_rng(11)
    counts = [mutation_mask(151, 0.1, rng).sum() for _ in range(10000)]
    assert abs(np.mean(counts) - 15.1) <= 0.5


def _change_probabilities(g, rate, p):
    """Closed-form chance that each gene's value differs after one mutation."""
    n_in, n = g.n_inputs, g.n_nodes
    probs = np.zeros((n, 3))
    nf = len(g.functions)
    probs[:, 0] = rate * (1 - 1 / nf)
    for i in range(n):
        for j in (1, 2):
            c = g.genes[i, j]
            same_full = 1 / (n_in + n)
            same_ff = 1 / (n_in + i) if c < n_in + i else 0.0
            probs[i, j] = rate * (1 - (p * same_full + (1 - p) * same_ff))
    out = rate * (1 - 1 / (n_in + n))
    return probs.sum() + out


@pytest.mark.parametrize("p", [0.0, 0.1])
def test_mutation_changed_gene_count(p):
    gs, rng = random_genotypes(1, 12, p=p)
    g = gs[0]
    trials = 5000
    diffs = []
    for _ in range(trials):
        child = mutate(g, 0.1, rng, p)
        diffs.append(int((child.genes != g.genes).sum()) + int(child.output != g.output))
    expected = _change_probabilities(g, 0.1, p)
    assert abs(np.mean(diffs) - expected) <= 4 * np.std(diffs) / np.sqrt(trials)


def test_mutation_rate_one_redraws_everything_legally():
    gs, rng = random_genotypes(50, 13, p=0.0)
    for g in gs:
        child = mutate(g, 1.0, rng)
        child.validate()
        # a redraw keeps the old value with small probability only
        assert (child.genes != g.genes).mean() > 0.5
    assert all(not g.recurrent for g in gs)


def test_mutation_leaves_parent_untouched():
    gs, rng = random_genotypes(1, 14)
    g = gs[0]
    before = g.genes.copy()
    mutate(g, 0.5, rng)
    np.testing.assert_array_equal(g.genes, before)


def test_mutation_rate_bounds():
    gs, rng = random_genotypes(1, 15)
    with pytest.raises(ConfigError):
        mutate(gs[0], 0.0, rng)


def test_mutation_respects_feed_forward():
    gs, rng = random_genotypes(20, 16, p=0.0)
    for g in gs:
        for _ in range(20):
            g = mutate(g, 0.3, rng)
            g.validate()


def mutate_inactive(g, rng, p):
    """Redraw every gene of every inactive node."""
    child = g.copy()
    active = set(active_nodes(g))
    n_in = g.n_inputs
    for i in range(g.n_nodes):
        if n_in + i in active:
            continue
        hi = n_in + g.n_nodes if (g.recurrent and rng.random() < p) else n_in + i
        child.genes[i] = (rng.integers(len(g.functions)), rng.integers(hi), rng.integers(hi))
    return child


def test_phenotype_neutrality_sample():
    gs, rng = random_genotypes(200, 17, p=0.1)
    for g in gs:
        child = mutate_inactive(g, rng, 0.1)
        X = rng.normal(size=(10, 1, 4))
        a = evaluate_batch(g, X, sequential=False)
        b = evaluate_batch(child, X, sequential=False)
        assert a.tobytes() == b.tobytes()
        ref = np.array([evaluate_reference(child, [x[0]]) for x in X])
        assert ref.tobytes() == a.tobytes()


def test_inactive_mutation_keeps_predictions():
    gs, rng = random_genotypes(1000, 18, p=0.0)
    layout = Layout.flat(4)
    for g in gs:
        child = mutate_inactive(g, rng, 0.0)
        s = Sample("x", rng.normal(size=4), 0)
        assert predict(g, s, layout) == predict(child, s, layout)


# --- evolution ----------------------------------------------------------------


def separable(n=100, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1, 1, size=(n, 2))
    return Dataset(Layout.flat(2), x, (x[:, 0] > x[:, 1]).astype(int), tuple(map(str, range(n))))


def test_zero_iterations_returns_initial_parent():
    ds = separable()
    cfg = EvolutionConfig(max_iterations=0, seed=3)
    r = evolve(ds, ds, cfg)
    g0 = random_genotype(cfg, 2, np.random.default_rng(3))
    assert r.best_genotype == g0
    assert r.iterations == 0
    assert r.best_train_accuracy == fitness(g0, ds)
    assert r.best_validation_accuracy == fitness(g0, ds)


def test_evolution_deterministic():
    ds = separable(seed=1)
    train, val = ds.subset(range(70)), ds.subset(range(70, 85))
    cfg = EvolutionConfig(max_iterations=300, seed=5, recurrence_probability=0.1)
    a, b = evolve(train, val, cfg), evolve(train, val, cfg)
    assert a == b


def test_history_and_parent_monotone():
    ds = separable(seed=2)
    seen = []
    r = evolve(ds.subset(range(80)), None, EvolutionConfig(max_iterations=400, seed=1),
               callback=lambda it, f: seen.append(f))
    assert r.best_validation_accuracy is None
    accs = [a for _, a in r.history]
    assert all(x < y for x, y in zip(accs, accs[1:]))
    assert all(x <= y for x, y in zip(seen, seen[1:]))
    assert r.best_train_accuracy == r.final_train_accuracy == accs[-1]


def test_best_genotype_scores_match_reported():
    ds = separable(seed=3)
    train, val = ds.subset(range(60)), ds.subset(range(60, 100))
    r = evolve(train, val, EvolutionConfig(max_iterations=200, seed=8))
    assert fitness(r.best_genotype, train) == r.best_train_accuracy
    assert fitness(r.best_genotype, val) == r.best_validation_accuracy


def test_stops_at_perfect_training_fitness():
    ds = separable(seed=4)
    r = evolve(ds, None, EvolutionConfig(seed=0))
    assert r.final_train_accuracy == 1.0
    assert r.iterations < 15000


def test_layout_mismatch():
    with pytest.raises(ConfigError):
        evolve(separable(), None, EvolutionConfig(max_iterations=1), n_inputs=3)


def test_separable_quick():
    ds = separable(seed=6)
    r = evolve_arrays(ds.features[:70], ds.labels[:70], ds.features[70:], ds.labels[70:],
                      EvolutionConfig(seed=2, max_iterations=2000))
    assert r.best_validation_accuracy >= 0.9


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.01, 1.0))
def test_config_round_trip(seed, rate):
    cfg = EvolutionConfig(seed=seed, mutation_rate=rate)
    assert EvolutionConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


@pytest.mark.parametrize("bad", [dict(mutation_rate=0.0), dict(offspring=0), dict(max_iterations=-1),
                                 dict(recurrence_probability=1.5), dict(n_nodes=0)])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        EvolutionConfig(**bad)
