# tests/test_scm.py

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.graph.causal_diagram import parse_diagram
from src.graph.fixtures import BY_NAME
from src.identify.estimand import evaluate_estimand
from src.identify.symbolic import symbolic_id
from src.scm.canonical import (CanonicalSCM, build_canonical, enumerate_function, selector_size,
                               valuate_l3)
from src.scm.dataset import Dataset, sidecar_path
from src.scm.distribution import DistributionTable, all_assignments, assignment_index
from src.scm.examples import SODIUM_GRAPH, diet_model, sodium_model, sodium_table
from src.scm.factors import CliqueMixture, FreeTable
from src.scm.high_dim import decode_high_dim, expand_high_dim, is_expanded
from src.scm.widening import build_widened, widen_ate_tv_gap
from src.utils.errors import PositivityError, UnknownVariableError, WideningError


# golden models

def test_diet_observational_conditional():
    table = diet_model().valuate_l1()
    assert table.conditional({'B': 1}, {'D': 1}) == pytest.approx(0.375, abs=1e-9)


def test_diet_interventional():
    assert diet_model().valuate_l2({'D': 1}).prob({'B': 1}) == pytest.approx(120 / 256, abs=1e-9)


def test_diet_counterfactual():
    model = diet_model()
    value = model.conditional_l3([({'D': 1}, {'B': 1})], [({}, {'D': 0, 'B': 1})])
    assert value == pytest.approx(48 / 78, abs=1e-9)


def test_sodium_model_reproduces_its_table():
    np.testing.assert_allclose(sodium_model().valuate_l1().probs, sodium_table().probs, atol=1e-12)


def test_sodium_effect_exact_and_from_estimand():
    assert sodium_model().valuate_l2({'D': 1}).prob({'B': 1}) == pytest.approx(15 / 32, abs=1e-9)
    estimand = symbolic_id(parse_diagram(SODIUM_GRAPH), ['B'], ['D'])
    assert evaluate_estimand(estimand, sodium_table(), {'B': 1, 'D': 1}) == pytest.approx(15 / 32, abs=1e-9)


# selectors

def test_selector_sizes():
    assert [selector_size(k) for k in range(3)] == [2, 4, 16]


def test_enumerate_function_is_little_endian():
    # one parent: r=1 negates, r=2 copies
    assert [enumerate_function(1, [p]) for p in (0, 1)] == [1, 0]
    assert [enumerate_function(2, [p]) for p in (0, 1)] == [0, 1]
    assert enumerate_function(1, []) == 1
    with pytest.raises(IndexError):
        enumerate_function(4, [0])


def test_bow_table_shape():
    model = build_canonical(BY_NAME['bow'].graph, seed=3)
    assert [t.shape for t in model.selector_tables] == [(2, 4)]
    assert model.state_count() == 8


def test_build_canonical_is_deterministic():
    graph = BY_NAME['napkin'].graph
    assert build_canonical(graph, 11).model_hash() == build_canonical(graph, 11).model_hash()
    assert build_canonical(graph, 11).model_hash() != build_canonical(graph, 12).model_hash()


def test_tables_are_read_only():
    model = build_canonical(BY_NAME['backdoor'].graph, 0)
    with pytest.raises(ValueError):
        model.selector_tables[0][0] = 1.0


def test_bad_table_rejected():
    graph = BY_NAME['bow'].graph
    with pytest.raises(ValueError):
        CanonicalSCM(graph, [np.full((2, 4), 0.2)])
    with pytest.raises(ValueError):
        CanonicalSCM(graph, [np.full((4, 2), 1 / 8)])


def test_multi_clique_components_use_mixtures():
    model = build_canonical(BY_NAME['napkin'].graph, 5)
    kinds = {f.component: type(f) for f in model.factors}
    assert kinds[('W', 'X', 'Y')] is CliqueMixture
    assert kinds[('R',)] is FreeTable


@pytest.mark.parametrize('seed', range(10))
def test_unconfounded_selectors_stay_independent(seed):
    # napkin: X and Y share no bidirected edge, only W
    model = build_canonical(BY_NAME['napkin'].graph, seed)
    component = model.components.index(('W', 'X', 'Y'))
    joint = model.selector_tables[component].sum(axis=0)
    np.testing.assert_allclose(joint, np.outer(joint.sum(axis=1), joint.sum(axis=0)), atol=1e-12)


@pytest.mark.parametrize('seed', range(10))
def test_m_graph_ate_equals_tv(seed):
    model = build_canonical(BY_NAME['m'].graph, seed)
    assert model.ate('X', 'Y') == pytest.approx(model.tv('X', 'Y'), abs=1e-12)


def test_valuate_l2_zeroes_inconsistent_rows():
    model = build_canonical(BY_NAME['frontdoor'].graph, 2)
    table = model.valuate_l2({'X': 1})
    assert table.prob({'X': 0}) == 0.0
    assert table.prob({'X': 1}) == pytest.approx(1.0)


MARKOVIAN_TEXT = "A -> B\nA -> C\nB -> C\nC -> D\nB -> D\n"


@pytest.mark.parametrize('seed', range(3))
@pytest.mark.parametrize('intervention', [{'B': 1}, {'A': 0, 'C': 1}])
def test_markovian_truncated_factorisation(seed, intervention):
    graph = parse_diagram(MARKOVIAN_TEXT)
    model = build_canonical(graph, seed)
    observed = model.valuate_l1()
    do_table = model.valuate_l2(intervention)
    for row in all_assignments(len(graph.variables)):
        v = dict(zip(graph.variables, (int(b) for b in row)))
        if any(v[k] != x for k, x in intervention.items()):
            assert do_table.prob(v) == 0.0
            continue
        expected = 1.0
        for name in graph.variables:
            if name not in intervention:
                expected *= observed.conditional({name: v[name]}, {p: v[p] for p in graph.parents(name)})
        assert do_table.prob(v) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize('seed', range(5))
def test_backdoor_adjustment_matches_valuate_l2(seed):
    model = build_canonical(BY_NAME['backdoor'].graph, seed)
    observed = model.valuate_l1()
    for x in (0, 1):
        adjusted = sum(observed.conditional({'Y': 1}, {'X': x, 'Z': z}) * observed.prob({'Z': z})
                       for z in (0, 1))
        assert model.valuate_l2({'X': x}).prob({'Y': 1}) == pytest.approx(adjusted, abs=1e-12)


def test_l3_with_empty_intervention_is_l1():
    model = build_canonical(BY_NAME['iv'].graph, 4)
    assert valuate_l3(model, [({}, {'X': 1, 'Y': 0})]) == pytest.approx(
        model.valuate_l1().prob({'X': 1, 'Y': 0}), abs=1e-12)


def test_unknown_intervention_variable():
    with pytest.raises(UnknownVariableError):
        diet_model().valuate_l2({'Q': 1})


def test_json_round_trip_keeps_factors():
    model = build_canonical(BY_NAME['bad_m'].graph, 9)
    again = CanonicalSCM.from_json(model.to_json())
    assert again.model_hash() == model.model_hash()
    assert [type(f) for f in again.factors] == [type(f) for f in model.factors]


# sampling and datasets

def test_sample_matches_exact_table():
    model = build_canonical(BY_NAME['backdoor'].graph, 1)
    data = model.sample(100_000, seed=5)
    assert data.n == 100_000
    assert data.metadata['model_hash'] == model.model_hash()
    exact = model.valuate_l1().probs
    empirical = data.empirical_table().probs
    tolerance = 4 * np.sqrt(exact * (1 - exact) / data.n) + 1e-9
    assert np.all(np.abs(empirical - exact) <= tolerance)


def test_sample_is_deterministic_and_checks_n():
    model = build_canonical(BY_NAME['bow'].graph, 1)
    np.testing.assert_array_equal(model.sample(50, 3).rows, model.sample(50, 3).rows)
    with pytest.raises(ValueError):
        model.sample(0, 3)


def test_sample_under_intervention_clamps():
    model = build_canonical(BY_NAME['iv'].graph, 1)
    data = model.sample(200, 3, {'X': 0})
    assert not data.column('X').any()


def test_dataset_csv_round_trip(tmp_path):
    data = build_canonical(BY_NAME['napkin'].graph, 2).sample(30, 1)
    path = str(tmp_path / 'napkin.csv')
    data.to_csv(path)
    again = Dataset.from_csv(path)
    assert again.variables == data.variables
    np.testing.assert_array_equal(again.rows, data.rows)
    assert again.metadata['seed'] == 1
    assert (tmp_path / 'napkin.csv.meta.json').exists()
    assert sidecar_path(path).endswith('.meta.json')


def test_dataset_rejects_non_binary():
    with pytest.raises(ValueError):
        Dataset(['A'], np.array([[2]]))


# distribution tables

def test_assignment_index_first_variable_most_significant():
    rows = all_assignments(3)
    assert rows[1].tolist() == [0, 0, 1]
    np.testing.assert_array_equal(assignment_index(rows), np.arange(8))


def test_conditional_on_impossible_event():
    table = DistributionTable(['A', 'B'], [0.5, 0.5, 0.0, 0.0])
    with pytest.raises(PositivityError):
        table.conditional({'B': 1}, {'A': 1})


def test_reordered_preserves_events():
    table = sodium_table()
    swapped = table.reordered(['B', 'D', 'S'])
    assert swapped.prob({'D': 1, 'B': 0}) == pytest.approx(table.prob({'D': 1, 'B': 0}))


@given(st.lists(st.floats(min_value=0.01, max_value=1.0), min_size=8, max_size=8))
@settings(deadline=None, max_examples=50)
def test_marginal_sums_match(weights):
    probs = np.array(weights) / np.sum(weights)
    table = DistributionTable(['A', 'B', 'C'], probs)
    marginal = table.marginal(['C', 'A'])
    assert marginal.variables == ('A', 'C')
    assert marginal.probs.sum() == pytest.approx(1.0)
    assert marginal.prob({'A': 1, 'C': 0}) == pytest.approx(table.prob({'A': 1, 'C': 0}))


# widening

@pytest.mark.parametrize('name', ['backdoor', 'frontdoor', 'napkin'])
def test_widening_reaches_threshold(name):
    bench = BY_NAME[name]
    model, _ = build_widened(bench.graph, 'X', 'Y', seed=21, threshold=0.05)
    assert abs(model.ate('X', 'Y') - model.tv('X', 'Y')) >= 0.05


def test_widened_napkin_keeps_confounding_structure():
    model, _ = build_widened(BY_NAME['napkin'].graph, 'X', 'Y', seed=8, threshold=0.05)
    component = model.components.index(('W', 'X', 'Y'))
    joint = model.selector_tables[component].sum(axis=0)
    np.testing.assert_allclose(joint, np.outer(joint.sum(axis=1), joint.sum(axis=0)), atol=1e-10)


def test_widening_returns_model_already_above_threshold():
    model = diet_model()
    assert abs(model.ate('D', 'B') - model.tv('D', 'B')) >= 0.05
    assert widen_ate_tv_gap(model, 'D', 'B', threshold=0.05) is model


def test_widening_fails_when_gap_is_structurally_zero():
    model = build_canonical(BY_NAME['m'].graph, 0)
    with pytest.raises(WideningError):
        widen_ate_tv_gap(model, 'X', 'Y', threshold=0.05, max_steps=20)


@pytest.mark.parametrize('x_table', [[1.0, 0.0], [0.0, 1.0]])
def test_widening_rejects_a_degenerate_treatment(x_table):
    graph = parse_diagram("X -> Y\n")
    model = CanonicalSCM(graph, [np.array(x_table), np.full(4, 0.25)], [('X',), ('Y',)])
    with pytest.raises(WideningError):
        widen_ate_tv_gap(model, 'X', 'Y', threshold=0.05, max_steps=5)


# high-dimensional covariates

def test_expand_and_decode_high_dim():
    data = build_canonical(BY_NAME['backdoor'].graph, 3).sample(500, 2)
    wide = expand_high_dim(data, ['Z'], k=20, seed=4, exclude=('X', 'Y'))
    assert len(wide.variables) == 3 + 19
    assert wide.variables[0] == 'Z_0'
    assert is_expanded(wide)
    narrow = decode_high_dim(wide)
    assert narrow.variables == data.variables
    np.testing.assert_array_equal(narrow.rows, data.rows)


def test_expand_rejects_treatment_column():
    data = diet_model().sample(10, 0)
    with pytest.raises(ValueError):
        expand_high_dim(data, ['D'], exclude=('D', 'B'))
    with pytest.raises(ValueError):
        decode_high_dim(data)


def test_expand_rejects_unknown_covariate():
    data = Dataset(['X', 'Y'], np.array([[0, 1], [1, 0]]))
    with pytest.raises(UnknownVariableError):
        expand_high_dim(data, ['NOPE'], k=3)


def test_expand_accepts_a_one_shot_iterable():
    data = Dataset(['X', 'Y'], np.array([[0, 1], [1, 0], [1, 1]]))
    wide = expand_high_dim(data, (name for name in ['X', 'Y']), k=3)
    assert wide.variables == ('X_0', 'X_1', 'X_2', 'Y_0', 'Y_1', 'Y_2')
    np.testing.assert_array_equal(decode_high_dim(wide).rows, data.rows)


def test_expansion_keeps_the_treatment_outcome_marginal():
    data = build_canonical(BY_NAME['napkin'].graph, 5).sample(2000, 6)
    wide = expand_high_dim(data, ['W', 'R'], k=8, seed=1, exclude=('X', 'Y'))
    np.testing.assert_array_equal(wide.select(['X', 'Y']).rows, data.select(['X', 'Y']).rows)
    np.testing.assert_allclose(wide.select(['X', 'Y']).empirical_table().probs,
                               data.select(['X', 'Y']).empirical_table().probs)
    narrow = decode_high_dim(wide)
    np.testing.assert_allclose(narrow.empirical_table().probs, data.empirical_table().probs)
