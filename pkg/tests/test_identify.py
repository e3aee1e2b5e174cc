# tests/test_identify.py

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.graph.causal_diagram import parse_diagram
from src.graph.fixtures import BY_NAME, identifiable_benchmarks
from src.identify.estimand import NotIdentifiable, estimand_string, evaluate_estimand, is_identified
from src.identify.gap_test import gap_test, standard_error
from src.identify.neural import (evaluate_query_estimand, graph_hash, hybrid_id_estimate,
                                 neural_id, verdict_report)
from src.identify.symbolic import identify_query, symbolic_id
from src.ncm.query import AteQuery, InterventionalQuery
from src.scm.canonical import build_canonical
from src.scm.examples import SODIUM_GRAPH, sodium_table
from src.utils.errors import UnknownVariableError


# symbolic oracle

def test_oracle_matches_benchmark_labels(benchmark):
    result = symbolic_id(benchmark.graph, [benchmark.outcome], [benchmark.treatment])
    assert is_identified(result) == benchmark.identifiable


def test_bow_failure_names_the_hedge():
    result = symbolic_id(BY_NAME['bow'].graph, ['Y'], ['X'])
    assert isinstance(result, NotIdentifiable)
    assert estimand_string(result).startswith('FAIL(')


def test_backdoor_estimand_text():
    estimand = symbolic_id(BY_NAME['backdoor'].graph, ['Y'], ['X'])
    text = estimand_string(estimand)
    assert 'P(Y|Z,X)' in text
    assert 'Σ_{Z}' in text


@pytest.mark.parametrize('bench', identifiable_benchmarks(), ids=lambda b: b.name)
@pytest.mark.parametrize('seed', range(5))
def test_estimand_is_sound(bench, seed):
    model = build_canonical(bench.graph, seed)
    estimand = symbolic_id(bench.graph, [bench.outcome], [bench.treatment])
    table = model.valuate_l1()
    for x, y in itertools.product((0, 1), repeat=2):
        exact = model.valuate_l2({bench.treatment: x}).prob({bench.outcome: y})
        value = evaluate_estimand(estimand, table, {bench.treatment: x, bench.outcome: y})
        assert value == pytest.approx(exact, abs=1e-9)


def test_ate_from_estimand():
    bench = BY_NAME['frontdoor']
    model = build_canonical(bench.graph, 2)
    estimand = identify_query(bench.graph, AteQuery())
    assert evaluate_query_estimand(estimand, model.valuate_l1(), AteQuery()) == pytest.approx(
        model.ate('X', 'Y'), abs=1e-9)


def test_sodium_effect():
    estimand = symbolic_id(parse_diagram(SODIUM_GRAPH), ['B'], ['D'])
    assert evaluate_estimand(estimand, sodium_table(), {'D': 1, 'B': 1}) == pytest.approx(15 / 32)


def test_empty_treatment_is_the_marginal():
    graph = BY_NAME['iv'].graph
    model = build_canonical(graph, 0)
    estimand = symbolic_id(graph, ['Y'], [])
    assert evaluate_estimand(estimand, model.valuate_l1(), {'Y': 1}) == pytest.approx(
        model.valuate_l1().prob({'Y': 1}))


def test_symbolic_id_argument_checks():
    graph = BY_NAME['bow'].graph
    with pytest.raises(UnknownVariableError):
        symbolic_id(graph, ['Q'], ['X'])
    with pytest.raises(ValueError):
        symbolic_id(graph, [], ['X'])
    with pytest.raises(ValueError):
        symbolic_id(graph, ['X'], ['X'])
    with pytest.raises(ValueError):
        evaluate_estimand(symbolic_id(graph, ['Y'], ['X']), build_canonical(graph, 0).valuate_l1(),
                          {'X': 1, 'Y': 1})


# gap test

def test_gap_test_threshold_is_strict():
    assert gap_test([0.01, 0.01], 0.03).verdict == 'identifiable'
    assert gap_test([0.03, 0.03], 0.03).verdict == 'not-identifiable'


def test_standard_error_formulas():
    assert standard_error([0.0, 0.02], 0.01, 'printed') == pytest.approx(0.02 ** 0.5 / 20)
    assert standard_error([0.0, 0.02], 0.01, 'sample') == pytest.approx(0.01)
    with pytest.raises(ValueError):
        standard_error([0.0, 0.02], 0.01, 'jackknife')


def test_spread_can_flip_the_verdict():
    # same mean gap; the spread alone pushes the bound over tau
    assert gap_test([0.02, 0.02], 0.03).identifiable
    assert not gap_test([0.0, 0.04], 0.03).identifiable


def test_gap_test_needs_two_runs():
    with pytest.raises(ValueError):
        gap_test([0.01], 0.03)


@given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=2, max_size=8),
       st.randoms(use_true_random=False))
@settings(deadline=None, max_examples=100)
def test_verdict_ignores_run_order(gaps, rnd):
    shuffled = list(gaps)
    rnd.shuffle(shuffled)
    first, second = gap_test(gaps, 0.05), gap_test(shuffled, 0.05)
    assert first.identifiable == second.identifiable
    assert first.mean == second.mean


# neural identification

def test_neural_id_smoke(tiny_config, quiet_logger):
    bench = BY_NAME['backdoor']
    data = build_canonical(bench.graph, 1).sample(200, 2)
    result = neural_id(data, bench.graph, AteQuery(), tiny_config, tau=0.03, repeats=2,
                       logger=quiet_logger)
    assert len(result.traces) == 2
    assert len(result.test.gaps) == 2
    assert (result.estimate is not None) == result.identifiable
    report = verdict_report(AteQuery(), bench.graph, result)
    assert report['r'] == 2
    assert report['graph_hash'] == graph_hash(bench.graph)
    assert report['verdict'] in ('identifiable', 'not-identifiable')
    assert any(line.startswith('[') and 'VERDICT' in line for line in quiet_logger.get_logs())


def test_neural_id_needs_repeats(tiny_config):
    bench = BY_NAME['bow']
    data = build_canonical(bench.graph, 1).sample(50, 2)
    with pytest.raises(ValueError):
        neural_id(data, bench.graph, AteQuery(), tiny_config, repeats=1)


def test_hybrid_skips_training_when_not_identifiable(tiny_config):
    bench = BY_NAME['bow']
    data = build_canonical(bench.graph, 1).sample(50, 2)
    result = hybrid_id_estimate(data, bench.graph, InterventionalQuery({'Y': 1}, {'X': 1}),
                                tiny_config)
    assert not result.identifiable
    assert result.estimate is None and result.ncm is None
    report = verdict_report(InterventionalQuery({'Y': 1}, {'X': 1}), bench.graph, result)
    assert report['verdict'] == 'not-identifiable'
    assert report['estimand_string'].startswith('FAIL(')


def test_hybrid_estimates_when_identifiable(tiny_config):
    bench = BY_NAME['frontdoor']
    data = build_canonical(bench.graph, 1).sample(200, 2)
    result = hybrid_id_estimate(data, bench.graph, InterventionalQuery({'Y': 1}, {'X': 1}),
                                tiny_config)
    assert result.identifiable
    assert 0.0 <= result.estimate <= 1.0
