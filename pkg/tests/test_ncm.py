# tests/test_ncm.py

import numpy as np
import pytest

from src.autodiff.tensor import Tape
from src.graph.fixtures import BY_NAME
from src.ncm.estimator import (MonteCarloConfig, ate_ncm, estimate_prob, estimate_query, estimate_table,
                               log_prob_rows)
from src.ncm.model import Ncm, construct_ncm, induced_diagram
from src.ncm.query import AteQuery, InterventionalQuery, parse_query
from src.ncm.sampling import gumbel_max_binary, sample_ncm
from src.nn.mlp import Mlp, mlp_init
from src.scm.examples import diet_model
from src.utils.errors import UnknownVariableError

MC = MonteCarloConfig(m=400, seed=3)


def test_wiring_reproduces_the_diagram(benchmark):
    ncm = construct_ncm(benchmark.graph, hidden=(4,), seed=0)
    assert induced_diagram(ncm) == benchmark.graph


def test_napkin_blocks_and_input_widths():
    ncm = construct_ncm(BY_NAME['napkin'].graph, hidden=(4,), seed=0)
    assert {frozenset(b) for b in ncm.u_blocks} == {frozenset('WX'), frozenset('WY'), frozenset('R')}
    # W sits in two blocks of two; X has one parent and one block
    assert ncm.input_dim('W') == 4
    assert ncm.input_dim('X') == 3
    assert ncm.u_dim == 5


def test_construct_is_seeded():
    graph = BY_NAME['frontdoor'].graph
    a = construct_ncm(graph, hidden=(4,), seed=5)
    b = construct_ncm(graph, hidden=(4,), seed=5)
    for p, q in zip(a.parameters(), b.parameters()):
        np.testing.assert_array_equal(p.data, q.data)


def test_wrong_net_width_rejected():
    graph = BY_NAME['bow'].graph
    nets = {'X': mlp_init(2, (4,), seed=0), 'Y': mlp_init(2, (4,), seed=0)}
    with pytest.raises(ValueError):
        Ncm(graph, [('X', 'Y')], nets, (4,))


def test_dict_round_trip():
    ncm = construct_ncm(BY_NAME['iv'].graph, hidden=(4,), seed=1)
    again = Ncm.from_dict(ncm.to_dict())
    assert again.graph == ncm.graph
    assert estimate_query(again, {'Y': 1}, {'X': 1}, MC).item() == pytest.approx(
        estimate_query(ncm, {'Y': 1}, {'X': 1}, MC).item())


@pytest.mark.parametrize('intervention', [{}, {'X': 1}])
def test_estimated_table_is_normalised(benchmark, intervention):
    ncm = construct_ncm(benchmark.graph, hidden=(4,), seed=2)
    table = estimate_table(ncm, MC, intervention)
    assert table.probs.sum() == pytest.approx(1.0, abs=1e-9)
    if intervention:
        assert table.prob({'X': 0}) == 0.0


def test_query_sums_consistent_assignments():
    ncm = construct_ncm(BY_NAME['backdoor'].graph, hidden=(4,), seed=4)
    table = estimate_table(ncm, MC, {'X': 1})
    assert estimate_query(ncm, {'Y': 1}, {'X': 1}, MC).item() == pytest.approx(
        table.prob({'Y': 1}), abs=1e-12)


def test_inconsistent_assignment_has_zero_probability():
    ncm = construct_ncm(BY_NAME['bow'].graph, hidden=(4,), seed=0)
    assert estimate_prob(ncm, {'X': 0, 'Y': 1}, {'X': 1}, MC).item() == 0.0
    assert estimate_query(ncm, {'X': 0}, {'X': 1}, MC).item() == 0.0
    with pytest.raises(ValueError):
        estimate_prob(ncm, {'X': 0}, {}, MC)
    with pytest.raises(UnknownVariableError):
        estimate_query(ncm, {'Q': 1}, {}, MC)


def test_chunked_estimate_matches_single_pass():
    ncm = construct_ncm(BY_NAME['napkin'].graph, hidden=(4,), seed=6)
    rows = np.array([[0, 1, 0, 1], [1, 1, 1, 0]])
    whole = log_prob_rows(ncm, rows, {}, MC).data
    chunked = log_prob_rows(ncm, rows, {}, MonteCarloConfig(m=400, seed=3, batch_size=64)).data
    np.testing.assert_allclose(whole, chunked, atol=1e-10)


def test_query_is_differentiable():
    ncm = construct_ncm(BY_NAME['frontdoor'].graph, hidden=(4,), seed=0)
    with Tape() as tape:
        value = estimate_query(ncm, {'Y': 1}, {'X': 1}, MC)
    grads = tape.backward(value)
    assert set(grads) <= set(ncm.parameters())
    # X is clamped, so only the Z and Y nets receive gradient
    assert ncm.nets['Z'].weights[0] in grads
    assert ncm.nets['X'].weights[0] not in grads


def test_samples_agree_with_estimated_table():
    ncm = construct_ncm(BY_NAME['iv'].graph, hidden=(4,), seed=8)
    data = sample_ncm(ncm, 20_000, seed=1)
    estimated = estimate_table(ncm, MonteCarloConfig(m=20_000, seed=2)).probs
    np.testing.assert_allclose(data.empirical_table().probs, estimated, atol=0.03)


def test_sampling_clamps_and_checks():
    ncm = construct_ncm(BY_NAME['iv'].graph, hidden=(4,), seed=8)
    assert sample_ncm(ncm, 50, {'X': 1}, seed=0).column('X').all()
    with pytest.raises(ValueError):
        sample_ncm(ncm, 0)
    with pytest.raises(UnknownVariableError):
        sample_ncm(ncm, 5, {'Q': 1})


def test_gumbel_max_binary_frequencies():
    rng = np.random.default_rng(0)
    n = 100_000
    draws = gumbel_max_binary(np.array([-50.0, 50.0] + [0.0] * n), rng)
    assert draws[0] == 0 and draws[1] == 1
    assert draws[2:].mean() == pytest.approx(0.5, abs=4 * np.sqrt(0.25 / n))
    skewed = gumbel_max_binary(np.full(n, 1.0), rng)
    p = 1.0 / (1.0 + np.exp(-1.0))
    assert skewed.mean() == pytest.approx(p, abs=4 * np.sqrt(p * (1 - p) / n))


def _affine_bow():
    # logit_X = 2u0 - 1, logit_Y = 1.5x - 3u0 + 0.5; u1 is read but unweighted
    graph = BY_NAME['bow'].graph
    nets = {'X': Mlp((2, 1), [np.array([[2.0], [0.0]])], [np.array([-1.0])]),
            'Y': Mlp((3, 1), [np.array([[1.5], [-3.0], [0.0]])], [np.array([0.5])])}
    return Ncm(graph, [('X', 'Y')], nets, ())


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def _quadrature(fn, points=200_000):
    u = (np.arange(points) + 0.5) / points
    return float(np.mean(fn(u)))


def test_estimators_match_quadrature():
    ncm = _affine_bow()
    assert ncm.graph.variables == ('X', 'Y')
    mc = MonteCarloConfig(m=20_000, seed=11)
    tol = 4 * 0.5 / np.sqrt(mc.m)

    def joint(x, y):
        def integrand(u):
            px = _sigmoid(2 * u - 1)
            py = _sigmoid(1.5 * x - 3 * u + 0.5)
            return (px if x else 1 - px) * (py if y else 1 - py)
        return integrand

    for x in (0, 1):
        for y in (0, 1):
            exact = _quadrature(joint(x, y))
            got = estimate_prob(ncm, {'X': x, 'Y': y}, None, mc).item()
            assert got == pytest.approx(exact, abs=tol)

    do = {x: _quadrature(lambda u, x=x: _sigmoid(1.5 * x - 3 * u + 0.5)) for x in (0, 1)}
    for x in (0, 1):
        got = estimate_query(ncm, {'Y': 1}, {'X': x}, mc).item()
        assert got == pytest.approx(do[x], abs=tol)
        assert estimate_prob(ncm, {'X': x, 'Y': 1}, {'X': x}, mc).item() == pytest.approx(got)
    assert ate_ncm(ncm, 'X', 'Y', mc).item() == pytest.approx(do[1] - do[0], abs=2 * tol)
    # confounded through u0, so the observational contrast differs
    observed = (_quadrature(joint(1, 1)) / _quadrature(lambda u: _sigmoid(2 * u - 1))
                - _quadrature(joint(0, 1)) / _quadrature(lambda u: 1 - _sigmoid(2 * u - 1)))
    assert abs(observed - (do[1] - do[0])) > 0.05


def test_parse_query_forms():
    assert parse_query('ATE(X, Y)') == AteQuery('X', 'Y')
    query = parse_query('P(Y=1, W=0 | do(X=1))')
    assert query.outcome == {'Y': 1, 'W': 0}
    assert query.treatment == {'X': 1}
    assert query.describe() == 'P(Y=1, W=0 | do(X=1))'
    for bad in ('P(Y=2 | do(X=1))', 'E[Y]', 'P(X=1 | do(X=0))'):
        with pytest.raises(ValueError):
            parse_query(bad)


def test_exact_values_on_the_diet_model():
    model = diet_model()
    assert AteQuery('D', 'B').exact(model) == pytest.approx(120 / 256 - 168 / 256)
    assert InterventionalQuery({'B': 1}, {'D': 1}).exact(model) == pytest.approx(120 / 256)
