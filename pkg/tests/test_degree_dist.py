import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ldpc_workbench import degree_dist as dd
from ldpc_workbench.degree_dist import EdgePerspective, NodePerspective, Polynomial
from ldpc_workbench.errors import InvalidDistributionError, InvalidParameterError


def test_polynomial_evaluation_and_calculus():
    p = Polynomial.from_terms({0: 1.0, 2: 3.0})
    assert p(2.0) == pytest.approx(13.0)
    assert p.derivative()(2.0) == pytest.approx(12.0)
    assert p.integral01() == pytest.approx(2.0)
    assert p.degree == 2


def test_regular_edge_perspective():
    ep = EdgePerspective.regular(3, 6)
    assert ep.variable_degrees() == {3: 1.0}
    assert ep.check_degrees() == {6: 1.0}
    assert ep.regular_degrees() == (3, 6)
    assert dd.designed_rate(ep) == pytest.approx(0.5)


def test_unnormalised_distribution_rejected():
    with pytest.raises(InvalidDistributionError):
        EdgePerspective(Polynomial.monomial(2, 0.5), Polynomial.monomial(5))


def test_node_to_edge_by_hand():
    node = NodePerspective(Polynomial.from_terms({2: 2.0, 3: 2.0}), Polynomial.from_terms({10: 1.0}))
    ep = dd.node_to_edge(node)
    np.testing.assert_allclose(ep.lambda_edge.array, [0.0, 0.4, 0.6])


def test_node_edge_round_trip_regular():
    node = NodePerspective.regular(1000, 3, 6)
    assert node.num_variables == 1000
    assert node.num_checks == 500
    ep = dd.node_to_edge(node)
    assert ep.regular_degrees() == (3, 6)
    back = dd.edge_to_node(1000, ep)
    assert back.variable_degrees() == {3: 1000}
    assert back.check_degrees() == {6: 500}


@given(st.integers(10, 5000),
       st.floats(0.05, 0.95), st.floats(0.05, 0.95))
def test_edge_to_node_balances_sockets(n, a, b):
    ep = EdgePerspective.from_degrees({2: a, 5: 1 - a}, {4: b, 7: 1 - b})
    node = dd.edge_to_node(n, ep)
    assert node.num_variables == n
    assert sum(d * c for d, c in node.variable_degrees().items()) == \
        sum(d * c for d, c in node.check_degrees().items())


@given(st.floats(0.05, 0.95))
def test_designed_rate_matches_node_counts(a):
    ep = EdgePerspective.from_degrees({2: a, 4: 1 - a}, {6: 1.0})
    node = dd.edge_to_node(100_000, ep)
    rate = 1 - node.num_checks / node.num_variables
    assert rate == pytest.approx(dd.designed_rate(ep), abs=1e-3)


@pytest.mark.parametrize("N", [10, 100])
def test_tornado_pair_is_a_distribution(N):
    ep = dd.tornado_pair(N, 0.5)
    assert sum(ep.lambda_edge.coeffs) == pytest.approx(1.0)
    assert sum(ep.rho_edge.coeffs) == pytest.approx(1.0)
    assert max(ep.variable_degrees()) == N
    assert all(c >= 0 for c in ep.rho_edge.coeffs)


def test_tornado_recipe_residual_nonnegative():
    # lam_hat(1 - rho(1 - x)) <= x on (0, 1) for the untruncated series
    for N in (10, 100):
        theta = dd.tornado_theta(N, 0.5)
        lam_hat = dd.truncated_lambda_hat("tornado", N, theta)
        xs = np.linspace(1e-4, 1 - 1e-4, 2000)
        rho = lambda y: np.exp(theta * (y - 1))
        assert np.all(lam_hat(1 - rho(1 - xs)) <= xs + 1e-12)


def test_check_concentrated_pair():
    N, theta = dd.check_concentrated_parameters(0.5, 0.05)
    assert N == 20
    assert 1 / theta == pytest.approx(round(1 / theta))
    ep = dd.check_concentrated_pair(N, theta)
    assert ep.regular_degrees() is None
    # rho = x**(1/theta) is the edge fraction of degree 1/theta + 1
    assert list(ep.check_degrees()) == [round(1 / theta) + 1]
    with pytest.raises(InvalidParameterError):
        dd.check_concentrated_pair(10, 0.3)


def test_json_round_trip(tmp_path):
    ep = EdgePerspective.from_degrees({2: 0.3, 3: 0.7}, {6: 1.0})
    path = tmp_path / "d.json"
    dd.save(ep, path)
    back = dd.load(path)
    assert back.variable_degrees() == pytest.approx(ep.variable_degrees())
    node = dd.edge_to_node(60, ep)
    assert dd.loads(dd.dumps(node)).variable_degrees() == node.variable_degrees()
    with pytest.raises((InvalidDistributionError, ValueError, KeyError)):
        dd.loads(json.dumps({"foo": 1}))


def test_gallager_rate_bound_bsc():
    # rate bound is below capacity and increases with the check degree
    b6 = dd.gallager_rate_bound(0.04, 6)
    b10 = dd.gallager_rate_bound(0.04, 10)
    cap = 1 + 0.04 * math.log2(0.04) + 0.96 * math.log2(0.96)
    assert b6 < b10 < cap
