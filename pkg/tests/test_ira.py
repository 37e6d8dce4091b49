import numpy as np
import pytest
from hypothesis import given, strategies as st

from ldpc_workbench import ira
from ldpc_workbench.channels import BEC, ReceivedWord, transmit
from ldpc_workbench.degree_dist import EdgePerspective
from ldpc_workbench.errors import InvalidDistributionError, InvalidParameterError

EP_MIXED = EdgePerspective.from_degrees({4: 1.0}, {1: 0.3, 2: 0.7})


def hand_graph():
    return ira.IraGraph.from_checks(3, [[0, 1], [1, 2], [0, 2]])


def test_hand_example():
    g = hand_graph()
    msg = np.array([1, -1, 1])
    assert ira.check_values(g, msg).tolist() == [-1, -1, 1]
    assert ira.ira_encode(g, msg).tolist() == [-1, 1, 1]


def test_flipping_a_message_bit_flips_accumulator_suffix():
    g = hand_graph()
    msg = np.array([1, -1, 1])
    base = ira.ira_encode(g, msg)
    for i in range(3):
        m = msg.copy()
        m[i] = -m[i]
        diff = np.flatnonzero(ira.ira_encode(g, m) != base)
        first = min(j for j, nb in enumerate([[0, 1], [1, 2], [0, 2]]) if i in nb)
        last_parity = [j for j, nb in enumerate([[0, 1], [1, 2], [0, 2]]) if i in nb]
        # w_j flips iff an odd number of checks up to j contain i
        want = [j for j in range(3) if sum(1 for c in last_parity if c <= j) % 2 == 1]
        assert diff.tolist() == want and want[0] == first


def test_rates():
    assert ira.ira_rate(EdgePerspective.from_degrees({4: 1.0}, {2: 1.0})) == pytest.approx(0.5)
    assert ira.ira_rate(EdgePerspective.from_degrees({6: 1.0}, {3: 1.0})) == pytest.approx(0.5)
    with pytest.raises(InvalidDistributionError):
        ira.ira_rate(EdgePerspective.from_degrees({2: 1.0}, {4: 1.0}))


def test_encode_validates_input():
    g = hand_graph()
    with pytest.raises(InvalidParameterError):
        ira.ira_encode(g, [1, 0, 1])
    with pytest.raises(InvalidParameterError):
        ira.ira_encode(g, [1, 1])


@given(st.integers(0, 10_000))
def test_erasure_free_decode_inverts_encode(seed):
    g = ira.sample_ira(200, EP_MIXED, seed)
    msg = np.where(np.random.default_rng(seed).random(g.k) < 0.5, 1, -1)
    cw = ira.ira_encode(g, msg)
    res = ira.ira_decode_bec(g, ReceivedWord(cw, BEC(0.0)))
    assert res.success and np.array_equal(res.word, msg)


def test_combined_graph_accepts_codewords():
    g = ira.sample_ira(100, EP_MIXED, 3)
    msg = np.where(np.random.default_rng(0).random(g.k) < 0.5, 1, -1)
    joint = g.combined_graph()
    assert joint.syndrome_ok(np.concatenate([msg, ira.ira_encode(g, msg)]))


def test_condition_at_zero_erasures():
    for ep in (EP_MIXED, EdgePerspective.from_degrees({4: 1.0}, {2: 1.0})):
        rep = ira.ira_success_condition(ep, 0.0)
        assert rep.satisfied


def test_condition_monotone_in_alpha():
    alphas = np.linspace(0.0, 0.6, 25)
    flags = [ira.ira_success_condition(EP_MIXED, a).satisfied for a in alphas]
    # once it fails it keeps failing
    first_fail = flags.index(False) if False in flags else len(flags)
    assert not any(flags[first_fail:])


def test_pure_degree_two_checks_have_no_boundary_slack():
    rep = ira.ira_success_condition(EdgePerspective.from_degrees({4: 1.0}, {2: 1.0}), 0.3)
    assert rep.boundary_equality


def test_mixed_checks_decode_below_condition():
    alpha = 0.15
    assert ira.ira_success_condition(EP_MIXED, alpha).satisfied
    errs = 0
    for t in range(5):
        g = ira.sample_ira(2000, EP_MIXED, t)
        msg = np.ones(g.k, dtype=np.int8)
        rw = transmit(ira.ira_encode(g, msg), BEC(alpha), 100 + t)
        errs += ira.ira_decode_bec(g, rw, 200).bit_errors(msg)
    assert errs / (5 * 2000) < 1e-2
