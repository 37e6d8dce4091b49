import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ldpc_workbench import factor_graph as fg
from ldpc_workbench.degree_dist import EdgePerspective, NodePerspective
from ldpc_workbench.errors import InvalidParameterError

HAMMING = np.array([[1, 1, 1, 0, 1, 0, 0],
                    [1, 1, 0, 1, 0, 1, 0],
                    [1, 0, 1, 1, 0, 0, 1]])


def brute_codewords(h):
    n = h.shape[1]
    words = []
    for m in range(2 ** n):
        x = np.array([(m >> i) & 1 for i in range(n)])
        if not np.any(h @ x % 2):
            words.append(tuple(x))
    return set(words)


def test_sample_regular_degrees():
    g = fg.sample_regular(600, 3, 6, seed=1)
    assert g.n_var == 600 and g.n_chk == 300
    assert np.all(g.var_degrees == 3)
    assert np.all(g.chk_degrees == 6)
    assert g.num_edges == 1800


def test_sampling_is_reproducible():
    a = fg.sample_regular(200, 3, 6, seed=9)
    b = fg.sample_regular(200, 3, 6, seed=9)
    c = fg.sample_regular(200, 3, 6, seed=10)
    assert np.array_equal(a.edge_chk, b.edge_chk)
    assert not np.array_equal(a.edge_chk, c.edge_chk)


def test_irregular_sampling_matches_node_counts():
    ep = EdgePerspective.from_degrees({2: 0.3, 3: 0.7}, {6: 1.0})
    g = fg.sample_from_edge_perspective(1000, ep, seed=2)
    assert g.n_var == 1000
    assert np.bincount(g.var_degrees).sum() == 1000
    assert g.var_degrees.sum() == g.chk_degrees.sum() == g.num_edges


def test_csr_and_neighbours_are_consistent(small_code):
    g = small_code
    for c in range(g.n_chk):
        for v in g.check_neighbors(c):
            assert c in g.variable_neighbors(v)


def test_json_round_trip(small_code):
    back = fg.FactorGraph.from_json_dict(small_code.to_json_dict())
    assert np.array_equal(back.edge_var, small_code.edge_var)
    assert np.array_equal(back.edge_chk, small_code.edge_chk)


def test_odd_multiplicity_rule():
    g = fg.FactorGraph.from_edges(3, 1, [(0, 0), (0, 0), (1, 0), (2, 0), (2, 0), (2, 0)])
    h = fg.to_parity_check(g)
    assert h.dense().tolist() == [[0, 1, 1]]


def test_alist_round_trip(tmp_path):
    g = fg.sample_regular(60, 3, 6, seed=3)
    h = fg.to_parity_check(g)
    path = tmp_path / "code.alist"
    fg.write_alist(h, path)
    assert fg.read_alist(path) == h


def test_alist_parse_known_text():
    text = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2\n2 3\n"
    h = fg.parse_alist(text)
    assert h.dense().tolist() == [[1, 1, 0], [0, 1, 1]]


def test_alist_rejects_inconsistent_text():
    with pytest.raises((InvalidParameterError, ValueError)):
        fg.parse_alist("3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2\n1 3\n")


def test_girth_known_graphs():
    # 6-cycle: 3 variables, 3 checks in a ring
    ring = fg.FactorGraph.from_edges(3, 3, [(0, 0), (1, 0), (1, 1), (2, 1), (2, 2), (0, 2)])
    assert fg.girth(ring) == 6
    square = fg.FactorGraph.from_edges(2, 2, [(0, 0), (1, 0), (0, 1), (1, 1)])
    assert fg.girth(square) == 4
    tree = fg.FactorGraph.from_edges(3, 1, [(0, 0), (1, 0), (2, 0)])
    assert fg.girth(tree) == math.inf
    double = fg.FactorGraph.from_edges(1, 1, [(0, 0), (0, 0)])
    assert fg.girth(double) == 2


def test_girth_matches_networkx_style_bfs():
    g = fg.FactorGraph.from_parity_check(fg.ParityCheckMatrix.from_dense(HAMMING))
    assert fg.girth(g) == 4


def test_sample_with_girth_six():
    node = NodePerspective.regular(300, 3, 6)
    g = fg.sample_with_girth(node, seed=4)
    assert fg.girth(g) >= 6
    assert np.all(g.var_degrees == 3) and np.all(g.chk_degrees == 6)


def test_triangularize_hamming():
    h = fg.ParityCheckMatrix.from_dense(HAMMING)
    tf = fg.triangularize(h)
    assert tf.rank == 3 and tf.dimension == 4
    d = tf.h_tilde.dense()
    block = d[:, tf.dimension:]
    assert np.array_equal(np.tril(block), block)
    assert np.all(np.diag(block) == 1)
    assert fg.row_space_equal(h, fg.ParityCheckMatrix(tf.rank, h.cols,
                                                      np.column_stack([tf.h_tilde.entries[:, 0],
                                                                       tf.col_perm[tf.h_tilde.entries[:, 1]]])))


def test_encoder_enumerates_the_code():
    words = brute_codewords(HAMMING)
    tf = fg.triangularize(fg.ParityCheckMatrix.from_dense(HAMMING))
    got = set()
    for m in range(16):
        bits = [(m >> i) & 1 for i in range(4)]
        cw = fg.encode_systematic(tf, bits)
        got.add(tuple(((1 - cw) // 2).tolist()))
    assert got == words


def test_rank_deficient_matrix():
    h = fg.ParityCheckMatrix.from_dense(np.vstack([HAMMING, HAMMING[0] ^ HAMMING[1]]))
    assert fg.code_rank(h) == 3


@given(st.integers(0, 10_000), st.integers(0, 2**31 - 1))
def test_encoded_words_satisfy_all_checks(seed, mseed):
    g = fg.sample_regular(48, 3, 6, seed=seed)
    h = fg.to_parity_check(g)
    tf = fg.triangularize(h)
    msg = np.random.default_rng(mseed).integers(0, 2, tf.dimension)
    cw = fg.encode_systematic(tf, msg)
    assert not np.any(h.syndrome((1 - cw) // 2))
    assert g.syndrome_ok(cw)


def test_encode_rejects_wrong_length():
    tf = fg.triangularize(fg.ParityCheckMatrix.from_dense(HAMMING))
    with pytest.raises(InvalidParameterError):
        fg.encode_systematic(tf, [0, 1])


@given(st.integers(0, 1000))
def test_tree_sample_layer_sizes(seed):
    ep = EdgePerspective.from_degrees({2: 0.5, 3: 0.5}, {3: 0.4, 4: 0.6})
    tree = fg.sample_tree(2, ep, seed)
    g, layers = fg.tree_to_graph(tree)
    sizes = tree.layer_sizes()
    assert g.n_var == sum(sizes[0::2]) and g.n_chk == sum(sizes[1::2])
    assert [len(l) for l in layers] == sizes[0::2]
    assert fg.girth(g) == math.inf
