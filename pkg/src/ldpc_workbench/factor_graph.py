"""Factor graphs sampled from LDPC ensembles, parity-check matrices and encoding."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional

import numpy as np
import scipy.sparse as sp

from . import degree_dist as dd
from .degree_dist import EdgePerspective, NodePerspective
from .errors import InvalidDistributionError, InvalidParameterError


@dataclass(frozen=True, eq=False)
class FactorGraph:
    """Bipartite multigraph; edge ``e`` joins ``edge_var[e]`` and ``edge_chk[e]``.

    Duplicate ``(var, chk)`` pairs are allowed and are kept for message passing.
    """

    n_var: int
    n_chk: int
    edge_var: np.ndarray
    edge_chk: np.ndarray
    seed: Optional[int] = None
    degrees: Optional[NodePerspective] = field(default=None, repr=False)

    def __post_init__(self):
        ev = np.ascontiguousarray(self.edge_var, dtype=np.int64)
        ec = np.ascontiguousarray(self.edge_chk, dtype=np.int64)
        if ev.shape != ec.shape or ev.ndim != 1:
            raise InvalidParameterError("edge arrays must be 1-D and of equal length")
        if ev.size and (ev.min() < 0 or ev.max() >= self.n_var or ec.min() < 0 or ec.max() >= self.n_chk):
            raise InvalidParameterError("edge references a node outside the graph")
        ev.setflags(write=False)
        ec.setflags(write=False)
        object.__setattr__(self, "edge_var", ev)
        object.__setattr__(self, "edge_chk", ec)

    @classmethod
    def from_edges(cls, n_var: int, n_chk: int, edges: Iterable[tuple[int, int]], **kw) -> "FactorGraph":
        pairs = np.array(list(edges), dtype=np.int64).reshape(-1, 2)
        return cls(n_var, n_chk, pairs[:, 0], pairs[:, 1], **kw)

    @classmethod
    def from_parity_check(cls, h: "ParityCheckMatrix") -> "FactorGraph":
        return cls(h.cols, h.rows, h.entries[:, 1], h.entries[:, 0])

    @property
    def num_edges(self) -> int:
        return int(self.edge_var.size)

    @cached_property
    def var_degrees(self) -> np.ndarray:
        return np.bincount(self.edge_var, minlength=self.n_var)

    @cached_property
    def chk_degrees(self) -> np.ndarray:
        return np.bincount(self.edge_chk, minlength=self.n_chk)

    @cached_property
    def var_csr(self) -> tuple[np.ndarray, np.ndarray]:
        """``(ptr, edges)``: edge ids grouped by variable node."""
        order = np.argsort(self.edge_var, kind="stable")
        ptr = np.concatenate(([0], np.cumsum(self.var_degrees))).astype(np.int64)
        return ptr, order.astype(np.int64)

    @cached_property
    def chk_csr(self) -> tuple[np.ndarray, np.ndarray]:
        order = np.argsort(self.edge_chk, kind="stable")
        ptr = np.concatenate(([0], np.cumsum(self.chk_degrees))).astype(np.int64)
        return ptr, order.astype(np.int64)

    def check_neighbors(self, c: int) -> np.ndarray:
        ptr, edges = self.chk_csr
        return self.edge_var[edges[ptr[c]:ptr[c + 1]]]

    def variable_neighbors(self, v: int) -> np.ndarray:
        ptr, edges = self.var_csr
        return self.edge_chk[edges[ptr[v]:ptr[v + 1]]]

    def incidence(self) -> sp.csr_matrix:
        """Check-by-variable matrix of edge multiplicities."""
        data = np.ones(self.num_edges, dtype=np.int64)
        return sp.csr_matrix((data, (self.edge_chk, self.edge_var)), shape=(self.n_chk, self.n_var))

    def syndrome_ok(self, word: np.ndarray) -> bool:
        """True when the +/-1 ``word`` (no zeros) satisfies every check of the multigraph."""
        word = np.asarray(word)
        if np.any(word == 0):
            return False
        neg = np.bincount(self.edge_chk, weights=(word[self.edge_var] < 0), minlength=self.n_chk)
        return bool(np.all(neg.astype(np.int64) % 2 == 0))

    def unsatisfied_checks(self, word: np.ndarray) -> int:
        word = np.asarray(word)
        neg = np.bincount(self.edge_chk, weights=(word[self.edge_var] < 0), minlength=self.n_chk)
        zero = np.bincount(self.edge_chk, weights=(word[self.edge_var] == 0), minlength=self.n_chk)
        return int(np.count_nonzero((neg.astype(np.int64) % 2 == 1) | (zero > 0)))

    def to_json_dict(self) -> dict:
        return {
            "n_var": self.n_var,
            "n_chk": self.n_chk,
            "edges": np.stack([self.edge_var, self.edge_chk], axis=1).tolist(),
            "seed": self.seed,
            "degrees": dd.to_json_dict(self.degrees) if self.degrees is not None else None,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "FactorGraph":
        degrees = dd.from_json_dict(data["degrees"]) if data.get("degrees") else None
        return cls.from_edges(data["n_var"], data["n_chk"], data["edges"],
                              seed=data.get("seed"), degrees=degrees)

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict())


# -------------------------------------------------------------------- sampling

def _socket_owners(counts: dict[int, int]) -> np.ndarray:
    """Node index owning each socket; nodes take degrees in ascending order."""
    degrees = []
    for d in sorted(counts):
        degrees.extend([d] * counts[d])
    degrees = np.array(degrees, dtype=np.int64)
    return np.repeat(np.arange(len(degrees), dtype=np.int64), degrees)


def sample_ensemble(node: NodePerspective, seed: int) -> FactorGraph:
    """Uniform random socket matching for the ``LDPC(Lambda, P)`` ensemble."""
    var_owner = _socket_owners(node.variable_degrees())
    chk_owner = _socket_owners(node.check_degrees())
    if var_owner.size != chk_owner.size:
        raise InvalidDistributionError("variable and check socket counts differ")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(var_owner.size)
    return FactorGraph(node.num_variables, node.num_checks, var_owner, chk_owner[perm],
                       seed=seed, degrees=node)


def sample_regular(n: int, d_v: int, d_c: int, seed: int) -> FactorGraph:
    return sample_ensemble(NodePerspective.regular(n, d_v, d_c), seed)


def sample_from_edge_perspective(n: int, ep: EdgePerspective, seed: int) -> FactorGraph:
    return sample_ensemble(dd.edge_to_node(n, ep), seed)


def _short_cycle_edges(g_var: np.ndarray, g_chk: np.ndarray, n_var: int, n_chk: int) -> np.ndarray:
    """Edge ids lying on a double edge or a 4-cycle (one representative per defect)."""
    a = sp.csr_matrix((np.ones(g_var.size), (g_var, g_chk)), shape=(n_var, n_chk))
    a.sum_duplicates()
    bad: set[int] = set()
    pair_to_edges: dict[tuple[int, int], list[int]] = {}
    for e, (v, c) in enumerate(zip(g_var.tolist(), g_chk.tolist())):
        pair_to_edges.setdefault((v, c), []).append(e)
    for edges in pair_to_edges.values():
        if len(edges) > 1:
            bad.update(edges[1:])
    simple = a.copy()
    simple.data[:] = 1.0
    co = (simple @ simple.T).tocoo()
    mask = (co.row < co.col) & (co.data >= 2)
    for v, w in zip(co.row[mask].tolist(), co.col[mask].tolist()):
        shared = np.intersect1d(simple[v].indices, simple[w].indices)
        bad.add(pair_to_edges[(v, int(shared[0]))][0])
    return np.array(sorted(bad), dtype=np.int64)


def sample_with_girth(node: NodePerspective, seed: int, min_girth: int = 6,
                      max_attempts: int = 100) -> FactorGraph:
    """Sample from the ensemble, then rewire until no cycle shorter than 6 remains.

    Each attempt swaps the check endpoint of every offending edge with that of
    a uniformly chosen edge, which preserves all node degrees.  Only
    ``min_girth`` values of 4 or 6 are supported by the repair step.
    """
    if min_girth > 6:
        raise InvalidParameterError("rewiring only removes double edges and 4-cycles")
    g = sample_ensemble(node, seed)
    if min_girth <= 2:
        return g
    rng = np.random.default_rng([seed, 0x617274])
    ev = g.edge_var.copy()
    ec = g.edge_chk.copy()
    for _ in range(max_attempts):
        bad = _short_cycle_edges(ev, ec, g.n_var, g.n_chk)
        if min_girth <= 4:
            # only double edges matter
            counts = {}
            bad = np.array([e for e, key in enumerate(zip(ev.tolist(), ec.tolist()))
                            if counts.setdefault(key, 0) or counts.__setitem__(key, 1)],
                           dtype=np.int64)
        if bad.size == 0:
            return FactorGraph(g.n_var, g.n_chk, ev, ec, seed=seed, degrees=node)
        partners = rng.integers(0, ev.size, size=bad.size)
        for e, f in zip(bad.tolist(), partners.tolist()):
            ec[e], ec[f] = ec[f], ec[e]
    raise InvalidDistributionError(f"could not reach girth {min_girth} in {max_attempts} attempts")


# ------------------------------------------------------------------ matrices

@dataclass(frozen=True, eq=False)
class ParityCheckMatrix:
    """Sparse 0/1 matrix; ``entries`` is a sorted ``(k, 2)`` array of (row, col)."""

    rows: int
    cols: int
    entries: np.ndarray

    def __post_init__(self):
        ent = np.asarray(self.entries, dtype=np.int64).reshape(-1, 2)
        if ent.size:
            ent = np.unique(ent, axis=0)
            if ent[:, 0].min() < 0 or ent[:, 0].max() >= self.rows or ent[:, 1].min() < 0 \
                    or ent[:, 1].max() >= self.cols:
                raise InvalidParameterError("entry outside matrix")
        object.__setattr__(self, "entries", ent)

    @classmethod
    def from_dense(cls, h) -> "ParityCheckMatrix":
        h = np.asarray(h) % 2
        r, c = np.nonzero(h)
        return cls(h.shape[0], h.shape[1], np.stack([r, c], axis=1))

    def dense(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=np.uint8)
        if self.entries.size:
            out[self.entries[:, 0], self.entries[:, 1]] = 1
        return out

    @property
    def nnz(self) -> int:
        return int(len(self.entries))

    def row_support(self, r: int) -> np.ndarray:
        return self.entries[self.entries[:, 0] == r, 1]

    def syndrome(self, bits) -> np.ndarray:
        """``H @ bits mod 2`` for a 0/1 vector."""
        bits = np.asarray(bits, dtype=np.int64) % 2
        out = np.zeros(self.rows, dtype=np.int64)
        if self.entries.size:
            np.add.at(out, self.entries[:, 0], bits[self.entries[:, 1]])
        return out % 2

    def __eq__(self, other) -> bool:
        return (isinstance(other, ParityCheckMatrix) and self.rows == other.rows
                and self.cols == other.cols and np.array_equal(self.entries, other.entries))

    __hash__ = None


def to_parity_check(g: FactorGraph) -> ParityCheckMatrix:
    """Entry (c, v) present iff ``c`` and ``v`` are joined an odd number of times."""
    if g.num_edges == 0:
        return ParityCheckMatrix(g.n_chk, g.n_var, np.zeros((0, 2), dtype=np.int64))
    pairs, counts = np.unique(np.stack([g.edge_chk, g.edge_var], axis=1), axis=0, return_counts=True)
    return ParityCheckMatrix(g.n_chk, g.n_var, pairs[counts % 2 == 1])


def write_alist(h: ParityCheckMatrix, path) -> None:
    with open(path, "w") as fh:
        fh.write(alist_string(h))


def alist_string(h: ParityCheckMatrix) -> str:
    col_lists = [[] for _ in range(h.cols)]
    row_lists = [[] for _ in range(h.rows)]
    for r, c in h.entries.tolist():
        col_lists[c].append(r + 1)
        row_lists[r].append(c + 1)
    max_col = max((len(x) for x in col_lists), default=0)
    max_row = max((len(x) for x in row_lists), default=0)
    lines = [f"{h.cols} {h.rows}", f"{max_col} {max_row}",
             " ".join(str(len(x)) for x in col_lists),
             " ".join(str(len(x)) for x in row_lists)]
    lines += [" ".join(map(str, x + [0] * (max_col - len(x)))) for x in col_lists]
    lines += [" ".join(map(str, x + [0] * (max_row - len(x)))) for x in row_lists]
    return "\n".join(lines) + "\n"


def parse_alist(text: str) -> ParityCheckMatrix:
    tokens = [int(t) for t in text.split()]
    try:
        n, m = tokens[0], tokens[1]
        pos = 4
        col_w = tokens[pos:pos + n]
        pos += n
        row_w = tokens[pos:pos + m]
        pos += m
        max_col = tokens[2]
        entries = []
        for c in range(n):
            chunk = tokens[pos:pos + max_col]
            pos += max_col
            rows = [r for r in chunk if r > 0]
            if len(rows) != col_w[c]:
                raise InvalidParameterError(f"column {c + 1}: weight mismatch")
            entries.extend((r - 1, c) for r in rows)
    except IndexError:
        raise InvalidParameterError("truncated alist data") from None
    if len(row_w) != m:
        raise InvalidParameterError("truncated alist data")
    h = ParityCheckMatrix(m, n, np.array(entries, dtype=np.int64).reshape(-1, 2))
    if list(np.bincount(h.entries[:, 0], minlength=m)) != row_w:
        raise InvalidParameterError("row weights disagree with column lists")
    max_row = tokens[3]
    if len(tokens) >= pos + m * max_row:
        # the row lists are redundant; when present they must agree
        for r in range(m):
            chunk = sorted(c - 1 for c in tokens[pos:pos + max_row] if c > 0)
            pos += max_row
            if chunk != h.row_support(r).tolist():
                raise InvalidParameterError(f"row {r + 1}: list disagrees with the column lists")
    return h


def read_alist(path) -> ParityCheckMatrix:
    with open(path) as fh:
        return parse_alist(fh.read())


# ----------------------------------------------------------------------- girth

def girth(g: FactorGraph) -> float:
    """Length of the shortest cycle (``inf`` for a forest); BFS from every node."""
    n = g.n_var
    adj: list[list[tuple[int, int]]] = [[] for _ in range(g.n_var + g.n_chk)]
    for e, (v, c) in enumerate(zip(g.edge_var.tolist(), g.edge_chk.tolist())):
        adj[v].append((n + c, e))
        adj[n + c].append((v, e))
    best = float("inf")
    for root in range(len(adj)):
        dist = {root: 0}
        via = {root: -1}
        queue = deque([root])
        while queue:
            u = queue.popleft()
            if 2 * dist[u] + 1 >= best:
                break
            for w, e in adj[u]:
                if e == via[u]:
                    continue
                if w not in dist:
                    dist[w] = dist[u] + 1
                    via[w] = e
                    queue.append(w)
                else:
                    best = min(best, dist[u] + dist[w] + 1)
    return best


# --------------------------------------------------------------- triangulation

@dataclass(frozen=True, eq=False)
class TriangularForm:
    """Row-reduced matrix whose last ``rank`` columns (after ``col_perm``) are
    lower triangular with a unit diagonal.

    ``h_tilde`` is expressed in permuted column order: column ``j`` of
    ``h_tilde`` is column ``col_perm[j]`` of the original matrix.
    """

    h_tilde: ParityCheckMatrix
    col_perm: np.ndarray
    rank: int

    @property
    def n(self) -> int:
        return self.h_tilde.cols

    @property
    def dimension(self) -> int:
        return self.n - self.rank


def _row_bits(h: ParityCheckMatrix) -> list[int]:
    rows = [0] * h.rows
    for r, c in h.entries.tolist():
        rows[r] |= 1 << c
    return rows


def triangularize(h: ParityCheckMatrix) -> TriangularForm:
    """Forward elimination over GF(2), always pivoting on the right-most column.

    Dependent rows are dropped.  Reversing the pivot order makes the pivot
    block lower triangular.
    """
    remaining = [r for r in _row_bits(h) if r]
    pivots: list[tuple[int, int]] = []
    while remaining:
        k = max(range(len(remaining)), key=lambda i: remaining[i].bit_length())
        row = remaining.pop(k)
        col = row.bit_length() - 1
        mask = 1 << col
        remaining = [r ^ row if r & mask else r for r in remaining]
        remaining = [r for r in remaining if r]
        pivots.append((row, col))
    pivots.reverse()
    rank = len(pivots)
    pivot_cols = [c for _, c in pivots]
    pivot_set = set(pivot_cols)
    col_perm = np.array([c for c in range(h.cols) if c not in pivot_set] + pivot_cols, dtype=np.int64)
    inv = np.empty(h.cols, dtype=np.int64)
    inv[col_perm] = np.arange(h.cols)
    entries = []
    for i, (row, _) in enumerate(pivots):
        c = 0
        while row:
            if row & 1:
                entries.append((i, int(inv[c])))
            row >>= 1
            c += 1
    h_tilde = ParityCheckMatrix(rank, h.cols, np.array(entries, dtype=np.int64).reshape(-1, 2))
    return TriangularForm(h_tilde, col_perm, rank)


def encode_systematic(tf: TriangularForm, message) -> np.ndarray:
    """Systematic codeword in +/-1 form; message bits (0/1) fill the free positions."""
    msg = np.asarray(message, dtype=np.int64) % 2
    k = tf.n - tf.rank
    if msg.shape != (k,):
        raise InvalidParameterError(f"message length {msg.size} != code dimension {k}")
    x = np.zeros(tf.n, dtype=np.int64)
    x[:k] = msg
    rows = _row_bits(tf.h_tilde)
    known = 0
    for j in range(k):
        if x[j]:
            known |= 1 << j
    for i, row in enumerate(rows):
        bit = (row & known).bit_count() & 1
        x[k + i] = bit
        if bit:
            known |= 1 << (k + i)
    bits = np.empty(tf.n, dtype=np.int64)
    bits[tf.col_perm] = x
    return (1 - 2 * bits).astype(np.int8)


def code_rank(h: ParityCheckMatrix) -> int:
    return triangularize(h).rank


def row_space_equal(a: ParityCheckMatrix, b: ParityCheckMatrix) -> bool:
    """True when the two matrices span the same GF(2) row space."""
    if a.cols != b.cols:
        return False
    ra = triangularize(a).rank
    rb = triangularize(b).rank
    both = ParityCheckMatrix(a.rows + b.rows, a.cols,
                             np.concatenate([a.entries, b.entries + [a.rows, 0]]))
    return ra == rb == triangularize(both).rank


# ------------------------------------------------------------------ tree ensemble

@dataclass(frozen=True)
class TreeSample:
    """Computation tree of depth ``2 * ell``.

    ``levels[2k]`` holds the number of check children of each variable node
    in variable layer ``k``; ``levels[2k + 1]`` the number of variable
    children of each check node in check layer ``k``.
    """

    ell: int
    levels: tuple[np.ndarray, ...]

    def layer_sizes(self) -> list[int]:
        sizes = [1]
        for lvl in self.levels:
            sizes.append(int(lvl.sum()))
        return sizes

    @property
    def num_nodes(self) -> int:
        return sum(self.layer_sizes())


def _draw_children(rng: np.random.Generator, poly: dd.Polynomial, count: int) -> np.ndarray:
    probs = np.array(poly.coeffs, dtype=float)
    probs = probs / probs.sum()
    return rng.choice(len(probs), size=count, p=probs).astype(np.int64)


def sample_tree(ell: int, ep: EdgePerspective, seed: int) -> TreeSample:
    """Draw from the tree ensemble: ``i`` children with probability ``lam_{i+1}`` / ``rho_{i+1}``."""
    if ell < 0:
        raise InvalidParameterError("ell must be non-negative")
    rng = np.random.default_rng(seed)
    levels = []
    frontier = 1
    for _ in range(ell):
        var_children = _draw_children(rng, ep.lambda_edge, frontier)
        levels.append(var_children)
        chk_children = _draw_children(rng, ep.rho_edge, int(var_children.sum()))
        levels.append(chk_children)
        frontier = int(chk_children.sum())
    return TreeSample(ell, tuple(levels))


def tree_to_graph(tree: TreeSample) -> tuple[FactorGraph, list[list[int]]]:
    """Explicit factor graph of a tree sample plus variable ids per layer."""
    edges = []
    var_layers = [[0]]
    n_var, n_chk = 1, 0
    for k in range(tree.ell):
        var_children = tree.levels[2 * k]
        chk_children = tree.levels[2 * k + 1]
        checks = []
        for v, cnt in zip(var_layers[-1], var_children.tolist()):
            for _ in range(cnt):
                edges.append((v, n_chk))
                checks.append(n_chk)
                n_chk += 1
        layer = []
        for c, cnt in zip(checks, chk_children.tolist()):
            for _ in range(cnt):
                edges.append((n_var, c))
                layer.append(n_var)
                n_var += 1
        var_layers.append(layer)
    return FactorGraph.from_edges(n_var, n_chk, edges), var_layers
