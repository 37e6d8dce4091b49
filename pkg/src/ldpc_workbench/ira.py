"""Irregular repeat-accumulate codes over the erasure channel.

Information bits are repeated into a random bipartite graph ``G``; check
``j`` forms the parity ``v_j`` of its information neighbours and the
accumulator outputs the running parities ``w_j = v_1 ... v_j``.  The
codeword is ``(w_1, ..., w_n)`` (non-systematic).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import degree_dist as dd
from .channels import ReceivedWord
from .decoders import ITERATION_CAP, STALL, SUCCESS, DecodeResult, decode_bec_mp
from .degree_dist import EdgePerspective, Polynomial
from .errors import InvalidDistributionError, InvalidParameterError
from .factor_graph import FactorGraph, sample_ensemble


@dataclass(frozen=True, eq=False)
class IraGraph:
    """Repeat graph between ``k`` information nodes and ``n`` checks.

    ``repeat`` is a FactorGraph whose variables are the information nodes;
    the accumulator is implied by the check order.
    """

    repeat: FactorGraph

    def __post_init__(self):
        if np.any(self.repeat.chk_degrees == 0):
            raise InvalidDistributionError("every check needs an information neighbour")

    @property
    def k(self) -> int:
        return self.repeat.n_var

    @property
    def n(self) -> int:
        return self.repeat.n_chk

    @property
    def rate(self) -> float:
        return self.k / self.n

    @classmethod
    def from_checks(cls, k: int, checks: list[list[int]]) -> "IraGraph":
        """Explicit construction; ``checks[j]`` lists the information neighbours of check ``j``."""
        edges = [(i, j) for j, nb in enumerate(checks) for i in nb]
        return cls(FactorGraph.from_edges(k, len(checks), edges))

    def combined_graph(self) -> FactorGraph:
        """Single factor graph over information nodes ``0..k-1`` and code nodes ``k..k+n-1``.

        Check ``j`` joins its information neighbours, ``x_j`` and (for j > 0) ``x_{j-1}``.
        """
        k, n = self.k, self.n
        ev = [self.repeat.edge_var, k + np.arange(n), k + np.arange(n - 1)]
        ec = [self.repeat.edge_chk, np.arange(n), np.arange(1, n)]
        return FactorGraph(k + n, n, np.concatenate(ev), np.concatenate(ec))


def check_series(ep: EdgePerspective) -> Polynomial:
    """``R(x) = int_0^x rho / int_0^1 rho``: fraction of checks by information degree."""
    anti = ep.rho_edge.antiderivative()
    return anti.scaled(1.0 / anti(1.0))


def ira_rate(ep: EdgePerspective) -> float:
    """``int lam / int rho``."""
    rate = ep.lambda_edge.integral01() / ep.rho_edge.integral01()
    if rate > 1.0 + 1e-12:
        raise InvalidDistributionError(f"rate {rate:.6g} exceeds 1 for this pair")
    return rate


def sample_ira(k: int, ep: EdgePerspective, seed: int) -> IraGraph:
    """Socket-model repeat graph with ``k`` information nodes."""
    ira_rate(ep)
    node = dd.edge_to_node(k, ep)
    return IraGraph(sample_ensemble(node, seed))


def _check_parities(g: IraGraph, message: np.ndarray) -> np.ndarray:
    neg = np.bincount(g.repeat.edge_chk, weights=(message[g.repeat.edge_var] < 0), minlength=g.n)
    return neg.astype(np.int64) % 2


def ira_encode(g: IraGraph, message) -> np.ndarray:
    """Accumulated check parities in +/-1 form."""
    msg = np.asarray(message)
    if msg.shape != (g.k,):
        raise InvalidParameterError(f"message length {msg.size} != {g.k}")
    if not np.all((msg == 1) | (msg == -1)):
        raise InvalidParameterError("message entries must be +1 or -1")
    v = _check_parities(g, msg)
    w = np.cumsum(v) % 2
    return (1 - 2 * w).astype(np.int8)


def check_values(g: IraGraph, message) -> np.ndarray:
    """``v_j`` in +/-1 form."""
    return (1 - 2 * _check_parities(g, np.asarray(message))).astype(np.int8)


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of the erasure-decoding condition on the open interval (0, 1).

    ``margin`` is the smallest ``x - lhs(x)``, ``relative_margin`` the
    smallest ``1 - lhs(x) / x``; ``boundary_slack`` is ``1 - lhs(1)``, which
    is 0 whenever no check has a single information neighbour.
    """

    satisfied: bool
    margin: float
    relative_margin: float
    worst_x: float
    boundary_slack: float

    @property
    def boundary_equality(self) -> bool:
        return abs(self.boundary_slack) < 1e-12


def ira_condition_lhs(ep: EdgePerspective, alpha: float, x):
    """``lam(1 - [(1 - alpha) / (1 - alpha R(1 - x))]^2 rho(1 - x))``."""
    x = np.asarray(x, dtype=float)
    R = check_series(ep)
    ratio = (1.0 - alpha) / (1.0 - alpha * R(1.0 - x))
    return ep.lambda_edge(1.0 - ratio * ratio * ep.rho_edge(1.0 - x))


def ira_success_condition(ep: EdgePerspective, alpha: float, grid_points: int = 10_000) -> ConditionReport:
    """Check ``lhs(x) < x`` on a uniform interior grid refined geometrically near 0 and 1."""
    if not 0.0 <= alpha < 1.0:
        raise InvalidParameterError("alpha must lie in [0, 1)")
    near = np.geomspace(1e-9, 1e-2, 400)
    xs = np.unique(np.concatenate([np.linspace(0.0, 1.0, grid_points + 1)[1:-1], near, 1.0 - near]))
    lhs = ira_condition_lhs(ep, alpha, xs)
    slack = xs - lhs
    k = int(np.argmin(slack))
    rel = 1.0 - lhs / xs
    return ConditionReport(bool(np.all(slack > 0)), float(slack[k]), float(rel.min()), float(xs[k]),
                           float(1.0 - ira_condition_lhs(ep, alpha, 1.0)))


def ira_decode_bec(g: IraGraph, rw: ReceivedWord, max_iter: Optional[int] = None) -> DecodeResult:
    """Erasure message passing on the joint repeat/accumulate graph.

    Returns the information bits; status is ``success`` when all of them are
    recovered.
    """
    r = np.asarray(rw.symbols)
    if r.shape != (g.n,):
        raise InvalidParameterError(f"received word length {r.size} != {g.n}")
    joint = g.combined_graph()
    word = np.concatenate([np.zeros(g.k, dtype=np.int8), r.astype(np.int8)])
    res = decode_bec_mp(joint, ReceivedWord(word, rw.channel), max_iter)
    info = res.word[:g.k]
    left = int(np.count_nonzero(info == 0))
    if left == 0:
        status = SUCCESS
    else:
        status = ITERATION_CAP if res.status == ITERATION_CAP else STALL
    return DecodeResult(info, status, res.iterations, left)
