"""Message-passing decoders on factor graphs, plus an ML erasure decoder used as an oracle.

All decoders use a flooding schedule: one iteration is a full check round
followed by a full variable round.  Messages only ever combine the other
incoming edges (extrinsic rule).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._backend import kernels
from .channels import BEC, LlrWord, ReceivedWord, initial_llr
from .errors import InconsistentInputError, InvalidParameterError
from .factor_graph import FactorGraph, ParityCheckMatrix

SUCCESS = "success"
STALL = "stall"
ITERATION_CAP = "iteration-cap"
_STATUS = {0: SUCCESS, 1: STALL, 2: ITERATION_CAP}

TANH_CLAMP = 35.0
ATANH_CLAMP = 1.0 - 1e-15


@dataclass(frozen=True)
class DecodeResult:
    """Decoder output.  ``word`` is int8 over {+1, -1, 0}; 0 marks an unresolved bit."""

    word: np.ndarray
    status: str
    iterations: int
    residual: int
    posterior: Optional[np.ndarray] = None

    @property
    def success(self) -> bool:
        return self.status == SUCCESS

    def bit_errors(self, codeword) -> int:
        """Positions that differ from ``codeword`` (unresolved bits count as errors)."""
        return int(np.count_nonzero(self.word != np.asarray(codeword)))


# ---------------------------------------------------------------- schedules

class CutoffSchedule:
    """Flip cutoffs ``b(i, j)`` for iteration ``i`` (1-based) and variable degree ``j``.

    Stored as an integer table with one row per iteration; the last row
    repeats.  Entries for degree 1 (no other incoming message) are ignored.
    """

    def __init__(self, table):
        tab = np.atleast_2d(np.asarray(table, dtype=np.int64))
        if tab.ndim != 2 or tab.shape[0] == 0:
            raise InvalidParameterError("cutoff table must have at least one row")
        self.table = np.ascontiguousarray(tab)

    @classmethod
    def gallager_a(cls, max_degree: int) -> "CutoffSchedule":
        """Unanimity: ``b = j - 1`` for every degree."""
        return cls([[max(j - 1, 0) for j in range(max_degree + 1)]])

    @classmethod
    def constant(cls, cutoffs: dict[int, int], max_degree: Optional[int] = None) -> "CutoffSchedule":
        max_degree = max_degree or max(cutoffs)
        row = [max(j - 1, 0) for j in range(max_degree + 1)]
        for j, b in cutoffs.items():
            row[j] = b
        return cls([row])

    @classmethod
    def from_rows(cls, rows: Sequence[dict[int, int]], max_degree: int) -> "CutoffSchedule":
        out = []
        for r in rows:
            row = [max(j - 1, 0) for j in range(max_degree + 1)]
            for j, b in r.items():
                row[int(j)] = int(b)
            out.append(row)
        return cls(out)

    @classmethod
    def from_json(cls, text: str, max_degree: int) -> "CutoffSchedule":
        """JSON array: integers (regular code, one cutoff per iteration) or
        objects ``{"degree": cutoff}`` per iteration."""
        data = json.loads(text)
        if not isinstance(data, list) or not data:
            raise InvalidParameterError("cutoff schedule must be a non-empty JSON array")
        rows = []
        for item in data:
            if isinstance(item, dict):
                rows.append({int(k): int(v) for k, v in item.items()})
            else:
                rows.append({j: int(item) for j in range(2, max_degree + 1)})
        return cls.from_rows(rows, max_degree)

    def __call__(self, i: int, j: int) -> int:
        row = self.table[min(i - 1, len(self.table) - 1)]
        return int(row[j]) if j < len(row) else j - 1

    def validate(self, degrees) -> None:
        for j in sorted(set(int(d) for d in degrees)):
            if j < 2:
                continue
            if j >= self.table.shape[1]:
                raise InvalidParameterError(f"no cutoff given for degree {j}")
            col = self.table[:, j]
            if np.any(col > j - 1) or np.any(2 * col <= j - 1):
                raise InvalidParameterError(f"cutoff for degree {j} outside ((j-1)/2, j-1]")


class WeightSchedule:
    """Received-value weights ``w(i)``, iteration ``i`` 1-based; the last entry repeats."""

    def __init__(self, weights):
        w = np.atleast_1d(np.asarray(weights, dtype=np.float64))
        if w.size == 0 or np.any(~np.isfinite(w)) or np.any(w < 0):
            raise InvalidParameterError("weights must be finite and non-negative")
        self.weights = np.ascontiguousarray(w)

    @classmethod
    def from_json(cls, text: str) -> "WeightSchedule":
        return cls(json.loads(text))

    def __call__(self, i: int) -> float:
        return float(self.weights[min(i - 1, len(self.weights) - 1)])


# ----------------------------------------------------------- single-node maps

def hard_check_map(msgs) -> int:
    """Product of incoming {+1, 0, -1} messages; an erasure absorbs."""
    out = 1
    for m in msgs:
        out *= int(m)
    return out


def bec_variable_map(r: int, msgs) -> int:
    """Known received value, else any known incoming value, else erasure."""
    vals = {int(x) for x in [r, *msgs] if x != 0}
    if len(vals) > 1:
        raise InconsistentInputError("conflicting +/-1 votes at a variable node")
    return vals.pop() if vals else 0


def gallager_variable_map(r: int, msgs, b: Optional[int] = None) -> int:
    """Send ``-r`` when at least ``b`` incoming messages disagree with ``r``.

    ``b`` defaults to ``len(msgs)`` (unanimity).
    """
    msgs = list(msgs)
    if not msgs:
        return int(r)
    if b is None:
        b = len(msgs)
    disagree = sum(1 for m in msgs if m == -r)
    return -int(r) if disagree >= b else int(r)


def _sgn(x: float) -> int:
    return int(x > 0) - int(x < 0)


def weighted_variable_map(r: int, msgs, w: float) -> int:
    return _sgn(float(w) * float(r) + float(sum(int(m) for m in msgs)))


def bp_variable_map(m0: float, msgs) -> float:
    """Sum of log-likelihood ratios; opposite infinities cancel to 0."""
    vals = [float(m0), *map(float, msgs)]
    pos = any(v == math.inf for v in vals)
    neg = any(v == -math.inf for v in vals)
    finite = math.fsum(v for v in vals if math.isfinite(v))
    if pos and neg:
        return finite
    if pos:
        return math.inf
    if neg:
        return -math.inf
    return finite


def bp_check_map(msgs) -> float:
    """``2 atanh(prod tanh(m / 2))`` with clamped arguments."""
    prod = 1.0
    for m in msgs:
        prod *= math.tanh(0.5 * min(max(float(m), -TANH_CLAMP), TANH_CLAMP))
    prod = min(max(prod, -ATANH_CLAMP), ATANH_CLAMP)
    return 2.0 * math.atanh(prod)


# ------------------------------------------------------------------ decoders

def _hard_symbols(rw: ReceivedWord, allow_erasure: bool) -> np.ndarray:
    r = np.asarray(rw.symbols)
    if r.dtype.kind == "f":
        raise InvalidParameterError("decoder needs a quantised received word")
    ok = (r == 1) | (r == -1) | ((r == 0) if allow_erasure else False)
    if not np.all(ok):
        raise InvalidParameterError("received word has symbols outside the decoder alphabet")
    return np.ascontiguousarray(r, dtype=np.int8)


def _check_length(g: FactorGraph, n: int) -> None:
    if n != g.n_var:
        raise InvalidParameterError(f"received word length {n} != {g.n_var} variables")


def _csr(g: FactorGraph):
    vp, ve = g.var_csr
    cp, ce = g.chk_csr
    return vp, ve, cp, ce, g.edge_var


def decode_bec_peeling(g: FactorGraph, rw: ReceivedWord) -> DecodeResult:
    """Resolve erasures one degree-1 check at a time."""
    r = _hard_symbols(rw, allow_erasure=True)
    _check_length(g, len(r))
    vp, ve, cp, ce, ev = _csr(g)
    word, peels, consistent = kernels.peel(vp, ve, cp, ce, ev, g.edge_chk, r)
    if not consistent:
        raise InconsistentInputError("received word violates a parity check")
    left = int(np.count_nonzero(word == 0))
    return DecodeResult(np.asarray(word), SUCCESS if left == 0 else STALL, int(peels), left)


def _run_hard(mode, g, r, cutoffs, weights, max_iter) -> DecodeResult:
    vp, ve, cp, ce, ev = _csr(g)
    word, it, status = kernels.hard_flood(mode, vp, ve, cp, ce, ev, r, cutoffs, weights, int(max_iter))
    word = np.asarray(word)
    if status == 3:
        raise InconsistentInputError("conflicting +/-1 votes at a variable node")
    if mode == 0:
        residual = int(np.count_nonzero(word == 0))
    else:
        residual = g.unsatisfied_checks(word)
    return DecodeResult(word, _STATUS[status], int(it), residual)


_NO_CUTOFFS = np.zeros((1, 1), dtype=np.int64)
_NO_WEIGHTS = np.ones(1)


def decode_bec_mp(g: FactorGraph, rw: ReceivedWord, max_iter: Optional[int] = None) -> DecodeResult:
    """Synchronous erasure message passing; by default runs to its fixed point."""
    r = _hard_symbols(rw, allow_erasure=True)
    _check_length(g, len(r))
    if max_iter is None:
        max_iter = g.n_var + 1
    return _run_hard(0, g, r, _NO_CUTOFFS, _NO_WEIGHTS, max_iter)


def decode_gallager_b(g: FactorGraph, rw: ReceivedWord, cutoffs: CutoffSchedule,
                      max_iter: int = 50) -> DecodeResult:
    r = _hard_symbols(rw, allow_erasure=False)
    _check_length(g, len(r))
    cutoffs.validate(g.var_degrees)
    return _run_hard(1, g, r, cutoffs.table, _NO_WEIGHTS, max_iter)


def decode_gallager_a(g: FactorGraph, rw: ReceivedWord, max_iter: int = 50) -> DecodeResult:
    """Flip the outgoing value only when all other check messages disagree with it."""
    max_deg = int(g.var_degrees.max()) if g.n_var else 1
    return decode_gallager_b(g, rw, CutoffSchedule.gallager_a(max_deg), max_iter)


def decode_weighted_erasure(g: FactorGraph, rw: ReceivedWord, weights: WeightSchedule,
                            max_iter: int = 60) -> DecodeResult:
    """Ternary messages ``sgn(w r + sum of others)``; a zero sum sends an erasure."""
    r = _hard_symbols(rw, allow_erasure=True)
    _check_length(g, len(r))
    return _run_hard(2, g, r, _NO_CUTOFFS, weights.weights, max_iter)


def decode_bp(g: FactorGraph, llr, max_iter: int = 100, early_stop: bool = True) -> DecodeResult:
    """Sum-product decoding from channel LLRs (an ``LlrWord`` or a ``ReceivedWord``).

    The hard decision is the posterior sign; a zero posterior stays unresolved.
    """
    if isinstance(llr, ReceivedWord):
        llr = initial_llr(llr)
    vals = np.ascontiguousarray(llr.values if isinstance(llr, LlrWord) else llr, dtype=np.float64)
    if np.any(np.isnan(vals)):
        raise InvalidParameterError("LLR input contains NaN")
    _check_length(g, len(vals))
    vp, ve, cp, ce, ev = _csr(g)
    post, it, ok = kernels.bp_flood(vp, ve, cp, ce, ev, vals, int(max_iter), bool(early_stop))
    post = np.asarray(post)
    word = np.sign(post).astype(np.int8)
    status = SUCCESS if ok else ITERATION_CAP
    return DecodeResult(word, status, int(it), 0 if ok else g.unsatisfied_checks(word), post)


def ml_erasure_decode(h: ParityCheckMatrix, rw: ReceivedWord) -> DecodeResult:
    """Solve for the erased positions over GF(2).

    Success iff the solution is unique; otherwise only the positions fixed in
    every solution are filled and ``residual`` is the solution-space dimension.
    """
    r = _hard_symbols(rw, allow_erasure=True)
    if len(r) != h.cols:
        raise InvalidParameterError("received word length does not match the matrix")
    erased = np.flatnonzero(r == 0)
    index = {int(v): i for i, v in enumerate(erased)}
    bits = (r < 0).astype(np.int64)
    rows = []
    for row in range(h.rows):
        support = h.row_support(row)
        lhs = 0
        rhs = 0
        for c in support.tolist():
            if c in index:
                lhs |= 1 << index[c]
            else:
                rhs ^= int(bits[c])
        rows.append((lhs, rhs))
    # Gauss-Jordan elimination on the erased unknowns
    pivots: list[tuple[int, int, int]] = []
    for lhs, rhs in rows:
        for p_col, p_lhs, p_rhs in pivots:
            if lhs >> p_col & 1:
                lhs ^= p_lhs
                rhs ^= p_rhs
        if lhs == 0:
            if rhs:
                raise InconsistentInputError("received word violates a parity check")
            continue
        col = lhs.bit_length() - 1
        pivots = [(pc, pl ^ lhs, pr ^ rhs) if pl >> col & 1 else (pc, pl, pr)
                  for pc, pl, pr in pivots]
        pivots.append((col, lhs, rhs))
    word = r.copy()
    for col, lhs, rhs in pivots:
        if lhs == 1 << col:
            word[erased[col]] = -1 if rhs else 1
    free = len(erased) - len(pivots)
    return DecodeResult(word, SUCCESS if free == 0 else STALL, 0, free)


DECODERS = ("peel", "bec-mp", "gal-a", "gal-b", "weighted", "bp")


def decode(name: str, g: FactorGraph, rw: ReceivedWord, *, max_iter: int = 100,
           cutoffs: Optional[CutoffSchedule] = None,
           weights: Optional[WeightSchedule] = None) -> DecodeResult:
    """Dispatch on the decoder names accepted by the command line."""
    if name == "peel":
        return decode_bec_peeling(g, rw)
    if name == "bec-mp":
        return decode_bec_mp(g, rw, max_iter)
    if name == "gal-a":
        return decode_gallager_a(g, rw, max_iter)
    if name == "gal-b":
        if cutoffs is None:
            raise InvalidParameterError("gal-b needs a cutoff schedule")
        return decode_gallager_b(g, rw, cutoffs, max_iter)
    if name == "weighted":
        return decode_weighted_erasure(g, rw, weights or WeightSchedule([1.0]), max_iter)
    if name == "bp":
        return decode_bp(g, rw, max_iter)
    raise InvalidParameterError(f"unknown decoder {name!r}")


def is_erasure_channel(rw: ReceivedWord) -> bool:
    return isinstance(rw.channel, BEC)
