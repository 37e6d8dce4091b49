"""Density evolution for belief propagation on a uniformly quantised LLR grid.

A density is a pmf on bins ``-K..K`` (bin ``i`` stands for LLR ``i * step``)
plus point masses at plus and minus infinity.  The check side combines
messages pairwise with the tanh rule through a precomputed bin table; the
variable side is an FFT convolution whose overflow saturates into the end bins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import ndtr

from .._backend import kernels
from ..channels import BEC, BIAWGN, BSC, ChannelModel, TernaryBIAWGN, make_channel
from ..degree_dist import EdgePerspective
from ..errors import InvalidParameterError
from .scalar import CONVERGED, STALLED, ThresholdResult, bisect_threshold, not_decreasing


@dataclass(frozen=True)
class Grid:
    """Uniform grid on ``[-limit, limit]`` with spacing ``step``."""

    limit: float = 30.0
    step: float = 0.01

    def __post_init__(self):
        if self.step <= 0 or self.limit <= 0:
            raise InvalidParameterError("grid limit and step must be positive")
        if self.half_bins > 32000:
            raise InvalidParameterError("grid too fine for the 16-bit combination table")

    @property
    def half_bins(self) -> int:
        return int(round(self.limit / self.step))

    @property
    def size(self) -> int:
        return 2 * self.half_bins + 1

    @property
    def values(self) -> np.ndarray:
        return np.arange(-self.half_bins, self.half_bins + 1) * self.step

    def bin_of(self, llr: float) -> int:
        """Index into the pmf of the bin nearest to ``llr``."""
        if abs(llr) > self.limit + 0.5 * self.step:
            raise InvalidParameterError(f"LLR {llr:g} lies outside the grid")
        return int(round(llr / self.step)) + self.half_bins


@dataclass(frozen=True, eq=False)
class QuantizedDensity:
    grid: Grid
    pmf: np.ndarray
    pos_inf: float = 0.0
    neg_inf: float = 0.0

    def __post_init__(self):
        pmf = np.asarray(self.pmf, dtype=float)
        if pmf.shape != (self.grid.size,):
            raise InvalidParameterError("pmf length does not match the grid")
        object.__setattr__(self, "pmf", pmf)

    @property
    def total(self) -> float:
        return float(self.pmf.sum() + self.pos_inf + self.neg_inf)

    @property
    def error(self) -> float:
        """Mass below zero plus half the mass at zero."""
        K = self.grid.half_bins
        return float(self.pmf[:K].sum() + self.neg_inf + 0.5 * self.pmf[K])

    @property
    def zero_mass(self) -> float:
        return float(self.pmf[self.grid.half_bins])

    def normalized(self) -> "QuantizedDensity":
        pmf = np.clip(self.pmf, 0.0, None)
        pinf, ninf = max(self.pos_inf, 0.0), max(self.neg_inf, 0.0)
        tot = pmf.sum() + pinf + ninf
        return QuantizedDensity(self.grid, pmf / tot, pinf / tot, ninf / tot)

    def mean(self) -> float:
        if self.pos_inf or self.neg_inf:
            return math.inf if self.pos_inf >= self.neg_inf else -math.inf
        return float(self.pmf @ self.grid.values)

    @classmethod
    def point(cls, grid: Grid, llr: float) -> "QuantizedDensity":
        pmf = np.zeros(grid.size)
        if llr == math.inf:
            return cls(grid, pmf, 1.0, 0.0)
        if llr == -math.inf:
            return cls(grid, pmf, 0.0, 1.0)
        pmf[grid.bin_of(llr)] = 1.0
        return cls(grid, pmf)


# ------------------------------------------------------------ initial densities

def bp_initial_density(ch: ChannelModel, grid: Optional[Grid] = None) -> QuantizedDensity:
    """Channel LLR density given that +1 was sent."""
    grid = grid or Grid()
    pmf = np.zeros(grid.size)
    if isinstance(ch, BEC):
        pmf[grid.half_bins] = ch.alpha
        return QuantizedDensity(grid, pmf, 1.0 - ch.alpha, 0.0)
    if isinstance(ch, BSC):
        if ch.p == 0.0:
            return QuantizedDensity(grid, pmf, 1.0, 0.0)
        llr = math.log((1.0 - ch.p) / ch.p)
        pmf[grid.bin_of(llr)] += 1.0 - ch.p
        pmf[grid.bin_of(-llr)] += ch.p
        return QuantizedDensity(grid, pmf)
    if isinstance(ch, TernaryBIAWGN):
        pp, pe, pm = ch.probabilities()
        if pm == 0.0:
            pmf[grid.half_bins] = pe
            return QuantizedDensity(grid, pmf, pp, 0.0)
        llr = math.log(pp / pm)
        pmf[grid.bin_of(llr)] += pp
        pmf[grid.bin_of(-llr)] += pm
        pmf[grid.half_bins] += pe
        return QuantizedDensity(grid, pmf)
    if isinstance(ch, BIAWGN):
        mu = 2.0 / (ch.sigma * ch.sigma)
        sd = math.sqrt(2.0 * mu)
        if mu > grid.limit:
            raise InvalidParameterError("grid too narrow for the channel LLR mean")
        edges = (np.arange(-grid.half_bins, grid.half_bins + 2) - 0.5) * grid.step
        cdf = ndtr((edges - mu) / sd)
        pmf = np.diff(cdf)
        # saturate the tails into the end bins
        pmf[0] += cdf[0]
        pmf[-1] += 1.0 - cdf[-1]
        return QuantizedDensity(grid, pmf)
    raise InvalidParameterError(f"unsupported channel {ch!r}")


# ------------------------------------------------------------------ check side

@lru_cache(maxsize=4)
def combination_table(grid: Grid) -> np.ndarray:
    """Output magnitude bin of the tanh rule for input magnitude bins ``0..K+1``.

    Bin ``K + 1`` is infinity.
    """
    K = grid.half_bins
    t = np.tanh(0.5 * np.arange(K + 1) * grid.step)
    table = np.empty((K + 2, K + 2), dtype=np.int16)
    for a in range(K + 1):
        prod = np.minimum(t[a] * t, 1.0 - 1e-15)
        table[a, :K + 1] = np.minimum(np.rint(2.0 * np.arctanh(prod) / grid.step), K)
    table[K + 1, :] = np.arange(K + 2)
    table[:, K + 1] = np.arange(K + 2)
    table.flags.writeable = False
    return table


@lru_cache(maxsize=4)
def saturation_points(grid: Grid) -> np.ndarray:
    """Smallest ``s[a] >= a`` with ``table[a, b] == a`` for every ``b >= s[a]``."""
    table = combination_table(grid)
    n = table.shape[0]
    sat = np.empty(n, dtype=np.int64)
    for a in range(n):
        bad = np.flatnonzero(table[a, a:] != a)
        sat[a] = a + (bad[-1] + 1 if bad.size else 0)
    sat.flags.writeable = False
    return sat


def _split(d: QuantizedDensity) -> tuple[np.ndarray, np.ndarray]:
    K = d.grid.half_bins
    pos = np.empty(K + 2)
    neg = np.empty(K + 2)
    pos[:K + 1] = d.pmf[K:]
    neg[1:K + 1] = d.pmf[K - 1::-1]
    neg[0] = 0.0
    pos[K + 1] = d.pos_inf
    neg[K + 1] = d.neg_inf
    return pos, neg


def _join(grid: Grid, pos: np.ndarray, neg: np.ndarray) -> QuantizedDensity:
    K = grid.half_bins
    pmf = np.empty(grid.size)
    pmf[K:] = pos[:K + 1]
    pmf[:K] = neg[K:0:-1]
    pmf[K] += neg[0]
    return QuantizedDensity(grid, pmf, float(pos[K + 1]), float(neg[K + 1])).normalized()


def check_combine(x: QuantizedDensity, y: QuantizedDensity) -> QuantizedDensity:
    """Density of ``2 atanh(tanh(X/2) tanh(Y/2))`` for independent ``X, Y``."""
    table = combination_table(x.grid)
    xp, xn = _split(x)
    yp, yn = _split(y)
    zp, zn = kernels.check_pair(xp, xn, yp, yn, table, saturation_points(x.grid))
    return _join(x.grid, np.asarray(zp), np.asarray(zn))


def _identity_check(grid: Grid) -> QuantizedDensity:
    return QuantizedDensity.point(grid, math.inf)


def _identity_var(grid: Grid) -> QuantizedDensity:
    return QuantizedDensity.point(grid, 0.0)


def _power(d: QuantizedDensity, k: int, op, identity) -> QuantizedDensity:
    result = identity
    base = d
    first = True
    while k:
        if k & 1:
            result = base if first else op(result, base)
            first = False
        k >>= 1
        if k:
            base = op(base, base)
    return result


def _mixture(parts: list[tuple[float, QuantizedDensity]]) -> QuantizedDensity:
    grid = parts[0][1].grid
    pmf = sum(w * d.pmf for w, d in parts)
    return QuantizedDensity(grid, pmf, sum(w * d.pos_inf for w, d in parts),
                            sum(w * d.neg_inf for w, d in parts)).normalized()


def _degree_mix(d: QuantizedDensity, degrees: dict[int, float], op, identity) -> QuantizedDensity:
    if len(degrees) == 1:
        (deg, _), = degrees.items()
        return _power(d, deg - 1, op, identity)
    parts = []
    acc = identity
    for k in range(0, max(degrees)):
        if k > 0:
            acc = d if k == 1 else op(acc, d)
        if (k + 1) in degrees:
            parts.append((degrees[k + 1], acc))
    return _mixture(parts)


def check_transform(d: QuantizedDensity, ep: EdgePerspective) -> QuantizedDensity:
    return _degree_mix(d, ep.check_degrees(), check_combine, _identity_check(d.grid))


# --------------------------------------------------------------- variable side

def variable_add(x: QuantizedDensity, y: QuantizedDensity) -> QuantizedDensity:
    """Density of ``X + Y``; finite overflow saturates, ``+inf + -inf`` lands on 0."""
    grid = x.grid
    K = grid.half_bins
    conv = fftconvolve(x.pmf, y.pmf)
    np.clip(conv, 0.0, None, out=conv)
    # conv index t corresponds to bin t - 2K
    pmf = conv[K:3 * K + 1].copy()
    pmf[0] += conv[:K].sum()
    pmf[-1] += conv[3 * K + 1:].sum()
    xf, yf = x.pmf.sum(), y.pmf.sum()
    pos = x.pos_inf * (yf + y.pos_inf) + xf * y.pos_inf
    neg = x.neg_inf * (yf + y.neg_inf) + xf * y.neg_inf
    pmf[K] += x.pos_inf * y.neg_inf + x.neg_inf * y.pos_inf
    return QuantizedDensity(grid, pmf, pos, neg).normalized()


def variable_transform(d: QuantizedDensity, ch_density: QuantizedDensity,
                       ep: EdgePerspective) -> QuantizedDensity:
    mixed = _degree_mix(d, ep.variable_degrees(), variable_add, _identity_var(d.grid))
    return variable_add(ch_density, mixed)


def bp_de_step(d: QuantizedDensity, ch_density: QuantizedDensity, ep: EdgePerspective) -> QuantizedDensity:
    """One iteration: check transform, then variable transform with the channel."""
    return variable_transform(check_transform(d, ep), ch_density, ep)


@dataclass
class DeRun:
    converged: bool
    errors: list = field(default_factory=list)
    final: Optional[QuantizedDensity] = None

    @property
    def iterations(self) -> int:
        return len(self.errors) - 1


def bp_density_evolution(ch_density: QuantizedDensity, ep: EdgePerspective, max_iter: int = 2000,
                         stall_window: int = 50) -> DeRun:
    """Iterate until the error measure drops below ``CONVERGED`` or stalls above ``STALLED``."""
    d = ch_density
    run = DeRun(False, [d.error])
    flat = 0
    for _ in range(max_iter):
        d = bp_de_step(d, ch_density, ep)
        err = d.error
        if err < CONVERGED:
            run.errors.append(err)
            run.converged = True
            break
        flat = flat + 1 if not_decreasing(err, run.errors[-1]) else 0
        run.errors.append(err)
        if flat >= stall_window and err > STALLED:
            break
    run.final = d
    return run


DEFAULT_BRACKETS = {"bsc": (0.0, 0.5), "biawgn": (0.3, 2.0), "bec": (0.0, 1.0)}


def bp_threshold(family: str, ep: EdgePerspective, grid: Optional[Grid] = None,
                 max_iter: int = 2000, tol: float = 1e-3,
                 bracket: Optional[tuple[float, float]] = None) -> ThresholdResult:
    """Bisection on the channel parameter of ``family`` ("bsc", "biawgn", "bec").

    ``bracket = (good, bad)`` must hold a converging and a failing parameter.
    """
    grid = grid or Grid()
    if family not in DEFAULT_BRACKETS:
        raise InvalidParameterError(f"unknown channel family {family!r}")
    lo, hi = bracket or DEFAULT_BRACKETS[family]

    def converges(param: float) -> bool:
        if param <= 0.0:
            return True
        ch = make_channel(family, param)
        return bp_density_evolution(bp_initial_density(ch, grid), ep, max_iter).converged

    return bisect_threshold(converges, lo, hi, tol, f"quantised BP, step {grid.step:g}")
