"""Scalar density evolution: erasure channel, Gallager A/B and ternary message decoders."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Optional

import numpy as np
from scipy import optimize
from scipy.special import comb

from ..degree_dist import EdgePerspective
from ..errors import InvalidParameterError

CONVERGED = 1e-8
STALLED = 1e-4
FLAT_RTOL = 1e-12  # relative change treated as rounding noise at a fixed point


def not_decreasing(new: float, old: float) -> bool:
    return new >= old * (1.0 - FLAT_RTOL)


@dataclass(frozen=True)
class ThresholdResult:
    """Threshold estimate with a bracket ``(good, bad)`` of channel parameters.

    ``bracket[0]`` is certified to converge and ``bracket[1]`` to fail, under
    the criterion named in ``method``.
    """

    value: float
    bracket: tuple[float, float]
    iterations_used: int
    tolerance: float
    method: str = ""

    def __post_init__(self):
        lo, hi = self.bracket
        if lo > hi:
            object.__setattr__(self, "bracket", (hi, lo))


def bisect_threshold(converges: Callable[[float], bool], lo: float, hi: float, tol: float,
                     method: str = "", increasing_is_worse: bool = True) -> ThresholdResult:
    """Bisection on a monotone channel family.

    ``lo`` must converge and ``hi`` must fail (for families where a larger
    parameter is a worse channel).
    """
    good, bad = (lo, hi) if increasing_is_worse else (hi, lo)
    steps = 0
    while abs(bad - good) > tol:
        mid = 0.5 * (good + bad)
        if converges(mid):
            good = mid
        else:
            bad = mid
        steps += 1
    return ThresholdResult(0.5 * (good + bad), (good, bad), steps, tol, method)


# --------------------------------------------------------------- erasure channel

def bec_de_step(x, alpha: float, ep: EdgePerspective):
    """``alpha * lam(1 - rho(1 - x))``."""
    return alpha * ep.lambda_edge(1.0 - ep.rho_edge(1.0 - np.asarray(x, dtype=float)))


def bec_iterate(alpha: float, ep: EdgePerspective, iterations: int, x0: Optional[float] = None) -> np.ndarray:
    """Erasure probabilities ``x_0 .. x_iterations`` with ``x_0 = alpha`` by default."""
    xs = [alpha if x0 is None else x0]
    for _ in range(iterations):
        xs.append(float(bec_de_step(xs[-1], alpha, ep)))
    return np.array(xs)


def _rho_deficit(x, ep: EdgePerspective):
    """``1 - rho(1 - x)`` without cancellation for small ``x``."""
    x = np.asarray(x, dtype=float)
    powers = np.arange(len(ep.rho_edge.coeffs))
    coeffs = np.asarray(ep.rho_edge.coeffs)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = -np.expm1(np.multiply.outer(np.log1p(-x), powers))
    terms[..., 0] = 0.0  # the constant term never contributes, even at x = 1
    return terms @ coeffs


def _bec_ratio(x, ep: EdgePerspective):
    den = ep.lambda_edge(_rho_deficit(x, ep))
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > 0, x / np.where(den > 0, den, 1.0), np.inf)


def bec_threshold(ep: EdgePerspective, tol: float = 1e-7) -> ThresholdResult:
    """Minimum of ``x / lam(1 - rho(1 - x))`` over ``(0, 1]``.

    Dense scan over a geometric and a uniform grid, then bounded refinement
    around the best grid point.
    """
    xs = np.unique(np.concatenate([np.geomspace(1e-9, 1.0, 4000), np.linspace(0.0, 1.0, 20001)[1:]]))
    g = _bec_ratio(xs, ep)
    k = int(np.argmin(g))
    best_x, best = xs[k], float(g[k])
    lo, hi = xs[max(k - 1, 0)], xs[min(k + 1, len(xs) - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(lambda t: float(_bec_ratio(np.array(t), ep)),
                                       bounds=(lo, hi), method="bounded",
                                       options={"xatol": tol * 1e-2})
        if res.fun < best:
            best_x, best = float(res.x), float(res.fun)
    best = min(best, 1.0)
    return ThresholdResult(best, (best - tol / 2, best + tol / 2), len(xs), tol,
                           f"min ratio at x={best_x:.6g}")


def bec_threshold_regular_closed_form(d_v: int, d_c: int) -> float:
    """Threshold of the regular ensemble from the unique positive root of
    ``((d_v-1)(d_c-1)-1) x^(d_c-2) - sum_{i<d_c-2} x^i``."""
    if d_v < 3:
        raise InvalidParameterError("closed form needs d_v >= 3 (d_v = 2 has threshold 0)")
    if d_c <= d_v:
        raise InvalidParameterError("closed form needs d_c > d_v")
    k = (d_v - 1) * (d_c - 1) - 1

    def p(x):
        return k * x ** (d_c - 2) - sum(x ** i for i in range(d_c - 2))

    lo, hi = 0.0, 1.0
    while hi - lo > 1e-13:
        mid = 0.5 * (lo + hi)
        if p(mid) < 0:
            lo = mid
        else:
            hi = mid
    gamma = 0.5 * (lo + hi)
    return (1.0 - gamma) / (1.0 - gamma ** (d_c - 1)) ** (d_v - 1)


# -------------------------------------------------------------------- Gallager

def _check_flip(p_i, d_c):
    """``(a, c)``: probability a check message is right / wrong.

    Computed as ``c = (1 - (1-2p)^(d_c-1)) / 2`` without cancellation for small ``p``.
    """
    p_i = np.asarray(p_i, dtype=float)
    with np.errstate(divide="ignore"):
        c = -np.expm1((d_c - 1) * np.log1p(-2.0 * p_i)) / 2.0
    return 1.0 - c, c


def gallager_a_de_step(p_i, p0, d_v: int, d_c: int):
    """Error probability of variable-to-check messages after one iteration of Algorithm A."""
    a, c = _check_flip(p_i, d_c)
    p0 = np.asarray(p0, dtype=float)
    n = d_v - 1
    with np.errstate(divide="ignore"):
        stay_wrong = -np.expm1(n * np.log1p(-c))  # 1 - a**n
    return p0 * stay_wrong + (1.0 - p0) * c ** n


def _binom_upper(a, c, n: int, b: int):
    """``sum_{j=b}^{n} C(n, j) a^j c^(n-j)``."""
    out = np.zeros(np.broadcast(a, c).shape)
    for j in range(max(b, 0), n + 1):
        out = out + comb(n, j) * a ** j * c ** (n - j)
    return out


def _binom_lower(a, c, n: int, b: int):
    """``sum_{j<b} C(n, j) a^j c^(n-j)``."""
    out = np.zeros(np.broadcast(a, c).shape)
    for j in range(0, min(b, n + 1)):
        out = out + comb(n, j) * a ** j * c ** (n - j)
    return out


def gallager_b_de_step(p_i, p0, d_v: int, d_c: int, b: int):
    """Algorithm B recursion with cutoff ``b``."""
    if not (d_v - 1) / 2 < b <= d_v - 1:
        raise InvalidParameterError(f"cutoff {b} outside ((d_v-1)/2, d_v-1]")
    a, c = _check_flip(p_i, d_c)
    p0 = np.asarray(p0, dtype=float)
    n = d_v - 1
    # p0 * (1 - P[>= b right]) + (1 - p0) * P[>= b wrong]
    return p0 * _binom_lower(a, c, n, b) + (1.0 - p0) * _binom_upper(c, a, n, b)


def _smallest_cutoff(log_ratio_channel: float, log_ratio_check: float, j: int) -> int:
    lo = (j - 1) // 2 + 1
    for b in range(lo, j):
        if log_ratio_channel <= (2 * b - j + 1) * log_ratio_check:
            return b
    return max(j - 1, 1)


def optimal_cutoff(p_i: float, p0: float, d_v: int, d_c: int) -> int:
    """Smallest admissible ``b`` with ``(1-p0)/p0 <= (a/c)^(2b - d_v + 1)``."""
    a, c = _check_flip(p_i, d_c)
    return _smallest_cutoff(_log_odds(p0), _log_ratio(float(a), float(c)), d_v)


def _log_odds(p0: float) -> float:
    if p0 <= 0:
        return -math.inf
    return math.log((1.0 - p0) / p0)


def _log_ratio(a: float, c: float) -> float:
    if c <= 0:
        return math.inf
    return math.log(a / c)


def _check_wrong(p_i, ep: EdgePerspective):
    """``(1 - rho(1 - 2 p_i)) / 2`` evaluated term by term to avoid cancellation."""
    p_i = np.asarray(p_i, dtype=float)
    out = np.zeros(p_i.shape)
    with np.errstate(divide="ignore"):
        for d, rho_d in ep.check_degrees().items():
            out = out + rho_d * -np.expm1((d - 1) * np.log1p(-2.0 * p_i))
    return out / 2.0


def irregular_optimal_cutoffs(p_i: float, p0: float, ep: EdgePerspective) -> dict[int, int]:
    """Per-degree cutoffs; the sign threshold on (agree - disagree) is degree independent."""
    c = float(_check_wrong(p_i, ep))
    a = 1.0 - c
    lc, lr = _log_odds(p0), _log_ratio(a, c)
    return {j: _smallest_cutoff(lc, lr, j) for j in ep.variable_degrees() if j >= 2}


def irregular_b_de_step(p_i, p0, ep: EdgePerspective, cutoffs: Optional[Mapping[int, int]] = None):
    """Irregular Algorithm B recursion, each degree weighted by its edge fraction ``lam_j``.

    ``cutoffs`` maps degree to cutoff; ``None`` selects the optimal cutoffs
    (only for scalar ``p_i``).
    """
    if cutoffs is None:
        cutoffs = irregular_optimal_cutoffs(float(p_i), float(p0), ep)
    c = _check_wrong(p_i, ep)
    a = 1.0 - c
    p0 = np.asarray(p0, dtype=float)
    out = 0.0
    for j, lam_j in ep.variable_degrees().items():
        if j == 1:
            out = out + lam_j * p0
            continue
        b = cutoffs[j]
        n = j - 1
        out = out + lam_j * (p0 * _binom_lower(a, c, n, b) + (1.0 - p0) * _binom_upper(c, a, n, b))
    return out


def _fixed_point_free(step: Callable, p0: float, grid_points: int = 3000) -> bool:
    """True when ``step(x) < x`` on all of ``(0, p0]`` (no positive fixed point)."""
    xs = np.unique(np.concatenate([np.geomspace(1e-12, p0, grid_points),
                                   np.linspace(0.0, p0, grid_points)[1:]]))
    fx = step(xs)
    return bool(np.all(fx < xs))


def iterate_scalar(step: Callable[[float, int], float], x0: float, max_iter: int = 100_000,
                   stall_window: int = 50) -> tuple[bool, float, int]:
    """Iterate ``x <- step(x, i)`` until the value drops below ``CONVERGED`` or stalls.

    Stalling means ``STALLED`` is exceeded and the sequence has not decreased
    for ``stall_window`` consecutive iterations.  Returns
    ``(converged, last value, iterations)``.
    """
    x = x0
    flat = 0
    for i in range(1, max_iter + 1):
        nxt = float(step(x, i))
        if nxt < CONVERGED:
            return True, nxt, i
        flat = flat + 1 if not_decreasing(nxt, x) else 0
        x = nxt
        if flat >= stall_window and x > STALLED:
            return False, x, i
    return False, x, max_iter


def gallager_a_threshold(d_v: int, d_c: int, tol: float = 1e-7) -> ThresholdResult:
    """Largest ``p0`` for which Algorithm A has no positive fixed point below ``p0``."""
    if d_v < 3:
        raise InvalidParameterError("Algorithm A analysis needs d_v >= 3")
    return bisect_threshold(
        lambda p0: _fixed_point_free(lambda x: gallager_a_de_step(x, p0, d_v, d_c), p0),
        0.0, 0.5, tol, "fixed-point scan")


def _optimal_b_step(x, p0, d_v, d_c):
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(xs)
    for k, xi in enumerate(xs):
        b = optimal_cutoff(float(xi), p0, d_v, d_c)
        out[k] = gallager_b_de_step(xi, p0, d_v, d_c, b)
    return out if np.ndim(x) else float(out[0])


def _optimal_b_grid_step(xs, p0, d_v, d_c):
    # the optimal cutoff only changes at a handful of x; evaluate all b and select
    a, c = _check_flip(xs, d_c)
    lc = _log_odds(p0)
    with np.errstate(divide="ignore"):
        lr = np.where(c > 0, np.log(a / np.where(c > 0, c, 1.0)), np.inf)
    n = d_v - 1
    chosen = np.full(xs.shape, max(n, 1))
    for b in range(n, n // 2, -1):
        chosen = np.where(lc <= (2 * b - d_v + 1) * lr, b, chosen)
    out = np.zeros_like(xs)
    for b in np.unique(chosen):
        mask = chosen == b
        out[mask] = gallager_b_de_step(xs[mask], p0, d_v, d_c, int(b))
    return out


def gallager_b_threshold(d_v: int, d_c: int, tol: float = 1e-6) -> ThresholdResult:
    """Algorithm B threshold when every iteration uses the optimal cutoff."""
    if d_v < 3:
        raise InvalidParameterError("Algorithm B analysis needs d_v >= 3")
    return bisect_threshold(
        lambda p0: _fixed_point_free(lambda x: _optimal_b_grid_step(x, p0, d_v, d_c), p0),
        0.0, 0.5, tol, "fixed-point scan, optimal cutoffs")


def irregular_b_threshold(ep: EdgePerspective, cutoffs: Optional[Mapping[int, int]] = None,
                          tol: float = 1e-6) -> ThresholdResult:
    """Threshold of the irregular recursion; ``cutoffs=None`` uses optimal cutoffs."""
    if cutoffs is None:
        def step(xs, p0):
            return np.array([irregular_b_de_step(float(x), p0, ep) for x in xs])
    else:
        def step(xs, p0):
            return irregular_b_de_step(xs, p0, ep, cutoffs)
    points = 600 if cutoffs is None else 3000
    return bisect_threshold(lambda p0: _fixed_point_free(lambda x: step(x, p0), p0, points),
                            0.0, 0.5, tol, "fixed-point scan")


def certify_scalar(step: Callable[[float, float], float], value: float, tol: float,
                   max_iter: int = 200_000) -> tuple[tuple[bool, float, int], tuple[bool, float, int]]:
    """Iterate from ``p0 = value - tol`` and ``p0 = value + tol``.

    ``step(x, p0)`` is the recursion.  Returns the ``iterate_scalar`` outcome
    for both probes.
    """
    below = iterate_scalar(lambda x, i: step(x, value - tol), value - tol, max_iter)
    above = iterate_scalar(lambda x, i: step(x, value + tol), value + tol, max_iter)
    return below, above


# -------------------------------------------------------- ternary messages

@dataclass(frozen=True)
class TernaryState:
    """Message distribution over {+1, 0, -1} given that +1 was sent."""

    plus: float
    zero: float
    minus: float

    @property
    def error(self) -> float:
        """Wrong-sign mass plus half the erasure mass."""
        return self.minus + 0.5 * self.zero

    @property
    def bhattacharyya(self) -> float:
        return 2.0 * math.sqrt(max(self.plus * self.minus, 0.0)) + self.zero


def ternary_check_step(state: TernaryState, ep: EdgePerspective) -> TernaryState:
    """Product of ``d - 1`` independent ternary messages, mixed over ``rho``."""
    known = 1.0 - state.zero
    s = state.plus - state.minus
    plus = zero = minus = 0.0
    for d, rho_d in ep.check_degrees().items():
        k = d - 1
        kk, sk = known ** k, s ** k
        plus += rho_d * (kk + sk) / 2.0
        minus += rho_d * (kk - sk) / 2.0
        zero += rho_d * (1.0 - kk)
    return TernaryState(plus, zero, minus)


def _sum_pmf(check: TernaryState, count: int) -> np.ndarray:
    """pmf of (#plus - #minus) over ``count`` iid messages, offset by ``count``."""
    base = np.array([check.minus, check.zero, check.plus])
    out = np.array([1.0])
    for _ in range(count):
        out = np.convolve(out, base)
    return out


def ternary_variable_step(check: TernaryState, channel: TernaryState, w: float,
                          ep: EdgePerspective) -> TernaryState:
    """``sgn(w r + sum of d - 1 check messages)``, mixed over ``lam``."""
    plus = zero = minus = 0.0
    for j, lam_j in ep.variable_degrees().items():
        n = j - 1
        pmf = _sum_pmf(check, n)
        totals = np.arange(-n, n + 1, dtype=float)
        for r, pr in ((1.0, channel.plus), (0.0, channel.zero), (-1.0, channel.minus)):
            if pr == 0.0:
                continue
            v = w * r + totals
            plus += lam_j * pr * pmf[v > 0].sum()
            minus += lam_j * pr * pmf[v < 0].sum()
            zero += lam_j * pr * pmf[v == 0].sum()
    return TernaryState(plus, zero, minus)


def weighted_de(channel: TernaryState, ep: EdgePerspective, weights, max_iter: int = 2000,
                stall_window: int = 50) -> tuple[bool, list[TernaryState]]:
    """Run the weighted decoder recursion; ``weights[i - 1]`` is used at iteration ``i``."""
    weights = list(np.atleast_1d(weights))
    state = channel
    hist = [state]
    flat = 0
    for i in range(1, max_iter + 1):
        w = weights[min(i - 1, len(weights) - 1)]
        state = ternary_variable_step(ternary_check_step(state, ep), channel, w, ep)
        hist.append(state)
        if state.error < CONVERGED:
            return True, hist
        flat = flat + 1 if not_decreasing(state.error, hist[-2].error) else 0
        if flat >= stall_window and state.error > STALLED:
            return False, hist
    return False, hist


def bsc_ternary(p: float) -> TernaryState:
    return TernaryState(1.0 - p, 0.0, p)


def weighted_bsc_threshold(ep: EdgePerspective, weights, tol: float = 1e-4,
                           max_iter: int = 2000) -> ThresholdResult:
    return bisect_threshold(lambda p: weighted_de(bsc_ternary(p), ep, weights, max_iter)[0],
                            0.0, 0.5, tol, "weighted recursion")


TAU_GRID = np.linspace(0.0, 1.5, 31)
WEIGHT_GRID = (0.5, 1.0, 1.5, 2.0, 2.5, 3.0)


def _ternary_channel(sigma: float, tau: float) -> TernaryState:
    from ..channels import ternary_probabilities
    return TernaryState(*ternary_probabilities(sigma, tau))


def ternary_biawgn_de(sigma: float, ep: EdgePerspective, max_iter: int = 2000,
                      taus=TAU_GRID, weights=WEIGHT_GRID, stall_window: int = 50):
    """Greedy per-iteration choice of quantiser threshold and weight.

    At each iteration the pair ``(tau, w)`` minimising the Bhattacharyya
    functional ``2 sqrt(P+ P-) + P0`` of the outgoing message is kept.
    Returns ``(converged, states, choices)``.
    """
    channels = [_ternary_channel(sigma, t) for t in taus]
    state = min(channels, key=lambda s: s.bhattacharyya)
    hist = [state]
    choices = []
    flat = 0
    for _ in range(max_iter):
        chk = ternary_check_step(state, ep)
        best = None
        for t, ch in zip(taus, channels):
            for w in weights:
                cand = ternary_variable_step(chk, ch, w, ep)
                if best is None or cand.bhattacharyya < best[0].bhattacharyya:
                    best = (cand, float(t), float(w))
        state = best[0]
        choices.append(best[1:])
        hist.append(state)
        if state.error < CONVERGED:
            return True, hist, choices
        flat = flat + 1 if not_decreasing(state.error, hist[-2].error) else 0
        if flat >= stall_window and state.error > STALLED:
            return False, hist, choices
    return False, hist, choices


def ternary_biawgn_threshold(ep: EdgePerspective, tol: float = 1e-3, max_iter: int = 2000,
                             bracket: tuple[float, float] = (0.4, 1.2)) -> ThresholdResult:
    return bisect_threshold(lambda s: ternary_biawgn_de(s, ep, max_iter)[0],
                            bracket[0], bracket[1], tol, "greedy (tau, w) per iteration")
