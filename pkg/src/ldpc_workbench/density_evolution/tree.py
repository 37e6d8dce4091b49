"""Monte-Carlo evaluation of the root message on random computation trees."""

from __future__ import annotations

import bisect
import math
import random
from dataclasses import dataclass
from itertools import accumulate

from ..degree_dist import EdgePerspective
from ..errors import InvalidParameterError


@dataclass(frozen=True)
class TreeEstimate:
    frequency: float
    stderr: float
    trials: int


def _sampler(rng: random.Random, fractions: dict[int, float]):
    degrees = sorted(fractions)
    cum = list(accumulate(fractions[d] for d in degrees))
    total = cum[-1]

    def draw() -> int:
        # number of children = degree - 1
        return degrees[min(bisect.bisect_right(cum, rng.random() * total), len(degrees) - 1)] - 1

    return draw


def tree_validate(ep: EdgePerspective, alpha: float, ell: int, trials: int, seed: int) -> TreeEstimate:
    """Frequency with which the root's outgoing message is an erasure.

    Trees are grown lazily and evaluation short-circuits: a variable with a
    known received value needs no subtree, and a check stops at its first
    erased child.  Children are drawn independently, so skipping subtrees
    that cannot affect the root leaves the distribution of the root message
    unchanged.
    """
    if not 0.0 <= alpha <= 1.0:
        raise InvalidParameterError("alpha must lie in [0, 1]")
    if ell < 0 or trials < 1:
        raise InvalidParameterError("need ell >= 0 and trials >= 1")
    rng = random.Random(seed)
    var_children = _sampler(rng, ep.variable_degrees())
    chk_children = _sampler(rng, ep.check_degrees())
    uniform = rng.random

    def var_erased(depth: int) -> bool:
        if uniform() >= alpha:
            return False
        if depth == 0:
            return True
        for _ in range(var_children()):
            if not chk_erased(depth):
                return False
        return True

    def chk_erased(depth: int) -> bool:
        for _ in range(chk_children()):
            if var_erased(depth - 1):
                return True
        return False

    hits = sum(var_erased(ell) for _ in range(trials))
    freq = hits / trials
    return TreeEstimate(freq, math.sqrt(max(freq * (1.0 - freq), 1e-300) / trials), trials)
