"""Density evolution and threshold computation for every decoder in the package."""

from __future__ import annotations

from typing import Optional

from ..decoders import CutoffSchedule, WeightSchedule
from ..degree_dist import EdgePerspective
from ..errors import InvalidParameterError
from .bp import (Grid, QuantizedDensity, bp_de_step, bp_density_evolution, bp_initial_density,
                 bp_threshold, check_combine, check_transform, variable_add, variable_transform)
from .scalar import (TernaryState, ThresholdResult, bec_de_step, bec_iterate, bec_threshold,
                     bec_threshold_regular_closed_form, bisect_threshold, bsc_ternary,
                     certify_scalar, gallager_a_de_step, gallager_a_threshold, gallager_b_de_step,
                     gallager_b_threshold, irregular_b_de_step, irregular_b_threshold,
                     irregular_optimal_cutoffs, iterate_scalar, optimal_cutoff,
                     ternary_biawgn_de, ternary_biawgn_threshold, ternary_check_step,
                     ternary_variable_step, weighted_bsc_threshold, weighted_de)
from .tree import TreeEstimate, tree_validate


def quantized_decoder_threshold(decoder: str, ep: EdgePerspective, schedules=None,
                                family: str = "bsc", tol: Optional[float] = None) -> ThresholdResult:
    """Threshold of a finite-alphabet decoder.

    ``decoder`` is ``"gal-a"``, ``"gal-b"`` or ``"weighted"``.  ``schedules``
    is a ``CutoffSchedule`` (gal-b), a ``WeightSchedule`` or weight list
    (weighted), or ``None`` for the optimised default.  ``family`` is
    ``"bsc"`` or, for the weighted decoder, ``"ternary-biawgn"`` (BIAWGN
    output quantised to three levels with threshold and weight chosen per
    iteration).
    """
    if decoder == "gal-a":
        if family != "bsc":
            raise InvalidParameterError("gal-a is analysed on the BSC only")
        cut = {j: j - 1 for j in ep.variable_degrees() if j >= 2}
        return irregular_b_threshold(ep, cut, tol=tol or 1e-7)
    if decoder == "gal-b":
        if family != "bsc":
            raise InvalidParameterError("gal-b is analysed on the BSC only")
        if schedules is None:
            return irregular_b_threshold(ep, None, tol=tol or 1e-6)
        if not isinstance(schedules, CutoffSchedule):
            raise InvalidParameterError("gal-b needs a CutoffSchedule")
        degrees = [j for j in ep.variable_degrees() if j >= 2]
        schedules.validate(degrees)

        def converges(p0: float) -> bool:
            def step(x, i):
                cut = {j: schedules(i, j) for j in degrees}
                return irregular_b_de_step(x, p0, ep, cut)
            return iterate_scalar(step, p0)[0]

        return bisect_threshold(converges, 0.0, 0.5, tol or 1e-4, "iterated recursion")
    if decoder == "weighted":
        if family == "bsc":
            if schedules is None:
                raise InvalidParameterError("weighted decoder on the BSC needs a weight schedule")
            w = schedules.weights if isinstance(schedules, WeightSchedule) else schedules
            return weighted_bsc_threshold(ep, w, tol=tol or 1e-4)
        if family == "ternary-biawgn":
            return ternary_biawgn_threshold(ep, tol=tol or 1e-3)
        raise InvalidParameterError(f"unsupported family {family!r} for the weighted decoder")
    raise InvalidParameterError(f"unknown quantised decoder {decoder!r}")


__all__ = [
    "Grid", "QuantizedDensity", "TernaryState", "ThresholdResult", "TreeEstimate",
    "bec_de_step", "bec_iterate", "bec_threshold", "bec_threshold_regular_closed_form",
    "bisect_threshold", "bp_de_step", "bp_density_evolution", "bp_initial_density",
    "bp_threshold", "bsc_ternary", "certify_scalar", "check_combine", "check_transform",
    "gallager_a_de_step", "gallager_a_threshold", "gallager_b_de_step", "gallager_b_threshold",
    "irregular_b_de_step", "irregular_b_threshold", "irregular_optimal_cutoffs",
    "iterate_scalar", "optimal_cutoff", "quantized_decoder_threshold", "ternary_biawgn_de",
    "ternary_biawgn_threshold", "ternary_check_step", "ternary_variable_step", "tree_validate",
    "variable_add", "variable_transform", "weighted_bsc_threshold", "weighted_de",
]
