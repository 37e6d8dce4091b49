"""Degree-distribution algebra for LDPC ensembles.

Two parameterisations are used throughout the package:

* node perspective ``(Lambda, P)``: ``Lambda[i]`` is the number of variable
  nodes of degree ``i`` (coefficient of ``x**i``), likewise ``P`` for checks;
* edge perspective ``(lam, rho)``: ``lam[i]`` is the fraction of edges attached
  to variable nodes of degree ``i + 1`` (coefficient of ``x**i``).

The module also builds the two classical capacity-approaching families for
the erasure channel (heavy-tail Poisson / "Tornado" and check-concentrated).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Union

import numpy as np
from scipy.stats import poisson

from .channels import binary_entropy
from .errors import InvalidDistributionError, InvalidParameterError

MAX_DEGREE = 10_000
NORMALIZATION_TOL = 1e-12
TORNADO_TAIL_MASS = 1e-12


@dataclass(frozen=True)
class Polynomial:
    """Polynomial with non-negative real coefficients, ``coeffs[i]`` ~ ``x**i``."""

    coeffs: tuple[float, ...]

    def __post_init__(self):
        c = [float(v) for v in self.coeffs]
        if any(not math.isfinite(v) for v in c):
            raise InvalidDistributionError("polynomial coefficients must be finite")
        if any(v < 0 for v in c):
            raise InvalidDistributionError(f"negative coefficient in {c}")
        while c and c[-1] == 0.0:
            c.pop()
        if len(c) > MAX_DEGREE + 1:
            raise InvalidDistributionError(f"degree {len(c) - 1} exceeds cap {MAX_DEGREE}")
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def from_terms(cls, terms: Mapping[int, float]) -> "Polynomial":
        """Build from a sparse ``{power: coefficient}`` mapping."""
        if not terms:
            return cls(())
        top = max(terms)
        c = [0.0] * (top + 1)
        for power, value in terms.items():
            if power < 0:
                raise InvalidDistributionError("negative power")
            c[power] += value
        return cls(tuple(c))

    @classmethod
    def monomial(cls, power: int, coefficient: float = 1.0) -> "Polynomial":
        return cls.from_terms({power: coefficient})

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=float)

    @property
    def degree(self) -> int:
        """Degree of the polynomial; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __call__(self, x):
        if not self.coeffs:
            return np.zeros_like(np.asarray(x, dtype=float)) if np.ndim(x) else 0.0
        return np.polynomial.polynomial.polyval(x, self.coeffs)

    def derivative(self) -> "Polynomial":
        return Polynomial(tuple(i * c for i, c in enumerate(self.coeffs))[1:])

    def antiderivative(self) -> "Polynomial":
        """Antiderivative vanishing at 0."""
        return Polynomial((0.0,) + tuple(c / (i + 1) for i, c in enumerate(self.coeffs)))

    def integral01(self) -> float:
        return float(sum(c / (i + 1) for i, c in enumerate(self.coeffs)))

    def scaled(self, factor: float) -> "Polynomial":
        return Polynomial(tuple(factor * c for c in self.coeffs))

    def normalized(self) -> "Polynomial":
        total = float(sum(self.coeffs))
        if total <= 0:
            raise InvalidDistributionError("cannot normalise the zero polynomial")
        return self.scaled(1.0 / total)

    def terms(self) -> dict[int, float]:
        return {i: c for i, c in enumerate(self.coeffs) if c != 0.0}


@dataclass(frozen=True)
class NodePerspective:
    """Node counts per degree for variables (``lambda_node``) and checks (``p_node``)."""

    lambda_node: Polynomial
    p_node: Polynomial

    def __post_init__(self):
        for name, poly in (("Lambda", self.lambda_node), ("P", self.p_node)):
            for c in poly.coeffs:
                if abs(c - round(c)) > 1e-9:
                    raise InvalidDistributionError(f"{name} has non-integer node count {c}")
        if self.num_edges != _edge_count(self.p_node):
            raise InvalidDistributionError(
                f"socket mismatch: {self.num_edges} variable vs "
                f"{_edge_count(self.p_node)} check sockets"
            )

    @property
    def num_variables(self) -> int:
        return int(round(sum(self.lambda_node.coeffs)))

    @property
    def num_checks(self) -> int:
        return int(round(sum(self.p_node.coeffs)))

    @property
    def num_edges(self) -> int:
        return _edge_count(self.lambda_node)

    def variable_degrees(self) -> dict[int, int]:
        return {i: int(round(c)) for i, c in self.lambda_node.terms().items()}

    def check_degrees(self) -> dict[int, int]:
        return {i: int(round(c)) for i, c in self.p_node.terms().items()}

    @classmethod
    def regular(cls, n: int, d_v: int, d_c: int) -> "NodePerspective":
        if n * d_v % d_c:
            raise InvalidParameterError(f"n*d_v = {n * d_v} is not divisible by d_c = {d_c}")
        return cls(Polynomial.monomial(d_v, n), Polynomial.monomial(d_c, n * d_v // d_c))


def _edge_count(poly: Polynomial) -> int:
    return int(round(sum(i * c for i, c in enumerate(poly.coeffs))))


@dataclass(frozen=True)
class EdgePerspective:
    """Edge-perspective pair; ``lambda_edge[i]`` belongs to degree ``i + 1``."""

    lambda_edge: Polynomial
    rho_edge: Polynomial

    def __post_init__(self):
        for name, poly in (("lambda", self.lambda_edge), ("rho", self.rho_edge)):
            if abs(sum(poly.coeffs) - 1.0) > NORMALIZATION_TOL:
                raise InvalidDistributionError(f"{name}(1) = {sum(poly.coeffs)!r}, expected 1")

    @classmethod
    def regular(cls, d_v: int, d_c: int) -> "EdgePerspective":
        if d_v < 1 or d_c < 1:
            raise InvalidParameterError("degrees must be positive")
        return cls(Polynomial.monomial(d_v - 1), Polynomial.monomial(d_c - 1))

    @classmethod
    def from_degrees(cls, lam: Mapping[int, float], rho: Mapping[int, float]) -> "EdgePerspective":
        """Build from ``{degree: edge fraction}`` maps (renormalised)."""
        lam_poly = Polynomial.from_terms({d - 1: f for d, f in lam.items()}).normalized()
        rho_poly = Polynomial.from_terms({d - 1: f for d, f in rho.items()}).normalized()
        return cls(lam_poly, rho_poly)

    def variable_degrees(self) -> dict[int, float]:
        return {i + 1: c for i, c in self.lambda_edge.terms().items()}

    def check_degrees(self) -> dict[int, float]:
        return {i + 1: c for i, c in self.rho_edge.terms().items()}

    @property
    def max_variable_degree(self) -> int:
        return self.lambda_edge.degree + 1

    @property
    def max_check_degree(self) -> int:
        return self.rho_edge.degree + 1

    def regular_degrees(self) -> tuple[int, int] | None:
        """``(d_v, d_c)`` when both sides are point masses, else ``None``."""
        lam, rho = self.lambda_edge.terms(), self.rho_edge.terms()
        if len(lam) == 1 and len(rho) == 1:
            return next(iter(lam)) + 1, next(iter(rho)) + 1
        return None


def node_to_edge(node: NodePerspective) -> EdgePerspective:
    """Convert node counts to edge fractions: ``lam = Lambda'/Lambda'(1)``."""
    lam = node.lambda_node.derivative()
    rho = node.p_node.derivative()
    if sum(lam.coeffs) == 0 or sum(rho.coeffs) == 0:
        raise InvalidDistributionError("distribution has no edges")
    return EdgePerspective(lam.normalized(), rho.normalized())


def edge_to_node(n: int, ep: EdgePerspective) -> NodePerspective:
    """Integral node counts for ``n`` variable nodes.

    Counts are rounded to the nearest integer.  Any socket imbalance left by
    rounding is absorbed on the check side: checks of the highest degree are
    added or removed and the remainder goes to a single check of smaller
    degree, so the variable side (and therefore ``n``) is never altered.
    """
    if n < 1:
        raise InvalidParameterError("n must be at least 1")
    int_lam = ep.lambda_edge.integral01()
    var_counts = {i + 1: n * (c / (i + 1)) / int_lam for i, c in ep.lambda_edge.terms().items()}
    chk_counts = {i + 1: n * (c / (i + 1)) / int_lam for i, c in ep.rho_edge.terms().items()}
    var_int = {d: int(round(v)) for d, v in var_counts.items()}
    chk_int = {d: int(round(v)) for d, v in chk_counts.items()}
    if sum(var_int.values()) != n:
        # rounding may change the node total; fix it on the most populous degree
        top = max(var_int, key=lambda d: var_counts[d])
        var_int[top] += n - sum(var_int.values())
    var_edges = sum(d * c for d, c in var_int.items())
    chk_edges = sum(d * c for d, c in chk_int.items())
    delta = var_edges - chk_edges
    if delta:
        d_top = max(chk_int)
        if delta > 0:
            q, r = divmod(delta, d_top)
            chk_int[d_top] += q
        else:
            q = -(delta // d_top)  # ceil(|delta| / d_top)
            q = min(q, chk_int[d_top])
            chk_int[d_top] -= q
            r = q * d_top + delta
            if r < 0:
                raise InvalidDistributionError("cannot balance sockets for this n")
        if r:
            chk_int[r] = chk_int.get(r, 0) + 1
    lam_node = Polynomial.from_terms({d: float(c) for d, c in var_int.items() if c})
    p_node = Polynomial.from_terms({d: float(c) for d, c in chk_int.items() if c})
    return NodePerspective(lam_node, p_node)


def designed_rate(ep: EdgePerspective) -> float:
    """``1 - int(rho) / int(lam)``."""
    return 1.0 - ep.rho_edge.integral01() / ep.lambda_edge.integral01()


def harmonic_number(m: int) -> float:
    return float(sum(1.0 / i for i in range(1, m + 1)))


def tornado_theta(N: int, alpha: float) -> float:
    return harmonic_number(N - 1) / alpha


def truncated_lambda_hat(kind: str, N: int, theta: float) -> Polynomial:
    """First ``N`` Taylor terms (through ``x**(N-1)``) of the unnormalised ``lam``.

    ``kind`` is ``"tornado"`` for ``-ln(1-x)/theta`` or ``"check"`` for
    ``1-(1-x)**theta``.
    """
    if N < 2:
        raise InvalidParameterError("N must be at least 2")
    coeffs = [0.0] * N
    if kind == "tornado":
        for i in range(1, N):
            coeffs[i] = 1.0 / (i * theta)
    elif kind == "check":
        c = theta  # binom(theta, 1)
        for i in range(1, N):
            coeffs[i] = c
            c = c * (i - theta) / (i + 1)
    else:
        raise InvalidParameterError(f"unknown recipe {kind!r}")
    return Polynomial(tuple(coeffs))


def tornado_rho(theta: float, tail_mass: float = TORNADO_TAIL_MASS) -> Polynomial:
    """Truncated, renormalised Taylor series of ``exp(theta*(x-1))``."""
    top = int(poisson.isf(tail_mass, theta)) + 1
    while poisson.sf(top, theta) >= tail_mass:
        top += 1
    i = np.arange(top + 1)
    coeffs = poisson.pmf(i, theta)
    return Polynomial(tuple(coeffs)).normalized()


def tornado_pair(N: int, alpha: float) -> EdgePerspective:
    """Heavy-tail Poisson pair whose erasure threshold is at least ``alpha``."""
    if N < 2:
        raise InvalidParameterError("N must be at least 2")
    if not 0 < alpha < 1:
        raise InvalidParameterError("alpha must lie in (0, 1)")
    theta = tornado_theta(N, alpha)
    lam = truncated_lambda_hat("tornado", N, theta).normalized()
    return EdgePerspective(lam, tornado_rho(theta))


def check_concentrated_pair(N: int, theta: float) -> EdgePerspective:
    """Check-concentrated pair: truncated ``1-(1-x)**theta`` and ``rho = x**(1/theta)``."""
    inv = 1.0 / theta if theta > 0 else math.inf
    if not math.isfinite(inv) or abs(inv - round(inv)) > 1e-9 or round(inv) < 1:
        raise InvalidParameterError(f"1/theta must be a positive integer, got theta={theta}")
    lam_hat = truncated_lambda_hat("check", N, theta)
    return EdgePerspective(lam_hat.normalized(), Polynomial.monomial(int(round(inv))))


def check_concentrated_parameters(alpha: float, epsilon: float) -> tuple[int, float]:
    """``(N, theta)`` with ``N ~ 1/epsilon`` and ``1/theta = ceil(ln N / -ln(1-alpha))``."""
    N = max(2, int(math.ceil(1.0 / epsilon)))
    inv = max(1, int(math.ceil(math.log(N) / -math.log1p(-alpha))))
    return N, 1.0 / inv


def recipe_lower_bound(kind: str, N: int, theta: float) -> float:
    """Threshold lower bound ``lam_hat^(N)(1)`` of a truncated recipe."""
    return float(sum(truncated_lambda_hat(kind, N, theta).coeffs))


def tornado_series(theta: float) -> tuple[Callable, Callable]:
    """Untruncated ``(lam_hat, rho)`` of the Tornado recipe as callables."""
    return (lambda x: -np.log1p(-np.asarray(x, dtype=float)) / theta,
            lambda x: np.exp(theta * (np.asarray(x, dtype=float) - 1.0)))


def check_concentrated_series(theta: float) -> tuple[Callable, Callable]:
    """Untruncated ``(lam_hat, rho)`` of the check-concentrated recipe."""
    power = int(round(1.0 / theta))
    return (lambda x: 1.0 - (1.0 - np.asarray(x, dtype=float)) ** theta,
            lambda x: np.asarray(x, dtype=float) ** power)


PolyLike = Union[Polynomial, Callable]


def recipe_residual(lam_hat: PolyLike, rho: PolyLike, x):
    """``lam_hat(1 - rho(1 - x)) - x``; zero for an exact recipe, <= 0 once truncated."""
    x = np.asarray(x, dtype=float)
    out = lam_hat(1.0 - rho(1.0 - x)) - x
    return float(out) if out.ndim == 0 else out


def gallager_rate_bound(p: float, d_c: int) -> float:
    """Upper bound ``1 - H(p)/H(p_dc)`` on the rate of LDPC codes with check degree ``d_c``."""
    if not 0 < p < 0.5:
        raise InvalidParameterError("p must lie in (0, 1/2)")
    if d_c < 2:
        raise InvalidParameterError("d_c must be at least 2")
    p_dc = (1.0 + (1.0 - 2.0 * p) ** d_c) / 2.0
    return 1.0 - binary_entropy(p) / binary_entropy(min(p_dc, 1.0 - p_dc))


# ---------------------------------------------------------------- serialisation

def to_json_dict(dist: Union[EdgePerspective, NodePerspective]) -> dict:
    if isinstance(dist, EdgePerspective):
        return {"perspective": "edge",
                "lambda": list(dist.lambda_edge.coeffs),
                "rho": list(dist.rho_edge.coeffs)}
    return {"perspective": "node",
            "lambda": list(dist.lambda_node.coeffs),
            "rho": list(dist.p_node.coeffs)}


def from_json_dict(data: Mapping) -> Union[EdgePerspective, NodePerspective]:
    try:
        lam = Polynomial(tuple(data["lambda"]))
        rho = Polynomial(tuple(data["rho"]))
    except (KeyError, TypeError) as exc:
        raise InvalidDistributionError(f"malformed distribution: {exc}") from None
    kind = data.get("perspective", "edge")
    if kind == "edge":
        return EdgePerspective(lam, rho)
    if kind == "node":
        return NodePerspective(lam, rho)
    raise InvalidDistributionError(f"unknown perspective {kind!r}")


def dumps(dist) -> str:
    return json.dumps(to_json_dict(dist))


def loads(text: str):
    return from_json_dict(json.loads(text))


def load(path) -> Union[EdgePerspective, NodePerspective]:
    with open(path) as fh:
        return from_json_dict(json.load(fh))


def save(dist, path) -> None:
    with open(path, "w") as fh:
        json.dump(to_json_dict(dist), fh, indent=2)


def as_edge_perspective(dist: Union[EdgePerspective, NodePerspective]) -> EdgePerspective:
    return dist if isinstance(dist, EdgePerspective) else node_to_edge(dist)
