"""Memoryless binary-input channels, quantisers and capacity formulas.

Symbols use the +/-1 convention (bit 0 -> +1, bit 1 -> -1).  Erasures are
stored as ``0`` in integer received words.  Log-likelihood ratios are natural
logarithms of ``p(+1)/p(-1)``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import integrate, optimize
from scipy.special import ndtr, ndtri

from .errors import InvalidParameterError


@dataclass(frozen=True)
class BEC:
    alpha: float

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise InvalidParameterError(f"erasure probability {self.alpha} outside [0, 1)")

    kind = "bec"

    @property
    def parameter(self) -> float:
        return self.alpha

    def spec(self) -> str:
        return f"bec:{self.alpha!r}"


@dataclass(frozen=True)
class BSC:
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 0.5:
            raise InvalidParameterError(f"crossover probability {self.p} outside [0, 1/2]")

    kind = "bsc"

    @property
    def parameter(self) -> float:
        return self.p

    def spec(self) -> str:
        return f"bsc:{self.p!r}"


@dataclass(frozen=True)
class BIAWGN:
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise InvalidParameterError(f"noise deviation {self.sigma} must be positive")

    kind = "biawgn"

    @property
    def parameter(self) -> float:
        return self.sigma

    def spec(self) -> str:
        return f"biawgn:{self.sigma!r}"


@dataclass(frozen=True)
class TernaryBIAWGN:
    """BIAWGN output quantised to {+1, 0, -1} with dead zone ``(-tau, tau)``."""

    sigma: float
    tau: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise InvalidParameterError("sigma must be positive")
        if self.tau < 0:
            raise InvalidParameterError("tau must be non-negative")

    kind = "ternary"

    @property
    def parameter(self) -> float:
        return self.sigma

    def spec(self) -> str:
        return f"ternary:{self.sigma!r}:{self.tau!r}"

    def probabilities(self) -> tuple[float, float, float]:
        """``(P(+1), P(0), P(-1))`` given that +1 was sent."""
        return ternary_probabilities(self.sigma, self.tau)


ChannelModel = Union[BEC, BSC, BIAWGN, TernaryBIAWGN]
FAMILIES = {"bec": BEC, "bsc": BSC, "biawgn": BIAWGN}


def parse_channel(text: str) -> ChannelModel:
    """Parse ``"bec:0.42"``, ``"bsc:0.084"``, ``"biawgn:0.88"`` or ``"ternary:0.74:0.3"``."""
    parts = text.strip().lower().split(":")
    try:
        if parts[0] == "ternary" and len(parts) == 3:
            return TernaryBIAWGN(float(parts[1]), float(parts[2]))
        if len(parts) != 2 or parts[0] not in FAMILIES:
            raise ValueError
        return FAMILIES[parts[0]](float(parts[1]))
    except ValueError:
        raise InvalidParameterError(f"cannot parse channel specification {text!r}") from None


def make_channel(family: str, parameter: float) -> ChannelModel:
    try:
        return FAMILIES[family](parameter)
    except KeyError:
        raise InvalidParameterError(f"unknown channel family {family!r}") from None


@dataclass(frozen=True)
class ReceivedWord:
    """Channel output paired with the channel that produced it.

    ``symbols`` is int8 over {+1, 0, -1} for discrete channels (0 = erasure)
    and float64 for the BIAWGN.
    """

    symbols: np.ndarray
    channel: ChannelModel

    def __len__(self) -> int:
        return len(self.symbols)

    @property
    def erasures(self) -> np.ndarray:
        if isinstance(self.channel, BIAWGN):
            return np.zeros(len(self.symbols), dtype=bool)
        return self.symbols == 0


@dataclass(frozen=True)
class LlrWord:
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.values)


# ------------------------------------------------------------------ randomness

def symbol_uniforms(seed: int, n: int) -> np.ndarray:
    """One uniform draw per symbol from a counter-based stream keyed by ``seed``.

    Philox is counter based and each symbol consumes exactly one 64-bit word,
    so symbol ``i`` depends only on ``(seed, i)``.
    """
    gen = np.random.Generator(np.random.Philox(seed))
    u = gen.random(n)
    # keep away from 0 so the Gaussian inverse CDF stays finite
    return np.maximum(u, 2.0 ** -60)


def transmit(codeword, ch: ChannelModel, seed: int) -> ReceivedWord:
    """Pass a +/-1 codeword through ``ch``; deterministic given ``seed``."""
    x = np.asarray(codeword)
    if x.size and not np.all((x == 1) | (x == -1)):
        raise InvalidParameterError("codeword entries must be +1 or -1")
    u = symbol_uniforms(seed, len(x))
    if isinstance(ch, BEC):
        out = np.where(u < ch.alpha, 0, x).astype(np.int8)
    elif isinstance(ch, BSC):
        out = np.where(u < ch.p, -x, x).astype(np.int8)
    elif isinstance(ch, BIAWGN):
        out = x.astype(float) + ch.sigma * ndtri(u)
    elif isinstance(ch, TernaryBIAWGN):
        y = x.astype(float) + ch.sigma * ndtri(u)
        return ternary_quantize(ReceivedWord(y, BIAWGN(ch.sigma)), ch.tau)
    else:
        raise InvalidParameterError(f"unsupported channel {ch!r}")
    return ReceivedWord(out, ch)


# -------------------------------------------------------- entropy and capacity

def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def inverse_entropy(y: float) -> float:
    """Unique ``x`` in [0, 1/2] with ``H(x) = y``."""
    if not 0.0 <= y <= 1.0:
        raise InvalidParameterError("entropy value must lie in [0, 1]")
    if y == 0.0:
        return 0.0
    if y == 1.0:
        return 0.5
    return optimize.brentq(lambda x: binary_entropy(x) - y, 0.0, 0.5, xtol=1e-13)


def q_function(x):
    """Gaussian tail probability ``P(Z > x)``."""
    return ndtr(-np.asarray(x, dtype=float)) if np.ndim(x) else float(ndtr(-x))


def biawgn_capacity(sigma: float) -> float:
    """Mutual information of the BIAWGN with uniform inputs, in bits."""
    s2 = sigma * sigma

    def integrand(y):
        # density of y given +1 times log2(1 + exp(-2y/s2))
        return math.exp(-((y - 1.0) ** 2) / (2 * s2)) * np.logaddexp(0.0, -2.0 * y / s2)

    lo, hi = 1.0 - 12.0 * sigma, 1.0 + 12.0 * sigma
    val, _ = integrate.quad(integrand, lo, hi, epsabs=1e-12, epsrel=1e-10, limit=200)
    return 1.0 - val / (math.sqrt(2 * math.pi * s2) * math.log(2.0))


def capacity(ch: ChannelModel) -> float:
    if isinstance(ch, BEC):
        return 1.0 - ch.alpha
    if isinstance(ch, BSC):
        return 1.0 - binary_entropy(ch.p)
    if isinstance(ch, BIAWGN):
        return biawgn_capacity(ch.sigma)
    if isinstance(ch, TernaryBIAWGN):
        pp, pe, pm = ch.probabilities()
        # symmetric erasure/error channel with uniform inputs
        out = 0.0
        for a, b in ((pp, pm), (pm, pp)):
            if a > 0:
                out += a * math.log2(2 * a / (a + b))
        return out
    raise InvalidParameterError(f"unsupported channel {ch!r}")


# ------------------------------------------------------------------ quantisers

def hard_quantize(rw: ReceivedWord) -> ReceivedWord:
    """Sign quantiser (0.0 maps to +1); the result is a BSC(Q(1/sigma)) output."""
    if not isinstance(rw.channel, BIAWGN):
        raise InvalidParameterError("hard quantisation needs a BIAWGN received word")
    out = np.where(np.asarray(rw.symbols) >= 0.0, 1, -1).astype(np.int8)
    return ReceivedWord(out, BSC(float(q_function(1.0 / rw.channel.sigma))))


def ternary_quantize(rw: ReceivedWord, tau: float) -> ReceivedWord:
    """Map ``r >= tau`` to +1, ``r <= -tau`` to -1 and the dead zone to 0."""
    if not isinstance(rw.channel, BIAWGN):
        raise InvalidParameterError("ternary quantisation needs a BIAWGN received word")
    if tau < 0:
        raise InvalidParameterError("tau must be non-negative")
    r = np.asarray(rw.symbols, dtype=float)
    out = np.zeros(len(r), dtype=np.int8)
    out[r >= tau] = 1
    out[r <= -tau] = -1
    return ReceivedWord(out, TernaryBIAWGN(rw.channel.sigma, tau))


def ternary_probabilities(sigma: float, tau: float) -> tuple[float, float, float]:
    p_plus = float(q_function((tau - 1.0) / sigma))
    p_minus = float(q_function((tau + 1.0) / sigma))
    if tau == 0.0:
        return p_plus, 0.0, 1.0 - p_plus
    return p_plus, max(0.0, 1.0 - p_plus - p_minus), p_minus


# ------------------------------------------------------------------------ LLRs

def bsc_llr_magnitude(p: float) -> float:
    if p == 0.0:
        return math.inf
    if p == 0.5:
        return 0.0
    return math.log((1.0 - p) / p)


def initial_llr(rw: ReceivedWord) -> LlrWord:
    ch = rw.channel
    r = np.asarray(rw.symbols)
    if isinstance(ch, BSC):
        mag = bsc_llr_magnitude(ch.p)
        vals = r.astype(float) * mag if math.isfinite(mag) else np.where(r > 0, math.inf, -math.inf)
    elif isinstance(ch, BEC):
        vals = np.where(r > 0, math.inf, np.where(r < 0, -math.inf, 0.0))
    elif isinstance(ch, BIAWGN):
        vals = 2.0 * r.astype(float) / (ch.sigma * ch.sigma)
    elif isinstance(ch, TernaryBIAWGN):
        pp, _, pm = ch.probabilities()
        mag = math.log(pp / pm) if pm > 0 else math.inf
        vals = np.where(r > 0, mag, np.where(r < 0, -mag, 0.0))
    else:
        raise InvalidParameterError(f"unsupported channel {ch!r}")
    return LlrWord(np.asarray(vals, dtype=float))


# ------------------------------------------------------------- serialisation

def received_to_csv(rw: ReceivedWord) -> str:
    """``index,kind,value`` rows; kind is ``bit``, ``erasure`` or ``real``."""
    buf = io.StringIO()
    buf.write(f"# channel={rw.channel.spec()}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["index", "kind", "value"])
    real = isinstance(rw.channel, BIAWGN)
    for i, v in enumerate(np.asarray(rw.symbols).tolist()):
        if real:
            writer.writerow([i, "real", repr(float(v))])
        elif v == 0:
            writer.writerow([i, "erasure", ""])
        else:
            writer.writerow([i, "bit", int(v)])
    return buf.getvalue()


def received_from_csv(text: str) -> ReceivedWord:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# channel="):
        raise InvalidParameterError("missing '# channel=' header")
    ch = parse_channel(lines[0].split("=", 1)[1])
    rows = list(csv.DictReader(lines[1:]))
    if isinstance(ch, BIAWGN):
        vals = np.array([float(r["value"]) for r in rows])
    else:
        vals = np.array([0 if r["kind"] == "erasure" else int(r["value"]) for r in rows],
                        dtype=np.int8)
    return ReceivedWord(vals, ch)
