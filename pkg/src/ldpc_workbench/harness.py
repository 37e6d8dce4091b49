"""Monte-Carlo BER sweeps, threshold tables and concentration experiments."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Optional, Sequence

import numpy as np

from . import degree_dist as dd
from . import density_evolution as de
from .channels import BEC, BIAWGN, hard_quantize, make_channel, transmit
from .decoders import DECODERS, STALL, CutoffSchedule, WeightSchedule, decode
from .degree_dist import EdgePerspective, NodePerspective
from .errors import ConfigurationError, WorkbenchError
from .factor_graph import (FactorGraph, encode_systematic, read_alist, sample_ensemble,
                           to_parity_check, triangularize)

BATCH = 10  # trials per batch; early stopping is only evaluated between batches


# ------------------------------------------------------------------ code specs

def parse_code(spec: str) -> tuple[str, object]:
    """``"regular:3,6"``, ``"dist:path.json"`` or ``"alist:path"``."""
    kind, _, arg = spec.partition(":")
    if kind == "regular":
        try:
            d_v, d_c = (int(t) for t in arg.split(","))
        except ValueError:
            raise ConfigurationError(f"bad regular code spec {spec!r}") from None
        return kind, (d_v, d_c)
    if kind == "dist":
        try:
            return kind, dd.load(arg)
        except (OSError, ValueError, KeyError) as exc:
            raise ConfigurationError(f"cannot load distribution {arg!r}: {exc}") from None
    if kind == "alist":
        try:
            return kind, read_alist(arg)
        except (OSError, ValueError) as exc:
            raise ConfigurationError(f"cannot read alist file {arg!r}: {exc}") from None
    raise ConfigurationError(f"unknown code spec {spec!r}")


def code_node_perspective(spec: str, n: int) -> Optional[NodePerspective]:
    kind, obj = parse_code(spec)
    try:
        if kind == "regular":
            return NodePerspective.regular(n, *obj)
        if kind == "dist":
            if isinstance(obj, NodePerspective):
                return obj
            return dd.edge_to_node(n, obj)
    except WorkbenchError as exc:
        raise ConfigurationError(str(exc)) from None
    return None


def build_code(spec: str, n: int, seed: int) -> FactorGraph:
    kind, obj = parse_code(spec)
    if kind == "alist":
        return FactorGraph.from_parity_check(obj)
    return sample_ensemble(code_node_perspective(spec, n), seed)


def code_edge_perspective(spec: str, n: int = 1000) -> EdgePerspective:
    kind, obj = parse_code(spec)
    if kind == "regular":
        return EdgePerspective.regular(*obj)
    if kind == "dist":
        return dd.as_edge_perspective(obj)
    raise ConfigurationError("density evolution needs a regular or distribution code spec")


# --------------------------------------------------------------- simulation

@dataclass
class SimulationConfig:
    code: str = "regular:3,6"
    n: int = 1000
    family: str = "bec"
    parameters: list = field(default_factory=lambda: [0.4])
    decoder: str = "peel"
    cutoffs: Optional[list] = None
    weights: Optional[list] = None
    max_iter: int = 100
    trials: int = 10
    seed: int = 0
    output: Optional[str] = None
    fresh_code: bool = False
    random_codeword: bool = False
    min_errors: Optional[int] = 100
    workers: int = 1

    def validate(self) -> None:
        if self.trials < 1:
            raise ConfigurationError("trials must be at least 1")
        if self.n < 10:
            raise ConfigurationError("n must be at least 10")
        if self.decoder not in DECODERS:
            raise ConfigurationError(f"unknown decoder {self.decoder!r}; choose from {DECODERS}")
        if not self.parameters:
            raise ConfigurationError("no channel parameters given")
        for p in self.parameters:
            try:
                make_channel(self.family, float(p))
            except WorkbenchError as exc:
                raise ConfigurationError(str(exc)) from None
        if self.decoder in ("peel", "bec-mp") and self.family != "bec":
            raise ConfigurationError(f"decoder {self.decoder} needs the bec family")
        if self.decoder in ("gal-a", "gal-b") and self.family == "bec":
            raise ConfigurationError(f"decoder {self.decoder} needs bsc or biawgn input")
        if self.decoder == "gal-b" and not self.cutoffs:
            raise ConfigurationError("gal-b needs a cutoff schedule")
        if self.max_iter < 0 or self.workers < 1:
            raise ConfigurationError("max_iter must be >= 0 and workers >= 1")
        parse_code(self.code)

    @classmethod
    def from_dict(cls, data: dict) -> "SimulationConfig":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ConfigurationError(f"unknown configuration keys {sorted(extra)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "SimulationConfig":
        try:
            return cls.from_dict(json.loads(text))
        except (json.JSONDecodeError, TypeError) as exc:
            raise ConfigurationError(f"bad configuration: {exc}") from None


@dataclass
class SimulationRecord:
    code: str
    n: int
    family: str
    parameter: float
    decoder: str
    max_iter: int
    seed: int
    trials: int
    bit_errors: int
    ber: float
    wer: float
    mean_iterations: float
    stall_rate: float
    wall_time: float

    def key(self) -> tuple:
        """Everything except the wall time."""
        d = asdict(self)
        d.pop("wall_time")
        return tuple(d.values())


RECORD_FIELDS = [f.name for f in fields(SimulationRecord)]


def records_to_csv(records: Sequence[SimulationRecord]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=RECORD_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in asdict(r).items()})
    return buf.getvalue()


def records_from_csv(text: str) -> list[SimulationRecord]:
    out = []
    types = {f.name: f.type for f in fields(SimulationRecord)}
    for row in csv.DictReader(io.StringIO(text)):
        vals = {}
        for k, v in row.items():
            t = types[k]
            vals[k] = int(v) if t in ("int", int) else float(v) if t in ("float", float) else v
        out.append(SimulationRecord(**vals))
    return out


def records_to_jsonl(records: Sequence[SimulationRecord]) -> str:
    return "".join(json.dumps(asdict(r)) + "\n" for r in records)


def trial_seed(master: int, *path: int) -> int:
    """Independent 63-bit seed for the task at ``path`` under ``master``."""
    state = np.random.SeedSequence([master, *path]).generate_state(1, dtype=np.uint64)
    return int(state[0] >> np.uint64(1))


def _schedules(cfg: SimulationConfig, g: FactorGraph):
    cut = None
    if cfg.cutoffs:
        max_deg = int(g.var_degrees.max())
        cut = CutoffSchedule.from_json(json.dumps(cfg.cutoffs), max_deg)
    w = WeightSchedule(cfg.weights) if cfg.weights else None
    return cut, w


def _one_trial(cfg: SimulationConfig, g: FactorGraph, codeword: np.ndarray, param: float,
               noise_seed: int) -> tuple[int, bool, int, bool]:
    ch = make_channel(cfg.family, param)
    rw = transmit(codeword, ch, noise_seed)
    if cfg.decoder in ("gal-a", "gal-b", "weighted") and isinstance(ch, BIAWGN):
        rw = hard_quantize(rw)
    cut, w = _schedules(cfg, g)
    res = decode(cfg.decoder, g, rw, max_iter=cfg.max_iter, cutoffs=cut, weights=w)
    errs = res.bit_errors(codeword)
    return errs, (errs > 0 or not res.success), res.iterations, res.status == STALL


def _trial_task(args):
    cfg, param_index, param, t, g_cache = args
    g, codeword = _trial_code(cfg, param_index, t, g_cache)
    return _one_trial(cfg, g, codeword, param, trial_seed(cfg.seed, 1, param_index, t))


def _trial_code(cfg: SimulationConfig, param_index: int, t: int, fixed):
    if cfg.fresh_code or fixed is None:
        g = build_code(cfg.code, cfg.n, trial_seed(cfg.seed, 0, param_index, t))
        tf = triangularize(to_parity_check(g)) if cfg.random_codeword else None
    else:
        g, tf = fixed
    if cfg.random_codeword:
        rng = np.random.default_rng(trial_seed(cfg.seed, 2, param_index, t))
        codeword = encode_systematic(tf, rng.integers(0, 2, tf.dimension))
    else:
        codeword = np.ones(g.n_var, dtype=np.int8)
    return g, codeword


def run_ber_sweep(cfg: SimulationConfig) -> list[SimulationRecord]:
    """One record per channel parameter; deterministic given ``cfg.seed``.

    The all-ones codeword is sent unless ``random_codeword`` is set.  A point
    stops early once ``min_errors`` bit errors have been seen (checked every
    ``BATCH`` trials, so the result does not depend on ``workers``).
    """
    cfg.validate()
    fixed = None
    if not cfg.fresh_code:
        g = build_code(cfg.code, cfg.n, trial_seed(cfg.seed, 0))
        fixed = (g, triangularize(to_parity_check(g)) if cfg.random_codeword else None)
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    records = []
    try:
        for pi, param in enumerate(cfg.parameters):
            param = float(param)
            start = time.perf_counter()
            n_bits = fixed[0].n_var if fixed else None
            bit_err = word_err = iters = stalls = done = 0
            while done < cfg.trials:
                batch = range(done, min(done + BATCH, cfg.trials))
                tasks = [(cfg, pi, param, t, fixed) for t in batch]
                results = list(pool.map(_trial_task, tasks)) if pool else [_trial_task(a) for a in tasks]
                for e, we, it, st in results:
                    bit_err += e
                    word_err += we
                    iters += it
                    stalls += st
                done = batch.stop
                if cfg.min_errors is not None and bit_err >= cfg.min_errors:
                    break
            n_bits = n_bits or cfg.n
            records.append(SimulationRecord(
                cfg.code, n_bits, cfg.family, param, cfg.decoder, cfg.max_iter, cfg.seed, done,
                bit_err, bit_err / (done * n_bits), word_err / done, iters / done, stalls / done,
                time.perf_counter() - start))
    finally:
        if pool:
            pool.shutdown()
    return records


# ---------------------------------------------------------------- thresholds

@dataclass(frozen=True)
class ThresholdSpec:
    decoder: str          # bec | gal-a | gal-b | weighted | bp
    code: str             # regular:d_v,d_c or dist:path
    family: str = "bsc"
    weights: Optional[tuple] = None


DEFAULT_TABLE = (
    [ThresholdSpec("gal-a", f"regular:{a},{b}") for a, b in
     ((3, 6), (4, 8), (5, 10), (3, 5), (4, 6), (3, 4))]
    + [ThresholdSpec("bec", f"regular:{a},{b}", "bec") for a, b in ((3, 4), (3, 5), (3, 6))]
)

THRESHOLD_FIELDS = ["decoder", "code", "family", "threshold", "bracket_low", "bracket_high",
                    "tolerance", "iterations", "method"]


def compute_threshold(spec: ThresholdSpec) -> de.ThresholdResult:
    ep = code_edge_perspective(spec.code)
    if spec.decoder == "bec":
        return de.bec_threshold(ep)
    if spec.decoder == "gal-a":
        reg = ep.regular_degrees()
        if reg:
            return de.gallager_a_threshold(*reg)
        return de.quantized_decoder_threshold("gal-a", ep)
    if spec.decoder == "gal-b":
        reg = ep.regular_degrees()
        if reg:
            return de.gallager_b_threshold(*reg)
        return de.quantized_decoder_threshold("gal-b", ep)
    if spec.decoder == "weighted":
        return de.quantized_decoder_threshold("weighted", ep, spec.weights, spec.family)
    if spec.decoder == "bp":
        return de.bp_threshold(spec.family, ep)
    raise ConfigurationError(f"no threshold method for decoder {spec.decoder!r}")


def run_threshold_table(specs: Sequence[ThresholdSpec] = DEFAULT_TABLE) -> str:
    """CSV with one row per spec."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(THRESHOLD_FIELDS)
    for s in specs:
        r = compute_threshold(s)
        w.writerow([s.decoder, s.code, s.family, repr(r.value), repr(r.bracket[0]),
                    repr(r.bracket[1]), r.tolerance, r.iterations_used, r.method])
    return buf.getvalue()


# ------------------------------------------------------------- concentration

@dataclass
class ConcentrationRow:
    n: int
    codes: int
    mean_ber: float
    std_ber: float
    stderr_mean: float
    predicted: float
    girth_min: float
    per_code: list = field(default_factory=list, repr=False)


def predicted_bit_erasure(ep: EdgePerspective, alpha: float, iterations: int) -> float:
    """Erasure probability of the bit decision after ``iterations`` rounds of message passing."""
    x = de.bec_iterate(alpha, ep, max(iterations - 1, 0))[-1]
    y = 1.0 - float(ep.rho_edge(1.0 - x))
    node = {d: f / d for d, f in ep.variable_degrees().items()}
    tot = sum(node.values())
    if iterations == 0:
        return alpha
    return alpha * sum(w / tot * y ** d for d, w in node.items())


def run_concentration(code: str, alpha: float, code_samples: int, lengths=(1000, 4000),
                      iterations: int = 5, trials: int = 20, seed: int = 0,
                      code_seeds: Optional[Sequence[int]] = None,
                      measure_girth: bool = False) -> list[ConcentrationRow]:
    """Per-code BER of erasure message passing stopped after ``iterations`` rounds.

    Each code is sampled from its own seed (``code_seeds`` overrides them);
    the channel noise for trial ``t`` is shared across codes of the same
    length, so identical code seeds give identical results.
    """
    if code_samples < 2:
        raise ConfigurationError("need at least two code samples")
    ep = code_edge_perspective(code)
    rows = []
    for n in lengths:
        bers = []
        girths = []
        for s in range(code_samples):
            cs = code_seeds[s] if code_seeds is not None else trial_seed(seed, 10, n, s)
            g = build_code(code, n, cs)
            if measure_girth:
                from .factor_graph import girth
                girths.append(girth(g))
            cw = np.ones(g.n_var, dtype=np.int8)
            errs = 0
            for t in range(trials):
                rw = transmit(cw, BEC(alpha), trial_seed(seed, 11, n, t))
                res = decode("bec-mp", g, rw, max_iter=iterations)
                errs += res.bit_errors(cw)
            bers.append(errs / (trials * g.n_var))
        arr = np.array(bers)
        rows.append(ConcentrationRow(n, code_samples, float(arr.mean()), float(arr.std(ddof=1)),
                                     float(arr.std(ddof=1) / math.sqrt(code_samples)),
                                     predicted_bit_erasure(ep, alpha, iterations),
                                     float(min(girths)) if girths else math.nan, bers))
    return rows


def concentration_to_csv(rows: Sequence[ConcentrationRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "codes", "mean_ber", "std_ber", "stderr_mean", "predicted", "girth_min"])
    for r in rows:
        w.writerow([r.n, r.codes, repr(r.mean_ber), repr(r.std_ber), repr(r.stderr_mean),
                    repr(r.predicted), r.girth_min])
    return buf.getvalue()


__all__ = [
    "ConcentrationRow", "SimulationConfig", "SimulationRecord", "ThresholdSpec", "DEFAULT_TABLE",
    "build_code", "code_edge_perspective", "compute_threshold", "concentration_to_csv",
    "parse_code", "predicted_bit_erasure", "records_from_csv", "records_to_csv",
    "records_to_jsonl", "run_ber_sweep", "run_concentration", "run_threshold_table", "trial_seed",
]
