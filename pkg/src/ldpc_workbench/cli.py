"""Command-line driver: ``ldpc-workbench <subcommand> ...``.

Exit status is 0 on success and 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict
from typing import Optional, Sequence

import numpy as np

from . import degree_dist as dd
from . import harness
from .channels import BEC, parse_channel, received_from_csv
from .decoders import DECODERS, CutoffSchedule, WeightSchedule, decode, ml_erasure_decode
from .degree_dist import EdgePerspective
from .errors import WorkbenchError
from .factor_graph import FactorGraph, encode_systematic, read_alist, triangularize
from .ira import ira_decode_bec, ira_encode, ira_rate, ira_success_condition, sample_ira
from .channels import transmit


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_json_arg(text: Optional[str]):
    if text is None:
        return None
    if text.startswith("@"):
        with open(text[1:]) as fh:
            return json.load(fh)
    return json.loads(text)


# ------------------------------------------------------------------- commands

def cmd_simulate(args) -> int:
    data = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
    flags = {
        "code": args.code, "n": args.n, "family": args.family,
        "parameters": _floats(args.params) if args.params else None,
        "decoder": args.decoder, "cutoffs": _load_json_arg(args.cutoffs),
        "weights": _load_json_arg(args.weights), "max_iter": args.max_iter,
        "trials": args.trials, "seed": args.seed, "output": args.output,
        "min_errors": args.min_errors, "workers": args.workers,
    }
    data.update({k: v for k, v in flags.items() if v is not None})
    if args.random_codeword:
        data["random_codeword"] = True
    if args.fresh_code:
        data["fresh_code"] = True
    if args.no_early_stop:
        data["min_errors"] = None
    cfg = harness.SimulationConfig.from_dict(data)
    records = harness.run_ber_sweep(cfg)
    text = harness.records_to_jsonl(records) if args.format == "jsonl" else harness.records_to_csv(records)
    _emit(text, cfg.output)
    return 0


def cmd_threshold(args) -> int:
    if args.decoder is None:
        specs = harness.DEFAULT_TABLE
    else:
        weights = tuple(_load_json_arg(args.weights)) if args.weights else None
        specs = [harness.ThresholdSpec(args.decoder, args.code, args.family, weights)]
    _emit(harness.run_threshold_table(specs), args.output)
    return 0


def cmd_concentration(args) -> int:
    rows = harness.run_concentration(args.code, args.alpha, args.samples, tuple(int(x) for x in _floats(args.lengths)),
                                     args.iterations, args.trials, args.seed,
                                     measure_girth=args.girth)
    _emit(harness.concentration_to_csv(rows), args.output)
    return 0


def _ira_distribution(args) -> EdgePerspective:
    if args.dist:
        return dd.as_edge_perspective(dd.load(args.dist))
    lam = {int(k): float(v) for k, v in json.loads(args.lam).items()}
    rho = {int(k): float(v) for k, v in json.loads(args.rho).items()}
    return EdgePerspective.from_degrees(lam, rho)


def cmd_ira(args) -> int:
    ep = _ira_distribution(args)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["alpha", "rate", "satisfied", "margin", "relative_margin", "worst_x",
                "boundary_slack", "k", "trials", "message_ber", "success_rate"])
    for alpha in _floats(args.alpha):
        rep = ira_success_condition(ep, alpha)
        ber = succ = ""
        if args.k:
            errs = ok = 0
            for t in range(args.trials):
                g = sample_ira(args.k, ep, harness.trial_seed(args.seed, 20, t))
                rng = np.random.default_rng(harness.trial_seed(args.seed, 21, t))
                msg = np.where(rng.random(g.k) < 0.5, 1, -1)
                rw = transmit(ira_encode(g, msg), BEC(alpha), harness.trial_seed(args.seed, 22, t))
                res = ira_decode_bec(g, rw, args.max_iter)
                errs += res.bit_errors(msg)
                ok += res.success
            ber = repr(errs / (args.trials * args.k))
            succ = repr(ok / args.trials)
        w.writerow([alpha, repr(ira_rate(ep)), rep.satisfied, repr(rep.margin),
                    repr(rep.relative_margin), repr(rep.worst_x), repr(rep.boundary_slack),
                    args.k or "", args.trials if args.k else "", ber, succ])
    _emit(buf.getvalue(), args.output)
    return 0


def cmd_distributions(args) -> int:
    from .density_evolution import bec_threshold
    if args.kind == "tornado":
        ep = dd.tornado_pair(args.N, args.alpha)
    elif args.kind == "check-concentrated":
        if args.theta is None:
            N, theta = dd.check_concentrated_parameters(args.alpha, args.epsilon)
        else:
            N, theta = args.N, args.theta
        ep = dd.check_concentrated_pair(N, theta)
    elif args.kind == "regular":
        ep = EdgePerspective.regular(args.dv, args.dc)
    else:
        ep = dd.as_edge_perspective(dd.load(args.input))
    out = dd.to_json_dict(dd.edge_to_node(args.n, ep) if args.n else ep)
    out["designed_rate"] = dd.designed_rate(ep)
    out["bec_threshold"] = bec_threshold(ep).value
    _emit(json.dumps(out, indent=2) + "\n", args.output)
    return 0


def cmd_encode(args) -> int:
    h = read_alist(args.alist)
    tf = triangularize(h)
    if args.message:
        bits = [int(c) for c in args.message.strip() if c in "01"]
    else:
        rng = np.random.default_rng(args.seed)
        bits = rng.integers(0, 2, tf.dimension).tolist()
    cw = encode_systematic(tf, bits)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "symbol"])
    for i, s in enumerate(cw.tolist()):
        w.writerow([i, s])
    _emit(buf.getvalue(), args.output)
    return 0


def cmd_decode(args) -> int:
    h = read_alist(args.alist)
    g = FactorGraph.from_parity_check(h)
    with open(args.received) as fh:
        rw = received_from_csv(fh.read())
    if args.decoder == "ml":
        res = ml_erasure_decode(h, rw)
    else:
        max_deg = int(g.var_degrees.max()) if g.n_var else 1
        cut = CutoffSchedule.from_json(args.cutoffs, max_deg) if args.cutoffs else None
        wts = WeightSchedule.from_json(args.weights) if args.weights else None
        res = decode(args.decoder, g, rw, max_iter=args.max_iter, cutoffs=cut, weights=wts)
    buf = io.StringIO()
    buf.write(f"# status={res.status} iterations={res.iterations} residual={res.residual}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "symbol"])
    for i, s in enumerate(res.word.tolist()):
        w.writerow([i, s])
    _emit(buf.getvalue(), args.output)
    return 0


# --------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ldpc-workbench", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="Monte-Carlo BER/WER sweep")
    s.add_argument("--config", help="JSON file with SimulationConfig fields; flags override it")
    s.add_argument("--code", help="regular:DV,DC | dist:FILE.json | alist:FILE")
    s.add_argument("--n", type=int)
    s.add_argument("--family", choices=["bec", "bsc", "biawgn"])
    s.add_argument("--params", help="comma separated channel parameters")
    s.add_argument("--decoder", choices=DECODERS)
    s.add_argument("--cutoffs", help="JSON array (or @file) of per-iteration cutoffs")
    s.add_argument("--weights", help="JSON array (or @file) of per-iteration weights")
    s.add_argument("--max-iter", type=int)
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--min-errors", type=int)
    s.add_argument("--no-early-stop", action="store_true")
    s.add_argument("--workers", type=int)
    s.add_argument("--random-codeword", action="store_true")
    s.add_argument("--fresh-code", action="store_true", help="sample a new code for every trial")
    s.add_argument("--format", choices=["csv", "jsonl"], default="csv")
    s.add_argument("--output")
    s.set_defaults(func=cmd_simulate)

    t = sub.add_parser("threshold", help="threshold table (default rows) or a single threshold")
    t.add_argument("--decoder", choices=["bec", "gal-a", "gal-b", "weighted", "bp"])
    t.add_argument("--code", default="regular:3,6")
    t.add_argument("--family", default="bsc")
    t.add_argument("--weights")
    t.add_argument("--output")
    t.set_defaults(func=cmd_threshold)

    c = sub.add_parser("concentration", help="BER dispersion across sampled codes")
    c.add_argument("--code", default="regular:3,6")
    c.add_argument("--alpha", type=float, default=0.40)
    c.add_argument("--samples", type=int, default=50)
    c.add_argument("--lengths", default="1000,4000")
    c.add_argument("--iterations", type=int, default=5)
    c.add_argument("--trials", type=int, default=20)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--girth", action="store_true", help="also report the minimum girth")
    c.add_argument("--output")
    c.set_defaults(func=cmd_concentration)

    i = sub.add_parser("ira", help="IRA decoding condition and erasure round trips")
    i.add_argument("--dist")
    i.add_argument("--lam", default='{"4": 1}', help='JSON {degree: edge fraction}')
    i.add_argument("--rho", default='{"2": 1}')
    i.add_argument("--alpha", default="0.3")
    i.add_argument("--k", type=int, default=0)
    i.add_argument("--trials", type=int, default=10)
    i.add_argument("--max-iter", type=int, default=200)
    i.add_argument("--seed", type=int, default=0)
    i.add_argument("--output")
    i.set_defaults(func=cmd_ira)

    d = sub.add_parser("distributions", help="build degree distributions")
    d.add_argument("kind", choices=["tornado", "check-concentrated", "regular", "file"])
    d.add_argument("--N", type=int, default=10)
    d.add_argument("--alpha", type=float, default=0.5)
    d.add_argument("--theta", type=float)
    d.add_argument("--epsilon", type=float, default=0.05)
    d.add_argument("--dv", type=int, default=3)
    d.add_argument("--dc", type=int, default=6)
    d.add_argument("--input")
    d.add_argument("--n", type=int, help="emit node counts for n variables")
    d.add_argument("--output")
    d.set_defaults(func=cmd_distributions)

    e = sub.add_parser("encode", help="systematic encoding from an alist matrix")
    e.add_argument("--alist", required=True)
    e.add_argument("--message", help="bit string; random if omitted")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--output")
    e.set_defaults(func=cmd_encode)

    x = sub.add_parser("decode", help="decode a received-word CSV")
    x.add_argument("--alist", required=True)
    x.add_argument("--received", required=True)
    x.add_argument("--decoder", choices=DECODERS + ("ml",), default="bp")
    x.add_argument("--cutoffs")
    x.add_argument("--weights")
    x.add_argument("--max-iter", type=int, default=100)
    x.add_argument("--output")
    x.set_defaults(func=cmd_decode)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (WorkbenchError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
