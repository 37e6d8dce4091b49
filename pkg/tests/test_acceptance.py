"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line through the ``report`` fixture; the lines
are collected in the terminal summary under "acceptance criteria".
"""

import math
import time

import numpy as np
import pytest

from ldpc_workbench import channels as ch
from ldpc_workbench import decoders as dec
from ldpc_workbench import degree_dist as dd
from ldpc_workbench import density_evolution as de
from ldpc_workbench import factor_graph as fg
from ldpc_workbench import harness, ira
from ldpc_workbench.degree_dist import EdgePerspective

pytestmark = pytest.mark.slow


def _fmt(pairs):
    return ", ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in pairs)


# 1 ---------------------------------------------------------------------------

def test_criterion_01_bec_regular_thresholds(report):
    targets = {(3, 4): 0.6474, (3, 5): 0.5406, (3, 6): 0.4294}
    t0 = time.perf_counter()
    rows = []
    ok = True
    for (dv, dc), want in targets.items():
        scan = de.bec_threshold(EdgePerspective.regular(dv, dc)).value
        closed = de.bec_threshold_regular_closed_form(dv, dc)
        agree = abs(scan - closed) <= 1e-6
        near = abs(scan - want) <= 5e-4
        ok &= agree and near
        rows.append(f"({dv},{dc}) {scan:.6f}/{closed:.6f} vs {want}{'' if near else ' MISS'}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 1.0
    report(1, ok, "; ".join(rows) + f"; {elapsed:.2f}s")
    assert ok


# 2 ---------------------------------------------------------------------------

def test_criterion_02_gallager_a_table(report):
    table = [((3, 6), 0.0395, 1e-3), ((4, 8), 1 / 21, 1e-4), ((5, 10), 1 / 36, 1e-4),
             ((4, 6), 1 / 15, 1e-4), ((3, 4), 0.106, 1e-3), ((3, 5), 0.0612, 1e-3)]
    t0 = time.perf_counter()
    ok = True
    rows = []
    for (dv, dc), want, tol in table:
        got = de.gallager_a_threshold(dv, dc).value
        ok &= abs(got - want) <= tol
        rows.append(f"({dv},{dc}) {got:.6f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 30
    report(2, ok, "; ".join(rows) + f"; {elapsed:.2f}s")
    assert ok


# 3 ---------------------------------------------------------------------------

def test_criterion_03_gallager_b(report):
    targets = {(4, 8): 0.051, (4, 6): 0.074, (5, 10): 0.041}
    t0 = time.perf_counter()
    got = {k: de.gallager_b_threshold(*k).value for k in targets}
    elapsed = time.perf_counter() - t0
    ok = all(abs(got[k] - v) <= 2e-3 for k, v in targets.items()) and elapsed < 120
    report(3, ok, "; ".join(f"{k} {v:.6f}" for k, v in got.items()) + f"; {elapsed:.2f}s")
    assert ok


# 4 ---------------------------------------------------------------------------

def test_criterion_04_weighted_erasure(report):
    t0 = time.perf_counter()
    got = de.quantized_decoder_threshold("weighted", EdgePerspective.regular(3, 6), [2.0, 1.0]).value
    elapsed = time.perf_counter() - t0
    ok = abs(got - 0.07) <= 3e-3 and elapsed < 120
    report(4, ok, f"(3,6) BSC w=[2,1]: {got:.6f} vs 0.07; {elapsed:.2f}s")
    assert ok


# 5 ---------------------------------------------------------------------------

def test_criterion_05_bp_density_evolution(report):
    ep = EdgePerspective.regular(3, 6)
    t0 = time.perf_counter()
    bsc = de.bp_threshold("bsc", ep).value
    awgn = de.bp_threshold("biawgn", ep).value
    bec = de.bp_threshold("bec", ep).value
    elapsed = time.perf_counter() - t0
    ok = (abs(bsc - 0.084) <= 2e-3 and abs(awgn - 0.88) <= 1e-2
          and abs(bec - 0.4294) <= 1e-3 and elapsed < 600)
    report(5, ok, _fmt([("bsc", bsc), ("biawgn", awgn), ("bec", bec)]) + f"; {elapsed:.1f}s")
    assert ok


# 6 ---------------------------------------------------------------------------

def test_criterion_06_ternary_biawgn(report):
    t0 = time.perf_counter()
    got = de.quantized_decoder_threshold("weighted", EdgePerspective.regular(3, 6),
                                         family="ternary-biawgn").value
    elapsed = time.perf_counter() - t0
    ok = got >= 0.72
    within = abs(got - 0.743) <= 1e-2
    report(6, ok, f"sigma*={got:.4f} (>= 0.72); vs 0.743: {'within' if within else 'outside'} 1e-2; "
                  f"{elapsed:.1f}s")
    assert ok


# 7 ---------------------------------------------------------------------------

def test_criterion_07_tornado(report):
    alpha = 0.5
    t0 = time.perf_counter()
    ok = True
    rows = []
    for N in (10, 100):
        ep = dd.tornado_pair(N, alpha)
        thr = de.bec_threshold(ep).value
        rate = dd.designed_rate(ep)
        ok &= thr >= alpha
        rows.append(f"N={N} threshold={thr:.10f} rate={rate:.6f}")
        if N == 100:
            theta = dd.tornado_theta(N, alpha)
            bound = 0.95 * (1 - math.exp(-theta)) * (1 - 1 / N) * alpha
            ok &= rate >= bound
            rows.append(f"rate bound {bound:.6f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 10
    report(7, ok, "; ".join(rows) + f"; {elapsed:.2f}s")
    assert ok


# 8 ---------------------------------------------------------------------------

def _sweep(family, params, decoder, seed):
    cfg = harness.SimulationConfig(code="regular:3,6", n=10_000, family=family, parameters=params,
                                   decoder=decoder, trials=100, seed=seed, min_errors=None,
                                   max_iter=200)
    return [r.ber for r in harness.run_ber_sweep(cfg)]


def test_criterion_08_monte_carlo_separation(report):
    t0 = time.perf_counter()
    bec_lo, bec_hi = _sweep("bec", [0.40, 0.46], "peel", 8)
    gal_lo, gal_hi = _sweep("bsc", [0.03, 0.05], "gal-a", 8)
    elapsed = time.perf_counter() - t0
    ok = bec_lo < 1e-3 and bec_hi > 0.05 and gal_lo < 1e-3 and gal_hi > 0.05 and elapsed < 300
    report(8, ok, _fmt([("bec@0.40", bec_lo), ("bec@0.46", bec_hi), ("galA@0.03", gal_lo),
                        ("galA@0.05", gal_hi)]) + f"; {elapsed:.1f}s")
    assert ok


# 9 ---------------------------------------------------------------------------

def _patterns(n, count, rng):
    if count is None:
        m = np.arange(2 ** n)[:, None]
        return ((m >> np.arange(n)) & 1).astype(bool)
    return rng.random((count, n)) < rng.random((count, 1))


def _brute_posteriors(h, llr):
    n = h.shape[1]
    m = np.arange(2 ** n)[:, None]
    bits = ((m >> np.arange(n)) & 1)
    words = bits[~np.any(bits @ h.T % 2, axis=1)]
    x = 1 - 2 * words
    logw = 0.5 * x @ llr
    w = np.exp(logw - logw.max())
    return np.log((w[:, None] * (x > 0)).sum(0)) - np.log((w[:, None] * (x < 0)).sum(0))


def test_criterion_09_oracle_equivalences(report):
    rng = np.random.default_rng(9)
    # peeling against erasure message passing
    mismatches = 0
    for i in range(1000):
        g = fg.sample_regular(1000, 3, 6, seed=i)
        rw = ch.transmit(np.ones(1000, dtype=np.int8), ch.BEC(rng.uniform(0.3, 0.5)), 10_000 + i)
        a, b = dec.decode_bec_peeling(g, rw), dec.decode_bec_mp(g, rw)
        mismatches += not np.array_equal(a.word, b.word)
    # ML success set contains the peeling success set
    violations = checked = 0
    for n, count in ((8, None), (12, None), (16, None), (20, 20_000), (24, 20_000)):
        h = fg.to_parity_check(fg.sample_regular(n, 3, 6, seed=n))
        g = fg.FactorGraph.from_parity_check(h)
        for erased in _patterns(n, count, rng):
            r = np.where(erased, 0, 1).astype(np.int8)
            rw = ch.ReceivedWord(r, ch.BEC(0.5))
            if dec.decode_bec_peeling(g, rw).success and not dec.ml_erasure_decode(h, rw).success:
                violations += 1
            checked += 1
    # BP marginals against enumeration on tree codes
    worst = 0.0
    trees = 0
    ep = EdgePerspective.from_degrees({2: 0.5, 3: 0.5}, {2: 0.4, 3: 0.6})
    seed = 0
    while trees < 30:
        tree = fg.sample_tree(2, ep, seed)
        seed += 1
        g, _ = fg.tree_to_graph(tree)
        if g.n_var > 20 or g.n_var < 3:
            continue
        llr = rng.normal(1.0, 2.0, g.n_var)
        res = dec.decode_bp(g, ch.LlrWord(llr), max_iter=2 * tree.ell + 2, early_stop=False)
        want = _brute_posteriors(fg.to_parity_check(g).dense().astype(np.int64), llr)
        worst = max(worst, float(np.max(np.abs(res.posterior - want))))
        trees += 1
    ok = mismatches == 0 and violations == 0 and worst <= 1e-9
    report(9, ok, f"peel/mp mismatches={mismatches}/1000; ML-vs-peel violations={violations}/{checked}; "
                  f"BP-vs-enumeration max diff={worst:.2e} over {trees} trees")
    assert ok


# 10 --------------------------------------------------------------------------

def test_criterion_10_symmetry(report):
    rng = np.random.default_rng(10)
    N = 100_000
    bad = {}
    deg = rng.integers(1, 8, N)
    # check maps: flipping one input flips the output
    cnt = 0
    for d in deg:
        m = rng.choice([-1, 0, 1], size=d)
        k = rng.integers(d)
        f = m.copy()
        f[k] = -f[k]
        cnt += dec.hard_check_map(f) != -dec.hard_check_map(m)
    bad["hard-check"] = cnt
    cnt = 0
    for d in deg:
        m = rng.normal(0, 5, d)
        k = rng.integers(d)
        f = m.copy()
        f[k] = -f[k]
        cnt += dec.bp_check_map(f) != -dec.bp_check_map(m)
    bad["bp-check"] = cnt
    # variable maps: flipping every input flips the output
    cnt_a = cnt_w = cnt_bp = cnt_e = 0
    for d in deg:
        r = int(rng.choice([-1, 1]))
        m = rng.choice([-1, 1], size=d - 1)
        b = int(rng.integers(max(d - 1, 1))) + 1
        cnt_a += dec.gallager_variable_map(-r, -m, b) != -dec.gallager_variable_map(r, m, b)
        rt = int(rng.choice([-1, 0, 1]))
        mt = rng.choice([-1, 0, 1], size=d - 1)
        w = float(rng.uniform(0, 3))
        cnt_w += dec.weighted_variable_map(-rt, -mt, w) != -dec.weighted_variable_map(rt, mt, w)
        m0 = float(rng.normal(0, 5))
        ml = rng.normal(0, 5, d - 1)
        cnt_bp += dec.bp_variable_map(-m0, -ml) != -dec.bp_variable_map(m0, ml)
        # erasure map on consistent inputs
        truth = int(rng.choice([-1, 1]))
        re = truth * int(rng.random() < 0.5)
        me = truth * (rng.random(d - 1) < 0.5)
        cnt_e += dec.bec_variable_map(-re, -me) != -dec.bec_variable_map(re, me)
    bad.update({"gallager-var": cnt_a, "weighted-var": cnt_w, "bp-var": cnt_bp, "bec-var": cnt_e})
    # end to end: error positions do not depend on the transmitted codeword
    g = fg.sample_regular(1000, 3, 6, seed=10)
    tf = fg.triangularize(fg.to_parity_check(g))
    cut = dec.CutoffSchedule.constant({3: 2})
    w = dec.WeightSchedule([2.0, 1.0])
    cases = [("peel", ch.BEC(0.45)), ("bec-mp", ch.BEC(0.45)), ("weighted", ch.BEC(0.45)),
             ("bp", ch.BEC(0.45)), ("gal-a", ch.BSC(0.05)), ("gal-b", ch.BSC(0.05)),
             ("weighted", ch.BSC(0.06)), ("bp", ch.BSC(0.08))]
    e2e = 0
    for name, channel in cases:
        for s in range(20):
            cw = fg.encode_systematic(tf, rng.integers(0, 2, tf.dimension))
            a = dec.decode(name, g, ch.transmit(np.ones(1000, dtype=np.int8), channel, s),
                           max_iter=50, cutoffs=cut, weights=w)
            b = dec.decode(name, g, ch.transmit(cw, channel, s), max_iter=50, cutoffs=cut, weights=w)
            e2e += not (np.array_equal(a.word != 1, b.word != cw) and a.status == b.status)
    bad["end-to-end"] = e2e
    ok = not any(bad.values())
    report(10, ok, ", ".join(f"{k}={v}" for k, v in bad.items()) + f" ({N} inputs per map, 160 runs)")
    assert ok


# 11 --------------------------------------------------------------------------

def test_criterion_11_tree_ensemble(report):
    irregular = EdgePerspective.from_degrees({2: 0.3, 3: 0.3, 5: 0.4}, {6: 0.5, 7: 0.5})
    cases = [("(3,6)", EdgePerspective.regular(3, 6), 0.42),
             ("irregular", irregular, 0.9 * de.bec_threshold(irregular).value)]
    worst = 0.0
    rows = []
    for label, ep, alpha in cases:
        xs = de.bec_iterate(alpha, ep, 5)
        for ell in range(1, 6):
            est = de.tree_validate(ep, alpha, ell, 100_000, seed=1000 + ell)
            z = abs(est.frequency - xs[ell]) / est.stderr
            worst = max(worst, z)
        rows.append(f"{label} alpha={alpha:.4f}")
    ok = worst <= 3.0
    report(11, ok, "; ".join(rows) + f"; max |z| = {worst:.2f} over l=1..5")
    assert ok


# 12 --------------------------------------------------------------------------

def test_criterion_12_capacity_constants(report):
    h = ch.binary_entropy(0.11)
    c = ch.biawgn_capacity(0.9787)
    q = ch.q_function(1 / 0.743)
    ok = abs(h - 0.5) <= 1e-3 and abs(c - 0.5) <= 5e-3 and abs(q - 0.089) <= 1e-3
    report(12, ok, _fmt([("H(0.11)", h), ("C(0.9787)", c), ("Q(1/0.743)", q)]))
    assert ok


# 13 --------------------------------------------------------------------------

def test_criterion_13_ira(report):
    # hand example
    g = ira.IraGraph.from_checks(3, [[0, 1], [1, 2], [0, 2]])
    msg = np.array([1, -1, 1])
    cw = ira.ira_encode(g, msg)
    # every check has two information neighbours, so msg and -msg share a codeword;
    # the round trip is codeword -> check values through the inverted accumulator
    v = cw * np.concatenate([[1], cw[:-1]])
    hand = (cw.tolist() == [-1, 1, 1] and v.tolist() == [-1, -1, 1]
            and np.array_equal(v, ira.check_values(g, msg))
            and np.array_equal(ira.ira_encode(g, -msg), cw))
    # erasure-free round trips
    mixed = EdgePerspective.from_degrees({4: 1.0}, {1: 0.3, 2: 0.7})
    trips = 0
    for s in range(100):
        gi = ira.sample_ira(500, mixed, s)
        m = np.where(np.random.default_rng(s).random(gi.k) < 0.5, 1, -1)
        res = ira.ira_decode_bec(gi, ch.ReceivedWord(ira.ira_encode(gi, m), ch.BEC(0.0)))
        trips += res.success and np.array_equal(res.word, m)
    # condition margin against Monte-Carlo for lam = x^3, rho = x
    ep = EdgePerspective.from_degrees({4: 1.0}, {2: 1.0})
    alphas = np.linspace(0.01, 0.6, 60)
    reports = [ira.ira_success_condition(ep, a) for a in alphas]
    good = [a for a, r in zip(alphas, reports) if r.satisfied and r.margin > 0]
    alpha = float(good[len(good) // 2]) if good else 0.1
    errs = 0
    for t in range(20):
        gi = ira.sample_ira(5000, ep, 500 + t)
        m = np.ones(gi.k, dtype=np.int8)
        rw = ch.transmit(ira.ira_encode(gi, m), ch.BEC(alpha), 900 + t)
        errs += ira.ira_decode_bec(gi, rw, 200).bit_errors(m)
    ber = errs / (20 * 5000)
    mc_ok = bool(good) and ber < 1e-3
    ok = hand and trips == 100 and mc_ok
    report(13, ok, f"hand example {'ok' if hand else 'FAILED'}; round trips {trips}/100; "
                   f"x^3/x at alpha={alpha:.3f} (margin>0: {bool(good)}): BER={ber:.3g}")
    assert ok


# 14 --------------------------------------------------------------------------

def test_criterion_14_concentration(report):
    t0 = time.perf_counter()
    rows = harness.run_concentration("regular:3,6", 0.40, 50, (1000, 4000), seed=14)
    elapsed = time.perf_counter() - t0
    small, large = rows
    ok = large.std_ber < small.std_ber
    report(14, ok, f"std n=1000 {small.std_ber:.3e}, n=4000 {large.std_ber:.3e}; "
                   f"mean {small.mean_ber:.4f}/{large.mean_ber:.4f} vs DE {small.predicted:.4f}; "
                   f"{elapsed:.1f}s")
    assert ok
