"""Acceptance suite: each check runs at its stated size and tolerance and
returns a :class:`CheckResult`. Used by ``bdtree accept`` and the test suite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .builders import greedy_levels, greedy_tree, meta_depth_for, prim_mst, sliced_and_spliced
from .errors import ConstructionError
from .exact import (DenseInstance, OrderStatSpec, approx_expected_W, binomial_se, empirical_exponent,
                    exact_bounded_depth_tree, exact_bounded_diameter_tree, exact_expected_W,
                    sample_W, tail_bound, tree_lower_bound)
from .experiments import ZETA3, ExperimentConfig, records_to_csv, run_experiment, summarize
from .graph_model import aux_rng, split_weights
from .level_sequences import (CostParams, f_cost, minimize_truncated_cost, optimal_level_sequence,
                              predicted_weight_depth, predicted_weight_diam_odd, small_jumps)


@dataclass
class CheckResult:
    cid: int
    title: str
    passed: bool
    detail: str
    data: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.cid:>2} {self.title}: {self.detail}"


def _mean_weight(cfg):
    return summarize(run_experiment(cfg))["mean"]


def check_1(seed=0, workers=1):
    devs, parts, ok = [], [], True
    for n in (1_000, 10_000, 100_000):
        mean = _mean_weight(ExperimentConfig("greedy-depth", n, n, k=2, trials=30, base_seed=seed,
                                             workers=workers))
        target = 1.5 * n ** (1 / 3)
        r = mean / target
        devs.append(abs(r - 1))
        ok &= abs(r - 1) <= 0.08
        parts.append(f"n={n} ratio={r:.4f}")
    mono = devs[0] > devs[1] > devs[2]
    return CheckResult(1, "greedy depth-2 spanning vs 1.5 n^(1/3)", ok and mono,
                       ", ".join(parts) + f", deviation shrinking={mono}", {"deviations": devs})


def check_2(seed=0, workers=1):
    n, m = 100_000, 25_000
    mean = _mean_weight(ExperimentConfig("greedy-depth", n, m, k=2, trials=30, base_seed=seed, workers=workers))
    pred = predicted_weight_depth(n, m, 2)
    r = mean / pred
    return CheckResult(2, "greedy depth-2 Steiner m=n/4", abs(r - 1) <= 0.08,
                       f"mean={mean:.4f} predicted={pred:.4f} ratio={r:.4f} (tol 8%)")


def check_3(seed=0, workers=1):
    n = 100_000
    mean = _mean_weight(ExperimentConfig("greedy-depth", n, n, k=3, trials=30, base_seed=seed, workers=workers))
    pred = predicted_weight_depth(n, n, 3)
    r = mean / pred
    return CheckResult(3, "greedy depth-3 spanning", abs(r - 1) <= 0.15,
                       f"mean={mean:.4f} predicted={pred:.4f} ratio={r:.4f} (tol 15%)")


def check_4(seed=0, workers=1):
    worst = 0.0
    for k in range(1, 7):
        for n, m in ((1_000, 1_000), (10**5, 2.5e4), (10**6, 10**6), (50, 7)):
            q = predicted_weight_depth(n, m, k) / predicted_weight_diam_odd(n, m, k)
            worst = max(worst, abs(q / 2 ** (1 / (2**k - 1)) - 1))
    ident = worst <= 1e-12
    n = 10_000
    even = _mean_weight(ExperimentConfig("greedy-diam-even", n, n, diam=4, trials=30, base_seed=seed,
                                         workers=workers))
    odd = _mean_weight(ExperimentConfig("greedy-diam-odd", n, n, diam=5, trials=30, base_seed=seed,
                                        workers=workers))
    r = odd / even
    emp = 0.72 <= r <= 0.87
    return CheckResult(4, "odd/even diameter factor", ident and emp,
                       f"identity max rel err={worst:.2e}, odd/even mean ratio={r:.4f} in [0.72, 0.87]={emp}")


def check_5(seed=0, workers=1):
    mean = _mean_weight(ExperimentConfig("mst", 4000, trials=20, base_seed=seed, workers=workers))
    r = mean / ZETA3
    return CheckResult(5, "random MST weight vs zeta(3)", abs(r - 1) <= 0.03,
                       f"mean={mean:.5f} ratio={r:.4f} (tol 3%)")


def check_6(seed=0, workers=1):
    rng = aux_rng(seed)
    spec = OrderStatSpec(100, 1000)
    trials = 100_000
    thr = 0.5 * exact_expected_W(spec)
    w = sample_W(spec, rng, size=trials)
    frac = float(np.count_nonzero(w < thr)) / trials
    bound = tail_bound(100, 0.5)
    lim = bound + 3 * binomial_se(bound, trials)
    tail_ok = frac <= lim
    spec2 = OrderStatSpec(10, 100)
    mean = float(np.mean(sample_W(spec2, rng, size=1_000_000)))
    ex = exact_expected_W(spec2)
    mean_ok = abs(mean / ex - 1) <= 0.005
    expo = empirical_exponent(frac, 100, 0.5)
    shown = "none observed" if expo is None else f"{expo:.3f}"
    return CheckResult(6, "order-statistic concentration", tail_ok and mean_ok,
                       f"tail={frac:.5f} <= {lim:.5f}: {tail_ok}; mean={mean:.5f} vs {ex:.5f}: {mean_ok}; "
                       f"empirical exponent {shown} (bound uses 0.125)", {"exponent": expo})


def check_7(seed=0, workers=1):
    rng = aux_rng(seed + 7)
    bad = []
    for _ in range(200):
        p = int(rng.integers(1, 10_001))
        b = int(rng.integers(1, p + 1))
        s = OrderStatSpec(b, p)
        a, e = approx_expected_W(s), exact_expected_W(s)
        if not (b * b / (2 * p) <= a <= b * b / p and a <= e <= b / p + a):
            bad.append((b, p))
    return CheckResult(7, "expectation sandwich", not bad, f"200 (b, p) pairs, violations={bad[:5]}")


def check_8(seed=0, workers=1, instances=200):
    rng = aux_rng(seed + 8)
    viol = {"depth_monotone": 0, "diam_vs_rooted": 0, "greedy_ge_exact": 0, "bound_le_exact": 0}
    for _ in range(instances):
        n = int(rng.integers(4, 9))
        inst = DenseInstance.random(n, rng)
        prev = math.inf
        exact = {}
        for k in range(1, n):
            t = exact_bounded_depth_tree(inst, k, 0)
            exact[k] = t
            if t.weight > prev:
                viol["depth_monotone"] += 1
            prev = t.weight
            if tree_lower_bound(t, inst) > t.weight:
                viol["bound_le_exact"] += 1
        for k in range(1, min(3, n - 1) + 1):
            d = exact_bounded_diameter_tree(inst, 2 * k).weight
            for r in range(n):
                if d > exact_bounded_depth_tree(inst, k, r).weight:
                    viol["diam_vs_rooted"] += 1
            g = greedy_tree(inst, n, range(n), greedy_levels(n, n, k), 0)
            if g.weight < exact[k].weight:
                viol["greedy_ge_exact"] += 1
    ok = not any(viol.values())
    return CheckResult(8, "exact-oracle properties", ok, f"{instances} instances, violations={viol}")


def check_9(seed=0, workers=1, n=30_000, trials=20):
    md = meta_depth_for(n)
    res = {}
    depth_ok = True
    below_mst = True
    for delta in (4, 16):
        ws = []
        for i in range(trials):
            s = seed + i
            try:
                tree, diag = sliced_and_spliced(s, n, None, md + delta, delta, "auto", md)
            except ConstructionError:
                depth_ok = False
                continue
            depth_ok &= tree.depth <= md + delta
            mst = prim_mst(split_weights(s, n, diag["epsilon"]), n).weight
            below_mst &= tree.weight >= mst
            ws.append(tree.weight)
        res[delta] = float(np.mean(ws)) if ws else math.inf
    dec = res[16] < res[4]
    cap = res[16] <= 1.6
    ok = depth_ok and dec and cap and below_mst
    return CheckResult(9, "slice-and-splice", ok,
                       f"(a) depth<={md}+delta: {depth_ok}; (b) mean16={res[16]:.4f} < mean4={res[4]:.4f}: {dec}; "
                       f"(c) mean16<=1.6: {cap}; (d) >= combined MST: {below_mst}", {"means": res})


def check_10(seed=0, workers=1):
    n = 10**6
    parts, ok = [], True
    for k in (2, 3):
        p = CostParams(n, n, delta=0.1)
        closed = f_cost(p, optimal_level_sequence(p, k))
        seq, val = minimize_truncated_cost(p, k, 40)
        sj = small_jumps(p, seq)
        good = abs(val / closed - 1) <= 0.05 and not sj
        ok &= good
        parts.append(f"k={k}: min={val:.4g} closed-form f={closed:.4g} small jumps at {sj}")
    return CheckResult(10, "truncated-cost optimum has no small jumps", ok, "; ".join(parts))


def check_11(seed=0, workers=1):
    n = 10_000
    recs = run_experiment(ExperimentConfig("greedy-depth", n, n, k=2, dist="uniform", trials=30,
                                           base_seed=seed, workers=workers))
    s = summarize(recs)
    r = s["mean"] / predicted_weight_depth(n, n, 2)
    heavy = s["heavy_edges_max"]
    ok = abs(r - 1) <= 0.08 and heavy == 0
    return CheckResult(11, "uniform weights", ok, f"ratio={r:.4f} (tol 8%), max heavy edges={heavy}")


def determinism_configs(seed=0):
    return [
        ExperimentConfig("greedy-depth", 10_000, k=2, trials=30, base_seed=seed, record_timing=False),
        ExperimentConfig("mst", 4000, trials=20, base_seed=seed, record_timing=False),
        ExperimentConfig("greedy-diam-odd", 10_000, diam=5, trials=10, base_seed=seed, record_timing=False),
        ExperimentConfig("slice-splice", 3000, delta_levels=4, trials=5, base_seed=seed, record_timing=False),
    ]


def check_12(seed=0, workers=1):
    same = []
    for cfg in determinism_configs(seed):
        a = records_to_csv(run_experiment(cfg))
        cfg.workers = 2
        b = records_to_csv(run_experiment(cfg))
        same.append(a == b)
    return CheckResult(12, "byte-identical CSV on rerun", all(same), f"configs identical: {same}")


CHECKS = {i: globals()[f"check_{i}"] for i in range(1, 13)}


def run_checks(ids=None, seed=0, workers=1, echo=print):
    out = []
    for i in ids or sorted(CHECKS):
        res = CHECKS[i](seed=seed, workers=workers)
        if echo:
            echo(res.line())
        out.append(res)
    return out
