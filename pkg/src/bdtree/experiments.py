"""Seeded batch experiments: configuration, trial execution, summaries and
CSV/JSON output.

Trial ``i`` uses seed ``base_seed + i`` (mod 2**64); every random choice in a
trial derives from that seed, so records do not depend on scheduling.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .builders import (greedy_levels, greedy_tree, lightest_incident_edge, meta_depth_for,
                       prim_mst, sliced_and_spliced)
from .errors import ConfigError, ConstructionError, DomainError
from .exact import (DenseInstance, OrderStatSpec, exact_bounded_depth_tree, exact_expected_W,
                    sample_W, tree_lower_bound)
from .graph_model import BASE_STREAM, MASK64, Distribution, EdgeOracle, aux_rng
from .level_sequences import (CostParams, f_cost, minimize_truncated_cost, optimal_level_sequence,
                              predicted_weight_depth, predicted_weight_diam_odd, small_jumps)
from .trees import heavy_edge_count

ZETA3 = 1.2020569031595942

MODES = ("greedy-depth", "greedy-diam-even", "greedy-diam-odd", "mst", "slice-splice",
         "exact-small", "wbp-tail", "lowerbound-dp")

CSV_HEADER = ["trial", "seed", "mode", "n", "m", "k", "weight", "predicted", "ratio",
              "depth", "diameter", "heavy_edges", "elapsed_s"]

HEAVY_EPS = 0.1


@dataclass
class ExperimentConfig:
    mode: str
    n: int
    m: int | None = None
    k: int | None = None
    diam: int | None = None
    delta_levels: int | None = None
    epsilon: float | str = "auto"
    delta: float | None = None
    dist: str = "exp"
    trials: int = 1
    base_seed: int = 0
    workers: int = 1
    record_timing: bool = True

    def __post_init__(self):
        if self.m is None:
            self.m = self.n

    @property
    def distribution(self) -> Distribution:
        return Distribution.parse(self.dist)

    @property
    def depth(self) -> int | None:
        """Depth of the rooted tree the mode builds."""
        if self.k is not None:
            return self.k
        if self.diam is not None:
            return self.diam // 2
        return None

    def violations(self) -> list[str]:
        out = []
        if self.mode not in MODES:
            out.append(f"mode must be one of {', '.join(MODES)}; got {self.mode!r}")
            return out
        if not isinstance(self.n, int) or self.n < 2:
            out.append(f"n must be an integer >= 2, got {self.n!r}")
        if not isinstance(self.m, int) or self.m < 1 or (isinstance(self.n, int) and self.m > self.n):
            out.append(f"m must satisfy 1 <= m <= n, got m={self.m!r}")
        if not isinstance(self.trials, int) or self.trials < 1:
            out.append(f"trials must be >= 1, got {self.trials!r}")
        if self.workers < 1:
            out.append(f"workers must be >= 1, got {self.workers}")
        try:
            self.distribution
        except DomainError as e:
            out.append(str(e))
        mode = self.mode
        if mode in ("greedy-depth", "exact-small", "lowerbound-dp"):
            if self.k is None or self.k < 1:
                out.append(f"{mode} needs k >= 1")
        if mode == "greedy-diam-even":
            d = self.diam if self.diam is not None else (2 * self.k if self.k else None)
            if d is None or d < 2 or d % 2:
                out.append("greedy-diam-even needs an even diameter >= 2 (or k)")
        if mode == "greedy-diam-odd":
            d = self.diam if self.diam is not None else (2 * self.k + 1 if self.k else None)
            if d is None or d < 3 or d % 2 == 0:
                out.append("greedy-diam-odd needs an odd diameter >= 3 (or k)")
        if mode == "slice-splice":
            if self.delta_levels is None or self.delta_levels < 2:
                out.append("slice-splice needs delta_levels >= 2")
            if self.epsilon != "auto":
                try:
                    e = float(self.epsilon)
                    if not (0 < e <= 0.5):
                        out.append(f"epsilon must lie in (0, 1/2], got {e}")
                except (TypeError, ValueError):
                    out.append(f"epsilon must be 'auto' or a number, got {self.epsilon!r}")
        if mode == "exact-small" and isinstance(self.n, int) and self.n > 8:
            out.append(f"exact-small supports n <= 8, got {self.n}")
        if mode == "lowerbound-dp":
            if self.delta is None or not (0 < self.delta <= 1):
                out.append("lowerbound-dp needs delta in (0, 1]")
            if self.k is not None and self.k > 6:
                out.append("lowerbound-dp supports k <= 6")
        if mode in ("greedy-depth", "greedy-diam-even", "greedy-diam-odd") and self.depth is not None:
            if isinstance(self.n, int) and self.depth >= 1 and self.n < 2 + self.depth:
                out.append(f"n = {self.n} is too small for depth {self.depth}")
        return out

    def validate(self) -> ExperimentConfig:
        v = self.violations()
        if v:
            raise ConfigError(v)
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


@dataclass
class TrialRecord:
    trial: int
    seed: int
    mode: str
    n: int
    m: int
    k: int | None
    weight: float
    predicted: float | None = None
    ratio: float | None = None
    depth: int | None = None
    diameter: int | None = None
    heavy_edges: int | None = None
    elapsed_s: float | None = None
    extras: dict = field(default_factory=dict)

    def row(self) -> list[str]:
        return [_fmt(getattr(self, h)) for h in CSV_HEADER]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


def trial_seed(base_seed: int, i: int) -> int:
    return (int(base_seed) + int(i)) & MASK64


def greedy_trial_tree(cfg, seed):
    """Build the greedy tree of one trial; returns ``(tree, predicted, extras)``."""
    n, m = cfg.n, cfg.m
    o = EdgeOracle(n, seed, BASE_STREAM, cfg.distribution)
    terminals = np.arange(m)
    if cfg.mode == "greedy-depth":
        k = cfg.k
        tree = greedy_tree(o, n, terminals, greedy_levels(n, m, k), 0)
        return tree, predicted_weight_depth(n, m, k), {}
    if cfg.mode == "greedy-diam-even":
        k = (cfg.diam // 2) if cfg.diam is not None else cfg.k
        root = int(aux_rng(seed).integers(n))
        tree = greedy_tree(o, n, terminals, greedy_levels(n, m, k), root)
        return tree, predicted_weight_depth(n, m, k), {"root": root}
    k = (cfg.diam - 1) // 2 if cfg.diam is not None else cfg.k
    edge = lightest_incident_edge(o, n, 0)
    tree = greedy_tree(o, n, terminals, greedy_levels(n, m, k, l0=2), edge)
    return tree, predicted_weight_diam_odd(n, m, k), {"root_edge_weight": tree.root_edge_weight}


def _run_trial(cfg: ExperimentConfig, i: int) -> TrialRecord:
    seed = trial_seed(cfg.base_seed, i)
    t0 = time.perf_counter()
    mode = cfg.mode
    tree = None
    extras = {}
    k = cfg.depth
    if mode.startswith("greedy"):
        tree, predicted, extras = greedy_trial_tree(cfg, seed)
        weight = tree.weight
    elif mode == "mst":
        tree = prim_mst(EdgeOracle(cfg.n, seed, BASE_STREAM, cfg.distribution), cfg.n)
        weight = tree.weight
        predicted = ZETA3
    elif mode == "slice-splice":
        md = meta_depth_for(cfg.n)
        k = md + cfg.delta_levels if cfg.k is None else cfg.k
        terms = None if cfg.m == cfg.n else np.arange(cfg.m)
        tree, extras = sliced_and_spliced(seed, cfg.n, terms, k, cfg.delta_levels, cfg.epsilon, md)
        weight = tree.weight
        predicted = ZETA3 if cfg.m == cfg.n else None
    elif mode == "exact-small":
        inst = DenseInstance.from_oracle(EdgeOracle(cfg.n, seed, BASE_STREAM, cfg.distribution), range(cfg.m))
        tree = exact_bounded_depth_tree(inst, cfg.k, 0)
        weight = tree.weight
        predicted = None
        g = greedy_tree(inst, cfg.n, inst.terminals, greedy_levels(cfg.n, cfg.m, cfg.k), 0)
        extras = {"greedy_weight": g.weight, "lower_bound": tree_lower_bound(tree, inst)}
    elif mode == "wbp-tail":
        spec = OrderStatSpec(cfg.m, cfg.n)
        weight = sample_W(spec, aux_rng(seed))
        predicted = exact_expected_W(spec)
        k = None
    elif mode == "lowerbound-dp":
        p = CostParams(cfg.n, cfg.m, delta=cfg.delta)
        seq, weight = minimize_truncated_cost(p, cfg.k, 40)
        predicted = f_cost(p, optimal_level_sequence(p, cfg.k))
        extras = {"sequence": list(seq.sizes), "small_jumps": small_jumps(p, seq)}
    else:  # pragma: no cover - guarded by validate
        raise ConfigError([f"unknown mode {mode}"])
    elapsed = time.perf_counter() - t0 if cfg.record_timing else None
    ratio = weight / predicted if predicted else None
    rec = TrialRecord(i, seed, mode, cfg.n, cfg.m, k, float(weight), predicted, ratio,
                      elapsed_s=elapsed, extras=extras)
    if tree is not None:
        rec.depth = tree.depth
        rec.diameter = tree.diameter
        rec.heavy_edges = heavy_edge_count(tree, HEAVY_EPS)
    return rec


def run_experiment(cfg: ExperimentConfig, trial_indices=None) -> list[TrialRecord]:
    """Run all trials (or ``trial_indices``) and return records sorted by index."""
    cfg.validate()
    idx = list(range(cfg.trials)) if trial_indices is None else list(trial_indices)

    def one(i):
        try:
            return _run_trial(cfg, i)
        except (ConfigError, ConstructionError):
            raise
        except Exception as e:
            raise ConstructionError(f"trial {i} (seed {trial_seed(cfg.base_seed, i)}) failed: {e}") from e

    if cfg.workers > 1 and len(idx) > 1:
        with ThreadPoolExecutor(cfg.workers) as ex:
            recs = list(ex.map(one, idx))
    else:
        recs = [one(i) for i in idx]
    return sorted(recs, key=lambda r: r.trial)


def summarize(records) -> dict:
    if not records:
        raise DomainError("cannot summarize an empty record list")
    w = np.asarray([r.weight for r in records], dtype=np.float64)
    out = {
        "trials": len(records),
        "mean": math.fsum(w.tolist()) / w.size,
        "std": float(np.std(w, ddof=1)) if w.size > 1 else 0.0,
        "min": float(w.min()),
        "max": float(w.max()),
    }
    ratios = [r.ratio for r in records if r.ratio is not None]
    preds = [r.predicted for r in records if r.predicted is not None]
    out["predicted"] = preds[0] if preds and all(p == preds[0] for p in preds) else None
    out["mean_ratio"] = math.fsum(ratios) / len(ratios) if ratios else None
    heavy = [r.heavy_edges for r in records if r.heavy_edges is not None]
    out["heavy_edges_total"] = sum(heavy) if heavy else None
    out["heavy_edges_max"] = max(heavy) if heavy else None
    return out


def records_to_csv(records) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(CSV_HEADER)
    for r in records:
        wr.writerow(r.row())
    return buf.getvalue()


def _parse(val: str, kind):
    if val == "":
        return None
    return kind(val)


def records_from_csv(text: str) -> list[TrialRecord]:
    rd = csv.reader(io.StringIO(text))
    head = next(rd)
    if head != CSV_HEADER:
        raise DomainError(f"unexpected CSV header {head}")
    out = []
    for row in rd:
        d = dict(zip(head, row))
        out.append(TrialRecord(
            trial=int(d["trial"]), seed=int(d["seed"]), mode=d["mode"], n=int(d["n"]), m=int(d["m"]),
            k=_parse(d["k"], int), weight=float(d["weight"]), predicted=_parse(d["predicted"], float),
            ratio=_parse(d["ratio"], float), depth=_parse(d["depth"], int),
            diameter=_parse(d["diameter"], int), heavy_edges=_parse(d["heavy_edges"], int),
            elapsed_s=_parse(d["elapsed_s"], float)))
    return out


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def records_to_json(records, summary=None, cfg: ExperimentConfig | None = None) -> str:
    doc = {
        "config": cfg.to_dict() if cfg is not None else None,
        "summary": summary,
        "records": [asdict(r) for r in records],
    }
    return json.dumps(_jsonable(doc), indent=2, sort_keys=False) + "\n"


def records_from_json(text: str):
    doc = json.loads(text)
    recs = [TrialRecord(**r) for r in doc["records"]]
    cfg = ExperimentConfig.from_dict(doc["config"]) if doc.get("config") else None
    return recs, doc.get("summary"), cfg


def emit(records, summary, fmt: str = "csv", path=None, cfg: ExperimentConfig | None = None) -> str:
    """Render records as CSV or JSON; write to ``path`` when given."""
    if fmt == "csv":
        text = records_to_csv(records)
    elif fmt == "json":
        text = records_to_json(records, summary, cfg)
    else:
        raise DomainError(f"format must be csv or json, got {fmt!r}")
    if path is not None:
        try:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        except OSError as e:
            raise OSError(f"cannot write {path}: {e}") from e
    return text
