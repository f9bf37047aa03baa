"""Command-line entry point: ``bdtree <command> [options]``.

Exit codes: 0 success, 1 bad configuration or input, 2 failed check or
construction.
"""
from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError, ConstructionError, DomainError
from .level_sequences import (CostParams, R_threshold, f_cost, f_cost_truncated, integerize,
                              minimize_truncated_cost, optimal_level_sequence, predicted_weight_depth,
                              predicted_weight_diam_odd, small_jumps)

EXIT_OK, EXIT_CONFIG, EXIT_FAIL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # usage errors are configuration errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _common(p, trials=True):
    p.add_argument("--n", type=int, help="number of vertices")
    p.add_argument("--m", type=int, help="number of terminals (default n)")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--k", "--depth", dest="k", type=int, help="depth bound")
    g.add_argument("--diam", type=int, help="diameter bound")
    p.add_argument("--delta-levels", type=int, help="slice diameter bound")
    p.add_argument("--epsilon", default="auto", help="weight split, number in (0, 1/2] or 'auto'")
    p.add_argument("--delta", type=float, help="truncation parameter in (0, 1]")
    p.add_argument("--dist", default="exp", help="edge weights: exp or uniform")
    if trials:
        p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0, help="base seed")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--no-timing", action="store_true", help="leave elapsed_s blank for byte-stable output")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="bdtree", description="Bounded-depth trees in random complete graphs.")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("predict", help="closed-form level sequence and predicted weights")
    _common(p, trials=False)

    p = sub.add_parser("greedy", help="greedy bounded-depth or bounded-diameter trees")
    _common(p)
    p.add_argument("--tree-out", help="write the first trial's tree in text format")

    p = sub.add_parser("mst", help="Prim MST weights")
    _common(p)

    p = sub.add_parser("splice", help="slice-and-splice trees")
    _common(p)

    p = sub.add_parser("exact", help="exhaustive optimum on a small instance")
    _common(p, trials=False)
    p.add_argument("--instance", help="instance file ('n m', terminals, upper-triangle weights)")
    p.add_argument("--root", type=int, default=0)

    p = sub.add_parser("wbp", help="sum of the b smallest of p exponentials")
    _common(p)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--p", type=int, required=True)

    p = sub.add_parser("lowerbound", help="minimise the truncated cost over level sequences")
    _common(p, trials=False)
    p.add_argument("--grid", type=int, default=40, help="grid points per decade")

    p = sub.add_parser("experiment", help="run any experiment mode")
    _common(p)
    p.add_argument("--mode", required=True)

    p = sub.add_parser("accept", help="run the acceptance checks")
    p.add_argument("--only", help="comma-separated check ids")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    return ap


def _write(text, path):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _need(args, *names):
    miss = [f"--{x.replace('_', '-')}" for x in names if getattr(args, x) is None]
    if miss:
        raise ConfigError([f"missing {x}" for x in miss])


def _epsilon(text):
    if text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError as e:
        raise ConfigError([f"--epsilon must be a number or 'auto', got {text!r}"]) from e


def _run_mode(args, mode, **over):
    from .experiments import ExperimentConfig, emit, run_experiment, summarize
    cfg = ExperimentConfig(mode=mode, n=args.n, m=args.m, k=args.k, diam=args.diam,
                           delta_levels=args.delta_levels, epsilon=_epsilon(args.epsilon),
                           delta=args.delta, dist=args.dist, trials=args.trials, base_seed=args.seed,
                           workers=args.workers, record_timing=not args.no_timing)
    for k, v in over.items():
        setattr(cfg, k, v)
    recs = run_experiment(cfg)
    summ = summarize(recs)
    text = emit(recs, summ, args.format, None, cfg)
    _write(text, args.out)
    if args.out:
        print(json.dumps({k: v for k, v in summ.items()}, default=float))
    return recs


def cmd_predict(args):
    _need(args, "n")
    n, m = args.n, args.m or args.n
    k = args.k if args.k is not None else (args.diam // 2 if args.diam else None)
    if k is None:
        raise ConfigError(["missing --k or --diam"])
    p = CostParams(n, m)
    seq = optimal_level_sequence(p, k)
    out = {
        "n": n, "m": m, "k": k, "c": p.c,
        "sequence": list(seq.sizes),
        "integer_sequence": list(integerize(seq, n, m).sizes),
        "f_cost": f_cost(p, seq),
        "predicted_depth": predicted_weight_depth(n, m, k),
        "predicted_diam_even": predicted_weight_depth(n, m, k),
        "predicted_diam_odd": predicted_weight_diam_odd(n, m, k),
    }
    if args.format == "json":
        _write(json.dumps(out, indent=2) + "\n", args.out)
    else:
        _write("".join(f"{k_},{v}\n" for k_, v in out.items() if not isinstance(v, list))
               + "".join(f"{k_},{' '.join(repr(x) for x in v)}\n" for k_, v in out.items() if isinstance(v, list)),
               args.out)


def cmd_greedy(args):
    _need(args, "n")
    if args.diam is not None:
        mode = "greedy-diam-odd" if args.diam % 2 else "greedy-diam-even"
    else:
        mode = "greedy-depth"
    _run_mode(args, mode)
    if args.tree_out:
        from .experiments import ExperimentConfig, greedy_trial_tree, trial_seed
        from .trees import save_tree
        cfg = ExperimentConfig(mode, args.n, args.m, k=args.k, diam=args.diam, dist=args.dist)
        tree, _, _ = greedy_trial_tree(cfg, trial_seed(args.seed, 0))
        save_tree(tree, args.tree_out)


def cmd_exact(args):
    from .exact import DenseInstance, exact_bounded_depth_tree, exact_bounded_diameter_tree
    from .graph_model import EdgeOracle
    from .trees import dumps_tree
    if args.instance:
        inst = DenseInstance.load(args.instance)
    else:
        _need(args, "n")
        inst = DenseInstance.from_oracle(EdgeOracle(args.n, args.seed), range(args.m or args.n))
    if args.diam is not None:
        t = exact_bounded_diameter_tree(inst, args.diam)
    elif args.k is not None:
        t = exact_bounded_depth_tree(inst, args.k, args.root)
    else:
        raise ConfigError(["missing --k or --diam"])
    text = f"# weight {t.weight!r} depth {t.depth} diameter {t.diameter}\n" + dumps_tree(t)
    _write(text, args.out)


def cmd_wbp(args):
    from .exact import (OrderStatSpec, approx_expected_W, binomial_se, empirical_exponent,
                        empirical_tail, exact_expected_W, tail_bound, variance_W)
    from .graph_model import aux_rng
    s = OrderStatSpec(args.b, args.p)
    out = {"b": s.b, "p": s.p, "exact_mean": exact_expected_W(s), "approx_mean": approx_expected_W(s),
           "variance": variance_W(s)}
    if args.delta is not None:
        trials = max(args.trials, 10_000)
        frac = empirical_tail(s, args.delta, trials, aux_rng(args.seed))
        out.update(delta=args.delta, trials=trials, tail_bound=tail_bound(s.b, args.delta),
                   empirical_tail=frac, standard_error=binomial_se(frac, trials),
                   empirical_exponent=empirical_exponent(frac, s.b, args.delta))
    if args.format == "json":
        _write(json.dumps(out, indent=2) + "\n", args.out)
    else:
        _write("".join(f"{k},{v!r}\n" for k, v in out.items()), args.out)


def cmd_lowerbound(args):
    _need(args, "n", "k", "delta")
    n, m = args.n, args.m or args.n
    p = CostParams(n, m, delta=args.delta)
    closed = optimal_level_sequence(p, args.k)
    seq, val = minimize_truncated_cost(p, args.k, args.grid)
    out = {
        "n": n, "m": m, "k": args.k, "delta": args.delta,
        "closed_form_sequence": list(closed.sizes),
        "closed_form_f": f_cost(p, closed),
        "closed_form_truncated": f_cost_truncated(p, closed),
        "R_of_root": R_threshold(args.delta, n, 1),
        "dp_sequence": list(seq.sizes),
        "dp_min": val,
        "dp_small_jumps": small_jumps(p, seq),
    }
    _write(json.dumps(out, indent=2) + "\n", args.out)


def cmd_accept(args):
    from .acceptance import CHECKS, run_checks
    ids = None
    if args.only:
        try:
            ids = [int(x) for x in args.only.split(",") if x.strip()]
        except ValueError as e:
            raise ConfigError([f"--only takes check ids, got {args.only!r}"]) from e
        bad = [i for i in ids if i not in CHECKS]
        if bad:
            raise ConfigError([f"unknown check ids {bad}"])
    res = run_checks(ids, seed=args.seed, workers=args.workers)
    failed = [r.cid for r in res if not r.passed]
    print(f"{len(res) - len(failed)}/{len(res)} checks passed" + (f"; failed: {failed}" if failed else ""))
    return EXIT_FAIL if failed else EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.cmd == "predict":
            cmd_predict(args)
        elif args.cmd == "greedy":
            cmd_greedy(args)
        elif args.cmd == "mst":
            _need(args, "n")
            _run_mode(args, "mst")
        elif args.cmd == "splice":
            _need(args, "n")
            _run_mode(args, "slice-splice")
        elif args.cmd == "exact":
            cmd_exact(args)
        elif args.cmd == "wbp":
            cmd_wbp(args)
        elif args.cmd == "lowerbound":
            cmd_lowerbound(args)
        elif args.cmd == "experiment":
            _need(args, "n")
            _run_mode(args, args.mode)
        elif args.cmd == "accept":
            return cmd_accept(args)
    except ConfigError as e:
        print("configuration error:", file=sys.stderr)
        for v in e.violations:
            print(f"  - {v}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ConstructionError as e:
        print(f"construction failed: {e}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
