"""Command-line interface: solve, generate, and report with figures.

Exit codes: 0 success, 2 infeasible demands, 1 bad input.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from fractions import Fraction

from .clustering import InfeasibleDemandError
from .dpsolver import DPInfeasibleError
from .instances import (
    InstanceFormatError,
    emit_result,
    generate_grid_instance,
    parse_instance,
    serialize_instance,
)
from .oracle import OracleLimitError, brute_force_opt, report_rows
from .pipeline import MODES, PipelineConfig, run_ptas


def build_parser():
    ap = argparse.ArgumentParser(prog="steinerforest")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="solve one instance file")
    sp.add_argument("--input", required=True)
    sp.add_argument("--mode", choices=MODES, default="ptas")
    sp.add_argument("--epsilon", type=Fraction, default=Fraction(1, 2))
    sp.add_argument("--delta", type=Fraction, default=Fraction(1, 4))
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--c", type=Fraction, default=Fraction(1))
    sp.add_argument("--decomposition", default=None,
                    help="file with one cluster per line (edge ids), leaves first")
    sp.add_argument("--emit-json", default=None)
    sp.add_argument("--oracle", action="store_true")

    gp = sub.add_parser("generate", help="emit a random grid instance")
    gp.add_argument("--rows", type=int, required=True)
    gp.add_argument("--cols", type=int, required=True)
    gp.add_argument("--demands", type=int, required=True)
    gp.add_argument("--max-length", type=int, default=1)
    gp.add_argument("--seed", type=int, default=0)
    gp.add_argument("--output", default=None)

    rp = sub.add_parser("report", help="compare modes over instance files")
    rp.add_argument("--inputs", nargs="+", required=True)
    rp.add_argument("--modes", default="gw,ptas")
    rp.add_argument("--epsilon", type=Fraction, default=Fraction(1, 2))
    rp.add_argument("--delta", type=Fraction, default=Fraction(1, 4))
    rp.add_argument("--seed", type=int, default=0)
    rp.add_argument("--oracle", action="store_true")
    rp.add_argument("--output-dir", default="report")
    return ap


def _load_decomposition(path, g):
    from .branchdecomp import BDNode, BranchDecomposition

    with open(path) as fh:
        lines = [ln.split() for ln in fh if ln.strip()]
    clusters = [frozenset(int(x) for x in ln) for ln in lines]
    nodes = {}
    for cl in clusters:
        if len(cl) == 1:
            nodes[cl] = BDNode(cl)
    for cl in sorted(clusters, key=len):
        if cl in nodes:
            continue
        for other in sorted(nodes, key=len, reverse=True):
            if other < cl:
                rest = cl - other
                if rest in nodes:
                    nodes[cl] = BDNode(cl, (nodes[other], nodes[rest]))
                    break
        if cl not in nodes:
            raise InstanceFormatError("cluster %s has no two-child split" % sorted(cl))
    root = frozenset(g.edge_ids())
    if root not in nodes:
        raise InstanceFormatError("decomposition lacks the full edge set")
    return BranchDecomposition(nodes[root])


def cmd_solve(args):
    try:
        with open(args.input) as fh:
            g, demands = parse_instance(fh.read())
    except (OSError, InstanceFormatError) as exc:
        print("input error: %s" % exc, file=sys.stderr)
        return 1
    config = PipelineConfig(
        epsilon=args.epsilon, delta=args.delta, mode=args.mode, seed=args.seed, c=args.c
    )
    if args.decomposition:
        try:
            config.decomposition = _load_decomposition(args.decomposition, g)
        except (OSError, InstanceFormatError) as exc:
            print("decomposition error: %s" % exc, file=sys.stderr)
            return 1
    try:
        rec = run_ptas(g, demands, config, oracle=args.oracle,
                       instance_name=os.path.basename(args.input))
    except (InfeasibleDemandError, DPInfeasibleError) as exc:
        print("infeasible: %s" % exc, file=sys.stderr)
        return 2
    except OracleLimitError as exc:
        print("oracle limit: %s" % exc, file=sys.stderr)
        return 1
    text = emit_result(rec)
    if args.emit_json:
        with open(args.emit_json, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def cmd_generate(args):
    try:
        g, demands = generate_grid_instance(
            args.rows, args.cols, args.demands, max_length=args.max_length, seed=args.seed
        )
    except ValueError as exc:
        print("generate error: %s" % exc, file=sys.stderr)
        return 1
    name = "grid-%dx%d-k%d-s%d" % (args.rows, args.cols, args.demands, args.seed)
    text = serialize_instance(g, demands, name=name)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_report(args):
    modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    for m in modes:
        if m not in MODES:
            print("unknown mode %r" % m, file=sys.stderr)
            return 1
    os.makedirs(args.output_dir, exist_ok=True)
    rows = []
    for path in args.inputs:
        try:
            with open(path) as fh:
                g, demands = parse_instance(fh.read())
        except (OSError, InstanceFormatError) as exc:
            print("input error in %s: %s" % (path, exc), file=sys.stderr)
            return 1
        name = os.path.basename(path)
        oracle = None
        if args.oracle:
            try:
                oracle = brute_force_opt(g, demands)
            except OracleLimitError as exc:
                print("oracle limit on %s: %s" % (name, exc), file=sys.stderr)
                return 1
        results = []
        for mode in modes:
            config = PipelineConfig(
                epsilon=args.epsilon, delta=args.delta, mode=mode, seed=args.seed
            )
            try:
                results.append(run_ptas(g, demands, config, instance_name=name))
            except (InfeasibleDemandError, DPInfeasibleError) as exc:
                print("infeasible on %s: %s" % (name, exc), file=sys.stderr)
                return 2
        rows.extend(report_rows(name, g, demands, results, oracle))
    table_path = os.path.join(args.output_dir, "comparison.csv")
    fields = ["instance", "n", "m", "demands", "algorithm", "length", "opt",
              "ratio", "feasible", "wall_time_s"]
    with open(table_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
    figures = render_report_figures(rows, args.output_dir)
    print("wrote %s and %d figures" % (table_path, len(figures)))
    return 0


def render_report_figures(rows, output_dir):
    """Ratio-by-mode and runtime figures rendered next to the CSV table."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    figures = []
    by_mode = {}
    for r in rows:
        by_mode.setdefault(r["algorithm"], []).append(r)
    if any(r["ratio"] for r in rows):
        fig, ax = plt.subplots(figsize=(7, 4))
        for mode, rs in sorted(by_mode.items()):
            xs = range(len(rs))
            ys = [float(r["ratio"]) for r in rs if r["ratio"]]
            if ys:
                ax.plot(range(len(ys)), ys, marker="o", linestyle="-", label=mode)
        ax.axhline(1.0, color="gray", linewidth=0.8)
        ax.set_xlabel("instance")
        ax.set_ylabel("length / optimum")
        ax.set_title("approximation ratio by mode")
        ax.legend()
        path = os.path.join(output_dir, "ratios.png")
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)
        figures.append(path)
    fig, ax = plt.subplots(figsize=(7, 4))
    for mode, rs in sorted(by_mode.items()):
        ys = [float(r["wall_time_s"]) for r in rs]
        ax.plot(range(len(ys)), ys, marker="s", linestyle="--", label=mode)
    ax.set_xlabel("instance")
    ax.set_ylabel("seconds")
    ax.set_title("wall time by mode")
    ax.legend()
    path = os.path.join(output_dir, "times.png")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    figures.append(path)
    return figures


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "solve":
        return cmd_solve(args)
    if args.command == "generate":
        return cmd_generate(args)
    if args.command == "report":
        return cmd_report(args)
    return 1


if __name__ == "__main__":
    sys.exit(main())
