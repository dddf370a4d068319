"""Command-line entry points.

Subcommands: ``generate`` (emit a synthetic graph as edge + label files),
``truth`` (exact measures of a graph), ``walk`` (one random-walk sample
as an audit record file), ``correct`` (apply the confusion-matrix
corrections to supplied vectors), and ``experiment`` (full replicated
grid from a JSON config).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .experiments import (
    ExperimentConfig,
    run_experiment,
    summarize,
    write_rows_csv,
    write_summary_csv,
)
from .graph import (
    generate_homophilous_graph,
    ground_truth,
    load_graph_files,
    write_edge_list,
    write_label_file,
)
from .noise import ConfusionMatrix, apply_noise, symmetric_confusion
from .quantify import (
    EdgeVector,
    PropVector,
    adjust_edge_proportions,
    adjust_proportions,
    variance_inflation_nodes,
)
from .samplers import rwrw_walk, with_noisy_labels, write_sample_records


def _confusion_from_args(args) -> ConfusionMatrix:
    if args.matrix is not None:
        return ConfusionMatrix.from_flat(args.matrix)
    if args.rate is not None:
        return symmetric_confusion(args.rate)
    raise SystemExit("provide --rate or --matrix")


def _cmd_generate(args) -> int:
    g = generate_homophilous_graph(
        args.n, args.m, args.minority_frac, args.ingroup_pref, args.seed
    )
    prefix = Path(args.out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    edge_path = prefix.with_suffix(".edges")
    label_path = prefix.with_suffix(".labels")
    write_edge_list(g, edge_path)
    write_label_file(g, label_path)
    gt = ground_truth(g)
    print(
        f"wrote {edge_path} and {label_path}: n={g.node_count} "
        f"edges={g.edge_count} p_b={gt.p.b:.4f} mean_degree={g.mean_degree:.3f}"
    )
    return 0


def _cmd_truth(args) -> int:
    g = load_graph_files(args.edges, args.labels, directed=args.directed)
    gt = ground_truth(g, args.top_quantile)
    payload = {"nodes": g.node_count, "edges": g.edge_count, **gt.as_dict()}
    text = json.dumps(payload, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(text)
    return 0


def _cmd_walk(args) -> int:
    g = load_graph_files(args.edges, args.labels, directed=args.directed)
    seeds = np.random.SeedSequence(args.seed).spawn(2)
    sample = rwrw_walk(
        g, args.steps, seed_mode=args.seed_mode, burn_in=args.burn_in, rng_seed=seeds[0]
    )
    if args.rate is not None or args.matrix is not None:
        confusion = _confusion_from_args(args)
        noisy = apply_noise(g.labels, confusion, seeds[1])
        sample = with_noisy_labels(sample, noisy)
    write_sample_records(sample, args.out)
    print(f"wrote {args.out}: {len(sample)} steps over {np.unique(sample.nodes).size} nodes")
    return 0


def _cmd_correct(args) -> int:
    confusion = _confusion_from_args(args)
    payload: dict = {"matrix": confusion.to_flat(), "det": confusion.det}
    if args.prop is not None:
        vec = PropVector(args.prop[0], args.prop[1], role="measured_m")
        corrected = adjust_proportions(vec, confusion)
        if args.clip:
            corrected = corrected.clipped()
        payload["proportions"] = {
            "a": corrected.a,
            "b": corrected.b,
            "out_of_range": corrected.out_of_range,
        }
        payload["variance_inflation"] = variance_inflation_nodes(confusion)
    if args.edge is not None:
        vec = EdgeVector(args.edge[0], args.edge[1], args.edge[2], role="measured_t")
        corrected = adjust_edge_proportions(vec, confusion)
        if args.clip:
            corrected = corrected.clipped()
        payload["edges"] = {
            "aa": corrected.aa,
            "ab": corrected.ab,
            "bb": corrected.bb,
            "out_of_range": corrected.out_of_range,
        }
    if "proportions" not in payload and "edges" not in payload:
        raise SystemExit("provide --prop and/or --edge")
    print(json.dumps(payload, indent=2))
    return 0


def _cmd_experiment(args) -> int:
    cfg = ExperimentConfig.from_json_file(args.config)
    if args.seed is not None:
        cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "master_seed": args.seed})
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = run_experiment(cfg, threads=args.threads)
    rows_path = out_dir / "rows.csv"
    summary_path = out_dir / "summary.csv"
    write_rows_csv(result, rows_path)
    write_summary_csv(summarize(result), summary_path)
    print(f"wrote {rows_path} ({len(result.rows)} rows) and {summary_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphquant",
        description="Group-property estimation on two-group graphs with "
        "confusion-matrix bias correction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a synthetic graph and label file")
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--m", type=int, default=4)
    p.add_argument("--minority-frac", type=float, default=0.2)
    p.add_argument("--ingroup-pref", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output path prefix")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("truth", help="exact measures of a graph by enumeration")
    p.add_argument("--edges", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--directed", action="store_true")
    p.add_argument("--top-quantile", type=float, default=0.2)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_truth)

    p = sub.add_parser("walk", help="one random-walk sample as an audit record file")
    p.add_argument("--edges", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--directed", action="store_true")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--seed-mode", default="degree_proportional",
                   choices=["degree_proportional", "uniform_with_burnin"])
    p.add_argument("--burn-in", type=int, default=0)
    p.add_argument("--rate", type=float, help="symmetric misclassification rate")
    p.add_argument("--matrix", type=float, nargs=4, metavar=("AA", "AB", "BA", "BB"),
                   help="confusion matrix, 4 numbers row-major")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_walk)

    p = sub.add_parser("correct", help="apply confusion-matrix corrections to vectors")
    p.add_argument("--rate", type=float)
    p.add_argument("--matrix", type=float, nargs=4, metavar=("AA", "AB", "BA", "BB"))
    p.add_argument("--prop", type=float, nargs=2, metavar=("A", "B"))
    p.add_argument("--edge", type=float, nargs=3, metavar=("AA", "AB", "BB"))
    p.add_argument("--clip", action="store_true",
                   help="clip and renormalize corrected vectors (display only)")
    p.set_defaults(func=_cmd_correct)

    p = sub.add_parser("experiment", help="run a replicated grid from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, help="override the config master seed")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
