"""Command-line simulation driver.

Subcommands::

    qpf run     --scenario s.json --filter f.json --seed 0 --out outdir
    qpf mc      --runs 25 --scenario s.json --filter f.json --seed 0 --out outdir
    qpf compare --runs 25 --scenario s.json --filter f.json --seed 0 --out outdir

``--strategy baseline|mmse`` overrides the fiducial choice in the filter
file; ``--jobs`` parallelizes Monte Carlo runs across processes. `run` writes
a per-step CSV, `mc` additionally a batch summary JSON, `compare` a paired
comparison report JSON.
"""

import argparse
import sys
from pathlib import Path

from .config import load_filter_config, load_scenario
from .sim import (
    compare_fiducials,
    final_rmse,
    run_monte_carlo,
    run_once,
    sigma3_consistency,
    write_json,
    write_metrics_csv,
)


def _add_common(parser, runs=False):
    parser.add_argument("--scenario", required=True, help="scenario JSON file")
    parser.add_argument("--filter", required=True, help="filter config JSON file")
    parser.add_argument("--seed", type=int, default=0, help="run seed (base seed for batches)")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument(
        "--strategy",
        choices=["baseline", "mmse"],
        help="override the fiducial strategy from the filter file",
    )
    if runs:
        parser.add_argument("--runs", type=int, required=True, help="number of Monte Carlo runs")
        parser.add_argument("--jobs", type=int, default=1, help="parallel worker processes")


def _load(args):
    scenario = load_scenario(args.scenario)
    config = load_filter_config(args.filter, scenario.gyro, args.strategy)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return scenario, config, out


def _cmd_run(args):
    scenario, config, out = _load(args)
    metrics = run_once(scenario, config, args.seed)
    csv_path = out / f"run_{config.fiducial}_seed{args.seed}.csv"
    write_metrics_csv(metrics, csv_path)
    print(
        f"{config.fiducial} seed {args.seed}: "
        f"final RMSE {final_rmse(metrics):.3e} rad, "
        f"3-sigma consistency {sigma3_consistency(metrics):.3f}, "
        f"wall {metrics.wall_time_s:.2f} s -> {csv_path}"
    )
    return 0


def _cmd_mc(args):
    scenario, config, out = _load(args)
    summary, per_run = run_monte_carlo(
        scenario, config, args.runs, args.seed, n_jobs=args.jobs
    )
    write_json(summary, out / f"mc_{config.fiducial}_summary.json")
    write_json(per_run, out / f"mc_{config.fiducial}_runs.json")
    print(
        f"{config.fiducial} x{args.runs}: "
        f"median final RMSE {summary['median_final_rmse_rad']:.3e} rad, "
        f"3-sigma consistency {summary['sigma3_consistency']:.3f}, "
        f"wall {summary['wall_time_s']:.1f} s"
    )
    return 0


def _cmd_compare(args):
    scenario, config, out = _load(args)
    report = compare_fiducials(scenario, config, args.runs, args.seed, n_jobs=args.jobs)
    path = out / "comparison.json"
    write_json(report, path)
    print(
        "paired medians (rad): "
        f"baseline {report['baseline_median_final_rmse_rad']:.3e} / "
        f"mmse {report['mmse_median_final_rmse_rad']:.3e}; "
        f"divergences {report['baseline_divergence_count']} / "
        f"{report['mmse_divergence_count']} -> {path}"
    )
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="qpf",
        description="Quaternion particle filter simulation driver",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single simulation run, per-step CSV")
    _add_common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_mc = sub.add_parser("mc", help="Monte Carlo batch with summary JSON")
    _add_common(p_mc, runs=True)
    p_mc.set_defaults(func=_cmd_mc)

    p_cmp = sub.add_parser("compare", help="paired baseline-vs-mmse comparison")
    _add_common(p_cmp, runs=True)
    p_cmp.set_defaults(func=_cmd_compare)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
