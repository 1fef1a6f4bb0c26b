"""``sociorepr`` command-line entry point."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import parse_config
from .experiments import (
    ConfigError,
    ExperimentConfig,
    exp2_costs,
    normalization_constants,
    run_exp1,
    run_exp2,
    run_fig1,
)
from .mathcore import FactorizationError, discrete_uniform_entropy_bits, gaussian_entropy_bits, rbf_covariance
from .output import render_svg, write_csv, write_manifest
from .population import Population
from .representation import AggregationOperator, build_aggregated, build_exact, group_cost_bits

EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 2, 3, 4

RUNNERS = {"fig1": run_fig1, "exp1": run_exp1, "exp2": run_exp2}
# heatmaps only where one row maps to one cell
HEATMAP_FILTERS = {
    "fig1": [("", lambda r: True)],
    "exp2": [("_group", lambda r: r.strategy == "group"), ("_individual", lambda r: r.strategy == "individual")],
}


def entropy_report(cfg: ExperimentConfig) -> dict:
    """Closed-form representation costs for ``cfg``; no simulation."""
    prior = rbf_covariance(cfg.grid, cfg.kernel)
    pop = Population(np.ones((cfg.n_agents, cfg.grid.n)), cfg.beta_pop, cfg.grid)  # costs ignore field values
    m_groups = cfg.n_groups * cfg.m_per_group
    return {
        "n_tiles": cfg.grid.n,
        "prior_entropy_bits": gaussian_entropy_bits(prior),
        "exact": {"n_agents": cfg.n_agents, "cost_bits": build_exact(pop, prior).cost_bits},
        "aggregated": [
            {"patch_w": pw, "patch_h": ph,
             "cost_bits": build_aggregated(pop, prior, AggregationOperator.build(cfg.grid, pw, ph)).cost_bits}
            for pw, ph in cfg.patch_shapes()
        ],
        "group": {
            "k": cfg.n_groups,
            "n_agents": m_groups,
            "assignment_bits_per_agent": discrete_uniform_entropy_bits(cfg.n_groups),
            "cost_bits": group_cost_bits(cfg.n_groups, m_groups, prior),
        },
        "individual_by_rho": [
            {"rho": rho, "cost_bits": exp2_costs(cfg)[(rho, "individual")]} for rho in cfg.rho_grid
        ],
    }


def _run(command: str, cfg: ExperimentConfig, out: Path, plot: bool, workers: int) -> list[str]:
    out.mkdir(parents=True, exist_ok=True)
    names = ["fig1", "exp1", "exp2"] if command == "all" else [command]
    written, normalization = [], {}
    for name in names:
        rows = RUNNERS[name](cfg, workers=workers)
        write_csv(rows, out / f"{name}.csv", name)
        written.append(f"{name}.csv")
        normalization[name] = normalization_constants(rows)
        if plot:
            render_svg(rows, "line", out / f"{name}_line.svg", title=f"{name}")
            written.append(f"{name}_line.svg")
            for suffix, keep in HEATMAP_FILTERS.get(name, []):
                fname = f"{name}_heatmap{suffix}.svg"
                render_svg([r for r in rows if keep(r)], "heatmap", out / fname, title=f"{name}{suffix}")
                written.append(fname)
    write_manifest(out, command, cfg.to_dict(), written, normalization)
    return written


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sociorepr", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("fig1", "two-goal imitation reward by similarity and target decision noise"),
        ("exp1", "state-aggregation sweep"),
        ("exp2", "group vs individual representation sweep"),
        ("entropy", "print closed-form representation costs as JSON"),
        ("all", "run fig1, exp1 and exp2 (always renders SVG charts)"),
    ]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", type=Path, help="JSON config file (defaults for absent keys)")
        p.add_argument("--seed", type=int, help="master seed, overrides the config")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="override one config key (value parsed as JSON)")
        if name != "entropy":
            p.add_argument("--out", type=Path, default=Path("results"), help="output directory")
            p.add_argument("--plot", action="store_true", help="also write SVG charts")
            p.add_argument("--workers", type=int, default=1, help="worker processes for repetitions")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config, args.overrides, args.seed)
        if args.command == "entropy":
            print(json.dumps(entropy_report(cfg), indent=2, sort_keys=True))
            return 0
        if args.workers < 1:
            raise ConfigError("--workers", "must be >= 1")
        written = _run(args.command, cfg, args.out, args.plot or args.command == "all", args.workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FactorizationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    for name in written + ["manifest.json"]:
        print(args.out / name)
    return 0


if __name__ == "__main__":
    sys.exit(main())
