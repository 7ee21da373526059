"""Command-line interface.

Commands:
    run             execute a config file, write results.csv (+ figures)
    list-workloads  print available techniques and variants
    compare         directional A/B comparison of two result CSVs

Exit codes: 0 success, 2 configuration/validation error, 1 runtime error.
"""
from __future__ import annotations

import sys
from dataclasses import replace
from pathlib import Path

import click

from .errors import CacheTraceError, ParseError, ValidationError
from .harness import (
    Metric,
    Verdict,
    _VARIANTS,
    compare_csv,
    emit_csv,
    parse_config,
    run_experiments,
)

_VALIDATION_EXIT = 2
_RUNTIME_EXIT = 1


def _fail(message: str, code: int) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
@click.version_option(package_name="cachetrace")
def main() -> None:
    """Trace-driven cache-hierarchy simulator and workload harness."""


@main.command()
@click.option(
    "--config", "config_path", required=True,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Experiment config file (YAML).",
)
@click.option(
    "--out", "out_dir", required=True,
    type=click.Path(file_okay=False, path_type=Path),
    help="Output directory for results.csv, figures and trace dumps.",
)
@click.option("--seed", type=int, default=None,
              help="Override the seed of every experiment.")
@click.option("--dump-trace", is_flag=True,
              help="Dump the generated trace of every experiment.")
@click.option("--plot/--no-plot", "render_plots", default=True,
              help="Render summary figures next to the CSV (default on).")
def run(config_path: Path, out_dir: Path, seed, dump_trace: bool,
        render_plots: bool) -> None:
    """Run all experiments in a config file."""
    try:
        configs = parse_config(config_path.read_text())
    except (ParseError, ValidationError) as e:
        _fail(str(e), _VALIDATION_EXIT)
    if seed is not None:
        configs = [replace(c, seed=seed) for c in configs]
    if dump_trace:
        configs = [replace(c, dump_trace=True) for c in configs]
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        results = run_experiments(configs, out_dir=out_dir)
        csv_path = out_dir / "results.csv"
        emit_csv(results, csv_path)
        click.echo(f"wrote {csv_path}")
        if render_plots:
            from .plotting import plot_results

            for path in plot_results(results, out_dir):
                click.echo(f"wrote {path}")
    except (ParseError, ValidationError) as e:
        _fail(str(e), _VALIDATION_EXIT)
    except CacheTraceError as e:
        _fail(str(e), _VALIDATION_EXIT)
    except OSError as e:
        _fail(str(e), _RUNTIME_EXIT)


@main.command(name="list-workloads")
def list_workloads() -> None:
    """List the available techniques and their variants."""
    for technique, variants in _VARIANTS.items():
        click.echo(f"{technique.value}: {', '.join(sorted(variants))}")


@main.command()
@click.argument("baseline", type=click.Path(exists=True, dir_okay=False,
                                            path_type=Path))
@click.argument("candidate", type=click.Path(exists=True, dir_okay=False,
                                             path_type=Path))
@click.option("--metric", required=True,
              type=click.Choice([m.value for m in Metric]),
              help="Comparison metric; lower is better.")
def compare(baseline: Path, candidate: Path, metric: str) -> None:
    """Compare two results.csv files experiment-by-experiment."""
    try:
        reports = compare_csv(baseline, candidate, Metric(metric))
    except CacheTraceError as e:
        _fail(str(e), _VALIDATION_EXIT)
    except (OSError, KeyError) as e:
        _fail(f"unreadable results file: {e}", _RUNTIME_EXIT)
    if not reports:
        _fail("no common experiment ids between the two files",
              _VALIDATION_EXIT)
    for exp_id, report in reports:
        click.echo(f"{exp_id}: {report}")


if __name__ == "__main__":
    main()
