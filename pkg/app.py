"""
hyperlab - regularity lab for hypercontractive processes and fields.

Command line entry point: one subcommand per experiment, configured by flags
and an optional key-value run file (flags win). Exit status 0 means PASS,
1 a failed verification, 2 a configuration error, 3 a numerical failure.
"""
import logging
import sys
from typing import Any, Dict, Optional

import click
from click.core import ParameterSource
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from __version__ import __version__
from config import config, load_key_value_file
from errors import DomainError, LabError, NumericalError
from experiments import ExperimentOutcome, ExperimentRunner
from models.model_manager import ModelManager, get_model_manager
from reports import format_value
from run_config import MODEL_KINDS, RunConfig

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

logger = logging.getLogger(__name__)
console = Console(stderr=True)

# flag name -> RunConfig field
OPTION_FIELDS = {
    "model": "model", "hurst": "hurst", "order": "order", "shape": "shape", "weight": "weights",
    "grid": "grid", "paths": "paths", "seed": "seed", "beta": "beta", "beta0": "beta0",
    "iota": "iota", "c0": "c0", "alpha": "alpha", "epsilon": "epsilon", "interval": "interval",
    "base": "base", "u": "u", "p": "p", "workers": "workers", "input_path": "input", "out": "out",
}


def configure_logging(level: Optional[str]) -> None:
    """Log to stderr so report files stay byte-identical."""
    logging.basicConfig(
        level=getattr(logging, (level or config.log_level).upper(), logging.INFO),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        handlers=[logging.StreamHandler()],
        force=True,
    )


def run_options(fn):
    """Flags shared by every experiment subcommand."""
    options = [
        click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False),
                     help="key=value run file; flags win over it"),
        click.option("--manifest", "manifest_file", type=click.Path(exists=True, dir_okay=False),
                     help="rerun from a manifest.txt written by an earlier run"),
        click.option("--model", type=click.Choice(MODEL_KINDS), default="fbm", show_default=True),
        click.option("--hurst", type=float, multiple=True, help="Hurst parameter (repeat per factor/axis)"),
        click.option("--order", type=int, default=2, show_default=True, help="Wiener chaos order"),
        click.option("--shape", type=click.Choice(["zero", "one", "linear", "sqrt"]), default="linear",
                     help="shape of the deterministic model"),
        click.option("--weight", type=float, multiple=True, help="combination weight (repeat per factor)"),
        click.option("--grid", type=int, multiple=True, help="grid points (repeat per axis)"),
        click.option("--paths", type=int, help="number of Monte Carlo paths"),
        click.option("--seed", type=int, default=0, show_default=True, help="master seed"),
        click.option("--beta", type=float),
        click.option("--beta0", type=float),
        click.option("--iota", type=float),
        click.option("--c0", type=float),
        click.option("--alpha", type=float, multiple=True, help="Hoelder exponent (repeat per axis)"),
        click.option("--epsilon", type=float, multiple=True),
        click.option("--interval", type=float, nargs=2, help="interval endpoints A B"),
        click.option("--base", type=float, default=0.0, show_default=True, help="base point s"),
        click.option("--u", type=float, multiple=True, help="tail threshold (repeatable)"),
        click.option("--p", type=float, multiple=True, help="moment order (repeatable)"),
        click.option("--workers", type=int, default=1, show_default=True),
        click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False),
                     help="analyse a path/field CSV instead of simulating"),
        click.option("--out", type=click.Path(file_okay=False), default="out", show_default=True),
        click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"],
                                                      case_sensitive=False)),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def collect_settings(ctx: click.Context, subcommand: str, params: Dict[str, Any]) -> Dict[str, Any]:
    """Run-file values overlaid with every flag given on the command line."""
    settings: Dict[str, Any] = {}
    for key in ("config_file", "manifest_file"):
        if params.get(key):
            settings.update({k: v for k, v in load_key_value_file(params[key]).items() if v is not None})
    for name, field_name in OPTION_FIELDS.items():
        if ctx.get_parameter_source(name) == ParameterSource.DEFAULT:
            continue
        value = params[name]
        settings[field_name] = list(value) if isinstance(value, tuple) else value
    settings["subcommand"] = subcommand
    return settings


def print_summary(outcome: ExperimentOutcome) -> None:
    table = Table(title=f"hyperlab {outcome.subcommand}: {'PASS' if outcome.passed else 'FAIL'}")
    table.add_column("key", style="cyan")
    table.add_column("value")
    for key, value in outcome.summary.items():
        table.add_row(str(key), format_value(value))
    console.print(table)


def execute(ctx: click.Context, subcommand: str, params: Dict[str, Any]) -> None:
    configure_logging(params.get("log_level"))
    try:
        run = RunConfig(**collect_settings(ctx, subcommand, params))
        outcome = ExperimentRunner(run).execute()
    except (DomainError, ValidationError, FileNotFoundError) as e:
        logger.error(f"Configuration error: {e}")
        ctx.exit(EXIT_CONFIG)
    except NumericalError as e:
        logger.error(f"Numerical failure: {type(e).__name__}: {e}")
        ctx.exit(EXIT_NUMERICAL)
    except LabError as e:
        logger.error(f"{type(e).__name__}: {e}")
        ctx.exit(EXIT_CONFIG)

    print_summary(outcome)
    for path in outcome.files:
        logger.info(f"Wrote {path}")
    ctx.exit(EXIT_OK if outcome.passed else EXIT_FAIL)


@click.group()
@click.version_option(__version__, prog_name="hyperlab")
def cli():
    """Simulate hypercontractive processes and verify their regularity bounds."""


@cli.command()
@run_options
@click.pass_context
def simulate(ctx, **params):
    """Emit sample paths or fields as CSV."""
    execute(ctx, "simulate", params)


@cli.command()
@run_options
@click.pass_context
def moments(ctx, **params):
    """Increment moment table and hypercontractivity fit."""
    execute(ctx, "moments", params)


@cli.command()
@run_options
@click.pass_context
def grr(ctx, **params):
    """B, Hoelder constants and pathwise modulus verification."""
    execute(ctx, "grr", params)


@cli.command()
@run_options
@click.pass_context
def field(ctx, **params):
    """Rectangular-increment suite for fields."""
    execute(ctx, "field", params)


@cli.command()
@run_options
@click.pass_context
def tail(ctx, **params):
    """Supremum tail curve against the analytic bound."""
    execute(ctx, "tail", params)


@cli.command()
@run_options
@click.pass_context
def holder(ctx, **params):
    """Moment and path directions of the Hoelder characterisation."""
    execute(ctx, "holder", params)


@cli.command("models")
@click.option("--model-dir", type=click.Path(exists=True, file_okay=False),
              help="also load custom model files from this directory")
def list_models(model_dir):
    """List registered process models."""
    configure_logging(None)
    if model_dir:
        manager = ModelManager(model_directory=model_dir)
        manager.load_custom_models()
    else:
        manager = get_model_manager()
    info = manager.get_manager_info()
    table = Table(title="Registered models")
    table.add_column("kind", style="cyan", no_wrap=True)
    for column in ("class", "dims", "version", "description"):
        table.add_column(column)
    for kind, meta in sorted(info["registry"]["models"].items()):
        table.add_row(kind, str(meta.get("model_class", "")), str(meta.get("dims", "")),
                      str(meta.get("version", "")), str(meta.get("description", "")))
    Console().print(table)


def main():
    cli(prog_name="hyperlab")


if __name__ == "__main__":
    sys.exit(main())
