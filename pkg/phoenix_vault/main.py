# phoenix_vault/main.py
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional

import click
import coloredlogs
import typer

from phoenix_vault.config.settings import settings
from phoenix_vault.core.uint256 import ArithmeticMode
from phoenix_vault.cli.commands import (
    CliConfig, OutputFormat, apply_action, bench_ledger, check_files, explore_vault, generate_trace, init_vault,
    list_tiers, run_named_scenario, run_trace,
)

logger = logging.getLogger(__name__)

app = typer.Typer(name="phoenix-vault", help=settings.TITLE, add_completion=False, no_args_is_help=True)


def _configure_logging(level: str):
    level = level.upper()
    if not isinstance(logging.getLevelName(level), int):
        raise typer.BadParameter(f"unknown log level {level!r}", param_hint="--log-level")
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    logging.getLogger().setLevel(level)
    if sys.stderr.isatty():
        coloredlogs.install(level=level, stream=sys.stderr)


def _finish(code: int):
    if code:
        raise typer.Exit(code)


# --mode and --format are accepted before or after the command name; the later one wins.
def _mode_option():
    return typer.Option(None, "--mode", help="Request-sum arithmetic for this command.")


def _format_option():
    return typer.Option(None, "--format", help="Human text or JSON lines for this command.")


def _config(ctx: typer.Context, mode: Optional[ArithmeticMode], output: Optional[OutputFormat]) -> CliConfig:
    config: CliConfig = ctx.obj
    return replace(config,
                   mode=config.mode if mode is None else mode,
                   format=config.format if output is None else output)


@app.callback()
def main(
    ctx: typer.Context,
    mode: ArithmeticMode = typer.Option(ArithmeticMode(settings.DEFAULT_MODE), help="Request-sum arithmetic."),
    output: OutputFormat = typer.Option(OutputFormat.TEXT, "--format", help="Human text or JSON lines."),
    seed: Optional[int] = typer.Option(None, help="Seed for randomized trace generation."),
    log_level: str = typer.Option(settings.LOG_LEVEL, help="Logging level (DEBUG, INFO, WARNING...)."),
):
    """Simulate, check and explore the two-tier time-locked vault."""
    _configure_logging(log_level)
    ctx.obj = CliConfig(mode=mode, format=output, seed=seed, log_level=log_level)


# ============================================
# VAULT ROUTES
# ============================================
@app.command()
def init(
    ctx: typer.Context,
    delay: int = typer.Option(..., min=1, help="Blocks that must pass between request and claim."),
    t1: str = typer.Option(..., help="Tier-one address."),
    creator: str = typer.Option(..., help="Creator, the first tier-two address."),
    max_requests: int = typer.Option(settings.MAX_LEDGER_SIZE, min=1, help="Ledger capacity."),
    out: Path = typer.Option(..., help="Snapshot file to write."),
    initial_funds: int = typer.Option(0, min=0, help="Funds sent with construction."),
    engine: Optional[str] = typer.Option(None, help="Rule engine: phoenix or a mutant name."),
    mode: Optional[ArithmeticMode] = _mode_option(),
    output: Optional[OutputFormat] = _format_option(),
):
    """Construct a vault and persist a chain snapshot."""
    _finish(init_vault(_config(ctx, mode, output), delay, t1, creator, max_requests, out, initial_funds, engine))


@app.command()
def apply(
    ctx: typer.Context,
    state: Path = typer.Option(..., help="Snapshot file; rewritten in place."),
    sender: str = typer.Option(..., help="Submitting address."),
    action: str = typer.Option(..., help='Action JSON, e.g. {"kind": "deposit", "amount": "5"}.'),
    mode: Optional[ArithmeticMode] = _mode_option(),
    output: Optional[OutputFormat] = _format_option(),
):
    """Submit one action in the next block."""
    _finish(apply_action(_config(ctx, mode, output), state, sender, action))


@app.command()
def run(
    ctx: typer.Context,
    state: Path = typer.Option(..., help="Snapshot to replay on top of."),
    trace: Path = typer.Option(..., help="Trace file (JSON lines)."),
    verify: bool = typer.Option(True, help="Fail when a recorded outcome is not reproduced."),
    save: bool = typer.Option(False, help="Rewrite the snapshot afterwards."),
    mode: Optional[ArithmeticMode] = _mode_option(),
    output: Optional[OutputFormat] = _format_option(),
):
    """Replay a trace file against a snapshot."""
    _finish(run_trace(_config(ctx, mode, output), state, trace, verify, save))


# ============================================
# VERIFICATION ROUTES
# ============================================
@app.command()
def check(
    ctx: typer.Context,
    config: Path = typer.Option(..., help="Vault config the trace starts from."),
    trace: Path = typer.Option(..., help="Trace file (JSON lines)."),
    engine: Optional[str] = typer.Option(None, help="Rule engine used to re-execute applied records."),
    mode: Optional[ArithmeticMode] = _mode_option(),
    output: Optional[OutputFormat] = _format_option(),
):
    """Property-check a trace; exit 1 on any violation."""
    _finish(check_files(_config(ctx, mode, output), config, trace, engine))


@app.command()
def explore(
    ctx: typer.Context,
    addresses: int = typer.Option(settings.EXPLORE_ADDRESSES, min=3, help="Address universe size."),
    amount_cap: int = typer.Option(settings.EXPLORE_AMOUNT_CAP, min=1, help="Largest ordinary amount."),
    depth: int = typer.Option(settings.EXPLORE_DEPTH, min=0, help="Blocks to explore."),
    delay: int = typer.Option(settings.EXPLORE_DELAY, min=1),
    max_requests: int = typer.Option(settings.EXPLORE_MAX_LEDGER_SIZE, min=1, help="Ledger capacity."),
    initial_funds: Optional[int] = typer.Option(settings.EXPLORE_INITIAL_FUNDS, min=0),
    workers: int = typer.Option(settings.EXPLORE_WORKERS, min=1),
    budget: int = typer.Option(settings.EXPLORE_STATE_BUDGET, min=1, help="Abort after this many states."),
    fail_fast: bool = typer.Option(False, help="Stop after the first depth with a violation."),
    mutant: Optional[str] = typer.Option(None, help="Explore a broken engine: property number or name."),
    mode: Optional[ArithmeticMode] = _mode_option(),
    output: Optional[OutputFormat] = _format_option(),
):
    """Exhaustively explore bounded action sequences; exit 1 on any violation."""
    _finish(explore_vault(_config(ctx, mode, output), addresses, amount_cap, depth, delay, max_requests,
                          initial_funds, workers, budget, fail_fast, mutant))


@app.command()
def scenario(
    ctx: typer.Context,
    name: str = typer.Argument(..., help="dos, delay-evasion, type2-recovery, type1-lockdown, "
                                         "tier2-loss or tier1-loss."),
    param: str = typer.Option("", help="Overrides such as K=2,L=2,n=3,delay=5,funds=4,deposits=2:2:2."),
    trace_dir: Optional[Path] = typer.Option(Path(settings.TRACE_DIR), help="Where to write the trace."),
    emit_trace: bool = typer.Option(True, "--emit-trace/--no-emit-trace"),
    mode: Optional[ArithmeticMode] = _mode_option(),
    output: Optional[OutputFormat] = _format_option(),
):
    """Run a canned attack or recovery; exit 1 if its assertions fail."""
    _finish(run_named_scenario(_config(ctx, mode, output), name, param, trace_dir if emit_trace else None))


# ============================================
# UTILITY ROUTES
# ============================================
@app.command()
def gen(
    ctx: typer.Context,
    length: int = typer.Option(50, min=0, help="Number of actions."),
    delay: int = typer.Option(3, min=1),
    out: Optional[Path] = typer.Option(None, help="Trace file; stdout when omitted."),
    config_out: Optional[Path] = typer.Option(None, help="Where to write the matching vault config."),
    mode: Optional[ArithmeticMode] = _mode_option(),
    output: Optional[OutputFormat] = _format_option(),
):
    """Generate a seeded random trace."""
    _finish(generate_trace(_config(ctx, mode, output), length, delay, out, config_out))


@app.command()
def bench(
    ctx: typer.Context,
    sizes: str = typer.Option("100,10000", help="Comma-separated ledger sizes."),
    repetitions: int = typer.Option(100, min=1),
    output: Optional[OutputFormat] = _format_option(),
):
    """Time ledger operations at several sizes."""
    _finish(bench_ledger(_config(ctx, None, output), sizes, repetitions))


@app.command()
def tiers(
    ctx: typer.Context,
    engine: Optional[str] = typer.Option(None, help="Rule engine to read the table from."),
    output: Optional[OutputFormat] = _format_option(),
):
    """Show which tier may take each privileged step."""
    _finish(list_tiers(_config(ctx, None, output), engine))


def cli_run(argv: list[str] | None = None) -> int:
    """Run the command line with ``argv`` and return its exit status."""
    try:
        code = app(args=argv, standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.Abort:
        return 1
    return code if isinstance(code, int) else 0


if __name__ == "__main__":
    app()
