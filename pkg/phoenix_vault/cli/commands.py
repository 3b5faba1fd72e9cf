# cli/commands.py
import functools
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import typer
from pydantic import BaseModel, ValidationError
from rich.console import Console
from rich.table import Table

from ..models.actions import normalize_address, parse_action
from ..models.schemas import VaultConfig
from ..core.benchmark import growth_ratios, run_benchmark
from ..core.chain import Chain
from ..core.codec import (
    decode_trace, dumps, encode_trace, load_config, load_snapshot, read_bytes, record_to_model, restore_chain,
    snapshot_chain, write_bytes,
)
from ..core.errors import (
    BudgetExceeded, InternalOverflow, InvalidConfig, ParseError, ReplayDivergence, ScenarioAssertionFailed,
)
from ..core.explorer import ExploreConfig, explore, violation_to_model
from ..core.mutants import engine_by_name
from ..core.properties import PROPERTIES, check_trace
from ..core.random_trace import random_trace
from ..core.scenarios import SCENARIOS, parse_params, run_scenario
from ..core.uint256 import ArithmeticMode
from ..core.vault import VaultEngine, tier_capabilities

logger = logging.getLogger(__name__)

console = Console()
err_console = Console(stderr=True)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3


class OutputFormat(str, Enum):
    TEXT = "text"
    STRUCTURED = "structured"


@dataclass
class CliConfig:
    mode: ArithmeticMode
    format: OutputFormat
    seed: int | None
    log_level: str

    @property
    def structured(self) -> bool:
        return self.format is OutputFormat.STRUCTURED


def emit(*models: BaseModel | dict):
    """Structured output: one sorted-key JSON document per line."""
    for model in models:
        typer.echo(dumps(model).decode())


def cli_errors(handler):
    """Map harness exceptions to exit codes: 1 failed checks, 2 bad input, 3 I/O."""

    @functools.wraps(handler)
    def wrapper(*args, **kwargs):
        try:
            return handler(*args, **kwargs)
        except (ParseError, InvalidConfig) as e:
            _fail(EXIT_USAGE, f"{e.code.value}: {e.detail}")
        except ValidationError as e:
            _fail(EXIT_USAGE, f"ParseError: {e.error_count()} validation error(s): {e.errors()[0]['msg']}")
        except (ReplayDivergence, BudgetExceeded, ScenarioAssertionFailed, InternalOverflow) as e:
            _fail(EXIT_FAILED, f"{e.code.value}: {e.detail}")
        except OSError as e:
            _fail(EXIT_IO, f"I/O error: {e}")

    return wrapper


def _fail(code: int, message: str):
    logger.debug(f"exiting with {code}: {message}")
    err_console.print(f"[bold red]error[/bold red] {message}", highlight=False)
    raise typer.Exit(code)


def _engine(name: str | None) -> VaultEngine:
    try:
        return engine_by_name(name or "phoenix")
    except KeyError:
        raise ParseError(f"unknown engine {name!r}")


def _address(value: str) -> str:
    try:
        return normalize_address(value)
    except ValueError as e:
        raise ParseError(str(e)) from e


def _outcome_text(tag: str) -> str:
    return f"[green]{tag}[/green]" if tag == "applied" else f"[yellow]{tag}[/yellow]"


# ============================================
# VAULT LIFECYCLE
# ============================================
@cli_errors
def init_vault(cfg: CliConfig, delay: int, t1: str, creator: str, max_requests: int, out: Path,
               initial_funds: int = 0, engine: str | None = None) -> int:
    config = VaultConfig(delay=delay, t1=t1, creator=creator, max_ledger_size=max_requests, mode=cfg.mode,
                         initial_funds=initial_funds)
    chain = Chain(config, _engine(engine))
    snapshot = snapshot_chain(chain)
    write_bytes(out, dumps(snapshot))
    logger.info(f"initialized {cfg.mode.value} vault at {out}")
    if cfg.structured:
        emit(snapshot)
    else:
        console.print(f"vault created in [bold]{cfg.mode.value}[/bold] mode, delay {delay}, "
                      f"ledger capacity {max_requests}; snapshot written to {out}")
    return EXIT_OK


@cli_errors
def apply_action(cfg: CliConfig, state: Path, sender: str, action: str) -> int:
    chain = restore_chain(load_snapshot(read_bytes(state)))
    parsed = parse_action(action)
    outcome = chain.submit(_address(sender), parsed)
    write_bytes(state, dumps(snapshot_chain(chain)))
    record = chain.trace.records[-1]
    if cfg.structured:
        emit(record_to_model(record))
    else:
        console.print(f"block {record.block}: {parsed.kind} -> {_outcome_text(outcome.tag())}; "
                      f"funds {chain.vault.funds}, {len(chain.vault.ledger)} pending")
    return EXIT_OK


@cli_errors
def run_trace(cfg: CliConfig, state: Path, trace: Path, verify: bool = True, save: bool = False) -> int:
    chain = restore_chain(load_snapshot(read_bytes(state)))
    replay = decode_trace(read_bytes(trace))
    start = len(chain.trace.records)
    chain.run(replay.records, verify=verify)
    if replay.end_block > chain.current_block:
        chain.advance(replay.end_block - chain.current_block)
    records = chain.trace.records[start:]
    if save:
        write_bytes(state, dumps(snapshot_chain(chain)))

    if cfg.structured:
        emit(*(record_to_model(r) for r in records))
        return EXIT_OK
    table = Table(title=f"{len(records)} actions replayed")
    for column in ("block", "sender", "action", "outcome"):
        table.add_column(column)
    for r in records:
        table.add_row(str(r.block), r.sender, r.action.kind, _outcome_text(r.outcome.tag()))
    console.print(table)
    console.print(f"block {chain.current_block}: funds {chain.vault.funds}, {len(chain.vault.ledger)} pending")
    return EXIT_OK


# ============================================
# PROPERTY CHECKING
# ============================================
@cli_errors
def check_files(cfg: CliConfig, config: Path, trace: Path, engine: str | None = None) -> int:
    vault_config = load_config(read_bytes(config))
    violations = check_trace(vault_config, decode_trace(read_bytes(trace)), _engine(engine))
    violated = sorted({v.property.number for v in violations})
    if cfg.structured:
        emit(*(violation_to_model(v) for v in violations))
        emit({"holds": len(PROPERTIES) - len(violated), "total": len(PROPERTIES), "violated": violated})
    elif violations:
        table = Table(title=f"{len(violated)} properties violated")
        for column in ("property", "layer", "block", "detail"):
            table.add_column(column)
        for v in violations:
            table.add_row(v.property.number, v.property.layer.value, str(v.block), v.detail)
        console.print(table)
    else:
        console.print(f"no violations: {len(PROPERTIES)}/{len(PROPERTIES)} properties hold")
    return EXIT_FAILED if violations else EXIT_OK


@cli_errors
def explore_vault(cfg: CliConfig, addresses: int, amount_cap: int, depth: int, delay: int, max_requests: int,
                  initial_funds: int | None, workers: int, budget: int, fail_fast: bool,
                  mutant: str | None) -> int:
    config = ExploreConfig(address_universe=addresses, amount_cap=amount_cap, max_depth=depth, delay=delay,
                           max_ledger_size=max_requests, mode=cfg.mode, initial_funds=initial_funds,
                           state_budget=budget, workers=workers, fail_fast=fail_fast, engine=_engine(mutant))
    report = explore(config)
    if cfg.structured:
        emit(report.to_model())
        return EXIT_FAILED if report.violations else EXIT_OK

    table = Table(title=f"{report.engine} ({report.mode.value}), depth {report.depth}: "
                        f"{report.states_visited} states, {report.transitions} transitions")
    for column in ("property", "layer", "verdict", "violations"):
        table.add_column(column)
    for verdict in report.verdicts():
        mark = "[green]holds[/green]" if verdict.holds else "[red]violated[/red]"
        table.add_row(verdict.property, verdict.layer, mark, str(verdict.violations))
    console.print(table)
    holding = sum(v.holds for v in report.verdicts())
    console.print(f"{holding}/{len(PROPERTIES)} properties hold")
    for v in report.violations:
        console.print(f"[red]{v.property.number}[/red] {v.detail} (witness of {len(v.witness)} actions)")
        for r in v.witness:
            console.print(f"  block {r.block} {r.sender} {dumps(r.action).decode()} -> {r.outcome.tag()}",
                          highlight=False)
    return EXIT_FAILED if report.violations else EXIT_OK


# ============================================
# SCENARIOS
# ============================================
@cli_errors
def run_named_scenario(cfg: CliConfig, name: str, params: str = "", trace_dir: Path | None = None) -> int:
    if name not in SCENARIOS:
        raise ParseError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")
    result = run_scenario(name, cfg.mode, **parse_params(params))
    if trace_dir is not None:
        stem = Path(trace_dir) / f"{name}-{cfg.mode.value}"
        write_bytes(stem.with_suffix(".jsonl"), encode_trace(result.trace))
        write_bytes(stem.with_suffix(".config.json"), dumps(result.config))

    if cfg.structured:
        emit(result.to_model())
        return EXIT_OK
    table = Table(title=f"{name} ({cfg.mode.value})")
    for column in ("stage", "block", "funds", "pending sum", "note"):
        table.add_column(column)
    for stage in result.narrative:
        table.add_row(stage.stage, str(stage.block), str(stage.funds), str(stage.pending_sum), stage.note)
    console.print(table)
    violated = sorted({v.property.number for v in result.violations})
    console.print(f"[green]passed[/green]; properties violated: {', '.join(violated) or 'none'}")
    return EXIT_OK


# ============================================
# UTILITIES
# ============================================
@cli_errors
def generate_trace(cfg: CliConfig, length: int, delay: int, out: Path | None, config_out: Path | None) -> int:
    seed = cfg.seed if cfg.seed is not None else 0
    config, trace = random_trace(seed, length, cfg.mode, delay)
    encoded = encode_trace(trace)
    if config_out is not None:
        write_bytes(config_out, dumps(config))
    if out is None:
        typer.echo(encoded.decode(), nl=False)
        return EXIT_OK
    write_bytes(out, encoded)
    if not cfg.structured:
        console.print(f"seed {seed}: {len(trace)} actions up to block {trace.end_block} written to {out}")
    return EXIT_OK


@cli_errors
def bench_ledger(cfg: CliConfig, sizes: str, repetitions: int) -> int:
    try:
        parsed = tuple(int(s) for s in sizes.split(","))
    except ValueError as e:
        raise ParseError(f"bad size list {sizes!r}") from e
    timings = run_benchmark(parsed, repetitions)
    ratios = growth_ratios(timings)
    if cfg.structured:
        emit(*({"operation": t.operation, "size": t.size, "median_ns": t.median_ns, "p90_ns": t.p90_ns}
               for t in timings))
        emit({"ratios": ratios})
        return EXIT_OK
    table = Table(title=f"ledger operations, median of {repetitions}")
    for column in ("operation", "size", "median ns", "p90 ns"):
        table.add_column(column)
    for t in timings:
        table.add_row(t.operation, str(t.size), f"{t.median_ns:.0f}", f"{t.p90_ns:.0f}")
    console.print(table)
    for op, ratio in ratios.items():
        console.print(f"{op}: x{ratio:.1f} from size {min(parsed)} to {max(parsed)}")
    return EXIT_OK


@cli_errors
def list_tiers(cfg: CliConfig, engine: str | None = None) -> int:
    rows = tier_capabilities(_engine(engine))
    if cfg.structured:
        emit(*rows)
        return EXIT_OK
    table = Table(title="tier capabilities")
    for column in ("capability", "T1", "T2", "Unprivileged"):
        table.add_column(column)
    for row in rows:
        table.add_row(row["capability"], *("yes" if row[t] else "-" for t in ("T1", "T2", "Unprivileged")))
    console.print(table)
    return EXIT_OK
