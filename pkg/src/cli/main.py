from contextlib import contextmanager
from contextvars import ContextVar
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence
import logging
import sys
import time

import typer
import yaml
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.progress import Progress, SpinnerColumn, TextColumn
from typer.core import TyperGroup

from ..core import experiments
from ..core.errors import MISSING_PARAMETER, NO_REFERENCE_GENERATOR, WRITE_FAILED
from ..core.models import ExperimentKind, ExperimentReport, ReportMetadata
from ..core.numtheory import as_modulus
from ..core.reference import load_reference_tables
from ..core.sequences import LogBase, cyclic_sequence, explicit_sequence, random_sequence, required_length
from ..core.settings import DEFAULT_MASTER_SEED, default_threads, log_level
from ..core.simulator import Completion
from .models import CommandName, OutputFormat, Precision, RunConfig
from .reporting import render

PROG_NAME = "qfalab"

# Default trial counts per command.
DEFAULT_TRIALS = {
    CommandName.TABLE1: 5000,
    CommandName.RANDOM_RATE: 5000,
    CommandName.RANDOM_VS_CYCLIC: 100,
    CommandName.AZUMA_TAIL: 10_000,
}
DEFAULT_LAMBDAS = "0,20,40,51"
DEFAULT_AIKPS_PRIMES = "1523,9973"

logger = logging.getLogger(__name__)

# Logs, spinners and errors go to stderr; stdout carries only the report.
console = Console(stderr=True)

# Newer typer releases bundle their own click; use the exception classes it raises.
_click_exceptions = sys.modules[typer.BadParameter.__module__]
ClickException = _click_exceptions.ClickException
UsageError = _click_exceptions.UsageError
Exit = _click_exceptions.Exit

_capture: ContextVar[Optional[List[RunConfig]]] = ContextVar("_capture", default=None)


class UsageExitGroup(TyperGroup):
    """Report usage errors with exit code 1; 2 is reserved for hypothesis counterexamples."""

    def make_context(self, *args, **kwargs):
        try:
            return super().make_context(*args, **kwargs)
        except UsageError as e:
            e.exit_code = 1
            raise

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except UsageError as e:
            e.exit_code = 1
            raise


app = typer.Typer(
    cls=UsageExitGroup,
    help="qfalab - quantum finite automata for L_p = {a^i : p divides i}",
    no_args_is_help=True,
)


def configure_logging(level: str) -> None:
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=console, show_path=False)],
    )
    logging.getLogger().setLevel(level)


@contextmanager
def spinner(description: str) -> Iterator[None]:
    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        console=console,
        transient=True,
    ) as progress:
        progress.add_task(description=description, total=None)
        yield


def _validation_message(error: ValidationError) -> str:
    messages = []
    for detail in error.errors():
        message = detail["msg"]
        messages.append(message[len("Value error, "):] if message.startswith("Value error, ") else message)
    return "; ".join(messages)


def _dispatch(ctx: typer.Context, command: CommandName, **fields: Any) -> None:
    """Validate the command line into a RunConfig, then run it (or hand it to parse_args)."""
    options = {key: value for key, value in fields.items() if value is not None}
    try:
        config = RunConfig(command=command, **ctx.obj, **options)
    except ValidationError as e:
        raise UsageError(_validation_message(e), ctx=ctx)

    captured = _capture.get()
    if captured is not None:
        captured.append(config)
        return
    raise typer.Exit(code=execute(config))


@app.callback()
def options(
    ctx: typer.Context,
    fmt: OutputFormat = typer.Option(OutputFormat.CSV, "--format", help="Report format"),
    output: Optional[Path] = typer.Option(None, help="Write the report to this file instead of stdout"),
    precision: Precision = typer.Option(Precision.SHORT, help="short: 6 significant digits; full: round-trip floats"),
    threads: Optional[int] = typer.Option(None, help="Worker threads (never changes the report)"),
    timing: bool = typer.Option(False, help="Include elapsed_ms in the report metadata"),
    level: Optional[str] = typer.Option(None, "--log-level", help="Logging level for stderr"),
):
    """Construct, simulate and verify QFAs for L_p; reproduce the published tables."""
    try:
        configure_logging((level or log_level()).upper())
    except ValueError as e:
        raise typer.BadParameter(str(e), ctx=ctx, param_hint="--log-level")
    ctx.obj = {
        "format": fmt,
        "output": output,
        "precision": precision,
        "threads": threads if threads is not None else default_threads(),
        "timing": timing,
    }


@app.command()
def epsilon(
    ctx: typer.Context,
    p: Optional[int] = typer.Option(None, help="Prime modulus"),
    eps: Optional[float] = typer.Option(None, help="Target error bound in (0, 1)"),
    g: Optional[int] = typer.Option(None, help="Primitive root generating k_i = g^i"),
    d: Optional[int] = typer.Option(None, help="Sequence length; overrides the length derived from --eps"),
):
    """Worst-case error eps_g of one cyclic sequence."""
    _dispatch(ctx, CommandName.EPSILON, p=p, eps=eps, g=g, d=d)


@app.command()
def simulate(
    ctx: typer.Context,
    p: Optional[int] = typer.Option(None, help="Prime modulus"),
    j: Optional[int] = typer.Option(None, help="Read the word a^j"),
    ks: Optional[str] = typer.Option(None, help="Explicit sequence, comma separated"),
    g: Optional[int] = typer.Option(None, help="Use the cyclic sequence of this generator"),
    d: Optional[int] = typer.Option(None, help="Sequence length for --g or a random sequence"),
    eps: Optional[float] = typer.Option(None, help="Derive the length from eps"),
    seed: int = typer.Option(DEFAULT_MASTER_SEED, help="Master seed for a random sequence"),
    completion: Completion = typer.Option(Completion.HOUSEHOLDER, help="Unitary completion"),
    fast_power_oracle: bool = typer.Option(False, help="Apply the letter transformation as one power"),
):
    """Closed-form acceptance probability against the explicit state-vector simulation."""
    _dispatch(
        ctx, CommandName.SIMULATE, p=p, j=j, ks=ks, g=g, d=d, eps=eps, master_seed=seed,
        completion=completion, fast_power_oracle=fast_power_oracle,
    )


@app.command()
def table1(
    ctx: typer.Context,
    eps: Optional[float] = typer.Option(None, help="Target error bound in (0, 1)"),
    p_list: Optional[str] = typer.Option(None, help="Primes, comma separated (default: reference rows)"),
    g_list: Optional[str] = typer.Option(None, help="One generator per prime (default: reference generators)"),
    trials: Optional[int] = typer.Option(None, help="Random sequences per prime"),
    seed: int = typer.Option(DEFAULT_MASTER_SEED, help="Master seed"),
    exclude_zero_k: bool = typer.Option(False, help="Draw random k_i from 1..p-1"),
):
    """eps_rand against eps_g, one row per prime."""
    _dispatch(
        ctx, CommandName.TABLE1, eps=eps, p_list=p_list, g_list=g_list, trials=trials,
        master_seed=seed, exclude_zero_k=exclude_zero_k,
    )


@app.command()
def table2(
    ctx: typer.Context,
    p: Optional[int] = typer.Option(None, help="Prime modulus"),
    eps: Optional[float] = typer.Option(None, help="Target error bound in (0, 1)"),
    g_list: Optional[str] = typer.Option(None, help="Generators, comma separated (default: reference list)"),
    unrounded_threshold: bool = typer.Option(False, help="Threshold from the unrounded length 2ln(2p)/eps"),
):
    """eps_g for several generators of the same prime."""
    _dispatch(ctx, CommandName.TABLE2, p=p, eps=eps, g_list=g_list, unrounded_threshold=unrounded_threshold)


@app.command()
def mingen(
    ctx: typer.Context,
    p: Optional[int] = typer.Option(None, help="Prime modulus"),
    eps: Optional[float] = typer.Option(None, help="Target error bound in (0, 1)"),
    d: Optional[int] = typer.Option(None, help="Sequence length; overrides --eps"),
):
    """Exhaustive search for the generator with the smallest eps_g."""
    _dispatch(ctx, CommandName.MIN_GEN, p=p, eps=eps, d=d)


@app.command()
def hypothesis(
    ctx: typer.Context,
    p_min: int = typer.Option(2, help="Smallest prime to check"),
    p_max: Optional[int] = typer.Option(None, help="Largest prime to check"),
    all_d: bool = typer.Option(False, help="Check every length d < p instead of the length from --eps"),
    eps: Optional[float] = typer.Option(None, help="Length policy d = required_length(p, eps)"),
):
    """Search cyclic sequences for counterexamples; exit code 2 if one is found."""
    _dispatch(ctx, CommandName.HYPOTHESIS, p_min=p_min, p_max=p_max, all_d=all_d, eps=eps)


@app.command("random-rate")
def random_rate(
    ctx: typer.Context,
    p: Optional[int] = typer.Option(None, help="Prime modulus"),
    eps: Optional[float] = typer.Option(None, help="Target error bound in (0, 1)"),
    trials: Optional[int] = typer.Option(None, help="Random sequences to draw (at least 100)"),
    seed: int = typer.Option(DEFAULT_MASTER_SEED, help="Master seed"),
    exclude_zero_k: bool = typer.Option(False, help="Draw random k_i from 1..p-1"),
):
    """Fraction of random sequences that meet the bound."""
    _dispatch(
        ctx, CommandName.RANDOM_RATE, p=p, eps=eps, trials=trials, master_seed=seed,
        exclude_zero_k=exclude_zero_k,
    )


@app.command()
def compare(
    ctx: typer.Context,
    p_list: Optional[str] = typer.Option(None, help="Primes, comma separated"),
    eps_list: Optional[str] = typer.Option(None, help="Error bounds, comma separated"),
    generators_per_p: Optional[int] = typer.Option(None, help="Generators sampled per prime"),
    grid: Optional[Path] = typer.Option(None, help="YAML file with p_list, eps_list, generators_per_p"),
    trials: Optional[int] = typer.Option(None, help="Random sequences per (p, eps)"),
    seed: int = typer.Option(DEFAULT_MASTER_SEED, help="Master seed"),
):
    """How often cyclic sequences beat the mean random sequence."""
    fields: Dict[str, Any] = {"p_list": p_list, "eps_list": eps_list, "generators_per_p": generators_per_p}
    if grid is not None:
        try:
            with open(grid) as f:
                loaded = yaml.safe_load(f) or {}
        except (OSError, yaml.YAMLError) as e:
            raise UsageError(f"cannot read grid {grid}: {e}", ctx=ctx)
        for key in fields:
            if fields[key] is None:
                fields[key] = loaded.get(key)
    _dispatch(ctx, CommandName.RANDOM_VS_CYCLIC, grid=grid, trials=trials, master_seed=seed, **fields)


@app.command()
def azuma(
    ctx: typer.Context,
    p: Optional[int] = typer.Option(None, help="Prime modulus"),
    d: Optional[int] = typer.Option(None, help="Sequence length"),
    eps: Optional[float] = typer.Option(None, help="Derive the length from eps"),
    lambdas: str = typer.Option(DEFAULT_LAMBDAS, help="Thresholds, comma separated"),
    j: int = typer.Option(1, help="Word length a^j to test"),
    trials: Optional[int] = typer.Option(None, help="Random sequences (at least 1000)"),
    seed: int = typer.Option(DEFAULT_MASTER_SEED, help="Master seed"),
):
    """Empirical tail of the cosine sum against 2e^(-lambda^2/2d)."""
    _dispatch(
        ctx, CommandName.AZUMA_TAIL, p=p, d=d, eps=eps, lambdas=lambdas, j=j, trials=trials,
        master_seed=seed,
    )


@app.command()
def aikps(
    ctx: typer.Context,
    p_list: str = typer.Option(DEFAULT_AIKPS_PRIMES, help="Primes, comma separated"),
    eps_a: float = typer.Option(1.0, help="AIKPS exponent"),
    log_base: LogBase = typer.Option(LogBase.NATURAL, help="Logarithm base for the AIKPS sizes"),
):
    """Exponential sums over the AIKPS set T against (log p)^(-eps_a) |T|."""
    _dispatch(ctx, CommandName.AIKPS_BOUND, p_list=p_list, eps_a=eps_a, log_base=log_base)


@app.command()
def instance(
    ctx: typer.Context,
    p: Optional[int] = typer.Option(None, help="Prime modulus"),
    eps: Optional[float] = typer.Option(None, help="Target error bound in (0, 1)"),
    g: Optional[int] = typer.Option(None, help="Generator of the cyclic sequence"),
    n_random: int = typer.Option(9, help="Random sequences listed next to it"),
    seed: int = typer.Option(DEFAULT_MASTER_SEED, help="Master seed"),
):
    """One cyclic sequence next to individually listed random sequences."""
    _dispatch(ctx, CommandName.INSTANCE, p=p, eps=eps, g=g, n_random=n_random, master_seed=seed)


@app.command()
def states(
    ctx: typer.Context,
    eps: Optional[float] = typer.Option(None, help="Target error bound in (0, 1)"),
    p_list: Optional[str] = typer.Option(None, help="Primes, comma separated (default: reference rows)"),
):
    """QFA state count 2d against the p states of a deterministic automaton."""
    _dispatch(ctx, CommandName.STATES, eps=eps, p_list=p_list)


def parse_args(argv: Sequence[str]) -> RunConfig:
    """Parse and validate a command line without running it."""
    captured: List[RunConfig] = []
    token = _capture.set(captured)
    try:
        code = typer.main.get_command(app).main(args=list(argv), prog_name=PROG_NAME, standalone_mode=False)
    except ClickException as e:
        e.show(file=sys.stderr)
        raise typer.Exit(code=1)
    finally:
        _capture.reset(token)
    if not captured:
        # --help and friends
        raise typer.Exit(code=code if isinstance(code, int) else 0)
    return captured[0]


def _stamp(report: ExperimentReport, config: RunConfig) -> ExperimentReport:
    report.metadata.seed = config.master_seed
    report.metadata.parameters = config.report_parameters()
    report.metadata.overrides = config.overrides
    return report


def _report(
    config: RunConfig,
    rows: List[Dict[str, Any]],
    trials: Optional[int] = None,
    overrides: Optional[List[str]] = None,
) -> ExperimentReport:
    return ExperimentReport(
        kind=config.command,
        rows=rows,
        metadata=ReportMetadata(
            command=config.command,
            seed=config.master_seed,
            trials=trials,
            parameters=config.report_parameters(),
            overrides=config.overrides if overrides is None else overrides,
        ),
    )


def _trials(config: RunConfig) -> int:
    return config.trials if config.trials is not None else DEFAULT_TRIALS[config.command]


def _run_epsilon(config: RunConfig) -> ExperimentReport:
    return _report(config, [experiments.evaluate_cyclic(config.p, config.g, config.eps, config.d)])


def _run_simulate(config: RunConfig) -> ExperimentReport:
    modulus = as_modulus(config.p)
    if config.ks:
        seq = explicit_sequence(modulus, config.ks)
    else:
        d = config.d if config.d is not None else required_length(modulus, config.eps) if config.eps else None
        if d is None:
            raise ValueError(f"{MISSING_PARAMETER}: --ks, --d or --eps")
        if config.g is not None:
            seq = cyclic_sequence(config.g, modulus, d)
        else:
            seq = random_sequence(modulus, d, config.master_seed, 0, config.exclude_zero_k)
    row = experiments.simulate_word(seq, config.j, config.completion, config.fast_power_oracle)
    return _report(config, [row])


def _run_table1(config: RunConfig) -> ExperimentReport:
    p_values = config.p_list or [row.p for row in load_reference_tables().sequence_examples]
    generators = config.g_list or [_reference_generator(p) for p in p_values]
    trials = _trials(config)
    rows = [
        experiments.table1_row(
            p, config.eps, g, trials, config.master_seed, config.threads, config.exclude_zero_k
        )
        for p, g in zip(p_values, generators)
    ]
    return _report(config, rows, trials)


def _reference_generator(p: int) -> int:
    g = load_reference_tables().generator_for(p)
    if g is None:
        raise ValueError(f"{NO_REFERENCE_GENERATOR}: p={p}")
    return g


def _run_table2(config: RunConfig) -> ExperimentReport:
    generators = config.g_list
    if not generators:
        reference = load_reference_tables().different_generators
        if reference.p != config.p:
            raise ValueError(f"{NO_REFERENCE_GENERATOR}: p={config.p}")
        generators = [row.g for row in reference.rows]
    rows = experiments.table2_scan(
        config.p, config.eps, generators, config.threads, config.unrounded_threshold
    )
    return _report(config, rows)


def _run_mingen(config: RunConfig) -> ExperimentReport:
    overrides = config.overrides
    if config.d is not None:
        d = config.d
    else:
        d, capped = experiments.cyclic_length(config.p, config.eps)
        if capped:
            overrides = [*overrides, "d"]
    g_min, eps_min = experiments.minimal_generator(config.p, config.eps, d, config.threads)
    row = {"p": config.p, "eps": config.eps, "d": d, "g_min": g_min, "eps_g_min": eps_min}
    return _report(config, [row], overrides=overrides)


def _run_hypothesis(config: RunConfig) -> ExperimentReport:
    report = experiments.hypothesis_scan(
        config.p_min, config.p_max, config.d_policy, config.eps, config.threads
    )
    return _stamp(report, config)


def _run_random_rate(config: RunConfig) -> ExperimentReport:
    trials = _trials(config)
    rate = experiments.random_success_rate(
        config.p, config.eps, trials, config.master_seed, config.threads, config.exclude_zero_k
    )
    return _report(config, [rate.model_dump()], trials)


def _run_compare(config: RunConfig) -> ExperimentReport:
    report = experiments.random_vs_cyclic(
        config.p_list, config.eps_list, config.generators_per_p, _trials(config),
        config.master_seed, config.threads,
    )
    return _stamp(report, config)


def _run_azuma(config: RunConfig) -> ExperimentReport:
    d = config.d if config.d is not None else required_length(config.p, config.eps)
    report = experiments.azuma_tail_check(
        config.p, d, config.lambdas, _trials(config), config.master_seed, config.j, config.threads
    )
    return _stamp(report, config)


def _run_aikps(config: RunConfig) -> ExperimentReport:
    report = experiments.aikps_report(config.p_list, config.eps_a, config.log_base, config.threads)
    return _stamp(report, config)


def _run_instance(config: RunConfig) -> ExperimentReport:
    report = experiments.instance_comparison(
        config.p, config.eps, config.g, config.n_random, config.master_seed, config.threads
    )
    return _stamp(report, config)


def _run_states(config: RunConfig) -> ExperimentReport:
    p_values = config.p_list or [row.p for row in load_reference_tables().sequence_examples]
    return _stamp(experiments.states_report(p_values, config.eps), config)


_RUNNERS = {
    CommandName.EPSILON: _run_epsilon,
    CommandName.SIMULATE: _run_simulate,
    CommandName.TABLE1: _run_table1,
    CommandName.TABLE2: _run_table2,
    CommandName.MIN_GEN: _run_mingen,
    CommandName.HYPOTHESIS: _run_hypothesis,
    CommandName.RANDOM_RATE: _run_random_rate,
    CommandName.RANDOM_VS_CYCLIC: _run_compare,
    CommandName.AZUMA_TAIL: _run_azuma,
    CommandName.AIKPS_BOUND: _run_aikps,
    CommandName.INSTANCE: _run_instance,
    CommandName.STATES: _run_states,
}


def execute(config: RunConfig) -> int:
    """Run a validated config and write its report; returns the process exit code."""
    started = time.perf_counter()
    try:
        with spinner(f"Running {config.command.value}..."):
            report = _RUNNERS[config.command](config)
    except ValueError as e:
        logger.error(f"{config.command.value} failed: {e}")
        console.print(f"[red]Error: {escape(str(e))}[/red]")
        return 1
    report.metadata.elapsed_ms = round((time.perf_counter() - started) * 1000.0, 3)

    text = render(report, config.format, config.precision, timing=config.timing)
    if config.output is None:
        typer.echo(text, nl=False)
    else:
        try:
            config.output.write_text(text)
        except OSError as e:
            console.print(f"[red]{WRITE_FAILED} {config.output}: {e}[/red]")
            return 1
        console.print(f"[green]Report saved to {config.output}[/green]")

    if report.kind is ExperimentKind.HYPOTHESIS and report.rows:
        console.print(f"[red]{len(report.rows)} counterexample(s) found[/red]")
        return 2
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        config = parse_args(sys.argv[1:] if argv is None else argv)
    except (typer.Exit, Exit) as e:
        return e.exit_code
    return execute(config)


if __name__ == "__main__":
    sys.exit(main())
