import sys
from contextlib import contextmanager
from enum import Enum
from importlib import import_module, resources
from pathlib import Path
from typing import Annotated, Any, Iterator, Optional

import typer
from loguru import logger
from pydantic import BaseModel
from rich.console import Console
from rich.table import Table
from typer.core import TyperGroup

from py_fdp_audit import __version__
from py_fdp_audit.commons.json_model_repository import dump_model_bytes
from py_fdp_audit.commons.observation_csv import read_observations, write_observations, write_table
from py_fdp_audit.core.accountant.end_to_end import steps_to_end_eps
from py_fdp_audit.core.accountant.gdp_accounting import gdp_compose
from py_fdp_audit.core.accountant.mechanism_spec import MechanismSpec
from py_fdp_audit.core.accountant.privacy_loss_distribution import (
    pld_build,
    pld_delta_of_eps,
    pld_eps_curve,
    pld_eps_of_delta,
)
from py_fdp_audit.core.application.audit_settings import AuditSettings
from py_fdp_audit.core.application.loguru_config import LogLevel, configure_logging
from py_fdp_audit.core.application.run_manifest import RunRecorder
from py_fdp_audit.core.attack.thresholding import ThresholdPolicy, sweep_thresholds
from py_fdp_audit.core.auditing.auditor import DEFAULT_THRESHOLD, AuditProtocol, AuditRequest, Auditor
from py_fdp_audit.core.dpsgd.canaries import CanaryKind, CanaryRefresh, CanarySpec
from py_fdp_audit.core.dpsgd.config import BugSpec, CanaryInjection, DpSgdConfig
from py_fdp_audit.core.dpsgd.tasks import DEFAULT_PADDING_FEATURES, TaskKind, make_task
from py_fdp_audit.core.dpsgd.trainer import DpSgdTrainer
from py_fdp_audit.core.estimators.audit_result import AuditMethod
from py_fdp_audit.core.mechanisms.observation_set import ObservationPair
from py_fdp_audit.core.mechanisms.simulators import (
    simulate_randomized_response,
    simulate_subsampled_gaussian_pair,
)
from py_fdp_audit.core.pipeline.pipeline_runner import PipelineRunner
from py_fdp_audit.core.pipeline.stage_properties import MechanismKind, TrainMode
from py_fdp_audit.core.pipeline.stages import RATE_CURVE_HEADER
from py_fdp_audit.core.tradeoff.accountant_approximation import TradeoffCombiner, approx_tradeoff_from_accountant
from py_fdp_audit.core.tradeoff.gdp_conversion import gdp_mu_of_eps
from py_fdp_audit.core.tradeoff.tradeoff_curve import TradeoffCurve, tradeoff_eps_delta, tradeoff_gdp

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VIOLATION = 2

DEFAULT_DELTA = 1e-5
DEFAULT_GAMMA = 0.05

# typer re-exports click's Exit; the rest of click's exceptions live in the same module
click_exceptions = import_module(typer.Exit.__module__)


class AuditCommandGroup(TyperGroup):
    """
    Reserves exit code 2 for a violated claim.

    Click exits usage errors with code 2 as well, so parsing failures such as an unknown
    option, a bad choice or a missing required option are reported here and exit with 1.
    """

    def main(self, *args: Any, standalone_mode: bool = True, **kwargs: Any) -> Any:
        try:
            outcome = super().main(*args, standalone_mode=False, **kwargs)
        except click_exceptions.ClickException as error:
            if not standalone_mode:
                raise
            error.show()
            sys.exit(EXIT_ERROR)
        except click_exceptions.Abort:
            if not standalone_mode:
                raise
            typer.echo("Aborted!", err=True)
            sys.exit(EXIT_ERROR)
        if not standalone_mode:
            return outcome
        sys.exit(outcome if isinstance(outcome, int) else EXIT_OK)


app = typer.Typer(
    cls=AuditCommandGroup,
    name="fdp-audit",
    help="Empirical privacy auditing with f-DP trade-off curves.",
    no_args_is_help=True,
    add_completion=False,
)
console = Console()


class TradeoffKindOption(str, Enum):
    EpsDelta = "eps-delta"
    Gdp = "gdp"
    PldApprox = "pld-approx"


class AccountantAnswer(BaseModel):
    spec: MechanismSpec
    delta: Optional[float] = None
    epsilon: Optional[float] = None
    delta_of_epsilon: Optional[float] = None


class ComposeAnswer(BaseModel):
    mus: list[float] = []
    mu: Optional[float] = None
    mu_step: Optional[float] = None
    steps: Optional[int] = None
    q: Optional[float] = None
    delta: Optional[float] = None
    epsilon: Optional[float] = None
    estimate: bool = False


def settings_of(ctx: typer.Context) -> AuditSettings:
    return ctx.obj if isinstance(ctx.obj, AuditSettings) else AuditSettings()


@contextmanager
def exit_on_error(command: str) -> Iterator[None]:
    """Maps any failure inside a command to exit code 1 after logging it."""
    try:
        yield
    except typer.Exit:
        raise
    except Exception as error:
        logger.error(f"[{command.upper()} FAILED] {error}")
        raise typer.Exit(code=EXIT_ERROR) from error


def emit(model: BaseModel) -> bytes:
    payload = dump_model_bytes(model)
    typer.echo(payload.decode(), nl=False)
    return payload


def write_json(path: Path, model: BaseModel) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dump_model_bytes(model))


def load_pair(path: Path) -> ObservationPair:
    scores_d, scores_dprime = read_observations(path)
    return ObservationPair.from_arrays(scores_d, scores_dprime)


def parse_floats(text: Optional[str]) -> tuple[float, ...]:
    if not text:
        return ()
    return tuple(float(item) for item in text.split(",") if item.strip())


def parse_window(text: Optional[str]) -> Optional[tuple[int, int]]:
    if text is None:
        return None
    start, separator, stop = text.partition(":")
    if not separator:
        raise typer.BadParameter(f"expected START:STOP, got {text!r}", param_hint="--window")
    return int(start), int(stop)


def resolve_config(name: str) -> Path:
    """A config path, or the name of a bundled config such as `fig3` or `bug-noise.toml`."""
    path = Path(name)
    if path.is_file():
        return path
    bundled = resources.files("py_fdp_audit.configs").joinpath(name if name.endswith(".toml") else f"{name}.toml")
    if bundled.is_file():
        return Path(str(bundled))
    raise FileNotFoundError(f"[CONFIG NOT FOUND] {name} is neither a file nor a bundled config")


def resolve_gamma(gamma: Optional[float], confidence: Optional[float]) -> float:
    if gamma is not None and confidence is not None:
        raise ValueError("[CONFLICTING OPTIONS] set at most one of --gamma and --confidence")
    if confidence is not None:
        if not 0.0 < confidence < 1.0:
            raise ValueError(f"[INVALID CONFIDENCE] --confidence must lie in (0, 1), got {confidence}")
        return 1.0 - confidence
    return DEFAULT_GAMMA if gamma is None else gamma


def resolve_protocol(protocol: Optional[AuditProtocol], sweep: bool) -> AuditProtocol:
    if not sweep:
        return protocol or AuditProtocol.Fixed
    if protocol is not None and protocol is not AuditProtocol.Sweep:
        raise ValueError(f"[CONFLICTING OPTIONS] --sweep cannot be combined with --protocol {protocol.value}")
    return AuditProtocol.Sweep


def audit_request(
    method: AuditMethod,
    delta: Optional[float],
    gamma: Optional[float],
    confidence: Optional[float],
    protocol: Optional[AuditProtocol],
    sweep: bool,
    threshold: float,
    threshold_policy: ThresholdPolicy,
    threshold_grid: Optional[str],
    holdout_fraction: float,
    q: float,
    steps: int,
    seed: int,
) -> AuditRequest:
    if delta is None:
        delta = 0.0 if method is AuditMethod.KATZ else DEFAULT_DELTA
    return AuditRequest(
        method=method,
        delta=delta,
        gamma=resolve_gamma(gamma, confidence),
        protocol=resolve_protocol(protocol, sweep),
        threshold=threshold,
        threshold_policy=threshold_policy,
        threshold_grid=parse_floats(threshold_grid),
        holdout_fraction=holdout_fraction,
        q=q,
        steps=steps,
        seed=seed,
    )


def version_callback(value: bool) -> None:
    if value:
        typer.echo(__version__)
        raise typer.Exit()


@app.callback()
def main(
    ctx: typer.Context,
    verbose: Annotated[bool, typer.Option("--verbose", "-v", help="Log at DEBUG level.")] = False,
    quiet: Annotated[bool, typer.Option("--quiet", "-q", help="Log warnings and errors only.")] = False,
    version: Annotated[
        bool, typer.Option("--version", callback=version_callback, is_eager=True, help="Print the version.")
    ] = False,
) -> None:
    settings = AuditSettings()
    config = settings.loguru_config
    if verbose:
        config = config.model_copy(update={"log_level": LogLevel.DEBUG})
    elif quiet:
        config = config.model_copy(update={"log_level": LogLevel.WARNING})
    configure_logging(config)
    ctx.obj = settings


MethodOption = Annotated[AuditMethod, typer.Option("--method", help="Lower-bound estimator.")]
DeltaOption = Annotated[
    Optional[float], typer.Option("--delta", help="Target delta; defaults to 1e-5, or 0 for katz.")
]
GammaOption = Annotated[Optional[float], typer.Option("--gamma", help="Confidence is 1 - gamma; defaults to 0.05.")]
ConfidenceOption = Annotated[Optional[float], typer.Option("--confidence", help="Confidence level, e.g. 0.95.")]
ProtocolOption = Annotated[
    Optional[AuditProtocol], typer.Option("--protocol", help="How the threshold is chosen; defaults to fixed.")
]
SweepOption = Annotated[bool, typer.Option("--sweep", help="Shorthand for --protocol sweep.")]
ThresholdOption = Annotated[float, typer.Option("--threshold", help="Fixed decision threshold.")]
PolicyOption = Annotated[ThresholdPolicy, typer.Option("--threshold-policy", help="Candidate thresholds of a sweep.")]
GridOption = Annotated[Optional[str], typer.Option("--threshold-grid", help="Comma-separated thresholds for the grid policy.")]
HoldoutOption = Annotated[float, typer.Option("--holdout-fraction", help="Share of trials used to pick the threshold.")]
QOption = Annotated[float, typer.Option("--q", help="Sampling rate of the audited mechanism.")]
StepsOption = Annotated[int, typer.Option("--steps", help="Compositions behind each observation.")]
SeedOption = Annotated[int, typer.Option("--seed", help="Root seed.")]
OutOption = Annotated[Optional[Path], typer.Option("--out", help="Output file; defaults under FDP_AUDIT_OUTPUT_DIR.")]


@app.command()
def simulate(
    ctx: typer.Context,
    mechanism: Annotated[MechanismKind, typer.Option("--mechanism", help="gaussian, subsampled or rr.")] = MechanismKind.Gaussian,
    sigma: Annotated[Optional[float], typer.Option("--sigma", help="Noise multiplier.")] = None,
    eps: Annotated[Optional[float], typer.Option("--eps", help="Theoretical epsilon to match instead of --sigma.")] = None,
    delta: Annotated[float, typer.Option("--delta")] = DEFAULT_DELTA,
    q: QOption = 1.0,
    n: Annotated[int, typer.Option("--n", help="Trials per world.")] = 1000,
    seed: SeedOption = 0,
    out: OutOption = None,
) -> None:
    """Simulate a closed-form mechanism and write its observations as CSV."""
    settings = settings_of(ctx)
    out = out or settings.output_path("observations.csv")
    recorder = RunRecorder("simulate", dict(ctx.params), seed)
    with exit_on_error("simulate"):
        if mechanism is MechanismKind.RandomizedResponse:
            if eps is None:
                raise ValueError("[MISSING PARAMETER] rr needs --eps")
            pair = simulate_randomized_response(eps, n, seed)
        else:
            if (sigma is None) == (eps is None):
                raise ValueError("[MISSING PARAMETER] set exactly one of --sigma and --eps")
            noise = sigma if sigma is not None else 1.0 / gdp_mu_of_eps(eps or 0.0, delta)
            rate = q if mechanism is MechanismKind.SubsampledGaussian else 1.0
            pair = simulate_subsampled_gaussian_pair(noise, rate, n, seed)
        write_observations(out, *pair.to_arrays())
        recorder.finish(out, [out])
    logger.success(f"[SIMULATE DONE] {n} observations per world written to {out}")


@app.command()
def train(
    ctx: typer.Context,
    task: Annotated[TaskKind, typer.Option("--task")] = TaskKind.Logistic,
    mode: Annotated[TrainMode, typer.Option("--mode")] = TrainMode.Whitebox,
    q: QOption = 0.01,
    eta: Annotated[float, typer.Option("--eta", help="Learning rate.")] = 0.05,
    sigma: Annotated[float, typer.Option("--sigma", help="Claimed noise multiplier.")] = 1.0,
    clip: Annotated[float, typer.Option("--clip", help="Clip norm C.")] = 1.0,
    steps: Annotated[int, typer.Option("--steps")] = 1000,
    qc: Annotated[float, typer.Option("--qc", help="Canary inclusion rate.")] = 1.0,
    runs: Annotated[int, typer.Option("--runs", help="Independent training runs.")] = 1,
    window: Annotated[Optional[str], typer.Option("--window", help="Record steps START:STOP only.")] = None,
    bug: Annotated[str, typer.Option("--bug", help="none, clip-after-avg, biased-noise[:k], noise-scale:s")] = "none",
    canary: Annotated[CanaryKind, typer.Option("--canary")] = CanaryKind.Dirac,
    canary_refresh: Annotated[CanaryRefresh, typer.Option("--canary-refresh")] = CanaryRefresh.Static,
    canary_scale: Annotated[float, typer.Option("--canary-scale")] = 1.0,
    canary_injection: Annotated[CanaryInjection, typer.Option("--canary-injection")] = CanaryInjection.PostNoise,
    hidden: Annotated[int, typer.Option("--hidden")] = 16,
    padding: Annotated[int, typer.Option("--padding", help="All-zero input features.")] = DEFAULT_PADDING_FEATURES,
    jobs: Annotated[Optional[int], typer.Option("--jobs")] = None,
    seed: SeedOption = 0,
    out: OutOption = None,
) -> None:
    """Train DP-SGD on a synthetic task and write the canary observations as CSV."""
    settings = settings_of(ctx)
    out = out or settings.output_path("observations.csv")
    recorder = RunRecorder("train", dict(ctx.params), seed)
    with exit_on_error("train"):
        cfg = DpSgdConfig(
            q=q,
            eta=eta,
            sigma=sigma,
            clip=clip,
            steps=steps,
            qc=qc,
            seed=seed,
            bug=BugSpec.parse(bug),
            runs=runs,
            window=parse_window(window),
            canary_injection=canary_injection,
        )
        dataset = make_task(task, seed=seed, padding_features=padding)
        trainer = DpSgdTrainer(dataset.build_model(hidden), dataset, cfg)
        spec = CanarySpec(kind=canary, refresh=canary_refresh, scale=canary_scale)
        match mode:
            case TrainMode.Whitebox:
                pair = trainer.train_whitebox(spec).pair
            case TrainMode.Blackbox:
                pair = trainer.train_blackbox(spec, jobs=jobs or settings.jobs)
        write_observations(out, *pair.to_arrays())
        recorder.finish(out, [out])
    logger.success(f"[TRAIN DONE] {pair.d.size} observations per world written to {out}")


@app.command()
def sweep(
    ctx: typer.Context,
    observations: Annotated[Path, typer.Argument(help="Observation CSV.")],
    policy: PolicyOption = ThresholdPolicy.Midpoints,
    grid: GridOption = None,
    out: OutOption = None,
) -> None:
    """Write the empirical (alpha, beta) rate curve along candidate thresholds."""
    out = out or settings_of(ctx).output_path("sweep.csv")
    recorder = RunRecorder("sweep", dict(ctx.params))
    with exit_on_error("sweep"):
        scores_d, scores_dprime = read_observations(observations)
        curve = sweep_thresholds(scores_d, scores_dprime, policy, parse_floats(grid) or None)
        write_table(out, RATE_CURVE_HEADER, curve.to_csv_rows())
        recorder.finish(out, [out], [observations])
    logger.success(f"[SWEEP DONE] {len(curve)} thresholds written to {out}")


@app.command()
def audit(
    ctx: typer.Context,
    observations: Annotated[Path, typer.Argument(help="Observation CSV.")],
    method: MethodOption = AuditMethod.FDP_CP,
    delta: DeltaOption = None,
    gamma: GammaOption = None,
    confidence: ConfidenceOption = None,
    protocol: ProtocolOption = None,
    sweep: SweepOption = False,
    threshold: ThresholdOption = DEFAULT_THRESHOLD,
    threshold_policy: PolicyOption = ThresholdPolicy.Midpoints,
    threshold_grid: GridOption = None,
    holdout_fraction: HoldoutOption = 0.5,
    q: QOption = 1.0,
    steps: StepsOption = 1,
    seed: SeedOption = 0,
    out: OutOption = None,
) -> None:
    """Compute a lower bound on the privacy parameters from an observation file."""
    out = out or settings_of(ctx).output_path("audit.json")
    recorder = RunRecorder("audit", dict(ctx.params), seed)
    with exit_on_error("audit"):
        request = audit_request(
            method,
            delta,
            gamma,
            confidence,
            protocol,
            sweep,
            threshold,
            threshold_policy,
            threshold_grid,
            holdout_fraction,
            q,
            steps,
            seed,
        )
        report = Auditor().audit(load_pair(observations), request)
        write_json(out, report)
        recorder.finish(out, [out], [observations])
        emit(report)


@app.command()
def verify(
    ctx: typer.Context,
    observations: Annotated[Path, typer.Argument(help="Observation CSV.")],
    claimed_eps: Annotated[float, typer.Option("--claimed-eps", help="The epsilon the implementation claims.")],
    method: MethodOption = AuditMethod.FDP_CP,
    delta: DeltaOption = None,
    gamma: GammaOption = None,
    confidence: ConfidenceOption = None,
    protocol: ProtocolOption = None,
    sweep: SweepOption = False,
    threshold: ThresholdOption = DEFAULT_THRESHOLD,
    threshold_policy: PolicyOption = ThresholdPolicy.Midpoints,
    threshold_grid: GridOption = None,
    holdout_fraction: HoldoutOption = 0.5,
    q: QOption = 1.0,
    steps: StepsOption = 1,
    seed: SeedOption = 0,
    out: OutOption = None,
) -> None:
    """Check a claimed epsilon; exits 2 when the empirical lower bound exceeds it."""
    out = out or settings_of(ctx).output_path("verify.json")
    recorder = RunRecorder("verify", dict(ctx.params), seed)
    with exit_on_error("verify"):
        request = audit_request(
            method,
            delta,
            gamma,
            confidence,
            protocol,
            sweep,
            threshold,
            threshold_policy,
            threshold_grid,
            holdout_fraction,
            q,
            steps,
            seed,
        )
        report = Auditor().verify(load_pair(observations), claimed_eps, request)
        write_json(out, report)
        recorder.finish(out, [out], [observations])
        emit(report)
    if report.violation:
        raise typer.Exit(code=EXIT_VIOLATION)


@app.command()
def accountant(
    ctx: typer.Context,
    sigma: Annotated[float, typer.Option("--sigma", help="Noise multiplier.")],
    q: QOption = 1.0,
    steps: StepsOption = 1,
    delta: Annotated[Optional[float], typer.Option("--delta", help="Report epsilon at this delta.")] = None,
    eps: Annotated[Optional[float], typer.Option("--eps", help="Report delta at this epsilon.")] = None,
    curve: Annotated[Optional[Path], typer.Option("--curve", help="Write (delta, epsilon) samples as CSV.")] = None,
    curve_points: Annotated[int, typer.Option("--curve-points")] = 100,
) -> None:
    """Query the numerical accountant of a (sub-sampled) Gaussian mechanism."""
    recorder = RunRecorder("accountant", dict(ctx.params))
    with exit_on_error("accountant"):
        spec = MechanismSpec(sigma=sigma, q=q, steps=steps)
        built = pld_build(spec)
        target_delta = delta if delta is not None or eps is not None else DEFAULT_DELTA
        answer = AccountantAnswer(
            spec=spec,
            delta=target_delta,
            epsilon=pld_eps_of_delta(built, target_delta) if target_delta is not None else None,
            delta_of_epsilon=pld_delta_of_eps(built, eps) if eps is not None else None,
        )
        if curve is not None:
            deltas, epsilons = pld_eps_curve(built, curve_points, target_delta or DEFAULT_DELTA)
            write_table(curve, ("delta", "epsilon"), zip(deltas.tolist(), epsilons.tolist()))
            recorder.finish(curve, [curve])
        emit(answer)


@app.command()
def tradeoff(
    ctx: typer.Context,
    kind: Annotated[TradeoffKindOption, typer.Option("--kind")] = TradeoffKindOption.Gdp,
    mu: Annotated[Optional[float], typer.Option("--mu")] = None,
    eps: Annotated[Optional[float], typer.Option("--eps")] = None,
    delta: Annotated[float, typer.Option("--delta")] = DEFAULT_DELTA,
    sigma: Annotated[Optional[float], typer.Option("--sigma", help="Noise multiplier for pld-approx.")] = None,
    q: QOption = 1.0,
    steps: StepsOption = 1,
    lines: Annotated[int, typer.Option("--lines", help="Supporting lines for pld-approx.")] = 100,
    combiner: Annotated[TradeoffCombiner, typer.Option("--combiner")] = TradeoffCombiner.Max,
    points: Annotated[int, typer.Option("--points", help="Alpha grid size.")] = 1001,
    out: OutOption = None,
) -> None:
    """Write a trade-off curve as (alpha, beta) CSV."""
    out = out or settings_of(ctx).output_path("tradeoff.csv")
    recorder = RunRecorder("tradeoff", dict(ctx.params))
    with exit_on_error("tradeoff"):
        curve: TradeoffCurve
        match kind:
            case TradeoffKindOption.Gdp:
                if mu is None:
                    raise ValueError("[MISSING PARAMETER] --kind gdp needs --mu")
                curve = tradeoff_gdp(mu)
            case TradeoffKindOption.EpsDelta:
                if eps is None:
                    raise ValueError("[MISSING PARAMETER] --kind eps-delta needs --eps")
                curve = tradeoff_eps_delta(eps, delta)
            case TradeoffKindOption.PldApprox:
                if sigma is None:
                    raise ValueError("[MISSING PARAMETER] --kind pld-approx needs --sigma")
                built = pld_build(MechanismSpec(sigma=sigma, q=q, steps=steps))
                curve = approx_tradeoff_from_accountant(built.eps_of_delta, lines, delta, combiner)
        alphas, betas = curve.sample(points)
        write_table(out, ("alpha", "beta"), zip(alphas.tolist(), betas.tolist()))
        recorder.finish(out, [out])
    logger.success(f"[TRADEOFF DONE] {points} points of the {kind.value} curve written to {out}")


@app.command()
def compose(
    ctx: typer.Context,
    mus: Annotated[Optional[list[float]], typer.Option("--mus", help="GDP parameters to compose; repeat the flag.")] = None,
    mu_step: Annotated[Optional[float], typer.Option("--mu-step", help="Audited per-step mu.")] = None,
    steps: StepsOption = 1,
    q: QOption = 1.0,
    delta: Annotated[float, typer.Option("--delta")] = DEFAULT_DELTA,
) -> None:
    """Compose GDP guarantees, or extrapolate a per-step audit to an end-to-end epsilon estimate."""
    with exit_on_error("compose"):
        if (mus is None) == (mu_step is None):
            raise ValueError("[MISSING PARAMETER] set either --mus or --mu-step")
        if mus is not None:
            answer = ComposeAnswer(mus=mus, mu=gdp_compose(mus))
        else:
            assert mu_step is not None
            answer = ComposeAnswer(
                mu_step=mu_step,
                steps=steps,
                q=q,
                delta=delta,
                epsilon=steps_to_end_eps(mu_step, steps, q, delta),
                estimate=True,
            )
        emit(answer)


def summary_table(rows: list[Any]) -> Table:
    table = Table(title="audit summary")
    for column in ("group", "method", "cells", "true eps", "mean eps lower", "violations"):
        table.add_column(column)
    for row in rows:
        table.add_row(
            row.group,
            row.method.value,
            str(row.cells),
            "-" if row.true_eps is None else f"{row.true_eps:.4f}",
            f"{row.mean_eps_lower:.4f}",
            "-" if row.violations is None else str(row.violations),
        )
    return table


@app.command()
def pipeline(
    ctx: typer.Context,
    config: Annotated[str, typer.Argument(help="Pipeline config file, or a bundled name (fig3, bug-noise).")],
    overrides: Annotated[
        Optional[list[str]], typer.Option("--set", help="Override section.field=value; repeat the flag.")
    ] = None,
    seed: Annotated[Optional[int], typer.Option("--seed")] = None,
    jobs: Annotated[Optional[int], typer.Option("--jobs")] = None,
    out: Annotated[Optional[Path], typer.Option("--out", help="Output directory.")] = None,
) -> None:
    """Run simulate/train, sweep, audit, compose and verify stages from one config."""
    settings = settings_of(ctx)
    output_dir = out or settings.output_dir
    recorder = RunRecorder("pipeline", dict(ctx.params), seed)
    with exit_on_error("pipeline"):
        config_path = resolve_config(config)
        runner = PipelineRunner(config_path, output_dir, overrides or (), seed=seed, jobs=jobs)
        result = runner.run()
        recorder.finish(runner.result_path, runner.artifacts, [config_path])
        console.print(summary_table(result.summary))
    if result.violation:
        raise typer.Exit(code=EXIT_VIOLATION)
