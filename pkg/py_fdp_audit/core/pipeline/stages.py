from concurrent.futures import ThreadPoolExecutor
from typing import ClassVar, Iterator, Optional

from loguru import logger

from py_fdp_audit.commons.observation_csv import write_observations, write_table
from py_fdp_audit.commons.rng import derive_seed
from py_fdp_audit.core.accountant.end_to_end import steps_to_end_eps
from py_fdp_audit.core.attack.thresholding import sweep_thresholds
from py_fdp_audit.core.auditing.auditor import Auditor
from py_fdp_audit.core.dpsgd.canaries import CanarySpec
from py_fdp_audit.core.dpsgd.config import BugKind, BugSpec, DpSgdConfig
from py_fdp_audit.core.dpsgd.tasks import make_task
from py_fdp_audit.core.dpsgd.trainer import DpSgdTrainer
from py_fdp_audit.core.estimators.audit_result import AuditMethod
from py_fdp_audit.core.mechanisms.simulators import (
    simulate_randomized_response,
    simulate_subsampled_gaussian_pair,
)
from py_fdp_audit.core.pipeline.pipeline_state import (
    CellAudit,
    CellVerification,
    ComposeEstimate,
    ObservationCell,
    PipelineState,
)
from py_fdp_audit.core.pipeline.stage import PipelineStage
from py_fdp_audit.core.pipeline.stage_properties import (
    AuditProperties,
    ComposeProperties,
    MechanismKind,
    PipelineProperties,
    SimulateProperties,
    SweepProperties,
    TrainMode,
    TrainProperties,
    VerifyProperties,
)
from py_fdp_audit.core.tradeoff.gdp_conversion import gdp_eps_of_delta, gdp_mu_of_eps

RATE_CURVE_HEADER = ("threshold", "alpha", "beta")


class PipelineConfigurationError(ValueError): ...


class EmptyObservationError(Exception): ...


class ObservationStage(PipelineStage):
    """Produces the observation cells, from closed-form simulation or from DP-SGD training."""

    pipeline: PipelineProperties
    simulate: Optional[SimulateProperties]
    train: Optional[TrainProperties]

    def post_construct(self) -> None:
        if (self.simulate is None) == (self.train is None):
            raise PipelineConfigurationError(
                "[INVALID PIPELINE CONFIG] exactly one of the [simulate] and [train] sections is required"
            )
        if self.simulate is not None and self.simulate.mechanism is not MechanismKind.RandomizedResponse:
            if any(eps <= 0.0 for eps in self.simulate.epsilons):
                raise PipelineConfigurationError("[INVALID PIPELINE CONFIG] Gaussian epsilons must be positive")

    def run(self, state: PipelineState) -> None:
        cells = list(self._simulated_cells() if self.simulate is not None else self._trained_cells())
        for cell in cells:
            if cell.pair.d.size == 0 or cell.pair.dprime.size == 0:
                raise EmptyObservationError(f"[EMPTY OBSERVATIONS] cell {cell.label} produced no observations")
            if self.pipeline.keep_observations:
                path = state.output_dir / "observations" / f"{cell.label}.csv"
                write_observations(path, *cell.pair.to_arrays())
                state.artifacts.append(path)
        state.cells.extend(cells)
        logger.success(f"[OBSERVATIONS READY] {len(cells)} cells")

    def _simulated_cells(self) -> Iterator[ObservationCell]:
        props = self.simulate
        assert props is not None
        values = props.sigmas or props.epsilons
        for value_index, value in enumerate(values):
            for size_index, n in enumerate(props.sizes):
                for repeat in range(self.pipeline.repeats):
                    seed = derive_seed(self.pipeline.seed, value_index, size_index, repeat)
                    yield self._simulate_cell(props, value, n, repeat, seed)

    def _simulate_cell(
        self, props: SimulateProperties, value: float, n: int, repeat: int, seed: int
    ) -> ObservationCell:
        if props.mechanism is MechanismKind.RandomizedResponse:
            return ObservationCell(
                group=f"{props.mechanism.value}_eps{value:g}_n{n}",
                repeat=repeat,
                parameters={"mechanism": props.mechanism.value, "epsilon": value, "n": n},
                pair=simulate_randomized_response(value, n, seed),
                true_eps=value,
            )
        sigma = value if props.sigmas else 1.0 / gdp_mu_of_eps(value, props.delta)
        q = props.q if props.mechanism is MechanismKind.SubsampledGaussian else 1.0
        # the subsampled guarantee is not a GDP curve; only q = 1 has a closed-form epsilon
        true_eps = gdp_eps_of_delta(1.0 / sigma, props.delta) if q == 1.0 else None
        noise_tag = f"sigma{value:g}" if props.sigmas else f"eps{value:g}"
        return ObservationCell(
            group=f"{props.mechanism.value}_{noise_tag}_n{n}",
            repeat=repeat,
            parameters={"mechanism": props.mechanism.value, "sigma": sigma, "q": q, "n": n},
            pair=simulate_subsampled_gaussian_pair(sigma, q, n, seed),
            true_eps=true_eps,
        )

    def _bugs(self, props: TrainProperties) -> list[tuple[str, BugSpec, Optional[float]]]:
        if not props.true_epsilons:
            bug = BugSpec.parse(props.bug)
            return [(bug.kind.value, bug, None)]
        return [
            (f"eps{eps:g}", BugSpec(kind=BugKind.NoiseScale, actual_sigma=1.0 / gdp_mu_of_eps(eps, props.delta)), eps)
            for eps in props.true_epsilons
        ]

    def _trained_cells(self) -> Iterator[ObservationCell]:
        props = self.train
        assert props is not None
        task = make_task(props.task, seed=self.pipeline.seed, padding_features=props.padding_features)
        canary = CanarySpec(kind=props.canary, refresh=props.canary_refresh, scale=props.canary_scale)
        for bug_index, (tag, bug, true_eps) in enumerate(self._bugs(props)):
            for repeat in range(self.pipeline.repeats):
                cfg = DpSgdConfig(
                    q=props.q,
                    eta=props.eta,
                    sigma=props.sigma,
                    clip=props.clip,
                    steps=props.steps,
                    qc=props.qc,
                    seed=derive_seed(self.pipeline.seed, bug_index, repeat),
                    bug=bug,
                    runs=props.runs,
                    window=props.window,
                    canary_injection=props.canary_injection,
                )
                trainer = DpSgdTrainer(task.build_model(props.hidden), task, cfg)
                match props.mode:
                    case TrainMode.Whitebox:
                        pair = trainer.train_whitebox(canary).pair
                    case TrainMode.Blackbox:
                        pair = trainer.train_blackbox(canary, jobs=self.pipeline.jobs)
                if true_eps is None and bug.kind is BugKind.Nothing and props.mode is TrainMode.Whitebox and props.qc == 1.0:
                    true_eps = gdp_eps_of_delta(1.0 / cfg.noise_multiplier, props.delta)
                logger.debug(f"[TRAINED CELL] {tag} repeat {repeat}: {pair.d.size} observations per world")
                yield ObservationCell(
                    group=f"{props.task.value}_{props.mode.value}_{tag}",
                    repeat=repeat,
                    parameters={
                        "task": props.task.value,
                        "mode": props.mode.value,
                        "bug": bug.kind.value,
                        "sigma": props.sigma,
                        "noise_multiplier": cfg.noise_multiplier,
                        "steps": props.steps,
                    },
                    pair=pair,
                    true_eps=true_eps,
                )


class SweepStage(PipelineStage):
    """Writes the empirical rate curve of every cell."""

    required: ClassVar[bool] = False

    sweep: SweepProperties

    def run(self, state: PipelineState) -> None:
        for cell in state.cells:
            scores_d, scores_dprime = cell.pair.to_arrays()
            curve = sweep_thresholds(scores_d, scores_dprime, self.sweep.policy, self.sweep.grid or None)
            state.curves[cell.label] = curve
            path = state.output_dir / "sweeps" / f"{cell.label}.csv"
            write_table(path, RATE_CURVE_HEADER, curve.to_csv_rows())
            state.artifacts.append(path)
        logger.success(f"[SWEEP DONE] {len(state.cells)} rate curves")


class AuditStage(PipelineStage):
    """Audits every cell with every configured method."""

    pipeline: PipelineProperties
    audit: AuditProperties
    auditor: Auditor

    def _audit_cell(self, cell: ObservationCell) -> list[CellAudit]:
        return [
            CellAudit(
                label=cell.label,
                group=cell.group,
                true_eps=cell.true_eps,
                report=self.auditor.audit(cell.pair, self.audit.request(method, self.pipeline.seed)),
            )
            for method in self.audit.methods
        ]

    def run(self, state: PipelineState) -> None:
        with ThreadPoolExecutor(max_workers=self.pipeline.jobs) as pool:
            for audits in pool.map(self._audit_cell, state.cells):
                state.audits.extend(audits)
        logger.success(f"[AUDIT DONE] {len(state.audits)} audits over {len(state.cells)} cells")


class ComposeStage(PipelineStage):
    """Extrapolates every f-DP per-step audit to an end-to-end epsilon estimate."""

    required: ClassVar[bool] = False

    compose: ComposeProperties

    def run(self, state: PipelineState) -> None:
        for audit in state.audits:
            result = audit.report.result
            if not result.method.is_fdp:
                continue
            state.estimates.append(
                ComposeEstimate(
                    label=audit.label,
                    method=result.method,
                    mu_step=result.mu_lower,
                    steps=self.compose.steps,
                    q=self.compose.q,
                    delta=self.compose.delta,
                    eps_estimate=steps_to_end_eps(result.mu_lower, self.compose.steps, self.compose.q, self.compose.delta),
                )
            )
        logger.success(f"[COMPOSE DONE] {len(state.estimates)} end-to-end estimates")


class VerifyStage(PipelineStage):
    """Checks every cell's bound for the verify method against the claimed epsilon."""

    required: ClassVar[bool] = False

    pipeline: PipelineProperties
    audit: AuditProperties
    verify: VerifyProperties
    auditor: Auditor

    @property
    def method(self) -> AuditMethod:
        return self.verify.method or self.audit.methods[0]

    def run(self, state: PipelineState) -> None:
        audited = {(audit.label, audit.report.result.method): audit.report for audit in state.audits}
        for cell in state.cells:
            report = audited.get((cell.label, self.method))
            if report is None:
                report = self.auditor.audit(cell.pair, self.audit.request(self.method, self.pipeline.seed))
            state.verifications.append(
                CellVerification(
                    label=cell.label,
                    group=cell.group,
                    true_eps=cell.true_eps,
                    report=self.auditor.judge(report, self.verify.claimed_eps),
                )
            )
        flagged = sum(verification.report.violation for verification in state.verifications)
        logger.info(f"[VERIFY DONE] {flagged}/{len(state.verifications)} cells exceed the claimed epsilon")


PIPELINE_STAGES: tuple[type[PipelineStage], ...] = (
    ObservationStage,
    SweepStage,
    AuditStage,
    ComposeStage,
    VerifyStage,
)
