from pathlib import Path
from typing import Iterable, Optional, Sequence

from loguru import logger

from py_fdp_audit.commons.json_model_repository import JsonModelRepository
from py_fdp_audit.commons.observation_csv import write_table
from py_fdp_audit.core.auditing.auditor import Auditor
from py_fdp_audit.core.pipeline.pipeline_context import PipelineContext
from py_fdp_audit.core.pipeline.pipeline_state import PipelineResult, PipelineState
from py_fdp_audit.core.pipeline.stage import PipelineStage, StageLifeCycle
from py_fdp_audit.core.pipeline.stage_properties import ALL_STAGE_PROPERTIES, PipelineProperties
from py_fdp_audit.core.pipeline.stages import PIPELINE_STAGES

RESULT_FILE = "result.json"
AUDITS_FILE = "audits.csv"
SUMMARY_FILE = "summary.csv"
ESTIMATES_FILE = "estimates.csv"

AUDITS_HEADER = (
    "label", "group", "method", "protocol", "threshold", "fp", "fn", "n",
    "mu_lower", "eps_lower", "sigma_lower", "true_eps",
)
SUMMARY_HEADER = (
    "group", "method", "cells", "true_eps", "mean_eps_lower", "std_eps_lower", "mean_mu_lower", "violations",
)
ESTIMATES_HEADER = ("label", "method", "mu_step", "steps", "q", "delta", "eps_estimate")


class PipelineStageError(Exception):
    def __init__(self, stage: str, cause: BaseException) -> None:
        super().__init__(f"[PIPELINE STAGE FAILED] {stage}: {cause}")
        self.stage = stage
        self.cause = cause


class PipelineResultRepository(JsonModelRepository[PipelineResult]): ...


class PipelineRunner:
    """
    Runs the observation, sweep, audit, compose and verify stages of a pipeline config.

    Overrides are `section.field=value` strings applied on top of the file; `seed` and `jobs`
    are applied last. Tables and the result JSON are written only after every stage
    succeeded; a failing stage raises `PipelineStageError` and leaves no result behind.
    """

    def __init__(
        self,
        config_path: Path,
        output_dir: Path,
        overrides: Sequence[str] = (),
        seed: Optional[int] = None,
        jobs: Optional[int] = None,
        stages: Iterable[type[PipelineStage]] = PIPELINE_STAGES,
    ) -> None:
        self.config_path = Path(config_path)
        self.output_dir = Path(output_dir)
        self.overrides = list(overrides)
        if seed is not None:
            self.overrides.append(f"pipeline.seed={seed}")
        if jobs is not None:
            self.overrides.append(f"pipeline.jobs={jobs}")
        self.context = PipelineContext()
        for properties_cls in ALL_STAGE_PROPERTIES:
            self.context.register_properties(properties_cls)
        for stage_cls in stages:
            self.context.register_stage(stage_cls)
        self.context.register_service(Auditor())
        self.artifacts: list[Path] = []

    @property
    def result_path(self) -> Path:
        return self.output_dir / RESULT_FILE

    @property
    def pipeline_properties(self) -> PipelineProperties:
        properties = self.context.get_properties(PipelineProperties)
        assert properties is not None
        return properties

    def _init_pipeline(self) -> list[PipelineStage]:
        logger.debug(f"[PIPELINE INIT] loading {self.config_path}")
        self.context.load_properties(str(self.config_path), self.overrides)
        if self.context.get_properties(PipelineProperties) is None:
            self.context.set_properties(PipelineProperties())
        stages = self.context.init_stages()
        for stage in stages:
            try:
                stage.finish_initialization_cycle()
            except Exception as error:
                raise PipelineStageError(stage.get_name(), error) from error
        return stages

    def run(self) -> PipelineResult:
        state = PipelineState(output_dir=self.output_dir)
        try:
            stages = self._init_pipeline()
            for stage in stages:
                logger.info(f"[PIPELINE STAGE] {stage.get_name()}")
                try:
                    stage.run(state)
                except Exception as error:
                    logger.error(f"[PIPELINE STAGE FAILED] {stage.get_name()}: {error}")
                    raise PipelineStageError(stage.get_name(), error) from error
            return self._write_results(state)
        finally:
            self.context.handle_stage_life_cycle(StageLifeCycle.Destruction)

    def _write_results(self, state: PipelineState) -> PipelineResult:
        audits_path = self.output_dir / AUDITS_FILE
        write_table(
            audits_path,
            AUDITS_HEADER,
            (
                (
                    audit.label, audit.group, audit.report.result.method.value, audit.report.protocol.value,
                    audit.report.threshold, audit.report.counts.fp, audit.report.counts.fn, audit.report.counts.n,
                    audit.report.result.mu_lower, audit.report.result.eps_lower, audit.report.result.sigma_lower,
                    audit.true_eps,
                )
                for audit in state.audits
            ),
        )
        summary = state.summarize()
        summary_path = self.output_dir / SUMMARY_FILE
        write_table(
            summary_path,
            SUMMARY_HEADER,
            (
                (
                    row.group, row.method.value, row.cells, row.true_eps, row.mean_eps_lower,
                    row.std_eps_lower, row.mean_mu_lower, row.violations,
                )
                for row in summary
            ),
        )
        tables = [audits_path, summary_path]
        if state.estimates:
            estimates_path = self.output_dir / ESTIMATES_FILE
            write_table(
                estimates_path,
                ESTIMATES_HEADER,
                (
                    (e.label, e.method.value, e.mu_step, e.steps, e.q, e.delta, e.eps_estimate)
                    for e in state.estimates
                ),
            )
            tables.append(estimates_path)

        properties = self.pipeline_properties
        result = PipelineResult(
            name=properties.name,
            seed=properties.seed,
            audits=state.audits,
            estimates=state.estimates,
            verifications=state.verifications,
            summary=summary,
            artifacts=[str(path.relative_to(self.output_dir)) for path in [*state.artifacts, *tables]],
            violation=any(verification.report.violation for verification in state.verifications),
        )
        PipelineResultRepository(self.result_path).save(result)
        self.artifacts = [*state.artifacts, *tables, self.result_path]
        logger.success(f"[PIPELINE DONE] {properties.name}: {len(state.audits)} audits written to {self.output_dir}")
        return result
