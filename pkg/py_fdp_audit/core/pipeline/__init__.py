from py_fdp_audit.core.pipeline.pipeline_context import MissingDependencyError, PipelineContext
from py_fdp_audit.core.pipeline.pipeline_runner import PipelineRunner, PipelineStageError
from py_fdp_audit.core.pipeline.pipeline_state import PipelineResult, PipelineState
from py_fdp_audit.core.pipeline.properties_loader import (
    InvalidOverrideError,
    InvalidPropertiesKeyError,
    PropertiesLoader,
)
from py_fdp_audit.core.pipeline.stage import PipelineStage
from py_fdp_audit.core.pipeline.stage_properties import StageProperties
from py_fdp_audit.core.pipeline.stages import EmptyObservationError, PipelineConfigurationError

__all__ = [
    "EmptyObservationError",
    "InvalidOverrideError",
    "InvalidPropertiesKeyError",
    "MissingDependencyError",
    "PipelineConfigurationError",
    "PipelineContext",
    "PipelineResult",
    "PipelineRunner",
    "PipelineStage",
    "PipelineStageError",
    "PipelineState",
    "PropertiesLoader",
    "StageProperties",
]
