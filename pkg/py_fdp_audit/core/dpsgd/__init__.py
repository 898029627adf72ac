from py_fdp_audit.core.dpsgd.bugs import TrainerVariant, inject_bug
from py_fdp_audit.core.dpsgd.canaries import CanaryKind, CanaryRefresh, CanarySpec
from py_fdp_audit.core.dpsgd.clipping import ContributionRecorder, clip_vector
from py_fdp_audit.core.dpsgd.config import (
    BugKind,
    BugSpec,
    CanaryInjection,
    DpSgdConfig,
    InvalidTrainerConfigurationError,
)
from py_fdp_audit.core.dpsgd.input_canary import CanaryCraftingError, craft_input_canary
from py_fdp_audit.core.dpsgd.models import Architecture, TinyModel
from py_fdp_audit.core.dpsgd.tasks import Task, TaskKind, make_gaussian_task, make_spiral_task, make_task
from py_fdp_audit.core.dpsgd.trainer import (
    DpSgdTrainer,
    WhiteboxRun,
    canary_scores_from_probabilities,
    train_blackbox,
    train_whitebox,
)

__all__ = [
    "Architecture",
    "BugKind",
    "BugSpec",
    "CanaryCraftingError",
    "CanaryInjection",
    "CanaryKind",
    "CanaryRefresh",
    "CanarySpec",
    "ContributionRecorder",
    "DpSgdConfig",
    "DpSgdTrainer",
    "InvalidTrainerConfigurationError",
    "Task",
    "TaskKind",
    "TinyModel",
    "TrainerVariant",
    "WhiteboxRun",
    "canary_scores_from_probabilities",
    "clip_vector",
    "craft_input_canary",
    "inject_bug",
    "make_gaussian_task",
    "make_spiral_task",
    "make_task",
    "train_blackbox",
    "train_whitebox",
]
