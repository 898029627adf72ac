from abc import ABC, abstractmethod
from enum import Enum
from typing import TYPE_CHECKING, ClassVar, final

if TYPE_CHECKING:
    from py_fdp_audit.core.pipeline.pipeline_state import PipelineState


class StageLifeCycle(Enum):
    Init = "initialization"
    Destruction = "destruction"


class PipelineStage(ABC):
    """
    Base class of the pipeline stages.

    Class annotations declare what a stage needs: `StageProperties` subclasses are filled
    from the matching config section, other classes from the services registered in the
    `PipelineContext`. A stage whose `required` flag is False is skipped when one of its
    non-optional properties sections is missing.

    The lifecycle hooks are:
    - `post_construct()`: called after injection, before any stage runs.
    - `pre_destroy()`: called once the pipeline finished or aborted.
    """

    required: ClassVar[bool] = True

    @classmethod
    def get_name(cls) -> str:
        return cls.__name__

    def post_construct(self) -> None:
        """Runs after injection and before the first stage; stages check their sections here."""
        pass

    def pre_destroy(self) -> None:
        """Releases what the stage holds once the pipeline is done with it."""
        pass

    @abstractmethod
    def run(self, state: "PipelineState") -> None: ...

    @final
    def finish_initialization_cycle(self) -> None:
        self.post_construct()

    @final
    def finish_destruction_cycle(self) -> None:
        self.pre_destroy()
