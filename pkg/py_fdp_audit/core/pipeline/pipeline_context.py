import types
from inspect import isclass
from typing import Any, Iterable, Optional, Type, TypeVar, Union, cast, get_args, get_origin, get_type_hints

from loguru import logger

from py_fdp_audit.core.pipeline.properties_loader import PropertiesLoader
from py_fdp_audit.core.pipeline.stage import PipelineStage, StageLifeCycle
from py_fdp_audit.core.pipeline.stage_properties import StageProperties

PT = TypeVar("PT", bound=StageProperties)
ST = TypeVar("ST")

PRIMITIVE_TYPES = (bool, str, int, float, type(None))


class StageNotRegisteredError(Exception): ...


class MissingDependencyError(Exception): ...


def _unwrap_optional(annotation: Any) -> tuple[Any, bool]:
    if get_origin(annotation) in (Union, types.UnionType):
        args = [arg for arg in get_args(annotation) if arg is not type(None)]
        if len(args) == 1 and len(get_args(annotation)) == 2:
            return args[0], True
    return annotation, False


class PipelineContext:
    """
    Holds the properties sections, shared services and stage instances of one pipeline run.

    Stages are registered in execution order. `init_stages` instantiates them and injects
    every annotated attribute: `StageProperties` subclasses from the loaded config sections,
    other classes from the registered services.
    """

    def __init__(self) -> None:
        self.properties_cls_container: dict[str, Type[StageProperties]] = {}
        self.properties_instance_container: dict[str, StageProperties] = {}
        self.service_instance_container: dict[type, object] = {}
        self.stage_cls_container: dict[str, Type[PipelineStage]] = {}
        self.stage_instance_container: dict[str, PipelineStage] = {}

    def register_properties(self, properties_cls: Type[StageProperties]) -> None:
        if not issubclass(properties_cls, StageProperties):
            raise TypeError(
                f"[PROPERTIES REGISTRATION ERROR] Properties: {properties_cls} is not a subclass of StageProperties"
            )
        self.properties_cls_container[properties_cls.get_key()] = properties_cls

    def register_service(self, service: object) -> None:
        self.service_instance_container[type(service)] = service

    def register_stage(self, stage_cls: Type[PipelineStage]) -> None:
        if not issubclass(stage_cls, PipelineStage):
            raise TypeError(f"[STAGE REGISTRATION ERROR] Stage: {stage_cls} is not a subclass of PipelineStage")
        self.stage_cls_container[stage_cls.get_name()] = stage_cls

    def create_properties_loader(self, properties_path: str) -> PropertiesLoader:
        return PropertiesLoader(properties_path, self.properties_cls_container.values())

    def load_properties(self, properties_path: str, overrides: Iterable[str] = ()) -> None:
        loaded = self.create_properties_loader(properties_path).load_properties(overrides)
        for key, properties in loaded.items():
            logger.debug(f"[LOADING PROPERTIES] section {key} -> {properties.get_name()}")
        self.properties_instance_container.update(loaded)

    def set_properties(self, properties: StageProperties) -> None:
        self.properties_instance_container[properties.get_key()] = properties

    def get_properties(self, properties_cls: Type[PT]) -> Optional[PT]:
        return cast(Optional[PT], self.properties_instance_container.get(properties_cls.get_key()))

    def get_service(self, service_cls: Type[ST]) -> Optional[ST]:
        return cast(Optional[ST], self.service_instance_container.get(service_cls))

    def get_stage(self, stage_cls: Type[ST]) -> ST:
        instance = self.stage_instance_container.get(cast(Type[PipelineStage], stage_cls).get_name())
        if instance is None:
            raise StageNotRegisteredError(f"[STAGE NOT FOUND] {stage_cls.__name__} was not initialised")
        return cast(ST, instance)

    def _missing_sections(self, stage_cls: Type[PipelineStage]) -> list[str]:
        missing: list[str] = []
        for annotation in get_type_hints(stage_cls).values():
            target, optional = _unwrap_optional(annotation)
            if optional or not isclass(target) or not issubclass(target, StageProperties):
                continue
            if self.get_properties(target) is None:
                missing.append(target.get_key())
        return missing

    def _inject_stage_dependencies(self, stage: PipelineStage) -> None:
        for attr_name, annotation in get_type_hints(type(stage)).items():
            target, optional = _unwrap_optional(annotation)
            if not isclass(target) or target in PRIMITIVE_TYPES:
                continue
            if issubclass(target, StageProperties):
                properties = self.get_properties(target)
                if properties is None and not optional:
                    raise MissingDependencyError(
                        f"[PROPERTIES INJECTION ERROR] {stage.get_name()} needs section [{target.get_key()}] in the pipeline config"
                    )
                setattr(stage, attr_name, properties)
                continue
            service = self.get_service(target)
            if service is None:
                if optional:
                    setattr(stage, attr_name, None)
                    continue
                error_message = f"[DEPENDENCY INJECTION FAILED] {stage.get_name()}.{attr_name} needs a registered {target.__name__}"
                logger.critical(error_message)
                raise MissingDependencyError(error_message)
            setattr(stage, attr_name, service)

    def init_stages(self) -> list[PipelineStage]:
        for stage_name, stage_cls in self.stage_cls_container.items():
            missing = self._missing_sections(stage_cls)
            if missing and not stage_cls.required:
                logger.debug(f"[STAGE SKIPPED] {stage_name}: no [{', '.join(missing)}] section")
                continue
            stage = stage_cls()
            self._inject_stage_dependencies(stage)
            self.stage_instance_container[stage_name] = stage
            logger.debug(f"[STAGE INITIALISED] {stage_name}")
        return list(self.stage_instance_container.values())

    def handle_stage_life_cycle(self, life_cycle: StageLifeCycle) -> None:
        for stage in self.stage_instance_container.values():
            match life_cycle:
                case StageLifeCycle.Init:
                    stage.finish_initialization_cycle()
                case StageLifeCycle.Destruction:
                    stage.finish_destruction_cycle()
