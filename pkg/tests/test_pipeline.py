from pathlib import Path
from typing import Optional

import numpy as np
import orjson
import pytest
from pydantic import ValidationError
from pytest_mock import MockerFixture

from py_fdp_audit.core.auditing.auditor import Auditor
from py_fdp_audit.core.estimators.audit_result import AuditMethod
from py_fdp_audit.core.mechanisms.observation_set import ObservationPair
from py_fdp_audit.core.pipeline.pipeline_context import MissingDependencyError, PipelineContext, StageNotRegisteredError
from py_fdp_audit.core.pipeline.pipeline_runner import PipelineRunner, PipelineStageError
from py_fdp_audit.core.pipeline.pipeline_state import PipelineState
from py_fdp_audit.core.pipeline.properties_loader import (
    InvalidOverrideError,
    InvalidPropertiesKeyError,
    PropertiesLoader,
    apply_overrides,
    parse_override,
)
from py_fdp_audit.core.pipeline.stage import PipelineStage, StageLifeCycle
from py_fdp_audit.core.pipeline.stage_properties import (
    AuditProperties,
    MechanismKind,
    SimulateProperties,
    StageProperties,
    TrainProperties,
)

SIMULATE_CONFIG = """
[pipeline]
name = "tiny"
seed = 3
repeats = 2

[simulate]
sigmas = [1.0]
sizes = [500]

[sweep]

[audit]
methods = ["fdp-cp", "dp-cp"]

[compose]
steps = 10

[verify]
claimed_eps = 50.0
"""


class MockProperties(StageProperties):
    __key__ = "mock_properties"
    attr: str
    level: int = 0


class OtherProperties(StageProperties):
    __key__ = "other"
    flag: bool = False


class Greeter:
    def greet(self) -> str:
        return "hello"


class GreetingStage(PipelineStage):
    mock_properties: MockProperties
    other: Optional[OtherProperties]
    greeter: Greeter

    def post_construct(self) -> None:
        self.constructed = True

    def pre_destroy(self) -> None:
        self.destroyed = True

    def run(self, state: PipelineState) -> None:
        state.artifacts.append(Path(self.greeter.greet()))


class OptionalStage(PipelineStage):
    required = False
    other: OtherProperties

    def run(self, state: PipelineState) -> None: ...


def write_config(tmp_path: Path, text: str = SIMULATE_CONFIG, name: str = "pipeline.toml") -> Path:
    path = tmp_path / name
    path.write_text(text)
    return path


class TestPropertiesLoader:
    def test_load_properties_from_toml_file(self, mocker: MockerFixture):
        mocker.patch("builtins.open", mocker.mock_open(read_data='[mock_properties]\nattr = "value"\n'))
        properties = PropertiesLoader("test.toml", [MockProperties]).load_properties()
        assert isinstance(properties["mock_properties"], MockProperties)
        assert properties["mock_properties"].attr == "value"

    def test_load_properties_from_yaml_file(self, mocker: MockerFixture):
        mocker.patch("builtins.open", mocker.mock_open(read_data="mock_properties:\n  attr: yaml-value"))
        properties = PropertiesLoader("test.yaml", [MockProperties]).load_properties()
        assert properties["mock_properties"].attr == "yaml-value"

    def test_load_properties_from_json_file(self, mocker: MockerFixture):
        mocker.patch("builtins.open", mocker.mock_open(read_data='{"mock_properties": {"attr": "json-value"}}'))
        properties = PropertiesLoader("test.json", [MockProperties]).load_properties()
        assert properties["mock_properties"].attr == "json-value"

    def test_handle_valid_file_paths_with_correct_extensions(self):
        for extension in ["json", "yaml", "yml", "toml"]:
            assert PropertiesLoader(f"test.{extension}", []).file_extension == extension

    def test_load_properties_from_file_without_extension(self):
        with pytest.raises(ValueError, match="has no extension"):
            PropertiesLoader("testfile", [])

    def test_load_properties_from_unsupported_extension(self, mocker: MockerFixture):
        mocker.patch("builtins.open", mocker.mock_open(read_data="{}"))
        with pytest.raises(ValueError, match=r"cannot read \.\w+ pipeline configs"):
            PropertiesLoader("test.txt", []).load_properties()

    def test_load_properties_with_invalid_keys(self, mocker: MockerFixture):
        mocker.patch("builtins.open", mocker.mock_open(read_data='{"invalid_key": {"attr": "value"}}'))
        with pytest.raises(InvalidPropertiesKeyError, match=r"UNKNOWN CONFIG SECTION.*\[invalid_key\]"):
            PropertiesLoader("test.json", [MockProperties]).load_properties()

    def test_handle_empty_properties_file_content(self, mocker: MockerFixture):
        mocker.patch("builtins.open", mocker.mock_open(read_data=""))
        assert PropertiesLoader("test.yaml", []).load_properties() == {}

    def test_unknown_fields_are_rejected(self, mocker: MockerFixture):
        mocker.patch("builtins.open", mocker.mock_open(read_data='[mock_properties]\nattr = "v"\ntypo = 1\n'))
        with pytest.raises(ValidationError):
            PropertiesLoader("test.toml", [MockProperties]).load_properties()

    def test_overrides_are_applied_before_validation(self, mocker: MockerFixture):
        mocker.patch("builtins.open", mocker.mock_open(read_data='[mock_properties]\nattr = "value"\n'))
        properties = PropertiesLoader("test.toml", [MockProperties]).load_properties(["mock_properties.level=4"])
        assert properties["mock_properties"].level == 4
        assert properties["mock_properties"].attr == "value"


class TestOverrides:
    def test_values_are_read_as_yaml(self):
        assert parse_override("audit.methods=[dp-cp, katz]") == (["audit", "methods"], ["dp-cp", "katz"])
        assert parse_override("pipeline.seed=7") == (["pipeline", "seed"], 7)

    @pytest.mark.parametrize("text", ["seed=3", "pipeline.seed", ".seed=3", "pipeline..seed=3"])
    def test_malformed_overrides(self, text: str):
        with pytest.raises(InvalidOverrideError, match="INVALID OVERRIDE"):
            parse_override(text)

    def test_missing_section_is_created(self):
        assert apply_overrides({}, ["compose.steps=100"]) == {"compose": {"steps": 100}}

    def test_source_document_is_not_mutated(self):
        document = {"pipeline": {"seed": 1}}
        merged = apply_overrides(document, ["pipeline.seed=2"])
        assert merged["pipeline"]["seed"] == 2
        assert document["pipeline"]["seed"] == 1

    def test_scalar_cannot_be_descended(self):
        with pytest.raises(InvalidOverrideError, match="is not a section"):
            apply_overrides({"pipeline": 3}, ["pipeline.seed=2"])


class TestStageProperties:
    def test_unnamed_section_is_rejected(self):
        class Unnamed(StageProperties): ...

        with pytest.raises(ValueError, match="Unnamed does not name its config section"):
            Unnamed.get_key()

    def test_simulate_needs_exactly_one_noise_list(self):
        with pytest.raises(ValidationError, match="INVALID SIMULATE SECTION"):
            SimulateProperties(sigmas=[1.0], epsilons=[1.0])
        with pytest.raises(ValidationError, match="INVALID SIMULATE SECTION"):
            SimulateProperties()

    def test_randomized_response_is_parameterised_by_epsilon(self):
        with pytest.raises(ValidationError, match="randomized-response"):
            SimulateProperties(mechanism="randomized-response", sigmas=[1.0])

    @pytest.mark.parametrize(
        "spelling, kind",
        [
            ("rr", MechanismKind.RandomizedResponse),
            ("randomized-response", MechanismKind.RandomizedResponse),
            ("subsampled", MechanismKind.SubsampledGaussian),
            ("subsampled-gaussian", MechanismKind.SubsampledGaussian),
            ("gaussian", MechanismKind.Gaussian),
        ],
    )
    def test_mechanism_spellings(self, spelling: str, kind: MechanismKind):
        assert SimulateProperties(mechanism=spelling, epsilons=[1.0]).mechanism is kind

    def test_katz_requests_pure_epsilon(self):
        props = AuditProperties(delta=1e-5)
        assert props.request(AuditMethod.FDP_CP, 0).delta == 1e-5
        assert props.request(AuditMethod.KATZ, 0).delta == 0.0

    def test_train_defaults(self):
        props = TrainProperties()
        assert props.bug == "none" and props.true_epsilons == []


class TestPipelineContext:
    @pytest.fixture
    def context(self) -> PipelineContext:
        context = PipelineContext()
        context.register_properties(MockProperties)
        context.register_properties(OtherProperties)
        return context

    def test_register_entities_correctly(self, context: PipelineContext):
        context.register_stage(GreetingStage)
        assert context.properties_cls_container["mock_properties"] is MockProperties
        assert context.stage_cls_container["GreetingStage"] is GreetingStage

    def test_register_invalid_entities_raises_error(self, context: PipelineContext):
        class InvalidProperties: ...

        class InvalidStage: ...

        with pytest.raises(TypeError, match="PROPERTIES REGISTRATION ERROR"):
            context.register_properties(InvalidProperties)  # type: ignore
        with pytest.raises(TypeError, match="STAGE REGISTRATION ERROR"):
            context.register_stage(InvalidStage)  # type: ignore

    def test_stage_dependencies_are_injected(self, context: PipelineContext):
        greeter = Greeter()
        context.register_service(greeter)
        context.set_properties(MockProperties(attr="x"))
        context.register_stage(GreetingStage)
        (stage,) = context.init_stages()
        assert isinstance(stage, GreetingStage)
        assert stage.mock_properties.attr == "x"
        assert stage.other is None
        assert stage.greeter is greeter
        assert context.get_stage(GreetingStage) is stage

    def test_missing_service_raises(self, context: PipelineContext):
        context.set_properties(MockProperties(attr="x"))
        context.register_stage(GreetingStage)
        with pytest.raises(MissingDependencyError, match="DEPENDENCY INJECTION FAILED"):
            context.init_stages()

    def test_missing_required_section_raises(self, context: PipelineContext):
        context.register_service(Greeter())
        context.register_stage(GreetingStage)
        with pytest.raises(MissingDependencyError, match="PROPERTIES INJECTION ERROR"):
            context.init_stages()

    def test_optional_stage_without_its_section_is_skipped(self, context: PipelineContext):
        context.register_stage(OptionalStage)
        assert context.init_stages() == []
        with pytest.raises(StageNotRegisteredError):
            context.get_stage(OptionalStage)

    def test_life_cycle_hooks(self, context: PipelineContext):
        context.register_service(Greeter())
        context.set_properties(MockProperties(attr="x"))
        context.register_stage(GreetingStage)
        (stage,) = context.init_stages()
        context.handle_stage_life_cycle(StageLifeCycle.Init)
        context.handle_stage_life_cycle(StageLifeCycle.Destruction)
        assert stage.constructed and stage.destroyed  # type: ignore[attr-defined]


class TestPipelineRunner:
    def test_simulated_pipeline_writes_every_table(self, tmp_path: Path):
        out = tmp_path / "out"
        result = PipelineRunner(write_config(tmp_path), out).run()

        assert result.name == "tiny" and result.seed == 3
        assert len(result.audits) == 4
        assert len(result.estimates) == 2
        assert len(result.verifications) == 2
        assert not result.violation
        assert {row.cells for row in result.summary} == {2}
        for name in ("result.json", "audits.csv", "summary.csv", "estimates.csv"):
            assert (out / name).is_file()
        assert len(list((out / "observations").glob("*.csv"))) == 2
        assert len(list((out / "sweeps").glob("*.csv"))) == 2
        assert sorted(result.artifacts) == sorted(
            str(path.relative_to(out)) for path in out.rglob("*.csv")
        )

    def test_true_epsilon_is_recorded_for_full_batch_gaussians(self, tmp_path: Path):
        result = PipelineRunner(write_config(tmp_path), tmp_path / "out").run()
        assert all(audit.true_eps is not None for audit in result.audits)
        assert all(audit.report.result.eps_lower <= audit.true_eps for audit in result.audits)

    def test_same_seed_gives_byte_identical_results(self, tmp_path: Path):
        config = write_config(tmp_path)
        PipelineRunner(config, tmp_path / "a").run()
        PipelineRunner(config, tmp_path / "b").run()
        for name in ("result.json", "audits.csv", "summary.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_seed_flag_beats_the_file_and_overrides(self, tmp_path: Path):
        result = PipelineRunner(
            write_config(tmp_path), tmp_path / "out", overrides=["pipeline.seed=5"], seed=11
        ).run()
        assert result.seed == 11

    def test_overrides_change_the_run(self, tmp_path: Path):
        result = PipelineRunner(
            write_config(tmp_path), tmp_path / "out", overrides=["pipeline.repeats=1", "verify.claimed_eps=0.0"]
        ).run()
        assert len(result.audits) == 2
        assert result.violation
        document = orjson.loads((tmp_path / "out" / "result.json").read_bytes())
        assert document["violation"] is True

    def test_optional_stages_are_skipped(self, tmp_path: Path):
        config = write_config(tmp_path, '[simulate]\nsigmas = [2.0]\nsizes = [200]\n\n[audit]\n')
        result = PipelineRunner(config, tmp_path / "out").run()
        assert result.estimates == [] and result.verifications == []
        assert not (tmp_path / "out" / "sweeps").exists()
        assert not (tmp_path / "out" / "estimates.csv").exists()

    def test_empty_observations_abort_without_results(self, tmp_path: Path, mocker: MockerFixture):
        mocker.patch(
            "py_fdp_audit.core.pipeline.stages.simulate_subsampled_gaussian_pair",
            return_value=ObservationPair.from_arrays(np.array([]), np.array([])),
        )
        out = tmp_path / "out"
        with pytest.raises(PipelineStageError, match="EMPTY OBSERVATIONS"):
            PipelineRunner(write_config(tmp_path), out).run()
        assert not (out / "result.json").exists()
        assert not (out / "audits.csv").exists()

    def test_config_needs_an_observation_source(self, tmp_path: Path):
        config = write_config(tmp_path, "[audit]\n")
        with pytest.raises(PipelineStageError, match="INVALID PIPELINE CONFIG"):
            PipelineRunner(config, tmp_path / "out").run()

    def test_config_needs_an_audit_section(self, tmp_path: Path):
        config = write_config(tmp_path, "[simulate]\nsigmas = [1.0]\n")
        with pytest.raises(MissingDependencyError, match="audit"):
            PipelineRunner(config, tmp_path / "out").run()

    def test_unknown_section_is_rejected(self, tmp_path: Path):
        config = write_config(tmp_path, SIMULATE_CONFIG + "\n[bogus]\nx = 1\n")
        with pytest.raises(InvalidPropertiesKeyError, match=r"\[bogus\]; expected one of .*simulate"):
            PipelineRunner(config, tmp_path / "out").run()

    def test_yaml_configs_are_accepted(self, tmp_path: Path):
        config = write_config(
            tmp_path,
            "simulate:\n  mechanism: randomized-response\n  epsilons: [1.0]\n  sizes: [300]\naudit:\n  methods: [katz]\n",
            name="pipeline.yaml",
        )
        result = PipelineRunner(config, tmp_path / "out").run()
        assert result.audits[0].true_eps == 1.0
        assert result.audits[0].report.result.delta == 0.0

    def test_whitebox_training_pipeline(self, tmp_path: Path):
        config = write_config(
            tmp_path,
            "[pipeline]\nseed = 2\n\n[train]\nsteps = 40\nq = 0.05\n\n[audit]\n",
        )
        result = PipelineRunner(config, tmp_path / "out").run()
        (audit,) = result.audits
        assert audit.report.counts.n == 40
        assert audit.true_eps is not None

    def test_auditor_service_is_shared(self, tmp_path: Path):
        runner = PipelineRunner(write_config(tmp_path), tmp_path / "out")
        assert isinstance(runner.context.get_service(Auditor), Auditor)
