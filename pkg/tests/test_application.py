import re
import tomllib
from pathlib import Path

import pytest
from loguru import logger
from pytest_mock import MockerFixture

from py_fdp_audit import __version__
from py_fdp_audit.core.application.audit_settings import AuditSettings
from py_fdp_audit.core.application.loguru_config import LoguruConfig, LogLevel, configure_logging
from py_fdp_audit.core.application.run_manifest import (
    ManifestMismatchError,
    RunManifestRepository,
    RunRecorder,
    manifest_path_for,
    sha256_digest,
)


class TestAuditSettings:
    def test_defaults(self, monkeypatch: pytest.MonkeyPatch):
        monkeypatch.delenv("FDP_AUDIT_OUTPUT_DIR", raising=False)
        monkeypatch.delenv("FDP_AUDIT_JOBS", raising=False)
        settings = AuditSettings()
        assert settings.jobs == 1
        assert settings.output_path("audit.json") == Path("./fdp-audit-out") / "audit.json"

    def test_environment_overrides(self, monkeypatch: pytest.MonkeyPatch, tmp_path: Path):
        monkeypatch.setenv("FDP_AUDIT_OUTPUT_DIR", str(tmp_path))
        monkeypatch.setenv("FDP_AUDIT_JOBS", "4")
        monkeypatch.setenv("FDP_AUDIT_LOGURU_CONFIG__LOG_LEVEL", "DEBUG")
        settings = AuditSettings()
        assert settings.output_dir == tmp_path
        assert settings.jobs == 4
        assert settings.loguru_config.log_level is LogLevel.DEBUG


class TestConfigureLogging:
    def test_replaces_the_sinks(self, mocker: MockerFixture):
        mock_logger = mocker.patch("py_fdp_audit.core.application.loguru_config.logger")
        configure_logging(LoguruConfig(log_level=LogLevel.WARNING))
        mock_logger.remove.assert_called_once_with()
        assert mock_logger.add.call_count == 1
        assert mock_logger.add.call_args.kwargs["level"] == "WARNING"

    def test_adds_a_rotating_file_sink(self, mocker: MockerFixture, tmp_path: Path):
        add = mocker.patch("py_fdp_audit.core.application.loguru_config.logger").add
        log_file = str(tmp_path / "audit.log")
        configure_logging(LoguruConfig(log_file_path=log_file))
        assert add.call_count == 2
        assert add.call_args.args == (log_file,)
        assert add.call_args.kwargs["rotation"] == "1 day"

    def test_file_sink_receives_messages(self, tmp_path: Path):
        log_file = tmp_path / "audit.log"
        try:
            configure_logging(LoguruConfig(log_file_path=str(log_file), log_format="{message}"))
            logger.info("[TEST MESSAGE] hello")
        finally:
            logger.remove()
        assert "[TEST MESSAGE] hello" in log_file.read_text()


class TestRunManifest:
    def test_manifest_sits_next_to_the_output(self):
        assert manifest_path_for(Path("out/audit.json")) == Path("out/audit.json.manifest.json")

    def test_recorder_writes_digests(self, tmp_path: Path):
        source = tmp_path / "observations.csv"
        source.write_text("world,score\n0,1\n1,2\n")
        output = tmp_path / "audit.json"
        output.write_text("{}")
        manifest = RunRecorder("audit", {"method": "fdp-cp"}, seed=7).finish(output, [output], [source])

        assert manifest.version == __version__
        assert manifest.seed == 7
        assert manifest.outputs == {str(output): sha256_digest(output)}
        assert manifest.inputs == {str(source): sha256_digest(source)}
        assert manifest.duration_seconds >= 0.0
        assert RunManifestRepository(manifest_path_for(output)).load() == manifest

    def test_digest_is_sha256(self, tmp_path: Path):
        path = tmp_path / "empty"
        path.write_bytes(b"")
        assert sha256_digest(path) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"

    def test_check_outputs_detects_changes(self, tmp_path: Path):
        output = tmp_path / "result.json"
        output.write_text("{}")
        manifest = RunRecorder("pipeline", {}).finish(output, [output])
        manifest.check_outputs()
        output.write_text('{"tampered": true}')
        with pytest.raises(ManifestMismatchError, match="MANIFEST MISMATCH"):
            manifest.check_outputs()


class TestDeclaredDependencies:
    ROOT = Path(__file__).resolve().parent.parent
    IMPORT_NAMES = {"pydantic-settings": "pydantic_settings", "PyYAML": "yaml"}

    def test_every_runtime_dependency_is_imported(self):
        project = tomllib.loads((self.ROOT / "pyproject.toml").read_text())["project"]
        sources = "\n".join(path.read_text() for path in (self.ROOT / "py_fdp_audit").rglob("*.py"))
        for requirement in project["dependencies"]:
            name = re.split(r"[<>=!~\[; ]", requirement, maxsplit=1)[0]
            module = self.IMPORT_NAMES.get(name, name)
            assert re.search(rf"^\s*(import|from) {module}\b", sources, re.MULTILINE), name
