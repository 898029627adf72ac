from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from py_fdp_audit.core.application.loguru_config import LoguruConfig


class AuditSettings(BaseSettings):
    """
    Process-wide defaults, read from `FDP_AUDIT_*` environment variables.

    Nested logging options use a double underscore, e.g. `FDP_AUDIT_LOGURU_CONFIG__LOG_LEVEL=DEBUG`.
    Command-line flags override these values.
    """

    model_config = SettingsConfigDict(env_prefix="FDP_AUDIT_", env_nested_delimiter="__")

    output_dir: Path = Path("./fdp-audit-out")
    jobs: int = Field(default=1, ge=1)
    loguru_config: LoguruConfig = LoguruConfig()

    def output_path(self, name: str) -> Path:
        return self.output_dir / name
