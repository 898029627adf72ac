import hashlib
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Optional

from pydantic import BaseModel, Field

from py_fdp_audit import __version__
from py_fdp_audit.commons.json_model_repository import JsonModelRepository

MANIFEST_SUFFIX = ".manifest.json"


class ManifestMismatchError(Exception): ...


def sha256_digest(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as file:
        for chunk in iter(lambda: file.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def manifest_path_for(output: Path) -> Path:
    return output.with_name(output.name + MANIFEST_SUFFIX)


class RunManifest(BaseModel):
    """
    Provenance of one command run: flags, seed, tool version and content digests.

    Only the manifest carries wall-clock data; the outputs it describes stay byte-identical
    across reruns with the same flags and seed.
    """

    command: str
    flags: dict[str, Any] = Field(default_factory=dict)
    seed: Optional[int] = None
    version: str = __version__
    inputs: dict[str, str] = Field(default_factory=dict)
    outputs: dict[str, str] = Field(default_factory=dict)
    started_at: str
    duration_seconds: float = Field(ge=0.0)

    def check_outputs(self) -> None:
        for path, expected in self.outputs.items():
            actual = sha256_digest(Path(path))
            if actual != expected:
                raise ManifestMismatchError(
                    f"[MANIFEST MISMATCH] {path} has digest {actual}, manifest records {expected}"
                )


class RunManifestRepository(JsonModelRepository[RunManifest]): ...


class RunRecorder:
    """Times a command and writes its manifest next to the primary output."""

    def __init__(self, command: str, flags: dict[str, Any], seed: Optional[int] = None) -> None:
        self.command = command
        self.flags = flags
        self.seed = seed
        self._started_at = datetime.now(timezone.utc)
        self._started = time.perf_counter()

    def finish(self, primary_output: Path, outputs: Iterable[Path], inputs: Iterable[Path] = ()) -> RunManifest:
        manifest = RunManifest(
            command=self.command,
            flags=self.flags,
            seed=self.seed,
            inputs={str(path): sha256_digest(path) for path in inputs},
            outputs={str(path): sha256_digest(path) for path in outputs},
            started_at=self._started_at.isoformat(),
            duration_seconds=time.perf_counter() - self._started,
        )
        RunManifestRepository(manifest_path_for(primary_output)).save(manifest)
        return manifest
