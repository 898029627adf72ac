import csv
import io
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

HEADER = ("world", "score")
WORLD_D = 0
WORLD_DPRIME = 1


class ObservationFileError(Exception): ...


def format_score(score: float) -> str:
    # 17 significant digits round-trip every 64-bit float
    return format(score, ".17g")


def dumps_observations(scores_d: ArrayLike, scores_dprime: ArrayLike) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(HEADER)
    for world, scores in ((WORLD_D, scores_d), (WORLD_DPRIME, scores_dprime)):
        for score in np.asarray(scores, dtype=np.float64):
            writer.writerow((world, format_score(float(score))))
    return buffer.getvalue()


def write_observations(path: Path, scores_d: ArrayLike, scores_dprime: ArrayLike) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_observations(scores_d, scores_dprime))


def loads_observations(text: str, source: str = "<string>") -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Parses `world,score` rows into the D and D′ score arrays; errors name the offending line."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(cell.strip() for cell in header) != HEADER:
        raise ObservationFileError(
            f"[OBSERVATION HEADER ERROR] {source}:1 expected header {','.join(HEADER)}, got {header}"
        )
    worlds: dict[int, list[float]] = {WORLD_D: [], WORLD_DPRIME: []}
    for row in reader:
        line = reader.line_num
        if not row:
            continue
        if len(row) != 2:
            raise ObservationFileError(f"[OBSERVATION ROW ERROR] {source}:{line} expected 2 fields, got {len(row)}")
        world_cell, score_cell = (cell.strip() for cell in row)
        if world_cell not in ("0", "1"):
            raise ObservationFileError(f"[OBSERVATION WORLD ERROR] {source}:{line} world must be 0 or 1, got {world_cell!r}")
        try:
            score = float(score_cell)
        except ValueError as error:
            raise ObservationFileError(
                f"[OBSERVATION SCORE ERROR] {source}:{line} score is not a number: {score_cell!r}"
            ) from error
        if not math.isfinite(score):
            raise ObservationFileError(f"[OBSERVATION SCORE ERROR] {source}:{line} score must be finite, got {score_cell!r}")
        worlds[int(world_cell)].append(score)
    return np.asarray(worlds[WORLD_D]), np.asarray(worlds[WORLD_DPRIME])


def read_observations(path: Path) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    try:
        text = path.read_text()
    except OSError as error:
        raise ObservationFileError(f"[OBSERVATION FILE UNREADABLE] {path}: {error}") from error
    return loads_observations(text, source=str(path))


def write_table(path: Path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> None:
    """Writes a plain CSV table; floats use the same 17-digit format as observation scores."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(
            "" if cell is None else format_score(cell) if isinstance(cell, float) else cell for cell in row
        )
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buffer.getvalue())
