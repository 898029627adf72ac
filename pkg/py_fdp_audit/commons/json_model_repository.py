from pathlib import Path
from typing import Generic, Optional, Type, TypeVar, get_args

import orjson
from pydantic import BaseModel

T = TypeVar("T", bound=BaseModel)

JSON_OPTIONS = orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2 | orjson.OPT_APPEND_NEWLINE


def dump_model_bytes(model: BaseModel) -> bytes:
    """Deterministic JSON bytes for a model: sorted keys, two-space indent."""
    return orjson.dumps(model.model_dump(mode="json"), option=JSON_OPTIONS)


class JsonModelRepository(Generic[T]):
    """
    Reads and writes one pydantic model as a JSON document.

    Subclass with the model as type parameter, e.g. `class ReportRepository(JsonModelRepository[AuditReport])`;
    `target_key` selects a nested document when loading.
    """

    def __init__(self, file_path: Path, target_key: Optional[str] = None) -> None:
        self.model_cls: Type[T] = self.__class__._get_model_cls()
        self.file_path = Path(file_path)
        self.target_key = target_key

    @classmethod
    def _get_model_cls(cls) -> Type[T]:
        return get_args(cls.__orig_bases__[0])[0]  # type: ignore

    def save(self, model: T) -> bytes:
        if not isinstance(model, self.model_cls):
            raise TypeError(
                f"[MODEL CLASS TYPE MISMATCH] repository of {self.model_cls.__name__} cannot save {model.__class__.__name__}"
            )
        payload = dump_model_bytes(model)
        self.file_path.parent.mkdir(parents=True, exist_ok=True)
        self.file_path.write_bytes(payload)
        return payload

    def load(self) -> T:
        document = orjson.loads(self.file_path.read_bytes())
        if self.target_key is None:
            return self.model_cls.model_validate(document)
        if self.target_key not in document:
            raise ValueError(f"[TARGET KEY NOT FOUND] Target key: {self.target_key} not found in {self.file_path}")
        return self.model_cls.model_validate(document[self.target_key])
