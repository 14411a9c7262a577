from pathlib import Path
from typing import Generic, List, Type, TypeVar, Union

from pydantic import BaseModel

from core.exceptions import NotFoundException, ValidationException

T = TypeVar('T', bound=BaseModel)

PathLike = Union[str, Path]


class BaseRepository(Generic[T]):
    """
    File-backed storage rooted at ``base_dir``. Relative paths resolve
    against the root, absolute paths are used as given.
    """

    def __init__(self, base_dir: PathLike = "."):
        self.base_dir = Path(base_dir)
        self._model_type: Type[T] = None  # Will be set by child classes

    def resolve(self, path: PathLike) -> Path:
        path = Path(path)
        if path.is_absolute() or path.exists():
            return path
        return self.base_dir / path

    # Plain text

    def read_text(self, path: PathLike) -> str:
        resolved = self.resolve(path)
        if not resolved.is_file():
            raise NotFoundException(f"File not found: {path}")
        return resolved.read_text(encoding="utf-8")

    def write_text(self, path: PathLike, text: str) -> Path:
        resolved = Path(path)
        resolved.parent.mkdir(parents=True, exist_ok=True)
        resolved.write_text(text, encoding="utf-8")
        return resolved

    def list_files(self, directory: PathLike, pattern: str) -> List[Path]:
        resolved = self.resolve(directory)
        if not resolved.is_dir():
            raise NotFoundException(f"Directory not found: {directory}")
        return sorted(resolved.glob(pattern))

    # Pydantic documents

    def load(self, path: PathLike) -> T:
        text = self.read_text(path)
        try:
            return self._model_type.model_validate_json(text)
        except ValueError as exc:
            raise ValidationException(f"Invalid {self._model_type.__name__} file {path}: {exc}")

    def save(self, path: PathLike, entity: T) -> Path:
        return self.write_text(path, entity.model_dump_json(indent=2) + "\n")
