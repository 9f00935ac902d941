import json
from pathlib import Path
from typing import Any, Dict, Union

import portalocker
import yaml

from .logging_conf import configure_logging
from .models import StepResult

logger = configure_logging("bode-pid-tuner.storage-utils")

PathLike = Union[str, Path]
LOCK_TIMEOUT = 10
CSV_HEADER = "t,y,e"


def lock_path_for(file_path: PathLike) -> Path:
    """Sibling lock file guarding writes to file_path."""
    path = Path(file_path)
    return path.with_name(path.name + ".lock")


def load_document(file_path: PathLike) -> Dict[str, Any]:
    """Load a JSON or YAML input document.

    Args:
        file_path: Path to the document

    Returns:
        Dict[str, Any]: The parsed mapping

    Raises:
        OSError: If the file cannot be read
        ValueError: If the file does not parse to a mapping
    """
    path = Path(file_path)
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = yaml.safe_load(f)
        except yaml.YAMLError as exc:
            raise ValueError(f"{path}: not valid JSON or YAML ({exc})") from exc
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a mapping at the top level")
    logger.debug("Loaded document %s", path)
    return data


def write_text(file_path: PathLike, text: str) -> None:
    """Write a text file under a portalocker lock, creating parent directories."""
    path = Path(file_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with portalocker.Lock(lock_path_for(path), timeout=LOCK_TIMEOUT) as _:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)


def save_json(file_path: PathLike, data: Dict[str, Any]) -> None:
    """Write a JSON document with indent 2; non-finite floats are rejected."""
    write_text(file_path, json.dumps(data, indent=2, ensure_ascii=False, allow_nan=False) + "\n")
    logger.debug("Saved JSON document to %s", file_path)


def step_csv_text(result: StepResult) -> str:
    """CSV rendering of a step response: header t,y,e then rows at 9 significant digits."""
    rows = [CSV_HEADER]
    rows.extend(f"{t:.9g},{y:.9g},{e:.9g}" for t, y, e in zip(result.t, result.y, result.e))
    return "\n".join(rows) + "\n"


def save_step_csv(file_path: PathLike, result: StepResult) -> None:
    """Write a step response as CSV."""
    write_text(file_path, step_csv_text(result))
    logger.debug("Saved %d samples to %s", len(result.t), file_path)
