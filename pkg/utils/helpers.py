# utils/helpers.py - Input loading, provenance hashing and report emission

import hashlib
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Type, TypeVar

import numpy as np
import pandas as pd
from pydantic import BaseModel
from pydantic import ValidationError as SchemaError

from core.errors import InputFileError

logger = logging.getLogger(__name__)

PROJECT_ROOT = Path(__file__).parent.parent

ModelT = TypeVar("ModelT", bound=BaseModel)


def resolve_path(file_name: str) -> Path:
    """
    Resolves an input path. Relative paths are tried against the working directory
    first and then against the project root.

    Args:
        file_name (str): Path as given on the command line.
    """
    path = Path(file_name)
    if path.is_absolute() or path.exists():
        return path
    return PROJECT_ROOT / path


def load_json(file_name: str) -> Dict[str, Any]:
    file_path = resolve_path(file_name)
    try:
        with open(file_path, encoding="utf-8") as f:
            payload = json.load(f)
    except FileNotFoundError:
        raise InputFileError(f"input file not found: {file_path}")
    except json.JSONDecodeError as e:
        raise InputFileError(f"malformed JSON in {file_path}: line {e.lineno}, column {e.colno}: {e.msg}")
    except OSError as e:
        raise InputFileError(f"cannot read {file_path}: {e}")
    logger.debug("SUCCESS: loaded %s", file_path)
    return payload


def load_model(file_name: str, model: Type[ModelT]) -> ModelT:
    """Loads a JSON file and validates it against a pydantic schema."""
    payload = load_json(file_name)
    try:
        return model.model_validate(payload)
    except SchemaError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"]) or "<root>"
        raise InputFileError(f"{file_name}: field '{location}': {first['msg']}")


def canonical_hash(payload: Any) -> str:
    """SHA-256 of the canonical JSON form (sorted keys, compact separators)."""
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def file_hash(file_name: str) -> str:
    return canonical_hash(load_json(file_name))


def to_jsonable(value: Any) -> Any:
    """numpy values to plain Python; non-finite floats become None so the output stays valid JSON."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def render_json(model: BaseModel) -> str:
    payload = to_jsonable(model.model_dump(by_alias=True))
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def render_csv(table: pd.DataFrame) -> str:
    return table.to_csv(index=False, lineterminator="\n")


def emit(text: str, out: Optional[str] = None) -> None:
    """Writes text to `out`, or to stdout when no path is given."""
    if out is None:
        sys.stdout.write(text)
        return
    out_path = Path(out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    logger.info("SUCCESS: report written to %s", out_path)
