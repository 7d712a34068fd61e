"""
Data processing utilities for physprim

File output is atomic: content goes to a temporary file in the target
directory, which is then renamed over the destination.
"""

import json
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Union

from .error_handling import DataError

PathLike = Union[str, Path]


def atomic_write_bytes(path: PathLike, data: bytes) -> Path:
    """
    Write ``data`` to ``path`` via a temporary file and ``os.replace``.

    Args:
        path: Destination file
        data: Bytes to write

    Returns:
        The destination path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, temp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, 'wb') as f:
            f.write(data)
        os.replace(temp_name, path)
    except BaseException:
        if os.path.exists(temp_name):
            os.unlink(temp_name)
        raise
    return path


def atomic_write_text(path: PathLike, text: str) -> Path:
    return atomic_write_bytes(path, text.encode('utf-8'))


def dumps_json(data: Any) -> str:
    """Stable JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def write_json(path: PathLike, data: Any) -> Path:
    return atomic_write_text(path, dumps_json(data))


def read_json(path: PathLike) -> Any:
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except FileNotFoundError:
        raise DataError("File not found", path=str(path))
    except json.JSONDecodeError as e:
        raise DataError(f"Invalid JSON: {e.msg}", path=str(path), line=e.lineno)


def write_jsonl(path: PathLike, records: Iterable[Dict[str, Any]]) -> Path:
    """Write one compact, key-sorted JSON object per line."""
    lines = [json.dumps(record, sort_keys=True, separators=(',', ':')) for record in records]
    return atomic_write_text(path, "".join(line + "\n" for line in lines))


def iter_jsonl(path: PathLike) -> Iterator[Dict[str, Any]]:
    """
    Stream records from a JSON-lines file.

    Blank lines are skipped. A line that is not a JSON object raises
    DataError carrying its 1-based line number.
    """
    path = Path(path)
    if not path.exists():
        raise DataError("JSON-lines file not found", path=str(path))
    with open(path, 'r', encoding='utf-8') as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataError(f"Malformed record: {e.msg}", path=str(path), line=line_number)
            if not isinstance(record, dict):
                raise DataError("Record must be a JSON object", path=str(path), line=line_number)
            yield record


def read_jsonl(path: PathLike) -> List[Dict[str, Any]]:
    return list(iter_jsonl(path))
