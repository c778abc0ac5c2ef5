"""CSV output with all-or-nothing file semantics.

Each file is written under `<name>.tmp` and renamed into place once complete.
On a runtime failure the files already written are renamed `<name>.failed`;
on a validation failure they are removed.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from pathlib import Path
from typing import Any, Iterable, List, Mapping, Sequence


logger = logging.getLogger("NsddeCli")

FAILED_SUFFIX = ".failed"


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, (dict, list)):
        return json.dumps(value, sort_keys=True, separators=(",", ":"), default=_json_default)
    if hasattr(value, "dtype"):
        return format_value(value.item())
    return str(value)


def _json_default(value: Any) -> Any:
    if hasattr(value, "tolist"):
        return value.tolist()
    raise TypeError(f"{type(value).__name__} is not JSON serialisable")


def _json_float(value: float) -> Any:
    # JSON has no inf/nan literals
    return value if math.isfinite(value) else str(value)


class CsvOutputs:
    """Tracks the CSV files one command has produced in `directory`."""

    def __init__(self, directory: Path) -> None:
        self.directory = Path(directory)
        self.written: List[Path] = []

    def write(self, name: str, fieldnames: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.directory / name
        tmp_path = path.with_name(path.name + ".tmp")
        n_rows = 0
        try:
            with open(tmp_path, "w", newline="", encoding="utf-8") as f:
                writer = csv.DictWriter(f, fieldnames=list(fieldnames), extrasaction="raise")
                writer.writeheader()
                for row in rows:
                    writer.writerow({k: format_value(v) for k, v in row.items()})
                    n_rows += 1
            os.replace(tmp_path, path)
        except BaseException:
            tmp_path.unlink(missing_ok=True)
            raise
        self.written.append(path)
        logger.info(f"Wrote {n_rows} rows to {path}")
        return path

    def mark_failed(self) -> List[Path]:
        failed = []
        for path in self.written:
            target = path.with_name(path.name + FAILED_SUFFIX)
            os.replace(path, target)
            failed.append(target)
        self.written = []
        return failed

    def discard(self) -> None:
        for path in self.written:
            path.unlink(missing_ok=True)
        self.written = []


def witness_json(witness: Mapping[str, Any]) -> str:
    cleaned = {
        k: ([_json_float(float(x)) for x in v] if isinstance(v, list) and all(isinstance(x, (int, float)) for x in v) else v)
        for k, v in witness.items()
    }
    return format_value(cleaned)
