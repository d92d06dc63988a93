"""Atomic file output: write to a temporary sibling, then rename over the target."""
import os
import tempfile
from pathlib import Path
from typing import Union

from exceptions import QHLError, EXIT_IO


def atomic_write_text(path: Union[str, Path], text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp_name, path)
    except OSError as e:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise QHLError(f"Could not write {path}: {e}", EXIT_IO, path=str(path))
    return path
