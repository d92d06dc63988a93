"""
Text format for supermatrices.

    superoperator dim_in=16 dim_out=16 flags=tp,cp
    re,im,re,im,...          (one line per row, dim_in re,im pairs)

Numbers are written with repr() so a save/load round trip is exact.
"""
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from exceptions import DimensionMismatch, ParseError, QHLError, EXIT_IO
from logger import get_logger
from ..storage import atomic_write_text
from .superoperators import Superoperator

logger = get_logger(__name__)

HEADER_TAG = "superoperator"
FLAG_NAMES = {"tp": "trace_preserving", "cp": "completely_positive"}


def format_superop(s: Superoperator) -> str:
    flags = [short for short, attr in FLAG_NAMES.items() if getattr(s, attr)]
    lines = [f"{HEADER_TAG} dim_in={s.dim_in} dim_out={s.dim_out} flags={','.join(flags) or 'none'}"]
    for row in s.matrix:
        lines.append(",".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row))
    return "\n".join(lines) + "\n"


def save_superop(s: Superoperator, path: Union[str, Path]) -> Path:
    """Write a channel file atomically."""
    path = atomic_write_text(path, format_superop(s))
    logger.info(f"Wrote {s.dim_out}x{s.dim_in} superoperator to {path}")
    return path


def _parse_header(line: str) -> Tuple[int, int, List[str]]:
    fields = line.split()
    if not fields or fields[0] != HEADER_TAG:
        raise ParseError(f"Expected header starting with {HEADER_TAG!r}", line=1, column=1)
    values = {}
    column = len(fields[0]) + 2
    for field in fields[1:]:
        key, sep, value = field.partition("=")
        if not sep:
            raise ParseError(f"Malformed header field {field!r}", line=1, column=column)
        values[key] = (value, column)
        column += len(field) + 1
    for key in ("dim_in", "dim_out"):
        if key not in values:
            raise ParseError(f"Header is missing {key}", line=1, column=column)
        value, col = values[key]
        if not value.isdigit() or int(value) < 1:
            raise ParseError(f"{key} must be a positive integer", line=1, column=col)
    flags_value, flags_col = values.get("flags", ("none", column))
    flags = [] if flags_value == "none" else flags_value.split(",")
    for flag in flags:
        if flag not in FLAG_NAMES:
            raise ParseError(f"Unknown flag {flag!r}", line=1, column=flags_col)
    return int(values["dim_in"][0]), int(values["dim_out"][0]), flags


def parse_superop(text: str) -> Superoperator:
    lines = text.splitlines()
    if not lines:
        raise ParseError("Empty channel file", line=1, column=1)
    dim_in, dim_out, flags = _parse_header(lines[0])
    rows = list(lines[1:])
    while rows and not rows[-1].strip():
        rows.pop()
    if len(rows) != dim_out:
        raise ParseError(f"Expected {dim_out} rows, found {len(rows)}", line=len(rows) + 2, column=1)

    matrix = np.empty((dim_out, dim_in), dtype=complex)
    for r, line in enumerate(rows):
        line_no = r + 2
        fields = line.split(",")
        if len(fields) != 2 * dim_in:
            raise ParseError(f"Row has {len(fields)} numbers, expected {2 * dim_in}",
                             line=line_no, column=len(line) + 1)
        numbers = []
        column = 1
        for field in fields:
            try:
                numbers.append(float(field))
            except ValueError:
                raise ParseError(f"Not a number: {field.strip()!r}", line=line_no, column=column)
            column += len(field) + 1
        values = np.array(numbers)
        matrix[r] = values[0::2] + 1j * values[1::2]

    try:
        s = Superoperator(matrix=matrix, **{FLAG_NAMES[f]: True for f in flags})
    except ValueError as e:
        raise DimensionMismatch(f"Channel file dimensions are invalid: {e}")
    return s.validate()


def load_superop(path: Union[str, Path]) -> Superoperator:
    """Read and validate a channel file; flags are checked against the matrix."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise QHLError(f"Could not read channel file {path}: {e}", EXIT_IO, path=str(path))
    s = parse_superop(text)
    logger.debug(f"Loaded {s.dim_out}x{s.dim_in} superoperator from {path}")
    return s
