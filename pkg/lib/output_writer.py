"""
Deterministic JSON and CSV output.

Files are written to a temporary sibling and renamed into place, so a
reader never sees a partial file.
"""

import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Optional, Sequence

import click
import numpy as np

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'


def _default(value: Any) -> Any:
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def dumps_json(payload: Any) -> str:
    """JSON text with sorted keys and two-space indentation, newline-terminated."""
    return json.dumps(payload, sort_keys=True, indent=2, default=_default) + '\n'


def format_csv(rows: np.ndarray, header: Sequence[str]) -> str:
    """CSV text with a header row and every value at 17 significant digits."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.size and rows.shape[1] != len(header):
        raise ValueError(f"{rows.shape[1]} columns but {len(header)} header names")
    lines = [','.join(header)]
    lines.extend(','.join(FLOAT_FORMAT % x for x in row) for row in rows if rows.size)
    return '\n'.join(lines) + '\n'


def point_header(dim: int) -> Sequence[str]:
    """Column names for orbit points: x,y,z on S^2, x0..x3 on S^3, plus/minus on S^2 x S^2."""
    if dim == 3:
        return ('x', 'y', 'z')
    if dim == 6:
        return ('x_plus', 'y_plus', 'z_plus', 'x_minus', 'y_minus', 'z_minus')
    return tuple(f"x{i}" for i in range(dim))


def write_atomic(path: Path, text: str) -> Path:
    """
    Write text to path through a temporary file and os.replace.

    Raises:
        IOError: If the write fails; the partial file is removed
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix='.tmp', dir=path.parent)
    tmp_path = Path(tmp_name)
    try:
        with os.fdopen(fd, 'w', newline='') as f:
            f.write(text)
        os.replace(tmp_path, path)
        logger.info(f"Wrote {path}")
        return path
    except Exception as e:
        logger.error(f"Failed to write {path}: {e}")
        if tmp_path.exists():
            tmp_path.unlink()
        raise IOError(f"Writing {path} failed: {e}")


def write_csv(path: Path, rows: np.ndarray, header: Optional[Sequence[str]] = None) -> Path:
    """Orbit points as CSV; the header defaults to point_header for the column count."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    return write_atomic(path, format_csv(rows, header or point_header(rows.shape[1])))


def emit(text: str, output: Optional[Path]) -> None:
    """Write text atomically to output, or print it to stdout when no path is given."""
    if output is None:
        click.echo(text, nl=False)
    else:
        write_atomic(Path(output), text)
