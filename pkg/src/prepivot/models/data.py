"""Plain-text numeric matrix loader."""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from prepivot.errors import ParameterError

_SPLIT = re.compile(r"[,\s]+")


def load_matrix(path: str | Path) -> np.ndarray:
    """Read a whitespace- or comma-separated numeric matrix.

    Blank lines and lines starting with ``#`` are skipped.  Every row must
    have the same number of columns.
    """
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        try:
            rows.append([float(tok) for tok in _SPLIT.split(text) if tok])
        except ValueError as exc:
            raise ParameterError(f"{path}:{lineno}: non-numeric entry") from exc
    if not rows:
        raise ParameterError(f"{path}: no data rows")
    width = {len(r) for r in rows}
    if len(width) != 1:
        raise ParameterError(f"{path}: rows have different lengths")
    out = np.array(rows, dtype=float)
    if not np.isfinite(out).all():
        raise ParameterError(f"{path}: non-finite entry")
    return out
