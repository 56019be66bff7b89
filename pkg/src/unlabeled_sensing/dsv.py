"""Plain-text matrix and key=value I/O."""
from __future__ import annotations

from pathlib import Path

import numpy as np


def write_matrix(path, A) -> None:
    """One row per line, space separated, round-trip (``%.17g``) precision."""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    with open(path, "w") as fh:
        for row in A:
            fh.write(" ".join(format(float(v), ".17g") for v in row))
            fh.write("\n")


def read_matrix(path) -> np.ndarray:
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line:
            rows.append([float(tok) for tok in line.split()])
    if not rows:
        raise ValueError(f"{path}: no matrix rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError(f"{path}: ragged rows")
    return np.array(rows, dtype=np.float64)


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "na"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def write_key_values(path, items: dict) -> None:
    with open(path, "w") as fh:
        for k, v in items.items():
            fh.write(f"{k}={format_value(v)}\n")


def read_key_values(path) -> dict[str, str]:
    out: dict[str, str] = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out
