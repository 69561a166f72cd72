"""Atomic file output, CSV tables and density snapshots."""
import io
import json
import os
import tempfile
from typing import Iterable, Sequence, Tuple

import numpy as np

from .errors import ContractError
from .grid import Grid


def write_atomic(path: str, data) -> str:
    """Write text or bytes to ``path`` via a temporary file and ``os.replace``."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    if isinstance(data, str):
        data = data.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-",
                               suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def fmt(x) -> str:
    """Shortest round-tripping text for a number; empty for ``None``."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    return repr(float(x))


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    return write_atomic(path, csv_text(header, rows))


def read_csv(path: str):
    """``(header, rows)`` with rows as lists of strings."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]


def write_json(path: str, obj) -> str:
    return write_atomic(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


# ------------------------------------------------------------------ snapshots

def snapshot_text(rho: np.ndarray, grid: Grid, t: float) -> str:
    """Plain-text matrix with one header line ``# nx= ny= bounds= t=``.

    There are ``nx`` rows of ``ny`` values (``ny = 1`` in 1D), written with
    17 significant digits so they parse back bit-exactly.
    """
    rho = np.asarray(rho, dtype=float)
    if rho.shape != grid.points:
        raise ContractError(f"density shape {rho.shape} != grid {grid.points}")
    nx = grid.points[0]
    ny = grid.points[1] if grid.dim == 2 else 1
    bounds = ",".join(fmt(v) for pair in grid.bounds for v in pair)
    buf = io.StringIO()
    np.savetxt(buf, rho.reshape(nx, ny), fmt="%.17g",
               header=f"nx={nx} ny={ny} bounds={bounds} t={fmt(t)}", comments="# ")
    return buf.getvalue()


def write_snapshot(path: str, rho: np.ndarray, grid: Grid, t: float) -> str:
    return write_atomic(path, snapshot_text(rho, grid, t))


def read_snapshot(path: str) -> Tuple[np.ndarray, dict]:
    """Parse a snapshot back into ``(rho, meta)``; 1D densities come back flat."""
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
        if not first.startswith("#"):
            raise ContractError(f"{path}: missing snapshot header")
        meta = {}
        for item in first[1:].split():
            key, _, value = item.partition("=")
            meta[key] = value
        data = np.loadtxt(fh, dtype=float, ndmin=2)
    nx, ny = int(meta["nx"]), int(meta["ny"])
    bounds = [float(v) for v in meta["bounds"].split(",")]
    out = {"nx": nx, "ny": ny, "t": float(meta["t"]),
           "bounds": tuple(zip(bounds[::2], bounds[1::2]))}
    if data.shape != (nx, ny):
        raise ContractError(f"{path}: expected {nx}x{ny} values, got {data.shape}")
    return (data[:, 0] if len(out["bounds"]) == 1 else data), out
