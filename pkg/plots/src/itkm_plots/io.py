"""Readers for the documented itkm file formats.

Deliberately self-contained: this component consumes only the published
CSV schema and the ITKM binary matrix format (magic b"ITKM", u32 version
1, u64 d, u64 K, column-major little-endian float64), never the primary
package's internals.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

METRICS_COLUMNS = [
    "trial",
    "iter",
    "algorithm",
    "d_asym",
    "recovery_rate",
    "support_mismatch",
    "sign_mismatch",
    "replacements",
    "seconds",
]


class PlotDataError(ValueError):
    pass


def read_metrics_csv(path: str | Path) -> list[dict]:
    """Parse a metrics CSV; raises PlotDataError on schema problems or no rows."""
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise PlotDataError(f"{path}: empty file")
        missing = [c for c in METRICS_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise PlotDataError(f"{path}: missing columns {missing}")
        rows = []
        for raw in reader:
            rows.append(
                {
                    "trial": int(raw["trial"]),
                    "iter": int(raw["iter"]),
                    "algorithm": raw["algorithm"],
                    "d_asym": float(raw["d_asym"]),
                    "recovery_rate": float(raw["recovery_rate"]),
                }
            )
    if not rows:
        raise PlotDataError(f"{path}: no rows")
    return rows


def read_itkm_matrix(path: str | Path) -> np.ndarray:
    buf = Path(path).read_bytes()
    if buf[:4] != b"ITKM":
        raise PlotDataError(f"{path}: bad magic {buf[:4]!r}")
    version, d, K = struct.unpack_from("<IQQ", buf, 4)
    if version != 1:
        raise PlotDataError(f"{path}: unsupported version {version}")
    if len(buf) < 24 + 8 * d * K:
        raise PlotDataError(f"{path}: truncated matrix file")
    return np.frombuffer(buf, dtype="<f8", count=d * K, offset=24).reshape((d, K), order="F")
