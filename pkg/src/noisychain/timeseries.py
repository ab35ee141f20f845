"""Observable time series and their on-disk formats.

Every backend produces the same column set so downstream analysis never
branches on where data came from:

- loschmidt: echo <psi0| rho(t) |psi0>
- return_rate: -ln(loschmidt) / n
- czz: <sz sz> on the two central sites
- trace_drift: |trace - 1| before the per-step renormalization (0 for
  backends that preserve the trace exactly)
- max_bond_dim: largest internal bond dimension (0 where meaningless)
- discarded_weight: cumulative truncated Schmidt weight (0 likewise)

CSV cells are written with repr-exact precision so a parse of the file
reproduces the floats bit-for-bit, and identical runs produce identical
bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

COLUMNS = (
    "loschmidt",
    "return_rate",
    "czz",
    "trace_drift",
    "max_bond_dim",
    "discarded_weight",
)

_SCHEMA_VERSION = 1


@dataclass
class TimeSeries:
    """A shared time grid plus one float array per named column."""

    times: np.ndarray
    columns: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1 or self.times.size == 0:
            raise ValueError("times must be a non-empty 1-d array")
        if np.any(np.diff(self.times) <= 0.0):
            raise ValueError("times must be strictly increasing")
        cols = {}
        for name, values in self.columns.items():
            values = np.asarray(values, dtype=float)
            if values.shape != self.times.shape:
                raise ValueError(
                    f"column {name!r} has length {values.shape}, grid has {self.times.shape}"
                )
            cols[name] = values
        self.columns = cols

    def __len__(self) -> int:
        return self.times.size

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise KeyError(f"no column {name!r}; have {sorted(self.columns)}")
        return self.columns[name]

    def same_grid(self, other: "TimeSeries", tol: float = 0.0) -> bool:
        return self.times.shape == other.times.shape and bool(
            np.all(np.abs(self.times - other.times) <= tol)
        )


def _format_cell(x: float) -> str:
    # repr round-trips doubles exactly and is the shortest such string.
    return repr(float(x))


def write_csv(series: TimeSeries, path: str) -> None:
    names = sorted(series.columns)
    lines = ["t," + ",".join(names)]
    for i, t in enumerate(series.times):
        cells = [_format_cell(t)] + [_format_cell(series.columns[c][i]) for c in names]
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path: str) -> TimeSeries:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if not header or header[0] != "t":
            raise ValueError(f"{path}: expected a 't' column first, got {header}")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    names = header[1:]
    data = np.array([[float(cell) for cell in row] for row in rows], dtype=float)
    if data.shape[1] != len(header):
        raise ValueError(f"{path}: ragged rows")
    columns = {name: data[:, i + 1] for i, name in enumerate(names)}
    return TimeSeries(times=data[:, 0], columns=columns)


def write_json(series: TimeSeries, path: str) -> None:
    payload = {
        "schema_version": _SCHEMA_VERSION,
        "kind": "timeseries",
        "t": series.times.tolist(),
        "columns": {name: series.columns[name].tolist() for name in sorted(series.columns)},
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_json(path: str) -> TimeSeries:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    version = payload.get("schema_version")
    if version != _SCHEMA_VERSION:
        raise ValueError(f"{path}: unsupported schema_version {version}")
    if payload.get("kind") != "timeseries":
        raise ValueError(f"{path}: not a timeseries file")
    return TimeSeries(
        times=np.asarray(payload["t"], dtype=float),
        columns={k: np.asarray(v, dtype=float) for k, v in payload["columns"].items()},
    )
