"""Strict readers for the experiment output file schemas.

Malformed input is rejected with SchemaError; nothing is repaired or
guessed.  All parsing is locale-independent (plain `float()` on CSV text).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

CATEGORIES = ("fair", "soft", "hard", "highord")

STUDY_HEADER = ["n_spins", "degeneracy", "driver_order",
                "fair", "soft", "hard", "highord", "samples", "seed"]
RANK_HEADER = ["rank", "p_mean", "p_stderr"]


class SchemaError(ValueError):
    """Input file does not match the documented schema."""


def _read_rows(path) -> list[list[str]]:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise SchemaError(f"{path}: {exc}") from exc
    if len(rows) < 2:
        raise SchemaError(f"{path}: no data rows")
    return rows


def _floats(path, row: list[str]) -> list[float]:
    try:
        return [float(x) for x in row]
    except ValueError as exc:
        raise SchemaError(f"{path}: non-numeric value in {row!r}") from exc


@dataclass(frozen=True)
class TraceData:
    times: list[float]
    norms: list[float]
    p_total: list[float]
    probabilities: list[list[float]]    # one series per ground-state column
    labels: list[str]
    gauge: bool


def read_trace(path, columns_path=None) -> TraceData:
    """Trace CSV `t,norm,p_total,p_0,...` with optional bitstring sidecar."""
    rows = _read_rows(path)
    header = rows[0]
    fixed = ["t", "norm", "p_total"]
    if header[:3] != fixed or len(header) < 4:
        raise SchemaError(f"{path}: expected header t,norm,p_total,p_0,...")
    k = len(header) - 3
    if header[3:] != [f"p_{i}" for i in range(k)]:
        raise SchemaError(f"{path}: probability columns must be p_0..p_{k - 1}")
    data = [_floats(path, r) for r in rows[1:]]
    if any(len(r) != len(header) for r in data):
        raise SchemaError(f"{path}: ragged rows")
    labels = [f"p_{i}" for i in range(k)]
    gauge = False
    if columns_path is not None:
        try:
            side = json.loads(Path(columns_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise SchemaError(f"{columns_path}: {exc}") from exc
        gauge = bool(side.get("gauge", False))
        labels = [str(side.get(f"p_{i}", f"p_{i}")) for i in range(k)]
    return TraceData(
        times=[r[0] for r in data],
        norms=[r[1] for r in data],
        p_total=[r[2] for r in data],
        probabilities=[[r[3 + i] for r in data] for i in range(k)],
        labels=labels,
        gauge=gauge,
    )


@dataclass(frozen=True)
class StudyRow:
    n_spins: int
    degeneracy: int
    driver_order: int
    fractions: dict


def read_study(path) -> list[StudyRow]:
    """Driver-study CSV; every row's category fractions must sum to 1."""
    rows = _read_rows(path)
    if rows[0] != STUDY_HEADER:
        raise SchemaError(f"{path}: expected header {','.join(STUDY_HEADER)}")
    out = []
    for raw in rows[1:]:
        if len(raw) != len(STUDY_HEADER):
            raise SchemaError(f"{path}: ragged rows")
        vals = _floats(path, raw)
        fractions = dict(zip(CATEGORIES, vals[3:7]))
        total = sum(fractions.values())
        if abs(total - 1.0) > 1e-9:
            raise SchemaError(
                f"{path}: category fractions sum to {total!r}, not 1")
        out.append(StudyRow(n_spins=int(vals[0]), degeneracy=int(vals[1]),
                            driver_order=int(vals[2]), fractions=fractions))
    return out


@dataclass(frozen=True)
class RankCurve:
    label: str
    p_mean: list[float]
    p_stderr: list[float]


def read_rank(path, label: str) -> RankCurve:
    """Rank-curve CSV `rank,p_mean,p_stderr` with ranks 0..k-1 in order."""
    rows = _read_rows(path)
    if rows[0] != RANK_HEADER:
        raise SchemaError(f"{path}: expected header {','.join(RANK_HEADER)}")
    data = [_floats(path, r) for r in rows[1:]]
    if any(len(r) != 3 for r in data):
        raise SchemaError(f"{path}: ragged rows")
    if [int(r[0]) for r in data] != list(range(len(data))):
        raise SchemaError(f"{path}: ranks must be 0..k-1 in order")
    return RankCurve(label=label,
                     p_mean=[r[1] for r in data],
                     p_stderr=[r[2] for r in data])


def read_rank_set(paths, labels=None) -> list[RankCurve]:
    """Several engines' rank curves; the rank count k must agree."""
    if not paths:
        raise SchemaError("no rank CSV inputs")
    if labels is None:
        labels = [Path(p).stem.removeprefix("rank_") for p in paths]
    if len(labels) != len(paths):
        raise SchemaError("need exactly one label per input")
    curves = [read_rank(p, lab) for p, lab in zip(paths, labels)]
    k = len(curves[0].p_mean)
    for c in curves[1:]:
        if len(c.p_mean) != k:
            raise SchemaError(
                f"rank count mismatch: {c.label} has {len(c.p_mean)}, "
                f"{curves[0].label} has {k}")
    return curves
