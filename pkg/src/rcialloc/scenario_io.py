"""Seeded scenario generation, the JSON scenario format, and result export."""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._random import STREAM_B, STREAM_POSITIONS, STREAM_Q, make_rng
from .exceptions import (
    MissingFieldError,
    RCIError,
    ScenarioError,
    ScenarioFormatError,
    SchemaVersionError,
)
from .model import Scenario

SCHEMA_VERSION = "1.0"
Q_RIDGE = 1e-6
MAX_REDRAWS = 100


@dataclass(frozen=True)
class ScenarioSpec:
    """Recipe for a random (or partly explicit) scenario.

    Distances are meters.  ``b_scale`` multiplies the synthesized
    localization vectors; it only rescales the reported RCRB (which lands
    in kilometres) and never changes which allocation is best.

    The default noise power puts typical link SNRs high enough that
    capacity thresholds up to 5 bits/s/Hz are reachable with 600 antennas.
    Raise it (for example to ``0.1``) for the low-SNR regime in which the
    summed-SNR objective is a close proxy for summed capacity.
    """

    M: int = 3
    N: int = 3
    field_size: float = 10_000.0
    budget_per_platform: int = 600
    wavelength: float = 0.1
    per_antenna_power: float = 1000.0
    noise_power: float = 1e-4
    b_scale: float = 1e4
    seed: int = 0
    platform_positions: tuple | None = None
    target_positions: tuple | None = None
    radar_Q: tuple | None = None
    radar_b: tuple | None = None
    name: str | None = None

    def __post_init__(self):
        if self.M < 1 or self.N < 1:
            raise ValueError(f"need M >= 1 and N >= 1, got M={self.M}, N={self.N}")
        if self.field_size <= 0:
            raise ValueError("field_size must be positive")
        if self.budget_per_platform < 1:
            raise ValueError("budget_per_platform must be >= 1")


def _min_platform_gap(P):
    if P.shape[0] < 2:
        return np.inf
    d = np.hypot(*(P[:, None, :] - P[None, :, :]).transpose(2, 0, 1))
    return float(d[~np.eye(P.shape[0], dtype=bool)].min())


def generate_scenario(spec: ScenarioSpec) -> Scenario:
    """Draw platform/target positions and localization matrices from ``spec.seed``.

    ``Q_z = D^T D + 1e-6 I`` with standard normal ``D``; entry ``i`` of
    ``b_z`` is ``U(0.5, 1.5) * range(i, z) / field_size * b_scale``.
    """
    M, N = spec.M, spec.N
    rng_pos = make_rng(spec.seed, STREAM_POSITIONS)
    if spec.platform_positions is not None:
        P = np.asarray(spec.platform_positions, dtype=float).reshape(M, 2)
    else:
        for _ in range(MAX_REDRAWS):
            P = rng_pos.uniform(0.0, spec.field_size, size=(M, 2))
            if _min_platform_gap(P) > spec.wavelength:
                break
        else:
            raise ScenarioError(f"could not place {M} distinct platforms after {MAX_REDRAWS} draws")
    if spec.target_positions is not None:
        T = np.asarray(spec.target_positions, dtype=float).reshape(N, 2)
    else:
        T = rng_pos.uniform(0.0, spec.field_size, size=(N, 2))

    if spec.radar_Q is not None:
        Q = np.asarray(spec.radar_Q, dtype=float).reshape(N, M, M)
    else:
        rng_q = make_rng(spec.seed, STREAM_Q)
        D = rng_q.standard_normal(size=(N, M, M))
        Q = np.einsum("zki,zkj->zij", D, D) + Q_RIDGE * np.eye(M)
    if spec.radar_b is not None:
        b = np.asarray(spec.radar_b, dtype=float).reshape(N, M)
    else:
        rng_b = make_rng(spec.seed, STREAM_B)
        ranges = np.hypot(*(T[:, None, :] - P[None, :, :]).transpose(2, 0, 1))  # (N, M)
        ranges = np.maximum(ranges, 1.0)
        b = rng_b.uniform(0.5, 1.5, size=(N, M)) * ranges / spec.field_size * spec.b_scale

    return Scenario(
        platform_positions=P,
        target_positions=T,
        wavelength=spec.wavelength,
        per_antenna_power=spec.per_antenna_power,
        noise_power=spec.noise_power,
        budgets=np.full(M, spec.budget_per_platform, dtype=np.int64),
        radar_Q=Q,
        radar_b=b,
        name=spec.name or f"M{M}N{N}s{spec.seed}",
    )


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "name": scenario.name,
        "num_platforms": scenario.num_platforms,
        "num_targets": scenario.num_targets,
        "wavelength": scenario.wavelength,
        "per_antenna_power": scenario.per_antenna_power,
        "noise_power": scenario.noise_power,
        "budgets": scenario.budgets.tolist(),
        "platform_positions": scenario.platform_positions.tolist(),
        "target_positions": scenario.target_positions.tolist(),
        "radar_Q": scenario.radar_Q.tolist(),
        "radar_b": scenario.radar_b.tolist(),
    }


_REQUIRED = ("schema_version", "wavelength", "per_antenna_power", "noise_power", "budgets",
             "platform_positions", "target_positions", "radar_Q", "radar_b")


def scenario_from_dict(data: dict) -> Scenario:
    for key in _REQUIRED:
        if key not in data:
            raise MissingFieldError(key)
    version = str(data["schema_version"])
    if version.split(".")[0] != SCHEMA_VERSION.split(".")[0]:
        raise SchemaVersionError(f"unsupported schema version {version!r} (reader supports {SCHEMA_VERSION})")
    try:
        scenario = Scenario(
            platform_positions=np.array(data["platform_positions"], dtype=float),
            target_positions=np.array(data["target_positions"], dtype=float),
            wavelength=data["wavelength"],
            per_antenna_power=data["per_antenna_power"],
            noise_power=data["noise_power"],
            budgets=np.array(data["budgets"]),
            radar_Q=np.array(data["radar_Q"], dtype=float),
            radar_b=np.array(data["radar_b"], dtype=float),
            name=data.get("name", "scenario"),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, RCIError):
            raise
        raise ScenarioFormatError(f"malformed scenario: {exc}") from exc
    for key, expected in (("num_platforms", scenario.num_platforms), ("num_targets", scenario.num_targets)):
        if key in data and int(data[key]) != expected:
            raise ScenarioFormatError(f"{key}={data[key]} disagrees with the materialized arrays ({expected})")
    return scenario


def write_scenario(scenario: Scenario, path) -> None:
    # json emits shortest round-trip reprs, so floats survive bit-exactly
    Path(path).write_text(json.dumps(scenario_to_dict(scenario), indent=1) + "\n")


def read_scenario(path) -> Scenario:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ScenarioFormatError(f"{path}: top level must be an object")
    return scenario_from_dict(data)


RESULT_COLUMNS = ("scenario", "algorithm", "seed", "acc_bps_hz", "alc_km", "objective", "feasible", "wall_time_s")


@dataclass
class ResultRow:
    scenario: str
    algorithm: str
    seed: int
    acc: float
    alc: float
    objective: float
    feasible: bool
    wall_time: float
    capacities: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    rcrb: np.ndarray = field(default_factory=lambda: np.zeros(0))
    eta: float | None = None

    @classmethod
    def from_report(cls, scenario_name, report, seed, eta=None) -> "ResultRow":
        m = report.metrics
        return cls(scenario_name, report.algorithm, int(seed), m.acc, m.alc, report.objective,
                   report.feasible, report.wall_time, m.per_channel_capacity, m.per_target_rcrb, eta)

    @classmethod
    def infeasible(cls, scenario_name, algorithm, seed, eta=None) -> "ResultRow":
        nan = float("nan")
        return cls(scenario_name, algorithm, int(seed), nan, nan, nan, False, 0.0, eta=eta)

    def sort_key(self):
        return (self.scenario, self.algorithm, self.seed, -1 if self.eta is None else self.eta)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".9g")
    return str(v)


def _row_fields(rows):
    has_eta = any(r.eta is not None for r in rows)
    cap_cols = max((r.capacities.shape[0] for r in rows), default=0)
    tgt_cols = max((r.rcrb.shape[0] for r in rows), default=0)
    header = list(RESULT_COLUMNS)
    if has_eta:
        header.append("eta")
    header += [f"cap_{i}_{j}" for i in range(cap_cols) for j in range(cap_cols) if i != j]
    header += [f"rcrb_{z}" for z in range(tgt_cols)]
    return header, has_eta, cap_cols, tgt_cols


def _row_values(r, has_eta, cap_cols, tgt_cols):
    vals = [r.scenario, r.algorithm, r.seed, r.acc, r.alc, r.objective, bool(r.feasible), r.wall_time]
    if has_eta:
        vals.append(r.eta)
    for i in range(cap_cols):
        for j in range(cap_cols):
            if i != j:
                vals.append(r.capacities[i, j] if r.capacities.shape[0] > i else float("nan"))
    vals += [r.rcrb[z] if r.rcrb.shape[0] > z else float("nan") for z in range(tgt_cols)]
    return vals


def write_results(rows, path, format: str = "csv") -> None:
    """Write result rows as CSV (fixed header) or as a JSON array of objects.

    Numbers carry 9 significant digits.  Raises ``ValueError`` on empty input
    and ``OSError`` naming the path on I/O failure.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("refusing to write an empty result set")
    header, has_eta, cap_cols, tgt_cols = _row_fields(rows)
    table = [[_fmt(v) for v in _row_values(r, has_eta, cap_cols, tgt_cols)] for r in rows]
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(table)
        text = buf.getvalue()
    elif format == "json":
        objs = []
        for vals in table:
            rec = {}
            for key, v in zip(header, vals):
                rec[key] = v if key in ("scenario", "algorithm") else json.loads(
                    v if v not in ("nan", "inf", "-inf") else "null")
            objs.append(rec)
        text = json.dumps(objs, indent=1) + "\n"
    else:
        raise ValueError(f"unknown result format {format!r}")
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write results to {os.fspath(path)}: {exc.strerror or exc}") from exc
