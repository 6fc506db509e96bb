"""Problem instance, allocation validation and physical performance metrics.

An allocation is an ``M x (M+N)`` integer matrix.  Column ``j < M`` holds
the antennas platform ``i`` spends on its transmit link toward platform
``j``; column ``M + z`` holds the antennas it spends illuminating target
``z``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    BudgetError,
    DegenerateGeometryError,
    DegenerateQError,
    NoIlluminationError,
    QAsymmetryError,
    QNotPSDError,
    ScenarioError,
)

SYMMETRY_TOL = 1e-10
PSD_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Scenario:
    """Immutable RCI network instance.

    Parameters
    ----------
    platform_positions : ndarray, shape (M, 2)
        Platform coordinates in meters.
    target_positions : ndarray, shape (N, 2)
        Target coordinates in meters.
    wavelength : float
        Carrier wavelength in meters.
    per_antenna_power : float
        Transmit power of one antenna, watts.
    noise_power : float
        Channel noise power, watts.
    budgets : ndarray of int, shape (M,)
        Antennas available on each platform.
    radar_Q : ndarray, shape (N, M, M)
        Symmetric PSD localization matrices, one per target.
    radar_b : ndarray, shape (N, M)
        Strictly positive localization vectors, one per target.
    """

    platform_positions: np.ndarray
    target_positions: np.ndarray
    wavelength: float
    per_antenna_power: float
    noise_power: float
    budgets: np.ndarray
    radar_Q: np.ndarray
    radar_b: np.ndarray
    name: str = field(default="scenario")

    def __post_init__(self):
        conv = {
            "platform_positions": np.asarray(self.platform_positions, dtype=float).reshape(-1, 2),
            "target_positions": np.asarray(self.target_positions, dtype=float).reshape(-1, 2),
            "budgets": np.asarray(self.budgets, dtype=np.int64).ravel(),
            "radar_Q": np.asarray(self.radar_Q, dtype=float),
            "radar_b": np.asarray(self.radar_b, dtype=float),
        }
        for key, val in conv.items():
            val.setflags(write=False)
            object.__setattr__(self, key, val)
        for key in ("wavelength", "per_antenna_power", "noise_power"):
            object.__setattr__(self, key, float(getattr(self, key)))
        check_scenario(self)

    @property
    def num_platforms(self) -> int:
        return self.platform_positions.shape[0]

    @property
    def num_targets(self) -> int:
        return self.target_positions.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        """Shape of the allocation matrix, ``(M, M + N)``."""
        return self.num_platforms, self.num_platforms + self.num_targets

    @property
    def power_ratio(self) -> float:
        return self.per_antenna_power / self.noise_power

    def distances(self) -> np.ndarray:
        diff = self.platform_positions[:, None, :] - self.platform_positions[None, :, :]
        return np.hypot(diff[..., 0], diff[..., 1])

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        arrays = ("platform_positions", "target_positions", "budgets", "radar_Q", "radar_b")
        scalars = ("wavelength", "per_antenna_power", "noise_power", "name")
        return all(getattr(self, s) == getattr(other, s) for s in scalars) and all(
            np.array_equal(getattr(self, a), getattr(other, a)) for a in arrays
        )

    __hash__ = None


def check_scenario(scenario: Scenario) -> None:
    """Raise a :class:`ScenarioError` subclass if an invariant is violated."""
    M = scenario.platform_positions.shape[0]
    N = scenario.target_positions.shape[0]
    if M < 1 or N < 1:
        raise ScenarioError(f"need at least one platform and one target, got M={M}, N={N}")
    for name in ("wavelength", "per_antenna_power", "noise_power"):
        val = getattr(scenario, name)
        if not np.isfinite(val) or val <= 0:
            raise ScenarioError(f"{name} must be a positive finite number, got {val!r}")
    if scenario.budgets.shape != (M,):
        raise ScenarioError(f"budgets must have length {M}, got shape {scenario.budgets.shape}")
    for i, g in enumerate(scenario.budgets):
        if g < 1:
            raise BudgetError(i, int(g))
    if scenario.radar_Q.shape != (N, M, M):
        raise ScenarioError(f"radar_Q must have shape {(N, M, M)}, got {scenario.radar_Q.shape}")
    if scenario.radar_b.shape != (N, M):
        raise ScenarioError(f"radar_b must have shape {(N, M)}, got {scenario.radar_b.shape}")
    for z in range(N):
        Q = scenario.radar_Q[z]
        dev = float(np.max(np.abs(Q - Q.T)))
        if dev > SYMMETRY_TOL:
            raise QAsymmetryError(z, dev)
        w_min = float(np.linalg.eigvalsh(0.5 * (Q + Q.T))[0])
        if w_min < -PSD_TOL:
            raise QNotPSDError(z, w_min)
        if not np.all(scenario.radar_b[z] > 0):
            raise ScenarioError(f"radar_b for target {z} must be strictly positive")
    d = scenario.distances()
    for i in range(M):
        for j in range(i + 1, M):
            if d[i, j] <= 0:
                raise DegenerateGeometryError(i, j)
            if scenario.wavelength / d[i, j] >= 1:
                raise ScenarioError(
                    f"platforms {i} and {j}: wavelength/distance = "
                    f"{scenario.wavelength / d[i, j]:.3g} is not < 1"
                )


def build_channel_gains(scenario: Scenario) -> np.ndarray:
    """Return the ``M x (M+N)`` gain matrix with entries ``(wavelength / d_ij)**2``.

    The diagonal and all localization columns are zero.
    """
    M, cols = scenario.shape
    d = scenario.distances()
    gains = np.zeros((M, cols))
    off = ~np.eye(M, dtype=bool)
    for i, j in zip(*np.nonzero(off)):
        if d[i, j] == 0:
            raise DegenerateGeometryError(min(i, j), max(i, j))
    gains[:, :M][off] = (scenario.wavelength / d[off]) ** 2
    return gains


def channel_capacity(a, gain, scenario: Scenario):
    """Capacity ``log2(1 + gain * a**2 * dP / N0)`` in bits/s/Hz.

    Works elementwise on arrays.  Zero antennas give zero capacity.
    """
    a = np.asarray(a, dtype=float)
    snr = np.asarray(gain, dtype=float) * a**2 * scenario.power_ratio
    out = np.log1p(snr) / np.log(2.0)  # log1p keeps full precision at tiny SNR
    return float(out) if out.ndim == 0 else out


def localization_crb_trace(column, Q, b, scenario: Scenario, target: int = 0) -> float:
    """Trace of the localization CRB for one target, ``b^T p / (p^T Q p)``.

    ``p`` is the per-platform transmit power devoted to the target,
    ``per_antenna_power * column``.
    """
    col = np.asarray(column, dtype=float)
    if not np.any(col > 0):
        raise NoIlluminationError(target)
    p = scenario.per_antenna_power * col
    quad = float(p @ np.asarray(Q) @ p)
    if quad <= 0:
        raise DegenerateQError(target, quad)
    return float(np.asarray(b) @ p) / quad


@dataclass(frozen=True, eq=False)
class MetricsReport:
    """Per-link capacities, per-target RCRB, and their network averages."""

    per_channel_capacity: np.ndarray
    per_target_crb: np.ndarray
    per_target_rcrb: np.ndarray
    acc: float
    alc: float

    def to_dict(self) -> dict:
        return {
            "per_channel_capacity": self.per_channel_capacity.tolist(),
            "per_target_crb": self.per_target_crb.tolist(),
            "per_target_rcrb": self.per_target_rcrb.tolist(),
            "acc": self.acc,
            "alc": self.alc,
        }


def evaluate_metrics(allocation, scenario: Scenario) -> MetricsReport:
    """Capacity of every directed link and RCRB of every target.

    ACC averages the ``M(M-1)`` off-diagonal capacities (zero when ``M == 1``);
    ALC averages the root CRB over targets.
    """
    A = np.asarray(allocation)
    M, cols = scenario.shape
    if A.shape != (M, cols):
        raise ValueError(f"allocation has shape {A.shape}, expected {(M, cols)}")
    gains = build_channel_gains(scenario)
    cap = channel_capacity(A[:, :M], gains[:, :M], scenario)
    cap = np.asarray(cap, dtype=float).reshape(M, M)
    np.fill_diagonal(cap, 0.0)
    crb = np.array(
        [
            localization_crb_trace(A[:, M + z], scenario.radar_Q[z], scenario.radar_b[z], scenario, z)
            for z in range(scenario.num_targets)
        ]
    )
    rcrb = np.sqrt(crb)
    acc = float(cap[~np.eye(M, dtype=bool)].mean()) if M > 1 else 0.0
    return MetricsReport(cap, crb, rcrb, acc, float(rcrb.mean()))


@dataclass(frozen=True)
class Violation:
    kind: str  # "negative", "non-integer", "diagonal", "budget", "shape"
    row: int | None
    col: int | None
    detail: str


def validate_allocation(allocation, scenario: Scenario) -> list[Violation]:
    """List every way ``allocation`` breaks the allocation invariants.

    An empty list means the allocation is feasible for ``scenario``.
    """
    A = np.asarray(allocation)
    M, cols = scenario.shape
    if A.shape != (M, cols):
        return [Violation("shape", None, None, f"shape {A.shape} != {(M, cols)}")]
    out = []
    Af = A.astype(float)
    for i, j in zip(*np.nonzero(Af < 0)):
        out.append(Violation("negative", int(i), int(j), f"a[{i},{j}] = {A[i, j]} < 0"))
    for i, j in zip(*np.nonzero(Af != np.round(Af))):
        out.append(Violation("non-integer", int(i), int(j), f"a[{i},{j}] = {A[i, j]} is not an integer"))
    for i in range(M):
        if Af[i, i] != 0:
            out.append(Violation("diagonal", i, i, f"a[{i},{i}] = {A[i, i]} must be 0"))
    sums = Af.sum(axis=1)
    for i in range(M):
        excess = sums[i] - scenario.budgets[i]
        if excess > 0:
            out.append(
                Violation(
                    "budget",
                    i,
                    None,
                    f"row {i} uses {sums[i]:g} of budget {scenario.budgets[i]} (excess {excess:g})",
                )
            )
    return out


def check_allocation(allocation, scenario: Scenario) -> np.ndarray:
    """Return ``allocation`` as an int64 array, raising ``ValueError`` if infeasible."""
    violations = validate_allocation(allocation, scenario)
    if violations:
        raise ValueError("infeasible allocation: " + "; ".join(v.detail for v in violations))
    return np.asarray(allocation).astype(np.int64)
