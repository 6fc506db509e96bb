"""Projected gradient ascent over per-platform antenna budgets.

The feasible polytope is a product of capped simplices, one per platform
row: ``x >= 0``, ``sum(row) <= budget``, with some entries pinned to zero.
Because the rows do not interact, the Euclidean projection is computed
row by row.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exceptions import InfeasibleError, ObjectiveDomainError

# fault-injection hook: -1 turns every ascent step into a descent step
_ascent_sign = 1.0


@contextmanager
def flipped_ascent():
    """Temporarily flip the gradient step sign (validation harness only)."""
    global _ascent_sign
    old, _ascent_sign = _ascent_sign, -_ascent_sign
    try:
        yield
    finally:
        _ascent_sign = old


@dataclass(frozen=True, eq=False)
class FeasibleRegion:
    """Budget polytope on ``M x (M+N)`` allocation matrices.

    Parameters
    ----------
    row_budgets : array_like, shape (M,)
    fixed_zero_mask : array_like of bool, shape (M, M+N)
        Entries forced to zero.
    column_floor : array_like of int, shape (M+N,), optional
        Minimum column totals, honoured only by :func:`round_and_repair`.
    """

    row_budgets: np.ndarray
    fixed_zero_mask: np.ndarray
    column_floor: np.ndarray | None = None

    def __post_init__(self):
        budgets = np.asarray(self.row_budgets, dtype=float).ravel()
        mask = np.asarray(self.fixed_zero_mask, dtype=bool)
        if mask.ndim != 2 or mask.shape[0] != budgets.shape[0]:
            raise ValueError(f"mask shape {mask.shape} does not match {budgets.shape[0]} budgets")
        if np.any(budgets < 0):
            raise ValueError("row budgets must be nonnegative")
        floor = np.zeros(mask.shape[1], dtype=np.int64) if self.column_floor is None else self.column_floor
        object.__setattr__(self, "row_budgets", budgets)
        object.__setattr__(self, "fixed_zero_mask", mask)
        object.__setattr__(self, "column_floor", np.asarray(floor, dtype=np.int64).ravel())

    @property
    def shape(self) -> tuple[int, int]:
        return self.fixed_zero_mask.shape

    def contains(self, x, tol: float = 1e-9) -> bool:
        A = np.asarray(x, dtype=float).reshape(self.shape, order="F")
        return bool(
            np.all(A >= -tol)
            and np.all(A[self.fixed_zero_mask] == 0)
            and np.all(A.sum(axis=1) <= self.row_budgets + tol)
        )


@dataclass(frozen=True)
class PgdConfig:
    """Inner-loop settings.

    ``step_rule`` is ``"normalized"`` (Armijo restarted at ``t0 / max|grad|``,
    so ``t0`` is the largest coordinate move of the first trial, in
    antennas), ``"backtracking"`` (Armijo restarted at ``t0`` every
    iteration) or ``"fixed"`` (constant ``t0``).

    The normalized rule is the default because objective gradients span many
    orders of magnitude across scenarios, and with per-iteration rounding a
    raw step below half an antenna never moves.
    """

    K2: int = 50
    step_rule: str = "normalized"
    t0: float = 10.0
    beta: float = 0.5
    c: float = 1e-4
    tolerance: float = 1e-9
    max_backtracks: int = 60

    def __post_init__(self):
        if self.K2 < 1:
            raise ValueError("K2 must be >= 1")
        if self.t0 <= 0:
            raise ValueError("t0 must be positive")
        if not 0 < self.beta < 1 or not 0 < self.c < 1:
            raise ValueError("beta and c must lie in (0, 1)")
        if self.step_rule not in ("backtracking", "normalized", "fixed"):
            raise ValueError(f"unknown step rule {self.step_rule!r}")


def project_row(r, budget: float, mask=None) -> np.ndarray:
    """Euclidean projection onto ``{z >= 0, sum(z) <= budget, z[mask] = 0}``.

    Examples
    --------
    >>> project_row([2.0, 2.0, -1.0], 3.0)
    array([1.5, 1.5, 0. ])
    """
    z = np.array(r, dtype=float)
    if mask is not None:
        z[np.asarray(mask, dtype=bool)] = 0.0
    np.maximum(z, 0.0, out=z)
    total = z.sum()
    if total <= budget:
        return z
    if budget <= 0:
        return np.zeros_like(z)
    # water-filling threshold over the positive entries
    u = np.sort(z[z > 0])[::-1]
    css = np.cumsum(u) - budget
    idx = np.arange(1, u.size + 1)
    active = np.nonzero(u - css / idx > 0)[0]
    rho = active[-1] if active.size else 0  # empty only when budget underflows against u
    tau = css[rho] / (rho + 1)
    return np.maximum(z - tau, 0.0)


def project_feasible(x, region: FeasibleRegion) -> np.ndarray:
    """Project a vectorized allocation onto ``region`` row by row."""
    A = np.asarray(x, dtype=float).reshape(region.shape, order="F")
    out = np.empty_like(A)
    for i in range(A.shape[0]):
        out[i] = project_row(A[i], region.row_budgets[i], region.fixed_zero_mask[i])
    return out.ravel(order="F")


def _round_half_up(x):
    return np.floor(np.asarray(x, dtype=float) + 0.5)


def round_and_repair(x, region: FeasibleRegion) -> np.ndarray:
    """Round to the nearest integers and restore feasibility.

    Rows whose rounded sum exceeds the budget give back antennas from the
    up-rounded entries with the smallest fractional part first (ties go to
    the lowest column).  Columns below their floor then receive antennas
    from the row with the most slack.  Returns an int64 vector.
    """
    M, cols = region.shape
    X = np.maximum(np.asarray(x, dtype=float).reshape((M, cols), order="F"), 0.0)
    R = _round_half_up(X).astype(np.int64)
    R[region.fixed_zero_mask] = 0
    budgets = np.floor(region.row_budgets + 1e-9).astype(np.int64)
    frac = X - np.floor(X)
    for i in range(M):
        while R[i].sum() > budgets[i]:
            up = np.nonzero(R[i] > X[i])[0]
            if up.size:
                j = up[np.argmin(frac[i, up])]  # argmin keeps the lowest index on ties
            else:
                j = int(np.argmax(R[i]))
            R[i, j] -= 1
    _enforce_column_floor(R, region, budgets)
    return R.ravel(order="F")


def _enforce_column_floor(R, region, budgets):
    floor = region.column_floor
    mask = region.fixed_zero_mask
    for j in np.nonzero(floor > 0)[0]:
        while R[:, j].sum() < floor[j]:
            slack = budgets - R.sum(axis=1)
            slack = np.where(mask[:, j], -np.inf, slack)
            if not np.isfinite(slack).any():
                raise InfeasibleError(f"column {j} cannot receive antennas: every row is masked")
            i = int(np.argmax(slack))
            if slack[i] < 1:
                # full row: move one antenna from a column that can spare it
                spare = R[i].copy()
                spare[j] = 0
                colsum = R.sum(axis=0)
                can_give = (spare > 0) & (colsum - 1 >= floor)
                can_give[j] = False
                if not can_give.any():
                    raise InfeasibleError(f"cannot satisfy floor of column {j} within budgets")
                donor = int(np.argmax(np.where(can_give, R[i], -1)))
                R[i, donor] -= 1
            R[i, j] += 1


@dataclass
class PgdResult:
    x: np.ndarray
    values: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    n_iter: int = 0


Oracle = Callable[[np.ndarray], "tuple[float, np.ndarray]"]


def pgd_run(objective: Oracle, x0, region: FeasibleRegion, config: PgdConfig = PgdConfig(),
            round_each: bool = False, ascent_sign: float | None = None) -> PgdResult:
    """Projected gradient ascent with optional per-iteration rounding.

    ``objective`` maps a vector to ``(value, gradient)``.  ``ascent_sign``
    exists for fault-injection checks only; ``None`` uses the module hook.
    """
    if ascent_sign is None:
        ascent_sign = _ascent_sign
    x = np.array(x0, dtype=float)
    try:
        val, grad = objective(x)
    except ObjectiveDomainError as exc:
        raise ObjectiveDomainError(exc.target, "objective undefined at start point", iteration=0) from exc
    res = PgdResult(x=x, values=[val])

    def step(t):
        cand = project_feasible(x + ascent_sign * t * grad, region)
        if round_each:
            cand = round_and_repair(cand, region).astype(float)
        return cand

    for k in range(1, config.K2 + 1):
        t = config.t0
        if config.step_rule == "normalized":
            gmax = float(np.max(np.abs(grad))) if grad.size else 0.0
            if gmax == 0.0:
                break
            t = config.t0 / gmax
        try:
            if config.step_rule == "fixed":
                x_new = step(t)
                v_new, g_new = objective(x_new)
            else:
                for _ in range(config.max_backtracks):
                    x_new = step(t)
                    v_new, g_new = objective(x_new)
                    gain = float(grad @ (x_new - x))
                    if v_new >= val + config.c * gain and v_new >= val - 1e-12:
                        break
                    t *= config.beta
                else:
                    break  # no acceptable step: stationary up to resolution
        except ObjectiveDomainError as exc:
            raise ObjectiveDomainError(exc.target, "objective undefined", iteration=k) from exc
        moved = float(np.linalg.norm(x_new - x))
        x, val, grad = x_new, v_new, g_new
        res.values.append(val)
        res.steps.append(t)
        res.n_iter = k
        if moved <= config.tolerance:
            break
    res.x = x
    return res


def pgd_maximize(objective: Oracle, x0, region: FeasibleRegion, config: PgdConfig = PgdConfig(),
                 round_each: bool = False) -> np.ndarray:
    """Return the last iterate of :func:`pgd_run`."""
    return pgd_run(objective, x0, region, config, round_each).x
