"""Scalarized capacity and localization objectives and their MM minorizers.

Decision vectors are column-major vectorizations of the allocation matrix,
``x = vec(A)`` with ``A`` of shape ``(M, M+N)``, so target ``z`` occupies
the slice ``x[(M+z)*M:(M+z+1)*M]``.

The localization matrices ``B_z = (e_z e_z^T) kron Q_z`` are never built;
every quadratic form involving ``B_z`` reduces to the target column.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import NoIlluminationError, ObjectiveDomainError
from .model import Scenario, build_channel_gains

LOG_FLOOR = 1e-12


def vec(A) -> np.ndarray:
    return np.asarray(A, dtype=float).ravel(order="F")


def unvec(x, shape) -> np.ndarray:
    return np.asarray(x).reshape(shape, order="F")


@dataclass(frozen=True, eq=False)
class ObjectiveContext:
    """Everything needed to evaluate ``f1``, ``f2`` and the surrogates.

    ``k_z = vec(b_z e_z^T)`` is stored as ``b[z]`` on the target column, and
    ``B_z`` as ``Q[z]``; see :func:`target_slice`.
    """

    num_platforms: int
    num_targets: int
    lambda_vec: np.ndarray
    Q: np.ndarray
    b: np.ndarray
    power_ratio: float
    w0: float = 1.0
    mu: np.ndarray | None = None
    zeta: np.ndarray | None = None

    def __post_init__(self):
        n = self.size
        if self.mu is None:
            object.__setattr__(self, "mu", np.ones(n))
        if self.zeta is None:
            object.__setattr__(self, "zeta", np.ones(self.num_targets))
        if self.w0 <= 0:
            raise ValueError(f"w0 must be positive, got {self.w0}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.num_platforms, self.num_platforms + self.num_targets

    @property
    def size(self) -> int:
        M, cols = self.shape
        return M * cols

    def target_slice(self, z: int) -> slice:
        M = self.num_platforms
        return slice((M + z) * M, (M + z + 1) * M)

    def k_vector(self, z: int) -> np.ndarray:
        """Dense ``k_z = vec(b_z e_z^T)``; for tests and diagnostics."""
        k = np.zeros(self.size)
        k[self.target_slice(z)] = self.b[z]
        return k

    def B_matrix(self, z: int) -> np.ndarray:
        """Dense ``B_z = (e_z e_z^T) kron Q_z``; only sensible for tiny instances."""
        M, cols = self.shape
        E = np.zeros((cols, cols))
        E[M + z, M + z] = 1.0
        return np.kron(E, self.Q[z])


def build_context(scenario: Scenario, w0: float = 1.0) -> ObjectiveContext:
    return ObjectiveContext(
        num_platforms=scenario.num_platforms,
        num_targets=scenario.num_targets,
        lambda_vec=vec(build_channel_gains(scenario)),
        Q=np.array(scenario.radar_Q, dtype=float),
        b=np.array(scenario.radar_b, dtype=float),
        power_ratio=scenario.power_ratio,
        w0=float(w0),
    )


def eval_f1(x, ctx: ObjectiveContext) -> float:
    """Scalarized link SNR sum ``(dP/N0) * sum(mu * lambda * x**2)``."""
    x = np.asarray(x, dtype=float)
    return float(ctx.power_ratio * np.sum(ctx.mu * ctx.lambda_vec * x * x))


def _forms(x, z, ctx, floor):
    col = np.asarray(x, dtype=float)[ctx.target_slice(z)]
    quad = float(col @ ctx.Q[z] @ col)
    lin = float(ctx.b[z] @ col)
    if floor is None:
        if not np.any(col != 0):
            raise NoIlluminationError(z)
        if quad <= 0 or lin <= 0:
            raise ObjectiveDomainError(z)
    else:
        quad = max(quad, floor)
        lin = max(lin, floor)
    return col, quad, lin


def f2_terms(x, ctx: ObjectiveContext, floor: float | None = None) -> np.ndarray:
    """Per-target values ``ln(x^T B_z x) - ln(k_z^T x)``.

    With ``floor=None`` a zero target column raises; otherwise both log
    arguments are clipped from below at ``floor``.
    """
    out = np.empty(ctx.num_targets)
    for z in range(ctx.num_targets):
        _, quad, lin = _forms(x, z, ctx, floor)
        out[z] = np.log(quad) - np.log(lin)
    return out


def eval_f2(x, ctx: ObjectiveContext, floor: float | None = None) -> float:
    return float(ctx.zeta @ f2_terms(x, ctx, floor))


def scalarized_objective(x, ctx: ObjectiveContext, floor: float | None = None) -> float:
    """``f1(x) + w0 * f2(x)``, the quantity A2RCI maximizes."""
    return eval_f1(x, ctx) + ctx.w0 * eval_f2(x, ctx, floor)


def grad_f1(x, ctx: ObjectiveContext) -> np.ndarray:
    return 2.0 * ctx.power_ratio * ctx.mu * ctx.lambda_vec * np.asarray(x, dtype=float)


def curvature_m1(ctx: ObjectiveContext) -> np.ndarray:
    """Diagonal of ``M1``; half the (constant) Hessian of ``f1``."""
    return ctx.power_ratio * ctx.mu * ctx.lambda_vec


def grad_f2z(x, z: int, ctx: ObjectiveContext) -> np.ndarray:
    col, quad, lin = _forms(x, z, ctx, None)
    g = np.zeros(ctx.size)
    S = ctx.Q[z] + ctx.Q[z].T
    g[ctx.target_slice(z)] = S @ col / quad - ctx.b[z] / lin
    return g


class M2zOperator:
    """Curvature matrix ``M_2z`` at an expansion point, applied implicitly.

    ``block`` is the ``M x M`` restriction to the target column; all other
    rows and columns of ``M_2z`` are zero.
    """

    def __init__(self, xm, z: int, ctx: ObjectiveContext):
        col, quad, lin = _forms(xm, z, ctx, None)
        S = ctx.Q[z] + ctx.Q[z].T
        Sc = S @ col
        b = ctx.b[z]
        self.block = S / quad - np.outer(Sc, Sc) / quad**2 - 2.0 * np.outer(b, b) / lin**2
        self.sl = ctx.target_slice(z)
        self.size = ctx.size

    def __call__(self, v) -> np.ndarray:
        out = np.zeros(self.size)
        out[self.sl] = self.block @ np.asarray(v, dtype=float)[self.sl]
        return out

    def quad(self, v) -> float:
        vz = np.asarray(v, dtype=float)[self.sl]
        return float(vz @ self.block @ vz)

    def dense(self) -> np.ndarray:
        D = np.zeros((self.size, self.size))
        D[self.sl, self.sl] = self.block
        return D


def curvature_m2z(xm, z: int, ctx: ObjectiveContext) -> M2zOperator:
    return M2zOperator(xm, z, ctx)


@dataclass(frozen=True, eq=False)
class SurrogatePoint:
    """Expansion point of the quadratic minorizers ``g1(.|xm)`` and ``g2(.|xm)``."""

    x_m: np.ndarray
    f1_val: float
    f2_terms: np.ndarray
    grad_f1: np.ndarray
    grad_f2: np.ndarray  # shape (N, size)
    m1: np.ndarray
    m2: tuple

    @property
    def f2_val(self) -> float:
        return float(self.f2_terms.sum())


def build_surrogate_point(xm, ctx: ObjectiveContext) -> SurrogatePoint:
    xm = np.array(xm, dtype=float)
    xm.setflags(write=False)
    terms = f2_terms(xm, ctx)
    grads = np.array([grad_f2z(xm, z, ctx) for z in range(ctx.num_targets)])
    ops = tuple(M2zOperator(xm, z, ctx) for z in range(ctx.num_targets))
    return SurrogatePoint(xm, eval_f1(xm, ctx), terms, grad_f1(xm, ctx), grads, curvature_m1(ctx), ops)


def _f2_quadratic(d, point, ctx):
    val = 0.0
    grad = np.zeros_like(d)
    for z, op in enumerate(point.m2):
        sym = 0.5 * (op.block + op.block.T)
        dz = d[op.sl]
        val += ctx.zeta[z] * (point.grad_f2[z] @ d + 0.5 * dz @ op.block @ dz)
        grad += ctx.zeta[z] * point.grad_f2[z]
        grad[op.sl] += ctx.zeta[z] * (sym @ dz)
    return float(val), grad


def eval_psi1(x, point: SurrogatePoint, ctx: ObjectiveContext) -> float:
    """Combined surrogate with constants dropped; zero at ``x = x_m``."""
    d = np.asarray(x, dtype=float) - point.x_m
    q2, _ = _f2_quadratic(d, point, ctx)
    return float(point.grad_f1 @ d + 0.5 * np.sum(point.m1 * d * d) + ctx.w0 * q2)


def grad_psi1(x, point: SurrogatePoint, ctx: ObjectiveContext) -> np.ndarray:
    d = np.asarray(x, dtype=float) - point.x_m
    _, g2 = _f2_quadratic(d, point, ctx)
    return point.grad_f1 + point.m1 * d + ctx.w0 * g2


def eval_psi2(x, point: SurrogatePoint, ctx: ObjectiveContext) -> float:
    """Localization surrogate ``g2(x|x_m)``, constants kept."""
    d = np.asarray(x, dtype=float) - point.x_m
    q2, _ = _f2_quadratic(d, point, ctx)
    return float(ctx.zeta @ point.f2_terms) + q2


def grad_psi2(x, point: SurrogatePoint, ctx: ObjectiveContext) -> np.ndarray:
    d = np.asarray(x, dtype=float) - point.x_m
    return _f2_quadratic(d, point, ctx)[1]


def surrogate_g1(x, point: SurrogatePoint, ctx: ObjectiveContext) -> float:
    """Minorizer of ``f1`` built at ``point``."""
    d = np.asarray(x, dtype=float) - point.x_m
    return float(point.f1_val + point.grad_f1 @ d + 0.5 * np.sum(point.m1 * d * d))


def surrogate_g2(x, point: SurrogatePoint, ctx: ObjectiveContext) -> float:
    return eval_psi2(x, point, ctx)


def psi1_oracle(point: SurrogatePoint, ctx: ObjectiveContext):
    """``x -> (value, gradient)`` of the combined surrogate, for the PGD loop."""
    return lambda x: (eval_psi1(x, point, ctx), grad_psi1(x, point, ctx))


def psi2_oracle(point: SurrogatePoint, ctx: ObjectiveContext):
    return lambda x: (eval_psi2(x, point, ctx), grad_psi2(x, point, ctx))
