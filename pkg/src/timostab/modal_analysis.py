"""Time-harmonic analysis of the beam and the unique-continuation certificate.

A purely imaginary eigenvalue ``i omega`` of the damped beam gives a pair
``(u, v)`` with

    K u'' - K v' = -rho omega^2 u,
    EI v'' + K u' - K v - i b omega v = -I_rho omega^2 v.

On an interval where ``b`` vanishes identically ``u`` solves the constant
coefficient quartic ODE

    u'''' + (alpha2 + beta2) u'' + alpha2 (beta2 - gamma2) u = 0,

with ``alpha2 = rho omega^2 / K``, ``gamma2 = K / EI`` and
``beta2 = I_rho omega^2 / EI``. Its characteristic polynomial is quadratic in
``r^2`` with roots ``X_minus < 0`` and ``X_plus``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .beam_model import BeamParams, DampingProfile, DimensionError, trapezoid

REGIME_TOL = 1e-12
RANK_THRESHOLD = 1e-8


class DegenerateFrequencyError(ValueError):
    """The candidate frequency is zero."""


class IntervalTooSmallError(ValueError):
    """The collocation interval is too short for the sampling step."""


class Regime(str, enum.Enum):
    GAMMA_GT_BETA = "GammaGtBeta"
    GAMMA_LT_BETA = "GammaLtBeta"
    GAMMA_EQ_BETA = "GammaEqBeta"


@dataclass(frozen=True)
class ModalProblem:
    params: BeamParams
    damping: DampingProfile
    omega: float

    def __post_init__(self):
        if not math.isfinite(self.omega):
            raise ValueError(f"omega must be finite, got {self.omega!r}")
        if self.omega == 0:
            raise DegenerateFrequencyError("omega must be nonzero")


def quartic_coefficients(problem: ModalProblem) -> tuple[float, float, float]:
    """Return ``(alpha2, gamma2, beta2)`` for a modal problem."""
    p, w2 = problem.params, problem.omega**2
    if w2 == 0:
        raise DegenerateFrequencyError("omega must be nonzero")
    return p.rho * w2 / p.K, p.K / p.EI, p.I_rho * w2 / p.EI


@dataclass(frozen=True)
class QuarticSolution:
    """Roots of ``X^2 + (alpha2 + beta2) X + alpha2 (beta2 - gamma2) = 0``."""

    alpha2: float
    gamma2: float
    beta2: float
    Xminus: float
    Xplus: float
    regime: Regime

    def roots(self) -> np.ndarray:
        """The four characteristic roots ``r`` with ``r^2 in {X_minus, X_plus}``."""
        wm = math.sqrt(-self.Xminus)
        if self.regime is Regime.GAMMA_GT_BETA:
            wp = math.sqrt(self.Xplus)
            pair = [wp, -wp]
        elif self.regime is Regime.GAMMA_LT_BETA:
            wp = math.sqrt(-self.Xplus)
            pair = [1j * wp, -1j * wp]
        else:
            pair = [0.0, 0.0]
        return np.array([1j * wm, -1j * wm, *pair], dtype=complex)

    def polynomial(self, r) -> np.ndarray:
        r = np.asarray(r)
        return r**4 + (self.alpha2 + self.beta2) * r**2 + self.alpha2 * (self.beta2 - self.gamma2)


def quartic_roots(alpha2: float, gamma2: float, beta2: float) -> QuarticSolution:
    """Closed-form roots in ``X = r^2`` and the regime classification.

    ``X_plus`` is evaluated in the cancellation-free form
    ``2 alpha2 (gamma2 - beta2) / (S + sqrt(D))`` so that its sign is exactly
    the sign of ``gamma2 - beta2``.
    """
    for name, value in (("alpha2", alpha2), ("gamma2", gamma2), ("beta2", beta2)):
        if not (math.isfinite(value) and value > 0):
            raise ValueError(f"{name} must be positive and finite, got {value!r}")
    s = alpha2 + beta2
    root = math.sqrt((alpha2 - beta2) ** 2 + 4 * alpha2 * gamma2)
    xm = -(s + root) / 2
    if abs(gamma2 - beta2) <= REGIME_TOL * (gamma2 + beta2):
        return QuarticSolution(alpha2, gamma2, beta2, -s, 0.0, Regime.GAMMA_EQ_BETA)
    xp = 2 * alpha2 * (gamma2 - beta2) / (s + root)
    regime = Regime.GAMMA_GT_BETA if xp > 0 else Regime.GAMMA_LT_BETA
    return QuarticSolution(alpha2, gamma2, beta2, xm, xp, regime)


def general_solution_basis(q: QuarticSolution) -> list[Callable[[np.ndarray], np.ndarray]]:
    """Four real functions spanning the solutions of the quartic ODE."""
    wm = math.sqrt(-q.Xminus)
    basis = [lambda x: np.cos(wm * np.asarray(x)), lambda x: np.sin(wm * np.asarray(x))]
    if q.regime is Regime.GAMMA_GT_BETA:
        wp = math.sqrt(q.Xplus)
        basis += [lambda x: np.exp(wp * np.asarray(x)), lambda x: np.exp(-wp * np.asarray(x))]
    elif q.regime is Regime.GAMMA_LT_BETA:
        wp = math.sqrt(-q.Xplus)
        basis += [lambda x: np.cos(wp * np.asarray(x)), lambda x: np.sin(wp * np.asarray(x))]
    else:
        basis += [lambda x: np.asarray(x, dtype=float), lambda x: np.ones_like(np.asarray(x, dtype=float))]
    return basis


def _fd_residual(q: QuarticSolution, g: Callable, x: np.ndarray, h: float) -> np.ndarray:
    f = [g(x + k * h) for k in (-2, -1, 0, 1, 2)]
    d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
    d4 = (f[0] - 4 * f[1] + 6 * f[2] - 4 * f[3] + f[4]) / h**4
    return d4 + (q.alpha2 + q.beta2) * d2 + q.alpha2 * (q.beta2 - q.gamma2) * f[2]


def frequency_scale(q: QuarticSolution) -> float:
    """Largest root magnitude, floored at 1."""
    return max(1.0, math.sqrt(-q.Xminus), math.sqrt(abs(q.Xplus)))


def ode_residual(q: QuarticSolution, g: Callable, x: np.ndarray, h: float | None = None) -> np.ndarray:
    """Residual of the quartic ODE for ``g`` from 5-point differences.

    Two Richardson steps (``h``, ``h/2``, ``h/4``) lift the O(h^2) stencils to
    O(h^6), so the result is limited by rounding, roughly ``eps / h^4``. The
    default step is ``0.2 / frequency_scale(q)``.
    """
    x = np.asarray(x, dtype=float)
    h = 0.2 / frequency_scale(q) if h is None else h
    r1, r2, r3 = (_fd_residual(q, g, x, s) for s in (h, h / 2, h / 4))
    a = (4 * r2 - r1) / 3
    b = (4 * r3 - r2) / 3
    return (16 * b - a) / 15


@dataclass(frozen=True)
class UCVerdict:
    rank_ok: bool
    smallest_singular_ratio: float
    interval: tuple[float, float]


def unique_continuation_check(
    q: QuarticSolution, b0: float, b1: float, m: int = 32, h_sample: float | None = None
) -> UCVerdict:
    """Certify that a solution vanishing on ``(b0, b1)`` is identically zero.

    The four basis functions are sampled at ``m`` equispaced points and the
    singular values of the ``m x 4`` collocation matrix are compared. The
    solution space is translation invariant, so the basis is evaluated in
    coordinates centred on the interval, and columns are scaled to unit norm.

    Args:
        q: Roots and regime of the quartic.
        b0: Left end of the interval.
        b1: Right end of the interval.
        m: Number of collocation points.
        h_sample: Grid spacing of the underlying discretization; the interval
            must span at least four such steps.

    Raises:
        IntervalTooSmallError: If ``b1 - b0 < 4 h_sample`` or ``b1 <= b0``.
    """
    if not b1 > b0:
        raise IntervalTooSmallError(f"need b0 < b1, got ({b0}, {b1})")
    if h_sample is not None and b1 - b0 < 4 * h_sample:
        raise IntervalTooSmallError(f"interval length {b1 - b0:.3e} is below 4 sample steps ({4 * h_sample:.3e})")
    if m < 1:
        raise ValueError("need at least one sample")
    x = np.linspace(b0, b1, m) if m > 1 else np.array([b0])
    xc = x - 0.5 * (b0 + b1)
    mat = np.column_stack([g(xc) for g in general_solution_basis(q)])
    mat = mat / np.linalg.norm(mat, axis=0)
    sv = np.linalg.svd(mat, compute_uv=False)
    ratio = 0.0 if sv.size < 4 else float(sv[-1] / sv[0])
    return UCVerdict(ratio > RANK_THRESHOLD, ratio, (float(b0), float(b1)))


def _grid_step(problem: ModalProblem, u: np.ndarray, v: np.ndarray) -> float:
    u, v = np.asarray(u), np.asarray(v)
    if u.ndim != 1 or u.shape != v.shape or u.size < 3:
        raise DimensionError(f"u and v must be equal-length nodal arrays, got {u.shape} and {v.shape}")
    return problem.params.l / (u.size - 1)


def modal_residual(problem: ModalProblem, u, v) -> tuple[float, float]:
    """Discrete L2 norms of the residuals of both time-harmonic equations."""
    h = _grid_step(problem, u, v)
    u, v = np.asarray(u), np.asarray(v)
    p, w = problem.params, problem.omega
    x = np.linspace(0.0, p.l, u.size)
    b = problem.damping(x, p.l)[1:-1]

    def d2(f):
        return (f[2:] - 2 * f[1:-1] + f[:-2]) / h**2

    def d1(f):
        return (f[2:] - f[:-2]) / (2 * h)

    r1 = p.K * d2(u) - p.K * d1(v) + p.rho * w**2 * u[1:-1]
    r2 = p.EI * d2(v) + p.K * d1(u) - p.K * v[1:-1] - 1j * b * w * v[1:-1] + p.I_rho * w**2 * v[1:-1]
    return float(np.sqrt(h * np.sum(np.abs(r1) ** 2))), float(np.sqrt(h * np.sum(np.abs(r2) ** 2)))


def weak_identities_check(problem: ModalProblem, u, v) -> tuple[float, float]:
    """Imaginary and real parts of the integrated time-harmonic identity.

    ``im_part = omega int b |v|^2`` and ``re_part = K int |u' - v|^2 +
    EI int |v'|^2 - omega^2 (rho int |u|^2 + I_rho int |v|^2)``. The real part
    equals the expanded form with ``2 K Re int conj(u) v'`` after integrating by
    parts. Shear and bending terms use cell differences and averages, the others
    the trapezoid rule, matching the discrete energy.
    """
    h = _grid_step(problem, u, v)
    u, v = np.asarray(u), np.asarray(v)
    p, w = problem.params, problem.omega
    x = np.linspace(0.0, p.l, u.size)
    b = problem.damping(x, p.l)
    im_part = w * trapezoid(b * np.abs(v) ** 2, h)
    shear = np.diff(u) / h - 0.5 * (v[1:] + v[:-1])
    bend = np.diff(v) / h
    potential = h * (p.K * np.sum(np.abs(shear) ** 2) + p.EI * np.sum(np.abs(bend) ** 2))
    kinetic = p.rho * trapezoid(np.abs(u) ** 2, h) + p.I_rho * trapezoid(np.abs(v) ** 2, h)
    return float(np.real(im_part)), float(np.real(potential - w**2 * kinetic))
