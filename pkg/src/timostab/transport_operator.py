"""First-order hyperbolic form of the beam in Riemann variables.

The transport system is ``W_t = -(Khat W_x + C W)`` with reflection conditions
``p + q = 0`` and ``phi + psi = 0`` at both ends. Replacing ``C`` by its damping
part ``C0`` decouples the four components, which makes the spectrum and the
resolvent explicit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .beam_model import BeamParams, DampingProfile, Grid
from .discrete import riemann_operator, riemann_to_vector, vector_to_riemann
from .riemann_transform import RiemannState, _check_params, cumulative_trapezoid

NEAR_SPECTRUM_TOL = 1e-6


class NearSpectrumError(ValueError):
    """The requested resolvent point is too close to the spectrum."""

    def __init__(self, lam: complex, branch: str, distance: float):
        super().__init__(
            f"lambda={lam} is within {distance:.3e} of the {branch} branch of the spectrum "
            f"(margin {NEAR_SPECTRUM_TOL:g})"
        )
        self.distance = distance
        self.branch = branch


@dataclass(frozen=True)
class TransportMatrices:
    """Coefficient matrices of the transport system at one position."""

    Khat: np.ndarray
    C: np.ndarray
    C0: np.ndarray
    D: np.ndarray
    Ehat: np.ndarray
    F: np.ndarray
    G: np.ndarray
    distinct_speeds: bool


def build_matrices(params: BeamParams, damping: DampingProfile | None = None, x: float = 0.0) -> TransportMatrices:
    """Evaluate the coefficient matrices at position ``x``."""
    b = 0.0 if damping is None else float(damping(np.array([x]), params.l)[0])
    c1, c2 = params.c1, params.c2
    a = params.K / (2 * params.rho) * math.sqrt(params.I_rho / params.EI)
    kap = math.sqrt(params.rho * params.K) / (2 * params.I_rho)
    beta = b / (2 * params.I_rho)
    C = np.array(
        [
            [0.0, -a, 0.0, a],
            [kap, beta, -kap, beta],
            [0.0, -a, 0.0, a],
            [kap, beta, -kap, beta],
        ]
    )
    return TransportMatrices(
        Khat=np.diag([c1, c2, -c1, -c2]),
        C=C,
        C0=np.diag([0.0, beta, 0.0, beta]),
        D=-np.eye(2),
        Ehat=-np.eye(2),
        F=np.zeros((2, 2)),
        G=np.zeros((2, 2)),
        distinct_speeds=params.distinct_speeds,
    )


@dataclass(frozen=True)
class AnalyticSpectrum:
    k: np.ndarray
    branch1: np.ndarray
    branch2: np.ndarray

    @property
    def spectral_bound(self) -> float:
        return float(max(self.branch1.real.max(), self.branch2.real.max()))

    @property
    def damping_shift(self) -> float:
        return float(self.branch2.real[0])

    def eigenvalues(self) -> np.ndarray:
        return np.concatenate([self.branch1, self.branch2])


def analytic_spectrum(params: BeamParams, damping: DampingProfile, kmax: int) -> AnalyticSpectrum:
    """Eigenvalues of the decoupled transport operator for ``|k| <= kmax``."""
    if kmax < 1:
        raise ValueError(f"kmax must be at least 1, got {kmax}")
    l = params.l
    k = np.arange(-kmax, kmax + 1)
    shift = -damping.integral(l) / (2 * l * params.I_rho)
    b1 = 1j * k * math.pi / l * params.c1
    b2 = shift + 1j * k * math.pi / l * params.c2
    return AnalyticSpectrum(k, b1 + 0.0, b2)


def _phase(grid: Grid, params: BeamParams, damping: DampingProfile, lam: complex, branch: int) -> np.ndarray:
    """Integrating-factor exponent ``theta(x)`` of one characteristic pair."""
    x = grid.nodes
    if branch == 1:
        return lam * x / params.c1
    bint = cumulative_trapezoid(damping(x, grid.l), grid.h)
    return (lam * x + bint / (2 * params.I_rho)) / params.c2


def _solve_pair(theta, z_right, z_left, s, h, lam, name):
    """Solve ``y' + theta' y = s z_right`` and ``w' - theta' w = -s z_left`` with ``y + w = 0`` at both ends."""
    tl = theta[-1]
    with np.errstate(over="ignore", invalid="ignore"):
        gap = abs(np.exp(2 * tl) - 1)
    if not gap >= NEAR_SPECTRUM_TOL:
        raise NearSpectrumError(lam, name, float(gap))
    decay = np.exp(-np.diff(theta))
    n = theta.size
    P = np.zeros(n, dtype=complex)
    Q = np.zeros(n, dtype=complex)
    for j in range(1, n):
        P[j] = decay[j - 1] * P[j - 1] + 0.5 * s * h * (decay[j - 1] * z_right[j - 1] + z_right[j])
    for j in range(n - 2, -1, -1):
        Q[j] = decay[j] * Q[j + 1] + 0.5 * s * h * (z_left[j] + decay[j] * z_left[j + 1])
    E = np.exp(-tl)
    # y = y0 e^{-theta} + P, w = wl e^{-(theta_l - theta)} + Q
    det = 1 - E * E
    y0 = (-Q[0] + E * P[-1]) / det
    wl = (-P[-1] + E * Q[0]) / det
    y = y0 * np.exp(-theta) + P
    w = wl * np.exp(-(tl - theta)) + Q
    return y, w


def resolvent_apply(
    lam: complex, Z: RiemannState, params: BeamParams, damping: DampingProfile
) -> RiemannState:
    """Solve ``(lam - S) U = Z`` for the decoupled transport operator.

    Each component is integrated along its characteristic with an exponential
    integrating factor (trapezoid quadrature of the convolution, cumulative
    trapezoid for the damping integral). The reflection conditions fix the two
    free constants of each pair; ``q(0) = -p(0)`` and ``psi(0) = -phi(0)``.

    Raises:
        NearSpectrumError: If ``|exp(2 theta(l)) - 1| < 1e-6`` on either branch.
    """
    g = Z.grid
    _check_params(g, params)
    out = []
    for branch, (zr, zl), c in ((1, (Z.p, Z.q), params.c1), (2, (Z.phi, Z.psi), params.c2)):
        theta = _phase(g, params, damping, lam, branch)
        out.append(_solve_pair(theta, zr, zl, 1.0 / c, g.h, lam, f"branch{branch}"))
    (p, q), (phi, psi) = out
    return RiemannState(g, p, phi, q, psi)


def resolvent_residual(lam: complex, U: RiemannState, Z: RiemannState, params: BeamParams, damping: DampingProfile) -> float:
    """Relative residual ``||(lam - S_disc) U - Z|| / ||Z||`` against the upwind operator."""
    op = riemann_operator(U.grid, params, damping, "S1C0")
    u = riemann_to_vector(*U.components())
    z = riemann_to_vector(*Z.components())
    r = lam * u - op.matrix @ u - z
    zn = np.linalg.norm(z)
    return float(np.linalg.norm(r) / zn) if zn > 0 else float(np.linalg.norm(r))


@dataclass(frozen=True, eq=False)
class AugmentedState:
    """Riemann state together with the dynamic-boundary variable ``z``."""

    W: RiemannState
    z: np.ndarray

    def boundary_defect(self) -> np.ndarray:
        """``z - (v(l) - D u(l))`` with ``u = (p, phi)``, ``v = (q, psi)``, ``D = -I``."""
        W = self.W
        expected = np.array([W.q[-1] + W.p[-1], W.psi[-1] + W.phi[-1]])
        return np.asarray(self.z) - expected

    def in_domain(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.boundary_defect()) <= tol))


def augmented_project(W0: RiemannState, z0) -> AugmentedState:
    """Projection onto the first factor: ``(W0, z0) -> (W0, 0)``."""
    return AugmentedState(W0, np.zeros(2))


def augmented_step_consistency(
    W0: RiemannState,
    z0,
    t: float,
    params: BeamParams,
    damping: DampingProfile,
    cfl: float = 0.9,
    samples: int = 10,
) -> float:
    """Compare the projected augmented run with the plain transport run.

    The augmented generator acts on ``(W, z)`` as ``[[S, 0], [0, 0]]`` since the
    boundary coupling matrices ``F`` and ``G`` vanish. Both runs use the same
    explicit upwind stepper.

    Returns:
        Max over sample times of ``||W_aug - W_plain||_X + |z_aug|``.
    """
    g = W0.grid
    op = riemann_operator(g, params, damping, "S1C")
    size = op.size
    aug = sp.block_diag([op.matrix, sp.csr_matrix((2, 2))], format="csr")
    dt = cfl * g.h / max(params.c1, params.c2)
    steps = max(1, int(math.ceil(t / dt)))
    dt = t / steps
    start = augmented_project(W0, z0)
    w = riemann_to_vector(*W0.components()).astype(complex)
    y = np.concatenate([riemann_to_vector(*start.W.components()), start.z]).astype(complex)
    every = max(1, steps // samples)
    worst = 0.0
    for k in range(1, steps + 1):
        w = w + dt * (op.matrix @ w)
        y = y + dt * (aug @ y)
        if k % every == 0 or k == steps:
            dev = math.sqrt(g.h) * np.linalg.norm(y[:size] - w) + np.linalg.norm(y[size:])
            worst = max(worst, float(dev))
    return worst


def riemann_state_from_vector(w: np.ndarray, grid: Grid) -> RiemannState:
    return RiemannState(grid, *vector_to_riemann(w, grid.n))
