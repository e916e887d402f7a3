"""Riemann-invariant change of variables between the beam and transport forms.

With ``c1 = sqrt(K/rho)`` and ``c2 = sqrt(EI/I_rho)``:

    p   = -c1 u_x + u2,    q   = c1 u_x + u2,
    phi = -c2 v_x + v2,    psi = c2 v_x + v2.

All four components live on the grid nodes. The nodal derivative used here is
the unique one whose cumulative trapezoid integral reproduces ``u`` exactly,
``(f_j + f_{j+1}) h / 2 = u_{j+1} - u_j``, started from a second-order one-sided
difference at ``x = 0``. Integration therefore inverts differentiation to
rounding error, and the images of Dirichlet states satisfy both constraints
``r1 = r2 = 0`` to rounding error as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .beam_model import BeamParams, DimensionError, Grid, SecondOrderState, trapezoid

X0_TOL = 1e-12
BOUNDARY_TOL = 1e-12


class ConstraintError(ValueError):
    """A Riemann state lies outside the constraint subspace X0."""

    def __init__(self, r1: complex, r2: complex, tol: float):
        super().__init__(f"state is not in X0: r1={r1:.3e}, r2={r2:.3e} (tolerance {tol:.3e})")
        self.r1 = r1
        self.r2 = r2


@dataclass(frozen=True, eq=False)
class RiemannState:
    """Nodal Riemann variables ``(p, phi, q, psi)`` on a grid."""

    grid: Grid
    p: np.ndarray
    phi: np.ndarray
    q: np.ndarray
    psi: np.ndarray

    def __post_init__(self):
        size = self.grid.n + 1
        for name in ("p", "phi", "q", "psi"):
            a = np.asarray(getattr(self, name))
            if a.ndim != 1 or a.size != size:
                raise DimensionError(f"{name} has shape {a.shape}, expected ({size},)")
            a = a.astype(complex if np.iscomplexobj(a) else float, copy=True)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @classmethod
    def zeros(cls, grid: Grid) -> RiemannState:
        z = np.zeros(grid.n + 1)
        return cls(grid, z, z, z, z)

    def components(self) -> tuple[np.ndarray, ...]:
        return self.p, self.phi, self.q, self.psi

    def inner(self, other: RiemannState) -> complex:
        """Trapezoid-rule L2 inner product, conjugate-linear in ``other``."""
        _same_grid(self.grid, other.grid)
        h = self.grid.h
        return sum(trapezoid(a * np.conj(b), h) for a, b in zip(self.components(), other.components()))

    def norm(self) -> float:
        return float(np.sqrt(abs(self.inner(self))))

    def _combine(self, other: RiemannState, op) -> RiemannState:
        _same_grid(self.grid, other.grid)
        return RiemannState(self.grid, *(op(a, b) for a, b in zip(self.components(), other.components())))

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, alpha):
        return RiemannState(self.grid, *(alpha * a for a in self.components()))

    __rmul__ = __mul__


def _same_grid(a: Grid, b: Grid):
    if a.n != b.n or not math.isclose(a.l, b.l, rel_tol=1e-12):
        raise DimensionError(f"grid mismatch: (n={a.n}, l={a.l}) vs (n={b.n}, l={b.l})")


def _check_params(grid: Grid, params: BeamParams):
    if not math.isclose(grid.l, params.l, rel_tol=1e-12):
        raise DimensionError(f"grid length {grid.l} does not match beam length {params.l}")


@dataclass(frozen=True)
class ConstraintValues:
    """Trapezoid values of ``r1 = int (p - q)`` and ``r2 = int (phi - psi)``."""

    r1: complex
    r2: complex

    def in_x0(self, scale: float = 1.0, tol: float = X0_TOL) -> bool:
        bound = tol * max(scale, 1.0)
        return abs(self.r1) <= bound and abs(self.r2) <= bound


def nodal_derivative(u: np.ndarray, h: float) -> np.ndarray:
    """Nodal derivative paired exactly with cumulative trapezoid integration."""
    u = np.asarray(u)
    if u.size < 3:
        raise DimensionError("need at least three nodes")
    f0 = (-3 * u[0] + 4 * u[1] - u[2]) / (2 * h)
    d = 2 * np.diff(u) / h
    # f_{j+1} = d_j - f_j; solve with alternating signs
    sign = np.where(np.arange(u.size) % 2 == 0, 1.0, -1.0)
    g = np.empty(u.size, dtype=np.result_type(u, float))
    g[0] = f0
    g[1:] = f0 + np.cumsum(sign[1:] * d)
    return sign * g


def cumulative_trapezoid(f: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros(f.size, dtype=np.result_type(f, float))
    out[1:] = np.cumsum(0.5 * h * (f[1:] + f[:-1]))
    return out


def forward_transform(Y: SecondOrderState, params: BeamParams) -> RiemannState:
    """Map a beam state to Riemann variables."""
    g = Y.grid
    _check_params(g, params)
    ux = nodal_derivative(Y.u, g.h)
    vx = nodal_derivative(Y.v, g.h)
    c1, c2 = params.c1, params.c2
    return RiemannState(g, -c1 * ux + Y.u2, -c2 * vx + Y.v2, c1 * ux + Y.u2, c2 * vx + Y.v2)


def constraint_values(W: RiemannState) -> ConstraintValues:
    h = W.grid.h
    return ConstraintValues(complex(trapezoid(W.p - W.q, h)), complex(trapezoid(W.phi - W.psi, h)))


def inverse_transform(W: RiemannState, params: BeamParams, tol: float = X0_TOL) -> SecondOrderState:
    """Recover the beam state from Riemann variables in X0.

    Displacements come from cumulative trapezoid integration from ``x = 0``;
    the right-end values equal ``-r_i / (2 c_i)`` and are set to zero once the
    constraints are verified.

    Raises:
        ConstraintError: If ``|r1|`` or ``|r2|`` exceeds ``tol * ||W||``.
    """
    g = W.grid
    _check_params(g, params)
    cv = constraint_values(W)
    if not cv.in_x0(W.norm(), tol):
        raise ConstraintError(cv.r1, cv.r2, tol * max(W.norm(), 1.0))
    c1, c2 = params.c1, params.c2
    u = cumulative_trapezoid((W.q - W.p) / (2 * c1), g.h)
    v = cumulative_trapezoid((W.psi - W.phi) / (2 * c2), g.h)
    u[-1] = 0.0
    v[-1] = 0.0
    return SecondOrderState(g, u, 0.5 * (W.p + W.q), v, 0.5 * (W.phi + W.psi))


def constraint_basis(grid: Grid) -> tuple[RiemannState, RiemannState]:
    """Unit vectors ``e1 = (1, 0, -1, 0)/sqrt(2l)`` and ``e2 = (0, 1, 0, -1)/sqrt(2l)``."""
    s = 1.0 / math.sqrt(2 * grid.l)
    one = np.full(grid.n + 1, s)
    z = np.zeros(grid.n + 1)
    return RiemannState(grid, one, z, -one, z), RiemannState(grid, z, one, z, -one)


def project_X0(W: RiemannState) -> RiemannState:
    """Orthogonal projection onto X0 in the trapezoid inner product."""
    out = W
    for e in constraint_basis(W.grid):
        out = out - W.inner(e) * e
    return out


@dataclass(frozen=True)
class DomainCheck:
    """Outcome of a domain test; truthy when no reasons were found."""

    ok: bool
    reasons: tuple[str, ...] = field(default_factory=tuple)

    def __bool__(self) -> bool:
        return self.ok


def domain_check(state, side: str | None = None) -> DomainCheck:
    """Nodal proxy for membership in the generator domain.

    Args:
        state: A :class:`SecondOrderState` or :class:`RiemannState`.
        side: ``"second-order"`` or ``"riemann"``; inferred from the type if omitted.
    """
    if side is None:
        side = "riemann" if isinstance(state, RiemannState) else "second-order"
    reasons = []
    tol = BOUNDARY_TOL
    if side == "second-order":
        if not isinstance(state, SecondOrderState):
            raise TypeError("second-order side needs a SecondOrderState")
        for name in ("u", "u2", "v", "v2"):
            a = getattr(state, name)
            if abs(a[0]) > tol or abs(a[-1]) > tol:
                reasons.append(f"{name} boundary")
    elif side == "riemann":
        if not isinstance(state, RiemannState):
            raise TypeError("riemann side needs a RiemannState")
        s1 = state.p + state.q
        s2 = state.phi + state.psi
        if abs(s1[0]) > tol or abs(s1[-1]) > tol:
            reasons.append("p+q boundary")
        if abs(s2[0]) > tol or abs(s2[-1]) > tol:
            reasons.append("phi+psi boundary")
        cv = constraint_values(state)
        bound = X0_TOL * max(state.norm(), 1.0)
        if abs(cv.r1) > bound:
            reasons.append("r1")
        if abs(cv.r2) > bound:
            reasons.append("r2")
    else:
        raise ValueError(f"side must be 'second-order' or 'riemann', got {side!r}")
    return DomainCheck(not reasons, tuple(reasons))
