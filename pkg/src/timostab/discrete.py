"""Finite-difference generators for the second-order and Riemann formulations.

Second-order generators (``L`` and ``L1``) act on the interior nodal values
``[u, u2, v, v2]`` (each ``n - 1`` long). Spatial differences are staggered:
``u_x`` and the shear strain ``u_x - v`` live on cell midpoints, so the undamped
system is exactly Hamiltonian for the discrete energy of
:func:`timostab.beam_model.energy_norm`.

Riemann generators (``S1C`` and ``S1C0``) act on nodal ``(p, phi, q, psi)`` with
first-order upwinding along each characteristic. The reflection conditions
``p + q = 0`` and ``phi + psi = 0`` are imposed algebraically at both end nodes,
so only the outgoing value is an unknown there. The reduced unknown vector is

    [p_1..p_n, phi_1..phi_n, q_0..q_{n-1}, psi_0..psi_{n-1}]

and its trapezoid-rule L2 inner product is simply ``h`` times the Euclidean one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .beam_model import BeamParams, DampingProfile, Grid

SECOND_ORDER_KINDS = ("L", "L1")
RIEMANN_KINDS = ("S1C", "S1C0")


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """Sparse matrix approximating one of the generators on a grid.

    Attributes:
        kind: ``"L"``, ``"L1"``, ``"S1C"`` or ``"S1C0"``.
        matrix: Sparse CSR matrix acting on the reduced unknown vector.
        gram: Gram matrix of the inner product the generator is analysed in
            (discrete energy for second-order kinds, trapezoid L2 for Riemann kinds).
    """

    kind: str
    grid: Grid
    params: BeamParams
    damping: DampingProfile
    matrix: sp.csr_matrix
    gram: sp.csr_matrix

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


def _stagger(n: int, h: float) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Difference and average maps from interior nodes (n-1) to cells (n)."""
    m = n - 1
    rows = np.arange(n)
    left = rows - 1  # interior index of node c
    right = rows  # interior index of node c+1
    keep_l = left >= 0
    keep_r = right <= m - 1
    r = np.concatenate([rows[keep_l], rows[keep_r]])
    c = np.concatenate([left[keep_l], right[keep_r]])
    diff = sp.csr_matrix((np.concatenate([-np.ones(keep_l.sum()), np.ones(keep_r.sum())]) / h, (r, c)), shape=(n, m))
    avg = sp.csr_matrix((np.full(r.size, 0.5), (r, c)), shape=(n, m))
    return diff, avg


def energy_gram(grid: Grid, params: BeamParams) -> sp.csr_matrix:
    """Gram matrix ``G`` with ``y^T G y = 2 E`` on interior ``[u, u2, v, v2]``."""
    n, h = grid.n, grid.h
    D, A = _stagger(n, h)
    K, EI = params.K, params.EI
    I = sp.identity(n - 1, format="csr")
    guu = h * K * (D.T @ D)
    guv = -h * K * (D.T @ A)
    gvv = h * K * (A.T @ A) + h * EI * (D.T @ D)
    return sp.bmat(
        [
            [guu, None, guv, None],
            [None, params.rho * h * I, None, None],
            [guv.T, None, gvv, None],
            [None, None, None, params.I_rho * h * I],
        ],
        format="csr",
    )


def second_order_operator(grid: Grid, params: BeamParams, damping: DampingProfile, kind: str = "L") -> DiscreteOperator:
    """Discrete ``L`` (full system) or ``L1`` (without the ``-K/I_rho v`` term)."""
    if kind not in SECOND_ORDER_KINDS:
        raise ValueError(f"kind must be one of {SECOND_ORDER_KINDS}, got {kind!r}")
    n, h = grid.n, grid.h
    if n < 2:
        raise ValueError("need at least two cells")
    D, A = _stagger(n, h)
    K, EI, rho, Ir = params.K, params.EI, params.rho, params.I_rho
    I = sp.identity(n - 1, format="csr")
    b = damping(grid.nodes[1:-1], grid.l)
    kuu = -K * (D.T @ D) / rho
    kuv = K * (D.T @ A) / rho
    kvu = K * (A.T @ D) / Ir
    kvv = -EI * (D.T @ D) / Ir
    if kind == "L":
        kvv = kvv - K * (A.T @ A) / Ir
    mat = sp.bmat(
        [
            [None, I, None, None],
            [kuu, None, kuv, None],
            [None, None, None, I],
            [kvu, None, kvv, sp.diags(-b / Ir)],
        ],
        format="csr",
    )
    return DiscreteOperator(kind, grid, params, damping, mat, energy_gram(grid, params))


def riemann_operator(grid: Grid, params: BeamParams, damping: DampingProfile, kind: str = "S1C") -> DiscreteOperator:
    """Upwind discretization of ``-(Khat d/dx + C)`` (``S1C``) or with ``C0`` (``S1C0``)."""
    if kind not in RIEMANN_KINDS:
        raise ValueError(f"kind must be one of {RIEMANN_KINDS}, got {kind!r}")
    n, h = grid.n, grid.h
    c1, c2 = params.c1, params.c2
    beta = damping(grid.nodes, grid.l) / (2 * params.I_rho)
    # block offsets in the reduced vector
    P, PH, Q, PS = 0, n, 2 * n, 3 * n
    rows, cols, vals = [], [], []

    def add(r, c, v):
        rows.append(np.atleast_1d(r))
        cols.append(np.atleast_1d(c))
        vals.append(np.broadcast_to(np.asarray(v, dtype=float), np.atleast_1d(r).shape))

    j = np.arange(n)  # position inside a block
    for right, left, c in ((P, Q, c1), (PH, PS, c2)):
        # right-moving component at node j+1: -c (w_{j+1} - w_j) / h, w_0 = -(left-moving)_0
        add(right + j, right + j, -c / h)
        add(right + j[1:], right + j[:-1], c / h)
        add(right, left, -c / h)
        # left-moving component at node j: c (w_{j+1} - w_j) / h, w_n = -(right-moving)_n
        add(left + j, left + j, -c / h)
        add(left + j[:-1], left + j[1:], c / h)
        add(left + n - 1, right + n - 1, -c / h)

    # zero-order terms; node index of each reduced unknown
    node_right = j + 1  # p, phi carry nodes 1..n
    node_left = j  # q, psi carry nodes 0..n-1
    if kind == "S1C0":
        add(PH + j, PH + j, -beta[node_right])
        add(PS + j, PS + j, -beta[node_left])
    else:
        a = params.K / (2 * params.rho) * np.sqrt(params.I_rho / params.EI)
        kap = np.sqrt(params.rho * params.K) / (2 * params.I_rho)
        # Coupling acts on interior nodes only: at a reflecting node the sums are
        # pinned, and dropping the terms there keeps both constraint functionals
        # exactly invariant.
        inner = j[:-1]  # p/phi rows at nodes 1..n-1, q/psi rows at nodes 1..n-1
        for row_block, row_idx in ((P, inner), (Q, inner + 1)):
            # + a (phi - psi) at node k; phi_k is index k-1, psi_k is index k
            k = row_idx + (1 if row_block == P else 0)
            add(row_block + row_idx, PH + k - 1, a)
            add(row_block + row_idx, PS + k, -a)
        for row_block, row_idx in ((PH, inner), (PS, inner + 1)):
            k = row_idx + (1 if row_block == PH else 0)
            add(row_block + row_idx, P + k - 1, -kap)
            add(row_block + row_idx, Q + k, kap)
            add(row_block + row_idx, PH + k - 1, -beta[k])
            add(row_block + row_idx, PS + k, -beta[k])
    mat = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(4 * n, 4 * n)
    )
    mat.sum_duplicates()
    gram = sp.identity(4 * n, format="csr") * h
    return DiscreteOperator(kind, grid, params, damping, mat, gram)


def build_operator(kind: str, grid: Grid, params: BeamParams, damping: DampingProfile) -> DiscreteOperator:
    if kind in SECOND_ORDER_KINDS:
        return second_order_operator(grid, params, damping, kind)
    if kind in RIEMANN_KINDS:
        return riemann_operator(grid, params, damping, kind)
    raise ValueError(f"unknown operator kind {kind!r}")


# -- reduced-vector <-> nodal-array conversions ---------------------------------


def second_order_to_vector(u, u2, v, v2) -> np.ndarray:
    return np.concatenate([u[1:-1], u2[1:-1], v[1:-1], v2[1:-1]])


def vector_to_second_order(y: np.ndarray, n: int) -> tuple[np.ndarray, ...]:
    m = n - 1
    out = []
    for i in range(4):
        a = np.zeros(n + 1, dtype=y.dtype)
        a[1:-1] = y[i * m : (i + 1) * m]
        out.append(a)
    return tuple(out)


def riemann_to_vector(p, phi, q, psi) -> np.ndarray:
    """Reduced unknowns; the algebraic end values are discarded."""
    return np.concatenate([p[1:], phi[1:], q[:-1], psi[:-1]])


def vector_to_riemann(w: np.ndarray, n: int) -> tuple[np.ndarray, ...]:
    p = np.empty(n + 1, dtype=w.dtype)
    phi = np.empty_like(p)
    q = np.empty_like(p)
    psi = np.empty_like(p)
    p[1:] = w[:n]
    phi[1:] = w[n : 2 * n]
    q[:-1] = w[2 * n : 3 * n]
    psi[:-1] = w[3 * n :]
    p[0] = -q[0]
    phi[0] = -psi[0]
    q[-1] = -p[-1]
    psi[-1] = -phi[-1]
    return p, phi, q, psi
