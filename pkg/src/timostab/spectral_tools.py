"""Eigenanalysis of the discrete generators and finite-dimensional spectral checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.optimize import linear_sum_assignment
from scipy.sparse.csgraph import connected_components

from . import eigen
from .beam_model import BeamParams, ConfigError, DampingProfile, Grid
from .discrete import DiscreteOperator, second_order_operator
from .transport_operator import AnalyticSpectrum

MAX_SPECTRUM_N = 400
MAX_GROWTH_N = 200


class NumericalError(RuntimeError):
    """An eigenvalue or exponential computation failed."""


@dataclass
class SpectrumReport:
    """Eigenvalues of a discrete operator with basic diagnostics.

    Attributes:
        eigenvalues: Sorted by imaginary part, then real part.
        max_residual: Largest relative residual ``||A v - lam v|| / ||A||`` over the sampled pairs.
        pairing_error: Largest distance between an eigenvalue and the nearest
            conjugate of another (zero for exactly paired spectra).
    """

    eigenvalues: np.ndarray
    max_real_part: float
    min_abs_real_part_over_nonzero: float
    max_residual: float
    pairing_error: float
    kind: str = "matrix"
    branch_table: list[dict] = field(default_factory=list)


def _blocks(mat) -> list[np.ndarray]:
    """Index sets of the strongly connected components (diagonal blocks of a block-triangular form)."""
    s = sp.csr_matrix(mat)
    count, labels = connected_components(s, directed=True, connection="strong")
    return [np.nonzero(labels == c)[0] for c in range(count)]


def _dense_eigvals(a: np.ndarray, method: str) -> np.ndarray:
    if method == "qr":
        try:
            return eigen.eigvals(a)
        except eigen.ConvergenceError as exc:
            raise NumericalError(str(exc)) from exc
    if method == "lapack":
        return scipy.linalg.eigvals(a)
    raise ValueError(f"method must be 'qr' or 'lapack', got {method!r}")


def eigenvalues(mat, method: str = "qr") -> np.ndarray:
    """All eigenvalues, solving each strongly connected block separately."""
    if sp.issparse(mat):
        out = []
        for idx in _blocks(mat):
            block = mat[idx][:, idx].toarray()
            out.append(_dense_eigvals(block, method))
        return np.concatenate(out)
    return _dense_eigvals(np.asarray(mat, dtype=float), method)


def _sort(ev: np.ndarray) -> np.ndarray:
    return ev[np.lexsort((ev.real, ev.imag))]


def discrete_spectrum(op, method: str = "qr", n_check: int = 10, nonzero_tol: float = 1e-9) -> SpectrumReport:
    """Full spectrum of a discrete operator or a plain square matrix.

    Args:
        op: :class:`DiscreteOperator` (grid ``n <= 400``) or a real square matrix.
        method: ``"qr"`` for the in-repo solver, ``"lapack"`` for a cross-check.
        n_check: Number of eigenpairs whose residual is verified by inverse iteration.
        nonzero_tol: Eigenvalues with ``|lam| <= nonzero_tol * ||A||`` are treated as zero.

    Raises:
        ConfigError: If the grid is larger than the dense budget.
        NumericalError: If the QR iteration fails or a residual exceeds ``1e-8 ||A||``.
    """
    if isinstance(op, DiscreteOperator):
        if op.grid.n > MAX_SPECTRUM_N:
            raise ConfigError(f"dense eigensolve limited to n <= {MAX_SPECTRUM_N}, got n={op.grid.n}")
        mat, kind = op.matrix, op.kind
    else:
        mat, kind = op, "matrix"
    ev = _sort(eigenvalues(mat, method))
    dense = mat.toarray() if hasattr(mat, "toarray") else np.asarray(mat, dtype=float)
    anorm = max(np.linalg.norm(dense, 1), np.finfo(float).tiny)

    worst = 0.0
    if n_check and ev.size:
        picks = np.unique(np.linspace(0, ev.size - 1, min(n_check, ev.size)).round().astype(int))
        for i in picks:
            v = eigen.inverse_iteration(dense, ev[i])
            worst = max(worst, float(np.linalg.norm(dense @ v - ev[i] * v) / anorm))
        if worst > 1e-8:
            raise NumericalError(f"eigenpair residual {worst:.3e} exceeds 1e-8 relative")

    pairing = 0.0
    if ev.size:
        cost = np.abs(ev[:, None] - np.conj(ev)[None, :])
        r, c = linear_sum_assignment(cost) if ev.size <= 2000 else (np.arange(ev.size), cost.argmin(1))
        pairing = float(cost[r, c].max())
    nonzero = np.abs(ev) > nonzero_tol * anorm
    min_abs_re = float(np.abs(ev.real[nonzero]).min()) if nonzero.any() else math.nan
    return SpectrumReport(ev, float(ev.real.max()), min_abs_re, worst, pairing, kind)


def match_branches(ev: np.ndarray, analytic: AnalyticSpectrum, h: float, count: int = 10) -> list[dict]:
    """Nearest discrete eigenvalue for the first ``count`` analytic ones (k >= 0) of each branch."""
    rows = []
    for name, branch in (("branch1", analytic.branch1), ("branch2", analytic.branch2)):
        for k in range(count):
            target = branch[analytic.k == k][0]
            i = int(np.argmin(np.abs(ev - target)))
            err = float(abs(ev[i] - target))
            tol = 5 * h * (1 + abs(target.imag))
            rows.append(
                {"branch": name, "k": k, "analytic": complex(target), "discrete": complex(ev[i]), "error": err, "tol": tol, "ok": err <= tol}
            )
    return rows


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    if a.size == 0 and b.size == 0:
        return 0.0
    if a.size == 0 or b.size == 0:
        return math.inf
    d = np.abs(a[:, None] - b[None, :])
    return float(max(d.min(1).max(), d.min(0).max()))


@dataclass
class TrialReport:
    trials: int
    failures: list[dict]
    worst: float

    @property
    def passed(self) -> bool:
        return not self.failures


def _well_conditioned(rng, dim: int, cond: float = 1e3) -> np.ndarray:
    q1, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    q2, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q1 @ np.diag(np.geomspace(1.0, cond, dim)) @ q2


def similarity_spectrum_invariance(trials: int = 200, dim: int = 20, seed: int = 0) -> TrialReport:
    """Check that ``J^{-1} R J`` and ``R`` share their eigenvalues for random pairs."""
    if not 1 <= dim <= 50:
        raise ValueError(f"dim must be in [1, 50], got {dim}")
    rng = np.random.default_rng(seed)
    failures, worst = [], 0.0
    for t in range(trials):
        R = rng.standard_normal((dim, dim))
        J = _well_conditioned(rng, dim)
        S = np.linalg.solve(J, R @ J)
        d = hausdorff(eigen.eigvals(R), eigen.eigvals(S))
        scale = np.linalg.norm(R, 2)
        worst = max(worst, d / scale)
        if d > 1e-6 * scale:
            failures.append({"trial": t, "distance": d})
    return TrialReport(trials, failures, worst)


def _match_multisets(a: np.ndarray, b: np.ndarray) -> float:
    if a.size != b.size:
        return math.inf
    if a.size == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


def projection_check(R_sub: np.ndarray, basis: np.ndarray, extra: np.ndarray, powers: int = 5) -> tuple[float, float]:
    """Errors of ``(R P)^k = R^k P`` and of the nonzero-eigenvalue match.

    ``R`` acts on the whole space as ``Q R_sub Q^T + Q extra (I - P)``, which maps
    into ``G0 = range(Q)`` and restricts to ``R_sub`` on it.
    """
    Q = basis
    P = Q @ Q.T
    dim = Q.shape[0]
    R = Q @ R_sub @ Q.T + Q @ extra @ (np.eye(dim) - P)
    RP = R @ P
    scale = max(1.0, np.linalg.norm(R, 2))
    power_err = 0.0
    lhs, rk = np.eye(dim), np.eye(dim)
    for k in range(1, powers + 1):
        lhs = lhs @ RP
        rk = rk @ R
        power_err = max(power_err, np.linalg.norm(lhs - rk @ P, 2) / scale**k)
    e_full = eigen.eigvals(RP)
    e_sub = eigen.eigvals(R_sub) if R_sub.size else np.empty(0, dtype=complex)
    e_full = e_full[np.abs(e_full) > 1e-8]
    e_sub = e_sub[np.abs(e_sub) > 1e-8]
    return float(power_err), _match_multisets(e_full, e_sub)


def projection_multiplication_invariance(trials: int = 200, dim: int = 24, subdim: int = 10, seed: int = 0) -> TrialReport:
    """Random checks of the power identity and of nonzero-spectrum equality for ``R P``."""
    if not 0 < subdim < dim <= 50:
        raise ValueError(f"need 0 < subdim < dim <= 50, got subdim={subdim}, dim={dim}")
    rng = np.random.default_rng(seed)
    failures, worst = [], 0.0
    for t in range(trials):
        Q, _ = np.linalg.qr(rng.standard_normal((dim, subdim)))
        R_sub = rng.standard_normal((subdim, subdim))
        extra = rng.standard_normal((subdim, dim))
        perr, serr = projection_check(R_sub, Q, extra)
        worst = max(worst, serr)
        if perr > 1e-10 or serr > 1e-6:
            failures.append({"trial": t, "power_error": perr, "spectrum_error": serr})
    return TrialReport(trials, failures, worst)


def growth_bound_estimate(op, t_samples=None, gram=None) -> float:
    """``min_t log ||exp(t A)|| / t`` in the norm induced by the Gram matrix.

    Args:
        op: :class:`DiscreteOperator` (grid ``n <= 200``) or a square matrix.
        t_samples: Positive sample times; default ``geomspace(0.5, 20, 8)``.
        gram: Gram matrix for plain matrices; identity if omitted.

    Raises:
        OverflowError: If an exponential is not finite.
    """
    if isinstance(op, DiscreteOperator):
        if op.grid.n > MAX_GROWTH_N:
            raise ConfigError(f"matrix exponential limited to n <= {MAX_GROWTH_N}, got n={op.grid.n}")
        A, G = op.matrix.toarray(), op.gram.toarray()
    else:
        A = np.asarray(op, dtype=float)
        G = np.eye(A.shape[0]) if gram is None else np.asarray(gram, dtype=float)
    ts = np.geomspace(0.5, 20.0, 8) if t_samples is None else np.asarray(t_samples, dtype=float)
    if np.any(ts <= 0):
        raise ValueError("sample times must be positive")
    R = scipy.linalg.cholesky(G)  # G = R^T R
    best = math.inf
    for t in ts:
        E = scipy.linalg.expm(t * A)
        if not np.all(np.isfinite(E)):
            raise OverflowError(f"matrix exponential overflowed at t={t}")
        M = R @ scipy.linalg.solve_triangular(R, E.T, trans="T").T
        best = min(best, math.log(np.linalg.norm(M, 2)) / t)
    return best


def resolved_band(params: BeamParams, n: int) -> float:
    """Top of the frequency band the grid resolves: ``(n/4) (pi/l) min(c1, c2)``."""
    return n / 4 * math.pi / params.l * min(params.c1, params.c2)


def damping_line(params: BeamParams, damping: DampingProfile) -> float:
    return -damping.integral(params.l) / (2 * params.l * params.I_rho)


def least_damped_in_band(params: BeamParams, damping: DampingProfile, n: int, method: str = "qr") -> float:
    """Smallest ``|Re lam|`` of discrete ``L`` with ``|Im lam|`` in ``[Omega/10, Omega]``."""
    op = second_order_operator(Grid(n, params.l), params, damping, "L")
    ev = discrete_spectrum(op, method, n_check=0).eigenvalues
    top = resolved_band(params, n)
    band = ev[(np.abs(ev.imag) >= top / 10) & (np.abs(ev.imag) <= top)]
    return float(np.abs(band.real).min())


def essential_accumulation_diagnostic(params: BeamParams, damping: DampingProfile, n_list, method: str = "qr") -> list[dict]:
    """Distance of high-frequency eigenvalues of discrete ``L`` to the two predicted lines.

    For each ``n`` the eigenvalues with ``Im lam`` in ``[2 Omega/3, Omega]`` are
    assigned to the nearer of ``Re = 0`` and ``Re = -int b / (2 l I_rho)``; rows
    report the largest distance per line and overall.

    Raises:
        ConfigError: If the wave speeds coincide or ``n_list`` is not increasing.
    """
    if not params.distinct_speeds:
        raise ConfigError("accumulation diagnostic requires distinct wave speeds")
    n_list = [int(n) for n in n_list]
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ConfigError("n_list must be strictly increasing")
    lines = {"undamped": 0.0, "damped": damping_line(params, damping)}
    rows = []
    for n in n_list:
        op = second_order_operator(Grid(n, params.l), params, damping, "L")
        ev = discrete_spectrum(op, method, n_check=0).eigenvalues
        top = resolved_band(params, n)
        band = ev[(ev.imag >= 2 * top / 3) & (ev.imag <= top)]
        dist = np.abs(band.real[:, None] - np.array(list(lines.values()))[None, :])
        nearest = dist.argmin(1)
        for i, name in enumerate(lines):
            sel = dist[nearest == i, i]
            rows.append({"n": n, "line": name, "max_distance": float(sel.max()) if sel.size else math.nan, "count": int(sel.size)})
        rows.append({"n": n, "line": "all", "max_distance": float(dist.min(1).max()), "count": int(band.size)})
    return rows
