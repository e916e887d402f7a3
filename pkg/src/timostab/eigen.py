"""Dense nonsymmetric eigenvalue solver.

Balancing, Householder reduction to upper Hessenberg form and the Francis
double-shift QR iteration, compiled with numba. Only eigenvalues are computed
here; eigenvectors for a handful of selected eigenvalues are obtained by inverse
iteration (:func:`inverse_iteration`), which is all the residual checks need.
"""

from __future__ import annotations

import numba
import numpy as np
import scipy.linalg


class ConvergenceError(RuntimeError):
    """The shifted QR iteration hit its iteration cap."""

    def __init__(self, message: str, iterations: int, unconverged: int):
        super().__init__(message)
        self.iterations = iterations
        self.unconverged = unconverged


@numba.njit(cache=True)
def _balance(a):
    radix = 2.0
    sqrdx = radix * radix
    n = a.shape[0]
    done = False
    while not done:
        done = True
        for i in range(n):
            r = 0.0
            c = 0.0
            for j in range(n):
                if j != i:
                    c += abs(a[j, i])
                    r += abs(a[i, j])
            if c != 0.0 and r != 0.0:
                g = r / radix
                f = 1.0
                s = c + r
                while c < g:
                    f *= radix
                    c *= sqrdx
                g = r * radix
                while c > g:
                    f /= radix
                    c /= sqrdx
                if (c + r) / f < 0.95 * s:
                    done = False
                    g = 1.0 / f
                    for j in range(n):
                        a[i, j] *= g
                    for j in range(n):
                        a[j, i] *= f


@numba.njit(cache=True)
def _hessenberg(a):
    n = a.shape[0]
    v = np.empty(n)
    for k in range(n - 2):
        alpha = 0.0
        for i in range(k + 1, n):
            alpha += a[i, k] * a[i, k]
        alpha = np.sqrt(alpha)
        if alpha == 0.0:
            continue
        if a[k + 1, k] > 0.0:
            alpha = -alpha
        for i in range(k + 1, n):
            v[i] = a[i, k]
        v[k + 1] -= alpha
        vnorm2 = 0.0
        for i in range(k + 1, n):
            vnorm2 += v[i] * v[i]
        if vnorm2 == 0.0:
            continue
        beta = 2.0 / vnorm2
        # left: A <- (I - beta v v^T) A
        for j in range(k, n):
            s = 0.0
            for i in range(k + 1, n):
                s += v[i] * a[i, j]
            s *= beta
            for i in range(k + 1, n):
                a[i, j] -= s * v[i]
        # right: A <- A (I - beta v v^T)
        for i in range(n):
            s = 0.0
            for j in range(k + 1, n):
                s += a[i, j] * v[j]
            s *= beta
            for j in range(k + 1, n):
                a[i, j] -= s * v[j]
        a[k + 1, k] = alpha
        for i in range(k + 2, n):
            a[i, k] = 0.0


@numba.njit(cache=True)
def _sign(a, b):
    return abs(a) if b >= 0.0 else -abs(a)


@numba.njit(cache=True)
def _hqr(a, wr, wi, max_total):
    """Francis double-shift QR on an upper Hessenberg matrix (eigenvalues only).

    Returns (total iterations, number of unconverged eigenvalues).
    """
    n = a.shape[0]
    eps = np.finfo(np.float64).eps
    anorm = 0.0
    for i in range(n):
        for j in range(max(i - 1, 0), n):
            anorm += abs(a[i, j])
    nn = n - 1
    t = 0.0
    its = 0
    total = 0
    x = y = z = w = p = q = r = s = 0.0
    while nn >= 0:
        # look for a single small subdiagonal element
        l = nn
        while l > 0:
            s = abs(a[l - 1, l - 1]) + abs(a[l, l])
            if s == 0.0:
                s = anorm
            if abs(a[l, l - 1]) <= eps * s:
                a[l, l - 1] = 0.0
                break
            l -= 1
        x = a[nn, nn]
        if l == nn:
            wr[nn] = x + t
            wi[nn] = 0.0
            nn -= 1
            its = 0
            continue
        y = a[nn - 1, nn - 1]
        w = a[nn, nn - 1] * a[nn - 1, nn]
        if l == nn - 1:
            p = 0.5 * (y - x)
            q = p * p + w
            z = np.sqrt(abs(q))
            x += t
            if q >= 0.0:
                z = p + _sign(z, p)
                wr[nn - 1] = x + z
                wr[nn] = x + z
                if z != 0.0:
                    wr[nn] = x - w / z
                wi[nn - 1] = 0.0
                wi[nn] = 0.0
            else:
                wr[nn - 1] = x + p
                wr[nn] = x + p
                wi[nn - 1] = z
                wi[nn] = -z
            nn -= 2
            its = 0
            continue
        if total >= max_total:
            return total, nn + 1
        if its > 0 and its % 10 == 0:
            # exceptional shift
            t += x
            for i in range(nn + 1):
                a[i, i] -= x
            s = abs(a[nn, nn - 1]) + abs(a[nn - 1, nn - 2])
            x = 0.75 * s
            y = x
            w = -0.4375 * s * s
        its += 1
        total += 1
        m = nn - 2
        while m >= l:
            z = a[m, m]
            r = x - z
            s = y - z
            p = (r * s - w) / a[m + 1, m] + a[m, m + 1]
            q = a[m + 1, m + 1] - z - r - s
            r = a[m + 2, m + 1]
            s = abs(p) + abs(q) + abs(r)
            p /= s
            q /= s
            r /= s
            if m == l:
                break
            u = abs(a[m, m - 1]) * (abs(q) + abs(r))
            v = abs(p) * (abs(a[m - 1, m - 1]) + abs(z) + abs(a[m + 1, m + 1]))
            if u <= eps * v:
                break
            m -= 1
        for i in range(m, nn - 1):
            a[i + 2, i] = 0.0
            if i != m:
                a[i + 2, i - 1] = 0.0
        for k in range(m, nn):
            if k != m:
                p = a[k, k - 1]
                q = a[k + 1, k - 1]
                r = 0.0
                if k + 1 != nn:
                    r = a[k + 2, k - 1]
                x = abs(p) + abs(q) + abs(r)
                if x != 0.0:
                    p /= x
                    q /= x
                    r /= x
            s = _sign(np.sqrt(p * p + q * q + r * r), p)
            if s != 0.0:
                if k == m:
                    if l != m:
                        a[k, k - 1] = -a[k, k - 1]
                else:
                    a[k, k - 1] = -s * x
                p += s
                x = p / s
                y = q / s
                z = r / s
                q /= p
                r /= p
                for j in range(k, nn + 1):
                    p = a[k, j] + q * a[k + 1, j]
                    if k + 1 != nn:
                        p += r * a[k + 2, j]
                        a[k + 2, j] -= p * z
                    a[k + 1, j] -= p * y
                    a[k, j] -= p * x
                mmin = nn if nn < k + 3 else k + 3
                for i in range(l, mmin + 1):
                    p = x * a[i, k] + y * a[i, k + 1]
                    if k + 1 != nn:
                        p += z * a[i, k + 2]
                        a[i, k + 2] -= p * r
                    a[i, k + 1] -= p * q
                    a[i, k] -= p
    return total, 0


def hessenberg(a: np.ndarray) -> np.ndarray:
    """Upper Hessenberg matrix orthogonally similar to ``a``."""
    h = np.array(a, dtype=np.float64, order="C", copy=True)
    _hessenberg(h)
    return h


def eigvals(a: np.ndarray, *, balance: bool = True, max_iter: int | None = None) -> np.ndarray:
    """All eigenvalues of a real square matrix.

    Args:
        a: Real ``(n, n)`` matrix.
        balance: Apply diagonal similarity balancing first.
        max_iter: Total QR sweep cap; defaults to ``100 * n``.

    Returns:
        Complex array of the ``n`` eigenvalues, complex pairs adjacent.

    Raises:
        ConvergenceError: If the iteration cap is reached.
    """
    a = np.array(a, dtype=np.float64, order="C", copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n == 0:
        return np.empty(0, dtype=complex)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if balance:
        _balance(a)
    _hessenberg(a)
    wr = np.zeros(n)
    wi = np.zeros(n)
    cap = 100 * n if max_iter is None else int(max_iter)
    total, left = _hqr(a, wr, wi, cap)
    if left:
        raise ConvergenceError(
            f"QR iteration did not converge: {left} of {n} eigenvalues left after "
            f"{total} sweeps (cap {cap})",
            iterations=total,
            unconverged=left,
        )
    return wr + 1j * wi


def inverse_iteration(a: np.ndarray, lam: complex, steps: int = 3) -> np.ndarray:
    """Unit eigenvector of ``a`` for the (approximate) eigenvalue ``lam``."""
    n = a.shape[0]
    scale = max(np.linalg.norm(a, 1), 1.0)
    shift = lam + 1e3 * np.finfo(float).eps * scale * (1 + 1j)
    lu = scipy.linalg.lu_factor(a.astype(complex) - shift * np.eye(n))
    rng = np.random.default_rng(0)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x /= np.linalg.norm(x)
    for _ in range(steps):
        x = scipy.linalg.lu_solve(lu, x)
        x /= np.linalg.norm(x)
    return x
