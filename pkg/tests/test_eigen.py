import numpy as np
import pytest
import scipy.linalg

from timostab.eigen import ConvergenceError, eigvals, hessenberg, inverse_iteration


def _hausdorff(a, b):
    d = np.abs(a[:, None] - b[None, :])
    return max(d.min(0).max(), d.min(1).max())


class TestEigvals:
    def test_rotation(self):
        ev = np.sort_complex(eigvals(np.array([[0.0, -1.0], [1.0, 0.0]])))
        np.testing.assert_allclose(ev, [-1j, 1j], atol=1e-15)

    def test_empty_and_scalar(self):
        assert eigvals(np.zeros((0, 0))).size == 0
        np.testing.assert_allclose(eigvals(np.array([[3.5]])), [3.5])

    @pytest.mark.parametrize("n", [2, 3, 7, 30, 101])
    def test_random_matches_lapack(self, n):
        a = np.random.default_rng(n).standard_normal((n, n))
        ref = scipy.linalg.eigvals(a)
        assert _hausdorff(eigvals(a), ref) < 1e-10 * np.linalg.norm(a)

    def test_triangular_exact(self):
        a = np.triu(np.arange(1.0, 17.0).reshape(4, 4))
        np.testing.assert_allclose(np.sort(eigvals(a).real), [1, 6, 11, 16], rtol=1e-13)

    def test_conjugate_pairs(self):
        a = np.random.default_rng(5).standard_normal((40, 40))
        ev = eigvals(a)
        cplx = ev[ev.imag != 0]
        assert _hausdorff(cplx, cplx.conj()) == 0.0

    def test_badly_scaled_needs_balancing(self):
        d = np.diag(10.0 ** np.arange(-6, 7, 2))
        base = np.random.default_rng(2).standard_normal((7, 7))
        a = d @ base @ np.linalg.inv(d)
        ref = np.linalg.eigvals(base)
        assert _hausdorff(eigvals(a), ref) < 1e-8

    def test_iteration_cap(self):
        a = np.random.default_rng(0).standard_normal((20, 20))
        with pytest.raises(ConvergenceError) as info:
            eigvals(a, max_iter=1)
        assert info.value.unconverged > 0

    @pytest.mark.parametrize("bad", [np.ones((2, 3)), np.array([[np.nan]])])
    def test_invalid_input(self, bad):
        with pytest.raises(ValueError):
            eigvals(bad)


def test_hessenberg_is_similar():
    a = np.random.default_rng(1).standard_normal((12, 12))
    h = hessenberg(a)
    assert np.allclose(np.tril(h, -2), 0.0)
    assert _hausdorff(np.linalg.eigvals(h), np.linalg.eigvals(a)) < 1e-10


def test_inverse_iteration_residual():
    a = np.random.default_rng(3).standard_normal((25, 25))
    for lam in eigvals(a)[:5]:
        v = inverse_iteration(a, lam)
        assert np.linalg.norm(a @ v - lam * v) < 1e-10 * np.linalg.norm(a)
