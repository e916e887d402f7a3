import math

import numpy as np
import pytest

from timostab.beam_model import BeamParams, DampingProfile, DimensionError, Grid
from timostab.riemann_transform import RiemannState, project_X0
from timostab.transport_operator import (
    AugmentedState,
    NearSpectrumError,
    analytic_spectrum,
    augmented_project,
    augmented_step_consistency,
    build_matrices,
    resolvent_apply,
    resolvent_residual,
)

UNIT = BeamParams(1.0, 1.0, 1.0, 1.0, 1.0)
DISTINCT = BeamParams(1.0, 1.0, 1.0, 4.0, math.pi)


def constant_data(grid, values=(1.0, 0.0, 0.0, 0.0)):
    return RiemannState(grid, *(np.full(grid.n + 1, v) for v in values))


def admissible(grid, rng):
    p, phi, q, psi = rng.standard_normal((4, grid.n + 1))
    p[[0, -1]] = -q[[0, -1]]
    phi[[0, -1]] = -psi[[0, -1]]
    return RiemannState(grid, p, phi, q, psi)


class TestMatrices:
    def test_unit_entries(self):
        m = build_matrices(UNIT, DampingProfile.zero())
        np.testing.assert_array_equal(m.Khat, np.diag([1.0, 1.0, -1.0, -1.0]))
        np.testing.assert_allclose(m.C[1], [0.5, 0.0, -0.5, 0.0])
        np.testing.assert_allclose(m.C[3], [0.5, 0.0, -0.5, 0.0])
        np.testing.assert_array_equal(m.D, -np.eye(2))
        np.testing.assert_array_equal(m.Ehat, -np.eye(2))
        assert not m.F.any() and not m.G.any()
        assert not m.distinct_speeds

    def test_c0_for_b_equal_two_irho(self):
        p = BeamParams(1.0, 1.0, 3.0, 1.0, 1.0)
        m = build_matrices(p, DampingProfile.constant(6.0), 0.5)
        np.testing.assert_allclose(m.C0, np.diag([0.0, 1.0, 0.0, 1.0]))

    @pytest.mark.parametrize("x", [0.1, 1.2, 2.5])
    def test_structure(self, x):
        d = DampingProfile.localized(2.0, 1.0, 2.0)
        m = build_matrices(BeamParams(2.0, 3.0, 0.5, 7.0, math.pi), d, x)
        k = np.diag(m.Khat)
        assert np.all(k[:2] > 0) and np.all(k[2:] < 0)
        assert m.distinct_speeds and k[0] != k[1]
        off = m.C - m.C0
        np.testing.assert_allclose(np.diag(off), 0.0)
        np.testing.assert_allclose(np.diag(m.C), np.diag(m.C0))
        assert m.C[0, 0] == 0 and m.C[2, 2] == 0


class TestAnalyticSpectrum:
    def test_reference_case(self):
        s = analytic_spectrum(DISTINCT, DampingProfile.constant(1.0), 3)
        np.testing.assert_allclose(s.branch1, 1j * np.arange(-3, 4), atol=1e-14)
        np.testing.assert_allclose(s.branch2, -0.5 + 2j * np.arange(-3, 4), atol=1e-14)
        assert s.damping_shift == -0.5
        assert s.spectral_bound == 0.0

    def test_undamped_imaginary(self):
        s = analytic_spectrum(DISTINCT, DampingProfile.zero(), 5)
        assert np.all(s.eigenvalues().real == 0)

    def test_two_real_parts_and_disjoint(self):
        d = DampingProfile.localized(1.0, 0.3 * math.pi, 0.6 * math.pi)
        s = analytic_spectrum(DISTINCT, d, 8)
        assert set(np.round(s.eigenvalues().real, 12)) == {0.0, -0.15}
        assert not set(s.branch1.tolist()) & set(s.branch2.tolist())

    def test_kmax(self):
        with pytest.raises(ValueError):
            analytic_spectrum(DISTINCT, DampingProfile.zero(), 0)


class TestResolvent:
    def test_worked_example(self):
        g = Grid(200, 1.0)
        d = DampingProfile.constant(1.0)
        Z = constant_data(g)
        U = resolvent_apply(1.0, Z, UNIT, d)
        # p' + p = 1, q' - q = 0 with p + q = 0 at both ends
        p0 = (1 - math.exp(-1)) / (math.e - math.exp(-1))
        assert U.p[0].real == pytest.approx(p0, rel=1e-4)
        assert U.q[0] == -U.p[0] and U.q[-1] == -U.p[-1]
        assert np.all(U.phi == 0) and np.all(U.psi == 0)
        assert resolvent_residual(1.0, U, Z, UNIT, d) < 5 * g.h

    def test_first_order_convergence(self):
        d = DampingProfile.localized(1.0, 0.3 * math.pi, 0.6 * math.pi)
        res = []
        for n in (100, 200, 400):
            g = Grid(n, math.pi)
            x = g.nodes
            Z = RiemannState(g, np.sin(x), np.cos(2 * x), x**2, np.exp(-x))
            lam = 0.3 + 0.7j
            res.append(resolvent_residual(lam, resolvent_apply(lam, Z, DISTINCT, d), Z, DISTINCT, d))
        for a, b in zip(res, res[1:]):
            assert a / b == pytest.approx(2.0, rel=0.3)

    def test_zero_data(self):
        g = Grid(20, 1.0)
        U = resolvent_apply(0.5 + 1j, RiemannState.zeros(g), UNIT, DampingProfile.constant(1.0))
        assert U.norm() == 0.0

    @pytest.mark.parametrize("k", [0, 1, -3])
    def test_near_spectrum_branch1(self, k):
        g = Grid(20, 1.0)
        with pytest.raises(NearSpectrumError, match="branch1"):
            resolvent_apply(1j * k * math.pi, constant_data(g), UNIT, DampingProfile.constant(1.0))

    def test_near_spectrum_branch2(self):
        g = Grid(20, math.pi)
        lam = analytic_spectrum(DISTINCT, DampingProfile.constant(1.0), 2).branch2[3]
        with pytest.raises(NearSpectrumError, match="branch2"):
            resolvent_apply(lam, constant_data(g), DISTINCT, DampingProfile.constant(1.0))

    def test_grid_mismatch(self):
        with pytest.raises(DimensionError):
            resolvent_apply(1.0, constant_data(Grid(10, 2.0)), UNIT, DampingProfile.zero())


class TestAugmented:
    def test_projection_zeroes_z(self):
        W = admissible(Grid(10, 1.0), np.random.default_rng(0))
        s = augmented_project(W, (5.0, -3.0))
        np.testing.assert_array_equal(s.z, [0.0, 0.0])
        assert s.in_domain()
        assert not AugmentedState(W, np.array([5.0, -3.0])).in_domain()

    def test_trajectories_match(self):
        g = Grid(60, math.pi)
        d = DampingProfile.localized(1.0, 0.3 * math.pi, 0.6 * math.pi)
        W0 = project_X0(admissible(g, np.random.default_rng(1)))
        assert augmented_step_consistency(W0, (5.0, -3.0), 2.0, DISTINCT, d) < 1e-10

    def test_zero(self):
        g = Grid(16, 1.0)
        assert augmented_step_consistency(RiemannState.zeros(g), (0.0, 0.0), 1.0, UNIT, DampingProfile.zero()) == 0.0
