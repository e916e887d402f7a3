import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from timostab.beam_model import BeamParams, DimensionError, Grid, SecondOrderState, trapezoid
from timostab.riemann_transform import (
    ConstraintError,
    RiemannState,
    constraint_basis,
    constraint_values,
    cumulative_trapezoid,
    domain_check,
    forward_transform,
    inverse_transform,
    nodal_derivative,
    project_X0,
)

PARAMS = BeamParams(1.0, 1.0, 1.0, 4.0, math.pi)


def random_state(grid, rng, velocity_ends=True):
    u, v, u2, v2 = rng.standard_normal((4, grid.n + 1))
    u[[0, -1]] = v[[0, -1]] = 0.0
    if not velocity_ends:
        u2[[0, -1]] = v2[[0, -1]] = 0.0
    return SecondOrderState(grid, u, u2, v, v2)


def random_riemann(grid, rng):
    return RiemannState(grid, *rng.standard_normal((4, grid.n + 1)))


class TestCalculus:
    def test_derivative_integral_pairing(self):
        rng = np.random.default_rng(0)
        u = rng.standard_normal(33)
        u[0] = 0.0
        np.testing.assert_allclose(cumulative_trapezoid(nodal_derivative(u, 0.1), 0.1), u, atol=1e-12)

    def test_derivative_second_order_for_smooth(self):
        errs = []
        for n in (32, 64, 128):
            x = np.linspace(0, 1, n + 1)
            errs.append(np.abs(nodal_derivative(np.sin(3 * x), 1 / n) - 3 * np.cos(3 * x)).max())
        assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


class TestForward:
    def test_zero(self):
        W = forward_transform(SecondOrderState.zeros(Grid(10, math.pi)), PARAMS)
        assert all(np.all(c == 0) for c in W.components())

    def test_mode_one(self):
        g = Grid(200, math.pi)
        W = forward_transform(SecondOrderState.mode(g, 1), PARAMS)
        c = np.cos(g.nodes)
        np.testing.assert_allclose(W.p, -c, atol=1e-3)
        np.testing.assert_allclose(W.q, c, atol=1e-3)
        assert np.all(W.phi == 0) and np.all(W.psi == 0)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(8, 80), st.integers(0, 2**31 - 1))
    def test_images_lie_in_x0(self, n, seed):
        g = Grid(n, math.pi)
        Y = random_state(g, np.random.default_rng(seed))
        W = forward_transform(Y, PARAMS)
        cv = constraint_values(W)
        assert cv.in_x0(W.norm())

    def test_isometry_identity(self):
        g = Grid(50, math.pi)
        Y = random_state(g, np.random.default_rng(3))
        W = forward_transform(Y, PARAMS)
        h = g.h
        ux, vx = nodal_derivative(Y.u, h), nodal_derivative(Y.v, h)
        lhs1 = trapezoid(W.p**2 + W.q**2, h)
        lhs2 = trapezoid(W.phi**2 + W.psi**2, h)
        assert lhs1 == pytest.approx(2 * trapezoid(PARAMS.c1**2 * ux**2 + Y.u2**2, h), rel=1e-12)
        assert lhs2 == pytest.approx(2 * trapezoid(PARAMS.c2**2 * vx**2 + Y.v2**2, h), rel=1e-12)

    def test_grid_mismatch(self):
        with pytest.raises(DimensionError):
            forward_transform(SecondOrderState.zeros(Grid(10, 1.0)), PARAMS)


class TestInverse:
    def test_zero(self):
        Y = inverse_transform(RiemannState.zeros(Grid(10, math.pi)), PARAMS)
        assert np.all(Y.stack() == 0)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(8, 120), st.integers(0, 2**31 - 1))
    def test_round_trip(self, n, seed):
        g = Grid(n, math.pi)
        Y = random_state(g, np.random.default_rng(seed))
        W = forward_transform(Y, PARAMS)
        Y2 = inverse_transform(W, PARAMS)
        np.testing.assert_allclose(Y2.stack(), Y.stack(), atol=1e-12 * max(1, np.abs(Y.stack()).max()))
        assert (forward_transform(Y2, PARAMS) - W).norm() <= 1e-12 * max(1.0, W.norm())

    def test_constraint_error_names_both(self):
        g = Grid(16, math.pi)
        e1, _ = constraint_basis(g)
        with pytest.raises(ConstraintError, match="r1=.*r2=") as info:
            inverse_transform(e1, PARAMS)
        assert info.value.r1 == pytest.approx(2 * g.l / math.sqrt(2 * g.l))
        assert info.value.r2 == 0


class TestProjection:
    def test_basis_orthonormal(self):
        e1, e2 = constraint_basis(Grid(37, 2.5))
        assert e1.norm() == pytest.approx(1.0, abs=1e-12)
        assert e2.norm() == pytest.approx(1.0, abs=1e-12)
        assert abs(e1.inner(e2)) < 1e-12

    @settings(max_examples=30, deadline=None)
    @given(st.integers(8, 60), st.integers(0, 2**31 - 1))
    def test_idempotent_and_self_adjoint(self, n, seed):
        g = Grid(n, math.pi)
        rng = np.random.default_rng(seed)
        U, V = random_riemann(g, rng), random_riemann(g, rng)
        PU, PV = project_X0(U), project_X0(V)
        assert constraint_values(PU).in_x0(U.norm())
        assert (project_X0(PU) - PU).norm() <= 1e-12 * U.norm()
        assert abs(PU.inner(V) - U.inner(PV)) <= 1e-12 * U.norm() * V.norm()

    def test_kernel_is_span_of_basis(self):
        g = Grid(20, math.pi)
        e1, e2 = constraint_basis(g)
        assert project_X0(3.0 * e1 - 2.0 * e2).norm() < 1e-12
        # a residual of the projection is always in the span
        U = random_riemann(g, np.random.default_rng(7))
        R = U - project_X0(U)
        assert (R - (R.inner(e1) * e1 + R.inner(e2) * e2)).norm() < 1e-12

    def test_orthogonal_decomposition(self):
        g = Grid(25, math.pi)
        W0 = project_X0(random_riemann(g, np.random.default_rng(9)))
        e1, _ = constraint_basis(g)
        assert (project_X0(e1 + W0) - W0).norm() < 1e-12
        assert (project_X0(W0) - W0).norm() < 1e-12


class TestDomainCheck:
    def test_admissible_pair(self):
        g = Grid(30, math.pi)
        Y = random_state(g, np.random.default_rng(2), velocity_ends=False)
        assert domain_check(Y)
        assert domain_check(forward_transform(Y, PARAMS))

    def test_velocity_at_boundary(self):
        g = Grid(10, 1.0)
        u2 = np.zeros(11)
        u2[0] = 0.5
        res = domain_check(SecondOrderState(g, np.zeros(11), u2, np.zeros(11), np.zeros(11)))
        assert not res and res.reasons == ("u2 boundary",)

    def test_riemann_boundary_sum(self):
        g = Grid(10, 1.0)
        p = np.zeros(11)
        p[0] = 0.1
        res = domain_check(RiemannState(g, p, np.zeros(11), np.zeros(11), np.zeros(11)))
        assert not res
        assert "p+q boundary" in res.reasons

    def test_outside_x0(self):
        e1, _ = constraint_basis(Grid(10, 1.0))
        assert domain_check(e1, "riemann").reasons == ("r1",)

    def test_wrong_side(self):
        with pytest.raises(TypeError):
            domain_check(SecondOrderState.zeros(Grid(8, 1.0)), "riemann")
        with pytest.raises(ValueError):
            domain_check(SecondOrderState.zeros(Grid(8, 1.0)), "sideways")
