import math

import numpy as np
import pytest

from timostab.beam_model import BeamParams, ConfigError, DampingProfile, Grid, SecondOrderState, energy_norm
from timostab.riemann_transform import RiemannState, constraint_basis, constraint_values, project_X0
from timostab.semigroup_sim import (
    Formulation,
    SecondOrderStepper,
    conjugacy_test,
    decay_report,
    dissipation_balance,
    simulate,
    step_riemann,
    step_second_order,
)

L = math.pi
PARAMS = BeamParams(1.0, 1.0, 1.0, 4.0, L)
LOCAL = DampingProfile.localized(1.0, 0.3 * L, 0.6 * L)


def admissible(grid, rng):
    p, phi, q, psi = rng.standard_normal((4, grid.n + 1))
    p[[0, -1]] = -q[[0, -1]]
    phi[[0, -1]] = -psi[[0, -1]]
    return RiemannState(grid, p, phi, q, psi)


class TestSecondOrder:
    def test_zero_state(self):
        g = Grid(16, L)
        out = step_second_order(SecondOrderState.zeros(g), PARAMS, LOCAL, 0.1)
        assert np.all(out.stack() == 0)

    def test_conservation(self):
        g = Grid(48, L)
        run = simulate(SecondOrderState.mode(g, 1), PARAMS, DampingProfile.zero(), 50.0, dt=0.05)
        assert len(run.times) == 1001
        assert np.abs(run.energy - run.energy[0]).max() < 1e-10 * run.energy[0]

    def test_dissipation_balance_each_step(self):
        g = Grid(40, L)
        stepper = SecondOrderStepper(g, PARAMS, LOCAL, 0.05)
        y = SecondOrderState.mode(g, 2)
        e0 = energy_norm(y, PARAMS)
        for _ in range(100):
            y2 = stepper.step(y)
            assert abs(dissipation_balance(y, y2, PARAMS, LOCAL, 0.05)) < 1e-10 * e0
            assert energy_norm(y2, PARAMS) < energy_norm(y, PARAMS)
            y = y2

    def test_l1_variant_differs(self):
        g = Grid(32, L)
        y = SecondOrderState.mode(g, 1)
        a = step_second_order(y, PARAMS, LOCAL, 0.1, "full")
        b = step_second_order(y, PARAMS, LOCAL, 0.1, "L1")
        assert not np.allclose(a.stack(), b.stack())

    @pytest.mark.parametrize("kw", [{"dt": 0.0}, {"dt": 0.1, "variant": "L2"}])
    def test_bad_configuration(self, kw):
        with pytest.raises(ConfigError):
            SecondOrderStepper(Grid(16, L), PARAMS, LOCAL, **kw)


class TestRiemann:
    def test_zero(self):
        g = Grid(20, L)
        out = step_riemann(RiemannState.zeros(g), PARAMS, LOCAL, 0.5 * g.h / 2)
        assert out.norm() == 0.0

    def test_cfl_violation(self):
        g = Grid(20, L)
        with pytest.raises(ConfigError, match="CFL"):
            step_riemann(RiemannState.zeros(g), PARAMS, LOCAL, g.h)

    def test_reflection_sums_kept(self):
        g = Grid(30, L)
        W = step_riemann(admissible(g, np.random.default_rng(0)), PARAMS, LOCAL, 0.4 * g.h)
        assert W.p[0] + W.q[0] == 0 and W.p[-1] + W.q[-1] == 0
        assert W.phi[0] + W.psi[0] == 0 and W.phi[-1] + W.psi[-1] == 0

    def test_x0_invariance(self):
        g = Grid(100, L)
        W0 = project_X0(admissible(g, np.random.default_rng(4)))
        run = simulate(W0, PARAMS, LOCAL, 5.0, formulation="riemann")
        assert np.abs(run.constraints).max() <= 1e-8 * W0.norm()

    def test_constraints_frozen_outside_x0(self):
        g = Grid(50, L)
        e1, _ = constraint_basis(g)
        run = simulate(e1, PARAMS, LOCAL, 3.0, formulation="riemann")
        r1 = 2 * L / math.sqrt(2 * L)
        assert np.abs(run.constraints[:, 0] - r1).max() < 1e-12
        assert np.abs(run.constraints[:, 1]).max() < 1e-12

    def test_rejects_inadmissible_data(self):
        g = Grid(20, L)
        p = np.zeros(21)
        p[0] = 1.0
        with pytest.raises(ConfigError, match="reflection"):
            simulate(RiemannState(g, p, 0 * p, 0 * p, 0 * p), PARAMS, LOCAL, 1.0, formulation="riemann")

    def test_no_blowup(self):
        g = Grid(32, L)
        W0 = admissible(g, np.random.default_rng(2))
        run = simulate(W0, PARAMS, LOCAL, 100.0, formulation="riemann", snapshots=1)
        assert np.all(np.isfinite(run.energy))
        assert run.energy.max() <= 10 * run.energy[0]


class TestConjugacy:
    def test_zero(self):
        assert conjugacy_test(SecondOrderState.zeros(Grid(16, L)), PARAMS, LOCAL, 1.0) == 0.0

    def test_refinement(self):
        d = [conjugacy_test(SecondOrderState.mode(Grid(n, L), 1), PARAMS, LOCAL, 2.0) for n in (50, 100)]
        assert d[0] / d[1] >= 1.5

    def test_equal_speeds_undamped(self):
        p = BeamParams(1.0, 1.0, 1.0, 1.0, L)
        d = [conjugacy_test(SecondOrderState.mode(Grid(n, L), 1), p, DampingProfile.zero(), 2.0) for n in (50, 100)]
        assert d[1] < d[0] and d[0] < 0.2


class TestDecay:
    def test_undamped(self):
        run = simulate(SecondOrderState.mode(Grid(32, L), 1), PARAMS, DampingProfile.zero(), 5.0)
        rep = decay_report(run)
        assert rep.t_half == math.inf and rep.monotone
        assert rep.ET == pytest.approx(rep.E0, rel=1e-10)

    def test_low_mode_halves(self):
        run = simulate(SecondOrderState.mode(Grid(64, L), 2), PARAMS, LOCAL, 40.0, dt=0.05)
        rep = decay_report(run)
        assert rep.monotone and rep.t_half < 40.0
        assert rep.as_dict().keys() == {"E0", "ET", "t_half", "monotone"}

    def test_formulation_names(self):
        assert {f.value for f in Formulation} == {"second-order", "second-order-l1", "riemann"}
