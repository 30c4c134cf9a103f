"""Classical flow: propagator against RK4, energy, runaway rate."""

import math

import numpy as np
import pytest

from cranking.dynamics import (
    default_dt,
    evolve,
    evolve_rk4,
    growth_rate,
    propagator,
    rk4_step_matrix,
    trajectory,
    unstable_rate,
)
from cranking.errors import EPTooClose, NoGrowth, StepSizeError
from cranking.model import ModelParams, build_dynamical_matrix, build_quadratic_form, routhian_energy

S0 = np.array([0.3, -0.2, 1.0, 0.5])


def taylor_expm(a, terms=60):
    # independent oracle: scaled-and-squared Taylor series
    k = max(0, int(np.ceil(np.log2(max(1.0, np.max(np.abs(a)))))) + 2)
    b = a / 2**k
    out = np.eye(4)
    term = np.eye(4)
    for n in range(1, terms):
        term = term @ b / n
        out = out + term
    for _ in range(k):
        out = out @ out
    return out


class TestPropagator:
    @pytest.mark.parametrize("W", [0.0, 1.0, 2.5, 3.5, -2.5])
    def test_matches_series(self, W):
        p = ModelParams(3, 2, W)
        m = build_dynamical_matrix(p).real
        np.testing.assert_allclose(propagator(p, 0.7), taylor_expm(0.7 * m), atol=1e-11)

    def test_identity_at_zero(self):
        np.testing.assert_allclose(propagator(ModelParams(3, 2, 1.0), 0.0), np.eye(4), atol=1e-13)

    def test_group_property(self):
        p = ModelParams(3, 2, 1.2)
        np.testing.assert_allclose(propagator(p, 0.4) @ propagator(p, 0.6), propagator(p, 1.0), atol=1e-12)

    def test_real_output(self):
        assert propagator(ModelParams(3, 2, 2.5), 1.0).dtype == float

    def test_refuses_critical_point(self):
        with pytest.raises(EPTooClose):
            propagator(ModelParams(3, 2, 2.0), 1.0)


class TestRK4:
    def test_step_limit(self):
        p = ModelParams(3, 2, 1.0)
        with pytest.raises(StepSizeError):
            evolve_rk4(p, S0, 1.0, dt=0.01)

    def test_step_matrix_order(self):
        # local error of one step is O(h^5)
        p = ModelParams(3, 2, 1.0)
        m = build_dynamical_matrix(p).real
        errs = [np.max(np.abs(rk4_step_matrix(p, h) - taylor_expm(h * m))) for h in (1e-2, 5e-3)]
        assert errs[0] / errs[1] == pytest.approx(32, rel=0.1)

    def test_hits_end_time(self):
        p = ModelParams(3, 2, 1.0)
        s = evolve_rk4(p, S0, 0.01234)
        np.testing.assert_allclose(s, propagator(p, 0.01234) @ S0, atol=1e-12)

    def test_negative_time(self):
        p = ModelParams(3, 2, 1.0)
        back = evolve_rk4(p, evolve_rk4(p, S0, 0.5), -0.5)
        np.testing.assert_allclose(back, S0, atol=1e-12)


class TestEvolve:
    def test_agrees_with_rk4(self, rng):
        for _ in range(20):
            wx, wy = rng.uniform(0.5, 3.0, 2)
            lo, hi = sorted((wx, wy))
            W = rng.uniform(0, 0.9 * lo)
            p = ModelParams(wx, wy, W)
            s0 = rng.normal(size=4)
            assert np.max(np.abs(evolve(p, s0, 1.0) - evolve_rk4(p, s0, 1.0))) < 1e-6

    def test_falls_back_at_critical_point(self):
        p = ModelParams(3, 2, 2.0)
        s = evolve(p, S0, 0.5)
        assert np.all(np.isfinite(s))

    @pytest.mark.parametrize("W", [1.0, 2.5])
    def test_energy_conserved(self, W):
        p = ModelParams(3, 2, W)
        h = build_quadratic_form(p)
        traj = trajectory(p, S0, np.linspace(0.1, 10, 50))
        e0 = routhian_energy(S0, h)
        scale = max(abs(e0), 1.0)
        drift = max(abs(routhian_energy(s, h) - e0) for s in traj.states)
        assert drift / scale < 1e-8

    def test_trajectory_needs_increasing_times(self):
        with pytest.raises(ValueError):
            trajectory(ModelParams(3, 2, 1.0), S0, [1.0, 0.5])

    def test_state_validation(self):
        with pytest.raises(ValueError):
            evolve(ModelParams(3, 2, 1.0), [1, 2, 3], 1.0)


class TestGrowth:
    def test_window_rate(self):
        p = ModelParams(3, 2, 2.5)
        exact = math.sqrt(0.5 * (math.sqrt(675) - 25.5))
        assert unstable_rate(p) == pytest.approx(exact, rel=1e-12)
        assert growth_rate(p, [1, 1, 1, 1], 40.0) == pytest.approx(exact, rel=0.01)

    @pytest.mark.parametrize("W", [1.0, 3.5])
    def test_no_growth_outside(self, W):
        with pytest.raises(NoGrowth) as exc:
            growth_rate(ModelParams(3, 2, W), [1, 1, 1, 1], 50.0)
        assert abs(exc.value.slope) < 1e-2

    def test_default_dt(self):
        assert default_dt(ModelParams(4, 2, 0)) == pytest.approx(2.5e-4)
