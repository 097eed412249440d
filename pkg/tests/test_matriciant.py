import numpy as np
import pytest

from holderbvp.errors import (ConvergenceError, OrderError,
                              SingularMatriciantError, UsageError)
from holderbvp.grid import GridFunction, Interval, sample
from holderbvp.matriciant import (Matriciant, lift_derivatives, liouville_defect,
                                  matriciant, picard_matriciant,
                                  recover_coefficient, volterra_apply)
from holderbvp.norms import holder_norm

IV = Interval(0.0, 1.0)

# Empirical operator-norm constants of V[A] on the system corpus at N = 400,
# measured once and then asserted (see TestVolterraBound).
VOLTERRA_KAPPA = {(1, 0.5): 0.899, (1, 0.0): 0.878}


class TestRungeKuttaRoute:
    def test_zero_coefficient_gives_identity(self):
        Y = matriciant([["0", "0"], ["0", "0"]], IV, N=100, order=1)
        assert np.allclose(Y.grid.layer(0), np.eye(2), atol=1e-14)
        assert np.all(Y.grid.layer(1) == 0)

    def test_scalar_exponential(self):
        Y = matriciant([["1"]], IV, N=500, order=2, tol=1e-10)
        exact = np.exp(-Y.grid.ts)
        assert np.max(np.abs(Y.grid.layer(0)[:, 0, 0] - exact) / exact) <= 1e-8

    def test_rotation_matches_matrix_exponential(self, system):
        name, entries, exact = system
        if exact is None:
            pytest.skip("no closed form")
        Y = matriciant(entries, IV, N=200, order=1, tol=1e-10)
        worst = max(np.abs(Y.grid.layer(0)[i] - exact(t)).max()
                    for i, t in enumerate(Y.grid.ts))
        assert worst <= 1e-8

    def test_anchor_is_identity(self):
        Y = matriciant([["t", "1"], ["0", "sin(t)"]], IV, t0=0.5, N=200, order=1)
        assert Y.t0 == 0.5
        i0 = np.argmin(np.abs(Y.grid.ts - 0.5))
        assert np.abs(Y.grid.layer(0)[i0] - np.eye(2)).max() <= 1e-10

    def test_anchor_change_is_right_translation(self):
        A = [["0.5", "sin(t)"], ["0.2i", "-0.25"]]
        Y_a = matriciant(A, IV, N=200, order=1)
        Y_mid = matriciant(A, IV, t0=0.5, N=200, order=1)
        i0 = 100
        translated = Y_a.grid.layer(0) @ np.linalg.inv(Y_a.grid.layer(0)[i0])
        assert np.abs(translated - Y_mid.grid.layer(0)).max() <= 1e-6

    def test_anchor_outside_interval(self):
        with pytest.raises(UsageError):
            matriciant([["1"]], IV, t0=2.0)

    def test_liouville_identity(self, system):
        name, entries, _ = system
        Y = matriciant(entries, IV, N=400, order=1)
        assert Y.liouville_defect <= 1e-6
        a_grid = sample(entries, IV, 400, 0)
        assert liouville_defect(Y, a_grid) == Y.liouville_defect


class TestPicardRoute:
    def test_zero_coefficient_single_iteration(self):
        a = sample([["0"]], IV, 100, 0)
        Y = picard_matriciant(a, max_iter=1)
        assert np.allclose(Y.grid.layer(0), 1.0, atol=0)

    def test_scalar_exponential_series(self):
        a = sample([["1"]], IV, 1000, 1)
        Y = picard_matriciant(a, stop_tol=1e-12)
        exact = np.exp(-Y.grid.ts)
        assert np.abs(Y.grid.layer(0)[:, 0, 0] - exact).max() <= 1e-12

    def test_agrees_with_runge_kutta(self, system):
        name, entries, _ = system
        Y_rk = matriciant(entries, IV, N=600, order=1, tol=1e-10)
        Y_pi = picard_matriciant(sample(entries, IV, 600, 0), stop_tol=1e-10)
        diff = np.abs(Y_rk.grid.layer(0) - Y_pi.grid.layer(0)).sum(axis=(1, 2)).max()
        assert diff <= 1e-6

    def test_no_convergence_raises(self):
        a = sample([["1"]], IV, 100, 0)
        with pytest.raises(ConvergenceError):
            picard_matriciant(a, max_iter=2, stop_tol=1e-14)


class TestRecoverCoefficient:
    def test_identity_recovers_zero(self):
        values = np.zeros((2, 51, 2, 2), dtype=complex)
        values[0] = np.eye(2)
        Y = Matriciant(GridFunction(Interval(0, 1), values), 0.0, 1e-12)
        A = recover_coefficient(Y)
        assert np.all(A.layer(0) == 0)

    def test_scalar_exponential_recovers_one(self):
        Y = matriciant([["1"]], IV, N=300, order=2)
        A = recover_coefficient(Y)
        assert np.abs(A.layer(0) - 1.0).max() <= 1e-12
        assert np.abs(A.layer(1)).max() <= 1e-12

    def test_round_trip_in_holder_norm(self, system):
        name, entries, _ = system
        Y = matriciant(entries, IV, N=400, order=2)
        recovered = recover_coefficient(Y)
        target = sample(entries, IV, 400, 1)
        for params in [(0, 0.0), (1, 0.0), (0, 1.0), (1, 0.5)]:
            assert holder_norm(recovered - target, params) <= 1e-6, params

    def test_singular_grid_rejected(self):
        values = np.zeros((2, 51, 1, 1), dtype=complex)
        values[0] = 1.0
        values[0, 25] = 1e-14
        Y = Matriciant(GridFunction(Interval(0, 1), values), 0.0, 1e-10)
        with pytest.raises(SingularMatriciantError):
            recover_coefficient(Y)

    def test_needs_derivative_layer(self):
        values = np.ones((1, 51, 1, 1), dtype=complex)
        Y = Matriciant(GridFunction(Interval(0, 1), values), 0.0, 1e-10)
        with pytest.raises(OrderError):
            recover_coefficient(Y)


class TestLiftDerivatives:
    def test_constant_solution_of_trivial_system(self):
        a = sample([["0"]], IV, 50, 2)
        f = sample(["0"], IV, 50, 2)
        y = sample(["3"], IV, 50, 0)
        lifted = lift_derivatives(a, f, y)
        assert lifted.order == 3
        assert np.all(lifted.values[1:] == 0)

    def test_exponential_layers_alternate(self):
        a = sample([["1"]], IV, 200, 2)
        f = sample(["0"], IV, 200, 2)
        y = sample(["exp(-t)"], IV, 200, 0)
        lifted = lift_derivatives(a, f, y)
        base = np.exp(-lifted.ts)
        for j in range(4):
            err = np.abs(lifted.layer(j)[:, 0, 0] - (-1.0) ** j * base)
            assert err.max() <= 1e-12

    def test_first_layer_is_defining_relation(self):
        a = sample([["t", "1"], ["0", "2"]], IV, 60, 1)
        f = sample(["sin(t)", "1"], IV, 60, 1)
        y = sample(["exp(t)", "t^2"], IV, 60, 0)
        lifted = lift_derivatives(a, f, y)
        expected = f.layer(0) - a.layer(0) @ y.layer(0)
        assert np.array_equal(lifted.layer(1), expected)

    def test_order_mismatch(self):
        a = sample([["1"]], IV, 50, 0)
        f = sample(["0"], IV, 50, 0)
        y = sample(["1"], IV, 50, 0)
        with pytest.raises(OrderError):
            lift_derivatives(a, f, y, order=3)


class TestVolterraBound:
    @pytest.mark.parametrize("params", sorted(VOLTERRA_KAPPA))
    def test_measured_kappa_holds_across_corpus(self, params, system):
        name, entries, _ = system
        n, alpha = params[0], params[1]
        kappa = VOLTERRA_KAPPA[params]
        Y = matriciant(entries, IV, N=400, order=n + 1)
        a_grid = sample(entries, IV, 400, n)
        image = volterra_apply(a_grid, Y.grid, order=n + 1)
        ratio = holder_norm(image, (n + 1, alpha)) / holder_norm(Y.grid, (n + 1, alpha))
        assert ratio <= kappa * holder_norm(a_grid, (n, alpha))
