import numpy as np
import pytest

from holderbvp.boundary import BoundaryOperator, StieltjesMeasure
from holderbvp.errors import NotWellPosedError, OrderError, UsageError
from holderbvp.grid import GridFunction, Interval, sample
from holderbvp.norms import holder_norm
from holderbvp.solver import (ProblemInstance, is_wellposed, residual, solve)

IV = Interval(0.0, 1.0)
CAUCHY = BoundaryOperator([np.eye(1)])
# z(0) - z(1) = -integral of z' over [0, 1]
PERIODIC = BoundaryOperator([np.zeros((1, 1))],
                            StieltjesMeasure(1, density=[["-1"]]))
# z(0) + z(1) = 2 z(0) + integral of z'
TWO_POINT = BoundaryOperator([2 * np.eye(1)],
                             StieltjesMeasure(1, density=[["1"]]))


def scalar_problem(A, f, B, q, alpha=0.0):
    return ProblemInstance(IV, 0, alpha, 1, [[A]], [f], B, [q])


class TestIsWellposed:
    def test_initial_condition_always_wellposed(self):
        report = is_wellposed(scalar_problem("sin(t)", "0", CAUCHY, 1.0))
        assert report.wellposed and report.kernel_dim == 0
        assert abs(report.det - 1.0) <= 1e-12

    def test_periodic_trivial_system_degenerate(self):
        report = is_wellposed(scalar_problem("0", "0", PERIODIC, 0.0))
        assert not report.wellposed
        assert report.kernel_dim == 1
        assert abs(report.det) <= 1e-12

    def test_periodic_with_decay_wellposed(self):
        report = is_wellposed(scalar_problem("1", "0", PERIODIC, 1.0))
        assert report.wellposed
        assert abs(report.det - (1.0 - np.exp(-1.0))) <= 1e-8

    def test_rank_nullity_balance(self):
        # rank-one boundary matrix: both rows read the first component at a
        B = BoundaryOperator([np.array([[1.0, 0.0], [1.0, 0.0]])])
        prob = ProblemInstance(IV, 0, 0.0, 2, [["0", "0"], ["0", "0"]],
                               ["0", "0"], B, [0.0, 0.0])
        report = is_wellposed(prob)
        assert report.kernel_dim == 1
        assert not report.wellposed


class TestSolve:
    def test_constant_solution(self):
        q0 = 1.0 + 2.0j
        s = solve(scalar_problem("0", "0", CAUCHY, q0))
        assert np.abs(s.y.layer(0) - q0).max() == 0.0
        assert np.all(s.y.layer(1) == 0)

    @pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0])
    def test_decaying_exponential(self, alpha):
        s = solve(scalar_problem("1", "0", CAUCHY, 1.0, alpha=alpha))
        exact = sample("exp(-t)", IV, s.y.N, 1)
        assert holder_norm(s.y - exact, (1, alpha)) <= 1e-7

    def test_two_point_hand_integration(self):
        # y' = 1, y(0) + y(1) = 3  =>  y = t + 1
        s = solve(scalar_problem("0", "1", TWO_POINT, 3.0))
        exact = sample("t + 1", IV, s.y.N, 1)
        assert holder_norm(s.y - exact, (1, 0.0)) <= 1e-7

    def test_not_wellposed_raises(self):
        with pytest.raises(NotWellPosedError):
            solve(scalar_problem("0", "0", PERIODIC, 0.0))

    def test_superposition(self):
        pa = scalar_problem("1", "sin(t)", CAUCHY, 0.5)
        pb = scalar_problem("1", "exp(t)", CAUCHY, 0.25j)
        pc = scalar_problem("1", "sin(t) + exp(t)", CAUCHY, 0.5 + 0.25j)
        sa, sb, sc = solve(pa), solve(pb), solve(pc)
        combined = GridFunction(IV, sa.y.values + sb.y.values)
        assert holder_norm(sc.y - combined, (1, 0.0)) <= 1e-8

    def test_rerun_with_other_step_sequence(self):
        prob = scalar_problem("1", "sin(t)", TWO_POINT, 1.0)
        s1 = solve(prob, integ_tol=1e-10)
        s2 = solve(prob, integ_tol=1e-10, max_step=0.013)
        assert holder_norm(s1.y - s2.y, (1, 0.0)) <= 1e-9

    def test_second_order_class(self):
        # n = 1: three derivative layers, boundary operator with two betas
        B = BoundaryOperator([np.eye(1), np.zeros((1, 1))])
        prob = ProblemInstance(IV, 1, 0.5, 1, [["1"]], ["0"], B, [1.0])
        s = solve(prob)
        assert s.y.order == 2
        exact = sample("exp(-t)", IV, s.y.N, 2)
        assert holder_norm(s.y - exact, (2, 0.5)) <= 1e-7


class TestResidual:
    def test_solver_output_self_consistent(self):
        s = solve(scalar_problem("1", "sin(t)", TWO_POINT, 1.0))
        r = residual(scalar_problem("1", "sin(t)", TWO_POINT, 1.0), s.y)
        assert r.eq_residual <= 1e-6
        assert r.bc_residual <= 1e-6

    def test_zero_candidate_unit_data(self):
        prob = scalar_problem("1", "0", CAUCHY, 1.0)
        zero = sample("0", IV, 200, 1)
        r = residual(prob, zero)
        assert r.eq_residual == 0.0
        assert r.bc_residual == 1.0

    def test_perturbation_scales_linearly(self):
        prob = scalar_problem("0", "1", TWO_POINT, 3.0)
        s = solve(prob)
        bump = sample("sin(t)", IV, s.y.N, 1)
        totals = {}
        for delta in (1e-3, 1e-2, 1e-1):
            perturbed = GridFunction(IV, s.y.values + delta * bump.values)
            r = residual(prob, perturbed)
            totals[delta] = r.eq_residual + r.bc_residual
        assert totals[1e-2] / totals[1e-3] == pytest.approx(10.0, rel=0.05)
        assert totals[1e-1] / totals[1e-2] == pytest.approx(10.0, rel=0.05)

    def test_order_requirement(self):
        prob = scalar_problem("1", "0", CAUCHY, 1.0)
        with pytest.raises(OrderError):
            residual(prob, sample("0", IV, 100, 0))


class TestProblemValidation:
    def test_dimension_mismatches(self):
        with pytest.raises(UsageError):
            ProblemInstance(IV, 0, 0.0, 2, [["1"]], ["0", "0"], CAUCHY, [1, 0])
        with pytest.raises(UsageError):
            ProblemInstance(IV, 0, 0.0, 1, [["1"]], ["0"],
                            BoundaryOperator([np.eye(2)]), [1.0])
        with pytest.raises(UsageError):
            ProblemInstance(IV, 1, 0.0, 1, [["1"]], ["0"], CAUCHY, [1.0])

    def test_unbound_parameter_rejected(self):
        with pytest.raises(UsageError):
            ProblemInstance(IV, 0, 0.0, 1, [["1 + eps"]], ["0"], CAUCHY, [1.0])
