import numpy as np
import pytest

from consopt.discrete import (
    DivergenceError,
    gradient_descent_run,
    nag_c_restart_run,
    nag_c_run,
    nag_sc_run,
    rcm_run,
    rest_restart_step,
    should_restart,
    symplectic_euler_step,
)
from consopt.objectives import (
    gen_logistic_instance,
    gen_logsumexp_instance,
    gen_random_quadratic,
    logistic_objective,
    logsumexp_objective,
    quadratic_objective,
)


def quad_1d(a=1.0, b=0.0):
    return quadratic_objective(np.array([[a]]), np.array([b]))


class TestSymplecticStep:
    def test_one_step_arithmetic(self):
        obj = quad_1d()
        x, v = symplectic_euler_step(obj, np.array([1.0]), np.array([0.0]), 1.0)
        assert v[0] == pytest.approx(-1.0)
        assert x[0] == pytest.approx(0.0)

    def test_rest_step_is_squared_gradient_step(self):
        obj = gen_random_quadratic(5, 0.5, 3.0, 0)
        x0 = np.random.default_rng(0).standard_normal(5)
        h = 0.3
        x1, _ = symplectic_euler_step(obj, x0, np.zeros(5), h)
        assert np.allclose(x1, x0 - h * h * obj.gradient(x0))

    def test_discrete_conservation_minus_sign(self):
        # Q(x, v) = v^2/2 + a x^2/2 - a h x v / 2 is exactly invariant;
        # the plus-sign variant is not (it drifts within a few steps).
        rng = np.random.default_rng(3)
        for _ in range(5):
            a, h = rng.uniform(0.2, 3.0), rng.uniform(0.05, 0.5)
            obj = quad_1d(a)
            x, v = rng.standard_normal(2)
            x, v = np.array([x]), np.array([v])
            q_minus = 0.5 * v[0] ** 2 + 0.5 * a * x[0] ** 2 - 0.5 * a * h * x[0] * v[0]
            q_plus = 0.5 * v[0] ** 2 + 0.5 * a * x[0] ** 2 + 0.5 * a * h * x[0] * v[0]
            drift_plus = 0.0
            for _ in range(50):
                x, v = symplectic_euler_step(obj, x, v, h)
                q = 0.5 * v[0] ** 2 + 0.5 * a * x[0] ** 2 - 0.5 * a * h * x[0] * v[0]
                assert q == pytest.approx(q_minus, rel=1e-12, abs=1e-12)
                qp = 0.5 * v[0] ** 2 + 0.5 * a * x[0] ** 2 + 0.5 * a * h * x[0] * v[0]
                drift_plus = max(drift_plus, abs(qp - q_plus))
            assert drift_plus > 1e-3

    def test_long_run_conservation(self):
        obj = quad_1d(1.0)
        h = 0.5
        x, v = np.array([1.0]), np.array([0.0])
        q0 = 0.5 * v[0] ** 2 + 0.5 * x[0] ** 2 - 0.25 * x[0] * v[0]
        for _ in range(10_000):
            x, v = symplectic_euler_step(obj, x, v, h)
            q = 0.5 * v[0] ** 2 + 0.5 * x[0] ** 2 - 0.25 * x[0] * v[0]
            assert abs(q - q0) <= 1e-10 * abs(q0)

    def test_compactness_threshold(self):
        a = 2.7
        obj = quad_1d(a)
        x, v = np.array([1.0]), np.array([0.0])
        h = 1.99 / np.sqrt(a)
        for _ in range(100_000):
            x, v = symplectic_euler_step(obj, x, v, h)
        assert np.isfinite(x[0]) and abs(x[0]) < 1e3

        x, v = np.array([1.0]), np.array([0.0])
        h = 2.5 / np.sqrt(a)
        for _ in range(2_000):
            x, v = symplectic_euler_step(obj, x, v, h)
            if abs(x[0]) > 1e12:
                break
        assert abs(x[0]) > 1e12

    def test_one_step_contraction(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            a = rng.uniform(0.2, 8.0)
            h = rng.uniform(0.05, 0.999) / np.sqrt(a)
            x0 = rng.uniform(0.5, 3.0) * rng.choice([-1.0, 1.0])
            x1, _ = symplectic_euler_step(quad_1d(a), np.array([x0]), np.array([0.0]), h)
            assert abs(x1[0]) < abs(x0)
            assert x0 * x1[0] >= 0


class TestRestRestartStep:
    def test_lands_at_minimizer(self):
        x, v = rest_restart_step(quad_1d(), np.array([2.0]), 1.0)
        assert x[0] == pytest.approx(0.0)
        assert v[0] == pytest.approx(-2.0)

    def test_stationary_fixed_point(self):
        obj = quadratic_objective(np.diag([2.0, 5.0]), np.array([-2.0, -5.0]))
        x, v = rest_restart_step(obj, np.ones(2), 0.4)
        assert np.array_equal(x, np.ones(2))
        assert np.all(v == 0.0)

    def test_equals_symplectic_from_rest(self):
        obj = gen_random_quadratic(4, 0.5, 2.0, 5)
        x0 = np.random.default_rng(5).standard_normal(4)
        a = rest_restart_step(obj, x0, 0.7)
        b = symplectic_euler_step(obj, x0, np.zeros(4), 0.7)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


class TestShouldRestart:
    def test_grad_zero_velocity_never_fires(self):
        v = np.zeros(3)
        assert not should_restart("grad", v, v, np.ones(3), 5, 0)

    def test_kin_tie_does_not_fire(self):
        v = np.array([1.0])
        assert not should_restart("kin", v, v.copy(), None, 5, 0)

    def test_mmd_r_arithmetic(self):
        # |v|^2 = 4 over age 2 vs |v'|^2 = 5 over age 3: 5/3 < 2 fires
        v = np.array([2.0])
        v_new = np.array([np.sqrt(5.0)])
        assert should_restart("mmd-r", v, v_new, None, 2, 0)

    def test_mmd_dr_arithmetic(self):
        v_new = np.array([1.0, 0.0])
        grad = np.array([1.0, 0.0])
        assert should_restart("mmd-dr", np.zeros(2), v_new, grad, 0, 0)

    def test_mmd_r_guard(self):
        with pytest.raises(AssertionError):
            should_restart("mmd-r", np.ones(1), np.ones(1), None, 3, 3)

    def test_unknown_criterion(self):
        with pytest.raises(ValueError):
            should_restart("bogus", np.ones(1), np.ones(1), None, 1, 0)


class TestRcmRun:
    def test_exact_landing_when_ah2_is_one(self):
        obj = quad_1d(4.0)
        trace = rcm_run(obj, np.array([1.0]), 0.5, "grad", 20)  # a h^2 = 1
        assert trace.fvals[1] == pytest.approx(0.0, abs=1e-30)
        assert np.all(trace.fvals[1:] == 0.0)
        assert np.all(trace.residuals[1:] == 0.0)

    @pytest.mark.parametrize("criterion", ["grad", "kin", "mmd-r", "mmd-dr"])
    def test_row_count_and_determinism(self, criterion):
        obj = gen_random_quadratic(10, 0.05, 5.0, 1)
        x0 = np.random.default_rng(1).standard_normal(10)
        h = 1.0 / np.sqrt(obj.lipschitz)
        a = rcm_run(obj, x0, h, criterion, 137)
        b = rcm_run(obj, x0, h, criterion, 137)
        assert len(a) == 138
        assert np.array_equal(a.fvals, b.fvals)
        assert np.array_equal(a.restarts, b.restarts)

    def test_gd_dominance_all_families(self):
        A, y, _ = gen_logistic_instance(20, 60, 4)
        M, c = gen_logsumexp_instance(20, 60, 4)
        objs = [
            gen_random_quadratic(20, 0.03, 15.0, 4),
            logistic_objective(A, y),
            logsumexp_objective(M, c, 1.0),
        ]
        for obj in objs:
            h = 1.0 / np.sqrt(obj.lipschitz)
            x0 = np.random.default_rng(4).standard_normal(20)
            trace = rcm_run(obj, x0, h, "grad", 400, keep_iterates=True)
            for k in range(len(trace) - 1):
                xg = trace.xs[k] - h * h * obj.gradient(trace.xs[k])
                assert trace.fvals[k + 1] <= obj.value(xg) + 1e-12 * (1 + abs(trace.fvals[k + 1]))

    def test_converges_on_200dim_quadratic(self):
        obj = gen_random_quadratic(200, 0.03, 15.0, 6)
        x0 = np.random.default_rng(6).standard_normal(200)
        f_star = obj.value(np.linalg.solve(obj.A, -obj.b))
        trace = rcm_run(obj, x0, 1.0 / np.sqrt(obj.lipschitz), "grad", 2000)
        gaps = trace.fvals - f_star
        assert gaps[-1] <= 1e-8 * gaps[0]

    def test_restart_bookkeeping(self):
        obj = gen_random_quadratic(12, 0.05, 8.0, 8)
        x0 = np.random.default_rng(8).standard_normal(12)
        trace = rcm_run(obj, x0, 1.0 / np.sqrt(obj.lipschitz), "mmd-r", 300)
        assert trace.restarts.sum() > 0
        origin = trace.restart_origin
        for k in np.flatnonzero(trace.restarts):
            assert origin[k] == k - 1  # l points at the pre-restart index
        assert origin[-1] == trace.final_state.last_restart
        assert trace.final_state.last_restart <= trace.final_state.iter

    def test_conservation_along_restart_free_segments(self):
        a, h = 0.8, 0.9  # a h^2 < 1
        obj = quad_1d(a)
        trace = rcm_run(obj, np.array([1.3]), h, "kin", 2000, keep_iterates=True)
        xs = trace.xs[:, 0]
        vs = trace.vs[:, 0]
        q = lambda x, v: 0.5 * v**2 + 0.5 * a * x**2 - 0.5 * a * h * x * v
        segment_start = q(xs[0], vs[0])
        for k in range(1, len(xs)):
            val = q(xs[k], vs[k])
            if trace.restarts[k]:
                segment_start = val
            else:
                assert val == pytest.approx(segment_start, rel=1e-10, abs=1e-12)

    def test_warns_outside_step_range(self):
        obj = quad_1d(1.0)
        with pytest.warns(UserWarning, match="outside the convergence range"):
            rcm_run(obj, np.array([1.0]), 1.5, "grad", 5)

    def test_restart_grad_at_variants_differ(self):
        obj = gen_random_quadratic(15, 0.05, 9.0, 10)
        x0 = np.random.default_rng(10).standard_normal(15)
        h = 1.0 / np.sqrt(obj.lipschitz)
        a = rcm_run(obj, x0, h, "grad", 200, restart_grad_at="new")
        b = rcm_run(obj, x0, h, "grad", 200, restart_grad_at="old")
        assert a.restarts.sum() > 0
        assert not np.array_equal(a.fvals, b.fvals)


class TestGradientDescent:
    def test_one_step(self):
        trace = gradient_descent_run(quad_1d(), np.array([1.0]), 1.0, 1)
        assert trace.fvals[-1] == pytest.approx(0.0, abs=1e-30)

    def test_descent_inequality(self):
        obj = gen_random_quadratic(15, 0.1, 6.0, 2)
        L = obj.lipschitz
        s = 0.7 / L
        omega = s * (1 - L * s / 2)
        x0 = np.random.default_rng(2).standard_normal(15)
        trace = gradient_descent_run(obj, x0, s, 100)
        for k in range(100):
            drop = trace.fvals[k + 1] - trace.fvals[k]
            assert drop <= -omega * trace.residuals[k] ** 2 * (1 - 1e-9) + 1e-12

    def test_contraction_factor(self):
        obj = gen_random_quadratic(15, 0.1, 6.0, 3)
        mu, L = obj.strong_convexity, obj.lipschitz
        f_star = obj.value(np.linalg.solve(obj.A, -obj.b))
        x0 = np.random.default_rng(3).standard_normal(15)
        trace = gradient_descent_run(obj, x0, 1.0 / L, 50)
        gaps = trace.fvals - f_star
        for k in range(50):
            assert gaps[k + 1] <= gaps[k] * (1 - mu / L) * (1 + 1e-9) + 1e-15

    def test_divergence_aborts_with_partial_trace(self):
        obj = quad_1d(1.0)
        with pytest.raises(DivergenceError) as info:
            gradient_descent_run(obj, np.array([1.0]), 1e3, 10_000)
        assert info.value.partial_trace is not None
        assert len(info.value.partial_trace) >= 1


class TestNagC:
    def test_first_step_is_pure_gradient(self):
        obj = gen_random_quadratic(6, 0.2, 3.0, 7)
        x0 = np.random.default_rng(7).standard_normal(6)
        s = 1.0 / obj.lipschitz
        trace = nag_c_run(obj, x0, s, 1, keep_iterates=True)
        assert np.allclose(trace.xs[1], x0 - s * obj.gradient(x0))

    def test_momentum_coefficients(self):
        obj = gen_random_quadratic(6, 0.2, 3.0, 7)
        x0 = np.random.default_rng(7).standard_normal(6)
        s = 1.0 / obj.lipschitz
        trace = nag_c_run(obj, x0, s, 4, keep_iterates=True)
        # replay the recurrence with explicit k/(k+3) coefficients
        x, y = x0.copy(), x0.copy()
        for k in range(4):
            y_new = x - s * obj.gradient(x)
            x = y_new + (k / (k + 3.0)) * (y_new - y)
            y = y_new
            assert np.array_equal(trace.xs[k + 1], x)
        assert 1 / (1 + 3) == 0.25 and 3 / (3 + 3) == 0.5

    def test_unit_quadratic_lands_and_stays(self):
        trace = nag_c_run(quad_1d(1.0), np.array([1.0]), 1.0, 10)
        assert np.all(trace.fvals[1:] == 0.0)


class TestNagSC:
    def test_mu_s_one_reduces_to_gd(self):
        obj = gen_random_quadratic(8, 0.2, 3.0, 9)
        x0 = np.random.default_rng(9).standard_normal(8)
        s = 1.0 / obj.lipschitz
        a = nag_sc_run(obj, x0, s, 1.0 / s, 30)
        b = gradient_descent_run(obj, x0, s, 30)
        assert np.allclose(a.fvals, b.fvals, rtol=1e-12)

    def test_coefficient_value(self):
        obj = quad_1d(1.0)
        trace = nag_sc_run(obj, np.array([1.0]), 0.25, 1.0, 2, keep_iterates=True)
        # beta = (1 - 0.5)/(1 + 0.5) = 1/3; replay one momentum step
        s, beta = 0.25, 1.0 / 3.0
        y1 = 1.0 - s * 1.0
        x1 = y1  # first step has y0 = x0 so the momentum term is (y1 - x0) scaled
        x1 = y1 + beta * (y1 - 1.0)
        assert trace.xs[1][0] == pytest.approx(x1)

    def test_exact_and_underestimated_mu_both_converge(self):
        obj = gen_random_quadratic(40, 0.03, 15.0, 13)
        x0 = np.random.default_rng(13).standard_normal(40)
        s = 1.0 / obj.lipschitz
        mu = obj.strong_convexity
        f_star = obj.value(np.linalg.solve(obj.A, -obj.b))
        for m in (mu, mu / 3.0):
            trace = nag_sc_run(obj, x0, s, m, 800)
            assert trace.fvals[-1] - f_star <= 1e-8 * (trace.fvals[0] - f_star)

    def test_rejects_mu_s_above_one(self):
        with pytest.raises(ValueError, match="momentum coefficient"):
            nag_sc_run(quad_1d(1.0), np.array([1.0]), 1.0, 2.0, 5)


class TestNagCRestart:
    def test_zero_product_does_not_restart(self):
        # starting at the minimizer every y-difference is zero: never restarts
        obj = quadratic_objective(np.diag([2.0, 5.0]), np.array([-2.0, -5.0]))
        trace = nag_c_restart_run(obj, np.ones(2), 0.1, 20)
        assert trace.restarts.sum() == 0

    def test_dominance_over_gradient_step(self):
        obj = gen_random_quadratic(25, 0.03, 15.0, 15)
        x0 = np.random.default_rng(15).standard_normal(25)
        s = 1.0 / obj.lipschitz
        trace = nag_c_restart_run(obj, x0, s, 300, keep_iterates=True)
        for k in range(len(trace) - 1):
            y_next = trace.xs[k] - s * obj.gradient(trace.xs[k])
            assert trace.fvals[k + 1] <= obj.value(y_next) + 1e-12 * (1 + abs(trace.fvals[k + 1]))

    def test_monotone_while_plain_nag_oscillates(self):
        obj = gen_random_quadratic(200, 0.03, 15.0, 16)
        x0 = np.random.default_rng(16).standard_normal(200)
        s = 1.0 / obj.lipschitz
        restarted = nag_c_restart_run(obj, x0, s, 800)
        plain = nag_c_run(obj, x0, s, 800)
        diffs_restarted = np.diff(restarted.fvals)
        diffs_plain = np.diff(plain.fvals)
        assert np.all(diffs_restarted <= 1e-10 * (1 + np.abs(restarted.fvals[:-1])))
        assert np.any(diffs_plain > 0)
        assert restarted.fvals[-1] < plain.fvals[-1]
