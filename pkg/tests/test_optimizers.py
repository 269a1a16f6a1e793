import math

import numpy as np
import pytest

from qumodeprep.ansatz import AnsatzConfig
from qumodeprep.objective import Objective, ObjectiveConfig
from qumodeprep.optimizers import (
    KINDS,
    OptimizationAborted,
    OptimizerSpec,
    SpsaGains,
    Termination,
    central_fd_gradient,
    minimize,
    spsa_gradient,
    spsa_step,
)
from qumodeprep.optimizers.base import TrackedFunction
from qumodeprep.targets import TargetSpec


def sphere(x):
    return float(np.sum(np.asarray(x) ** 2))


def rosenbrock(x):
    return float(100 * (x[1] - x[0] ** 2) ** 2 + (1 - x[0]) ** 2)


def quadratic(x):
    # shifted, mildly ill-conditioned bowl with minimum at (1, -2, 0.5)
    d = np.asarray(x) - np.array([1.0, -2.0, 0.5])
    return float(d @ np.diag([1.0, 4.0, 0.5]) @ d)


class Counting:
    """Black box that records every call."""

    tracks_purpose = True

    def __init__(self, f):
        self.f = f
        self.calls = []

    def __call__(self, x, purpose="objective"):
        self.calls.append(purpose)
        return self.f(x)


def gaussian_objective(mode="ideal", seed=0, layers=2):
    cfg = ObjectiveConfig(AnsatzConfig(layers, 10), TargetSpec("gaussian").resolve(), mode=mode)
    return Objective(cfg, rng=np.random.default_rng(seed) if mode == "sampled" else None)


class TestExamples:
    def test_nelder_mead_sphere(self):
        res = minimize(sphere, np.ones(3), OptimizerSpec("nelder_mead"))
        assert res.best_objective <= 1e-8

    def test_cg_parabola(self):
        res = minimize(lambda x: float((x[0] - 3) ** 2), [0.0], OptimizerSpec("cg", fd_step=0.03))
        assert abs(res.best_params[0] - 3) <= 1e-3

    def test_powell_rosenbrock(self):
        res = minimize(rosenbrock, [-1.2, 1.0], OptimizerSpec("powell"))
        assert res.best_objective <= 1e-6
        np.testing.assert_allclose(res.best_params, [1, 1], atol=1e-2)

    @pytest.mark.parametrize("kind", ["nelder_mead", "powell", "cobyla", "cg", "lbfgs"])
    def test_quadratic(self, kind):
        res = minimize(quadratic, np.zeros(3), OptimizerSpec(kind, fd_step=1e-3))
        assert res.best_objective <= 1e-5
        np.testing.assert_allclose(res.best_params, [1, -2, 0.5], atol=5e-3)

    def test_lbfgs_rosenbrock(self):
        res = minimize(rosenbrock, [-1.2, 1.0], OptimizerSpec("lbfgs", fd_step=1e-5))
        assert res.best_objective <= 1e-6

    def test_aliases(self):
        assert OptimizerSpec("Nelder-Mead").kind == "nelder_mead"
        assert OptimizerSpec("L-BFGS-B").kind == "lbfgs"
        with pytest.raises(ValueError):
            OptimizerSpec("slsqp")

    def test_bad_option(self):
        with pytest.raises(ValueError):
            OptimizerSpec("spsa", options={"momentum": 0.9})


@pytest.mark.parametrize("kind", ["powell", "cg", "lbfgs"])
def test_against_scipy_on_quadratic(kind):
    scipy_optimize = pytest.importorskip("scipy.optimize")
    ref = scipy_optimize.minimize(quadratic, np.zeros(3), method={"powell": "Powell", "cg": "CG", "lbfgs": "L-BFGS-B"}[kind])
    ours = minimize(quadratic, np.zeros(3), OptimizerSpec(kind, fd_step=1e-3))
    np.testing.assert_allclose(ours.best_params, ref.x, atol=5e-3)


class TestFiniteDifference:
    def test_quadratic_exact(self):
        assert central_fd_gradient(lambda x: float(x[0] ** 2), np.array([2.0]), 0.03)[0] == pytest.approx(4.0, abs=1e-12)

    def test_linear_exact(self):
        g = central_fd_gradient(lambda x: float(x[0] + 2 * x[1]), np.array([0.3, -7.0]), 0.08)
        np.testing.assert_allclose(g, [1, 2], atol=1e-12)

    def test_probe_accounting(self):
        tf = TrackedFunction(Counting(sphere))
        central_fd_gradient(tf, np.ones(4), 0.03)
        assert (tf.nfev, tf.nprobe) == (0, 8)
        assert tf.f.calls == ["gradient_probe"] * 8

    def test_objective_gradient_accuracy(self, rng):
        f = gaussian_objective()
        for _ in range(10):
            x = rng.uniform(-1, 1, 10)
            coarse = central_fd_gradient(f, x, 0.03)
            fine = central_fd_gradient(f, x, 1e-6)
            assert np.linalg.norm(coarse - fine) <= 1e-2 * np.linalg.norm(fine)


class TestSpsa:
    def test_gains_decrease(self):
        g = SpsaGains(a=1.0, c=0.1, A=100)
        a = [g.a_k(k) for k in range(50)]
        c = [g.c_k(k) for k in range(50)]
        assert all(x > y > 0 for x, y in zip(a, a[1:]))
        assert all(x > y > 0 for x, y in zip(c, c[1:]))

    def test_unbiased_on_linear(self, rng):
        grad = np.array([1.0, -2.0, 0.5, 3.0])
        f = lambda x: float(grad @ x)  # noqa: E731
        est = np.mean([spsa_gradient(f, np.zeros(4), 0.1, rng)[0] for _ in range(4000)], axis=0)
        np.testing.assert_allclose(est, grad, atol=0.25)

    def test_linear_single_estimate_component(self, rng):
        # each component equals g_i plus cross terms with zero mean; on a 1-d linear f it is exact
        g = spsa_gradient(lambda x: float(3 * x[0]), np.zeros(1), 0.1, rng)[0]
        assert g[0] == pytest.approx(3.0)

    def test_two_evals_per_step(self, rng):
        tf = TrackedFunction(Counting(sphere))
        gains = SpsaGains(a=1.0, c=0.1, A=100)
        x = np.ones(50)
        for k in range(100):
            x = spsa_step(tf, x, k, gains, rng)
        assert tf.total == 200
        assert len(tf.f.calls) == 200

    def test_minimize_accounting(self, rng):
        f = Counting(sphere)
        res = minimize(f, np.ones(5), OptimizerSpec("spsa", max_iterations=300), rng=rng)
        assert res.iterations == res.nfev == 300
        assert res.total_evals == 600 == len(f.calls)
        assert res.termination_reason == Termination.ITERATION_CAP

    def test_calibrated_first_step(self, rng):
        spec = OptimizerSpec("spsa", max_iterations=1, options={"a": None, "first_step": 0.1})
        x0 = np.array([2.0])
        res = minimize(lambda x: float(3 * x[0]), x0, spec, rng=rng)
        # in one dimension the estimate is exact, so the first move equals first_step
        np.testing.assert_allclose(res.best_params, x0 - 0.1, rtol=1e-12)
        assert res.spec["options"]["a"] > 0

    def test_needs_rng(self):
        with pytest.raises(ValueError):
            minimize(sphere, np.ones(2), OptimizerSpec("spsa"))

    def test_sphere_median(self):
        x0 = np.ones(5)
        finals = [minimize(sphere, x0, OptimizerSpec("spsa"), rng=np.random.default_rng(s)).best_params
                  for s in range(30)]
        assert np.median([sphere(x) for x in finals]) <= 1e-2 * sphere(x0)


class TestAccounting:
    @pytest.mark.parametrize("kind", ["cg", "lbfgs"])
    def test_gradient_identity(self, kind):
        f = gaussian_objective()
        res = minimize(f, np.full(10, 0.3), OptimizerSpec(kind, fd_step=0.03))
        assert res.grad_probe_evals == 2 * 10 * res.gradient_evals
        assert res.total_evals == res.nfev + res.grad_probe_evals == len(f.log)
        assert f.counts()["gradient_probe"] == res.grad_probe_evals

    @pytest.mark.parametrize("kind", ["nelder_mead", "powell", "cobyla"])
    def test_derivative_free_no_probes(self, kind):
        f = gaussian_objective()
        res = minimize(f, np.full(10, 0.3), OptimizerSpec(kind))
        assert res.grad_probe_evals == 0
        assert res.total_evals == res.nfev == len(f.log)
        assert res.best_objective == min(r.objective for r in f.log)

    @pytest.mark.parametrize("kind", [k for k in KINDS if k != "spsa"])
    def test_descent(self, kind, rng):
        for _ in range(3):
            f = gaussian_objective("sampled", seed=int(rng.integers(1 << 30)))
            x0 = rng.uniform(-1, 1, 10)
            f0 = f(x0)
            res = minimize(f, x0, OptimizerSpec(kind, max_iterations=30))
            assert res.best_objective <= f0

    @pytest.mark.parametrize("kind", KINDS)
    def test_determinism(self, kind):
        def run():
            f = gaussian_objective("sampled", seed=7)
            return minimize(f, np.full(10, 0.2), OptimizerSpec(kind, max_iterations=40),
                            rng=np.random.default_rng(11))
        a, b = run(), run()
        assert np.array_equal(a.best_params, b.best_params)
        assert (a.best_objective, a.total_evals, a.termination_reason) == (b.best_objective, b.total_evals, b.termination_reason)

    def test_cobyla_iteration_cap(self):
        f = gaussian_objective("sampled", seed=3)
        res = minimize(f, np.full(10, 0.5), OptimizerSpec("cobyla", max_iterations=60))
        assert res.nfev == 60
        assert res.termination_reason == Termination.ITERATION_CAP

    def test_cobyla_default_cap(self):
        assert OptimizerSpec("cobyla").resolved(10).max_iterations == 1000
        assert OptimizerSpec("spsa").resolved(10).max_iterations == 1000

    def test_nan_aborts(self):
        with pytest.raises(OptimizationAborted):
            minimize(lambda x: float("nan"), np.zeros(2), OptimizerSpec("nelder_mead"))

    def test_infinite_x0(self):
        with pytest.raises(ValueError):
            minimize(sphere, [np.inf, 0.0], OptimizerSpec("powell"))

    def test_callback(self):
        seen = []
        minimize(sphere, np.ones(2), OptimizerSpec("cg", fd_step=1e-3), callback=lambda k, x, fx: seen.append(fx))
        assert seen and all(a >= b for a, b in zip(seen, seen[1:]))

    def test_spec_echo(self):
        res = minimize(sphere, np.ones(2), OptimizerSpec("lbfgs", fd_step=1e-3))
        assert res.spec["options"]["memory"] == 10
        assert res.spec["fd_step"] == 1e-3
