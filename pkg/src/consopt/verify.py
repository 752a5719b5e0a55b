"""Programmatic invariant suite behind the ``consopt verify`` subcommand.

Each check is small, deterministic, and returns (name, passed, detail).
The suite is a fast cross-section of the package's mathematical contracts;
the full pytest suite is the authoritative test battery.
"""

from __future__ import annotations

import numpy as np

from . import composite as comp
from . import continuous as cont
from . import discrete as disc
from . import harness
from .objectives import (
    CompositeObjective,
    gen_logistic_instance,
    gen_logsumexp_instance,
    gen_random_quadratic,
    logistic_objective,
    logsumexp_objective,
    minimal_norm_subgradient,
    quadratic_objective,
)

TAN_ROOT = 1.1655611852072114  # first positive root of tan(u) = 2u


def _fd_gradient(fun, x, step=None):
    x = np.asarray(x, dtype=float)
    if step is None:
        step = 1e-6 * (1.0 + np.abs(x))
    g = np.zeros_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = step[i]
        g[i] = (fun(x + e) - fun(x - e)) / (2.0 * step[i])
    return g


def _small_instances(seed=0):
    rng = np.random.default_rng(seed)
    quad = gen_random_quadratic(8, 0.03, 15.0, seed)
    A, y, _ = gen_logistic_instance(6, 20, seed)
    logi = logistic_objective(A, y)
    M, c = gen_logsumexp_instance(6, 20, seed)
    lse = logsumexp_objective(M, c, 1.0)
    return [quad, logi, lse], rng


def check_gradient_consistency():
    objs, rng = _small_instances()
    worst = 0.0
    for obj in objs:
        for _ in range(20):
            x = rng.standard_normal(obj.dim)
            g = obj.gradient(x)
            g_fd = _fd_gradient(obj.value, x)
            err = np.linalg.norm(g - g_fd) / max(1.0, np.linalg.norm(g))
            worst = max(worst, err)
    return worst <= 1e-4, f"worst relative error {worst:.2e}"


def check_subgradient():
    rng = np.random.default_rng(1)
    worst = None
    for _ in range(100):
        n = int(rng.integers(1, 8))
        x = rng.standard_normal(n) * rng.integers(0, 2, n)  # some exact zeros
        g = rng.standard_normal(n)
        gamma = float(rng.uniform(0.1, 2.0))
        smooth = quadratic_objective(np.eye(n), g - np.eye(n) @ x)  # gradient == g at x
        f = CompositeObjective(smooth=smooth, l1_weight=gamma)
        d = minimal_norm_subgradient(f, x)
        # membership
        for i in range(n):
            r = d[i] - g[i]
            if x[i] != 0 and abs(r - gamma * np.sign(x[i])) > 1e-12:
                return False, f"membership violated away from zero (r = {r})"
            if x[i] == 0 and abs(r) > gamma + 1e-12:
                return False, "membership violated at zero"
        # minimality vs a random valid subgradient
        v = g + np.where(x != 0, gamma * np.sign(x), rng.uniform(-gamma, gamma, n))
        if np.linalg.norm(d) > np.linalg.norm(v) + 1e-12:
            worst = (np.linalg.norm(d), np.linalg.norm(v))
    return worst is None, f"minimality violated: {worst}" if worst else "ok"


def check_pl_inequality():
    obj = gen_random_quadratic(10, 0.03, 15.0, 3)
    mu = obj.strong_convexity
    x_min = np.linalg.solve(obj.A, -obj.b)
    f_star = obj.value(x_min)
    rng = np.random.default_rng(3)
    for _ in range(100):
        x = rng.standard_normal(10) * 3
        lhs = obj.value(x) - f_star
        rhs = float(np.linalg.norm(obj.gradient(x)) ** 2) / (2.0 * mu)
        if lhs > rhs * (1.0 + 1e-9):
            return False, f"PL violated: {lhs} > {rhs}"
    return True, "ok"


def check_discrete_conservation():
    obj = quadratic_objective(np.array([[1.0]]), np.zeros(1))
    h = 0.5
    x = np.array([1.0])
    v = np.array([0.0])
    q0 = 0.5 * v[0] ** 2 + 0.5 * x[0] ** 2 - 0.25 * x[0] * v[0]
    worst = 0.0
    for _ in range(10_000):
        x, v = disc.symplectic_euler_step(obj, x, v, h)
        q = 0.5 * v[0] ** 2 + 0.5 * x[0] ** 2 - 0.25 * x[0] * v[0]
        worst = max(worst, abs(q - q0))
    return worst <= 1e-10 * abs(q0), f"worst drift {worst:.2e} of {q0}"


def check_gd_dominance():
    objs, _ = _small_instances(seed=5)
    for obj in objs:
        h = 1.0 / np.sqrt(obj.lipschitz)
        x0 = np.random.default_rng(5).standard_normal(obj.dim)
        trace = disc.rcm_run(obj, x0, h, "grad", 300, keep_iterates=True)
        for k in range(len(trace) - 1):
            xg = trace.xs[k] - h * h * obj.gradient(trace.xs[k])
            bound = obj.value(xg) + 1e-12 * (1.0 + abs(trace.fvals[k + 1]))
            if trace.fvals[k + 1] > bound:
                return False, f"dominance broken at k={k}"
    return True, "ok"


def check_compactness_threshold():
    a = 2.7
    obj = quadratic_objective(np.array([[a]]), np.zeros(1))
    x = np.array([1.0])
    v = np.array([0.0])
    h = 1.9 / np.sqrt(a)
    for _ in range(100_000):
        x, v = disc.symplectic_euler_step(obj, x, v, h)
    if not (np.isfinite(x[0]) and abs(x[0]) < 1e3):
        return False, f"bounded run escaped: {x[0]}"
    x = np.array([1.0])
    v = np.array([0.0])
    h = 2.5 / np.sqrt(a)
    for _ in range(2_000):
        x, v = disc.symplectic_euler_step(obj, x, v, h)
        if abs(x[0]) > 1e12:
            return True, "ok"
    return False, "h = 2.5/sqrt(a) did not diverge"


def check_composite_reduction():
    obj = gen_random_quadratic(6, 0.5, 4.0, 11)
    f0 = CompositeObjective(smooth=obj, l1_weight=0.0)
    x0 = np.random.default_rng(11).standard_normal(6)
    h = 1.0 / np.sqrt(obj.lipschitz)
    a = disc.rcm_run(obj, x0, h, "grad", 200)
    b = comp.rcm_comp_run(f0, x0, h, "grad", 200)
    same = np.array_equal(a.fvals, b.fvals) and np.array_equal(a.residuals, b.residuals)
    return same, "ok" if same else "gamma = 0 traces differ"


def check_integrator_closed_form():
    lams = np.array([1.0, 4.0])
    x0 = np.array([1.0, -0.5])
    obj = quadratic_objective(np.diag(lams), np.zeros(2))
    dt = 1e-3 / np.sqrt(lams.max())
    traj = cont.integrate_conservative(obj, x0, np.zeros(2), dt, 10.0 / np.sqrt(lams.min()), record_every=32)
    worst = 0.0
    for t, x in zip(traj.times, traj.xs):
        x_exact, _, _ = cont.quadratic_closed_form(lams, x0, t)
        worst = max(worst, float(np.max(np.abs(x - x_exact))))
    return worst <= 1e-6, f"worst trajectory error {worst:.2e}"


def check_mmd_1d_root():
    obj = quadratic_objective(np.array([[1.0]]), np.zeros(1))
    ev = cont.mmd_restart_time(obj, np.array([1.0]))
    err = abs(ev.time - TAN_ROOT)
    return err <= 1e-4, f"t_a = {ev.time:.8f} vs {TAN_ROOT:.8f}"


def check_small_time_sandwich():
    obj = gen_random_quadratic(6, 0.03, 15.0, 7)
    x0 = np.random.default_rng(7).standard_normal(6)
    rep = cont.small_time_energy_check(obj, x0)
    return rep["pass"], f"margins within slack: {rep['pass']}"


def check_quadratic_decrease():
    rng = np.random.default_rng(13)
    for _ in range(100):
        n = int(rng.integers(1, 12))
        lams = rng.uniform(0.03, 15.0, n)
        x0 = rng.standard_normal(n)
        rep = cont.quadratic_fixed_interval_decrease(lams, x0)
        if not rep["pass"]:
            return False, f"decrease bound violated: {rep}"
    return True, "ok"


def check_visiting_time():
    t = cont.visiting_time_1d(lambda y: 0.5 * y * y, 1.0, 0.0)
    if abs(t - np.pi / 2) > 1e-6:
        return False, f"quadratic visiting time {t}"
    for x0 in (0.1, 1.0, 10.0):
        t4 = cont.visiting_time_1d(lambda y: 0.25 * y**4, x0, 0.0)
        if t4 < np.pi / (2 * x0):
            return False, f"quartic bound violated at x0={x0}"
    return True, "ok"


def check_kinetic_vs_mmd():
    obj = quadratic_objective(np.diag([1.0, 2.0]), np.zeros(2))
    x0 = np.array([1.0, 1.0])
    events = cont.kinetic_energy_maxima(obj, x0, horizon=20.0, dt=1e-3)
    if not events:
        return False, "no kinetic maxima detected"
    for ev in events:
        g = obj.gradient(ev.x)
        phi = ev.time * (-float(g @ ev.v)) - ev.kinetic_energy
        if not phi < 0:
            return False, f"kinetic max at t={ev.time} is a mean-dissipation max"
    return True, f"{len(events)} maxima, all excluded"


def check_harness_determinism():
    cfg = harness.ExperimentConfig(problem="quadratic", n=20, reps=2, max_iter=50, base_seed=4)
    rows_a = harness.run_experiment(cfg)
    rows_b = harness.run_experiment(cfg)
    return rows_a == rows_b, "ok" if rows_a == rows_b else "rows differ between runs"


ALL_CHECKS = [
    ("gradient-fd-consistency", check_gradient_consistency),
    ("subgradient-minimal-norm", check_subgradient),
    ("pl-inequality", check_pl_inequality),
    ("discrete-conservation", check_discrete_conservation),
    ("gd-dominance", check_gd_dominance),
    ("compactness-threshold", check_compactness_threshold),
    ("composite-reduction", check_composite_reduction),
    ("integrator-vs-closed-form", check_integrator_closed_form),
    ("mmd-1d-root", check_mmd_1d_root),
    ("small-time-sandwich", check_small_time_sandwich),
    ("quadratic-fixed-interval-decrease", check_quadratic_decrease),
    ("visiting-time", check_visiting_time),
    ("kinetic-max-exclusion", check_kinetic_vs_mmd),
    ("harness-determinism", check_harness_determinism),
]


def run_all(verbose=True):
    """Run every invariant check; returns the list of (name, ok, detail)."""
    results = []
    for name, fn in ALL_CHECKS:
        try:
            ok, detail = fn()
        except Exception as err:  # a crash is a failure, not an abort
            ok, detail = False, f"raised {type(err).__name__}: {err}"
        results.append((name, ok, detail))
        if verbose:
            print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return results
