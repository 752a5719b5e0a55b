"""High-accuracy simulation of the conservative flow x'' = -grad f(x).

The reference integrator is fixed-step Stormer-Verlet (velocity Verlet),
which is second-order and symplectic, so the mechanical energy
H = |v|^2/2 + f(x) drifts by O(dt^2) over a run and dt acts as a pure
accuracy knob.  Restarts are located by sign-bracketing a scalar event
function at the integration nodes and refining the bracket by bisection on
cubic Hermite interpolants of (x, v), with the gradient always evaluated
exactly at the interpolated point.

Two restart rules are provided: the mean-dissipation rule, which stops at
the first local maximum of E_K(t)/t (detected as the first sign change of
t*dE_K/dt - E_K), and the kinetic-energy rule, which stops at the first
local maximum of E_K(t) and may legitimately never fire in more than one
dimension.  Theoretical bounds are evaluated as structured reports of the
form {bound_name, lhs, rhs, slack, pass}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
from scipy.integrate import quad

from .objectives import SmoothObjective

Array = np.ndarray

# Bisection stops when the event bracket is this narrow relative to the event
# time.  Tight enough that detected kinetic-energy maxima in one dimension
# pin the local minimizer to well below 1e-6 in gradient norm.
EVENT_TIME_RELTOL = 1e-12

__all__ = [
    "RestartEvent",
    "ContinuousTrajectory",
    "PiecewiseResult",
    "default_time_step",
    "restart_time_upper_bound",
    "integrate_conservative",
    "quadratic_closed_form",
    "mean_dissipation",
    "initial_dissipation_slope",
    "mmd_restart_time",
    "kinetic_max_restart_time",
    "kinetic_energy_maxima",
    "run_piecewise_conservative",
    "visiting_time_1d",
    "quadratic_fixed_interval_decrease",
    "small_time_energy_check",
    "finite_restart_cap",
    "bound_report",
]


@dataclass
class RestartEvent:
    """A detected restart instant on one conservative segment.

    ``time`` is elapsed since the segment start (positive), ``time_abs`` the
    absolute trajectory time.  ``kinetic_energy`` is E_K just before the
    velocity reset; by energy conservation it equals the objective decrease
    over the segment up to integrator tolerance.  ``x`` and ``v`` hold the
    interpolated state at the event.
    """

    time: float
    time_abs: float
    kinetic_energy: float
    f_value: float
    arc_length: float
    x: Array
    v: Array


@dataclass
class ContinuousTrajectory:
    """Sampled conservative flow with its restart events.

    Sample times are strictly increasing; the velocity is zero at t = 0 and
    at every sample that starts a new segment.
    """

    times: Array
    xs: Array
    vs: Array
    events: List[RestartEvent] = field(default_factory=list)
    energy_drift: Optional[float] = None

    def __post_init__(self):
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("sample times must be strictly increasing")


@dataclass
class PiecewiseResult:
    """Outcome of a piecewise conservative run: trajectory, per-segment data,
    and the theoretical bound checks."""

    trajectory: ContinuousTrajectory
    segments: List[dict]
    reports: List[dict]


def bound_report(name: str, lhs: float, rhs: float, slack: float = 0.0) -> dict:
    return {
        "bound_name": name,
        "lhs": float(lhs),
        "rhs": float(rhs),
        "slack": float(slack),
        "pass": bool(lhs <= rhs + slack),
    }


def default_time_step(obj: SmoothObjective) -> float:
    return 1e-3 / np.sqrt(obj.lipschitz)


def restart_time_upper_bound(mu: float, L: float) -> float:
    """Uniform restart-time bound 32 L / (mu sqrt(mu)) for the
    mean-dissipation rule on a strongly convex function."""
    return 32.0 * L / (mu * np.sqrt(mu))


# -- cubic Hermite interpolation ----------------------------------------------


def _hermite(s: float, h: float, y0, d0, y1, d1):
    """Cubic Hermite value at fraction s of an interval of length h."""
    s2 = s * s
    s3 = s2 * s
    return (
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
        + (s3 - 2.0 * s2 + s) * h * d0
        + (-2.0 * s3 + 3.0 * s2) * y1
        + (s3 - s2) * h * d1
    )


def _refine_event(grad, make_test, is_after, node_a, node_b, reltol):
    """Bisect an event bracket on Hermite interpolants of (x, v).

    ``node_a``/``node_b`` are (t, x, v, a) at the bracketing integration
    nodes, with ``is_after`` false at a and true at b.  The scalar test is
    re-evaluated from the interpolated state with the exact gradient.
    Returns (t, x, v, g) at the located event.
    """
    ta, xa, va, aa = node_a
    tb, xb, vb, ab = node_b
    lo, hi = ta, tb
    h = tb - ta
    t = 0.5 * (lo + hi)
    x = v = g = None
    while hi - lo > reltol * max(hi, 1e-300):
        t = 0.5 * (lo + hi)
        s = (t - ta) / h
        x = _hermite(s, h, xa, va, xb, vb)
        v = _hermite(s, h, va, aa, vb, ab)
        g = grad(x)
        if is_after(make_test(t, x, v, g)):
            hi = t
        else:
            lo = t
    if x is None:  # bracket already narrower than the tolerance
        t = 0.5 * (lo + hi)
        s = (t - ta) / h
        x = _hermite(s, h, xa, va, xb, vb)
        v = _hermite(s, h, va, aa, vb, ab)
        g = grad(x)
    return t, x, v, g


# -- integration ---------------------------------------------------------------


def integrate_conservative(
    obj: SmoothObjective, x0, v0, dt: float, T: float, record_every: int = 1
) -> ContinuousTrajectory:
    """Fixed-step Stormer-Verlet integration of x'' = -grad f(x) over [0, T].

    Samples every ``record_every``-th node (always including the endpoints)
    and reports the worst mechanical-energy drift max_t |H(t) - H(0)|, which
    shrinks like dt^2.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if T <= dt:
        raise ValueError("T must exceed dt")
    x = np.array(x0, dtype=float)
    v = np.array(v0, dtype=float)
    grad = obj.gradient
    g = grad(x)
    a = -g
    h0 = 0.5 * float(v @ v) + obj.value(x)
    drift = 0.0
    n_steps = int(np.ceil(T / dt))
    times, xs, vs = [0.0], [x.copy()], [v.copy()]
    for i in range(1, n_steps + 1):
        v_half = v + 0.5 * dt * a
        x = x + dt * v_half
        g = grad(x)
        a = -g
        v = v_half + 0.5 * dt * a
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(v)):
            raise RuntimeError(f"non-finite state at t = {i * dt:g}")
        drift = max(drift, abs(0.5 * float(v @ v) + obj.value(x) - h0))
        if i % record_every == 0 or i == n_steps:
            times.append(i * dt)
            xs.append(x)
            vs.append(v)
    return ContinuousTrajectory(
        times=np.asarray(times),
        xs=np.asarray(xs),
        vs=np.asarray(vs),
        energy_drift=drift,
    )


def quadratic_closed_form(lams, x0, t: float):
    """Exact conservative flow of f(x) = sum_i lam_i x_i^2 / 2 from rest.

    In the eigenbasis the coordinates decouple into independent oscillators:
    x_i(t) = x0_i cos(sqrt(lam_i) t), v_i(t) = -x0_i sqrt(lam_i) sin(...),
    and E_K(t) = sum_i lam_i x0_i^2 sin^2(sqrt(lam_i) t) / 2.
    Returns (x, v, E_K).
    """
    lams = np.asarray(lams, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    if np.any(lams <= 0):
        raise ValueError("all lam_i must be positive")
    w = np.sqrt(lams)
    x = x0 * np.cos(w * t)
    v = -x0 * w * np.sin(w * t)
    e_k = 0.5 * float(np.sum(lams * x0**2 * np.sin(w * t) ** 2))
    return x, v, e_k


def mean_dissipation(kinetic_energy, t):
    """r(t) = E_K(t)/t for t > 0 with the continuous extension r(0) = 0."""
    t_arr = np.asarray(t, dtype=float)
    e_arr = np.asarray(kinetic_energy, dtype=float)
    pos = t_arr > 0
    r = np.where(pos, e_arr / np.where(pos, t_arr, 1.0), 0.0)
    return float(r) if r.ndim == 0 else r


def initial_dissipation_slope(obj: SmoothObjective, x0) -> float:
    """dr/dt at t = 0, which equals |grad f(x0)|^2 / 2."""
    g = obj.gradient(np.asarray(x0, dtype=float))
    return 0.5 * float(g @ g)


def _mmd_test(t, x, v, g):
    # t * dE_K/dt - E_K with dE_K/dt = -grad f . v; negative past the first
    # local maximum of the mean dissipation
    return -t * float(g @ v) - 0.5 * float(v @ v)


def _kin_test(t, x, v, g):
    # dE_K/dt changes sign where grad f . v does
    return float(g @ v)


def _scan_from_rest(obj, x0, dt, cap, mode, reltol, record_stride=None):
    """Integrate from rest scanning for the restart event of ``mode``.

    Returns (event_state or None, n_steps_taken, arc_length, samples) where
    event_state is (t, x, v, g) refined by bisection, arc_length is the curve
    length up to the event (or the cap), and samples is a list of (t, x, v)
    at every ``record_stride``-th node starting from node 0 (empty when
    ``record_stride`` is None).
    """
    grad = obj.gradient
    x = np.array(x0, dtype=float)
    v = np.zeros_like(x)
    g = grad(x)
    a = -g
    t = 0.0
    arc = 0.0
    speed = 0.0
    armed = False  # kinetic mode: becomes true once dE_K/dt > 0 was seen
    max_steps = int(np.ceil(cap / dt))
    prev = (t, x, v, a)
    prev_speed = speed
    samples = []
    if record_stride:
        samples.append((0.0, x.copy(), v.copy()))
    if mode == "mmd":
        test, is_after = _mmd_test, lambda val: val < 0.0
    else:
        test, is_after = _kin_test, lambda val: val >= 0.0
    for i in range(1, max_steps + 1):
        v_half = v + 0.5 * dt * a
        x = x + dt * v_half
        g = grad(x)
        a = -g
        v = v_half + 0.5 * dt * a
        t = i * dt
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(v)):
            raise RuntimeError(f"non-finite state at t = {t:g}")
        speed = float(np.linalg.norm(v))
        q = float(g @ v)  # -dE_K/dt
        if mode == "mmd":
            fire = (-t * q - 0.5 * speed * speed) < 0.0
        else:
            fire = armed and q >= 0.0
            armed = armed or q < 0.0
        if fire:
            t_ev, x_ev, v_ev, g_ev = _refine_event(
                grad, test, is_after, prev, (t, x, v, a), reltol
            )
            sp_ev = float(np.linalg.norm(v_ev))
            arc += 0.5 * (t_ev - prev[0]) * (prev_speed + sp_ev)
            return (t_ev, x_ev, v_ev, g_ev), i, arc, samples
        arc += 0.5 * dt * (prev_speed + speed)
        if record_stride and i % record_stride == 0:
            samples.append((t, x, v))
        prev = (t, x, v, a)
        prev_speed = speed
    return None, max_steps, arc, samples


def _event_from_state(obj, state, arc, t_offset=0.0) -> RestartEvent:
    t_ev, x_ev, v_ev, _ = state
    return RestartEvent(
        time=t_ev,
        time_abs=t_offset + t_ev,
        kinetic_energy=0.5 * float(v_ev @ v_ev),
        f_value=obj.value(x_ev),
        arc_length=arc,
        x=x_ev,
        v=v_ev,
    )


def _mmd_cap(obj, x0, dt, cap, f_star):
    if cap is not None:
        return cap
    mu = obj.strong_convexity
    if mu is not None and mu > 0:
        return 2.0 * restart_time_upper_bound(mu, obj.lipschitz)
    if f_star is None:
        raise ValueError(
            "objective has no strong convexity constant: pass f_star (for the "
            "coercive-function cap) or an explicit cap"
        )
    # Bootstrap the finite-restart cap from a short burst of integration.
    t1 = 16.0 * dt
    traj = integrate_conservative(obj, x0, np.zeros_like(np.asarray(x0, float)), dt, t1)
    ek1 = 0.5 * float(traj.vs[-1] @ traj.vs[-1])
    if ek1 <= 0.0:
        raise RuntimeError("kinetic energy vanished during the cap bootstrap")
    return finite_restart_cap(obj, x0, float(traj.times[-1]), ek1, f_star)


def mmd_restart_time(
    obj: SmoothObjective,
    x0,
    dt: Optional[float] = None,
    cap: Optional[float] = None,
    f_star: Optional[float] = None,
    reltol: float = EVENT_TIME_RELTOL,
) -> RestartEvent:
    """First local maximum of the mean dissipation E_K(t)/t from rest.

    Integrates the conservative flow from x0 at rest and returns the first
    instant where t*dE_K/dt - E_K turns negative, bisection-refined on
    interpolated states.  For strongly convex objectives the search is capped
    at twice the uniform bound 32 L / (mu sqrt(mu)); otherwise a cap is
    derived from ``f_star`` via :func:`finite_restart_cap` (or supplied
    explicitly).  Failing to find the event within the cap raises, since it
    would contradict the restart-time bound.
    """
    x0 = np.asarray(x0, dtype=float)
    g0 = obj.gradient(x0)
    if float(np.linalg.norm(g0)) == 0.0:
        raise ValueError("grad f(x0) = 0: the flow from rest is stationary")
    if dt is None:
        dt = default_time_step(obj)
    cap = _mmd_cap(obj, x0, dt, cap, f_star)
    state, _, arc, _ = _scan_from_rest(obj, x0, dt, cap, "mmd", reltol)
    if state is None:
        raise RuntimeError(
            f"no mean-dissipation maximum within the cap {cap:g}; this "
            "contradicts the restart-time upper bound"
        )
    return _event_from_state(obj, state, arc)


def kinetic_max_restart_time(
    obj: SmoothObjective,
    x0,
    dt: Optional[float] = None,
    cap: Optional[float] = None,
    f_star: Optional[float] = None,
    reltol: float = EVENT_TIME_RELTOL,
) -> Optional[RestartEvent]:
    """First local maximum of the kinetic energy from rest, or None.

    Returns the refined event where dE_K/dt crosses from positive to
    negative.  In more than one dimension the kinetic energy of the
    conservative flow need not attain a local maximum (incommensurate
    frequencies), so reaching the cap without an event returns None rather
    than raising.
    """
    x0 = np.asarray(x0, dtype=float)
    g0 = obj.gradient(x0)
    if float(np.linalg.norm(g0)) == 0.0:
        raise ValueError("grad f(x0) = 0: the flow from rest is stationary")
    if dt is None:
        dt = default_time_step(obj)
    cap = _mmd_cap(obj, x0, dt, cap, f_star)
    state, _, arc, _ = _scan_from_rest(obj, x0, dt, cap, "kin", reltol)
    if state is None:
        return None
    return _event_from_state(obj, state, arc)


def kinetic_energy_maxima(
    obj: SmoothObjective,
    x0,
    horizon: float,
    dt: Optional[float] = None,
    reltol: float = EVENT_TIME_RELTOL,
) -> List[RestartEvent]:
    """All local maxima of E_K(t) on [0, horizon] for the flow from rest.

    Used to check that a kinetic-energy maximum is never a mean-dissipation
    maximum: at each returned event t*dE_K/dt - E_K = -E_K < 0.
    """
    if dt is None:
        dt = default_time_step(obj)
    grad = obj.gradient
    x = np.array(x0, dtype=float)
    v = np.zeros_like(x)
    g = grad(x)
    a = -g
    armed = False
    events = []
    prev = (0.0, x, v, a)
    test = lambda tt, xx, vv, gg: float(gg @ vv)
    is_after = lambda val: val >= 0.0
    n_steps = int(np.ceil(horizon / dt))
    for i in range(1, n_steps + 1):
        v_half = v + 0.5 * dt * a
        x = x + dt * v_half
        g = grad(x)
        a = -g
        v = v_half + 0.5 * dt * a
        t = i * dt
        q = float(g @ v)
        if armed and q >= 0.0:
            state = _refine_event(grad, test, is_after, prev, (t, x, v, a), reltol)
            events.append(_event_from_state(obj, state, np.nan))
            armed = False
        elif q < 0.0:
            armed = True
        prev = (t, x, v, a)
    return events


def run_piecewise_conservative(
    obj: SmoothObjective,
    x0,
    dt: Optional[float] = None,
    n_restarts: int = 5,
    f_star: Optional[float] = None,
    cap: Optional[float] = None,
    record_every: Optional[int] = None,
    reltol: float = EVENT_TIME_RELTOL,
) -> PiecewiseResult:
    """Piecewise conservative flow: evolve from rest, restart at each
    mean-dissipation maximum, repeat ``n_restarts`` times.

    Returns the sampled trajectory (velocity reset to zero at every restart
    sample), per-segment decrease data, and the bound reports: restart-time
    lower/upper bounds per segment, per-restart objective contraction, the
    global floor-rate bound, and the total-arc-length bound.  Bound checks
    that need mu or f* are emitted only when those are available (f* is
    computed exactly for quadratics when not supplied).
    """
    from .objectives import QuadraticObjective  # local import to avoid cycle noise

    x0 = np.asarray(x0, dtype=float)
    if dt is None:
        dt = default_time_step(obj)
    if f_star is None and isinstance(obj, QuadraticObjective):
        x_min = np.linalg.solve(obj.A, -obj.b)
        f_star = obj.value(x_min)
    mu = obj.strong_convexity
    L = obj.lipschitz

    g0 = obj.gradient(x0)
    grad_floor = 1e-14 * max(1.0, float(np.linalg.norm(g0)))
    times = [0.0]
    xs = [x0.copy()]
    vs = [np.zeros_like(x0)]
    events: List[RestartEvent] = []
    segments: List[dict] = []
    reports: List[dict] = []

    x = x0
    t_abs = 0.0
    total_arc = 0.0
    f_prev = obj.value(x0)
    sample_gaps = []  # (t_abs, f - reference) pairs when f_star known

    for seg in range(n_restarts):
        g = obj.gradient(x)
        if float(np.linalg.norm(g)) <= grad_floor:
            break
        seg_cap = _mmd_cap(obj, x, dt, cap, f_star)
        stride = record_every or 8
        state, n_steps, arc, samples = _scan_from_rest(
            obj, x, dt, seg_cap, "mmd", reltol, record_stride=stride
        )
        if state is None:
            raise RuntimeError(f"segment {seg}: no restart within the cap {seg_cap:g}")
        event = _event_from_state(obj, state, arc, t_offset=t_abs)
        for t_s, x_s, v_s in samples[1:]:
            if t_s < event.time:
                times.append(t_abs + t_s)
                xs.append(x_s)
                vs.append(v_s)
        t_abs += event.time
        times.append(t_abs)
        xs.append(event.x)
        vs.append(np.zeros_like(event.x))  # restart: velocity reset
        events.append(event)
        total_arc += event.arc_length
        f_now = event.f_value
        segments.append(
            {
                "segment": seg,
                "t_start": event.time_abs - event.time,
                "t_end": event.time_abs,
                "restart_time": event.time,
                "f_start": f_prev,
                "f_end": f_now,
                "f_decrease": f_prev - f_now,
                "kinetic_energy": event.kinetic_energy,
                "arc_length": event.arc_length,
            }
        )
        if mu is not None and mu > 0:
            reports.append(
                bound_report(
                    f"restart_time_lower[{seg}]",
                    np.sqrt(mu) / (8.0 * L),
                    event.time,
                    slack=1e-4 * event.time,
                )
            )
            reports.append(
                bound_report(
                    f"restart_time_upper[{seg}]",
                    event.time,
                    restart_time_upper_bound(mu, L),
                    slack=1e-4 * restart_time_upper_bound(mu, L),
                )
            )
            if f_star is not None:
                gap_prev = f_prev - f_star
                gap_now = f_now - f_star
                reports.append(
                    bound_report(
                        f"decrease_per_restart[{seg}]",
                        gap_now,
                        gap_prev / (1.0 + mu / L),
                        slack=1e-7 * max(gap_prev, 1e-300),
                    )
                )
        f_prev = f_now
        x = event.x

    times = np.asarray(times)
    xs = np.asarray(xs)
    vs = np.asarray(vs)
    traj = ContinuousTrajectory(times=times, xs=xs, vs=vs, events=events)

    if mu is not None and mu > 0 and f_star is not None:
        gap0 = obj.value(x0) - f_star
        t_r = restart_time_upper_bound(mu, L)
        factor = (1.0 + mu / L) ** np.floor(times / t_r)
        gaps = np.array([obj.value(xi) for xi in xs]) - f_star
        reports.append(
            bound_report(
                "objective_rate",
                float(np.max(gaps * factor)),
                gap0,
                slack=1e-7 * max(gap0, 1e-300),
            )
        )
        length_rhs = 4.0 * np.sqrt(2.0) * (L / mu) * t_r * np.sqrt(max(gap0, 0.0))
        reports.append(
            bound_report("curve_length", total_arc, length_rhs, slack=1e-7 * max(length_rhs, 1e-300))
        )
    return PiecewiseResult(trajectory=traj, segments=segments, reports=reports)


def visiting_time_1d(f: Callable[[float], float], x0: float, x_star: float, df=None) -> float:
    """Travel time of the 1D conservative flow from rest at x0 to x_star.

    By energy conservation the speed at height y is sqrt(2(f(x0) - f(y))),
    so the time is the integral of the reciprocal speed.  The inverse
    square-root endpoint singularity at x0 is removed by the substitution
    y = x0 +/- u^2 before adaptive quadrature (absolute tolerance 1e-8).

    Requires f'(x0) != 0 (otherwise the singularity is not integrable) and
    f(x0) > f(y) strictly between x0 and x_star.
    """
    x0 = float(x0)
    x_star = float(x_star)
    span = x_star - x0
    if span == 0.0:
        raise ValueError("x_star must differ from x0")
    f0 = float(f(x0))
    if df is not None:
        fp0 = float(df(x0))
    else:
        step = 1e-7 * (1.0 + abs(x0))
        fp0 = (float(f(x0 + step)) - float(f(x0 - step))) / (2.0 * step)
    if abs(fp0) <= 1e-12 * (1.0 + abs(f0)):
        raise ValueError("f'(x0) = 0: the endpoint singularity is not integrable")
    interior = x0 + span * np.linspace(1.0 / 513.0, 512.0 / 513.0, 512)
    if not all(f0 > float(f(y)) for y in interior):
        raise ValueError("f(x0) must exceed f strictly between x0 and x_star")
    sgn = 1.0 if span > 0 else -1.0
    limit_value = np.sqrt(2.0 / abs(fp0))

    def integrand(u):
        d = f0 - float(f(x0 + sgn * u * u))
        if d <= 0.0:
            return limit_value  # only at the u ~ 0 roundoff boundary
        return 2.0 * u / np.sqrt(2.0 * d)

    val, _ = quad(integrand, 0.0, np.sqrt(abs(span)), epsabs=1e-10, epsrel=1e-10, limit=200)
    return float(val)


def quadratic_fixed_interval_decrease(lams, x0) -> dict:
    """Objective decrease of the conservative flow on a diagonal quadratic
    after the fixed interval pi / (2 sqrt(lam_max)).

    Evaluates f(x(T)) with the closed form and checks it against
    cos^2((pi/2) sqrt(lam_min/lam_max)) * f(x0).  Returns a bound report
    with the achieved ratio under the key "ratio".
    """
    lams = np.asarray(lams, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    if np.any(lams <= 0):
        raise ValueError("all lam_i must be positive")
    lam_min, lam_max = float(lams.min()), float(lams.max())
    T = np.pi / (2.0 * np.sqrt(lam_max))
    x_T, _, _ = quadratic_closed_form(lams, x0, T)
    f0 = 0.5 * float(np.sum(lams * x0**2))
    f_T = 0.5 * float(np.sum(lams * x_T**2))
    bound = np.cos(0.5 * np.pi * np.sqrt(lam_min / lam_max)) ** 2
    rep = bound_report(
        "fixed_interval_decrease", f_T, bound * f0, slack=1e-12 * (1.0 + abs(bound * f0))
    )
    rep["ratio"] = f_T / f0 if f0 > 0 else 0.0
    rep["cos_bound"] = float(bound)
    return rep


def small_time_energy_check(obj: SmoothObjective, x0, dt: Optional[float] = None, n_grid: int = 25) -> dict:
    """Sandwich check on the early kinetic-energy growth.

    For strongly convex objectives, E_K(t) lies between |g0|^2 t^2 / 8 and
    (25/32) |g0|^2 t^2 for all t up to sqrt(mu)/(2L), within the slack
    1e-6 |g0|^2 for integrator error.  Returns a report with the worst
    margins; a start at the minimizer is flagged as degenerate and skipped.
    """
    mu = obj.strong_convexity
    if mu is None or mu <= 0:
        raise ValueError("small-time sandwich requires a strong convexity constant")
    L = obj.lipschitz
    x0 = np.asarray(x0, dtype=float)
    g0 = obj.gradient(x0)
    gsq = float(g0 @ g0)
    if gsq == 0.0:
        return {"bound_name": "kinetic_energy_small_time", "status": "degenerate", "pass": True}
    if dt is None:
        dt = default_time_step(obj)
    T = np.sqrt(mu) / (2.0 * L)
    dt = min(dt, T / max(n_grid, 4))
    traj = integrate_conservative(obj, x0, np.zeros_like(x0), dt, T)
    ts = traj.times[1:]
    eks = 0.5 * np.einsum("ij,ij->i", traj.vs[1:], traj.vs[1:])
    slack = 1e-6 * gsq
    lower = gsq * ts**2 / 8.0
    upper = (25.0 / 32.0) * gsq * ts**2
    lo_margin = float(np.max(lower - eks))  # <= slack required
    hi_margin = float(np.max(eks - upper))
    return {
        "bound_name": "kinetic_energy_small_time",
        "lhs": max(lo_margin, hi_margin),
        "rhs": 0.0,
        "slack": slack,
        "pass": bool(lo_margin <= slack and hi_margin <= slack),
        "horizon": float(T),
        "grid_points": int(len(ts)),
    }


def finite_restart_cap(obj: SmoothObjective, x0, t1: float, ek_t1: float, f_star: float) -> float:
    """Upper bound (t1 / E_K(t1)) (f(x0) - f*) on the mean-dissipation
    restart time of a coercive objective, from any instant t1 with positive
    kinetic energy."""
    if ek_t1 <= 0.0:
        raise ValueError("E_K(t1) must be positive")
    return (t1 / ek_t1) * (obj.value(np.asarray(x0, dtype=float)) - f_star)
