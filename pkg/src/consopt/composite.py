"""Conservative restart methods and FISTA baselines for l1-composite problems.

The smooth gradient is replaced throughout by the minimal-norm subgradient,
and crossings of the non-differentiability set {x : x_1 ... x_n = 0} zero the
crossed coordinates and the whole velocity (the kink absorbs the momentum,
like an inelastic collision).  With a zero l1 weight the objective is smooth
everywhere, the non-differentiability set is empty, and every method here
reproduces its smooth counterpart exactly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .discrete import RESTART_CRITERIA, DiscreteState, DivergenceError, should_restart
from .objectives import CompositeObjective, minimal_norm_subgradient

Array = np.ndarray

DIVERGENCE_LIMIT = 1e150

__all__ = [
    "CompositeTrace",
    "prox_l1",
    "sign_crossing_projection",
    "rcm_comp_run",
    "fista_run",
    "fista_restart_run",
]


@dataclass
class CompositeTrace:
    """Per-iteration record of a composite run.

    Same layout as the smooth Trace with ``residuals`` holding the
    minimal-norm subgradient norm, plus a sign-crossing flag column that is
    set only on iterations where at least one coordinate was zeroed.
    """

    method: str
    step: float
    iters: Array
    fvals: Array
    residuals: Array
    restarts: Array
    crossings: Array
    final_state: DiscreteState
    xs: Optional[Array] = None

    def __len__(self) -> int:
        return len(self.iters)


class _Recorder:
    def __init__(self, keep_iterates):
        self.iters, self.fvals, self.residuals = [], [], []
        self.restarts, self.crossings = [], []
        self.xs = [] if keep_iterates else None

    def add(self, k, fval, resid, fired, crossed, x=None):
        self.iters.append(k)
        self.fvals.append(fval)
        self.residuals.append(resid)
        self.restarts.append(fired)
        self.crossings.append(crossed)
        if self.xs is not None:
            self.xs.append(np.array(x))

    def trace(self, method, step, final_state):
        return CompositeTrace(
            method=method,
            step=step,
            iters=np.asarray(self.iters, dtype=int),
            fvals=np.asarray(self.fvals, dtype=float),
            residuals=np.asarray(self.residuals, dtype=float),
            restarts=np.asarray(self.restarts, dtype=bool),
            crossings=np.asarray(self.crossings, dtype=bool),
            final_state=final_state,
            xs=None if self.xs is None else np.asarray(self.xs),
        )


def _check_finite(rec, method, step, fval, resid, state):
    if not (np.isfinite(fval) and np.isfinite(resid)) or abs(fval) > DIVERGENCE_LIMIT or resid > DIVERGENCE_LIMIT:
        raise DivergenceError(
            f"{method}: diverged at iteration {state.iter} (f = {fval:g}, residual = {resid:g})",
            partial_trace=rec.trace(method, step, state),
        )


def prox_l1(z: Array, tau: float) -> Array:
    """Soft threshold, the proximal map of tau * ||.||_1."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    z = np.asarray(z, dtype=float)
    return np.sign(z) * np.maximum(np.abs(z) - tau, 0.0)


def sign_crossing_projection(x_old: Array, x_new: Array):
    """Zero every coordinate whose sign flipped strictly between x_old and x_new.

    Returns (x_proj, crossed).  A coordinate at exactly zero never counts as
    a crossing (the product test is strict).  The caller is responsible for
    resetting the whole velocity when ``crossed`` is True.
    """
    x_old = np.asarray(x_old, dtype=float)
    x_new = np.asarray(x_new, dtype=float)
    if x_old.shape != x_new.shape:
        raise ValueError("x_old and x_new must have equal length")
    mask = x_old * x_new < 0.0
    crossed = bool(mask.any())
    if crossed:
        x_new = np.where(mask, 0.0, x_new)
    return x_new, crossed


def rcm_comp_run(
    f: CompositeObjective,
    x0,
    h: float,
    criterion: str,
    max_iter: int,
    restart_grad_at: str = "new",
    reset_mmd_on_cross: bool = True,
    keep_iterates: bool = False,
) -> CompositeTrace:
    """Conservative restart method on g + gamma ||.||_1.

    The smooth loop with grad f replaced by the minimal-norm subgradient:
    trial step, restart test, then the sign-crossing projection with a full
    velocity reset whenever any coordinate crossed zero.  A crossing also
    resets the mean-dissipation reference index l by default, since a forced
    velocity zeroing invalidates the kinetic-energy comparison across it
    (disable with ``reset_mmd_on_cross=False``).

    With ``l1_weight == 0`` the non-differentiability set is empty, the
    crossing projection never applies, and the trace is identical to the
    smooth run on ``f.smooth``.
    """
    if criterion not in RESTART_CRITERIA:
        raise ValueError(f"unknown restart criterion {criterion!r}")
    if restart_grad_at not in ("old", "new"):
        raise ValueError("restart_grad_at must be 'old' or 'new'")
    if h <= 0:
        raise ValueError("h must be positive")
    L = f.smooth.lipschitz
    if h >= np.sqrt(2.0 / L):
        warnings.warn(
            f"h = {h:g} is outside the convergence range h < sqrt(2/L) = {np.sqrt(2.0 / L):g}",
            stacklevel=2,
        )

    sub = lambda x: minimal_norm_subgradient(f, x)
    needs_trial_sub = criterion in ("grad", "mmd-dr")
    has_kink = f.l1_weight > 0.0
    method = f"rcm-comp-{criterion}"

    x = np.array(x0, dtype=float)
    v = np.zeros_like(x)
    d = sub(x)
    l = 0
    rec = _Recorder(keep_iterates)
    rec.add(0, f.value(x), float(np.linalg.norm(d)), False, False, x=x)
    _check_finite(rec, method, h, rec.fvals[-1], rec.residuals[-1], DiscreteState(x, v, 0, l))

    for k in range(max_iter):
        v_trial = v - h * d
        x_trial = x + h * v_trial
        d_trial = sub(x_trial) if needs_trial_sub else None
        fire = k - l >= 1 and should_restart(criterion, v, v_trial, d_trial, k, l)
        if fire:
            x_new = x - (h * h) * d
            v_new = -h * d if restart_grad_at == "old" else -h * sub(x_new)
            l = k
        else:
            x_new, v_new = x_trial, v_trial
        crossed = False
        if has_kink:
            x_new, crossed = sign_crossing_projection(x, x_new)
            if crossed:
                v_new = np.zeros_like(v_new)
                if reset_mmd_on_cross:
                    l = k + 1
        x, v = x_new, v_new
        d = sub(x)
        f_k = f.value(x)
        r_k = float(np.linalg.norm(d))
        rec.add(k + 1, f_k, r_k, fire, crossed, x=x)
        _check_finite(rec, method, h, f_k, r_k, DiscreteState(x, v, k + 1, l))

    return rec.trace(method, h, DiscreteState(x, v, max_iter, l))


def fista_run(f: CompositeObjective, x0, s: float, max_iter: int, keep_iterates: bool = False) -> CompositeTrace:
    """FISTA: proximal gradient steps with the t-sequence momentum.

    x_k = prox(y_k - s grad g(y_k), s gamma), t_{k+1} = (1 + sqrt(1+4t_k^2))/2,
    y_{k+1} = x_k + ((t_k - 1)/t_{k+1})(x_k - x_{k-1}), starting from
    y_1 = x_0, t_1 = 1.  The recorded objective is not necessarily monotone.
    """
    return _fista(f, x0, s, max_iter, restart=False, keep_iterates=keep_iterates)


def fista_restart_run(f: CompositeObjective, x0, s: float, max_iter: int, keep_iterates: bool = False) -> CompositeTrace:
    """FISTA with the adaptive gradient restart.

    When (y_k - x_k) . (x_k - x_{k-1}) > 0 the momentum is discarded:
    t resets to 1 and y to x_k.
    """
    return _fista(f, x0, s, max_iter, restart=True, keep_iterates=keep_iterates)


def _fista(f, x0, s, max_iter, restart, keep_iterates):
    if s <= 0:
        raise ValueError("s must be positive")
    L = f.smooth.lipschitz
    if s > 1.0 / L:
        warnings.warn(f"s = {s:g} exceeds 1/L = {1.0 / L:g}", stacklevel=3)
    method = "fista-restart" if restart else "fista"
    grad_g = f.smooth.gradient
    tau = s * f.l1_weight

    x = np.array(x0, dtype=float)
    y = x.copy()
    t = 1.0
    rec = _Recorder(keep_iterates)
    d0 = minimal_norm_subgradient(f, x)
    rec.add(0, f.value(x), float(np.linalg.norm(d0)), False, False, x=x)
    _check_finite(rec, method, s, rec.fvals[-1], rec.residuals[-1], DiscreteState(x, np.zeros_like(x), 0, 0))

    for k in range(max_iter):
        x_prev = x
        x = prox_l1(y - s * grad_g(y), tau)
        fire = restart and float((y - x) @ (x - x_prev)) > 0.0
        if fire:
            t = 1.0
            y = x
        else:
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            y = x + ((t - 1.0) / t_next) * (x - x_prev)
            t = t_next
        d = minimal_norm_subgradient(f, x)
        f_k = f.value(x)
        r_k = float(np.linalg.norm(d))
        rec.add(k + 1, f_k, r_k, fire, False, x=x)
        _check_finite(rec, method, s, f_k, r_k, DiscreteState(x, np.zeros_like(x), k + 1, 0))

    return rec.trace(method, s, DiscreteState(x, np.zeros_like(x), max_iter, 0))
