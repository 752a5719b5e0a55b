"""Benchmark objective functions and their random generators.

Three smooth convex families are provided (quadratic, logistic regression,
log-sum-exp), each with an analytic gradient and a certified upper bound on
the gradient Lipschitz constant, plus the l1-composite wrapper and its
minimal-norm subgradient.  Objectives are immutable after construction and
safe to evaluate concurrently; generators are pure functions of their sizes
and seed (PCG64 streams via ``numpy.random.default_rng``).
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import expit, logsumexp, softmax

Array = np.ndarray

__all__ = [
    "SmoothObjective",
    "QuadraticObjective",
    "LogisticObjective",
    "LogSumExpObjective",
    "CompositeObjective",
    "quadratic_objective",
    "gen_random_quadratic",
    "logistic_objective",
    "gen_logistic_instance",
    "logsumexp_objective",
    "gen_logsumexp_instance",
    "minimal_norm_subgradient",
    "l1_weight_rule",
    "lipschitz_constant",
    "power_iteration",
    "write_matrix",
    "read_matrix",
    "save_instance",
    "load_instance",
]


@dataclass(frozen=True, kw_only=True)
class SmoothObjective:
    """A differentiable convex function with a known gradient Lipschitz bound.

    ``value`` and ``gradient`` are callables taking a point of shape (dim,).
    ``strong_convexity`` is ``None`` when no positive modulus is certified;
    when set it must not exceed ``lipschitz``.
    """

    dim: int
    value: Callable[[Array], float]
    gradient: Callable[[Array], Array]
    lipschitz: float
    strong_convexity: Optional[float] = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")
        if not self.lipschitz > 0:
            raise ValueError("lipschitz must be positive")
        if self.strong_convexity is not None:
            mu = self.strong_convexity
            if mu < 0:
                raise ValueError("strong_convexity must be nonnegative")
            if mu > self.lipschitz * (1.0 + 1e-12):
                raise ValueError("strong_convexity exceeds the Lipschitz bound")


@dataclass(frozen=True, kw_only=True)
class QuadraticObjective(SmoothObjective):
    """f(x) = 1/2 x'Ax + b'x with A symmetric positive definite."""

    A: Array
    b: Array
    eigen_bounds: tuple


@dataclass(frozen=True, kw_only=True)
class LogisticObjective(SmoothObjective):
    """Negative log-likelihood of logistic regression with labels in {0,1}."""

    A: Array  # n x m, columns are the sample vectors a_i
    y: Array  # length m


@dataclass(frozen=True, kw_only=True)
class LogSumExpObjective(SmoothObjective):
    """f(x) = rho * log sum_i exp((a_i'x - b_i) / rho)."""

    A: Array  # n x m
    b: Array  # length m
    rho: float


@dataclass(frozen=True, kw_only=True)
class CompositeObjective:
    """Smooth part g plus gamma * ||x||_1.

    ``l1_weight`` may be zero; the composite then coincides with the smooth
    part and the minimal-norm subgradient reduces to the gradient, which is
    what the smooth/composite reduction checks rely on.
    """

    smooth: SmoothObjective
    l1_weight: float

    def __post_init__(self):
        if self.l1_weight < 0:
            raise ValueError("l1_weight must be nonnegative")

    @property
    def dim(self) -> int:
        return self.smooth.dim

    def value(self, x: Array) -> float:
        return self.smooth.value(x) + self.l1_weight * np.abs(x).sum()

    def subgradient(self, x: Array) -> Array:
        return minimal_norm_subgradient(self, x)


def power_iteration(matvec, n: int, tol: float = 1e-8, max_iter: int = 10_000) -> float:
    """Largest eigenvalue of a symmetric PSD operator given as a matvec.

    Starts from the deterministic vector ones(n)/sqrt(n) and iterates until
    the eigenvalue estimate is stationary to relative tolerance ``tol``.
    Raises ``RuntimeError`` if the estimate has not settled within
    ``max_iter`` iterations.
    """
    v = np.full(n, 1.0 / np.sqrt(n))
    lam = 0.0
    for _ in range(max_iter):
        w = matvec(v)
        lam_new = float(np.linalg.norm(w))
        if lam_new == 0.0:
            return 0.0
        v = w / lam_new
        if abs(lam_new - lam) <= tol * lam_new:
            return lam_new
        lam = lam_new
    raise RuntimeError(
        f"power iteration did not converge within {max_iter} iterations"
    )


def quadratic_objective(A, b) -> QuadraticObjective:
    """Build 1/2 x'Ax + b'x from a symmetric positive definite matrix.

    The Lipschitz constant is lambda_max(A) and the strong convexity modulus
    lambda_min(A), both from a dense symmetric eigendecomposition.  A must be
    symmetric to relative tolerance 1e-12.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be a square matrix")
    n = A.shape[0]
    if b.shape != (n,):
        raise ValueError("b has inconsistent length")
    scale = max(1.0, float(np.abs(A).max()))
    if np.abs(A - A.T).max() > 1e-12 * scale:
        raise ValueError("A is not symmetric")
    evals = np.linalg.eigvalsh(A)
    lam_min, lam_max = float(evals[0]), float(evals[-1])
    if lam_min <= 0:
        raise ValueError(f"A is not positive definite (lambda_min = {lam_min:g})")

    def value(x, A=A, b=b):
        return float(0.5 * (x @ (A @ x)) + b @ x)

    def gradient(x, A=A, b=b):
        return A @ x + b

    return QuadraticObjective(
        dim=n,
        value=value,
        gradient=gradient,
        lipschitz=lam_max,
        strong_convexity=lam_min,
        A=A,
        b=b,
        eigen_bounds=(lam_min, lam_max),
    )


def gen_random_quadratic(n: int, lam_lo: float, lam_hi: float, seed: int) -> QuadraticObjective:
    """Random SPD quadratic: eigenvalues uniform on [lam_lo, lam_hi],
    eigenbasis from the QR factorization of a standard normal matrix,
    b standard normal.  Deterministic given the seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (0 < lam_lo <= lam_hi):
        raise ValueError("need 0 < lam_lo <= lam_hi")
    rng = np.random.default_rng(seed)
    evals = rng.uniform(lam_lo, lam_hi, size=n)
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    M = (Q * evals) @ Q.T
    A = 0.5 * (M + M.T)
    b = rng.standard_normal(n)
    return quadratic_objective(A, b)


def logistic_objective(A, y) -> LogisticObjective:
    """Logistic regression loss sum_i [(1-y_i) a_i'x + log(1 + exp(-a_i'x))].

    A is n x m with columns a_i; y has entries in {0, 1}.  The log term is
    evaluated with logaddexp (branch-free overflow-safe log1p-exp) and the
    Lipschitz bound is lambda_max(A A') / 4 via power iteration.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    if A.ndim != 2:
        raise ValueError("A must be a matrix")
    n, m = A.shape
    if y.shape != (m,):
        raise ValueError("y length must equal the number of columns of A")
    if not np.all((y == 0.0) | (y == 1.0)):
        raise ValueError("y entries must lie in {0, 1}")
    lam = power_iteration(lambda v: A @ (A.T @ v), n)

    def value(x, A=A, y=y):
        t = A.T @ x
        return float(np.sum((1.0 - y) * t + np.logaddexp(0.0, -t)))

    def gradient(x, A=A, y=y):
        t = A.T @ x
        return A @ ((1.0 - y) - expit(-t))

    # A = 0 gives a linear objective; keep the Lipschitz field positive
    return LogisticObjective(
        dim=n, value=value, gradient=gradient,
        lipschitz=max(0.25 * lam, np.finfo(float).tiny), A=A, y=y,
    )


def gen_logistic_instance(n: int, m: int, seed: int):
    """Random logistic instance: returns (A, y, x_true).

    x_true ~ N(0, 0.01), A entries standard normal, and y_i Bernoulli with
    success probability sigmoid(a_i'x_true).  The Bernoulli labels consume
    one uniform draw each, in index order, after x_true and A.
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    rng = np.random.default_rng(seed)
    x_true = 0.1 * rng.standard_normal(n)
    A = rng.standard_normal((n, m))
    u = rng.uniform(size=m)
    y = (u < expit(A.T @ x_true)).astype(float)
    return A, y, x_true


def logsumexp_objective(A, b, rho: float) -> LogSumExpObjective:
    """Smoothed max f(x) = rho * log sum_i exp((a_i'x - b_i)/rho).

    Evaluation shifts by the max exponent before exponentiating; the gradient
    is A @ softmax of the shifted exponents.  Lipschitz bound is
    lambda_max(A A') / rho via power iteration.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if rho <= 0:
        raise ValueError("rho must be positive")
    if A.ndim != 2:
        raise ValueError("A must be a matrix")
    n, m = A.shape
    if b.shape != (m,):
        raise ValueError("b length must equal the number of columns of A")
    lam = power_iteration(lambda v: A @ (A.T @ v), n)

    def value(x, A=A, b=b, rho=rho):
        return float(rho * logsumexp((A.T @ x - b) / rho))

    def gradient(x, A=A, b=b, rho=rho):
        return A @ softmax((A.T @ x - b) / rho)

    return LogSumExpObjective(
        dim=n, value=value, gradient=gradient,
        lipschitz=max(lam / rho, np.finfo(float).tiny), A=A, b=b, rho=rho,
    )


def gen_logsumexp_instance(n: int, m: int, seed: int, rho: float = 1.0):
    """Random log-sum-exp instance: A and b standard normal; returns (A, b)."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, m))
    b = rng.standard_normal(m)
    return A, b


def minimal_norm_subgradient(f: CompositeObjective, x: Array) -> Array:
    """Least Euclidean norm element of the subdifferential of g + gamma||.||_1.

    Coordinatewise: grad_i + gamma*sign(x_i) away from zero; at x_i = 0 the
    subdifferential is the interval [grad_i - gamma, grad_i + gamma] and the
    norm minimizer is grad_i - clip(grad_i, -gamma, gamma) (soft threshold).
    """
    x = np.asarray(x, dtype=float)
    g = f.smooth.gradient(x)
    gamma = f.l1_weight
    out = g + gamma * np.sign(x)
    zero = x == 0.0
    if np.any(zero):
        gz = g[zero]
        out[zero] = gz - np.clip(gz, -gamma, gamma)
    return out


def l1_weight_rule(problem_kind: str, data) -> float:
    """Regularization weight keeping the composite minimizer off the origin.

    quadratic: gamma = ||b||_inf / 4; logistic and logsumexp:
    gamma = ||grad g(0)||_inf / 2.  A zero data vector would give gamma = 0
    (a smooth problem in disguise) and is rejected as degenerate.
    """
    data = np.asarray(data, dtype=float)
    norm_inf = float(np.abs(data).max()) if data.size else 0.0
    if norm_inf == 0.0:
        raise ValueError(f"degenerate {problem_kind} input: l1 weight would be 0")
    if problem_kind == "quadratic":
        return 0.25 * norm_inf
    if problem_kind in ("logistic", "logsumexp"):
        return 0.5 * norm_inf
    raise ValueError(f"unknown problem kind {problem_kind!r}")


def lipschitz_constant(obj: SmoothObjective, tol: float = 1e-8) -> float:
    """Gradient Lipschitz bound for the three benchmark families.

    quadratic -> lambda_max(A); logistic -> lambda_max(AA')/4;
    log-sum-exp -> lambda_max(AA')/rho.  All via power iteration with a
    deterministic start vector.
    """
    if isinstance(obj, QuadraticObjective):
        return power_iteration(lambda v: obj.A @ v, obj.dim, tol=tol)
    if isinstance(obj, LogisticObjective):
        A = obj.A
        return 0.25 * power_iteration(lambda v: A @ (A.T @ v), obj.dim, tol=tol)
    if isinstance(obj, LogSumExpObjective):
        A = obj.A
        return power_iteration(lambda v: A @ (A.T @ v), obj.dim, tol=tol) / obj.rho
    raise ValueError("objective is not one of the three benchmark families")


# -- plain-text serialization ------------------------------------------------
#
# One matrix per file: a header line "n m" followed by n whitespace-separated
# rows, row-major, with round-trip decimal formatting.  Vectors are stored as
# n x 1 matrices.


def write_matrix(path, M) -> None:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    with open(path, "w") as fh:
        fh.write(f"{M.shape[0]} {M.shape[1]}\n")
        for row in M:
            fh.write(" ".join(repr(v) for v in row.tolist()) + "\n")


def read_matrix(path) -> Array:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: malformed header")
        n, m = int(header[0]), int(header[1])
        data = np.loadtxt(fh, ndmin=2)
    if data.shape != (n, m):
        raise ValueError(f"{path}: body shape {data.shape} does not match header ({n}, {m})")
    return data


def save_instance(obj, directory) -> None:
    """Write the defining arrays of an objective, one text matrix per file."""
    os.makedirs(directory, exist_ok=True)
    if isinstance(obj, QuadraticObjective):
        write_matrix(os.path.join(directory, "A.txt"), obj.A)
        write_matrix(os.path.join(directory, "b.txt"), obj.b.reshape(-1, 1))
    elif isinstance(obj, LogisticObjective):
        write_matrix(os.path.join(directory, "A.txt"), obj.A)
        write_matrix(os.path.join(directory, "y.txt"), obj.y.reshape(-1, 1))
    elif isinstance(obj, LogSumExpObjective):
        write_matrix(os.path.join(directory, "A.txt"), obj.A)
        write_matrix(os.path.join(directory, "b.txt"), obj.b.reshape(-1, 1))
        write_matrix(os.path.join(directory, "rho.txt"), np.array([[obj.rho]]))
    else:
        raise ValueError("objective is not one of the three benchmark families")


def load_instance(kind: str, directory) -> SmoothObjective:
    """Rebuild an objective written by :func:`save_instance`."""
    A = read_matrix(os.path.join(directory, "A.txt"))
    if kind == "quadratic":
        b = read_matrix(os.path.join(directory, "b.txt")).ravel()
        return quadratic_objective(A, b)
    if kind == "logistic":
        y = read_matrix(os.path.join(directory, "y.txt")).ravel()
        return logistic_objective(A, y)
    if kind == "logsumexp":
        b = read_matrix(os.path.join(directory, "b.txt")).ravel()
        rho = float(read_matrix(os.path.join(directory, "rho.txt"))[0, 0])
        return logsumexp_objective(A, b, rho)
    raise ValueError(f"unknown problem kind {kind!r}")
