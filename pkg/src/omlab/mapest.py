"""MAP estimation for toy linear inverse problems with product-measure priors.

The posterior objective on the first K coordinates is
``J(x) = q_{gamma,m}(x) + Phi(x)`` with the data misfit
``Phi(x) = ||A x - y||^2 / (2 sigma^2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import NumericalError, SpecError
from .measures import ProductMeasureSpec
from .om import neg_log_density_array, validate_gamma_family
from .weights import SpaceSpec

__all__ = [
    "LinearGaussian",
    "ZeroPotential",
    "SmoothPotential",
    "PosteriorObjective",
    "posterior_objective",
    "MapResult",
    "solve_map",
    "multistart_map",
    "gaussian_map_closed_form",
    "soft_threshold",
    "laplace_identity_map",
    "MapConvergenceRow",
    "map_convergence_experiment",
    "convergence_rows_to_csv",
]

PRECOND_FLOOR = 1e-3


@dataclass(frozen=True, eq=False)
class LinearGaussian:
    """Gaussian data misfit for ``y = A x + noise`` with noise scale sigma."""

    A: np.ndarray
    y: np.ndarray
    sigma: float

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        y = np.asarray(self.y, dtype=float).ravel()
        if A.shape[0] != y.size:
            raise SpecError("A and y have incompatible shapes")
        if not self.sigma > 0:
            raise SpecError("sigma must be positive")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "y", y)

    @property
    def K(self) -> int:
        return self.A.shape[1]

    def __call__(self, x) -> float:
        r = self.A @ np.asarray(x, dtype=float) - self.y
        return float(r @ r) / (2.0 * self.sigma**2)

    def grad(self, x) -> np.ndarray:
        return self.A.T @ (self.A @ np.asarray(x, dtype=float) - self.y) / self.sigma**2

    def lipschitz(self) -> float:
        return float(np.linalg.norm(self.A, 2) ** 2) / self.sigma**2

    def curvature_diag(self) -> np.ndarray:
        return np.sum(self.A**2, axis=0) / self.sigma**2


@dataclass(frozen=True)
class ZeroPotential:
    K: int

    def __call__(self, x) -> float:
        return 0.0

    def grad(self, x) -> np.ndarray:
        return np.zeros(self.K)

    def lipschitz(self) -> float:
        return 0.0

    def curvature_diag(self) -> np.ndarray:
        return np.zeros(self.K)


@dataclass(frozen=True, eq=False)
class SmoothPotential:
    """User potential with value and gradient callables."""

    K: int
    fn: Callable
    grad_fn: Callable
    L: float = 1.0

    def __call__(self, x) -> float:
        return float(self.fn(x))

    def grad(self, x) -> np.ndarray:
        return np.asarray(self.grad_fn(x), dtype=float)

    def lipschitz(self) -> float:
        return self.L

    def curvature_diag(self) -> np.ndarray:
        return np.zeros(self.K)


@dataclass(frozen=True, eq=False)
class PosteriorObjective:
    spec: ProductMeasureSpec
    phi: object
    K: int
    gamma: np.ndarray = field(init=False)
    m: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "gamma", self.spec.gamma_values(self.K))
        object.__setattr__(self, "m", self.spec.shift_values(self.K))

    @property
    def smooth_prior(self) -> bool:
        return self.spec.ref.smooth_c2 or (self.spec.ref.name == "besov" and self.spec.ref.params["p"] > 1)

    @property
    def laplace_prior(self) -> bool:
        return self.spec.ref.name == "besov" and self.spec.ref.params["p"] == 1.0

    def prior(self, x) -> float:
        return float(neg_log_density_array(self.spec, np.asarray(x, dtype=float)))

    def __call__(self, x) -> float:
        return self.prior(x) + self.phi(x)

    def prior_grad(self, x) -> np.ndarray:
        z = (np.asarray(x, dtype=float) - self.m) / self.gamma
        return self.spec.ref.neg_log_grad(z) / self.gamma

    def grad(self, x) -> np.ndarray:
        """Gradient (a subgradient at kinks of a p = 1 prior)."""
        return self.prior_grad(x) + self.phi.grad(x)

    def prox_prior(self, v, t: float) -> np.ndarray:
        """Proximal map of ``t * sum |x_k - m_k| / gamma_k``."""
        if not self.laplace_prior:
            raise SpecError("the exact proximal map is available for the p = 1 prior only")
        return self.m + soft_threshold(np.asarray(v) - self.m, t / self.gamma)

    def preconditioner(self, x=None) -> np.ndarray:
        """Diagonal curvature: prior second differences at x (floored) plus the misfit diagonal.

        Nonconvex priors have negative curvature in the tails; the floor keeps
        the metric positive definite.
        """
        h = 1e-4
        q = self.spec.ref.neg_log
        q2_0 = float((q(h) - 2 * q(0.0) + q(-h)) / h**2)
        if x is None:
            q2 = q2_0
        else:
            z = (np.asarray(x, dtype=float) - self.m) / self.gamma
            q2 = np.maximum((q(z + h) - 2 * q(z) + q(z - h)) / h**2, PRECOND_FLOOR * q2_0)
        return q2 / self.gamma**2 + self.phi.curvature_diag()


def posterior_objective(spec: ProductMeasureSpec, phi, K: int) -> PosteriorObjective:
    if getattr(phi, "K", K) != K:
        raise SpecError("potential and truncation disagree on K")
    return PosteriorObjective(spec, phi, K)


@dataclass(frozen=True)
class MapResult:
    x: np.ndarray
    objective: float
    iterations: int
    converged: bool
    K: int
    history: tuple[float, ...] = ()


def soft_threshold(v, t) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def _grad_descent(J: PosteriorObjective, x, max_iter, tol):
    # trial steps from the Barzilai-Borwein rule in the preconditioned metric,
    # accepted only under the Armijo condition, so objectives never increase
    P = J.preconditioner(x)
    f = J(x)
    g = J.grad(x)
    hist = [f]
    step = 1.0
    stalled = 0
    for it in range(1, max_iter + 1):
        d = g / P
        if np.linalg.norm(d) <= tol * max(1.0, float(np.linalg.norm(x))):
            return x, f, it - 1, True, hist
        slope = float(g @ d)
        for _ in range(80):
            xn = x - step * d
            fn = J(xn)
            if fn <= f - 1e-4 * step * slope:
                break
            step *= 0.5
        else:
            if fn <= f:
                return xn, fn, it, True, hist + [fn]
            return x, f, it, False, hist
        gn = J.grad(xn)
        sx, sg = xn - x, gn - g
        P = J.preconditioner(xn)
        curv = float(sx @ sg)
        step = float((sx * P) @ sx) / curv if curv > 0 else 1.0
        step = min(max(step, 1e-8), 1e8)
        stalled = stalled + 1 if fn == f else 0
        x, f, g = xn, fn, gn
        hist.append(f)
        if stalled >= 20:
            # the objective no longer resolves progress: accept near-stationary points
            ok = np.linalg.norm(g / P) <= 100 * tol * max(1.0, float(np.linalg.norm(x)))
            return x, f, it, bool(ok), hist
    return x, f, max_iter, False, hist


def _prox_grad(J: PosteriorObjective, x, max_iter, tol):
    L = J.phi.lipschitz()
    t = 1.0 / L if L > 0 else 1.0
    f = J(x)
    hist = [f]
    for it in range(1, max_iter + 1):
        g = J.phi.grad(x)
        phi_x = J.phi(x)
        for _ in range(80):
            xn = J.prox_prior(x - t * g, t)
            dx = xn - x
            # sufficient decrease of the smooth part (standard backtracking test)
            if J.phi(xn) <= phi_x + float(g @ dx) + float(dx @ dx) / (2 * t) + 1e-15 * abs(phi_x):
                break
            t *= 0.5
        else:
            return x, f, it, False, hist
        fn = J(xn)
        if fn > f + 1e-12 * max(1.0, abs(f)):
            return x, f, it, False, hist
        x, f = xn, fn
        hist.append(f)
        if np.linalg.norm(dx) <= tol * max(1.0, float(np.linalg.norm(x))):
            return x, f, it, True, hist
    return x, f, max_iter, False, hist


def solve_map(J: PosteriorObjective, method: str = "auto", init=None, max_iter: int = 10_000,
              tol: float = 1e-10) -> MapResult:
    """Minimise the posterior objective from ``init`` (default: the prior shift).

    ``prox-grad`` is proximal gradient with backtracking for the p = 1 prior;
    ``grad-descent`` is diagonally preconditioned gradient descent with Armijo
    backtracking, so accepted objectives never increase.
    """
    if method == "auto":
        method = "prox-grad" if J.laplace_prior else "grad-descent"
    x0 = J.m.copy() if init is None else np.asarray(init, dtype=float).copy()
    if x0.shape != (J.K,):
        raise SpecError("initial point has the wrong length")
    if method == "prox-grad":
        if not J.laplace_prior:
            raise SpecError("prox-grad requires the p = 1 prior")
        x, f, it, ok, hist = _prox_grad(J, x0, max_iter, tol)
    elif method == "grad-descent":
        if J.laplace_prior:
            raise SpecError("grad-descent needs a differentiable prior; use prox-grad for p = 1")
        x, f, it, ok, hist = _grad_descent(J, x0, max_iter, tol)
    else:
        raise SpecError(f"unknown method {method!r}")
    if not math.isfinite(f):
        raise NumericalError("objective became non-finite")
    return MapResult(x, f, it, ok, J.K, tuple(hist))


def multistart_map(J: PosteriorObjective, starts: Sequence[np.ndarray], **kw) -> tuple[MapResult, list[MapResult]]:
    """Best of several runs; for the nonconvex Cauchy objective."""
    runs = [solve_map(J, init=s, **kw) for s in starts]
    best = min(runs, key=lambda r: r.objective)
    return best, runs


def gaussian_map_closed_form(spec: ProductMeasureSpec, phi: LinearGaussian) -> np.ndarray:
    """Normal equations ``(2D + A^T A / s^2) x = 2 D m + A^T y / s^2``, ``D = diag(gamma^-2)``."""
    if not (spec.ref.name == "besov" and spec.ref.params["p"] == 2.0):
        raise SpecError("closed form needs the p = 2 prior")
    K = phi.K
    g, m = spec.gamma_values(K), spec.shift_values(K)
    D = 2.0 / g**2
    H = np.diag(D) + phi.A.T @ phi.A / phi.sigma**2
    rhs = D * m + phi.A.T @ phi.y / phi.sigma**2
    return np.linalg.solve(H, rhs)


def laplace_identity_map(spec: ProductMeasureSpec, y, sigma: float) -> np.ndarray:
    """Coordinatewise ``m_k + soft(y_k - m_k, sigma^2 / gamma_k)`` for A = I and p = 1."""
    y = np.asarray(y, dtype=float)
    K = y.size
    g, m = spec.gamma_values(K), spec.shift_values(K)
    return m + soft_threshold(y - m, sigma**2 / g)


@dataclass(frozen=True)
class MapConvergenceRow:
    n: int
    dist: float
    obj: float
    iters: int
    converged: bool


def map_convergence_experiment(family: Callable[[int], ProductMeasureSpec], limit: ProductMeasureSpec,
                               phi, K: int, n_grid: Sequence[int], method: str = "auto",
                               space: SpaceSpec | None = None, validate: bool = True,
                               tol: float = 1e-10, max_iter: int = 10_000) -> tuple[list[MapConvergenceRow], MapResult]:
    """MAP of each family member against the limit MAP, distance in the limit's space."""
    specs = [family(n) for n in n_grid]
    if validate:
        validate_gamma_family(specs, limit)
    space = space or limit.ambient
    w = space.weights.values(K)
    ref = solve_map(posterior_objective(limit, phi, K), method, tol=tol, max_iter=max_iter)
    rows = []
    for n, s in zip(n_grid, specs):
        res = solve_map(posterior_objective(s, phi, K), method, tol=tol, max_iter=max_iter)
        dist = float(np.sum(np.abs((res.x - ref.x) / w) ** space.p) ** (1.0 / space.p))
        rows.append(MapConvergenceRow(int(n), dist, res.objective, res.iterations, res.converged))
    return rows, ref


def convergence_rows_to_csv(rows: Sequence[MapConvergenceRow]) -> str:
    out = ["n,dist,obj,iters,converged"]
    for r in rows:
        out.append(f"{r.n},{r.dist:.17g},{r.obj:.17g},{r.iters},{int(r.converged)}")
    return "\n".join(out) + "\n"
