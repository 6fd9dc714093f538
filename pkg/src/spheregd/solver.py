"""Find the minimizer w* and the threshold curvature lambda = lambda_max(H(w*)).

The solver is a tool for locating w*, separate from the gradient descent
dynamics under study: it uses damped Newton steps with an Armijo line
search so its own step-size choices never contaminate the experiments.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .model import (
    Dataset,
    NonFiniteError,
    _as_vector,
    grad,
    hessian,
    hessian_operator,
    loss,
    problem_dim,
)


class SeparableDatasetError(RuntimeError):
    """The dataset admits no finite minimizer (some direction weakly
    separates it with positive total margin)."""

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class NoConvergenceError(RuntimeError):
    """An iterative routine hit its iteration cap before converging."""


@dataclass
class SolveReport:
    """Minimizer, threshold curvature, and convergence diagnostics."""

    w_star: np.ndarray
    lambda_max: float
    grad_norm: float
    newton_iters: int
    separable: bool = False
    residuals: list = field(default_factory=list, repr=False)

    def to_json(self) -> str:
        return json.dumps(
            {
                "w_star": [float(v) for v in np.atleast_1d(self.w_star)],
                "lambda": self.lambda_max,
                "grad_norm": self.grad_norm,
                "iters": self.newton_iters,
                "separable": self.separable,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "SolveReport":
        d = json.loads(text)
        return cls(
            w_star=np.asarray(d["w_star"], dtype=float),
            lambda_max=d["lambda"],
            grad_norm=d["grad_norm"],
            newton_iters=d["iters"],
            separable=d["separable"],
        )


def separating_direction(D: Dataset, tol: float = 1e-9):
    """Exact feasibility certificate for the absence of a finite minimizer.

    The loss has no minimizer iff some w satisfies X w >= 0 with X w != 0.
    Solved as an LP: maximize 1^T X w subject to X w >= 0, |w|_inf <= 1.
    Returns the certificate direction, or None when the optimum is 0.
    """
    X = D.examples
    res = linprog(
        c=-X.sum(axis=0),
        A_ub=-X,
        b_ub=np.zeros(D.n),
        bounds=[(-1.0, 1.0)] * D.dim,
        method="highs",
    )
    if res.status != 0:
        raise RuntimeError(f"separability LP failed: {res.message}")
    if -res.fun <= tol:
        return None
    w = np.asarray(res.x, dtype=float)
    margins = X @ w
    # guard against LP roundoff before declaring a certificate
    if margins.min() >= -1e-9 and margins.sum() > tol:
        return w
    return None


def solve_newton(
    D: Dataset,
    tol: float = 1e-12,
    max_iter: int = 200,
    divergence_norm: float = 1e4,
    check_separable: bool = True,
    power_tol: float = 1e-12,
    seed: int = 0,
) -> SolveReport:
    """Damped Newton from w = 0 until the gradient norm drops below tol.

    Raises SeparableDatasetError when the LP certificate finds a separating
    direction up front, or when iterates run past `divergence_norm` with the
    gradient still above tol (divergence heuristic).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if check_separable:
        cert = separating_direction(D)
        if cert is not None:
            raise SeparableDatasetError(
                "dataset is separable: LP certificate direction found", cert
            )
    w = np.zeros(D.dim)
    residuals = []
    gn = np.inf
    for k in range(max_iter):
        g = grad(w, D)
        gn = float(np.linalg.norm(g))
        if not np.isfinite(gn):
            raise NonFiniteError("non-finite gradient inside Newton solve")
        residuals.append(gn)
        if gn <= tol:
            break
        if np.linalg.norm(w) > divergence_norm:
            raise SeparableDatasetError(
                f"Newton iterates exceeded norm {divergence_norm:g} with "
                f"gradient norm {gn:g} still above tol (divergence heuristic)"
            )
        H = hessian(w, D)
        try:
            p = np.linalg.solve(H, -g)
        except np.linalg.LinAlgError:
            p = np.linalg.lstsq(H, -g, rcond=None)[0]
        slope = float(g @ p)
        if slope >= 0:  # singular/indefinite fallback: steepest descent
            p = -g
            slope = -gn * gn
        f0 = loss(w, D)
        t = 1.0
        for _ in range(80):
            if loss(w + t * p, D) <= f0 + 1e-4 * t * slope:
                break
            t *= 0.5
        else:
            raise NoConvergenceError("Armijo line search failed to make progress")
        w = w + t * p
    else:
        raise NoConvergenceError(
            f"Newton did not reach tol={tol:g} in {max_iter} iterations "
            f"(last gradient norm {gn:g})"
        )
    lam = lambda_max(D, w, tol=power_tol, seed=seed)
    return SolveReport(
        w_star=w,
        lambda_max=lam,
        grad_norm=gn,
        newton_iters=k,
        separable=False,
        residuals=residuals,
    )


def lambda_max(
    problem,
    w_star,
    tol: float = 1e-12,
    max_iter: int = 100_000,
    seed: int = 0,
) -> float:
    """Top Hessian eigenvalue at w_star by power iteration on Hessian-vector
    products; never materializes the matrix.

    Iterates from a seeded random start until successive Rayleigh quotients
    differ by at most tol.
    """
    matvec, dim = hessian_operator(problem, w_star)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    prev = None
    for _ in range(max_iter):
        hv = matvec(v)
        ray = float(v @ hv)
        nrm = float(np.linalg.norm(hv))
        if nrm == 0.0:
            return 0.0
        v = hv / nrm
        if prev is not None and abs(ray - prev) <= tol * max(1.0, abs(ray)):
            return ray
        prev = ray
    raise NoConvergenceError(
        f"power iteration did not stabilize within {max_iter} iterations"
    )


def step_size(gamma: float, lam: float) -> float:
    """Step size gamma / lam used throughout: the stability threshold is at
    gamma = 2."""
    if gamma <= 0 or lam <= 0:
        raise ValueError("gamma and lam must be positive")
    return gamma / lam


__all__ = [
    "SolveReport",
    "SeparableDatasetError",
    "NoConvergenceError",
    "separating_direction",
    "solve_newton",
    "lambda_max",
    "step_size",
]
