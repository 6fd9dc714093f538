"""Closed-form one-dimensional theory for unit-magnitude examples.

With m = ratio * n positive examples at +1 and n at -1, everything reduces
to the scalar map T(w) = w - (gamma / sigma'(w*)) (sigma(w) - sigma(w*)),
with w* = ln(ratio). This module implements the map, its geometry
(stationary points, the crossing point right of w*), the three contraction
lemmas, and the two-step convergence rate, all checkable on grids.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .model import sigmoid, sigmoid_prime


class NoStationaryPointsError(ValueError):
    """The map is monotone: sigma'(w*) / gamma exceeds the sigmoid's peak 1/4."""


class BracketFailureError(RuntimeError):
    """A bisection bracket could not be established (internal error)."""


class LemmaViolationError(RuntimeError):
    """A contraction lemma failed at a grid point (implementation bug)."""

    def __init__(self, message, w=None):
        super().__init__(message)
        self.w = w


@dataclass(frozen=True)
class OneDimProblem:
    """1D problem summarized by the ratio of +1 examples to -1 examples."""

    ratio: float

    def __post_init__(self):
        if not (np.isfinite(self.ratio) and self.ratio >= 1.0):
            raise ValueError("ratio must be finite and >= 1")

    @property
    def w_star(self) -> float:
        return math.log(self.ratio)

    @property
    def sigma_star(self) -> float:
        """sigmoid(w_star) = ratio / (ratio + 1), exact."""
        return self.ratio / (self.ratio + 1.0)

    @property
    def curvature(self) -> float:
        """sigma'(w_star) = ratio / (ratio + 1)^2, the Hessian at the solution."""
        return self.ratio / (self.ratio + 1.0) ** 2


def grad_1d(w, P: OneDimProblem):
    """Scalar gradient sigma(w) - ratio/(ratio+1); strictly increasing."""
    return sigmoid(w) - P.sigma_star


def gd_map(w, P: OneDimProblem, gamma: float):
    """One GD step w - (gamma / sigma'(w*)) (sigma(w) - sigma(w*))."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return w - (gamma / P.curvature) * (sigmoid(w) - P.sigma_star)


def gd_map_slope(w, P: OneDimProblem, gamma: float):
    """T'(w) = 1 - gamma sigma'(w) / sigma'(w*)."""
    return 1.0 - gamma * sigmoid_prime(w) / P.curvature


def avg_slope(w, P: OneDimProblem):
    """Mean of sigma' over (w, w*): (sigma(w) - sigma(w*)) / (w - w*).

    Extended by continuity to sigma'(w*) at the removable singularity.
    Always in (0, 1/4].
    """
    w = np.asarray(w, dtype=float)
    scalar = w.ndim == 0
    w = np.atleast_1d(w)
    delta = w - P.w_star
    out = np.empty_like(delta)
    at = delta == 0.0
    out[at] = P.curvature
    out[~at] = (sigmoid(w[~at]) - P.sigma_star) / delta[~at]
    return float(out[0]) if scalar else out


def stationary_points(P: OneDimProblem, gamma: float):
    """The two zeros of T', symmetric about 0, in closed form.

    Solves sigma'(w_r) = sigma'(w*)/gamma: sigma(w_r) is the upper root of
    sigma (1 - sigma) = sigma'(w*)/gamma. Raises NoStationaryPointsError
    when sigma'(w*)/gamma > 1/4 and the map is monotone.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    target = P.curvature / gamma
    disc = 1.0 - 4.0 * target
    if disc < 0:
        raise NoStationaryPointsError(
            f"sigma'(w*)/gamma = {target:g} > 1/4: map is monotone"
        )
    sr = (1.0 + math.sqrt(disc)) / 2.0
    if sr >= 1.0:  # only at target == 0, unreachable for finite ratio
        raise BracketFailureError("degenerate stationary point")
    w_right = math.log(sr / (1.0 - sr))
    return -w_right, w_right


def crossing_point(
    P: OneDimProblem, gamma: float, xtol: float = 1e-13, check_tol: float = 1e-10
) -> float:
    """The unique w > w* mapped exactly onto w*; boundary of the
    oscillation neighbourhood.

    Found by bisection on T(w) - w* over a bracket grown by doubling.
    Verifies the identity avg_slope(w) * eta = 1 before returning.
    """
    if not (1.0 < gamma < 2.0):
        raise ValueError("crossing point requires 1 < gamma < 2")
    ws = P.w_star
    f = lambda w: gd_map(w, P, gamma) - ws
    span = 1.0
    lo = ws
    for _ in range(200):
        hi = ws + span
        if f(hi) > 0:
            break
        lo = hi
        span *= 2.0
    else:
        raise BracketFailureError("no sign change while growing the bracket")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
    w_tilde = 0.5 * (lo + hi)
    eta = gamma / P.curvature
    if abs(avg_slope(w_tilde, P) * eta - 1.0) > check_tol:
        raise BracketFailureError(
            "crossing point failed the avg_slope * eta = 1 identity"
        )
    return w_tilde


def two_step_bound(w, P: OneDimProblem, gamma: float):
    """Contraction bound 1 - gamma (2-gamma) avg_slope(w)^2 / sigma'(w*)^2
    for the right-left-right two-step ratio; < 1 for 1 < gamma < 2, w > w*."""
    r = avg_slope(w, P)
    return 1.0 - gamma * (2.0 - gamma) * r * r / P.curvature ** 2


def rate_estimate(gamma: float) -> float:
    """Per-two-step factor 1 - (2-gamma)/gamma; tends to 1 as gamma -> 2."""
    if not (1.0 < gamma < 2.0):
        raise ValueError("rate estimate requires 1 < gamma < 2")
    return 1.0 - (2.0 - gamma) / gamma


@dataclass
class LemmaReport:
    """Grid verification summary for the three contraction lemmas."""

    checked: int
    crossings: int
    worst_ratio: float | None
    worst_bound_margin: float | None

    def to_json(self) -> str:
        return json.dumps(
            {
                "checked": self.checked,
                "crossings": self.crossings,
                "worst_ratio": self.worst_ratio,
                "worst_bound_margin": self.worst_bound_margin,
            },
            sort_keys=True,
        )


def right_grid(P: OneDimProblem, count: int = 10_000, span: float = 20.0) -> np.ndarray:
    """count equispaced starting points in (w*, w* + span]."""
    return P.w_star + span * np.arange(1, count + 1) / count


def verify_lemmas(
    P: OneDimProblem, gamma: float, grid, slack: float = 1e-12
) -> LemmaReport:
    """Check the contraction lemmas pointwise on a grid of w > w*.

    (a) one step from the right contracts: |T(w) - w*| < |w - w*|;
    (b) a right-to-left crossing returns right on the next step;
    (c) the two-step ratio obeys two_step_bound.
    Inequalities carry `slack` to absorb roundoff. Any violation raises
    LemmaViolationError, pointing at an implementation bug.
    """
    if not (1.0 < gamma < 2.0):
        raise ValueError("lemmas require 1 < gamma < 2")
    if P.ratio <= 1.0:
        raise ValueError("lemmas require ratio > 1")
    w = np.asarray(grid, dtype=float)
    if not (w > P.w_star).all():
        raise ValueError("grid points must lie strictly right of w*")
    d0 = w - P.w_star
    t1 = gd_map(w, P, gamma)
    d1 = t1 - P.w_star
    t2 = gd_map(t1, P, gamma)
    d2 = t2 - P.w_star

    tol0 = slack * np.maximum(1.0, d0)
    bad1 = np.abs(d1) > d0 + tol0
    if bad1.any():
        i = int(np.argmax(bad1))
        raise LemmaViolationError(
            f"one-step contraction failed at w = {w[i]!r}", w=float(w[i])
        )
    crossed = d1 < 0
    bad2 = crossed & (d2 < -slack * np.maximum(1.0, d0))
    if bad2.any():
        i = int(np.argmax(bad2))
        raise LemmaViolationError(
            f"double crossing failed at w = {w[i]!r}", w=float(w[i])
        )
    worst_ratio = None
    worst_margin = None
    if crossed.any():
        ratio = d2[crossed] / d0[crossed]
        bound = two_step_bound(w[crossed], P, gamma)
        margin = bound - ratio
        bad3 = margin < -slack
        if bad3.any():
            i = int(np.argmax(bad3))
            raise LemmaViolationError(
                f"two-step bound failed at w = {w[crossed][i]!r}",
                w=float(w[crossed][i]),
            )
        worst_ratio = float(ratio.max())
        worst_margin = float(margin.min())
    return LemmaReport(
        checked=int(w.size),
        crossings=int(crossed.sum()),
        worst_ratio=worst_ratio,
        worst_bound_margin=worst_margin,
    )


def cobweb(w0: float, steps: int, P: OneDimProblem, gamma: float):
    """Orbit segments for a cobweb diagram of the map against the diagonal.

    Each iterate yields a vertical segment (w, w) -> (w, T(w)) and a
    diagonal transfer (w, T(w)) -> (T(w), T(w)); rows carry (w_from, w_to,
    kind) with kind in {"vertical", "diagonal"}.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    segments = []
    w = float(w0)
    for _ in range(steps):
        t = float(gd_map(w, P, gamma))
        segments.append((w, t, "vertical"))
        segments.append((w, t, "diagonal"))
        w = t
    return segments


def write_cobweb_csv(segments, fh) -> None:
    fh.write("w_from,w_to,segment_kind\n")
    for w_from, w_to, kind in segments:
        fh.write(f"{w_from:.17g},{w_to:.17g},{kind}\n")
