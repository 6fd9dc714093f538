"""Pad a planar dataset onto the unit sphere in higher dimension while
preserving its minimizer, its threshold curvature, and its GD dynamics in
the leading two coordinates.

Each base row x (norm <= 1) becomes the 2(d-2) rows (x, +-s e_j) with
s = sqrt(1 - |x|^2). At any point with zero tail the Hessian is block
diagonal: the base Hessian on top, and (tail_curvature / (d-2)) I on the
padding coordinates, so a large enough d leaves the top eigenvalue equal
to the base one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .model import (
    Dataset,
    LiftedDataset,
    _as_vector,
    hessian,
    lifted_grad,
    sigmoid_prime,
)
from .solver import lambda_max, solve_newton


def normalize_into_ball(X) -> np.ndarray:
    """Scale all rows by the largest row norm, so the result fits in the
    unit ball; GD dynamics are preserved under this uniform scaling."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    norms = np.linalg.norm(X, axis=1)
    top = norms.max()
    if top == 0.0:
        raise ValueError("cannot normalize an all-zero dataset")
    return X / top


def lift(base_examples, ambient_dim: int) -> LiftedDataset:
    """Implicit sphere padding of an n x 2 base (row norms <= 1) into
    dimension ambient_dim >= 3."""
    B = np.asarray(base_examples, dtype=float)
    if B.ndim != 2 or B.shape[1] != 2:
        raise ValueError("base must be an n x 2 matrix")
    if ambient_dim < 3:
        raise ValueError("ambient_dim must be >= 3")
    sq = (B ** 2).sum(axis=1)
    if (sq > 1.0 + 1e-12).any():
        raise ValueError("base rows must have norm <= 1 (normalize first)")
    s = np.sqrt(np.clip(1.0 - sq, 0.0, None))
    return LiftedDataset(base=B, s=s, ambient_dim=int(ambient_dim))


def tail_curvature(base_examples, w_base) -> float:
    """Average curvature weight carried by the padding coordinates:
    (1/n) sum sigmoid'(x_i . w) (1 - |x_i|^2).

    Evaluated at the base solution this is the constant whose division by
    (d - 2) gives the padding block of the lifted Hessian; it does not
    depend on the ambient dimension. Always in [0, 1/4].
    """
    B = np.asarray(base_examples, dtype=float)
    w = _as_vector(w_base, B.shape[1], "w_base")
    s2 = np.clip(1.0 - (B ** 2).sum(axis=1), 0.0, None)
    return float(np.mean(sigmoid_prime(B @ w) * s2))


def min_ambient_dim(base_curvature: float, tail_curv: float) -> int:
    """Smallest d >= 3 with base_curvature >= tail_curv / (d - 2), so the
    padding block cannot raise the top eigenvalue above the base one.

    Ratios within 1e-12 of an integer are accepted as that integer (the
    requirement is a non-strict inequality).
    """
    if base_curvature <= 0:
        raise ValueError("base_curvature must be positive")
    if tail_curv < 0:
        raise ValueError("tail curvature cannot be negative")
    ratio = tail_curv / base_curvature
    need = math.ceil(ratio - 1e-12)
    return max(3, 2 + need)


def lifted_solution(w_base, ambient_dim: int) -> np.ndarray:
    """The base minimizer padded with zeros; by the +- symmetry of the
    padding it is the minimizer of the lifted objective."""
    w = _as_vector(w_base, 2, "w_base")
    if ambient_dim < 3:
        raise ValueError("ambient_dim must be >= 3")
    return np.concatenate([w, np.zeros(ambient_dim - 2)])


@dataclass
class BlockResiduals:
    """Max-abs deviations of the materialized lifted Hessian from its
    predicted block structure."""

    top_left: float
    bottom_right: float
    off_diagonal: float

    def max(self) -> float:
        return max(self.top_left, self.bottom_right, self.off_diagonal)

    def as_dict(self) -> dict:
        return {
            "top_left": self.top_left,
            "bottom_right": self.bottom_right,
            "off_diagonal": self.off_diagonal,
        }


def verify_block_hessian(L: LiftedDataset, w_star) -> BlockResiduals:
    """Compare the materialized lifted Hessian at a zero-tail point against
    the predicted blocks: base Hessian, (tail_curvature/(d-2)) I, zero
    off-diagonal. Requires a materializable dimension."""
    w = _as_vector(w_star, L.ambient_dim, "w_star")
    H = hessian(w, L.materialize())
    base_ds = Dataset(L.base)
    top = hessian(w[:2], base_ds)
    tc = tail_curvature(L.base, w[:2])
    m = L.tail_dim
    pred_tail = (tc / m) * np.eye(m)
    return BlockResiduals(
        top_left=float(np.abs(H[:2, :2] - top).max()),
        bottom_right=float(np.abs(H[2:, 2:] - pred_tail).max()),
        off_diagonal=float(np.abs(H[:2, 2:]).max()),
    )


@dataclass
class LiftReport:
    """Construction summary for a sphere lift of a planar base dataset."""

    base_curvature: float
    tail_curvature: float
    min_dim: int
    chosen_dim: int
    lifted_curvature: float
    grad_norm_at_solution: float
    block_check: BlockResiduals | None

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)

    def as_dict(self) -> dict:
        return {
            "base_curvature": self.base_curvature,
            "tail_curvature": self.tail_curvature,
            "min_dim": self.min_dim,
            "chosen_dim": self.chosen_dim,
            "lifted_curvature": self.lifted_curvature,
            "grad_norm_at_solution": self.grad_norm_at_solution,
            "block_check": self.block_check.as_dict() if self.block_check else None,
        }


def build_lift_report(
    base_examples,
    ambient_dim: int | None = None,
    newton_tol: float = 1e-12,
    power_tol: float = 1e-12,
    seed: int = 0,
):
    """Solve the base problem, size the ambient dimension, and validate the
    lift. Returns (LiftReport, LiftedDataset).

    With ambient_dim None the minimal curvature-preserving dimension is
    chosen. Dimensions below it are allowed but leave the lifted curvature
    at tail_curvature / (d - 2) instead of the base value.
    """
    B = np.asarray(base_examples, dtype=float)
    base_ds = Dataset(B)
    rep = solve_newton(base_ds, tol=newton_tol, power_tol=power_tol, seed=seed)
    tc = tail_curvature(B, rep.w_star)
    min_dim = min_ambient_dim(rep.lambda_max, tc)
    chosen = int(ambient_dim) if ambient_dim is not None else min_dim
    L = lift(B, chosen)
    sol = lifted_solution(rep.w_star, chosen)
    gnorm = float(np.linalg.norm(lifted_grad(sol, L)))
    lifted_curv = lambda_max(L, sol, tol=power_tol, seed=seed)
    block = verify_block_hessian(L, sol) if chosen <= 64 else None
    report = LiftReport(
        base_curvature=rep.lambda_max,
        tail_curvature=tc,
        min_dim=min_dim,
        chosen_dim=chosen,
        lifted_curvature=lifted_curv,
        grad_norm_at_solution=gnorm,
        block_check=block,
    )
    return report, L
