"""Logistic regression objective, derivatives, and dataset containers.

Labels are folded into the examples at construction time (row i stores
y_i * x_i), so the objective is always written with label +1. Datasets
are immutable and safe to share across threads.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np


class DimensionMismatchError(ValueError):
    """A vector argument does not match the problem dimension."""


class NonFiniteError(FloatingPointError):
    """A NaN or infinity appeared during evaluation or iteration."""


class DimensionTooLargeError(ValueError):
    """An operation that materializes dense d x d or n x d data was asked
    to run at a dimension above its guard."""


def sigmoid(z):
    """Logistic function 1 / (1 + exp(-z)), branch-stable for large |z|."""
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return float(out[0]) if scalar else out


def softplus(z):
    """log(1 + exp(z)) evaluated as max(z, 0) + log1p(exp(-|z|))."""
    z = np.asarray(z, dtype=float)
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


def sigmoid_prime(z):
    """Derivative of the sigmoid, sigmoid(z) * sigmoid(-z); peaks at 1/4."""
    return sigmoid(z) * sigmoid(-z)


def _as_vector(w, dim, name="w"):
    w = np.atleast_1d(np.asarray(w, dtype=float))
    if w.ndim != 1 or w.shape[0] != dim:
        raise DimensionMismatchError(
            f"{name} has shape {w.shape}, expected ({dim},)"
        )
    return w


@dataclass(frozen=True)
class Dataset:
    """Dense n x d matrix of folded examples (row i is y_i * x_i)."""

    examples: np.ndarray

    def __post_init__(self):
        X = np.array(self.examples, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError(f"examples must be a nonempty 2D matrix, got shape {X.shape}")
        if not np.isfinite(X).all():
            raise ValueError("examples contain non-finite entries")
        X.flags.writeable = False
        object.__setattr__(self, "examples", X)

    @property
    def n(self) -> int:
        return self.examples.shape[0]

    @property
    def dim(self) -> int:
        return self.examples.shape[1]

    @classmethod
    def from_arrays(cls, X, labels=None) -> "Dataset":
        """Build a dataset, folding explicit +-1 labels into the rows."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if labels is None:
            return cls(X)
        y = np.asarray(labels, dtype=float).reshape(-1)
        if y.shape[0] != X.shape[0]:
            raise ValueError("labels length does not match number of examples")
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise ValueError("labels must be -1 or +1")
        return cls(X * y[:, None])

    @classmethod
    def from_csv(cls, path) -> "Dataset":
        """Load a dataset from CSV, one example per row.

        A header row is auto-detected (non-numeric first row). If the header
        names its final column "label", that column is read as a +-1 label
        and folded into the example.
        """
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
        if not rows:
            raise ValueError(f"empty dataset file: {path}")
        header = None
        try:
            [float(c) for c in rows[0]]
        except ValueError:
            header = [c.strip().lower() for c in rows[0]]
            rows = rows[1:]
        if not rows:
            raise ValueError(f"no data rows in {path}")
        data = np.array([[float(c) for c in r] for r in rows])
        if header is not None and header[-1] == "label":
            return cls.from_arrays(data[:, :-1], data[:, -1])
        return cls(data)

    def to_csv_text(self) -> str:
        """Folded examples as CSV text (no header, no label column)."""
        buf = io.StringIO()
        for row in self.examples:
            buf.write(",".join(f"{v:.17g}" for v in row) + "\n")
        return buf.getvalue()

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_csv_text())


@dataclass(frozen=True)
class LiftedDataset:
    """Implicit representation of a planar dataset padded onto the unit
    sphere in `ambient_dim` dimensions.

    Each base row x (norm <= 1) stands for the 2*(ambient_dim - 2) examples
    (x, +s e_j) and (x, -s e_j), j = 1..ambient_dim-2, with s = sqrt(1 - |x|^2),
    so every implicit example has norm exactly 1. Stored as the base matrix
    plus the padding magnitudes; materialized only at small dimension.
    """

    base: np.ndarray
    s: np.ndarray
    ambient_dim: int

    def __post_init__(self):
        B = np.array(self.base, dtype=float)
        s = np.array(self.s, dtype=float)
        if B.ndim != 2 or B.shape[1] != 2 or B.shape[0] < 1:
            raise ValueError(f"base must be an n x 2 matrix, got shape {B.shape}")
        if not isinstance(self.ambient_dim, (int, np.integer)) or self.ambient_dim < 3:
            raise ValueError("ambient_dim must be an integer >= 3")
        if s.shape != (B.shape[0],):
            raise ValueError("s must have one entry per base row")
        sq = (B ** 2).sum(axis=1)
        if (sq > 1.0 + 1e-12).any():
            raise ValueError("base rows must have norm <= 1")
        if (s < 0).any() or np.abs(s ** 2 + sq - 1.0).max() > 1e-9:
            raise ValueError("s entries must equal sqrt(1 - |x|^2)")
        B.flags.writeable = False
        s.flags.writeable = False
        object.__setattr__(self, "base", B)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "ambient_dim", int(self.ambient_dim))

    @property
    def n_base(self) -> int:
        return self.base.shape[0]

    @property
    def tail_dim(self) -> int:
        return self.ambient_dim - 2

    @property
    def n_examples(self) -> int:
        return 2 * self.tail_dim * self.n_base

    def materialize(self, limit: int = 64) -> Dataset:
        """Expand into an explicit Dataset; guarded for small dimensions only."""
        d = self.ambient_dim
        if d > limit:
            raise DimensionTooLargeError(
                f"refusing to materialize ambient_dim={d} > limit={limit}"
            )
        m = self.tail_dim
        X = np.zeros((self.n_examples, d))
        r = 0
        for i in range(self.n_base):
            for sign in (1.0, -1.0):
                X[r:r + m, :2] = self.base[i]
                X[r:r + m, 2:] = sign * self.s[i] * np.eye(m)
                r += m
        return Dataset(X)


def loss(w, D: Dataset) -> float:
    """Mean logistic loss (1/n) sum log(1 + exp(-w.x_i))."""
    w = _as_vector(w, D.dim)
    z = D.examples @ w
    return float(np.mean(softplus(-z)))


def grad(w, D: Dataset) -> np.ndarray:
    """Gradient -(1/n) X^T sigmoid(-X w)."""
    w = _as_vector(w, D.dim)
    z = D.examples @ w
    return -(D.examples.T @ sigmoid(-z)) / D.n


def hessian(w, D: Dataset) -> np.ndarray:
    """Materialized Hessian (1/n) X^T diag(sigmoid'(X w)) X; symmetric PSD."""
    w = _as_vector(w, D.dim)
    r = sigmoid_prime(D.examples @ w)
    H = D.examples.T @ (D.examples * r[:, None]) / D.n
    return (H + H.T) / 2.0


def hessian_operator(problem, w):
    """Return (matvec, dim) applying the Hessian at w without forming it.

    Curvature weights are precomputed once, so repeated products (power
    iteration) cost one pass over the data each.
    """
    if isinstance(problem, LiftedDataset):
        L = problem
        w = _as_vector(w, L.ambient_dim)
        a = L.base @ w[:2]
        sv = L.s[:, None] * w[2:][None, :]
        gp = sigmoid_prime(a[:, None] + sv)
        gm = sigmoid_prime(a[:, None] - sv)
        n = L.n_examples

        def matvec(v):
            v = _as_vector(v, L.ambient_dim, "v")
            b = L.base @ v[:2]
            su = L.s[:, None] * v[2:][None, :]
            up = b[:, None] + su
            um = b[:, None] - su
            head = L.base.T @ (gp * up + gm * um).sum(axis=1)
            tail = (L.s[:, None] * (gp * up - gm * um)).sum(axis=0)
            return np.concatenate([head, tail]) / n

        return matvec, L.ambient_dim

    D = problem
    w = _as_vector(w, D.dim)
    r = sigmoid_prime(D.examples @ w)

    def matvec(v):
        v = _as_vector(v, D.dim, "v")
        return D.examples.T @ (r * (D.examples @ v)) / D.n

    return matvec, D.dim


def hvp(w, v, problem) -> np.ndarray:
    """Hessian-vector product at w, in O(n d) (or O(n_base d) when lifted)."""
    matvec, _ = hessian_operator(problem, w)
    return matvec(v)


def smoothness(D: Dataset) -> float:
    """Global curvature bound lambda_max(X^T X) / (4n) >= lambda_max(H(w)) for all w."""
    X = D.examples
    if D.dim <= D.n:
        gram = X.T @ X
    else:
        gram = X @ X.T
    return float(np.linalg.eigvalsh(gram)[-1] / (4.0 * D.n))


def lifted_loss(w, L: LiftedDataset) -> float:
    """Mean logistic loss over the implicit padded examples."""
    w = _as_vector(w, L.ambient_dim)
    a = L.base @ w[:2]
    sv = L.s[:, None] * w[2:][None, :]
    return float(
        (softplus(-(a[:, None] + sv)).sum() + softplus(-(a[:, None] - sv)).sum())
        / L.n_examples
    )


def lifted_grad(w, L: LiftedDataset) -> np.ndarray:
    """Gradient of the padded objective in O(n_base * d).

    Equals grad(w, L.materialize()) but reuses the n_base inner products:
    the implicit example (x_i, +-s_i e_j) has inner product a_i +- s_i w_{2+j}.
    """
    w = _as_vector(w, L.ambient_dim)
    a = L.base @ w[:2]
    sv = L.s[:, None] * w[2:][None, :]
    p = sigmoid(-(a[:, None] + sv))
    m = sigmoid(-(a[:, None] - sv))
    n = L.n_examples
    head = -(L.base.T @ (p + m).sum(axis=1)) / n
    tail = -(L.s[:, None] * (p - m)).sum(axis=0) / n
    return np.concatenate([head, tail])


def problem_dim(problem) -> int:
    """Ambient dimension of a Dataset or LiftedDataset."""
    if isinstance(problem, LiftedDataset):
        return problem.ambient_dim
    return problem.dim


def gradient_fn(problem):
    """Gradient callable for either dataset representation."""
    if isinstance(problem, LiftedDataset):
        return lambda w: lifted_grad(w, problem)
    return lambda w: grad(w, problem)
