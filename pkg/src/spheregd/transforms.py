"""Scaling invariance of GD trajectories and a search for planar base
datasets whose GD dynamics settle into a stable cycle.

Scaling a dataset by c > 0 maps the minimizer to w*/c, the threshold
curvature to c^2 lambda, and any trajectory run with the matched step size
to w_t / c, so cycles transfer between scales. The hunt produces the base
datasets the lifting construction needs; the paper-style counterexamples
are not published, so candidates are sampled and every hit is re-verified
from a perturbed point on its cycle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .dynamics import (
    CycleReport,
    RecordSpec,
    cycle_points,
    detect_cycle_recurrence,
    floquet_multipliers,
    run_gd,
)
from .model import Dataset, NonFiniteError
from .solver import SeparableDatasetError, solve_newton


def scale_dataset(D: Dataset, factor: float) -> Dataset:
    """Multiply every example by factor > 0."""
    if factor <= 0:
        raise ValueError("scale factor must be positive")
    return Dataset(D.examples * factor)


def verify_scaling(
    D: Dataset,
    factor: float,
    w0,
    gamma: float,
    steps: int,
    newton_tol: float = 1e-12,
) -> float:
    """Run GD on D from w0 and on factor*D from w0/factor, each with its
    own matched step size, and return the worst relative deviation
    max_t ||w_hat_t - w_t/factor|| / (1 + ||w_t/factor||).

    The two runs are each other's oracle; agreement is expected at the
    1e-10 level.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    w0 = np.asarray(w0, dtype=float)
    rep = solve_newton(D, tol=newton_tol)
    traj = run_gd(D, w0, gamma / rep.lambda_max, steps, RecordSpec(tail_window=steps + 1))
    Dhat = scale_dataset(D, factor)
    rep_hat = solve_newton(Dhat, tol=newton_tol)
    traj_hat = run_gd(
        Dhat, w0 / factor, gamma / rep_hat.lambda_max, steps,
        RecordSpec(tail_window=steps + 1),
    )
    ref = traj.tail / factor
    dev = np.linalg.norm(traj_hat.tail - ref, axis=1)
    scale = 1.0 + np.linalg.norm(ref, axis=1)
    return float((dev / scale).max())


@dataclass(frozen=True)
class ClusterSpec:
    """Generator for random planar non-separable problems: two Gaussian
    clusters with means +-mu and shared isotropic covariance, with a
    fraction of labels flipped to rule out separability."""

    n_examples: int = 12
    separation: float = 4.0
    spread: float = 1.0
    flip_fraction: float = 0.25
    init_scale: float = 8.0


def sample_cluster_dataset(rng: np.random.Generator, spec: ClusterSpec) -> Dataset:
    n = spec.n_examples
    direction = rng.standard_normal(2)
    direction /= np.linalg.norm(direction)
    mu = 0.5 * spec.separation * direction
    half = n // 2
    labels = np.where(np.arange(n) < half, 1.0, -1.0)
    centers = np.where(labels[:, None] > 0, mu, -mu)
    X = centers + spec.spread * rng.standard_normal((n, 2))
    n_flip = max(1, int(round(spec.flip_fraction * n)))
    flip = rng.choice(n, size=n_flip, replace=False)
    labels[flip] *= -1.0
    return Dataset.from_arrays(X, labels)


@dataclass
class HuntResult:
    """A dataset on which GD with eta = gamma/lambda reached a stable cycle,
    with the fraction of probed initializations that reach it."""

    dataset: Dataset
    gamma: float
    cycle: CycleReport
    basin_sample: float

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "gamma": self.gamma,
                "period": self.cycle.period,
                "recurrence_residual": self.cycle.recurrence_residual,
                "floquet_multipliers": self.cycle.floquet_multipliers,
                "basin_sample": self.basin_sample,
                "dataset_csv": self.dataset.to_csv_text(),
            },
            sort_keys=True,
        )


def _reaches_cycle(D, eta, w0, period, budget, tol):
    try:
        traj = run_gd(D, w0, eta, budget, RecordSpec(tail_window=1024))
    except NonFiniteError:
        return False
    rep = detect_cycle_recurrence(traj, tol)
    return rep is not None and rep.period == period


def hunt_cycles(
    gamma: float,
    trials: int,
    seed: int,
    budget: int = 6000,
    generator: ClusterSpec | None = None,
    probes: int = 12,
    tol: float = 1e-7,
):
    """Sample random planar problems and keep those on which GD with
    eta = gamma/lambda settles into a stable cycle.

    A hit needs a recurrence period >= 2, all Floquet magnitudes < 1, and a
    successful re-run from a perturbed point on the cycle (a long transient
    can masquerade as a cycle under recurrence alone). Deterministic given
    the seed; an empty result list is a valid outcome.
    """
    if not (0.0 < gamma < 2.0):
        raise ValueError("hunt requires 0 < gamma < 2")
    spec = generator or ClusterSpec()
    results = []
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        D = sample_cluster_dataset(rng, spec)
        try:
            rep = solve_newton(D)
        except (SeparableDatasetError, NonFiniteError):
            continue
        eta = gamma / rep.lambda_max
        w0 = rep.w_star + spec.init_scale * rng.standard_normal(2)
        try:
            traj = run_gd(D, w0, eta, budget, RecordSpec(tail_window=1024))
        except NonFiniteError:
            continue
        cyc = detect_cycle_recurrence(traj, tol)
        if cyc is None or cyc.period < 2:
            continue
        pts = cycle_points(traj, cyc.period)
        mults = floquet_multipliers(pts, eta, D)
        if mults[0] >= 1.0:
            continue
        bump = rng.standard_normal(2)
        bump *= 1e-6 / np.linalg.norm(bump)
        if not _reaches_cycle(D, eta, pts[-1] + bump, cyc.period, budget, tol):
            continue
        hits = sum(
            _reaches_cycle(
                D, eta,
                rep.w_star + spec.init_scale * rng.standard_normal(2),
                cyc.period, budget, tol,
            )
            for _ in range(probes)
        )
        cyc.floquet_multipliers = mults
        results.append(
            HuntResult(
                dataset=D,
                gamma=gamma,
                cycle=cyc,
                basin_sample=hits / probes if probes else 0.0,
            )
        )
    return results
