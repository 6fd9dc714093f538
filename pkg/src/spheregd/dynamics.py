"""Run GD trajectories and characterize their limit behaviour.

A trajectory keeps the full norm series, any sampled coordinates, and a
ring buffer of the last iterates at full precision, so cycle detection and
spectra never need all iterates of a long high-dimensional run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .model import (
    Dataset,
    DimensionTooLargeError,
    LiftedDataset,
    NonFiniteError,
    _as_vector,
    gradient_fn,
    hessian,
    problem_dim,
)


@dataclass(frozen=True)
class RecordSpec:
    """What to keep while iterating: sampled coordinate indices and the
    length of the full-iterate tail ring."""

    sample_coords: tuple = ()
    tail_window: int = 2048


@dataclass
class Trajectory:
    w0: np.ndarray
    eta: float
    steps_run: int
    norm_series: np.ndarray
    sampled_coords: dict
    tail: np.ndarray
    tail_start: int

    @property
    def final(self) -> np.ndarray:
        return self.tail[-1]

    def write_csv(self, fh, config_comment: str | None = None) -> None:
        """step, norm, and one column per sampled coordinate."""
        if config_comment:
            fh.write(f"# {config_comment}\n")
        idx = sorted(self.sampled_coords)
        fh.write("step,norm" + "".join(f",coord_{j}" for j in idx) + "\n")
        for t in range(self.steps_run + 1):
            row = f"{t},{self.norm_series[t]:.17g}"
            for j in idx:
                row += f",{self.sampled_coords[j][t]:.17g}"
            fh.write(row + "\n")


@dataclass
class CycleReport:
    """Detected period (1 = fixed point), recurrence residual, dominant
    spectral peaks, and optional Floquet multiplier magnitudes."""

    period: int
    recurrence_residual: float
    spectral_peaks: list = field(default_factory=list)
    floquet_multipliers: list | None = None

    def to_json(self) -> str:
        return json.dumps(
            {
                "period": self.period,
                "recurrence_residual": self.recurrence_residual,
                "spectral_peaks": [[f, p] for f, p in self.spectral_peaks],
                "floquet_multipliers": self.floquet_multipliers,
            },
            sort_keys=True,
        )


def run_gd(problem, w0, eta: float, steps: int, record: RecordSpec | None = None) -> Trajectory:
    """Iterate w <- w - eta * grad(w) for `steps` steps.

    Uses the structured gradient when the problem is a LiftedDataset.
    Deterministic given its inputs. Raises NonFiniteError with the step
    index if an iterate stops being finite.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    if steps < 0:
        raise ValueError("steps must be >= 0")
    record = record or RecordSpec()
    if record.tail_window < 1:
        raise ValueError("tail_window must be >= 1")
    dim = problem_dim(problem)
    g = gradient_fn(problem)
    w = _as_vector(w0, dim, "w0").copy()

    total = steps + 1
    keep = min(record.tail_window, total)
    norms = np.empty(total)
    coords = {int(j): np.empty(total) for j in record.sample_coords}
    for j in coords:
        if not (0 <= j < dim):
            raise ValueError(f"sampled coordinate {j} out of range for dim {dim}")
    ring = np.empty((keep, dim))

    for t in range(total):
        nrm = float(np.linalg.norm(w))
        if not np.isfinite(nrm):
            raise NonFiniteError(f"non-finite iterate at step {t}")
        norms[t] = nrm
        for j in coords:
            coords[j][t] = w[j]
        ring[t % keep] = w
        if t < steps:
            w = w - eta * g(w)

    split = total % keep
    tail = np.vstack([ring[split:], ring[:split]]) if split else ring
    return Trajectory(
        w0=np.asarray(w0, dtype=float),
        eta=float(eta),
        steps_run=steps,
        norm_series=norms,
        sampled_coords=coords,
        tail=tail,
        tail_start=total - keep,
    )


def detect_cycle_recurrence(
    traj: Trajectory, tol: float = 1e-7, max_period: int | None = None
) -> CycleReport | None:
    """Smallest k with ||w_{t+k} - w_t|| <= tol (1 + ||w_t||) across the
    whole tail window; None if no k up to half the window qualifies.

    Candidate periods are prescreened on the cheap norm series before the
    full-vector residual is evaluated.
    """
    tail = traj.tail
    m = len(tail)
    norms = traj.norm_series[traj.tail_start:]
    kmax = min(max_period or m // 2, m // 2)
    for k in range(1, kmax + 1):
        thresh = tol * (1.0 + norms[:-k])
        if (np.abs(norms[k:] - norms[:-k]) > thresh).any():
            continue
        res = np.linalg.norm(tail[k:] - tail[:-k], axis=1)
        if (res <= thresh).all():
            peaks = []
            win = _largest_pow2(min(1024, len(traj.norm_series)))
            if win >= 8:
                peaks = spectral_peaks(power_spectrum(traj.norm_series, win))
            return CycleReport(
                period=k,
                recurrence_residual=float(res.max()),
                spectral_peaks=peaks,
            )
    return None


def cycle_points(traj: Trajectory, period: int) -> np.ndarray:
    """One full period of iterates from the end of the tail, in orbit order."""
    if period < 1 or period > len(traj.tail):
        raise ValueError("period exceeds recorded tail")
    return traj.tail[-period:]


def _largest_pow2(n: int) -> int:
    return 1 << (int(n).bit_length() - 1) if n >= 1 else 0


def _bit_reverse_indices(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for _ in range(bits):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    return rev


def _fft_radix2(x: np.ndarray) -> np.ndarray:
    """Iterative radix-2 decimation-in-time transform (length a power of two)."""
    n = len(x)
    a = np.asarray(x, dtype=complex)[_bit_reverse_indices(n)]
    size = 2
    while size <= n:
        half = size // 2
        tw = np.exp(-2j * np.pi * np.arange(half) / size)
        blk = a.reshape(-1, size)
        even = blk[:, :half].copy()
        odd = blk[:, half:] * tw
        blk[:, :half] = even + odd
        blk[:, half:] = even - odd
        size *= 2
    return a


def power_spectrum(series, window: int = 1024):
    """Magnitude-squared spectrum of the mean-removed last `window` samples.

    Returns (frequencies, power) over the nonnegative frequencies j/window,
    j = 0..window/2. For an exactly k-periodic input all power sits at
    multiples of 1/k.
    """
    x = np.asarray(series, dtype=float)
    if window < 1 or window & (window - 1):
        raise ValueError("window must be a power of two")
    if window > x.size:
        raise ValueError(f"window {window} exceeds series length {x.size}")
    seg = x[-window:]
    seg = seg - seg.mean()
    F = _fft_radix2(seg)
    half = window // 2
    power = np.abs(F[: half + 1]) ** 2
    freqs = np.arange(half + 1) / window
    return freqs, power


def spectral_peaks(spectrum, max_peaks: int = 8, factor: float = 10.0):
    """Nonzero-frequency bins whose power exceeds `factor` times the median,
    strongest first, as (frequency, power) pairs."""
    freqs, power = spectrum
    p = power[1:]
    f = freqs[1:]
    if p.size == 0:
        return []
    med = float(np.median(p))
    order = np.argsort(p)[::-1]
    out = []
    for i in order[:max_peaks]:
        if p[i] > factor * med and p[i] > 0:
            out.append((float(f[i]), float(p[i])))
    return out


def dominant_period(spectrum, factor: float = 10.0) -> int | None:
    """round(1/f*) for the strongest nonzero frequency f*, provided its
    power exceeds `factor` times the median bin power; None otherwise."""
    freqs, power = spectrum
    p = power[1:]
    f = freqs[1:]
    if p.size == 0:
        return None
    i = int(np.argmax(p))
    med = float(np.median(p))
    if p[i] <= 0 or p[i] <= factor * med:
        return None
    return int(round(1.0 / f[i]))


def floquet_multipliers(points, eta: float, problem, dim_limit: int = 64):
    """Eigenvalue magnitudes of the product of per-step Jacobians
    prod_j (I - eta H(w_j)) around a cycle, largest first.

    All magnitudes < 1 means the cycle attracts nearby trajectories.
    Materializes Hessians, so guarded to small dimension.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    d = pts.shape[1]
    if d > dim_limit:
        raise DimensionTooLargeError(
            f"floquet_multipliers materializes {d}x{d} Jacobians (limit {dim_limit})"
        )
    if isinstance(problem, LiftedDataset):
        problem = problem.materialize(limit=dim_limit)
    J = np.eye(d)
    for w in pts:
        J = (np.eye(d) - eta * hessian(w, problem)) @ J
    mags = np.abs(np.linalg.eigvals(J))
    return sorted((float(v) for v in mags), reverse=True)
