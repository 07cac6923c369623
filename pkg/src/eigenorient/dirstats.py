"""Directional statistics over evolving eigensystems.

Participation scores, resultant-vector averaging, dynamic stabilization
(filtering oriented eigenbases with a positive kernel, then re-orienting) and
static stabilization (zeroing the angles of noise modes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ArgumentError, DegenerateError
from .orientation import (
    AngleMatrix,
    Method,
    OrientationResult,
    _method,
    _orient,
    generate_oriented_eigenvectors,
)

DEGENERATE_NORM = 1e-12


def inverse_participation_ratio(v) -> float:
    """Sum of fourth powers of a unit vector's entries, in [1/N, 1]."""
    v = np.asarray(v, dtype=np.float64).ravel()
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ArgumentError("participation of a zero vector is undefined")
    if abs(norm - 1.0) > 1e-10:
        raise ArgumentError(f"expected a unit vector, got norm {norm:.12g}")
    return float(np.sum(v**4))


def participation_score(v) -> float:
    """``1 / (N * IPR)``: 1 when all entries participate equally, 1/N for a one-hot vector."""
    v = np.asarray(v, dtype=np.float64).ravel()
    return 1.0 / (v.shape[0] * inverse_participation_ratio(v))


def average_direction(vectors, weights=None) -> np.ndarray:
    """Direction of the weighted resultant of ``vectors`` (one per row)."""
    vs = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    if vs.shape[0] == 0:
        raise ArgumentError("need at least one vector")
    w = np.ones(vs.shape[0]) if weights is None else np.asarray(weights, dtype=np.float64).ravel()
    if w.shape[0] != vs.shape[0]:
        raise ArgumentError("one weight per vector required")
    if np.any(w <= 0.0):
        raise ArgumentError("weights must be positive")
    resultant = w @ vs
    norm = float(np.linalg.norm(resultant))
    if norm < DEGENERATE_NORM:
        raise DegenerateError("resultant vanished (antipodal cancellation)")
    return resultant / norm


def mean_resultant_length(angles) -> float:
    """Length of the mean unit phasor of ``angles`` (radians)."""
    a = np.asarray(angles, dtype=np.float64).ravel()
    if a.size == 0:
        raise ArgumentError("need at least one angle")
    return float(np.hypot(np.mean(np.cos(a)), np.mean(np.sin(a))))


def circular_variance(angles) -> float:
    """``1 - R`` with ``R`` the mean resultant length."""
    return 1.0 - mean_resultant_length(angles)


def wrap_angle(theta):
    """Map angles into (-pi, pi]."""
    t = np.asarray(theta, dtype=np.float64)
    w = np.mod(t + math.pi, 2.0 * math.pi) - math.pi
    w = np.where(w == -math.pi, math.pi, w)
    return float(w) if np.ndim(w) == 0 else w


@dataclass(frozen=True)
class FilterKernel:
    """Positive impulse response ``h[0], h[1], ...`` (``h[0]`` weights the newest sample)."""

    weights: tuple[float, ...]
    normalized: bool = True

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if not w:
            raise ArgumentError("kernel needs at least one weight")
        if not all(math.isfinite(x) and x > 0.0 for x in w):
            raise ArgumentError("kernel weights must be finite and positive")
        if self.normalized:
            total = math.fsum(w)
            w = tuple(x / total for x in w)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.weights)

    @property
    def delay(self) -> float:
        """Weighted mean lag in samples."""
        w = self.array
        return float(np.dot(np.arange(w.shape[0]), w) / np.sum(w))


@dataclass(frozen=True)
class EigenSeries:
    """Time-ordered oriented snapshots sharing dimension and method."""

    snapshots: tuple[OrientationResult, ...]
    timestamps: tuple = ()

    def __post_init__(self):
        snaps = tuple(self.snapshots)
        if not snaps:
            raise ArgumentError("an eigen series needs at least one snapshot")
        stamps = tuple(self.timestamps) if self.timestamps else tuple(range(len(snaps)))
        if len(stamps) != len(snaps):
            raise ArgumentError("one timestamp per snapshot required")
        if any(not (a < b) for a, b in zip(stamps, stamps[1:])):
            raise ArgumentError("timestamps must be strictly increasing")
        dims = {s.dim for s in snaps}
        methods = {s.method for s in snaps}
        if len(dims) != 1 or len(methods) != 1:
            raise ArgumentError("snapshots must share dimension and method")
        object.__setattr__(self, "snapshots", snaps)
        object.__setattr__(self, "timestamps", stamps)

    def __len__(self) -> int:
        return len(self.snapshots)

    @property
    def dim(self) -> int:
        return self.snapshots[0].dim

    @property
    def method(self) -> Method:
        return self.snapshots[0].method

    def bases(self) -> np.ndarray:
        return np.stack([s.oriented_basis for s in self.snapshots])

    def eigenvalues(self) -> np.ndarray:
        return np.stack([s.sorted_eigenvalues for s in self.snapshots])

    def angles(self) -> np.ndarray:
        return np.stack([s.angles.theta for s in self.snapshots])


@dataclass(frozen=True)
class StabilizedSeries:
    bases: tuple[np.ndarray, ...]
    angle_matrices: tuple[AngleMatrix, ...]
    eigenvalues: tuple[np.ndarray, ...]
    delay: float
    timestamps: tuple = ()

    def __len__(self) -> int:
        return len(self.bases)

    def angles(self) -> np.ndarray:
        return np.stack([a.theta for a in self.angle_matrices])


def _kernel(kernel) -> FilterKernel:
    return kernel if isinstance(kernel, FilterKernel) else FilterKernel(tuple(kernel))


def _convolve_valid(stack: np.ndarray, h: np.ndarray) -> np.ndarray:
    # out[m] = sum_k h[k] stack[m + L - 1 - k]; causal, fully covered windows only
    L = h.shape[0]
    count = stack.shape[0] - L + 1
    out = np.zeros((count,) + stack.shape[1:])
    for k in range(L):
        out += h[k] * stack[L - 1 - k: L - 1 - k + count]
    return out


def filter_eigenvalues(series: EigenSeries, kernel) -> np.ndarray:
    """Convolve each eigenvalue index with the normalized kernel (valid windows)."""
    kernel = _kernel(kernel)
    if len(series) < len(kernel):
        raise ArgumentError(f"series of length {len(series)} is shorter than the kernel ({len(kernel)})")
    h = kernel.array / np.sum(kernel.array)
    return _convolve_valid(series.eigenvalues(), h)


def filter_eigenbases(series: EigenSeries, kernel, method=Method.ARCTAN2) -> StabilizedSeries:
    """Dynamic stabilization of an oriented series.

    Each window's bases are averaged column by column with the kernel weights
    (resultant vectors), columns are rescaled to unit length, and the result
    is re-oriented (filtered eigenvalues give the sort order) and regenerated
    from its angles, which restores an exact rotation matrix.
    """
    kernel = _kernel(kernel)
    method = _method(method)
    if len(series) < len(kernel):
        raise ArgumentError(f"series of length {len(series)} is shorter than the kernel ({len(kernel)})")
    h = kernel.array / np.sum(kernel.array)
    summed = _convolve_valid(series.bases(), h)
    evals = _convolve_valid(series.eigenvalues(), h)
    bases, angles = [], []
    for m, e in zip(summed, evals):
        norms = np.linalg.norm(m, axis=0)
        if np.any(norms < DEGENERATE_NORM):
            raise DegenerateError("a filtered eigenvector collapsed to zero length")
        res = _orient(m / norms, e, method, False)
        angles.append(res.angles)
        bases.append(generate_oriented_eigenvectors(res.angles))
    return StabilizedSeries(
        bases=tuple(bases),
        angle_matrices=tuple(angles),
        eigenvalues=tuple(evals),
        delay=kernel.delay,
        timestamps=tuple(series.timestamps[len(kernel) - 1:]),
    )


def static_stabilize(angles: AngleMatrix, informative_count: int) -> AngleMatrix:
    """Keep the angle rows of the first ``K`` modes and zero the rest."""
    n = angles.dim
    if not (0 <= informative_count <= n - 1):
        raise ArgumentError(f"informative count must lie in [0, {n - 1}], got {informative_count}")
    theta = np.array(angles.theta)
    theta[informative_count:, :] = 0.0
    return AngleMatrix(theta, angles.method)


def modal_basis(angles: AngleMatrix, informative_count: int) -> np.ndarray:
    """``R_1 ... R_K``: the oriented basis with noise-mode rotations removed."""
    return generate_oriented_eigenvectors(static_stabilize(angles, informative_count))


def static_stabilize_series(series: EigenSeries, informative_count: int) -> EigenSeries:
    """Static stabilization of every snapshot; the output can be filtered afterwards."""
    snaps = []
    for s in series.snapshots:
        modal = static_stabilize(s.angles, informative_count)
        snaps.append(
            OrientationResult(
                oriented_basis=generate_oriented_eigenvectors(modal),
                sorted_eigenvalues=s.sorted_eigenvalues,
                angles=modal,
                reflections=s.reflections,
                sort_indices=s.sort_indices,
                method=s.method,
            )
        )
    return EigenSeries(tuple(snaps), series.timestamps)


def adjacent_jumps(angles: Sequence[float], threshold: float = math.pi / 2) -> int:
    """Number of adjacent steps whose wrapped angular difference exceeds ``threshold``."""
    a = np.asarray(angles, dtype=np.float64).ravel()
    if a.size < 2:
        return 0
    diffs = np.abs(wrap_angle(np.diff(a)))
    return int(np.sum(diffs > threshold))
