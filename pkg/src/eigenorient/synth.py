"""Seeded synthetic fixtures.

All randomness comes from numpy's PCG64 bit generator (a documented, platform
independent stream) through ``Generator.random()`` uniforms; Gaussian draws
use the Box-Muller transform on those uniforms, so fixtures do not depend on
numpy's choice of normal sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dirstats import wrap_angle
from .errors import ArgumentError
from .orientation import AngleMatrix, EigenSystem, Method, generate_oriented_eigenvectors


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None or int(seed) != seed or seed < 0:
        raise ArgumentError(f"seed must be a nonnegative integer, got {seed!r}")
    return np.random.Generator(np.random.PCG64(int(seed)))


def gaussian(rng: np.random.Generator, size) -> np.ndarray:
    """Standard normals by Box-Muller."""
    count = int(np.prod(size))
    pairs = (count + 1) // 2
    u1 = 1.0 - rng.random(pairs)  # (0, 1]
    u2 = rng.random(pairs)
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.concatenate([r * np.cos(2.0 * math.pi * u2), r * np.sin(2.0 * math.pi * u2)])
    return z[:count].reshape(size)


def _major(rng, size=None):
    # uniform on (-pi, pi]
    return math.pi - 2.0 * math.pi * rng.random(size)


def _minor(rng, size=None):
    # uniform on [-pi/2, pi/2)
    return math.pi * rng.random(size) - 0.5 * math.pi


def random_angles(dim: int, rng, rows=None, angle_scale: float = 1.0) -> np.ndarray:
    """Upper-triangular angles: first of each row major, the rest minor."""
    theta = np.zeros((dim, dim))
    for k in range(dim - 1) if rows is None else rows:
        theta[k, k + 1] = _major(rng)
        if k + 2 < dim:
            theta[k, k + 2:] = _minor(rng, dim - k - 2)
    return theta * angle_scale


def random_orthonormal(dim: int, seed, force_reflection: bool = False, angle_scale: float = 1.0) -> np.ndarray:
    """Basis composed from ``N(N-1)/2`` uniformly drawn Givens angles.

    ``force_reflection`` negates the last column (det = -1). ``angle_scale``
    multiplies every angle; 0 gives the identity.
    """
    if dim < 2:
        raise ArgumentError("dim must be at least 2")
    rng = make_rng(seed)
    basis = generate_oriented_eigenvectors(AngleMatrix(random_angles(dim, rng, angle_scale=angle_scale)))
    if force_reflection:
        basis[:, -1] *= -1.0
    return basis


def geometric_profile(dim: int) -> np.ndarray:
    """``2**-k`` decay scaled to trace ``dim`` (correlation-like)."""
    lam = 0.5 ** np.arange(dim)
    return lam * (dim / lam.sum())


def default_base_angles(dim: int, directed_modes: int) -> np.ndarray:
    """Base angles placing each directed mode near a hemisphere boundary.

    First angles sit close to +/-pi/2, where arcsin orientation wraps around.
    """
    theta = np.zeros((dim, dim))
    firsts = (1.45, -1.62, 1.52, -1.48, 1.58)
    for k in range(directed_modes):
        theta[k, k + 1] = firsts[k % len(firsts)]
        if k + 2 < dim:
            theta[k, k + 2:] = 0.35 * np.cos(np.arange(k + 2, dim) + k)
    return theta


@dataclass(frozen=True)
class WobbleSpec:
    """A series whose first ``directed_modes`` modes wobble about base angles.

    ``reflection_parity`` of ``"even"`` / ``"odd"`` negates a random column
    subset of that parity at every step; ``None`` leaves bases in SO(N).
    """

    dim: int = 7
    directed_modes: int = 3
    angle_noise_sigma: float = 0.2
    series_length: int = 40
    seed: int = 0
    reflection_parity: Optional[str] = None
    base_angles: Optional[np.ndarray] = field(default=None, compare=False)
    eigenvalues: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        if self.dim < 2:
            raise ArgumentError("dim must be at least 2")
        if not (0 <= self.directed_modes <= self.dim - 1):
            raise ArgumentError(f"directed_modes must lie in [0, {self.dim - 1}]")
        if not (self.angle_noise_sigma >= 0.0):
            raise ArgumentError("sigma must be nonnegative")
        if self.series_length < 1:
            raise ArgumentError("series length must be at least 1")
        if self.reflection_parity not in (None, "even", "odd"):
            raise ArgumentError("reflection_parity must be None, 'even' or 'odd'")
        base = (
            default_base_angles(self.dim, self.directed_modes)
            if self.base_angles is None
            else AngleMatrix(self.base_angles, Method.ARCTAN2).theta
        )
        AngleMatrix(base, Method.ARCTAN2).check_ranges()
        object.__setattr__(self, "base_angles", np.array(base))
        lam = geometric_profile(self.dim) if self.eigenvalues is None else np.asarray(self.eigenvalues, dtype=np.float64)
        if lam.shape != (self.dim,) or np.any(np.diff(lam) > 0):
            raise ArgumentError("eigenvalue profile must be descending with one value per mode")
        object.__setattr__(self, "eigenvalues", lam)


def _parity_signs(rng, dim: int, parity: str) -> np.ndarray:
    signs = np.where(rng.random(dim) < 0.5, -1.0, 1.0)
    negatives = int(np.sum(signs < 0))
    want_odd = parity == "odd"
    if (negatives % 2 == 1) != want_odd:
        signs[-1] = -signs[-1]
    return signs


def wobble_series(spec: WobbleSpec) -> list[EigenSystem]:
    """Snapshots of a wobbling eigenbasis.

    Step 0 is the base configuration. Later steps add Gaussian noise of
    ``sigma`` to the first angle of every directed mode and redraw all angles
    of the undirected modes uniformly. ``sigma == 0`` freezes the whole
    series at the base configuration.
    """
    rng = make_rng(spec.seed)
    n, d = spec.dim, spec.directed_modes
    undirected = range(d, n - 1)
    out = []
    for step in range(spec.series_length):
        theta = np.array(spec.base_angles)
        if step > 0 and spec.angle_noise_sigma > 0.0:
            if d:
                noise = gaussian(rng, d)
                for k in range(d):
                    t = theta[k, k + 1] + spec.angle_noise_sigma * noise[k]
                    theta[k, k + 1] = t if -math.pi < t <= math.pi else wrap_angle(t)
            fresh = random_angles(n, rng, rows=undirected)
            theta[d:, :] = fresh[d:, :]
        basis = generate_oriented_eigenvectors(AngleMatrix(theta))
        if spec.reflection_parity is not None:
            basis = basis * _parity_signs(rng, n, spec.reflection_parity)
        out.append(EigenSystem(basis, spec.eigenvalues))
    return out


def gaussian_panel(dim: int, records: int, spikes=(), seed=0) -> np.ndarray:
    """``records x dim`` Gaussian panel with population covariance ``Q diag(spikes, 1, ...) Q.T``.

    Spike directions are the leading columns of a seeded random basis.
    """
    spikes = tuple(float(s) for s in spikes)
    if len(spikes) > dim:
        raise ArgumentError("more spikes than dimensions")
    if any(s <= 0 for s in spikes):
        raise ArgumentError("spike variances must be positive")
    rng = make_rng(seed)
    q = random_orthonormal(dim, rng)
    pop = np.ones(dim)
    pop[: len(spikes)] = spikes
    z = gaussian(rng, (records, dim))
    return (z * np.sqrt(pop)) @ q.T
