"""Marchenko-Pastur analysis and noise-subspace shrinkage.

The MP law gives the eigenvalue density of a pure-noise sample correlation
matrix with aspect ratio ``q = N / T``. Modes whose eigenvalues exceed the
(rescaled) upper edge are informative; the rest are indistinguishable from
sampling noise. Informative modes can be rotated away with their Givens
cascades so that the remaining noise block can be shrunk on its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .matcore import as_matrix, compose_cascade
from .orientation import OrientationResult


def mp_support(q: float) -> tuple[float, float]:
    """``((1 - sqrt q)^2, (1 + sqrt q)^2)``."""
    if not (q > 0.0) or not math.isfinite(q):
        raise ArgumentError(f"q must be positive, got {q}")
    r = math.sqrt(q)
    return (1.0 - r) ** 2, (1.0 + r) ** 2


def mp_density(lam, q: float):
    """Marchenko-Pastur density; zero outside the support. Vectorized over ``lam``."""
    lo, hi = mp_support(q)
    x = np.asarray(lam, dtype=np.float64)
    inside = (x > lo) & (x < hi)
    safe = np.where(inside, x, 1.0)
    rho = np.where(inside, np.sqrt(np.clip((hi - safe) * (safe - lo), 0.0, None)) / (2.0 * math.pi * q * safe), 0.0)
    return float(rho) if rho.ndim == 0 else rho


def rescaled_mp_density(lam, q: float, lambda_bar: float):
    """``rho(lam / lambda_bar) / lambda_bar``; support scales by ``lambda_bar``."""
    if not (lambda_bar > 0.0):
        raise ArgumentError(f"lambda_bar must be positive, got {lambda_bar}")
    x = np.asarray(lam, dtype=np.float64)
    rho = mp_density(x / lambda_bar, q) / lambda_bar
    return float(rho) if np.ndim(rho) == 0 else rho


@dataclass(frozen=True)
class MPModel:
    q: float
    lambda_minus: float
    lambda_plus: float
    lambda_bar: float = 1.0

    @classmethod
    def from_q(cls, q: float, lambda_bar: float = 1.0) -> "MPModel":
        if not (lambda_bar > 0.0):
            raise ArgumentError(f"lambda_bar must be positive, got {lambda_bar}")
        lo, hi = mp_support(q)
        return cls(q, lo, hi, lambda_bar)

    @property
    def support(self) -> tuple[float, float]:
        """Rescaled support ``[lambda_bar * lambda_-, lambda_bar * lambda_+]``."""
        return self.lambda_bar * self.lambda_minus, self.lambda_bar * self.lambda_plus

    def density(self, lam):
        return rescaled_mp_density(lam, self.q, self.lambda_bar)

    def grid(self, points: int = 4001) -> np.ndarray:
        """Cosine-spaced grid over the rescaled support (dense near the edges)."""
        lo, hi = self.support
        phi = np.linspace(0.0, math.pi, points)
        return 0.5 * (lo + hi) - 0.5 * (hi - lo) * np.cos(phi)


@dataclass(frozen=True)
class ClassificationStep:
    """One test of the iteration: mode ``index`` against the model's edge."""

    index: int
    eigenvalue: float
    model: MPModel
    edge: float
    informative: bool


@dataclass(frozen=True)
class ModeClassification:
    informative: tuple[int, ...]
    noise: tuple[int, ...]
    steps: tuple[ClassificationStep, ...]

    @property
    def count(self) -> int:
        return len(self.informative)

    @property
    def model(self) -> MPModel:
        """The noise model in force when the iteration stopped."""
        return self.steps[-1].model


def classify_modes(eigenvalues, T: int, edge_multiplier: float = 1.0) -> ModeClassification:
    """Split descending eigenvalues into an informative prefix and noise.

    Starting from ``K = 0``, the noise model for the trailing modes ``K..N-1``
    uses ``lambda_bar = mean(lambda[K:])`` and ``q' = (N - K) / T``; mode ``K``
    is informative if it exceeds ``edge_multiplier * lambda_bar * lambda_+(q')``.
    The loop stops at the first mode inside the bulk.
    """
    lam = np.asarray(eigenvalues, dtype=np.float64).ravel()
    n = lam.shape[0]
    if n < 2:
        raise ArgumentError("need at least two eigenvalues")
    if not (T > n):
        raise ArgumentError(f"need T > N, got T={T}, N={n}")
    if not np.all(np.isfinite(lam)):
        raise ArgumentError("eigenvalues must be finite")
    scale = max(1.0, float(np.max(np.abs(lam))))
    if np.any(lam < -1e-10 * scale):
        raise ArgumentError("eigenvalues must be nonnegative")
    if np.any(np.diff(lam) > 1e-12 * scale):
        raise ArgumentError("eigenvalues must be sorted in descending order")
    if not (edge_multiplier > 0.0):
        raise ArgumentError("edge multiplier must be positive")

    steps = []
    k = 0
    while k < n:
        lam_bar = float(np.mean(lam[k:]))
        if lam_bar <= 0.0:
            break
        model = MPModel.from_q((n - k) / T, lam_bar)
        edge = edge_multiplier * lam_bar * model.lambda_plus
        hit = bool(lam[k] > edge)
        steps.append(ClassificationStep(k, float(lam[k]), model, edge, hit))
        if not hit:
            break
        k += 1
    return ModeClassification(tuple(range(k)), tuple(range(k, n)), tuple(steps))


def _check_k(result: OrientationResult, k: int) -> None:
    if not (0 <= k <= result.dim - 1):
        raise ArgumentError(f"informative count must lie in [0, {result.dim - 1}], got {k}")


def subspace_rotations(result: OrientationResult, k: int) -> list[np.ndarray]:
    """The cascades ``R_1 ... R_K`` of the first ``K`` subspaces."""
    _check_k(result, k)
    n = result.dim
    return [compose_cascade(n, i, result.angles.row(i)) for i in range(k)]


def rotate_away_informative(result: OrientationResult, k: int):
    """``R_K.T ... R_1.T V``: identity in the top-left ``K x K`` block.

    Returns the rotated matrix and the list ``[R_1, ..., R_K]`` needed by
    :func:`rotate_back`.
    """
    rotations = subspace_rotations(result, k)
    m = np.array(result.oriented_basis)
    for r in rotations:
        m = r.T @ m
    return m, rotations


def rotate_back(m, rotations) -> np.ndarray:
    """Inverse of :func:`rotate_away_informative`: ``R_1 ... R_K m``."""
    out = np.array(m, dtype=np.float64)
    for r in reversed(rotations):
        out = r @ out
    return out


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (0.0 <= alpha <= 1.0):
        raise ArgumentError(f"alpha must lie in [0, 1], got {alpha}")
    return alpha


def lw_shrink(corr, alpha: float) -> np.ndarray:
    """Linear shrinkage toward the identity: ``alpha * corr + (1 - alpha) * I``."""
    alpha = _check_alpha(alpha)
    c = as_matrix(corr, name="correlation")
    if np.max(np.abs(c - c.T), initial=0.0) > 1e-8:
        raise ArgumentError("correlation matrix must be symmetric")
    if np.max(np.abs(np.diag(c) - 1.0), initial=0.0) > 1e-8:
        raise ArgumentError("correlation matrix must have a unit diagonal")
    if c.shape[0] and np.min(np.linalg.eigvalsh(0.5 * (c + c.T))) < -1e-8:
        raise ArgumentError("correlation matrix must be positive semidefinite")
    return alpha * c + (1.0 - alpha) * np.eye(c.shape[0])


def shrink_noise_subspace(result: OrientationResult, eigenvalues=None, k: int = 0, alpha: float = 1.0) -> np.ndarray:
    """Shrink only the noise block of ``V diag(lambda) V.T``.

    The informative modes are rotated away, the noise block is rebuilt from
    the noise eigenvectors and eigenvalues and blended with the identity,
    and the result is rotated back. ``eigenvalues`` default to the result's
    sorted eigenvalues.
    """
    alpha = _check_alpha(alpha)
    lam = result.sorted_eigenvalues if eigenvalues is None else np.asarray(eigenvalues, dtype=np.float64).ravel()
    n = result.dim
    if lam.shape[0] != n:
        raise ArgumentError(f"need {n} eigenvalues, got {lam.shape[0]}")
    if np.any(lam < -1e-12 * max(1.0, float(np.max(np.abs(lam))))):
        raise ArgumentError("eigenvalues must be nonnegative")
    lam = np.clip(lam, 0.0, None)
    rotated, rotations = rotate_away_informative(result, k)
    w_noise = rotated[k:, k:]
    noise = (w_noise * lam[k:]) @ w_noise.T
    block = np.zeros((n, n))
    block[:k, :k] = np.diag(lam[:k])
    block[k:, k:] = alpha * noise + (1.0 - alpha) * np.eye(n - k)
    q = rotate_back(np.eye(n), rotations)
    out = q @ block @ q.T
    return 0.5 * (out + out.T)
