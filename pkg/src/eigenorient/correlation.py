"""Correlation matrices rebuilt from (possibly filtered) eigensystems."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import ArgumentError, DegenerateError, ValidationError
from .matcore import as_matrix

SCALE_FLOOR = 1e-14
NEGATIVE_TOL = 1e-12


def sample_correlation(panel) -> np.ndarray:
    """Pearson correlation of a ``records x features`` panel.

    Requires more records than features; otherwise the panel is singular.
    """
    p = as_matrix(panel, square=False, name="panel")
    t, n = p.shape
    if n < 2:
        raise ValidationError("panel needs at least two feature columns")
    if t <= n:
        raise ValidationError(f"panel has T={t} records for N={n} features; need T > N")
    z = p - p.mean(axis=0)
    sd = np.sqrt(np.sum(z * z, axis=0))
    if np.any(sd == 0.0):
        raise ValidationError("panel has a constant column")
    z = z / sd
    c = z.T @ z
    c = 0.5 * (c + c.T)
    np.fill_diagonal(c, 1.0)
    return c


def reconstruct_correlation(basis, eigenvalues) -> np.ndarray:
    """``diag(1/s) (V diag(lambda) V.T) diag(1/s)`` with ``s`` the root diagonal.

    The outer scaling removes the small diagonal drift left by filtering, so
    the result has an exact unit diagonal.
    """
    v = as_matrix(basis, name="basis")
    lam = np.asarray(eigenvalues, dtype=np.float64).ravel()
    if lam.shape[0] != v.shape[1]:
        raise ArgumentError(f"need {v.shape[1]} eigenvalues, got {lam.shape[0]}")
    if not np.all(np.isfinite(lam)):
        raise ArgumentError("eigenvalues must be finite")
    # roundoff negatives from an eigensolver are clipped to zero
    if np.any(lam < -NEGATIVE_TOL * max(1.0, float(np.max(np.abs(lam))))):
        raise ArgumentError("eigenvalues must be nonnegative")
    lam = np.clip(lam, 0.0, None)
    c0 = (v * lam) @ v.T
    c0 = 0.5 * (c0 + c0.T)
    d = np.diag(c0)
    if np.any(d <= SCALE_FLOOR):
        raise DegenerateError("a reconstructed variance vanished; cannot rescale to unit diagonal")
    inv = 1.0 / np.sqrt(d)
    c = c0 * np.outer(inv, inv)
    c = 0.5 * (c + c.T)
    np.fill_diagonal(c, 1.0)
    return c


@dataclass(frozen=True)
class DispersionReport:
    """Entrywise statistics of a correlation series (sample stdev, ddof=1)."""

    minimum: np.ndarray
    maximum: np.ndarray
    mean: np.ndarray
    stdev: np.ndarray
    count: int
    single_sample: bool

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def entries(self) -> Iterator[tuple[int, int, float, float, float, float]]:
        """``(i, j, min, max, mean, stdev)`` for each off-diagonal pair ``i < j``."""
        n = self.dim
        for i in range(n):
            for j in range(i + 1, n):
                yield (
                    i,
                    j,
                    float(self.minimum[i, j]),
                    float(self.maximum[i, j]),
                    float(self.mean[i, j]),
                    float(self.stdev[i, j]),
                )


def dispersion_report(series: Sequence) -> DispersionReport:
    mats = [as_matrix(m, name="correlation") for m in series]
    if not mats:
        raise ArgumentError("dispersion needs at least one matrix")
    if len({m.shape for m in mats}) != 1:
        raise ArgumentError("correlation matrices must share a dimension")
    stack = np.stack(mats)
    count = stack.shape[0]
    single = count == 1
    lo, hi = stack.min(axis=0), stack.max(axis=0)
    # constant entries get an exact zero rather than mean roundoff
    stdev = np.zeros(stack.shape[1:]) if single else np.where(lo == hi, 0.0, np.std(stack, axis=0, ddof=1))
    return DispersionReport(
        minimum=lo,
        maximum=hi,
        mean=stack.mean(axis=0),
        stdev=stdev,
        count=count,
        single_sample=single,
    )
