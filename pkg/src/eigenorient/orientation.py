"""Consistent orientation of eigenvector matrices.

An orthonormal basis ``V`` is factored as ``R.T @ V @ diag(S) = I`` where ``R``
is a product of Givens cascades (one per reducible subspace) and ``S`` holds
+/-1 reflections. Two solvers for the cascade angles are provided:

``arcsin``
    Angles are minor (in [-pi/2, pi/2]); a reflection is recorded whenever the
    pivot entry of a subspace points into the back hemisphere.

``arctan2``
    The first angle of every subspace is major (in (-pi, pi]) and replaces the
    reflection, so at most the last entry of ``S`` is negative (plus the first
    one when orienting to the first orthant).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import ArgumentError, DegenerateError
from .matcore import apply_cascade_right, apply_cascade_transposed, as_matrix, is_orthonormal

ORTHONORMAL_TOL = 1e-8
UNIT_NORM_TOL = 1e-10
# entries with |a_k| <= ZERO_TOL * |a| are structural zeros for the sparse rules
ZERO_TOL = 1e-13
# cosine products below this make arcsin ratios meaningless
COS_PRODUCT_FLOOR = 1e-14
ANGLE_RANGE_TOL = 1e-12


class Method(str, Enum):
    ARCSIN = "arcsin"
    ARCTAN2 = "arctan2"


def _method(method) -> Method:
    try:
        return Method(method)
    except ValueError:
        raise ArgumentError(f"unknown method {method!r}; expected 'arcsin' or 'arctan2'") from None


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class EigenSystem:
    """An orthonormal eigenvector matrix (columns) and its eigenvalues."""

    basis: np.ndarray
    eigenvalues: np.ndarray
    tol: float = field(default=ORTHONORMAL_TOL, repr=False, compare=False)

    def __post_init__(self):
        basis = as_matrix(self.basis, name="basis")
        eigenvalues = np.array(self.eigenvalues, dtype=np.float64).ravel()
        if eigenvalues.shape[0] != basis.shape[0]:
            raise ArgumentError(
                f"{basis.shape[0]}x{basis.shape[0]} basis needs {basis.shape[0]} eigenvalues, got {eigenvalues.shape[0]}"
            )
        if not np.all(np.isfinite(eigenvalues)):
            raise ArgumentError("eigenvalues must be finite")
        if not is_orthonormal(basis, self.tol):
            raise ArgumentError(f"basis is not orthonormal within {self.tol:g}")
        object.__setattr__(self, "basis", _frozen(basis))
        object.__setattr__(self, "eigenvalues", _frozen(eigenvalues))

    @property
    def dim(self) -> int:
        return self.basis.shape[0]


@dataclass(frozen=True)
class AngleMatrix:
    """Strictly upper-triangular matrix of Givens angles.

    Row ``k`` holds the cascade angles of subspace ``k``; entry ``(k, j)`` is
    the angle of the plane ``(k, j)``.
    """

    theta: np.ndarray
    method: Method | None = None

    def __post_init__(self):
        theta = as_matrix(self.theta, name="angle matrix")
        if np.any(np.tril(theta) != 0.0):
            raise ArgumentError("angle matrix must be strictly upper triangular")
        object.__setattr__(self, "theta", _frozen(theta))
        if self.method is not None:
            object.__setattr__(self, "method", _method(self.method))

    @property
    def dim(self) -> int:
        return self.theta.shape[0]

    @classmethod
    def zeros(cls, dim: int, method=None) -> "AngleMatrix":
        return cls(np.zeros((dim, dim)), method)

    def row(self, k: int) -> np.ndarray:
        """Angles of subspace ``k`` for planes ``(k, k+1) ... (k, N-1)``."""
        return self.theta[k, k + 1:]

    def check_ranges(self, method=None, tol: float = ANGLE_RANGE_TOL) -> None:
        """Raise ArgumentError if any angle lies outside its method's range."""
        method = self.method if method is None else _method(method)
        if method is None:
            return
        first, rest = _range_masks(self.dim)
        if method is Method.ARCTAN2:
            t = self.theta[first]
            if np.any(t <= -math.pi - tol) or np.any(t > math.pi + tol):
                raise ArgumentError("arctan2 first angles must lie in (-pi, pi]")
            minor = self.theta[rest]
        else:
            minor = self.theta[first | rest]
        if np.any(np.abs(minor) > math.pi / 2 + tol):
            raise ArgumentError(f"{method.value} minor angles must lie in [-pi/2, pi/2]")


@lru_cache(maxsize=128)
def _range_masks(n: int):
    idx = np.arange(n)
    offset = idx[None, :] - idx[:, None]
    return offset == 1, offset > 1


@dataclass(frozen=True)
class OrientationResult:
    """Output of :func:`orient_eigenvectors`.

    ``oriented_basis`` equals the sorted basis times ``diag(reflections)`` and
    lies in SO(N); ``sort_indices[k]`` is the input column placed at ``k``.
    """

    oriented_basis: np.ndarray
    sorted_eigenvalues: np.ndarray
    angles: AngleMatrix
    reflections: np.ndarray
    sort_indices: np.ndarray
    method: Method

    @property
    def dim(self) -> int:
        return self.oriented_basis.shape[0]

    @property
    def sorted_basis(self) -> np.ndarray:
        """The sorted input basis, reflections undone."""
        return self.oriented_basis * self.reflections


def sort_eigenvectors(sys: EigenSystem):
    """Order columns by descending ``|eigenvalue|``, ties kept in input order."""
    perm = np.argsort(-np.abs(sys.eigenvalues), kind="stable")
    return EigenSystem(sys.basis[:, perm], sys.eigenvalues[perm], sys.tol), perm


def _arcsin_angles(a: list[float]) -> list[float]:
    # a is the unit sub-column with a[0] >= 0; solve bottom-up.
    # theta_k = arcsin(a_k / prod of later cosines). That product equals the
    # norm of a[0..k], so theta_k = atan2(a_k, |a[0..k-1]|): same angle, same
    # [-pi/2, pi/2] range, but accurate near +/-pi/2 where arcsin is not.
    n = len(a)
    angles = [0.0] * (n - 1)
    partial = [0.0] * n
    acc = 0.0
    for k in range(n):
        acc += a[k] * a[k]
        partial[k] = acc
    for k in range(n - 1, 0, -1):
        if math.sqrt(partial[k]) < COS_PRODUCT_FLOOR:
            if abs(a[k]) > ZERO_TOL:
                raise DegenerateError(f"cosine product vanished with nonzero entry {a[k]:.3g} at offset {k}")
            continue
        angles[k - 1] = math.atan2(a[k], math.sqrt(partial[k - 1]))
    return angles


def _arctan2_angles(a: list[float]) -> list[float]:
    # scale invariant, so a need not be normalized
    n = len(a)
    norm = math.sqrt(math.fsum(x * x for x in a))
    if norm == 0.0:
        raise ArgumentError("cannot solve angles for a zero vector")
    tol = ZERO_TOL * norm
    z = [0.0 if abs(x) <= tol else x for x in a]
    angles = [0.0] * (n - 1)
    first = math.atan2(z[1], z[0])
    if first == -math.pi:
        first = math.pi
    angles[0] = first
    if z[1] != 0.0:
        prev, prev_sin = 1, abs(math.sin(first))
    else:
        # back-reference to the pivot entry itself: no sine factor
        prev, prev_sin = 0, 1.0
    for k in range(2, n):
        if z[k] == 0.0:
            continue
        theta = math.atan2(z[k] * prev_sin, abs(z[prev]))
        angles[k - 1] = theta
        prev, prev_sin = k, abs(math.sin(theta))
    return angles


def _check_column(col, pivot: int) -> np.ndarray:
    col = np.asarray(col, dtype=np.float64).ravel()
    if not (0 <= pivot < col.shape[0] - 1):
        raise ArgumentError(f"pivot {pivot} out of range for a length-{col.shape[0]} column")
    if not np.all(np.isfinite(col)):
        raise ArgumentError("column contains NaN or Inf")
    return col


def solve_angles_arcsin(col, pivot: int) -> list[float]:
    """Minor cascade angles that rotate ``col`` onto axis ``pivot``.

    ``col`` is a unit vector of length N whose entry at ``pivot`` is
    nonnegative. Returns the angles of planes ``(pivot, pivot+1) ...
    (pivot, N-1)``, each in [-pi/2, pi/2].
    """
    col = _check_column(col, pivot)
    if abs(float(np.linalg.norm(col)) - 1.0) > UNIT_NORM_TOL:
        raise ArgumentError("arcsin solver needs a unit vector")
    if col[pivot] < 0.0:
        raise ArgumentError("arcsin solver needs a nonnegative pivot entry; reflect first")
    return _arcsin_angles(col[pivot:].tolist())


def solve_angles_arctan2(col, pivot: int) -> list[float]:
    """Cascade angles of the modified arctan2 method.

    The first angle is major, in (-pi, pi]; the rest are minor. Entries that
    are zero (relative to the column norm) skip their rotation and later
    angles refer back to the nearest nonzero entry.
    """
    col = _check_column(col, pivot)
    norm = float(np.linalg.norm(col))
    if norm == 0.0:
        raise ArgumentError("cannot solve angles for a zero vector")
    if abs(norm - 1.0) > UNIT_NORM_TOL:
        raise ArgumentError("arctan2 solver needs a unit vector")
    return _arctan2_angles(col[pivot:].tolist())


def _reduce_in_place(work: list[list[float]], pivot: int, method: Method) -> tuple[list[float], int]:
    n = len(work)
    a = [work[r][pivot] for r in range(pivot, n)]
    sign = 1
    if method is Method.ARCSIN:
        if a[0] < 0.0:
            for row in work:
                row[pivot] = -row[pivot]
            a = [-x for x in a]
            sign = -1
        norm = math.sqrt(math.fsum(x * x for x in a))
        if norm == 0.0:
            raise DegenerateError(f"column {pivot} vanished in its subspace")
        angles = _arcsin_angles([x / norm for x in a])
    else:
        angles = _arctan2_angles(a)
    apply_cascade_transposed(work, pivot, angles)
    return angles, sign


def reduce_dimension_by_one(work, pivot: int, method="arctan2"):
    """One subspace step: reflect (arcsin only), solve angles, rotate.

    Returns ``(new_work, angles_row, sign)`` where ``angles_row`` has length N
    with the solved angles at positions ``pivot+1 ...`` and zeros elsewhere.
    """
    method = _method(method)
    w = as_matrix(work, name="work")
    n = w.shape[0]
    if not (0 <= pivot < n - 1):
        raise ArgumentError(f"pivot {pivot} out of range for dim {n}")
    rows = w.tolist()
    angles, sign = _reduce_in_place(rows, pivot, method)
    row = np.zeros(n)
    row[pivot + 1:] = angles
    return np.array(rows), row, sign


def _orient(basis: np.ndarray, eigenvalues: np.ndarray, method: Method, orient_to_first_orthant: bool):
    # shared by orient_eigenvectors and the filtering pipeline (which feeds
    # near-orthonormal matrices and so skips validation)
    n = basis.shape[0]
    perm = np.argsort(-np.abs(eigenvalues), kind="stable")
    v_sorted = basis[:, perm]
    e_sorted = eigenvalues[perm]
    work = v_sorted.tolist()
    signs = np.ones(n, dtype=np.int64)
    if orient_to_first_orthant and work[0][0] < 0.0:
        signs[0] = -1
        for row in work:
            row[0] = -row[0]
    theta = np.zeros((n, n))
    for i in range(n - 1):
        angles, sign = _reduce_in_place(work, i, method)
        theta[i, i + 1:] = angles
        signs[i] *= sign
    signs[n - 1] = 1 if work[n - 1][n - 1] >= 0.0 else -1
    oriented = v_sorted * signs
    return OrientationResult(
        oriented_basis=_frozen(oriented),
        sorted_eigenvalues=_frozen(e_sorted.copy()),
        angles=AngleMatrix(theta, method),
        reflections=_frozen(signs),
        sort_indices=_frozen(perm.astype(np.int64)),
        method=method,
    )


def orient_eigenvectors(sys: EigenSystem, method="arctan2", orient_to_first_orthant: bool = False) -> OrientationResult:
    """Sort, reflect and rotate ``sys`` so that ``R.T V S = I``.

    With ``orient_to_first_orthant`` the first sorted eigenvector is reflected
    when its leading entry is negative, which keeps the first angle minor.
    """
    if not isinstance(sys, EigenSystem):
        raise ArgumentError("orient_eigenvectors expects an EigenSystem")
    return _orient(np.array(sys.basis), np.array(sys.eigenvalues), _method(method), bool(orient_to_first_orthant))


def _theta_array(angles) -> np.ndarray:
    if isinstance(angles, AngleMatrix):
        angles.check_ranges()
        return angles.theta
    return AngleMatrix(angles).theta


def generate_oriented_eigenvectors(angles) -> np.ndarray:
    """Rebuild the oriented basis ``R_1 R_2 ... R_{N-1}`` from an angle matrix."""
    theta = _theta_array(angles)
    n = theta.shape[0]
    m = np.eye(n).tolist()
    for i in range(n - 1):
        apply_cascade_right(m, i, theta[i, i + 1:].tolist())
    return np.array(m)


def reconstruct_eigenvectors(angles, reflections) -> np.ndarray:
    """The sorted input basis ``R diag(S)`` (reflections re-applied)."""
    m = generate_oriented_eigenvectors(angles)
    s = check_reflections(reflections, m.shape[0])
    return m * s


def check_reflections(signs, dim: int | None = None) -> np.ndarray:
    s = np.asarray(signs).ravel()
    if dim is not None and s.shape[0] != dim:
        raise ArgumentError(f"need {dim} reflection signs, got {s.shape[0]}")
    if not np.all((s == 1) | (s == -1)):
        raise ArgumentError("reflection signs must be +1 or -1")
    return s.astype(np.int64)


def untwist_reflections(s_sin: Sequence[int]):
    """Trade arcsin-style reflections for major-angle rotations.

    Walking the subspaces top-down, a -1 at position ``k`` (``k < N-1``) is
    replaced by a major rotation in subspace ``k``, which flips entries ``k``
    and ``k+1``. Returns the new sign vector and per-subspace major flags.

    >>> untwist_reflections([1, -1, 1])
    ([1, 1, -1], [False, True])
    """
    s = [int(x) for x in check_reflections(s_sin)]
    flags = []
    for k in range(len(s) - 1):
        major = s[k] == -1
        if major:
            s[k] = 1
            s[k + 1] = -s[k + 1]
        flags.append(major)
    return s, flags
