"""Consistent orientation and stabilization of eigenvector matrices."""

from .correlation import DispersionReport, dispersion_report, reconstruct_correlation, sample_correlation
from .dirstats import (
    EigenSeries,
    FilterKernel,
    StabilizedSeries,
    adjacent_jumps,
    average_direction,
    circular_variance,
    filter_eigenbases,
    filter_eigenvalues,
    inverse_participation_ratio,
    mean_resultant_length,
    modal_basis,
    participation_score,
    static_stabilize,
    static_stabilize_series,
    wrap_angle,
)
from .errors import (
    ArgumentError,
    DegenerateError,
    EigenOrientError,
    NumericError,
    ParseError,
    ValidationError,
)
from .matcore import GivensSpec, compose_cascade, det, is_orthonormal, make_givens, symmetric_eigen
from .orientation import (
    AngleMatrix,
    EigenSystem,
    Method,
    OrientationResult,
    generate_oriented_eigenvectors,
    orient_eigenvectors,
    reconstruct_eigenvectors,
    reduce_dimension_by_one,
    solve_angles_arcsin,
    solve_angles_arctan2,
    sort_eigenvectors,
    untwist_reflections,
)
from .rmt import (
    ClassificationStep,
    MPModel,
    ModeClassification,
    classify_modes,
    lw_shrink,
    mp_density,
    mp_support,
    rescaled_mp_density,
    rotate_away_informative,
    rotate_back,
    shrink_noise_subspace,
)
from .synth import WobbleSpec, gaussian_panel, random_orthonormal, wobble_series

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
