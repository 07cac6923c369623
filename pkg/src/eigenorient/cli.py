"""Command line front end.

Subcommands read a panel CSV (records x features) or a series directory
(numbered basis CSVs plus ``manifest.json``) and write CSV matrices and a
``report.json`` into ``--output``.

Exit codes: 0 success, 2 invalid arguments or data, 3 unreadable files,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import io
from .correlation import dispersion_report, reconstruct_correlation, sample_correlation
from .dirstats import (
    EigenSeries,
    FilterKernel,
    circular_variance,
    filter_eigenbases,
    modal_basis,
    participation_score,
    static_stabilize,
    static_stabilize_series,
)
from .errors import ArgumentError, EigenOrientError, NumericError, ParseError, ValidationError
from .matcore import JACOBI_MAX_SWEEPS, JACOBI_REL_TOL, symmetric_eigen
from .orientation import ORTHONORMAL_TOL, EigenSystem, Method, OrientationResult, orient_eigenvectors
from .rmt import classify_modes, shrink_noise_subspace
from .synth import WobbleSpec, wobble_series

log = logging.getLogger("eigenorient")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_PARSE = 3
EXIT_NUMERIC = 4

COMMANDS = ("orient", "stabilize", "classify", "corr", "synth")


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: Optional[Path] = None
    output: Optional[Path] = None
    method: Method = Method.ARCTAN2
    orient_first_orthant: bool = False
    kernel: tuple[float, ...] = ()
    informative_count: Optional[int] = None
    alpha: Optional[float] = None
    seed: Optional[int] = None
    ortho_tol: float = ORTHONORMAL_TOL
    jacobi_sweeps: int = JACOBI_MAX_SWEEPS
    jacobi_tol: float = JACOBI_REL_TOL
    records: Optional[int] = None
    edge_multiplier: float = 1.0
    density_points: int = 0
    baseline: Optional[Path] = None
    dim: int = 7
    directed: int = 3
    sigma: float = 0.2
    length: int = 40
    parity: Optional[str] = None
    static_first: bool = False

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}")
        if self.output is None:
            raise ValidationError("--output is required")
        if self.command != "synth" and self.input is None:
            raise ValidationError("--input is required")
        if self.command == "synth" and self.seed is None:
            raise ValidationError("synth needs --seed")
        if self.command == "stabilize" and not self.kernel:
            raise ValidationError("stabilize needs --kernel")
        if self.static_first and self.informative_count is None:
            raise ValidationError("--static-first needs --informative")
        if self.command == "corr" and (self.alpha is None) != (self.informative_count is None):
            raise ValidationError("shrinkage needs both --alpha and --informative")
        if self.alpha is not None and not (0.0 <= self.alpha <= 1.0):
            raise ValidationError(f"--alpha must lie in [0, 1], got {self.alpha}")
        if self.informative_count is not None and self.informative_count < 0:
            raise ValidationError("--informative must be nonnegative")
        if not (self.ortho_tol > 0.0) or not (self.jacobi_tol > 0.0) or self.jacobi_sweeps < 1:
            raise ValidationError("tolerances and sweep budgets must be positive")
        if not (self.edge_multiplier > 0.0):
            raise ValidationError("--edge-multiplier must be positive")
        if self.density_points < 0 or self.density_points == 1:
            raise ValidationError("--density-points must be 0 or at least 2")
        if self.records is not None and self.records < 1:
            raise ValidationError("--records must be positive")


def _parse_kernel(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(w) for w in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"kernel must be comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", type=Path, help="output directory")
    common.add_argument("--method", choices=[m.value for m in Method], default=Method.ARCTAN2.value)
    common.add_argument("--first-orthant", action="store_true", help="also orient the first column into the first orthant")
    common.add_argument("--ortho-tol", type=float, default=ORTHONORMAL_TOL, help="orthonormality tolerance for input bases")
    common.add_argument("--jacobi-sweeps", type=int, default=JACOBI_MAX_SWEEPS)
    common.add_argument("--jacobi-tol", type=float, default=JACOBI_REL_TOL)

    with_input = argparse.ArgumentParser(add_help=False)
    with_input.add_argument("--input", type=Path, help="panel CSV file or series directory")

    parser = argparse.ArgumentParser(prog="eigenorient", description="Orient, stabilize and classify eigensystems.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("orient", parents=[common, with_input], help="orient each snapshot")

    p = sub.add_parser("stabilize", parents=[common, with_input], help="filter an oriented series")
    p.add_argument("--kernel", type=_parse_kernel, help="filter weights w1,w2,... (newest first)")
    p.add_argument("--informative", type=int, help="also emit modal angles keeping K modes")
    p.add_argument("--static-first", action="store_true", help="zero noise-mode angles before filtering")

    p = sub.add_parser("classify", parents=[common, with_input], help="split modes into informative and noise")
    p.add_argument("--records", type=int, help="record count T (series input)")
    p.add_argument("--edge-multiplier", type=float, default=1.0)
    p.add_argument("--density-points", type=int, default=0, help="write density samples on this many grid points")

    p = sub.add_parser("corr", parents=[common, with_input], help="rebuild correlation matrices")
    p.add_argument("--informative", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--baseline", type=Path, help="series to compare dispersion against")

    p = sub.add_parser("synth", parents=[common], help="write a wobble fixture series")
    p.add_argument("--seed", type=int)
    p.add_argument("--dim", type=int, default=7)
    p.add_argument("--directed", type=int, default=3)
    p.add_argument("--sigma", type=float, default=0.2)
    p.add_argument("--length", type=int, default=40)
    p.add_argument("--parity", choices=["even", "odd"])
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    fields = dict(
        command=ns.command,
        input=getattr(ns, "input", None),
        output=ns.output,
        method=Method(ns.method),
        orient_first_orthant=ns.first_orthant,
        ortho_tol=ns.ortho_tol,
        jacobi_sweeps=ns.jacobi_sweeps,
        jacobi_tol=ns.jacobi_tol,
    )
    for name, attr in (
        ("kernel", "kernel"),
        ("informative_count", "informative"),
        ("alpha", "alpha"),
        ("seed", "seed"),
        ("records", "records"),
        ("edge_multiplier", "edge_multiplier"),
        ("density_points", "density_points"),
        ("baseline", "baseline"),
        ("dim", "dim"),
        ("directed", "directed"),
        ("sigma", "sigma"),
        ("length", "length"),
        ("parity", "parity"),
        ("static_first", "static_first"),
    ):
        value = getattr(ns, attr, None)
        if value is not None:
            fields[name] = value
    cfg = RunConfig(**fields)
    cfg.validate()
    return cfg


# -- input helpers ---------------------------------------------------------------------------------


@dataclass
class Snapshots:
    systems: list[EigenSystem]
    timestamps: list
    records: Optional[int] = None


def _floats(a) -> list:
    return [float(x) for x in np.asarray(a).ravel()]


def _matrix(a) -> list:
    return [[float(x) for x in row] for row in np.asarray(a)]


def load_snapshots(cfg: RunConfig, path: Optional[Path] = None) -> Snapshots:
    path = cfg.input if path is None else path
    if path.is_dir():
        data = io.read_series(path)
        systems = []
        for i, (b, e) in enumerate(zip(data.bases, data.eigenvalues)):
            try:
                systems.append(EigenSystem(b, e, tol=cfg.ortho_tol))
            except ArgumentError as exc:
                raise ValidationError(f"snapshot {i}: {exc}") from None
        return Snapshots(systems, data.timestamps, data.extra.get("records"))
    if not path.exists():
        raise ParseError("no such file or directory", path)
    panel = io.read_matrix_csv(path, allow_header=True)
    corr = sample_correlation(panel)
    lam, basis = symmetric_eigen(corr, max_sweeps=cfg.jacobi_sweeps, rel_tol=cfg.jacobi_tol)
    log.info("panel %s: %d records, %d features", path, panel.shape[0], panel.shape[1])
    return Snapshots([EigenSystem(basis, lam, tol=cfg.ortho_tol)], [0], panel.shape[0])


def orient_all(cfg: RunConfig, snaps: Snapshots) -> list[OrientationResult]:
    return [orient_eigenvectors(s, cfg.method, cfg.orient_first_orthant) for s in snaps.systems]


def _series(results, timestamps) -> EigenSeries:
    try:
        return EigenSeries(tuple(results), tuple(timestamps))
    except ArgumentError as exc:
        raise ValidationError(str(exc)) from None


# -- commands --------------------------------------------------------------------------------------


def cmd_orient(cfg: RunConfig) -> dict:
    snaps = load_snapshots(cfg)
    results = orient_all(cfg, snaps)
    out = cfg.output
    entries = []
    for i, r in enumerate(results):
        angle_file = io.basis_name(i, "angles")
        io.write_matrix_csv(out / angle_file, r.angles.theta)
        entries.append(
            {
                "angles": _matrix(r.angles.theta),
                "angles_file": angle_file,
                "basis_file": io.basis_name(i),
                "eigenvalues": _floats(r.sorted_eigenvalues),
                "participation_scores": [participation_score(r.oriented_basis[:, j]) for j in range(r.dim)],
                "reflections": [int(s) for s in r.reflections],
                "sort_indices": [int(k) for k in r.sort_indices],
                "timestamp": snaps.timestamps[i],
            }
        )
    extra = {"records": snaps.records} if snaps.records is not None else None
    io.write_series(
        out,
        [r.oriented_basis for r in results],
        [r.sorted_eigenvalues for r in results],
        snaps.timestamps,
        method=cfg.method,
        oriented=True,
        extra=extra,
    )
    report = {
        "command": "orient",
        "dim": results[0].dim,
        "first_orthant": cfg.orient_first_orthant,
        "method": cfg.method.value,
        "snapshots": entries,
    }
    io.write_json(out / "report.json", report)
    return report


def cmd_stabilize(cfg: RunConfig) -> dict:
    try:
        kernel = FilterKernel(cfg.kernel)
    except ArgumentError as exc:
        raise ValidationError(str(exc)) from None
    snaps = load_snapshots(cfg)
    series = _series(orient_all(cfg, snaps), snaps.timestamps)
    if len(series) < len(kernel):
        raise ValidationError(f"series of length {len(series)} is shorter than the kernel ({len(kernel)})")
    n = series.dim
    k = cfg.informative_count
    if k is not None and k > n - 1:
        raise ValidationError(f"--informative must lie in [0, {n - 1}]")
    source = static_stabilize_series(series, k) if cfg.static_first else series
    stab = filter_eigenbases(source, kernel, cfg.method)
    out = cfg.output
    for i, a in enumerate(stab.angle_matrices):
        io.write_matrix_csv(out / io.basis_name(i, "angles"), a.theta)
    if k is not None:
        for i, a in enumerate(stab.angle_matrices):
            io.write_matrix_csv(out / io.basis_name(i, "modal_angles"), static_stabilize(a, k).theta)
            io.write_matrix_csv(out / io.basis_name(i, "modal_basis"), modal_basis(a, k))
    io.write_series(out, stab.bases, stab.eigenvalues, stab.timestamps, method=cfg.method, oriented=True)

    # raw snapshots aligned with the filtered output
    offset = len(kernel) - 1
    raw_angles = series.angles()[offset:]
    filt_angles = stab.angles()
    first_angles = []
    for m in range(n - 1):
        raw_cv = circular_variance(raw_angles[:, m, m + 1])
        filt_cv = circular_variance(filt_angles[:, m, m + 1])
        first_angles.append({"mode": m, "raw_circular_variance": raw_cv, "filtered_circular_variance": filt_cv})
    raw_disp = dispersion_report(
        [reconstruct_correlation(s.oriented_basis, s.sorted_eigenvalues) for s in series.snapshots[offset:]]
    )
    filt_disp = dispersion_report([reconstruct_correlation(b, e) for b, e in zip(stab.bases, stab.eigenvalues)])
    raw_sd, filt_sd = _mean_offdiag(raw_disp.stdev), _mean_offdiag(filt_disp.stdev)
    report = {
        "command": "stabilize",
        "delay": stab.delay,
        "dim": n,
        "eigenvalues": [_floats(e) for e in stab.eigenvalues],
        "informative_count": k,
        "kernel": list(kernel.weights),
        "method": cfg.method.value,
        "static_first": cfg.static_first,
        "summary": {
            "dispersion_reduced": bool(filt_sd < raw_sd),
            "filtered_mean_stdev": filt_sd,
            "first_angles": first_angles,
            "raw_mean_stdev": raw_sd,
            "samples": len(stab),
        },
        "timestamps": list(stab.timestamps),
    }
    if k is not None:
        report["modal_angles"] = [_matrix(static_stabilize(a, k).theta) for a in stab.angle_matrices]
    io.write_json(out / "report.json", report)
    return report


def _mean_offdiag(m: np.ndarray) -> float:
    n = m.shape[0]
    if n < 2:
        return 0.0
    iu = np.triu_indices(n, 1)
    return float(np.mean(m[iu]))


def cmd_classify(cfg: RunConfig) -> dict:
    snaps = load_snapshots(cfg)
    records = cfg.records if cfg.records is not None else snaps.records
    if records is None:
        raise ValidationError("classify needs --records for series input")
    n = snaps.systems[0].dim
    if records <= n:
        raise ValidationError(f"T={records} records for N={n} modes; need T > N")
    out = cfg.output
    entries = []
    for i, s in enumerate(snaps.systems):
        lam = np.sort(s.eigenvalues)[::-1]
        try:
            cls = classify_modes(lam, records, cfg.edge_multiplier)
        except ArgumentError as exc:
            raise ValidationError(f"snapshot {i}: {exc}") from None
        entry = {
            "eigenvalues": _floats(lam),
            "informative": list(cls.informative),
            "informative_count": cls.count,
            "noise": list(cls.noise),
            "steps": [
                {
                    "edge": st.edge,
                    "eigenvalue": st.eigenvalue,
                    "index": st.index,
                    "informative": st.informative,
                    "lambda_bar": st.model.lambda_bar,
                    "lambda_minus": st.model.lambda_minus,
                    "lambda_plus": st.model.lambda_plus,
                    "q": st.model.q,
                }
                for st in cls.steps
            ],
            "timestamp": snaps.timestamps[i],
        }
        if cfg.density_points:
            model = cls.model
            grid = model.grid(cfg.density_points)
            name = io.basis_name(i, "density")
            io.write_matrix_csv(out / name, np.column_stack([grid, model.density(grid)]))
            entry["density_file"] = name
        entries.append(entry)
    report = {
        "command": "classify",
        "dim": n,
        "edge_multiplier": cfg.edge_multiplier,
        "records": records,
        "snapshots": entries,
    }
    io.write_json(out / "report.json", report)
    return report


def _dispersion_json(d) -> dict:
    return {
        "count": d.count,
        "entries": [
            {"i": i, "j": j, "max": hi, "mean": mu, "min": lo, "stdev": sd} for i, j, lo, hi, mu, sd in d.entries()
        ],
        "mean_stdev": _mean_offdiag(d.stdev),
        "single_sample": d.single_sample,
    }


def _correlations(snaps: Snapshots) -> list[np.ndarray]:
    return [reconstruct_correlation(s.basis, s.eigenvalues) for s in snaps.systems]


def cmd_corr(cfg: RunConfig) -> dict:
    snaps = load_snapshots(cfg)
    mats = _correlations(snaps)
    out = cfg.output
    names = []
    for i, c in enumerate(mats):
        name = io.basis_name(i, "corr")
        io.write_matrix_csv(out / name, c)
        names.append(name)
    disp = dispersion_report(mats)
    report = {
        "command": "corr",
        "correlation_files": names,
        "dim": mats[0].shape[0],
        "dispersion": _dispersion_json(disp),
        "timestamps": snaps.timestamps,
    }
    if cfg.baseline is not None:
        base = dispersion_report(_correlations(load_snapshots(cfg, cfg.baseline)))
        if base.dim != disp.dim:
            raise ValidationError("baseline dimension differs from input")
        iu = np.triu_indices(disp.dim, 1)
        report["baseline"] = {
            "dispersion": _dispersion_json(base),
            "stdev_reduced": bool(np.all(disp.stdev[iu] <= base.stdev[iu]) and np.any(disp.stdev[iu] < base.stdev[iu])),
            "mean_stdev_reduced": bool(_mean_offdiag(disp.stdev) < _mean_offdiag(base.stdev)),
        }
    if cfg.alpha is not None:
        k = cfg.informative_count
        n = mats[0].shape[0]
        if k > n - 1:
            raise ValidationError(f"--informative must lie in [0, {n - 1}]")
        shrunk = []
        for i, r in enumerate(orient_all(cfg, snaps)):
            name = io.basis_name(i, "shrunk")
            io.write_matrix_csv(out / name, shrink_noise_subspace(r, k=k, alpha=cfg.alpha))
            shrunk.append(name)
        report["shrinkage"] = {"alpha": cfg.alpha, "files": shrunk, "informative_count": k}
    io.write_json(out / "report.json", report)
    return report


def cmd_synth(cfg: RunConfig) -> dict:
    try:
        spec = WobbleSpec(
            dim=cfg.dim,
            directed_modes=cfg.directed,
            angle_noise_sigma=cfg.sigma,
            series_length=cfg.length,
            seed=cfg.seed,
            reflection_parity=cfg.parity,
        )
        systems = wobble_series(spec)
    except ArgumentError as exc:
        raise ValidationError(str(exc)) from None
    extra = {
        "synth": {
            "directed_modes": spec.directed_modes,
            "parity": spec.reflection_parity,
            "seed": spec.seed,
            "sigma": spec.angle_noise_sigma,
        }
    }
    manifest = io.write_series(
        cfg.output, [s.basis for s in systems], [s.eigenvalues for s in systems], extra=extra
    )
    return manifest


DISPATCH = {
    "orient": cmd_orient,
    "stabilize": cmd_stabilize,
    "classify": cmd_classify,
    "corr": cmd_corr,
    "synth": cmd_synth,
}


def run(cfg: RunConfig) -> dict:
    cfg.validate()
    return DISPATCH[cfg.command](cfg)


def _configure_logging() -> None:
    level = os.environ.get("EIGENORIENT_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_VALIDATION
    try:
        cfg = config_from_args(ns)
        run(cfg)
    except ValidationError as exc:
        print(f"eigenorient: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ParseError as exc:
        print(f"eigenorient: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NumericError as exc:
        print(f"eigenorient: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ArgumentError as exc:
        print(f"eigenorient: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except EigenOrientError as exc:
        print(f"eigenorient: {exc}", file=sys.stderr)
        return 1
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
