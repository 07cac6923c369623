"""Acceptance criteria; each test records one PASS/FAIL line in the terminal summary."""

import math
import time

import numpy as np
import pytest
from scipy import integrate

from eigenorient import (
    EigenSeries,
    EigenSystem,
    WobbleSpec,
    adjacent_jumps,
    circular_variance,
    classify_modes,
    filter_eigenbases,
    gaussian_panel,
    generate_oriented_eigenvectors,
    mp_density,
    mp_support,
    orient_eigenvectors,
    reconstruct_correlation,
    rotate_away_informative,
    rotate_back,
    sample_correlation,
    shrink_noise_subspace,
    symmetric_eigen,
    untwist_reflections,
    wobble_series,
)
from eigenorient.cli import main
from eigenorient.matcore import det

from conftest import haar_basis

pytestmark = pytest.mark.acceptance

# first-angle jumps > pi/2 per directed mode on WobbleSpec() (seed 0)
WOBBLE_JUMPS_ARCSIN = (24, 23, 21)
WOBBLE_JUMPS_ARCTAN2 = (0, 0, 0)
SPIKE_SEED = 0


def _corpus():
    rng = np.random.default_rng(20240501)
    for dim in range(2, 13):
        for count in range(1000):
            v = haar_basis(dim, rng)
            # alternate determinant signs
            if (np.linalg.det(v) < 0) != (count % 2 == 1):
                v[:, -1] *= -1
            yield EigenSystem(v, rng.uniform(0.05, 5.0, dim))


@pytest.fixture(scope="module")
def oriented_corpus():
    start = time.perf_counter()
    out = [(s, orient_eigenvectors(s, "arcsin"), orient_eigenvectors(s, "arctan2")) for s in _corpus()]
    return out, time.perf_counter() - start


def test_c01_round_trip(oriented_corpus, report_criterion):
    corpus, orient_time = oriented_corpus
    start = time.perf_counter()
    worst = 0.0
    for _, *results in corpus:
        for r in results:
            err = np.max(np.abs(generate_oriented_eigenvectors(r.angles) - r.sorted_basis * r.reflections))
            worst = max(worst, err)
    elapsed = orient_time + time.perf_counter() - start
    dets = {round(det(s.basis)) for s, _, _ in corpus}
    ok = worst <= 1e-9 and elapsed < 30.0 and dets == {-1, 1}
    assert report_criterion(
        1, "orientation round trip", ok, f"{2 * len(corpus)} orientations, max err {worst:.2e}, {elapsed:.1f}s"
    )


def test_c02_determinant_law(oriented_corpus, report_criterion):
    corpus, _ = oriented_corpus
    worst = max(
        abs(det(r.sorted_basis) * np.prod(r.reflections) - 1.0) for _, *results in corpus for r in results
    )
    assert report_criterion(2, "det(V) * prod(S) = +1", worst <= 1e-9, f"max deviation {worst:.2e}")


def test_c03_arctan2_sign_placement(oriented_corpus, report_criterion):
    corpus, _ = oriented_corpus
    flag_off = all(np.all(t.reflections[:-1] == 1) for _, _, t in corpus)
    flag_on = True
    checked = 0
    for s, _, t in corpus[::5]:
        v = np.array(t.sorted_basis)
        if v[0, 0] > 0:
            v[:, 0] *= -1
        r = orient_eigenvectors(EigenSystem(v, t.sorted_eigenvalues), "arctan2", orient_to_first_orthant=True)
        checked += 1
        flag_on &= bool(
            r.reflections[0] == -1
            and np.all(r.reflections[1:-1] == 1)
            and abs(r.angles.theta[0, 1]) <= math.pi / 2
            and r.oriented_basis[0, 0] >= 0.0
        )
    assert report_criterion(
        3, "arctan2 sign placement", flag_off and flag_on, f"flag off on {len(corpus)}, flag on on {checked}"
    )


def test_c04_untwist(report_criterion):
    fixtures = untwist_reflections([1, -1, 1])[0] == [1, 1, -1] and untwist_reflections([-1, -1, -1, 1])[0] == [
        1,
        1,
        1,
        -1,
    ]
    rng = np.random.default_rng(4)
    parity = True
    for _ in range(10_000):
        s = rng.choice([-1, 1], size=int(rng.integers(1, 16))).tolist()
        out, _ = untwist_reflections(s)
        parity &= bool(np.prod(out) == np.prod(s) and all(x == 1 for x in out[:-1]))
    assert report_criterion(4, "untwist fixtures and parity", fixtures and parity, "2 fixtures, 10000 random vectors")


def _sparse_system(rng):
    dim = int(rng.integers(4, 9))
    zeros = int(rng.integers(1, 4))
    v1 = rng.standard_normal(dim)
    v1[rng.choice(dim, zeros, replace=False)] = 0.0
    v1 /= np.linalg.norm(v1)
    e1 = np.zeros(dim)
    e1[0] = 1.0
    u = v1 - e1
    nu = np.linalg.norm(u)
    # Householder reflector mapping e1 onto v1; zero rows of v1 stay exact
    h = np.eye(dim) if nu == 0.0 else np.eye(dim) - 2.0 * np.outer(u, u) / (nu * nu)
    h[:, 0] = v1
    h = h[:, rng.permutation(dim)] * rng.choice([-1.0, 1.0], dim)
    return EigenSystem(h, rng.uniform(0.1, 5.0, dim))


def test_c05_sparse_vectors(report_criterion):
    rng = np.random.default_rng(5)
    worst, nans, exact_zeros = 0.0, 0, 0
    for _ in range(10_000):
        s = _sparse_system(rng)
        exact_zeros += int(np.any(s.basis == 0.0))
        for method in ("arcsin", "arctan2"):
            r = orient_eigenvectors(s, method)
            nans += int(np.isnan(r.angles.theta).sum())
            worst = max(worst, np.max(np.abs(generate_oriented_eigenvectors(r.angles) - r.oriented_basis)))
    ok = worst <= 1e-9 and nans == 0 and exact_zeros == 10_000
    assert report_criterion(5, "sparse vectors", ok, f"10000 cases, max err {worst:.2e}, NaN angles {nans}")


def test_c06_wrap_around(report_criterion):
    systems = wobble_series(WobbleSpec(dim=7, directed_modes=3, angle_noise_sigma=0.2, series_length=40, seed=0))
    jumps = {}
    for method in ("arcsin", "arctan2"):
        theta = np.stack([orient_eigenvectors(s, method).angles.theta for s in systems])
        jumps[method] = tuple(adjacent_jumps(theta[:, k, k + 1]) for k in range(3))
    ok = (
        jumps["arcsin"] == WOBBLE_JUMPS_ARCSIN
        and jumps["arctan2"] == WOBBLE_JUMPS_ARCTAN2
        and all(j > 0 for j in jumps["arcsin"])
    )
    assert report_criterion(6, "wrap-around disambiguation", ok, f"arcsin {jumps['arcsin']}, arctan2 {jumps['arctan2']}")


def test_c07_stabilization(report_criterion):
    series = EigenSeries(tuple(orient_eigenvectors(s) for s in wobble_series(WobbleSpec())))
    out = filter_eigenbases(series, [1, 2, 3, 2, 1])
    raw = series.angles()[:, 0, 1]
    filt = out.angles()[:, 0, 1]
    cv_raw, cv_aligned, cv_filt = circular_variance(raw), circular_variance(raw[4:]), circular_variance(filt)
    ortho = max(np.max(np.abs(b.T @ b - np.eye(7))) for b in out.bases)
    ok = cv_filt < cv_raw and cv_filt < cv_aligned and ortho <= 1e-9 and abs(out.delay - 2.0) <= 1e-12
    detail = f"circ var raw {cv_raw:.5f} -> filtered {cv_filt:.5f}, orthonormality {ortho:.1e}, delay {out.delay:g}"
    assert report_criterion(7, "stabilization", ok, detail)


def test_c08_marchenko_pastur(report_criterion):
    worst_mass, support_exact = 0.0, True
    for q in (0.1, 0.25, 0.5, 0.9):
        lo, hi = mp_support(q)
        support_exact &= (lo, hi) == ((1 - math.sqrt(q)) ** 2, (1 + math.sqrt(q)) ** 2)
        mass, _ = integrate.quad(lambda x: mp_density(x, q), lo, hi, limit=200)
        worst_mass = max(worst_mass, abs(mass - 1.0))
    lam, _ = symmetric_eigen(sample_correlation(gaussian_panel(50, 500, seed=8)))
    lo, hi = mp_support(50 / 500)
    outside = float(np.mean((lam < lo) | (lam > hi)))
    ok = worst_mass <= 1e-6 and support_exact and outside <= 0.05
    detail = f"mass err {worst_mass:.1e}, support exact {support_exact}, outside {100 * outside:.0f}%"
    assert report_criterion(8, "Marchenko-Pastur", ok, detail)


def _informative(spikes, seed=SPIKE_SEED, dim=20, records=400):
    panel = gaussian_panel(dim, records, spikes, seed)
    z = panel - panel.mean(axis=0)
    lam, _ = symmetric_eigen(z.T @ z / records)
    return classify_modes(np.sort(lam)[::-1], records).count


def test_c09_spike_classification(report_criterion):
    start = time.perf_counter()
    counts = (_informative((5.0,)), _informative((10.0, 6.0, 4.0)), _informative(()))
    elapsed = time.perf_counter() - start
    ok = counts == (1, 3, 0) and elapsed < 10.0
    assert report_criterion(9, "spike classification", ok, f"counts {counts} (expected (1, 3, 0)), {elapsed:.2f}s")


def test_c10_correlation_reconstruction(report_criterion):
    systems = wobble_series(WobbleSpec())
    series = EigenSeries(tuple(orient_eigenvectors(s) for s in systems))
    filtered = filter_eigenbases(series, [1, 2, 3, 2, 1])
    mats = [reconstruct_correlation(s.basis, s.eigenvalues) for s in systems]
    mats += [reconstruct_correlation(b, e) for b, e in zip(filtered.bases, filtered.eigenvalues)]
    diag = max(np.max(np.abs(np.diag(c) - 1.0)) for c in mats)
    sym = max(np.max(np.abs(c - c.T)) for c in mats)
    min_eig = min(np.min(np.linalg.eigvalsh(c)) for c in mats)
    worst_identity = 0.0
    for seed in range(50):
        c = sample_correlation(gaussian_panel(8, 100, spikes=(3.0,), seed=seed))
        lam, v = symmetric_eigen(c)
        worst_identity = max(worst_identity, np.max(np.abs(reconstruct_correlation(v, lam) - c)))
    ok = diag <= 1e-12 and sym <= 1e-12 and min_eig >= -1e-9 and worst_identity <= 1e-10
    detail = f"{len(mats)} matrices, diag {diag:.1e}, sym {sym:.1e}, min eig {min_eig:.2e}, identity {worst_identity:.1e}"
    assert report_criterion(10, "correlation reconstruction", ok, detail)


def test_c11_rotate_away(report_criterion):
    rng = np.random.default_rng(11)
    worst_back, worst_block = 0.0, 0.0
    for _ in range(200):
        dim = int(rng.integers(2, 11))
        r = orient_eigenvectors(EigenSystem(haar_basis(dim, rng), rng.uniform(0.1, 5.0, dim)))
        for k in range(dim):
            m, rots = rotate_away_informative(r, k)
            worst_back = max(worst_back, np.max(np.abs(rotate_back(m, rots) - r.oriented_basis)))
            block = np.zeros_like(m)
            block[:k, :k] = np.eye(k)
            block[k:, k:] = m[k:, k:]
            worst_block = max(worst_block, np.max(np.abs(m - block)))
        shrink_noise_subspace(r, k=dim - 1, alpha=0.5)
    ok = worst_back <= 1e-10 and worst_block <= 1e-10
    assert report_criterion(11, "rotate-away round trip", ok, f"inverse {worst_back:.1e}, block {worst_block:.1e}")


def _snapshot(directory):
    return {p.relative_to(directory).as_posix(): p.read_bytes() for p in sorted(directory.rglob("*")) if p.is_file()}


def test_c12_cli_determinism(tmp_path, report_criterion):
    def pipeline(root):
        codes = [
            main(["synth", "--seed", "3", "--output", str(root / "fx")]),
            main(["orient", "--input", str(root / "fx"), "--output", str(root / "or"), "--method", "arcsin"]),
            main(["stabilize", "--input", str(root / "fx"), "--kernel", "1,2,3,2,1", "--informative", "3",
                  "--output", str(root / "st")]),
            main(["classify", "--input", str(root / "or"), "--records", "60", "--density-points", "501",
                  "--output", str(root / "cl")]),
            main(["corr", "--input", str(root / "st"), "--baseline", str(root / "fx"), "--alpha", "0.5",
                  "--informative", "3", "--output", str(root / "co")]),
        ]
        return codes, _snapshot(root)

    codes_a, files_a = pipeline(tmp_path / "a")
    codes_b, files_b = pipeline(tmp_path / "b")
    ok = codes_a == codes_b == [0] * 5 and files_a == files_b and len(files_a) > 0
    assert report_criterion(12, "CLI determinism", ok, f"{len(files_a)} files compared byte for byte")
