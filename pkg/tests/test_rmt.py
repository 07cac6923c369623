import math

import numpy as np
import pytest
from scipy import integrate

from eigenorient import (
    EigenSystem,
    MPModel,
    classify_modes,
    lw_shrink,
    mp_density,
    mp_support,
    orient_eigenvectors,
    random_orthonormal,
    rescaled_mp_density,
    rotate_away_informative,
    rotate_back,
    shrink_noise_subspace,
)
from eigenorient.errors import ArgumentError


@pytest.mark.parametrize("q", [0.1, 0.25, 0.5, 0.9])
def test_density_mass_and_mean(q):
    lo, hi = mp_support(q)
    mass, _ = integrate.quad(lambda x: mp_density(x, q), lo, hi, limit=200)
    mean, _ = integrate.quad(lambda x: x * mp_density(x, q), lo, hi, limit=200)
    assert mass == pytest.approx(1.0, abs=1e-8)
    # the first moment of the MP law is 1
    assert mean == pytest.approx(1.0, abs=1e-8)


def test_support_and_outside_zero():
    assert mp_support(0.25) == (0.25, 2.25)
    assert mp_density(0.2, 0.25) == 0.0
    assert mp_density(2.3, 0.25) == 0.0
    np.testing.assert_array_equal(mp_density(np.array([0.0, 5.0]), 0.5), [0.0, 0.0])
    with pytest.raises(ArgumentError):
        mp_support(0.0)


def test_rescaled_density():
    q, lb = 0.3, 2.5
    lo, hi = mp_support(q)
    mass, _ = integrate.quad(lambda x: rescaled_mp_density(x, q, lb), lb * lo, lb * hi, limit=200)
    assert mass == pytest.approx(1.0, abs=1e-8)
    assert rescaled_mp_density(lb * 1.0, q, lb) == pytest.approx(mp_density(1.0, q) / lb)


def test_model_grid_trapezoid():
    m = MPModel.from_q(0.4, 1.7)
    x = m.grid(4001)
    assert x[0] == pytest.approx(m.support[0]) and x[-1] == pytest.approx(m.support[1])
    assert np.trapezoid(m.density(x), x) == pytest.approx(1.0, abs=1e-4)


def test_classify_trivial():
    assert classify_modes(np.ones(10), 100).count == 0
    c = classify_modes([9.0, 1.0, 1.0, 1.0, 1.0], 500)
    assert c.informative == (0,)
    assert c.noise == (1, 2, 3, 4)
    first = c.steps[0]
    assert first.model.q == pytest.approx(5 / 500)
    assert first.model.lambda_bar == pytest.approx(13 / 5)
    assert c.model.q == pytest.approx(4 / 500)


def test_classify_edge_multiplier():
    lam = [1.5, 1.0, 1.0, 0.9, 0.8]
    assert classify_modes(lam, 1000).count == 1
    assert classify_modes(lam, 1000, edge_multiplier=2.0).count == 0


def test_classify_validation():
    with pytest.raises(ArgumentError):
        classify_modes([2.0, 1.0], 2)
    with pytest.raises(ArgumentError):
        classify_modes([1.0, 2.0], 10)
    with pytest.raises(ArgumentError):
        classify_modes([1.0, -1.0], 10)


def _result(dim=6, seed=4):
    lam = np.linspace(3.0, 0.5, dim)
    return orient_eigenvectors(EigenSystem(random_orthonormal(dim, seed), lam))


@pytest.mark.parametrize("k", [0, 1, 3, 5])
def test_rotate_away_round_trip(k):
    r = _result()
    m, rots = rotate_away_informative(r, k)
    np.testing.assert_allclose(m[:k, :k], np.eye(k), atol=1e-12)
    np.testing.assert_allclose(m[:k, k:], 0.0, atol=1e-12)
    np.testing.assert_allclose(m[k:, :k], 0.0, atol=1e-12)
    np.testing.assert_allclose(rotate_back(m, rots), r.oriented_basis, atol=1e-12)


def test_lw_shrink():
    c = np.array([[1.0, 0.5], [0.5, 1.0]])
    np.testing.assert_allclose(lw_shrink(c, 0.4), [[1.0, 0.2], [0.2, 1.0]])
    np.testing.assert_array_equal(lw_shrink(c, 1.0), c)
    with pytest.raises(ArgumentError):
        lw_shrink(c, 1.5)
    with pytest.raises(ArgumentError):
        lw_shrink(np.array([[1.0, 2.0], [2.0, 1.0]]), 0.5)


def test_shrink_noise_subspace():
    r = _result()
    v, lam = r.oriented_basis, r.sorted_eigenvalues
    full = (v * lam) @ v.T
    np.testing.assert_allclose(shrink_noise_subspace(r, k=2, alpha=1.0), full, atol=1e-12)
    np.testing.assert_allclose(shrink_noise_subspace(r, k=0, alpha=0.0), np.eye(6), atol=1e-12)
    # alpha=0 keeps the informative modes and flattens the rest to unit variance
    out = shrink_noise_subspace(r, k=2, alpha=0.0)
    w, u = np.linalg.eigh(out)
    np.testing.assert_allclose(np.sort(w)[::-1], [3.0, 2.5, 1, 1, 1, 1], atol=1e-12)
    np.testing.assert_allclose(np.abs(u[:, ::-1][:, :2].T @ v[:, :2]), np.eye(2), atol=1e-10)


def test_support_examples():
    assert mp_support(1.0) == (0.0, 4.0)
    lo, hi = mp_support(1e-8)
    assert lo == pytest.approx(1.0, abs=1e-3) and hi == pytest.approx(1.0, abs=1e-3)
    assert mp_density(0.25, 0.25) == 0.0 and mp_density(2.25, 0.25) == 0.0
    assert MPModel.from_q(0.25, 2.0).support == (0.5, 4.5)
    x = np.linspace(0.1, 3.0, 50)
    np.testing.assert_array_equal(rescaled_mp_density(x, 0.3, 1.0), mp_density(x, 0.3))
    assert np.all(mp_density(np.linspace(-1, 5, 1000), 0.7) >= 0.0)


def test_classify_monotone_in_top_eigenvalue(rng):
    for _ in range(100):
        lam = np.sort(rng.uniform(0.2, 2.0, 10))[::-1]
        base = classify_modes(lam, 60).count
        bumped = lam.copy()
        bumped[0] *= rng.uniform(1.0, 4.0)
        assert classify_modes(bumped, 60).count >= base


def test_rotate_away_trivial_and_preserving():
    r = _result(7, 9)
    m, rots = rotate_away_informative(r, 0)
    assert rots == [] and np.array_equal(m, r.oriented_basis)
    m, _ = rotate_away_informative(r, 3)
    np.testing.assert_allclose(m.T @ m, np.eye(7), atol=1e-12)
    assert np.linalg.det(m) == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ArgumentError):
        rotate_away_informative(r, 7)


def test_lw_shrink_half():
    c = np.array([[1.0, 0.6], [0.6, 1.0]])
    np.testing.assert_allclose(lw_shrink(c, 0.5), [[1.0, 0.3], [0.3, 1.0]])
    np.testing.assert_array_equal(lw_shrink(c, 0.0), np.eye(2))


def test_shrink_irreducible_block_only():
    r = _result()
    out = shrink_noise_subspace(r, k=5, alpha=0.3)
    assert np.min(np.linalg.eigvalsh(out)) >= -1e-9
    w = np.sort(np.linalg.eigvalsh(out))[::-1]
    lam = r.sorted_eigenvalues
    np.testing.assert_allclose(w, np.sort(np.append(lam[:5], 0.3 * lam[5] + 0.7))[::-1], atol=1e-12)
