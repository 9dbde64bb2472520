from __future__ import annotations

import numpy as np
import pytest

from dissipation import sweep_min_eigenvalue
from nearness import NearnessError, nearest_psd, nearest_psd_batch, r_plus, r_plus_curve
from ss import dissipation_matrices


def _random_hermitian(rng, p):
    M = rng.standard_normal((p, p)) + 1j * rng.standard_normal((p, p))
    return 0.5 * (M + M.conj().T)


def test_diagonal_clamp():
    result = nearest_psd(np.diag([2.0, -3.0]))
    np.testing.assert_allclose(result.projected, np.diag([2.0, 0.0]), atol=1e-15)
    assert result.frobenius_distance == pytest.approx(3.0)
    assert result.spectral_distance == pytest.approx(3.0)


def test_psd_input_is_unchanged():
    M = np.array([[2.0, 1.0], [1.0, 2.0]])
    result = nearest_psd(M)
    np.testing.assert_allclose(result.projected, M, atol=1e-14)
    assert result.frobenius_distance == 0.0
    assert result.spectral_distance == 0.0


def test_projection_beats_random_psd_candidates(rng):
    candidates = rng.standard_normal((10_000, 4, 4)) + 1j * rng.standard_normal((10_000, 4, 4))
    candidates = candidates @ np.conj(np.swapaxes(candidates, 1, 2))
    for _ in range(100):
        M = _random_hermitian(rng, 4)
        best = nearest_psd(M).frobenius_distance
        others = np.linalg.norm(candidates * rng.uniform(0.0, 0.5) - M, axis=(1, 2))
        assert best <= others.min() + 1e-12


def test_distances_and_invariances(rng):
    for _ in range(20):
        M = _random_hermitian(rng, 5)
        lam = np.linalg.eigvalsh(M)
        result = nearest_psd(M)
        assert result.spectral_distance == pytest.approx(max(0.0, -lam[0]), abs=1e-10)
        assert result.frobenius_distance == pytest.approx(np.sqrt(np.sum(lam[lam < 0] ** 2)), abs=1e-10)
        assert np.linalg.norm(result.projected - M, 2) == pytest.approx(result.spectral_distance, abs=1e-10)
        assert np.linalg.eigvalsh(result.projected)[0] >= -1e-12

        again = nearest_psd(result.projected).projected
        np.testing.assert_allclose(again, result.projected, atol=1e-12)

        U, _ = np.linalg.qr(rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5)))
        rotated = nearest_psd(U @ M @ U.conj().T).projected
        np.testing.assert_allclose(rotated, U @ result.projected @ U.conj().T, atol=1e-10)


def test_batch_matches_single(rng):
    stack = np.stack([_random_hermitian(rng, 3) for _ in range(7)])
    batch = nearest_psd_batch(stack)
    for M, P in zip(stack, batch):
        np.testing.assert_allclose(P, nearest_psd(M).projected, atol=1e-12)


def test_rejects_non_hermitian_and_non_square():
    with pytest.raises(NearnessError, match="not Hermitian"):
        nearest_psd([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(NearnessError, match="square"):
        nearest_psd(np.zeros((2, 3)))


def test_tiny_asymmetry_is_absorbed():
    M = np.array([[1.0, 1e-12], [0.0, -1.0]])
    result = nearest_psd(M)
    assert result.asymmetry > 0
    assert result.spectral_distance == pytest.approx(1.0)


def test_passive_model_is_its_own_projection(lowpass, log_grid):
    np.testing.assert_allclose(r_plus_curve(lowpass, log_grid), dissipation_matrices(lowpass, log_grid),
                               atol=1e-14)


def test_toy_at_high_frequency(toy):
    result = r_plus(toy, 1e8)
    assert result.projected[0, 0] == pytest.approx(0.0, abs=1e-12)
    assert result.spectral_distance == pytest.approx(2.0, abs=1e-6)


def test_trafe1_distance_at_the_dip(trafe1):
    dip = sweep_min_eigenvalue(trafe1)
    assert dip.value < 0
    result = r_plus(trafe1, dip.omega)
    assert result.spectral_distance == pytest.approx(-dip.value, abs=1e-10)
