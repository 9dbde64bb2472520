from __future__ import annotations

import math

import numpy as np
import pytest

from dissipation import (
    ANTI_PASSIVE,
    PASSIFIABLE,
    PASSIVE,
    DissipationError,
    NotHurwitzError,
    classify,
    classify_values,
    crossing_frequencies,
    hamiltonian,
    hankel_singular_values,
    hinf_norm,
    hinf_upper_bound,
    imaginary_frequencies,
    max_dissipation,
    min_dissipation,
    min_dissipation_bound,
    sweep_max_eigenvalue,
    sweep_min_eigenvalue,
)
from matkit import eigenvalues
from ss import FrequencyGrid, Realization, freqresp, from_tf, negate


def _close(value, oracle, rel=1e-6):
    return abs(value - oracle) <= rel * (1.0 + abs(oracle))


def test_hamiltonian_of_toy_at_zero(toy):
    N = hamiltonian(toy, 0.0)
    np.testing.assert_allclose(N, [[0.0, 0.5], [-2.0, 0.0]], atol=1e-14)
    vals = np.sort_complex(eigenvalues(N))
    np.testing.assert_allclose(vals, [-1j, 1j], atol=1e-14)
    np.testing.assert_allclose(imaginary_frequencies(N), [1.0])


def test_hamiltonian_shape(ttp):
    assert hamiltonian(ttp, 0.0).shape == (10, 10)


def test_hamiltonian_rejects_level_on_feedthrough_spectrum(toy):
    with pytest.raises(DissipationError):
        hamiltonian(toy, -2.0)


def test_toy_dissipation_is_exact(toy):
    assert min_dissipation(toy) == pytest.approx(-2.0, abs=1e-8)
    assert max_dissipation(toy) == pytest.approx(2.0, abs=1e-8)


def test_lowpass_is_passive_with_zero_minimum(lowpass):
    assert min_dissipation(lowpass) == pytest.approx(0.0, abs=1e-8)
    report = classify(lowpass)
    assert report.classification == PASSIVE
    assert report.label == "passive"
    assert report.is_passive


def test_negated_passive_model_is_anti_passive(lowpass):
    report = classify(negate(lowpass))
    assert report.classification == ANTI_PASSIVE


def test_max_is_negated_min_of_negated(trafe1):
    assert max_dissipation(trafe1) == -min_dissipation(negate(trafe1))


def test_ttp_against_sweep_oracle(ttp):
    report = classify(ttp)
    assert report.classification == PASSIFIABLE
    assert report.label == "non-passive, passifiable"
    assert report.is_passifiable

    oracle = sweep_min_eigenvalue(ttp)
    assert report.delta_minus < 0
    assert _close(report.delta_minus, oracle.value)
    assert _close(report.delta_plus, sweep_max_eigenvalue(ttp).value)


def test_dumi1_against_sweep_oracle(dumi1):
    lower = min_dissipation(dumi1)
    upper = max_dissipation(dumi1)
    assert lower < 0 < upper
    assert _close(lower, sweep_min_eigenvalue(dumi1).value)
    assert _close(upper, sweep_max_eigenvalue(dumi1).value)


def test_trafe1_bracket_chain(trafe1):
    report = classify(trafe1)
    S = np.linalg.eigvalsh(trafe1.D + trafe1.D.T)
    eps = 10 * report.tolerance
    assert report.classification == PASSIFIABLE
    assert report.delta_plus >= 8.0 - eps
    assert -2 * report.hinf - eps <= report.bracket_low <= report.delta_minus
    assert report.delta_minus <= S[0] + eps
    assert S[-1] <= report.delta_plus + eps
    assert report.delta_plus <= 2 * report.hinf + eps
    assert _close(report.delta_minus, sweep_min_eigenvalue(trafe1).value)


def test_bound_upper_end_is_attained(ttp):
    bound = min_dissipation_bound(ttp)
    assert bound.low <= bound.value == bound.high
    assert bound.high - bound.low <= 1e-8 * (1 + hinf_norm(ttp)) + 1e-15
    if math.isfinite(bound.omega):
        R = freqresp(ttp, [bound.omega])[0]
        assert np.linalg.eigvalsh(R + R.conj().T)[0] == pytest.approx(bound.value, abs=1e-8)


@pytest.mark.parametrize("name", ["ttp", "dumi1"])
def test_no_crossing_below_the_bound(request, name):
    R = request.getfixturevalue(name)
    lower = min_dissipation(R)
    gap = 1e-6 * (1 + abs(lower))
    assert crossing_frequencies(R, lower - gap) == []
    assert crossing_frequencies(R, lower + 100 * gap)


def test_bound_ignores_state_scaling(dumi1):
    t = 10.0 ** np.arange(dumi1.n)
    scaled = Realization(dumi1.A * t[None, :] / t[:, None], dumi1.B / t[:, None], dumi1.C * t[None, :], dumi1.D)
    assert _close(min_dissipation(scaled), min_dissipation(dumi1))

def test_hinf_norm_simple_cases(lowpass, toy):
    assert hinf_norm(lowpass) == pytest.approx(1.0, rel=1e-7)
    assert hinf_norm(toy) == pytest.approx(1.0, rel=1e-7)
    D = np.array([[1.0, 2.0], [0.0, 1.0]])
    assert hinf_norm(Realization.static(D)) == pytest.approx(np.linalg.norm(D, 2))


def test_hinf_norm_matches_dense_grid(ttp, trafe1):
    w = np.geomspace(1e-4, 1e4, 100_000)
    for R in (ttp, trafe1):
        grid_max = np.linalg.norm(freqresp(R, w), ord=2, axis=(1, 2)).max()
        h = hinf_norm(R)
        assert h >= grid_max * (1 - 1e-8)
        assert h <= grid_max * (1 + 1e-5)


def test_hankel_values_and_upper_bound(toy, trafe1):
    np.testing.assert_allclose(hankel_singular_values(toy), [1.0], rtol=1e-10)
    assert hinf_upper_bound(trafe1) >= hinf_norm(trafe1)


def test_static_model():
    R = Realization.static([[1.0, 0.0], [0.0, -1.0]])
    assert min_dissipation(R) == pytest.approx(-2.0)
    assert max_dissipation(R) == pytest.approx(2.0)
    assert hinf_norm(R) == pytest.approx(1.0)


def test_unstable_model_is_rejected():
    with pytest.raises(NotHurwitzError):
        classify(from_tf([1], [1, -1]))
    with pytest.raises(NotHurwitzError):
        hinf_norm(from_tf([1], [1, 0, 1]))


@pytest.mark.parametrize("lower, upper, expected", [
    (0.0, 1.0, PASSIVE),
    (-1e-12, 1.0, PASSIVE),
    (-2.0, -1.0, ANTI_PASSIVE),
    (-1.0, 1.0, PASSIFIABLE),
])
def test_classify_values(lower, upper, expected):
    assert classify_values(lower, upper, 1e-8) == expected


def test_crossing_frequencies_of_toy(toy):
    np.testing.assert_allclose(crossing_frequencies(toy, 0.0), [1.0], rtol=1e-10)
    assert crossing_frequencies(toy, -2.5) == []


def test_report_as_dict_has_label(ttp):
    data = classify(ttp).as_dict()
    assert data["label"] == "non-passive, passifiable"
    assert {"delta_minus", "delta_plus", "bracket_low", "bracket_high", "tolerance"} <= set(data)


def test_sweep_on_small_grid_reports_points(toy):
    result = sweep_min_eigenvalue(toy, FrequencyGrid.log(1e-2, 1e2, 101))
    assert result.points == 101
    # w = inf is checked explicitly
    assert result.value == pytest.approx(-2.0)
    assert result.omega == math.inf
