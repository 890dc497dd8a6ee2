import numpy as np
import pytest
from scipy import stats

from qcorr.collective import (
    REGIMES,
    SETTINGS,
    CountRecord,
    InterferenceModel,
    ProjectionSetting,
    balanced_probability,
    bell_success_probability,
    collective_A,
    collective_B,
    counts_from_R,
    expected_counts,
    four_fold_probability,
    interpolate_R,
    pi_operator,
    r_from_collective,
    records_from_csv,
    records_to_csv,
    simulate_counts,
    singlet_projector,
    trials_for_events,
    white_noise_counts,
)
from qcorr.fixtures import R_BELL, R_NOISE
from qcorr.matcore import PAULI, kron
from qcorr.measures import steering_S, steering_S3
from qcorr.states import HH, HV, SINGLET, VH, WHITE_NOISE, bloch_decompose, gws, projector, random_density, werner

PSI_PLUS = (HV + VH) / np.sqrt(2)


def test_settings_enumerate_36_distinct_pairs():
    assert len(SETTINGS) == len(set(SETTINGS)) == 36
    with pytest.raises(ValueError):
        ProjectionSetting("H", "X")


def test_singlet_projector_identities():
    P = singlet_projector()
    np.testing.assert_allclose(P @ SINGLET, SINGLET, atol=1e-15)
    np.testing.assert_allclose(P @ PSI_PLUS, 0, atol=1e-15)
    assert np.trace(pi_operator()).real == pytest.approx(-4.0)
    pauli_sum = sum(kron(s, s) for s in PAULI)
    np.testing.assert_allclose((np.eye(4) - pauli_sum) / 4, P, atol=1e-12)


def test_singlet_collective_elements():
    rho = projector(SINGLET)
    assert collective_A(rho, 1, 1) + collective_B(rho, 1, 1) == pytest.approx(1.0, abs=1e-12)


def test_white_noise_collective_elements_vanish():
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            assert collective_A(WHITE_NOISE, i, j) == pytest.approx(0.0, abs=1e-15)
            assert collective_B(WHITE_NOISE, i, j) == pytest.approx(0.0, abs=1e-15)


def test_product_state_uses_local_term():
    rho = projector(HH)
    assert collective_B(rho, 3, 3) == pytest.approx(1.0)
    assert collective_A(rho, 3, 3) + collective_B(rho, 3, 3) == pytest.approx(1.0)


def test_index_checked():
    with pytest.raises(ValueError):
        collective_A(WHITE_NOISE, 0, 1)
    with pytest.raises(ValueError):
        collective_B(WHITE_NOISE, 1, 4)
    with pytest.raises(ValueError):
        collective_A(WHITE_NOISE, 1, 1, operator="other")


@pytest.mark.parametrize("p", [0.0, 0.45, 1.0])
def test_r_from_collective_werner(p):
    np.testing.assert_allclose(r_from_collective(werner(p)).matrix, p * p * np.eye(3), atol=1e-12)


def test_r_from_collective_gws():
    np.testing.assert_allclose(r_from_collective(gws(0.6, 0.5)).matrix, np.diag([0.36] * 3), atol=1e-12)


def test_r_from_collective_matches_bloch_on_random_states():
    for seed in range(30):
        rho = random_density(seed)
        d = bloch_decompose(rho)
        np.testing.assert_allclose(r_from_collective(rho).matrix, d.T @ d.T.T, atol=1e-12)
        a_only = r_from_collective(rho, include_local=False).matrix
        np.testing.assert_allclose(a_only, d.T @ d.T.T - np.outer(d.u, d.u), atol=1e-12)


def test_one_minus_pi_convention_differs_only_by_local_term():
    # with I - Pi in place of Pi the element becomes B - A, so the two agree only when u = 0
    rho = random_density(5)
    for i, j in [(1, 1), (2, 3)]:
        alt = collective_A(rho, i, j, operator="one_minus_pi")
        assert alt == pytest.approx(collective_B(rho, i, j) - collective_A(rho, i, j), abs=1e-12)


def test_balanced_states_have_zero_local_term():
    for p in (0.2, 0.9):
        for i in (1, 2, 3):
            assert collective_B(werner(p), i, i) == 0.0


def test_probabilities_sum_to_bell_success():
    model = InterferenceModel()
    pairs = [("H", "V"), ("D", "A"), ("R", "L")]
    for seed in range(5):
        rho = random_density(seed)
        for regime in REGIMES:
            expected = bell_success_probability(rho, regime, model)
            for a in pairs:
                for b in pairs:
                    total = sum(four_fold_probability(rho, ProjectionSetting(x, y), regime, model)
                                for x in a for y in b)
                    assert total == pytest.approx(expected, abs=1e-12)
            for s in SETTINGS:
                assert 0.0 <= four_fold_probability(rho, s, regime, model) <= 1.0


def test_balanced_probability_matches_trace_formula():
    model = InterferenceModel(0.3)
    for p in (0.0, 0.5, 1.0):
        for regime in REGIMES:
            for s in SETTINGS:
                exact = four_fold_probability(werner(p), s, regime, model)
                assert balanced_probability(p * p * np.eye(3), s, regime, model) == pytest.approx(exact, abs=1e-15)


def test_counts_converge_to_probabilities():
    n = 1e6
    model = InterferenceModel()
    rho = random_density(1)
    exact = expected_counts(rho, model, n)
    sim = simulate_counts(rho, model, n, seed=3)
    z = [(s.counts - e.counts) / np.sqrt(e.counts) for s, e in zip(sim, exact)]
    assert max(abs(x) for x in z) < 5.0


def test_full_non_interference_makes_regimes_identical():
    model = InterferenceModel(1.0)
    recs = simulate_counts(projector(SINGLET), model, 1e5, seed=2)
    tuned = np.array([r.counts for r in recs if r.regime == "tuned"])
    detuned = np.array([r.counts for r in recs if r.regime == "detuned"])
    exp_t = np.array([r.counts for r in expected_counts(projector(SINGLET), model, 1e5, regimes=("tuned",))])
    exp_d = np.array([r.counts for r in expected_counts(projector(SINGLET), model, 1e5, regimes=("detuned",))])
    np.testing.assert_allclose(exp_t, exp_d, rtol=1e-12)
    # paired Poisson differences should look like N(0, 1)
    z = (tuned - detuned) / np.sqrt(tuned + detuned)
    assert stats.kstest(z, "norm").pvalue > 0.01


def test_simulation_is_reproducible():
    a = records_to_csv(simulate_counts(werner(0.7), seed=11))
    b = records_to_csv(simulate_counts(werner(0.7), seed=11))
    c = records_to_csv(simulate_counts(werner(0.7), seed=12))
    assert a == b != c


def test_simulation_rejects_bad_input():
    with pytest.raises(ValueError):
        simulate_counts(werner(0.5), mean_events=0)
    with pytest.raises(ValueError):
        simulate_counts(np.eye(4))


def test_white_noise_counts_isotropic():
    exact = expected_counts(WHITE_NOISE, InterferenceModel(), 1e5, regimes=("wide",))
    vals = {round(r.counts, 9) for r in exact}
    assert len(vals) == 1
    recs = white_noise_counts(1e5, seed=1)
    assert len(recs) == 36 and {r.regime for r in recs} == {"wide"}


def test_count_record_validation():
    with pytest.raises(ValueError):
        CountRecord(SETTINGS[0], "tuned", -1)
    with pytest.raises(ValueError):
        CountRecord(SETTINGS[0], "tuned", 1, exposure=0)
    with pytest.raises(ValueError):
        CountRecord(SETTINGS[0], "wide_window", 1)
    with pytest.raises(ValueError):
        InterferenceModel(1.2)


def test_csv_round_trip():
    recs = simulate_counts(werner(0.3), seed=0)
    text = records_to_csv(recs)
    assert text.splitlines()[0] == "alice,bob,regime,counts,exposure"
    assert records_from_csv(text) == recs
    with pytest.raises(ValueError):
        records_from_csv("a,b\n")
    with pytest.raises(ValueError):
        records_from_csv("alice,bob,regime,counts,exposure\nH,V,tuned,1\n")


def test_counts_from_R_matches_state_simulation():
    model = InterferenceModel()
    a = counts_from_R(0.49 * np.eye(3), model, 1e4, seed=None)
    b = expected_counts(werner(0.7), model, 1e4)
    for x, y in zip(a, b):
        assert x.counts == pytest.approx(y.counts, rel=1e-12)


def test_trials_for_events():
    recs = expected_counts(werner(0.2), InterferenceModel(), trials_for_events(1e5), regimes=("detuned",))
    assert all(r.counts == pytest.approx(1e5) for r in recs)


def test_interpolation():
    np.testing.assert_array_equal(interpolate_R(R_BELL, R_NOISE, 1.0).matrix, R_BELL)
    assert round(steering_S(interpolate_R(R_BELL, R_NOISE, 0.8)), 3) == 0.654
    assert steering_S3(interpolate_R(R_BELL, R_NOISE, 0.9)) == pytest.approx(0.723, abs=0.005)
    with pytest.raises(ValueError):
        interpolate_R(R_BELL, R_NOISE, 1.1)


def test_interpolation_is_affine_in_p_squared():
    p, p2, alpha = 0.4, 0.9, 0.3
    mix = alpha * interpolate_R(R_BELL, R_NOISE, p).matrix + (1 - alpha) * interpolate_R(R_BELL, R_NOISE, p2).matrix
    eff = np.sqrt(alpha * p**2 + (1 - alpha) * p2**2)
    np.testing.assert_allclose(mix, interpolate_R(R_BELL, R_NOISE, eff).matrix, atol=1e-15)
