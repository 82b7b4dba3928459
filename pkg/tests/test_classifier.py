import math

import numpy as np
import pytest

from chtransit.classifier import (
    TransitionReport,
    TransitionType,
    classify_coupled,
    classify_general,
    classify_loop,
    classify_rectangular,
    classify_whole_space,
    loop_sigma,
    onset_sigmas,
    predict_amplitudes,
    reduced_coefficients,
)
from chtransit.errors import ResonanceError, UnsupportedPrediction
from chtransit.params import CoupledParams, ModelParams
from chtransit.spectral import DomainSpec

PI = math.pi


def P(g2, g3, lam=1.0):
    return ModelParams(lam, g2, g3)


class TestRectangular:
    def test_m1_type1_example(self):
        r = classify_rectangular(P(3, 3), PI, 1)
        assert r.transition_type is TransitionType.TYPE_I
        assert r.threshold_gamma3 == pytest.approx(2.0)
        assert r.sigma == pytest.approx(1.5)
        assert r.critical_exponent == 0.5
        assert r.predicted_amplitude_coefficient == pytest.approx(math.sqrt(2 / 1.5))

    def test_m1_type2_example(self):
        r = classify_rectangular(P(3, 1), PI, 1)
        assert r.transition_type is TransitionType.TYPE_II
        assert r.threshold_gamma3 == pytest.approx(2.0)
        assert r.predicted_amplitude_coefficient is None
        assert r.predicted_equilibria["saddle_node_bifurcations"] == 2

    def test_m2_example(self):
        r = classify_rectangular(P(3, 9), PI, 2)
        assert r.transition_type is TransitionType.TYPE_I
        assert r.threshold_gamma3 == pytest.approx(26 / 3)
        assert r.predicted_equilibria["count"] == 8
        assert r.predicted_equilibria["nonzero_equilibria"] == 8
        assert r.predicted_equilibria["minimal_attractors"] == 4

    def test_tie_is_at_threshold(self):
        assert classify_rectangular(P(3, 2.0), PI, 1).transition_type is TransitionType.AT_THRESHOLD

    def test_m_out_of_range(self):
        for m in (0, 4):
            with pytest.raises(ValueError):
                classify_rectangular(P(1, 1), PI, m)

    def test_m3_minimal_attractors_switch(self):
        unit = 9 / PI**2 * PI**2  # L^2 gamma2^2 / pi^2 with L = pi, gamma2 = 3
        below = classify_rectangular(P(3, 2.2 * unit), PI, 3)  # between 10/9 and 22/9
        above = classify_rectangular(P(3, 2.6 * unit), PI, 3)
        assert below.predicted_equilibria["minimal_attractors"] == 8
        assert below.predicted_equilibria["attracting_classes"] == ["full_diagonal"]
        assert above.predicted_equilibria["minimal_attractors"] == 6
        assert above.predicted_equilibria["attracting_classes"] == ["axis"]

    def test_m3_gap_band_is_flagged(self):
        # closed-form Type-I band where the full-diagonal stratum of the reduced system is empty
        r = classify_rectangular(P(3, 9.5), PI, 3)
        assert r.transition_type is TransitionType.TYPE_I
        assert r.predicted_equilibria["nonzero_equilibria"] == 18
        assert r.predicted_equilibria["reduced_origin_stable"] is False
        assert any("disagreeing" in n for n in r.notes)

    def test_roundtrip_dict(self):
        r = classify_rectangular(P(3, 30), PI, 2)
        assert TransitionReport.from_dict(r.to_dict()) == r


class TestCoefficients:
    def test_example_values(self):
        b, s1, s2 = reduced_coefficients(P(3, 10), PI, 1.05)
        assert b == pytest.approx(0.05)
        assert s1 == pytest.approx(15 + 9 / (1.05 - 4))
        assert s2 == pytest.approx(30 + 36 / (1.05 - 2))
        assert s1 == pytest.approx(11.949, abs=1e-3) and s2 == pytest.approx(-7.895, abs=1e-3)

    def test_gamma2_zero(self):
        _, s1, s2 = reduced_coefficients(P(0, 2), PI, 1.0)
        assert (s1, s2) == (3.0, 6.0)

    def test_onset_closed_forms(self):
        L, g2, g3 = 2.3, 1.7, 4.0
        s1, s2 = onset_sigmas(P(g2, g3), L)
        assert s1 == pytest.approx(1.5 * g3 - L**2 * g2**2 / (3 * PI**2))
        assert s2 == pytest.approx(3 * g3 - 4 * L**2 * g2**2 / PI**2)

    def test_resonance(self):
        for lam in (4.0, 2.0, 4.0 + 1e-9):
            with pytest.raises(ResonanceError):
                reduced_coefficients(P(1, 1), PI, lam)

    def test_coupled_corrections(self):
        cp = CoupledParams(P(1, 2), mu=0.5, alpha1=2.0, alpha2=0.5, gamma1=1.5)
        _, s1, s2 = reduced_coefficients(P(1, 2), PI, 1.0)
        _, c1, c2 = reduced_coefficients(P(1, 2), PI, 1.0, cp)
        a2g1 = 0.75
        assert s1 - c1 == pytest.approx(a2g1 / 2 + a2g1 / (2 * (2 + 4 * 0.5)))
        assert s2 - c2 == pytest.approx(a2g1 / 2 + 2 * a2g1 / (2 + 2 * 0.5))


class TestOtherGeometries:
    def test_loop_examples(self):
        r = classify_loop(P(1, 4), 3.0)
        assert r.transition_type is TransitionType.TYPE_I
        assert r.threshold_gamma3 == pytest.approx(2.0) and r.sigma == pytest.approx(1.5)
        assert r.lambda_critical == pytest.approx(1 / 9)
        assert r.predicted_amplitude_coefficient == pytest.approx(1.5**-0.5)
        r2 = classify_loop(P(1, 1), 3.0)
        assert r2.transition_type is TransitionType.TYPE_II
        assert "singularity_separation" in r2.predicted_equilibria
        assert classify_loop(P(0, 0.01), 2.0).threshold_gamma3 == 0.0
        with pytest.raises(ValueError):
            classify_loop(P(0, 1), 0.9)

    def test_loop_sigma_at_onset(self):
        r0 = 3.0
        assert loop_sigma(P(1, 4), r0, 1 / r0**2) == pytest.approx(0.75 * 4 - r0**2 / 6)

    def test_whole_space(self):
        r = classify_whole_space(P(3, 5), 2)
        assert r.transition_type is TransitionType.TYPE_I
        assert r.threshold_gamma3 == pytest.approx(14 / 3)
        assert r.predicted_equilibria["attractor"] == "S^3"
        assert r.predicted_equilibria["singularity_tori"] == [{"dimension": 2, "count": 1}, {"dimension": 1, "count": 2}]
        assert classify_whole_space(P(3, 4), 2).transition_type is TransitionType.TYPE_II
        assert classify_whole_space(P(0, 1), 2).transition_type is TransitionType.TYPE_I
        with pytest.raises(ValueError):
            classify_whole_space(P(0, 1), 1)

    def test_whole_space_torus_inventory_n3(self):
        inv = classify_whole_space(P(0, 1), 3).predicted_equilibria["singularity_tori"]
        assert inv == [{"dimension": 3, "count": 1}, {"dimension": 2, "count": 3}, {"dimension": 1, "count": 3}]

    def test_general(self):
        r = classify_general(P(0, 1), 2, 0.0)
        assert r.transition_type is TransitionType.TYPE_I and r.predicted_equilibria["min_singular_points"] == 4
        r = classify_general(P(1, 1), 1, 0.5)
        assert r.transition_type is TransitionType.TYPE_III
        assert r.predicted_equilibria["linear_slope"] == pytest.approx(2.0) and r.critical_exponent == 1.0
        assert classify_general(P(1, 1), 1, 0.0).transition_type is TransitionType.DEFERRED
        assert classify_general(P(1, 1), 2, 1.0).transition_type is TransitionType.TYPE_II_OR_III
        r = classify_general(P(3, 3), 1, 0.0, L=PI)
        assert r.transition_type is TransitionType.TYPE_I


class TestCoupled:
    def test_example_sigma(self):
        cp = CoupledParams(P(0, 2), mu=1.0, alpha1=1.0, alpha2=1.0, gamma1=1.0)
        r = classify_coupled(cp, PI, 1)
        assert abs(r.sigma - 1.9) < 1e-12
        assert r.transition_type is TransitionType.TYPE_I

    def test_mu_zero_matches_shifted_gamma3(self):
        cp = CoupledParams(P(3, 4), mu=0.0, alpha1=1.0, alpha2=1.0, gamma1=1.0)
        assert classify_coupled(cp, PI, 1).transition_type is classify_rectangular(P(3, 3), PI, 1).transition_type

    def test_vanishing_coupling(self):
        cp = CoupledParams(P(3, 3), mu=2.0, alpha1=1.0, alpha2=1e-14, gamma1=1e-14)
        assert classify_coupled(cp, PI, 1).sigma == pytest.approx(classify_rectangular(P(3, 3), PI, 1).sigma)

    def test_m2_sigma_tilde(self):
        cp = CoupledParams(P(1, 5), mu=1.0, alpha1=1.0, alpha2=1.0, gamma1=1.0)
        expected = 4.5 * 5 - (2 + 1 / (2 * 5) + 2 / 3) - 13 / 3
        assert classify_coupled(cp, PI, 2).sigma == pytest.approx(expected, abs=1e-12)


class TestAmplitudes:
    def test_interval(self):
        preds = predict_amplitudes(P(0, 2, 1.03), DomainSpec.rectangular(PI))
        assert len(preds) == 1
        assert preds[0][1] == pytest.approx(math.sqrt(2 * 0.03 / 3), rel=1e-12)
        assert preds[0][1] == pytest.approx(0.1414, abs=1e-4)

    def test_loop(self):
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            preds = predict_amplitudes(P(0, 4, 1 / 9 + 0.03), DomainSpec.loop(3.0))
        assert preds[0][1] == pytest.approx(0.1, rel=1e-12)

    def test_at_onset_zero(self):
        preds = predict_amplitudes(P(0, 2, 1.0), DomainSpec.rectangular((PI, PI)))
        assert all(a == 0 for _, a in preds)
        assert [d["stratum"] for d, _ in preds] == ["axis", "full_diagonal"]

    def test_unsupported(self):
        with pytest.raises(UnsupportedPrediction):
            predict_amplitudes(P(3, 1, 1.01), DomainSpec.rectangular(PI))
        with pytest.raises(UnsupportedPrediction):
            predict_amplitudes(P(0, 2, 0.9), DomainSpec.rectangular(PI))


@pytest.mark.parametrize("seed", range(5))
def test_threshold_monotone_random(seed):
    rng = np.random.default_rng(seed)
    g2 = rng.uniform(-4, 4)
    L = rng.uniform(0.5, 5)
    for m in (1, 2, 3):
        types = [classify_rectangular(P(g2, g3), L, m).transition_type for g3 in np.linspace(0.01, 60, 200)]
        first_type1 = next((i for i, t in enumerate(types) if t is TransitionType.TYPE_I), len(types))
        assert all(t is TransitionType.TYPE_I for t in types[first_type1:])
