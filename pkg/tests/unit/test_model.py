import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.engine.model import (
    IDX_A,
    IDX_B,
    IDX_COH,
    TRACE_VECTOR,
    EngineParams,
    affinity,
    bose_occupation,
    build_generator,
    coherence_coupling,
    occupations,
    zero_bias_hot_temperature,
)
from src.exceptions import DomainError


class TestEngineParams:

    def test_defaults(self):
        params = EngineParams()
        assert (params.e1, params.e_a, params.e_b) == (0.5, 3.0, 2.0)
        assert (params.g, params.r, params.tau) == (1.0, 0.1, 0.1)
        assert (params.p_c, params.p_h) == (0.0, 0.0)

    def test_level_ordering_enforced(self):
        with pytest.raises(ValidationError):
            EngineParams(e_a=1.5, e_b=2.0)

    def test_non_positive_temperature_rejected(self):
        with pytest.raises(ValidationError):
            EngineParams(t_c=0.0)

    def test_coherence_outside_unit_interval_rejected(self):
        with pytest.raises(ValidationError):
            EngineParams(p_h=1.2)

    def test_unknown_field_rejected(self):
        with pytest.raises(ValidationError):
            EngineParams(t_x=1.0)

    def test_classical_drops_coherence_only(self, coherent_params):
        classical = coherent_params.classical()
        assert classical.p_c == 0.0 and classical.p_h == 0.0
        assert classical.t_h == coherent_params.t_h

    def test_json_round_trip(self, coherent_params):
        text = coherent_params.model_dump_json()
        assert EngineParams.model_validate_json(text) == coherent_params

    def test_fixed_fields(self):
        assert set(EngineParams().fixed_fields()) == {"e1", "e_a", "e_b", "g", "r", "tau"}


class TestBoseOccupation:

    def test_known_value(self):
        assert bose_occupation(1.0, 1.0) == pytest.approx(1.0 / (math.e - 1.0), rel=1e-15)

    def test_frozen_bath_goes_to_zero(self):
        assert bose_occupation(1000.0, 1.0) == 0.0

    def test_non_positive_gap(self):
        with pytest.raises(DomainError):
            bose_occupation(0.0, 1.0)

    def test_non_positive_temperature(self):
        with pytest.raises(DomainError):
            bose_occupation(1.0, -1.0)

    def test_gap_conventions(self, reference_params):
        occ = occupations(reference_params)
        assert occ.n_h == pytest.approx(1.0 / math.expm1(2.5 / 3.5))
        assert occ.n_c == pytest.approx(1.0 / math.expm1(1.5 / 1.0))
        assert occ.n_l == pytest.approx(1.0 / math.expm1(1.0 / 2.0))
        assert occ.nt_l == pytest.approx(1.0 + occ.n_l)


class TestCoherenceCoupling:

    def test_product(self):
        assert coherence_coupling(0.1, 0.5) == pytest.approx(0.05)

    def test_zero_strength(self):
        assert coherence_coupling(0.1, 0.0) == 0.0

    def test_invalid_rate(self):
        with pytest.raises(DomainError):
            coherence_coupling(0.0, 0.5)

    def test_invalid_strength(self):
        with pytest.raises(DomainError):
            coherence_coupling(0.1, 1.5)


class TestBuildGenerator:

    def test_population_conservation(self, coherent_params):
        gen = build_generator(coherent_params)
        assert np.max(np.abs(TRACE_VECTOR @ gen.l0)) < 1e-12

    def test_printed_matrix_breaks_conservation(self, coherent_params):
        gen = build_generator(coherent_params, printed=True)
        leak = (TRACE_VECTOR @ gen.l0)[IDX_COH]
        occ = occupations(coherent_params)
        expected = -coherence_coupling(coherent_params.r, coherent_params.p_c) * occ.n_c
        assert leak == pytest.approx(expected)

    def test_has_zero_eigenvalue(self, coherent_params):
        eigs = np.linalg.eigvals(build_generator(coherent_params).l0)
        assert np.min(np.abs(eigs)) < 1e-10

    def test_classical_decouples_coherence(self, reference_params):
        l0 = build_generator(reference_params).l0
        assert np.all(l0[IDX_COH, :IDX_COH] == 0.0)
        assert np.all(l0[:IDX_COH, IDX_COH] == 0.0)

    def test_matrices_are_read_only(self, reference_params):
        gen = build_generator(reference_params)
        with pytest.raises(ValueError):
            gen.l0[0, 0] = 1.0

    def test_evaluate_at_zero_is_l0(self, coherent_params):
        gen = build_generator(coherent_params)
        np.testing.assert_array_equal(gen.evaluate(0.0), gen.l0)

    def test_counting_entries(self, reference_params):
        gen = build_generator(reference_params)
        lam = 0.3
        twisted = gen.evaluate(lam)
        assert twisted[IDX_B, IDX_A] == pytest.approx(gen.emission_rate * math.exp(-lam))
        assert twisted[IDX_A, IDX_B] == pytest.approx(gen.absorption_rate * math.exp(lam))

    def test_complex_counting_field(self, reference_params):
        twisted = build_generator(reference_params).evaluate(0.1j)
        assert twisted.dtype == complex

    def test_derivative_signs(self, reference_params):
        gen = build_generator(reference_params)
        for k in range(1, 5):
            d = gen.derivative(k)
            assert d[IDX_A, IDX_B] == gen.absorption_rate
            assert d[IDX_B, IDX_A] == (-1) ** k * gen.emission_rate
            assert np.count_nonzero(d) == 2

    def test_derivative_matches_central_difference(self, coherent_params):
        gen = build_generator(coherent_params)
        h = 1e-5
        numeric = (gen.evaluate(h) - gen.evaluate(-h)) / (2 * h)
        np.testing.assert_allclose(numeric, gen.derivative(1), rtol=1e-8, atol=1e-12)

    def test_derivative_order_out_of_range(self, reference_params):
        with pytest.raises(DomainError):
            build_generator(reference_params).derivative(5)


class TestAffinity:

    def test_reference_value(self, reference_params):
        assert affinity(reference_params) == pytest.approx(-1.1257, abs=1e-3)

    def test_zero_bias_temperature(self, reference_params):
        t_h = zero_bias_hot_temperature(reference_params)
        assert t_h == pytest.approx(2.072, abs=2e-3)
        balanced = EngineParams(t_h=t_h)
        assert affinity(balanced) == pytest.approx(0.0, abs=1e-12)
