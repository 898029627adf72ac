import math

import numpy as np
import pytest
from pydantic import ValidationError

from py_fdp_audit.core.accountant.end_to_end import steps_to_end_eps
from py_fdp_audit.core.accountant.gdp_accounting import InvalidGdpParameterError, gdp_compose
from py_fdp_audit.core.accountant.mechanism_spec import MechanismSpec
from py_fdp_audit.core.accountant.privacy_loss_distribution import (
    PldResolutionError,
    pld_build,
    pld_delta_of_eps,
    pld_eps_curve,
    pld_eps_of_delta,
)
from py_fdp_audit.core.tradeoff.gdp_conversion import gdp_eps_of_delta


class TestGdpCompose:
    def test_pythagorean_triple(self):
        assert gdp_compose([3.0, 4.0]) == pytest.approx(5.0)

    def test_single_mechanism(self):
        assert gdp_compose([0.7]) == pytest.approx(0.7)

    def test_many_small_mechanisms(self):
        assert gdp_compose([0.1] * 100) == pytest.approx(1.0)

    def test_permutation_invariant(self):
        assert gdp_compose([0.2, 1.5]) == gdp_compose([1.5, 0.2])

    def test_negative_mu_is_rejected(self):
        with pytest.raises(InvalidGdpParameterError, match="GDP COMPOSITION ERROR"):
            gdp_compose([1.0, -0.1])


class TestMechanismSpec:
    def test_defaults(self):
        spec = MechanismSpec(sigma=2.0)
        assert (spec.q, spec.steps, spec.sensitivity) == (1.0, 1, 1.0)
        assert spec.noise_stddev == 2.0

    @pytest.mark.parametrize("fields", [{"sigma": 0.0}, {"sigma": 1.0, "q": 0.0}, {"sigma": 1.0, "steps": 0}])
    def test_invalid_fields(self, fields: dict):
        with pytest.raises(ValidationError):
            MechanismSpec(**fields)


class TestPldAccountant:
    def test_single_gaussian_matches_gdp(self):
        accountant = pld_build(MechanismSpec(sigma=1.0))
        assert pld_eps_of_delta(accountant, 1e-5) == pytest.approx(gdp_eps_of_delta(1.0, 1e-5), abs=1e-2)

    @pytest.mark.parametrize("mu", [0.25, 0.5, 1.0])
    @pytest.mark.parametrize("steps", [1, 4, 16])
    def test_composed_gaussian_matches_gdp_composition(self, mu: float, steps: int):
        accountant = pld_build(MechanismSpec(sigma=1.0 / mu, steps=steps))
        expected = gdp_eps_of_delta(math.sqrt(steps) * mu, 1e-5)
        assert pld_eps_of_delta(accountant, 1e-5) == pytest.approx(expected, abs=1e-2)

    def test_large_noise_has_small_epsilon(self):
        assert pld_eps_of_delta(pld_build(MechanismSpec(sigma=100.0)), 1e-5) <= 0.1

    def test_masses_sum_to_one(self):
        accountant = pld_build(MechanismSpec(sigma=1.0, q=0.1, steps=10))
        for distribution in accountant.distributions:
            assert (distribution.masses >= 0.0).all()
            assert distribution.total_mass == pytest.approx(1.0, abs=1e-9)

    def test_epsilon_is_nonincreasing_in_delta(self):
        accountant = pld_build(MechanismSpec(sigma=1.0, q=0.1, steps=10))
        deltas, epsilons = pld_eps_curve(accountant, 50, 1e-6)
        assert deltas[0] == 1e-6
        assert (np.diff(epsilons) <= 0.0).all()

    def test_composition_never_lowers_epsilon(self):
        single = pld_build(MechanismSpec(sigma=1.0, q=0.2))
        composed = pld_build(MechanismSpec(sigma=1.0, q=0.2, steps=16))
        assert pld_eps_of_delta(composed, 1e-5) >= pld_eps_of_delta(single, 1e-5)

    def test_subsampling_amplifies_privacy(self):
        full = pld_eps_of_delta(pld_build(MechanismSpec(sigma=1.0)), 1e-5)
        sampled = pld_eps_of_delta(pld_build(MechanismSpec(sigma=1.0, q=0.05)), 1e-5)
        assert sampled < full

    def test_delta_of_eps_inverts_eps_of_delta(self):
        accountant = pld_build(MechanismSpec(sigma=1.0, q=0.5, steps=3))
        eps = pld_eps_of_delta(accountant, 1e-4)
        assert pld_delta_of_eps(accountant, eps) <= 1e-4 * (1.0 + 1e-6)

    def test_halving_the_grid_spacing_changes_little(self):
        spec = MechanismSpec(sigma=1.0, q=0.1, steps=8)
        coarse = pld_eps_of_delta(pld_build(spec, 2e-4), 1e-5)
        fine = pld_eps_of_delta(pld_build(spec), 1e-5)
        assert abs(coarse - fine) <= 1e-2

    def test_builds_are_cached(self):
        spec = MechanismSpec(sigma=1.5, q=0.3, steps=2)
        assert pld_build(spec) is pld_build(spec)

    def test_unreachable_delta_is_reported(self):
        accountant = pld_build(MechanismSpec(sigma=0.05), 1e-3, 5.0)
        with pytest.raises(PldResolutionError, match="PLD RESOLUTION ERROR"):
            pld_eps_of_delta(accountant, 1e-12)

    @pytest.mark.parametrize("delta", [0.0, 1.0])
    def test_delta_domain(self, delta: float):
        with pytest.raises(PldResolutionError, match="DELTA DOMAIN ERROR"):
            pld_eps_of_delta(pld_build(MechanismSpec(sigma=1.0)), delta)


class TestStepsToEndEps:
    def test_full_batch_uses_gdp_composition(self):
        assert steps_to_end_eps(0.1, 100, 1.0, 1e-5) == pytest.approx(gdp_eps_of_delta(1.0, 1e-5))

    def test_single_step(self):
        assert steps_to_end_eps(0.6, 1, 1.0, 1e-5) == pytest.approx(gdp_eps_of_delta(0.6, 1e-5))

    def test_no_leakage_stays_zero(self):
        assert steps_to_end_eps(0.0, 1000, 0.01, 1e-5) == 0.0

    def test_subsampled_path_uses_the_numerical_accountant(self):
        expected = pld_eps_of_delta(pld_build(MechanismSpec(sigma=2.0, q=0.1, steps=10)), 1e-5)
        assert steps_to_end_eps(0.5, 10, 0.1, 1e-5) == pytest.approx(expected)

    def test_invalid_arguments(self):
        with pytest.raises(ValueError, match="END TO END DOMAIN ERROR"):
            steps_to_end_eps(-0.1, 10, 1.0, 1e-5)
