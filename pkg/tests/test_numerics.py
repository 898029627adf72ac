import numpy as np
import pytest
from scipy import optimize

from py_fdp_audit.core.numerics.special_functions import (
    NumericDomainError,
    beta_cdf,
    beta_quantile,
    log_diff_exp,
    std_normal_cdf,
    std_normal_quantile,
)


class TestStdNormal:
    def test_cdf_at_zero_is_one_half(self):
        assert std_normal_cdf(0.0) == 0.5

    def test_cdf_matches_reference_value(self):
        assert std_normal_cdf(1.959964) == pytest.approx(0.975, abs=1e-6)

    @pytest.mark.parametrize("x", [0.1, 1.0, 3.0])
    def test_cdf_symmetry(self, x: float):
        assert std_normal_cdf(-x) == pytest.approx(1.0 - std_normal_cdf(x), abs=1e-12)

    def test_cdf_is_monotone_and_symmetric_on_dense_grid(self):
        grid = np.linspace(-8.0, 8.0, 4001)
        values = np.asarray(std_normal_cdf(grid))
        assert (np.diff(values) >= 0.0).all()
        assert np.max(np.abs(values + np.asarray(std_normal_cdf(-grid)) - 1.0)) <= 1e-12

    def test_cdf_accepts_infinities(self):
        assert std_normal_cdf(-np.inf) == 0.0
        assert std_normal_cdf(np.inf) == 1.0

    def test_quantile_reference_values(self):
        assert std_normal_quantile(0.5) == 0.0
        assert std_normal_quantile(0.975) == pytest.approx(1.959964, abs=1e-6)

    def test_quantile_round_trips_the_cdf(self):
        grid = np.linspace(-6.0, 5.0, 221)
        recovered = np.asarray(std_normal_quantile(std_normal_cdf(grid)))
        assert np.max(np.abs(recovered - grid)) <= 1e-9

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
    def test_quantile_rejects_closed_endpoints(self, p: float):
        with pytest.raises(NumericDomainError, match="QUANTILE DOMAIN ERROR"):
            std_normal_quantile(p)

    def test_nan_is_rejected(self):
        with pytest.raises(NumericDomainError, match="NAN ARGUMENT"):
            std_normal_cdf(float("nan"))

    def test_scalar_in_scalar_out(self):
        assert isinstance(std_normal_cdf(0.3), float)
        assert isinstance(std_normal_cdf([0.3, 0.4]), np.ndarray)


class TestBeta:
    def test_uniform_median(self):
        assert beta_quantile(0.5, 1.0, 1.0) == pytest.approx(0.5, abs=1e-12)

    def test_closed_form_for_unit_first_shape(self):
        expected = 1.0 - 0.025 ** (1.0 / 1000.0)
        assert beta_quantile(0.975, 1.0, 1000.0) == pytest.approx(expected, abs=1e-10)

    def test_endpoints(self):
        assert beta_quantile(0.0, 3.0, 4.0) == 0.0
        assert beta_quantile(1.0, 3.0, 4.0) == 1.0

    @pytest.mark.parametrize("a, b", [(0.5, 0.5), (2.0, 5.0), (300.5, 700.5), (1.0, 1000.0)])
    def test_quantile_round_trips_and_is_monotone(self, a: float, b: float):
        ps = np.linspace(0.01, 0.99, 99)
        xs = np.asarray(beta_quantile(ps, a, b))
        assert (np.diff(xs) > 0.0).all()
        assert np.max(np.abs(np.asarray(beta_cdf(xs, a, b)) - ps)) <= 1e-9

    def test_quantile_agrees_with_bisection(self):
        a, b, p = 12.5, 88.5, 0.3
        root = optimize.bisect(lambda x: float(beta_cdf(x, a, b)) - p, 0.0, 1.0, xtol=1e-13)
        assert beta_quantile(p, a, b) == pytest.approx(root, abs=1e-9)

    def test_invalid_shapes_raise(self):
        with pytest.raises(NumericDomainError, match="BETA SHAPE ERROR"):
            beta_quantile(0.5, 0.0, 1.0)

    def test_cdf_rejects_out_of_range_x(self):
        with pytest.raises(NumericDomainError, match="BETA CDF DOMAIN ERROR"):
            beta_cdf(1.5, 1.0, 1.0)


class TestLogDiffExp:
    def test_matches_direct_evaluation(self):
        assert log_diff_exp(np.log(3.0), np.log(1.0)) == pytest.approx(np.log(2.0), abs=1e-14)

    def test_equal_arguments_give_negative_infinity(self):
        assert log_diff_exp(0.5, 0.5) == -np.inf

    def test_negative_infinite_subtrahend(self):
        assert log_diff_exp(1.25, -np.inf) == 1.25
