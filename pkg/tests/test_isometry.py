"""Smooth-map catalog, Stieltjes sums, and two-sided comparison tests."""

import numpy as np
import numpy.testing as npt
import pytest

import roughvar as rv
from roughvar.errors import EvaluationError, ValidationError

LEVELS = range(6, 13)


@pytest.fixture(scope="module")
def takagi14():
    return rv.takagi_path(0.5, 14)


@pytest.fixture(scope="module")
def fbm14():
    return rv.fbm_path(0.4, 14, seed=0)


# ---------------------------------------------------------------------------
# Map catalog
# ---------------------------------------------------------------------------


class TestSmoothMapCatalog:
    @pytest.mark.parametrize("factory,lo,hi", [
        (rv.identity_map, -2.0, 2.0),
        (lambda: rv.affine_map(3.0, -1.0), -2.0, 2.0),
        (rv.square_plus_one_map, -2.0, 2.0),
        (rv.sin_map, -2.0, 2.0),
        (rv.exp_clamped_map, -2.0, 3.0),
    ])
    def test_derivative_consistent_with_finite_differences(self, factory, lo, hi):
        f = factory()
        assert f.fd_residual(lo, hi) <= f.K * 1e-5 ** 2

    def test_exp_clamp_freezes_value_and_derivative(self):
        f = rv.exp_clamped_map(cap=5.0)
        npt.assert_allclose(f.f(np.array([7.0, 9.0])), np.exp(5.0))
        npt.assert_array_equal(f.f1(np.array([7.0, 9.0])), [0.0, 0.0])

    def test_bounds_report_suprema(self):
        b = rv.sin_map().bounds(0.0, np.pi)
        assert 0.999 <= b["sup_f"] <= 1.0
        assert 0.999 <= b["sup_f1"] <= 1.0
        assert b["sup_f2"] <= 1.0

    def test_tabulated_map_recovers_a_known_function(self):
        grid = np.linspace(-2.0, 2.0, 401)
        f = rv.tabulated_map("sin_table", grid, np.sin(grid))
        u = np.linspace(-1.5, 1.5, 31)
        npt.assert_allclose(f.f(u), np.sin(u), atol=1e-8)
        npt.assert_allclose(f.f1(u), np.cos(u), atol=1e-6)
        assert f.lower_trust
        assert f.K >= 1.0

    def test_tabulated_map_needs_enough_samples(self):
        with pytest.raises(ValidationError, match=">= 4"):
            rv.tabulated_map("short", [0.0, 1.0, 2.0], [0.0, 1.0, 4.0])

    def test_builtin_lookup_and_affine_parsing(self):
        assert rv.builtin_map("sin").id == "sin"
        f = rv.builtin_map("affine:2,1")
        npt.assert_array_equal(f.f(np.array([3.0])), [7.0])
        with pytest.raises(ValidationError, match="affine:a,b"):
            rv.builtin_map("affine:2;1")
        with pytest.raises(ValidationError, match="unknown map"):
            rv.builtin_map("tan")


class TestComposePath:
    def test_identity_is_a_bitwise_copy(self, takagi14):
        fx = rv.compose_path(rv.identity_map(), takagi14)
        npt.assert_array_equal(fx.samples, takagi14.samples)
        assert not np.shares_memory(fx.samples, takagi14.samples)

    def test_square_plus_one_of_linear_time(self):
        t = rv.Path(grid_level=2, samples=rv.grid_times(2), label="t")
        fx = rv.compose_path(rv.square_plus_one_map(), t)
        npt.assert_array_equal(fx.samples, [1.0, 1.0625, 1.25, 1.5625, 2.0])
        assert fx.label == "square_plus_one(t)"

    def test_composition_associates(self, takagi14):
        s = rv.sin_map()
        once = rv.compose_path(s, rv.compose_path(s, takagi14))
        direct = np.sin(np.sin(takagi14.samples))
        npt.assert_array_equal(once.samples, direct)

    def test_nonfinite_image_is_reported_with_location(self, takagi14):
        log_map = rv.SmoothMap(id="log", f=np.log,
                               f1=lambda u: 1.0 / np.asarray(u),
                               f2=lambda u: -np.asarray(u) ** -2.0, K=1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            with pytest.raises(EvaluationError, match=r"t=0\.0"):
                rv.compose_path(log_map, takagi14)


# ---------------------------------------------------------------------------
# Stieltjes sums
# ---------------------------------------------------------------------------


class TestStieltjesIntegral:
    def test_unit_integrand_reproduces_the_profile(self, takagi14):
        mu = rv.scaled_qv(takagi14, rv.dyadic_partition(10, 14), 2.5)
        out = rv.stieltjes_integral(np.ones(mu.times.size), mu)
        npt.assert_array_equal(out, mu.values)

    def test_zero_integrand_gives_zero(self, takagi14):
        mu = rv.pth_variation(takagi14, rv.dyadic_partition(8, 14), 2.0)
        npt.assert_array_equal(rv.stieltjes_integral(np.zeros(mu.times.size), mu),
                               np.zeros(mu.times.size))

    def test_indicator_against_length_measures_the_interval(self):
        t = rv.Path(grid_level=6, samples=rv.grid_times(6))
        mu = rv.pth_variation(t, rv.dyadic_partition(6, 6), 1.0)
        g = (mu.times < 0.5).astype(np.float64)
        assert rv.stieltjes_integral(g, mu)[-1] == 0.5

    def test_linearity(self, takagi14):
        mu = rv.pth_variation(takagi14, rv.dyadic_partition(8, 14), 2.0)
        rng = np.random.default_rng(0)
        g = rng.standard_normal(mu.times.size)
        h = rng.standard_normal(mu.times.size)
        combo = rv.stieltjes_integral(2.0 * g + h, mu)[-1]
        split = 2.0 * rv.stieltjes_integral(g, mu)[-1] + \
            rv.stieltjes_integral(h, mu)[-1]
        npt.assert_allclose(combo, split, rtol=1e-12, atol=1e-15)

    def test_misaligned_integrand_rejected(self, takagi14):
        mu = rv.pth_variation(takagi14, rv.dyadic_partition(8, 14), 2.0)
        with pytest.raises(ValidationError, match="integrand"):
            rv.stieltjes_integral(np.ones(5), mu)


# ---------------------------------------------------------------------------
# Isometry check
# ---------------------------------------------------------------------------


class TestIsometryCheck:
    def test_identity_map_is_exact(self, takagi14):
        rep = rv.isometry_check(takagi14, rv.identity_map(), 2.0, LEVELS)
        assert max(rep.rel_err) == 0.0
        assert rep.success
        assert rep.kind == "isometry" and rep.map_id == "identity"
        assert rep.src_mode == "finest_level"
        assert len(rep.notes) == 1

    def test_affine_map_sits_at_the_rounding_floor(self, fbm14):
        rep = rv.isometry_check(fbm14, rv.affine_map(2.0, -1.0), 2.0, LEVELS)
        assert max(rep.rel_err) <= 1e-12
        assert rep.success

    def test_square_map_error_decays_on_takagi(self, takagi14):
        rep = rv.isometry_check(takagi14, rv.square_plus_one_map(), 2.0, LEVELS)
        assert rep.success
        assert rep.err_trend_slope < 0.0
        assert rep.rel_err[-1] < 0.05
        assert rep.rel_err[-1] < rep.rel_err[0]

    def test_sine_map_on_fractional_brownian_path(self, fbm14):
        rep = rv.isometry_check(fbm14, rv.sin_map(), 2.5, LEVELS)
        assert rep.success
        assert rep.rel_err[-1] < 0.05

    def test_quadratic_case_left_side_is_plain_qv(self, takagi14):
        f = rv.square_plus_one_map()
        rep = rv.isometry_check(takagi14, f, 2.0, [8, 10])
        fx = rv.compose_path(f, takagi14)
        for n, lhs in zip(rep.levels, rep.lhs_terminal):
            direct = rv.pth_variation(fx, rv.dyadic_partition(n, 14), 2.0).terminal
            npt.assert_allclose(lhs, direct, rtol=1e-12)

    def test_far_from_critical_index_warns(self, takagi14):
        rep = rv.isometry_check(takagi14, rv.sin_map(), 4.0, LEVELS)
        assert any("critical index" in w for w in rep.warnings)

    def test_vanishing_derivative_warns(self, takagi14):
        # the path starts at 0, where the square map's derivative vanishes
        rep = rv.isometry_check(takagi14, rv.square_plus_one_map(), 2.0, LEVELS)
        assert any("vanishing derivative" in w for w in rep.warnings)

    def test_alpha_proxy_tracks_regularity(self, takagi14):
        assert abs(rv.holder_proxy(takagi14, LEVELS) - 0.5) < 0.1
        smooth = rv.smooth_perturbation("sine", 1.0, 12, {"freq": 1.0})
        assert abs(rv.holder_proxy(smooth, range(4, 11)) - 1.0) < 0.2

    def test_argument_validation(self, takagi14):
        with pytest.raises(ValidationError, match="p must be > 0"):
            rv.isometry_check(takagi14, rv.sin_map(), 0.0, LEVELS)
        with pytest.raises(ValidationError, match="at least 2"):
            rv.isometry_check(takagi14, rv.sin_map(), 2.0, [8])
        with pytest.raises(ValidationError, match="lie in"):
            rv.isometry_check(takagi14, rv.sin_map(), 2.0, [8, 20])


class TestChainRuleCheck:
    def test_identity_map_is_exact(self, takagi14):
        rep = rv.chain_rule_check(takagi14, rv.identity_map(), 2.0, LEVELS)
        assert max(rep.rel_err) == 0.0
        assert rep.success and rep.kind == "chain_rule"

    def test_scaling_map_is_exactly_homogeneous(self, takagi14):
        rep = rv.chain_rule_check(takagi14, rv.affine_map(2.0, 0.0), 2.5, LEVELS)
        assert max(rep.rel_err) <= 1e-12
        assert rep.success
        # both sides are 2**2.5 times the bare variation
        bare = rv.pth_variation(takagi14, rv.dyadic_partition(12, 14), 2.5).terminal
        npt.assert_allclose(rep.lhs_terminal[-1], 2.0 ** 2.5 * bare, rtol=1e-12)

    def test_sine_map_error_decays(self, takagi14):
        rep = rv.chain_rule_check(takagi14, rv.sin_map(), 2.0, LEVELS)
        assert rep.success
        assert rep.err_trend_slope < 0.0
        assert rep.rel_err[-1] < 0.05


class TestInvarianceCheck:
    def test_zero_perturbation_changes_nothing(self, takagi14):
        zero = rv.Path(grid_level=14, samples=np.zeros(2 ** 14 + 1))
        rep = rv.invariance_check(takagi14, zero, 2.0, LEVELS)
        assert max(rep.rel_err) == 0.0
        assert rep.success and rep.kind == "invariance"
        assert not rep.warnings

    def test_smooth_perturbation_washes_out(self, takagi14):
        A = rv.smooth_perturbation("sine", 0.5, 14, {"freq": 1.0})
        rep = rv.invariance_check(takagi14, A, 2.0, [6, 8, 10, 12])
        assert rep.success
        assert rep.rel_err[-1] < 0.02
        assert all(b < a for a, b in zip(rep.rel_err, rep.rel_err[1:]))
        assert not rep.warnings

    def test_rough_perturbation_warns(self, takagi14):
        rep = rv.invariance_check(takagi14, takagi14, 2.0, LEVELS)
        assert any("hypothesis violated" in w for w in rep.warnings)

    def test_grid_mismatch_rejected(self, takagi14):
        small = rv.smooth_perturbation("sine", 0.5, 10, {"freq": 1.0})
        with pytest.raises(ValidationError, match="grid level"):
            rv.invariance_check(takagi14, small, 2.0, LEVELS)


class TestReportOutput:
    def test_csv_layout(self, takagi14, tmp_path):
        rep = rv.isometry_check(takagi14, rv.sin_map(), 2.0, [6, 8, 10])
        out = tmp_path / "iso.csv"
        rv.write_report_csv(rep, out)
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "level,lhs,rhs,rel_err"
        assert len(lines) == 1 + 3
        level, lhs, rhs, rel = (float(s) for s in lines[-1].split(","))
        assert level == 10.0
        npt.assert_allclose(lhs, rep.lhs_terminal[-1], rtol=1e-15)
        npt.assert_allclose(rel, rep.rel_err[-1], rtol=1e-15)

    def test_report_dict_is_json_ready(self, takagi14):
        import json
        rep = rv.chain_rule_check(takagi14, rv.sin_map(), 2.0, [6, 8, 10])
        doc = json.loads(json.dumps(rep.to_dict()))
        assert doc["kind"] == "chain_rule"
        assert len(doc["rel_err"]) == 3
