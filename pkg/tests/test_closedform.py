"""Closed-form 1-D formulas and the piecewise-linear barrier estimator."""

import math

import numpy as np
import pytest

from crossprob.closedform import (
    Polyline,
    bridge_segment_crossing,
    first_passage_density_line,
    first_passage_mass_line,
    linear_noncrossing_exact,
    normal_cdf,
    piecewise_linear_bcp_1d,
)
from oracles import band_survival_series, joint_sigma, phi


class TestNormalCdf:
    def test_symmetry_point(self):
        assert normal_cdf(0.0) == pytest.approx(0.5, abs=1e-15)

    def test_975_quantile(self):
        assert normal_cdf(1.959963985) == pytest.approx(0.975, abs=1e-9)

    def test_quantile_by_bisection(self):
        lo, hi = 0.0, 10.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if normal_cdf(mid) < 0.975 else (lo, mid)
        assert 0.5 * (lo + hi) == pytest.approx(1.959963985, abs=1e-8)

    def test_symmetry_identity_grid(self):
        x = np.linspace(-8, 8, 1000)
        np.testing.assert_allclose(normal_cdf(x) + normal_cdf(-x), 1.0, atol=1e-12)

    def test_against_independent_erf_route(self):
        for x in np.linspace(-6, 6, 241):
            assert normal_cdf(x) == pytest.approx(phi(x), abs=5e-13)


class TestLinearNoncrossingExact:
    def test_zero_drift_reflection(self):
        # c = 0 reduces to 2 Phi(eps/sqrt(t)) - 1
        v = linear_noncrossing_exact(1.0, 0.0, 1.959963985)
        assert v == pytest.approx(2 * normal_cdf(1.959963985) - 1, abs=1e-12)
        assert v == pytest.approx(0.9500, abs=1e-4)

    def test_zero_drift_identity_grid(self):
        for t in (0.1, 0.5, 1.0, 4.0):
            for eps in (0.1, 0.5, 1.0, 2.5):
                got = linear_noncrossing_exact(t, 0.0, eps)
                want = 2 * normal_cdf(eps / math.sqrt(t)) - 1
                assert got == pytest.approx(want, abs=1e-12)

    def test_infinite_barrier(self):
        assert linear_noncrossing_exact(1.0, 0.5, math.inf) == 1.0

    def test_bounds_and_monotonicity(self):
        eps_grid = [0.05, 0.1, 0.5, 1.0, 2.0]
        c_grid = [-3.0, -1.0, 0.0, 1.0, 3.0]
        for t in (0.1, 1.0):
            for c in c_grid:
                vals = [linear_noncrossing_exact(t, c, e) for e in eps_grid]
                assert all(0.0 <= v <= 1.0 for v in vals)
                assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:])), "nondecreasing in eps"
            for e in (0.1, 1.0):
                # raising the slope lifts the barrier W_s < eps + c s everywhere
                vals = [linear_noncrossing_exact(t, c, e) for c in c_grid]
                assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:])), "nondecreasing in c"

    def test_extreme_drift_no_overflow(self):
        assert linear_noncrossing_exact(1.0, -500.0, 2.0) == pytest.approx(0.0, abs=1e-12)
        assert linear_noncrossing_exact(1.0, 500.0, 2.0) == pytest.approx(1.0, abs=1e-12)

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            linear_noncrossing_exact(0.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            linear_noncrossing_exact(1.0, 1.0, 0.0)


class TestFirstPassageLine:
    def test_mass_identity_nonnegative_drift(self):
        from scipy.integrate import quad

        for a, mu in ((1.0, 0.0), (0.5, 1.0), (2.0, 0.3)):
            mass, err = quad(first_passage_density_line, 0, np.inf, args=(a, mu), limit=400)
            assert err < 1e-6
            assert mass == pytest.approx(1.0, abs=1e-8), (a, mu)

    def test_mass_identity_negative_drift(self):
        from scipy.integrate import quad

        for a, mu in ((1.0, -1.0), (0.5, -2.0), (2.0, -0.25)):
            mass, err = quad(first_passage_density_line, 0, np.inf, args=(a, mu), limit=400)
            assert err < 1e-6
            assert mass == pytest.approx(math.exp(2 * a * mu), abs=1e-8), (a, mu)

    def test_partial_mass_matches_closed_form(self):
        from scipy.integrate import quad

        for a, mu, h in ((1.0, -1.0, 0.5), (0.7, 0.4, 1.2), (1.5, 0.0, 2.0)):
            mass, _ = quad(first_passage_density_line, 0, h, args=(a, mu), limit=400)
            assert first_passage_mass_line(h, a, mu) == pytest.approx(mass, abs=1e-10)

    def test_density_nonnegative_and_vectorized(self):
        s = np.linspace(1e-4, 5, 500)
        dens = first_passage_density_line(s, 1.0, -1.0)
        assert dens.shape == s.shape and np.all(dens >= 0)

    def test_invalid_level(self):
        with pytest.raises(ValueError):
            first_passage_density_line(1.0, -1.0, 0.0)


class TestBridgeSegmentCrossing:
    def test_already_crossed(self):
        assert bridge_segment_crossing(1.0, 0.0, 1.0, 2.0, 1.0) == 1.0
        assert bridge_segment_crossing(1.5, 0.0, 1.0, 2.0, 1.0) == 1.0
        assert bridge_segment_crossing(0.0, 2.5, 1.0, 2.0, 1.0) == 1.0

    def test_flat_barrier_value(self):
        assert bridge_segment_crossing(0.0, 0.0, 1.0, 1.0, 1.0) == pytest.approx(math.exp(-2), abs=1e-15)

    def test_far_barrier_vanishes(self):
        assert bridge_segment_crossing(0.0, 0.0, 60.0, 60.0, 1.0) == pytest.approx(0.0, abs=1e-300)

    def test_monotone_in_barrier_height(self):
        heights = [0.5, 1.0, 2.0, 4.0]
        probs = [bridge_segment_crossing(0.0, 0.1, g, g, 0.5) for g in heights]
        assert all(a >= b for a, b in zip(probs, probs[1:]))
        assert all(0.0 <= p <= 1.0 for p in probs)

    def test_lower_barrier_by_negation(self):
        # path 0 -> -0.2 against lower barrier -1 -> -1.1 mirrors
        # path 0 -> +0.2 against upper barrier +1 -> +1.1
        up = bridge_segment_crossing(0.0, 0.2, 1.0, 1.1, 0.7)
        x1, x2, g1, g2 = 0.0, -0.2, -1.0, -1.1
        low = bridge_segment_crossing(-x1, -x2, -g1, -g2, 0.7)
        assert low == pytest.approx(up, abs=1e-15)
        assert low == pytest.approx(math.exp(-2 * 1.0 * 0.9 / 0.7), abs=1e-15)

    def test_discretized_bridge_refinement_converges_to_formula(self):
        # Simulate pinned bridges on finer and finer grids; the discrete
        # crossing frequency climbs toward the closed form from below, and a
        # sqrt(dt) Richardson step lands on it.
        rng = np.random.default_rng(42)
        n, chunk = 30_000, 2000
        freqs = []
        for n_steps in (2048, 8192):
            t = np.linspace(0.0, 1.0, n_steps + 1)
            hits = 0
            for _ in range(n // chunk):
                inc = rng.standard_normal((chunk, n_steps)) * math.sqrt(1.0 / n_steps)
                w = np.cumsum(inc, axis=1)
                bridge = w - w[:, -1:] * t[None, 1:]
                hits += int(np.sum(bridge.max(axis=1) >= 1.0))
            freqs.append(hits / n)
        # bias model p(dt) = p - C sqrt(dt): quarter the step, halve the bias
        extrapolated = freqs[1] + (freqs[1] - freqs[0])
        sigma = math.sqrt(math.exp(-2) * (1 - math.exp(-2)) / n)
        assert freqs[0] < freqs[1] < math.exp(-2)
        assert abs(extrapolated - math.exp(-2)) < 4e-3 + 3 * sigma


class TestPolyline:
    def test_interpolation_exact_at_and_between_knots(self):
        p = Polyline([0.0, 0.5, 1.0], [1.0, 2.0, 0.0])
        assert p(0.5) == 2.0
        assert p(0.25) == pytest.approx(1.5)
        assert p.horizon == 1.0

    def test_validation(self):
        with pytest.raises(ValueError):
            Polyline([0.0, 0.0, 1.0], [1.0, 1.0, 1.0])
        with pytest.raises(ValueError):
            Polyline([0.1, 1.0], [1.0, 1.0])
        with pytest.raises(ValueError):
            Polyline([0.0, 1.0], [1.0, math.inf])


class TestPiecewiseLinearBcp:
    def test_no_barriers_is_certain(self):
        est = piecewise_linear_bcp_1d(None, None, 10_000, seed=1)
        assert est.mean == 1.0 and est.stderr == 0.0

    def test_single_upper_line_matches_exact(self):
        # upper barrier 0.5 + t on [0,1]: survival is the linear non-crossing law
        upper = Polyline([0.0, 1.0], [0.5, 1.5])
        est = piecewise_linear_bcp_1d(None, upper, 200_000, seed=7)
        want = linear_noncrossing_exact(1.0, 1.0, 0.5)
        assert abs(est.mean - want) < 3 * est.stderr, f"{est.mean} vs {want}"

    def test_single_lower_line_matches_exact(self):
        lower = Polyline([0.0, 1.0], [-0.5, -1.5])
        est = piecewise_linear_bcp_1d(lower, None, 200_000, seed=8)
        want = linear_noncrossing_exact(1.0, 1.0, 0.5)
        assert abs(est.mean - want) < 3 * est.stderr

    def test_symmetric_band_matches_series(self):
        lower = Polyline([0.0, 1.0], [-1.0, -1.0])
        upper = Polyline([0.0, 1.0], [1.0, 1.0])
        est = piecewise_linear_bcp_1d(lower, upper, 200_000, seed=11)
        want = band_survival_series(1.0, -1.0, 1.0)
        assert abs(est.mean - want) < 3 * est.stderr, f"{est.mean} vs {want}"

    def test_deterministic_and_thread_independent(self):
        upper = Polyline([0.0, 0.4, 1.0], [0.8, 1.0, 0.6])
        a = piecewise_linear_bcp_1d(None, upper, 50_000, seed=3, threads=1)
        b = piecewise_linear_bcp_1d(None, upper, 50_000, seed=3, threads=4)
        assert a.mean == b.mean and a.stderr == b.stderr

    def test_monotone_under_barrier_tightening(self):
        wide_u = Polyline([0.0, 1.0], [1.0, 1.0])
        wide_l = Polyline([0.0, 1.0], [-1.0, -1.0])
        tight_u = Polyline([0.0, 1.0], [0.9, 0.9])
        tight_l = Polyline([0.0, 1.0], [-0.9, -0.9])
        wide = piecewise_linear_bcp_1d(wide_l, wide_u, 50_000, seed=5, max_refinements=0)
        tight = piecewise_linear_bcp_1d(tight_l, tight_u, 50_000, seed=5, max_refinements=0)
        assert tight.mean <= wide.mean

    def test_validation_errors(self):
        up = Polyline([0.0, 1.0], [1.0, 1.0])
        with pytest.raises(ValueError):
            piecewise_linear_bcp_1d(None, up, 500, seed=1)
        with pytest.raises(ValueError):
            piecewise_linear_bcp_1d(Polyline([0.0, 2.0], [-1.0, -1.0]), up, 5000, seed=1)
        with pytest.raises(ValueError):
            piecewise_linear_bcp_1d(Polyline([0.0, 1.0], [2.0, 2.0]), up, 5000, seed=1)
        with pytest.raises(ValueError):
            piecewise_linear_bcp_1d(Polyline([0.0, 1.0], [0.5, -3.0]), up, 5000, seed=1)


class TestSeriesOracleSelfChecks:
    """The images series is itself validated before anything is frozen
    against it: one-sided limits, short-time limit, and symmetry."""

    def test_one_sided_limit_matches_reflection(self):
        got = band_survival_series(1.0, -50.0, 1.959963985)
        want = 2 * phi(1.959963985) - 1
        assert got == pytest.approx(want, abs=1e-12)

    def test_short_time_limit(self):
        assert band_survival_series(1e-4, -1.0, 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_symmetry_in_start_point(self):
        a = band_survival_series(0.7, -1.0, 1.0, x0=0.3)
        b = band_survival_series(0.7, -1.0, 1.0, x0=-0.3)
        assert a == pytest.approx(b, abs=1e-13)

    def test_monotone_in_time(self):
        vals = [band_survival_series(t, -1.0, 1.0) for t in (0.1, 0.5, 1.0, 2.0)]
        assert all(a > b for a, b in zip(vals, vals[1:]))
