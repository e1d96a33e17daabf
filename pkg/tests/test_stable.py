"""Law-level tests: densities, distribution functions, sampling, tails."""

import math

import numpy as np
import pytest

import stablestein as ss
from stablestein.stable import LawTable, law_table, _contour

from _reference import (
    CDF, D_ALPHA, PDF, SUP_DENSITY, TAIL_ASYMPTOTE, TRUE_TAIL)


def _params(key):
    a, d, *rest = key.split("|")
    return ss.StableParams(float(a), float(d)), [float(r) for r in rest]


class TestParams:
    def test_alpha_range(self):
        with pytest.raises(ValueError):
            ss.StableParams(0.0, 0.0)
        with pytest.raises(ValueError):
            ss.StableParams(1.2, 0.0)
        ss.StableParams(1.0, 0.0)  # boundary member is fine

    def test_delta_open_interval(self):
        for bad in (-1.0, 1.0, 1.5):
            with pytest.raises(ValueError):
                ss.StableParams(0.5, bad)

    def test_cauchy_must_be_symmetric(self):
        with pytest.raises(ValueError):
            ss.StableParams(1.0, 0.3)

    def test_reflection(self):
        p = ss.StableParams(0.6, 0.4)
        assert p.reflected().delta == -0.4


class TestNormalisingConstant:
    @pytest.mark.parametrize("alpha,want", sorted(D_ALPHA.items()))
    def test_reference_values(self, alpha, want):
        assert ss.d_alpha(alpha) == pytest.approx(want, abs=1e-12)

    def test_continuity_at_one(self):
        # The branch formula approaches the alpha=1 value smoothly.
        assert abs(ss.d_alpha(0.999) - ss.d_alpha(1.0)) < 1e-2

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            ss.d_alpha(1.3)


class TestCharExponent:
    def test_symmetric_is_real(self):
        p = ss.StableParams(0.7)
        lam = np.linspace(-5, 5, 11)
        vals = ss.char_exponent(p, lam)
        assert np.allclose(vals.imag, 0.0)
        assert np.allclose(vals.real, -np.abs(lam) ** 0.7)

    def test_skew_sign(self):
        p = ss.StableParams(0.5, 0.5)
        v = ss.char_exponent(p, 2.0)
        assert v.real == pytest.approx(-(2.0 ** 0.5))
        assert v.imag == pytest.approx(2.0 ** 0.5 * 0.5 * math.tan(math.pi / 4))

    def test_cauchy(self):
        p = ss.StableParams(1.0)
        assert ss.char_exponent(p, -3.0) == pytest.approx(-3.0)


class TestDensity:
    @pytest.mark.parametrize("key,want", sorted(PDF.items()))
    def test_reference_values(self, key, want):
        p, (x,) = _params(key)
        assert ss.pdf(p, x) == pytest.approx(want, abs=5e-11)

    def test_cauchy_closed_form(self):
        p = ss.StableParams(1.0)
        for x in (-2.0, 0.0, 0.7):
            assert ss.pdf(p, x) == pytest.approx(1 / (math.pi * (1 + x * x)))

    @pytest.mark.parametrize("alpha", [0.4, 0.7, 1.0])
    @pytest.mark.parametrize("c", [0.5, 2.0, 10.0])
    def test_scaling(self, alpha, c):
        delta = 0.0 if alpha == 1.0 else 0.3
        p = ss.StableParams(alpha, delta)
        x = 1.37
        lhs = ss.pdf(p, x, t=c)
        rhs = c ** (-1 / alpha) * ss.pdf(p, c ** (-1 / alpha) * x)
        assert lhs == pytest.approx(rhs, rel=1e-10)

    def test_reflection_identity(self):
        pp = ss.StableParams(0.5, 0.5)
        pm = ss.StableParams(0.5, -0.5)
        for x in (0.3, 1.7, 6.0):
            assert ss.pdf(pp, -x) == pytest.approx(ss.pdf(pm, x), rel=1e-11)

    def test_normalisation_with_tail_asymptotes(self):
        # Mass inside [-R, R] plus first-order tail weights gives 1 to 1e-8
        # once R is deep enough in the power regime.
        for p in (ss.StableParams(0.5, 0.5), ss.StableParams(0.8, 0.3)):
            big_r = 10.0 ** (3.0 / p.alpha)
            total = (ss.cdf(p, big_r) - ss.cdf(p, -big_r)
                     + ss.tail_asymptote(p, big_r, "upper")
                     + ss.tail_asymptote(p, big_r, "lower"))
            assert total == pytest.approx(1.0, abs=1e-6)


class TestDistribution:
    @pytest.mark.parametrize("key,want", sorted(CDF.items()))
    def test_reference_values(self, key, want):
        p, (x,) = _params(key)
        assert ss.cdf(p, x) == pytest.approx(want, abs=5e-11)

    @pytest.mark.parametrize("key,want", sorted(TRUE_TAIL.items()))
    def test_deep_tail(self, key, want):
        p, (x,) = _params(key)
        assert 1.0 - ss.cdf(p, x) == pytest.approx(want, abs=1e-10)

    def test_monotone_and_limits(self):
        p = ss.StableParams(0.3, -0.7)
        xs = np.linspace(-60, 60, 41)
        vals = [ss.cdf(p, float(x)) for x in xs]
        assert all(b >= a for a, b in zip(vals, vals[1:]))
        assert ss.cdf(p, -1e8) < 1e-2
        assert ss.cdf(p, 1e8) > 1 - 1e-2

    def test_median_location_symmetric(self):
        assert ss.cdf(ss.StableParams(0.5), 0.0) == pytest.approx(0.5)

    def test_cauchy_closed_form(self):
        p = ss.StableParams(1.0)
        assert ss.cdf(p, 1.0) == pytest.approx(0.75)
        assert ss.cdf(p, -1.0, t=1.0) == pytest.approx(0.25)


class TestVectorised:
    def test_cdf_many_matches_scalar(self):
        p = ss.StableParams(0.5, 0.5)
        xs = np.concatenate([np.linspace(-8, 8, 101),
                             -np.geomspace(1e-3, 1e6, 40),
                             np.geomspace(1e-3, 1e6, 40)])
        vec = ss.cdf_many(p, xs)
        sca = np.array([ss.cdf(p, float(x)) for x in xs])
        assert np.max(np.abs(vec - sca)) < 1e-6

    def test_cdf_many_cauchy(self):
        p = ss.StableParams(1.0)
        xs = np.array([-5.0, 0.0, 5.0])
        assert np.allclose(ss.cdf_many(p, xs),
                           0.5 + np.arctan(xs) / math.pi)

    def test_law_table_cached(self):
        p = ss.StableParams(0.5, 0.5)
        assert law_table(p) is law_table(ss.StableParams(0.5, 0.5))


class TestTailAsymptote:
    @pytest.mark.parametrize("key,want", sorted(TAIL_ASYMPTOTE.items()))
    def test_reference_values(self, key, want):
        a, d, x, side = key.split("|")
        p = ss.StableParams(float(a), float(d))
        assert ss.tail_asymptote(p, float(x), side) == pytest.approx(want, rel=1e-12)

    def test_tracks_true_tail(self):
        # Relative agreement improves with x like x^{-alpha}.
        p = ss.StableParams(0.5, 0.5)
        errs = []
        for x in (50.0, 5000.0):
            t = 1.0 - ss.cdf(p, x)
            errs.append(abs(ss.tail_asymptote(p, x, "upper") / t - 1.0))
        assert errs[1] < errs[0] * 0.2

    def test_requires_positive_x(self):
        with pytest.raises(ValueError):
            ss.tail_asymptote(ss.StableParams(0.5), -1.0)


class TestLevyMeasure:
    def test_density_shape(self):
        lm = ss.LevyMeasure(ss.StableParams(0.5, 0.5))
        up, down = lm.density(2.0), lm.density(-2.0)
        assert up / down == pytest.approx(3.0)  # (1+delta)/(1-delta)

    def test_mass_matches_quadrature(self):
        from scipy.integrate import quad
        lm = ss.LevyMeasure(ss.StableParams(0.7, -0.2))
        want, _ = quad(lambda u: lm.density(u), 1.5, np.inf)
        assert lm.mass_beyond(1.5, "pos") == pytest.approx(want, rel=1e-9)

    def test_drift_within_odd_part(self):
        from scipy.integrate import quad
        lm = ss.LevyMeasure(ss.StableParams(0.5, 0.5))
        want, _ = quad(lambda u: u * (lm.density(u) - lm.density(-u)), 0, 2.0)
        assert lm.drift_within(2.0) == pytest.approx(want, rel=1e-9)

    def test_second_moment(self):
        from scipy.integrate import quad
        lm = ss.LevyMeasure(ss.StableParams(0.8, 0.3))
        want, _ = quad(lambda u: u * u * (lm.density(u) + lm.density(-u)),
                       0, 0.5)
        assert lm.second_moment_within(0.5) == pytest.approx(want, rel=1e-9)


class TestSampler:
    def test_reproducible(self):
        p = ss.StableParams(0.5, 0.5)
        a = ss.sample(p, 1000, seed=42)
        b = ss.sample(p, 1000, seed=42)
        assert np.array_equal(a, b)
        c = ss.sample(p, 1000, seed=43)
        assert not np.array_equal(a, c)

    def test_ks_against_cdf(self):
        p = ss.StableParams(0.5, 0.5)
        n = 200_000
        draws = np.sort(ss.sample(p, n, seed=1234))
        f = ss.cdf_many(p, draws)
        emp = (np.arange(1, n + 1) - 0.5) / n
        ks = float(np.max(np.abs(f - emp)))
        assert ks < 1.63 / math.sqrt(n)  # ~1% KS level

    def test_ks_cauchy(self):
        p = ss.StableParams(1.0)
        n = 200_000
        draws = np.sort(ss.sample(p, n, seed=7))
        f = 0.5 + np.arctan(draws) / math.pi
        emp = (np.arange(1, n + 1) - 0.5) / n
        assert float(np.max(np.abs(f - emp))) < 1.63 / math.sqrt(n)

    def test_tail_frequencies(self):
        # Empirical exceedance of a far level ~ first-order tail weight.
        p = ss.StableParams(0.5, 0.5)
        n = 400_000
        draws = ss.sample(p, n, seed=99)
        lvl = 200.0
        want = 1.0 - ss.cdf(p, lvl)
        got = np.mean(draws > lvl)
        se = math.sqrt(want * (1 - want) / n)
        assert abs(got - want) < 4 * se

    def test_scale_parameter(self):
        p = ss.StableParams(0.5)
        base = ss.sample(p, 100, seed=5)
        scaled = ss.sample(p, 100, seed=5, t=16.0)
        assert np.allclose(scaled, 16.0 ** 2 * base)


class TestLawTable:
    def test_expectation_of_one(self):
        tab = law_table(ss.StableParams(0.5, 0.5))
        one = tab.expectation(lambda y: np.ones_like(y), limits=(1.0, 1.0))
        assert one == pytest.approx(1.0, abs=1e-9)

    def test_expectation_against_quadrature(self):
        from scipy.integrate import quad
        p = ss.StableParams(0.5, 0.5)
        tab = law_table(p)

        def h(y):
            return 1.0 / (1.0 + np.exp(np.clip(4.0 * (y - 1.0), -600, 600)))

        got = tab.expectation(h, limits=(1.0, 0.0))
        want, _ = quad(lambda y: ss.pdf(p, y) * float(h(np.asarray(y))),
                       -300, 300, limit=400)
        want += ss.cdf(p, -300.0)  # h ~ 1 on the far left
        assert got == pytest.approx(want, abs=2e-6)

    @pytest.mark.parametrize("key,want", sorted(SUP_DENSITY.items()))
    def test_sup_density(self, key, want):
        a, d = map(float, key.split("|"))
        assert ss.sup_density(ss.StableParams(a, d)) == pytest.approx(
            want, abs=1e-6)

    def test_envelope_constant_grid_stable(self):
        # The heavy-tail envelope sup p(x)(1+|x|)^{1+alpha} must be finite
        # and insensitive to grid refinement.
        p = ss.StableParams(0.5, 0.5)
        c1 = law_table(p).envelope_constant()
        c2 = LawTable(p).envelope_constant()  # fresh build, same profile
        assert np.isfinite(c1) and c1 > 0
        assert c1 == pytest.approx(c2, rel=0.02)


class TestContourInternals:
    def test_partial_rotation_keeps_decay(self):
        for a, d in [(0.8, 0.3), (0.95, 0.9), (0.5, 0.99), (0.3, -0.99)]:
            omega, ca, cb, _, _ = _contour(a, d)
            assert ca > 0
            assert 0 < omega <= math.pi / 2

    def test_extreme_skew_bridged_by_series(self):
        # Strongly skewed, alpha near 1: the rotated ray degenerates near
        # the origin but the origin series takes over seamlessly.
        p = ss.StableParams(0.97, 0.9)
        v = ss.pdf(p, 1e-7)
        assert 0 < v < 1

    def test_failure_is_reported(self):
        # With the subdivision budget strangled, the dense oscillation of a
        # partially rotated contour must surface as the dedicated error.
        cfg = ss.QuadratureConfig(max_subdivisions=2)
        p = ss.StableParams(0.8, 0.3)
        with pytest.raises(ss.NumericalFailure):
            ss.pdf(p, 0.06, cfg=cfg)
