"""Operator checks.

The three evaluation routes — difference form, derivative forms, batched
near/far split — share no quadrature code, so their mutual agreement is
evidence, not tautology.  The external anchor is the Fourier eigenpair
identity: on cos/sin the generator must reproduce the analytic symbol.
"""

import cmath

import numpy as np
import pytest

from stablestein.errors import NumericalFailure
from stablestein.fracops import (Evaluand, apply_A, apply_A_batch, apply_L,
                                 apply_L_deriv_form)
from stablestein.stable import StableParams, char_exponent, law_table


def gaussian():
    return Evaluand(lambda z: np.exp(-0.5 * z ** 2),
                    lambda z: -z * np.exp(-0.5 * z ** 2))


LAWS = [StableParams(0.5, 0.0), StableParams(0.5, 0.5),
        StableParams(0.3, -0.7), StableParams(0.8, 0.3),
        StableParams(1.0, 0.0)]


class TestEvaluand:
    def test_explicit_derivative_wins(self):
        f = Evaluand(lambda z: z ** 3, lambda z: 99.0)
        assert f.d1(1.0) == 99.0

    def test_fd_fallback(self):
        f = Evaluand(lambda z: np.sin(z))
        assert f.d1(0.3) == pytest.approx(np.cos(0.3), abs=1e-9)

    def test_higher_differences_on_cubic(self):
        f = Evaluand(lambda z: z ** 3)
        assert f.d2(2.0) == pytest.approx(12.0, rel=1e-7)
        assert f.d3(2.0) == pytest.approx(6.0, rel=1e-5)
        assert f.d4(2.0) == pytest.approx(0.0, abs=1e-6)


class TestEigenIdentity:
    """L e^{i lam .} = psi(lam) e^{i lam .}, split into real/imag parts."""

    @pytest.mark.parametrize("p", LAWS, ids=str)
    @pytest.mark.parametrize("lam", [0.5, 2.0])
    def test_cos_sin_pair(self, p, lam):
        co = Evaluand(lambda z: np.cos(lam * z),
                      lambda z: -lam * np.sin(lam * z))
        si = Evaluand(lambda z: np.sin(lam * z),
                      lambda z: lam * np.cos(lam * z))
        psi = complex(char_exponent(p, np.array([lam]))[0])
        for x in (-0.9, 1.7):
            want = psi * cmath.exp(1j * lam * x)
            assert apply_L(p, co, x) == pytest.approx(want.real, abs=5e-6)
            assert apply_L(p, si, x) == pytest.approx(want.imag, abs=5e-6)


class TestDerivativeForm:
    @pytest.mark.parametrize("p", [StableParams(0.5, 0.5),
                                   StableParams(0.3, -0.7),
                                   StableParams(0.8, 0.3)], ids=str)
    @pytest.mark.parametrize("x", [-1.3, 0.7])
    def test_matches_difference_form_at_any_scale(self, p, x):
        g = gaussian()
        ref = apply_L(p, g, x)
        for a in (1.0, 0.5, 2.0):
            assert apply_L_deriv_form(p, g, x, a) == pytest.approx(ref,
                                                                   abs=2e-6)

    @pytest.mark.parametrize("x", [-1.3, 0.7])
    def test_cauchy_pair_form(self, x):
        p = StableParams(1.0, 0.0)
        g = gaussian()
        assert apply_L_deriv_form(p, g, x) == pytest.approx(
            apply_L(p, g, x), abs=2e-6)

    def test_needs_explicit_derivative(self):
        f = Evaluand(lambda z: np.exp(-z * z))
        with pytest.raises(ValueError):
            apply_L_deriv_form(StableParams(0.5, 0.0), f, 0.0)

    def test_scale_must_be_positive(self):
        with pytest.raises(ValueError):
            apply_L_deriv_form(StableParams(0.5, 0.0), gaussian(), 0.0, -1.0)

    def test_no_rescaling_at_alpha_one(self):
        with pytest.raises(ValueError):
            apply_L_deriv_form(StableParams(1.0, 0.0), gaussian(), 0.0, 2.0)


class TestCharacterisingOperator:
    @pytest.mark.parametrize("p", [StableParams(0.5, 0.5),
                                   StableParams(0.8, 0.3),
                                   StableParams(1.0, 0.0)], ids=str)
    def test_annihilates_own_law(self, p):
        # E[A f(Z)] = 0 for Z with the matching law: the defining property.
        fn = lambda z: np.exp(-0.5 * np.asarray(z) ** 2)
        lt = law_table(p)
        ez = lt.expectation(
            lambda z: apply_A_batch(p, fn, np.atleast_1d(z)))
        assert abs(ez) < 5e-7

    def test_far_field_is_pure_jump_response(self):
        # Far outside the support of f both f(x) and f'(x) vanish, so
        # A f(x) reduces to int f(z) nu(z - x) dz; the batched multipole
        # and the scalar quadrature reach it by unrelated routes.
        p = StableParams(0.5, 0.5)
        got = apply_A(p, gaussian(), 180.0)
        want = float(apply_A_batch(p, lambda z: np.exp(-0.5 * z ** 2),
                                   np.array([180.0]))[0])
        assert got == pytest.approx(want, rel=1e-6)
        assert got > 0


class TestBatch:
    XS = np.array([-200.0, -60.0, -47.9, -33.0, -1.3, 0.0, 0.7, 4.0,
                   20.0, 47.9, 48.1, 180.0])

    @pytest.mark.parametrize("p", [StableParams(0.5, 0.5),
                                   StableParams(0.3, -0.7),
                                   StableParams(1.0, 0.0)], ids=str)
    def test_matches_scalar_across_the_seam(self, p):
        fn = lambda z: np.exp(-0.5 * np.asarray(z) ** 2)
        g = gaussian()
        batch = apply_A_batch(p, fn, self.XS)
        for x, b in zip(self.XS, batch):
            s = apply_A(p, g, float(x))
            assert b == pytest.approx(s, rel=2e-6, abs=2e-6)

    def test_preserves_shape(self):
        p = StableParams(0.5, 0.0)
        fn = lambda z: np.exp(-0.5 * np.asarray(z) ** 2)
        xs = np.linspace(-2, 2, 6).reshape(2, 3)
        assert apply_A_batch(p, fn, xs).shape == (2, 3)

    def test_chunking_is_invisible(self):
        p = StableParams(0.8, 0.3)
        fn = lambda z: np.exp(-0.5 * np.asarray(z) ** 2)
        xs = np.linspace(-5, 5, 37)
        a = apply_A_batch(p, fn, xs)
        b = apply_A_batch(p, fn, xs, chunk=7)
        # reduction order differs with the chunk size; ulp-level only
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14)


class TestFailureContract:
    @pytest.mark.filterwarnings("ignore::UserWarning")
    @pytest.mark.filterwarnings(
        "ignore::scipy.integrate.IntegrationWarning")
    def test_unresolvable_oscillation_is_reported(self):
        # f'''' of cos(40 z^2) is ~1e9 around x=3; the Taylor head cannot
        # be trusted there and the error gate must say so.
        f = Evaluand(lambda z: np.cos(40.0 * z ** 2),
                     lambda z: -80.0 * z * np.sin(40.0 * z ** 2))
        with pytest.raises(NumericalFailure) as exc:
            apply_L(StableParams(0.5, 0.0), f, 3.0)
        assert exc.value.error > 0
