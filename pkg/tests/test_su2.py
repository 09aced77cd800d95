import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm, logm

from goldman import su2
from goldman.errors import DegenerateElement, TraceMismatch
from goldman.su2 import IDENTITY, DIAG_I, LieVector, Su2Element

from conftest import load_fixture

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def series_exp(m, terms=20):
    out = np.eye(2, dtype=complex)
    term = np.eye(2, dtype=complex)
    for n in range(1, terms):
        term = term @ m / n
        out = out + term
    return out


def haar(seed):
    return su2.random_su2(np.random.default_rng(seed))


def test_matrix_convention_is_special_unitary(rng):
    for _ in range(20):
        m = su2.random_su2(rng).matrix()
        assert np.allclose(m @ m.conj().T, np.eye(2), atol=1e-14)
        assert abs(np.linalg.det(m) - 1) < 1e-14


def test_product_matches_matrix_product(rng):
    for _ in range(20):
        g, h = su2.random_su2(rng), su2.random_su2(rng)
        assert np.allclose((g * h).matrix(), g.matrix() @ h.matrix(), atol=1e-14)
        assert np.allclose(g.inverse().matrix(), np.linalg.inv(g.matrix()), atol=1e-14)


def test_matrix_round_trip(rng):
    g = su2.random_su2(rng)
    assert Su2Element.from_matrix(g.matrix()).distance(g) < 1e-15


def test_off_norm_rejected():
    with pytest.raises(ValueError):
        Su2Element(1.0, 0.1, 0.0, 0.0)
    assert Su2Element.from_json([2.0, 0, 0, 0], normalize=True) == IDENTITY


def test_basis_orthonormal_under_trace_form():
    basis = [LieVector(1, 0, 0), LieVector(0, 1, 0), LieVector(0, 0, 1)]
    for i, a in enumerate(basis):
        for j, b in enumerate(basis):
            assert su2.inner_product(a, b) == pytest.approx(float(i == j), abs=1e-15)


class TestExp:
    def test_zero(self):
        assert su2.exp_lie(LieVector(0, 0, 0)) == IDENTITY

    def test_pi_is_minus_identity(self):
        g = su2.exp_lie(LieVector(math.pi, 0, 0))
        assert g.trace() == pytest.approx(-2.0, abs=1e-15)

    def test_half_pi_round_trip(self):
        g = su2.exp_lie(LieVector(math.pi / 2, 0, 0))
        assert abs(g.trace()) < 1e-15
        assert su2.exp_lie(su2.log_ell(g)).distance(g) < 1e-15

    def test_against_power_series(self, rng):
        for _ in range(50):
            xi = LieVector(*rng.normal(size=3))
            want = series_exp(xi.matrix(), terms=40)
            assert np.allclose(su2.exp_lie(xi).matrix(), want, atol=1e-12)

    def test_against_scipy_expm(self, rng):
        for _ in range(50):
            xi = LieVector(*rng.normal(size=3))
            assert np.allclose(su2.exp_lie(xi).matrix(), expm(xi.matrix()), atol=1e-13)


class TestAngleAndLog:
    def test_trace_zero_is_quarter_turn(self):
        assert su2.f_angle(DIAG_I) == pytest.approx(math.pi / 2)

    def test_diagonal_angle(self):
        assert su2.f_angle(su2.diag_element(math.pi / 3)) == pytest.approx(math.pi / 3)

    def test_diag_i_log(self):
        ell = su2.log_ell(DIAG_I)
        assert ell.norm() == pytest.approx(math.pi / 2)
        assert ell.coords[1:] == pytest.approx([0.0, 0.0], abs=1e-16)

    def test_log_norm_of_diagonal(self):
        assert su2.log_ell(su2.diag_element(0.3)).norm() == pytest.approx(0.3)

    def test_log_matches_scipy_logm(self, rng):
        for _ in range(20):
            g = su2.random_su2(rng)
            assert np.allclose(su2.log_ell(g).matrix(), logm(g.matrix()), atol=1e-10)

    def test_central_elements_degenerate(self):
        for g in (IDENTITY, -IDENTITY):
            for fn in (su2.f_angle, su2.log_ell, su2.variation_F):
                with pytest.raises(DegenerateElement):
                    fn(g)

    def test_zeta_names_the_letter(self):
        with pytest.raises(DegenerateElement) as err:
            su2.zeta(IDENTITY, 1.0, name="cbar")
        assert err.value.name == "cbar"


class TestVariation:
    def test_diagonal_gives_diag_axis(self):
        f = su2.variation_F(su2.diag_element(0.7))
        assert f.coords == pytest.approx([1.0, 0.0, 0.0])
        assert np.allclose(f.matrix(), np.diag([1j, -1j]))

    def test_three_forms_agree(self, rng):
        for _ in range(100):
            g = su2.random_su2(rng)
            a, b, c = su2.variation_forms(g)
            f = su2.variation_F(g)
            for form in (a, b, c):
                assert max(abs(u - v) for u, v in zip(form, f)) < 1e-12

    def test_finite_difference(self, rng):
        s = 1e-5
        for _ in range(50):
            g = su2.random_su2(rng)
            xi = LieVector(*rng.normal(size=3))
            xi = xi.scaled(1 / xi.norm())
            plus = su2.f_angle(g * su2.exp_lie(xi.scaled(s)))
            minus = su2.f_angle(g * su2.exp_lie(xi.scaled(-s)))
            assert (plus - minus) / (2 * s) == pytest.approx(su2.inner_product(su2.variation_F(g), xi), abs=1e-6)

    def test_equivariance(self, rng):
        g, x = su2.random_su2(rng), su2.random_su2(rng)
        lhs = su2.variation_F(g.conj_by(x))
        rhs = su2.adjoint(x, su2.variation_F(g))
        assert max(abs(u - v) for u, v in zip(lhs, rhs)) < 1e-12


class TestZeta:
    def test_special_times(self, rng):
        g = su2.random_su2(rng)
        assert su2.zeta(g, 0.0) == IDENTITY
        assert su2.zeta(g, math.pi).distance(-IDENTITY) < 1e-15
        assert su2.zeta(g, 2 * math.pi).distance(IDENTITY) < 1e-15

    def test_commutes_and_one_parameter(self, rng):
        g = su2.random_su2(rng)
        z1, z2 = su2.zeta(g, 0.4), su2.zeta(g, 1.3)
        assert (z1 * g).distance(g * z1) < 1e-15
        assert (z1 * z2).distance(su2.zeta(g, 1.7)) < 1e-15


class TestSqrt:
    def test_examples(self):
        assert su2.principal_sqrt(IDENTITY) == IDENTITY
        assert su2.principal_sqrt(-IDENTITY) == DIAG_I
        assert su2.principal_sqrt(DIAG_I).distance(su2.diag_element(math.pi / 4)) < 1e-15

    def test_squares_back(self, rng):
        for _ in range(50):
            g = su2.random_su2(rng)
            r = su2.principal_sqrt(g)
            assert (r * r).distance(g) < 1e-14


class TestConjugator:
    def test_equal_inputs(self, rng):
        g = su2.random_su2(rng)
        assert su2.conjugator(g, g).distance(IDENTITY) < 1e-15

    def test_axis_swap(self):
        p = su2.diag_element(0.9)
        q = Su2Element(math.cos(0.9), 0.0, math.sin(0.9), 0.0)
        x = su2.conjugator(p, q)
        assert p.conj_by(x).distance(q) < 1e-14

    def test_random_conjugates(self, rng):
        for _ in range(100):
            p, x = su2.random_su2(rng), su2.random_su2(rng)
            q = p.conj_by(x)
            assert p.conj_by(su2.conjugator(p, q)).distance(q) < 1e-12

    def test_antipodal_axes(self):
        p = su2.diag_element(0.9)
        q = Su2Element(p.w, -p.x, 0.0, 0.0)
        x = su2.conjugator(p, q)
        assert p.conj_by(x).distance(q) < 1e-14
        assert su2.conjugator(p, q) == x

    def test_trace_mismatch(self):
        with pytest.raises(TraceMismatch):
            su2.conjugator(su2.diag_element(0.3), su2.diag_element(0.4))


class TestHaar:
    def test_golden_seed_42(self):
        fx = load_fixture("random_su2_seed42.json")
        assert haar(42).to_json() == fx["element"]

    def test_deterministic(self):
        assert haar(5) == haar(5)

    def test_trace_moments(self):
        # Haar on SU(2): E[tr] = 0, E[tr^2] = 1
        rng = np.random.default_rng(0)
        traces = np.array([su2.random_su2(rng).trace() for _ in range(20000)])
        assert abs(traces.mean()) < 0.03
        assert abs((traces**2).mean() - 1.0) < 0.03


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_exp_log_round_trip_property(seed):
    g = haar(seed)
    if su2.is_central(g, 1e-6):
        return
    assert su2.exp_lie(su2.log_ell(g)).distance(g) < 1e-12


@settings(max_examples=60, deadline=None)
@given(seeds, st.floats(min_value=-20, max_value=20))
def test_zeta_norm_and_trace_property(seed, t):
    g = haar(seed)
    if su2.is_central(g, 1e-6):
        return
    z = su2.zeta(g, t)
    assert abs(np.linalg.norm(z.coords) - 1.0) < 1e-14
    assert z.trace() == pytest.approx(2 * math.cos(t), abs=1e-14)
