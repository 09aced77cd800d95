import math

import numpy as np
import pytest

from goldman import repvar, su2
from goldman.errors import NotInVariety
from goldman.repvar import (
    DoubleRepPoint,
    RepPoint,
    act_G,
    act_GxG,
    deck_T,
    fingerprint,
    in_Nx,
    is_generic,
    lift_I,
    same_orbit,
    same_orbit_double,
    sample_Nx,
    sample_R,
    sample_Rtilde,
)
from goldman.su2 import IDENTITY
from goldman.surfaces import SurfaceSpec, relation_residual_R, relation_residuals_Rtilde

from conftest import load_fixture

ALL_SPECS = [SurfaceSpec(c, k) for c in ("i", "ii", "iii") for k in (1, 2, 3)]
I1 = SurfaceSpec("i", 1)


def negate_a(p):
    return RepPoint(p.c, p.b, tuple(-a for a in p.a))


@pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
def test_samplers_land_in_varieties(spec, rng):
    for _ in range(20):
        assert relation_residual_R(spec, sample_R(spec, rng)) < 1e-10
        assert max(relation_residuals_Rtilde(spec, sample_Rtilde(spec, rng))) < 1e-10


def test_k0_klein_bottle_sampling(rng):
    spec = SurfaceSpec("iii", 0, allow_k0=True)
    assert relation_residual_R(spec, sample_R(spec, rng)) < 1e-10
    assert max(relation_residuals_Rtilde(spec, sample_Rtilde(spec, rng))) < 1e-10


def test_golden_sample_R():
    record = load_fixture("sample_R_i_k1_seed7.jsonl")[0]
    p = sample_R(I1, np.random.default_rng(7))
    assert p.to_json() == record["point"]
    assert relation_residual_R(I1, p) < 1e-10


def test_golden_sample_Rtilde():
    record = load_fixture("sample_Rtilde_i_k1_seed11.json")
    q = sample_Rtilde(I1, np.random.default_rng(11))
    assert q.to_json() == record["point"]
    assert max(relation_residuals_Rtilde(I1, q)) < 1e-10


class TestActions:
    def test_center_acts_trivially(self, rng):
        p = sample_R(I1, rng)
        assert act_G(IDENTITY, p) == p
        assert act_G(-IDENTITY, p).distance(p) < 1e-15

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
    def test_action_preserves_relations(self, spec, rng):
        p, q = sample_R(spec, rng), sample_Rtilde(spec, rng)
        g, h = su2.random_su2(rng), su2.random_su2(rng)
        assert relation_residual_R(spec, act_G(g, p)) < 1e-10
        assert max(relation_residuals_Rtilde(spec, act_GxG(g, h, q, spec))) < 1e-10

    def test_double_center(self, rng):
        q = sample_Rtilde(I1, rng)
        assert act_GxG(IDENTITY, IDENTITY, q, I1) == q
        assert act_GxG(-IDENTITY, -IDENTITY, q, I1).distance(q) < 1e-15

    def test_case_i_sign_witness(self, rng):
        p = sample_R(I1, rng)
        moved = act_GxG(IDENTITY, -IDENTITY, lift_I(p, I1), I1)
        n = negate_a(p)
        assert moved.distance(DoubleRepPoint(n.c, n.b, n.a, n.c, n.b, n.a)) < 1e-15

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
    def test_lift_equivariant(self, spec, rng):
        p, g = sample_R(spec, rng), su2.random_su2(rng)
        assert lift_I(act_G(g, p), spec).distance(act_GxG(g, g, lift_I(p, spec), spec)) < 1e-14

    def test_lift_rejects_off_variety(self):
        bad = RepPoint(su2.DIAG_I, su2.Su2Element(0.0, 0.0, 1.0, 0.0), (IDENTITY,))
        with pytest.raises(NotInVariety):
            lift_I(bad, I1)

    def test_deck_involution(self, rng):
        q = sample_Rtilde(I1, rng)
        assert deck_T(deck_T(q)) == q
        p = sample_R(I1, rng)
        assert deck_T(lift_I(p, I1)) == lift_I(p, I1)
        one = DoubleRepPoint.from_letters([IDENTITY] * 6)
        assert deck_T(one) == one


class TestNx:
    def test_lift_is_in_N1(self, rng):
        assert in_Nx(lift_I(sample_R(I1, rng), I1), IDENTITY, I1)[0]

    def test_diagonal_example(self):
        phi = 0.41
        a = su2.diag_element(phi)
        x = (a * a).inverse()
        c, b = su2.diag_element(1.1), su2.diag_element(-0.3)
        q = DoubleRepPoint(c, b, (a,), c, b, (a * x,))
        ok, res = in_Nx(q, x, I1)
        assert ok and res < 1e-14

    def test_generic_point_not_in_N1(self, rng):
        assert not in_Nx(sample_Rtilde(I1, rng), IDENTITY, I1)[0]

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
    @pytest.mark.parametrize("x", [IDENTITY, -IDENTITY, su2.diag_element(math.pi / 5)], ids=["1", "-1", "torus"])
    def test_sample_Nx(self, spec, x, rng):
        for _ in range(5):
            q = sample_Nx(spec, x, rng)
            assert in_Nx(q, x, spec)[0]

    def test_minus_one_case_i_shape(self, rng):
        q = sample_Nx(I1, -IDENTITY, rng)
        assert q.cbar == q.c and q.bbar == q.b
        assert q.abar[0].distance(-q.a[0]) < 1e-15
        lhs = q.b.inverse() * q.c * q.b * q.c.inverse()
        assert lhs.distance(-(q.a[0] * q.a[0])) < 1e-14


class TestFingerprint:
    @pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
    def test_invariant(self, spec, rng):
        p, q = sample_R(spec, rng), sample_Rtilde(spec, rng)
        g, h = su2.random_su2(rng), su2.random_su2(rng)
        assert fingerprint(act_G(g, p), spec).distance(fingerprint(p, spec)) < 1e-12
        assert fingerprint(act_GxG(g, h, q, spec), spec).distance(fingerprint(q, spec)) < 1e-12

    def test_sign_flip_lifts_agree(self, rng):
        p = sample_R(I1, rng)
        a, b = lift_I(p, I1), lift_I(negate_a(p), I1)
        assert fingerprint(a, I1).distance(fingerprint(b, I1)) < 1e-12

    def test_independent_samples_differ(self, rng):
        for spec in ALL_SPECS:
            assert fingerprint(sample_R(spec, rng), spec).distance(fingerprint(sample_R(spec, rng), spec)) > 1e-6

    def test_words_are_bounded(self):
        for spec in ALL_SPECS:
            assert len(repvar.fingerprint_words(spec, True)) < 300


class TestOrbits:
    @pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
    def test_planted_witness(self, spec, rng):
        p, g = sample_R(spec, rng), su2.random_su2(rng)
        w = same_orbit(p, act_G(g, p), spec)
        assert w is not None
        assert min(w.distance(g), w.distance(-g)) < 1e-8

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
    def test_planted_double_witness(self, spec, rng):
        q = sample_Rtilde(spec, rng)
        g, h = su2.random_su2(rng), su2.random_su2(rng)
        target = act_GxG(g, h, q, spec)
        w = same_orbit_double(q, target, spec)
        assert w is not None and act_GxG(*w, q, spec).distance(target) < 1e-8

    def test_non_injectivity(self, rng):
        p = sample_R(I1, rng)
        g, h = same_orbit_double(lift_I(p, I1), lift_I(negate_a(p), I1), I1)
        # witness is (1,-1) up to the central (-1,-1)
        if g.w < 0:
            g, h = -g, -h
        assert g.distance(IDENTITY) < 1e-8 and h.distance(-IDENTITY) < 1e-8

    def test_rho_level_sign_flip_differs(self, rng):
        p = sample_R(I1, rng)
        assert abs(p.a[0].trace()) > 1e-3
        assert same_orbit(p, negate_a(p), I1) is None

    def test_independent_samples(self, rng):
        assert same_orbit(sample_R(I1, rng), sample_R(I1, rng), I1) is None

    def test_genericity(self, rng):
        p = sample_R(I1, rng)
        assert is_generic(lift_I(p, I1), I1)
        for spec in ALL_SPECS:
            assert is_generic(sample_Rtilde(spec, rng), spec)
        diag = [su2.diag_element(t) for t in (0.3, 0.7, 1.1)]
        assert not is_generic(DoubleRepPoint.from_letters(diag + diag), I1)

    def test_iota_image(self, rng):
        for spec in ALL_SPECS:
            assert repvar.in_iota_image(lift_I(sample_R(spec, rng), spec), spec)
            assert not repvar.in_iota_image(sample_Nx(spec, -IDENTITY, rng), spec)

    def test_fixed_stratum_of_minus_one(self, rng):
        x = repvar.fixed_stratum(sample_Nx(SurfaceSpec("ii", 2), -IDENTITY, rng), SurfaceSpec("ii", 2))
        assert x.trace() == pytest.approx(-2.0, abs=1e-8)


def test_commutator_solver(rng):
    target = su2.random_su2(rng)
    for k in (1, 2, 3):
        xs = repvar.solve_commutator_product(target, k, rng)
        assert len(xs) == 2 * k
        prod = IDENTITY
        for x, y in zip(xs[::2], xs[1::2]):
            prod = prod * x * y * x.inverse() * y.inverse()
        assert prod.distance(target) < 1e-12
