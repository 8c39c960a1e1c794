import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from conftest import random_spd
from metriplex.brackets import PoissonField, ScalarField, StructureConstants, two_bracket
from metriplex.constructors import (ChristoffelField, MetricField, SingularMetricError,
                                    VanishingGradientError, b_tensor, cartan_killing, ck_4tensor,
                                    contravariant_christoffel, contravariant_curvature,
                                    generic_linearize, generic_symmetrize, kn_product,
                                    levi_civita, lie_algebra_4tensor, metric_compatibility_defect,
                                    recover_algebraic_curvature, riemann_from_affine, space_form,
                                    torsion_identity_defect, torsion_removal)
from metriplex.tensor_core import SymmetryError, contract4, levi_civita_symbol, symmetry_defects

EPS = levi_civita_symbol(3)
D3 = np.einsum("ik,jl->ijkl", np.eye(3), np.eye(3)) - np.einsum("il,jk->ijkl", np.eye(3), np.eye(3))


def sphere_metric():
    """Round unit 2-sphere in (theta, phi) with exact first and second derivatives."""
    def g(z):
        return np.diag([1.0, np.sin(z[0]) ** 2])

    def dg(z):
        out = np.zeros((2, 2, 2))
        out[1, 1, 0] = np.sin(2 * z[0])
        return out

    def d2g(z):
        out = np.zeros((2, 2, 2, 2))
        out[1, 1, 0, 0] = 2 * np.cos(2 * z[0])
        return out

    return MetricField(g, covariant=True, derivative=dg, second_derivative=d2g, name="sphere")


def state_metric(z):
    """Contravariant g^{ij}(z) = I + z z^T / 2, positive definite everywhere."""
    return np.eye(3) + 0.5 * np.outer(z, z)


class TestKNProduct:
    def test_identity_factors(self):
        np.testing.assert_array_equal(kn_product(np.eye(3), np.eye(3)), 2 * D3)

    def test_zero_factor(self, rng):
        assert not kn_product(np.zeros((3, 3)), random_spd(rng, 3)).any()

    def test_brute_force(self, rng):
        s, m = random_spd(rng, 4), random_spd(rng, 4)
        np.testing.assert_allclose(kn_product(s, m), oracles.kn(s, m), atol=1e-13)
        e = np.eye(3)
        R = kn_product(np.eye(3), np.outer(e[0], e[0]))
        np.testing.assert_array_equal(R, oracles.kn(np.eye(3), np.outer(e[0], e[0])))
        assert R[0, 1, 0, 1] == 1.0

    def test_rejects_asymmetric(self):
        with pytest.raises(SymmetryError):
            kn_product(np.triu(np.ones((3, 3))), np.eye(3))

    def test_psd_factors_give_nonnegative_curvature(self, rng):
        s, m = random_spd(rng, 4, 0.0), random_spd(rng, 4, 0.0)
        R = kn_product(s, m)
        a, b = rng.standard_normal((2, 1000, 4))
        k = np.einsum("ijkl,pi,pj,pk,pl->p", R, a, b, a, b)
        assert k.min() >= -1e-10


class TestSpaceForm:
    def test_rigid_body_tensor(self):
        lam = 0.1
        R = space_form(np.eye(3), lam)
        for i, j, k, l in oracles.loops(3):
            expected = lam * ((i == k) * (j == l) - (i == l) * (j == k))
            assert R[i, j, k, l] == expected

    def test_zero_curvature(self, rng):
        assert not space_form(random_spd(rng, 3), 0.0).any()

    @pytest.mark.parametrize("K", [-1.0, 0.3, 2.0])
    def test_half_kn_square(self, rng, K):
        g = random_spd(rng, 3)
        np.testing.assert_allclose(space_form(g, K), 0.5 * K * kn_product(g, g), atol=1e-12)


class TestLieAlgebra4Tensor:
    def test_so3_flat(self, so3):
        np.testing.assert_allclose(lie_algebra_4tensor(so3, np.eye(3)), D3, atol=0)

    def test_zero_metric(self, kida_c):
        assert not lie_algebra_4tensor(kida_c, np.zeros((3, 3))).any()

    @pytest.mark.parametrize("make", [oracles.kida_constants, oracles.aff2_constants])
    def test_brute_force(self, rng, make):
        c = make()
        g = random_spd(rng, c.shape[0])
        A = lie_algebra_4tensor(c, g)
        np.testing.assert_allclose(A, oracles.lie_A(c, g), atol=1e-12)
        d = symmetry_defects(A)
        assert max(d["d12"], d["d34"], d["dpair"]) <= 1e-12

    def test_cyclic_defect_needs_four_dimensions(self, rng):
        c = oracles.aff2_constants()
        g = random_spd(rng, 4)
        A = lie_algebra_4tensor(c, g)
        assert symmetry_defects(A)["dcyclic"] == pytest.approx(oracles.defects(A)["dcyclic"])
        assert symmetry_defects(A)["dcyclic"] > 1e-3
        assert symmetry_defects(lie_algebra_4tensor(oracles.kida_constants(), g[:3, :3]))["dcyclic"] <= 1e-12


class TestTorsionRemoval:
    def test_algebraic_input_unchanged(self, rng):
        R = kn_product(random_spd(rng, 3), random_spd(rng, 3))
        np.testing.assert_allclose(torsion_removal(R), R, atol=1e-12)

    def test_so3_unchanged(self, so3):
        A = lie_algebra_4tensor(so3, np.eye(3))
        np.testing.assert_array_equal(torsion_removal(A), A)

    def test_removes_torsion_preserving_g_metric(self, rng):
        c = oracles.aff2_constants()
        A = lie_algebra_4tensor(c, random_spd(rng, 4))
        R = torsion_removal(A)
        assert symmetry_defects(A)["dcyclic"] > 1e-3
        assert symmetry_defects(R)["dcyclic"] <= 1e-12
        for _ in range(20):
            h = rng.standard_normal(4)
            GA = np.einsum("ijkl,j,l->ik", A, h, h)
            GR = np.einsum("ijkl,j,l->ik", R, h, h)
            np.testing.assert_allclose(GA, GR, atol=1e-12)

    def test_b_tensor_closed_form(self, rng):
        for make in (oracles.kida_constants, oracles.aff2_constants):
            c = make()
            g = random_spd(rng, c.shape[0])
            np.testing.assert_allclose(b_tensor(c, g), torsion_removal(lie_algebra_4tensor(c, g)),
                                       atol=1e-12)

    def test_precondition(self):
        bad = np.zeros((3,) * 4)
        bad[0, 1, 0, 1] = 1.0
        with pytest.raises(SymmetryError):
            torsion_removal(bad)


class TestCartanKilling:
    def test_so3(self, so3):
        np.testing.assert_allclose(cartan_killing(so3), np.eye(3), atol=1e-15)
        np.testing.assert_allclose(cartan_killing(so3), oracles.killing(so3.c, -0.5))

    def test_zero_lambda(self, kida_c):
        assert not cartan_killing(kida_c, 0.0).any()

    def test_abelian(self):
        assert not cartan_killing(StructureConstants.abelian(3)).any()

    def test_kida_is_indefinite(self, kida_c):
        np.testing.assert_allclose(cartan_killing(kida_c), np.diag([1.0, -1.0, -1.0]))


class TestCK4Tensor:
    def test_so3_three_quarters(self, so3):
        np.testing.assert_allclose(ck_4tensor(so3, -3 / 8), 0.75 * D3, atol=1e-14)
        np.testing.assert_allclose(ck_4tensor(so3), D3, atol=1e-14)

    def test_abelian_rejected(self):
        with pytest.raises(SingularMetricError):
            ck_4tensor(StructureConstants.abelian(3))

    @pytest.mark.parametrize("lam", [-0.5, -0.2, 1.0])
    def test_matches_torsion_removal_and_b_tensor(self, kida_c, lam):
        g = cartan_killing(kida_c, lam)
        R = ck_4tensor(kida_c, lam)
        np.testing.assert_allclose(R, torsion_removal(lie_algebra_4tensor(kida_c, g)), atol=1e-10)
        np.testing.assert_allclose(R, b_tensor(kida_c, g), atol=1e-10)
        assert symmetry_defects(R)["dcyclic"] <= 1e-12


class TestRecovery:
    @pytest.mark.parametrize("n", [3, 4])
    def test_algebraic_tensor_from_g_metrics(self, rng, n):
        R = kn_product(random_spd(rng, n), random_spd(rng, n))
        rebuilt = recover_algebraic_curvature(lambda h: np.einsum("ijkl,j,l->ik", R, h, h), n)
        np.testing.assert_allclose(rebuilt, R, atol=1e-10)

    def test_torsion_class_collapses_to_representative(self, rng):
        A = lie_algebra_4tensor(oracles.aff2_constants(), random_spd(rng, 4))
        rebuilt = recover_algebraic_curvature(lambda h: np.einsum("ijkl,j,l->ik", A, h, h), 4)
        np.testing.assert_allclose(rebuilt, torsion_removal(A), atol=1e-10)


class TestLeviCivita:
    def test_constant_metric(self, rng):
        g = MetricField.constant(random_spd(rng, 3), covariant=True)
        assert not levi_civita(g, rng.standard_normal(3)).any()

    def test_polar_plane(self):
        g = MetricField(lambda z: np.diag([1.0, z[0] ** 2]), covariant=True)
        Gam = levi_civita(g, [2.0, 0.0])
        assert Gam[1, 0, 1] == pytest.approx(0.5, abs=1e-8)
        assert Gam[0, 1, 1] == pytest.approx(-2.0, abs=1e-8)
        np.testing.assert_array_equal(Gam, Gam.transpose(0, 2, 1))

    def test_brute_force(self, rng):
        def gfun(z):
            return np.eye(3) + 0.3 * np.outer(np.sin(z), np.sin(z))
        g = MetricField(gfun, covariant=True)
        z = rng.standard_normal(3)
        np.testing.assert_allclose(levi_civita(g, z), oracles.christoffel_lower(gfun, z), atol=1e-8)

    def test_singular_metric(self):
        g = MetricField(lambda z: np.diag([1.0, z[0] ** 2]), covariant=True,
                        definiteness="positive_semidefinite")
        with pytest.raises(SingularMetricError):
            levi_civita(g, [0.0, 0.0])


class TestRiemannFromAffine:
    def test_euclidean(self, rng):
        g = MetricField.constant(np.eye(3), covariant=True)
        R = riemann_from_affine(ChristoffelField.levi_civita(g), g, rng.standard_normal(3))
        assert np.max(np.abs(R)) <= 1e-12

    @pytest.mark.parametrize("theta", [0.7, 1.2, 2.0])
    def test_unit_sphere_analytic(self, theta):
        g = sphere_metric()
        z = np.array([theta, 0.4])
        R = riemann_from_affine(ChristoffelField.levi_civita(g), g, z)
        up = g.upper(z)
        norm = up[0, 0] * up[1, 1] - up[0, 1] ** 2
        assert R[0, 1, 0, 1] / norm == pytest.approx(1.0, abs=1e-12)
        d = symmetry_defects(R)
        assert max(d.values()) <= 1e-10

    def test_unit_sphere_finite_difference(self):
        g = MetricField(lambda z: np.diag([1.0, np.sin(z[0]) ** 2]), covariant=True)
        z = np.array([1.1, 0.3])
        R = riemann_from_affine(ChristoffelField.levi_civita(g), g, z)
        assert R[0, 1, 0, 1] * np.sin(z[0]) ** 2 == pytest.approx(1.0, rel=1e-6)

    def test_constant_connection(self, rng):
        Gam = rng.standard_normal((3, 3, 3))
        Gam = 0.5 * (Gam + Gam.transpose(0, 2, 1))
        field = ChristoffelField(lambda z: Gam, "covariant", lambda z: np.zeros((3,) * 4))
        R = riemann_from_affine(field, MetricField.constant(np.eye(3), covariant=True), np.zeros(3))
        brute = np.zeros((3,) * 4)
        for i, j, k, l in oracles.loops(3):
            brute[i, j, k, l] = sum(Gam[i, r, k] * Gam[r, j, l] - Gam[i, r, l] * Gam[r, j, k]
                                    for r in range(3))
        np.testing.assert_allclose(R, brute, atol=1e-12)

    def test_rejects_contravariant(self, so3_poisson):
        field = ChristoffelField.contravariant(so3_poisson, MetricField.constant(np.eye(3)))
        with pytest.raises(ValueError):
            riemann_from_affine(field, MetricField.constant(np.eye(3)), np.zeros(3))


class TestContravariantChristoffel:
    def test_so3_flat(self, so3_poisson, rng):
        Gam = contravariant_christoffel(so3_poisson, MetricField.constant(np.eye(3)),
                                        rng.standard_normal(3))
        np.testing.assert_allclose(Gam, -0.5 * EPS, atol=1e-12)

    def test_zero_poisson(self, rng):
        J = PoissonField.constant(np.zeros((3, 3)))
        g = MetricField(state_metric)
        assert np.max(np.abs(contravariant_christoffel(J, g, rng.standard_normal(3)))) <= 1e-14

    def test_constant_metric_brute_force(self, kida_c, rng):
        J = PoissonField.lie_poisson(kida_c)
        gm = random_spd(rng, 3)
        Gam = contravariant_christoffel(J, MetricField.constant(gm), rng.standard_normal(3))
        np.testing.assert_allclose(Gam, oracles.contravariant_christoffel_const(kida_c.c, gm),
                                   atol=1e-12)

    def test_euclidean_lie_poisson_formula(self, kida_c):
        c = kida_c.c
        Gam = contravariant_christoffel(PoissonField.lie_poisson(kida_c),
                                        MetricField.constant(np.eye(3)), np.ones(3))
        expected = np.zeros((3, 3, 3))
        for i, j, k in oracles.loops(3, 3):
            expected[i, j, k] = 0.5 * (c[i, j, k] - c[j, k, i] + c[k, i, j])
        np.testing.assert_allclose(Gam, expected, atol=1e-12)

    @pytest.mark.parametrize("seed", range(3))
    def test_torsion_and_compatibility(self, kida_c, seed):
        z = np.random.default_rng(seed).standard_normal(3)
        J = PoissonField.lie_poisson(kida_c)
        g = MetricField(state_metric)
        assert torsion_identity_defect(J, g, z) <= 1e-8
        assert metric_compatibility_defect(J, g, z) <= 1e-8


class TestContravariantCurvature:
    def test_so3_anchor(self, so3_poisson):
        R = contravariant_curvature(so3_poisson, MetricField.constant(np.eye(3)), [0.2, -0.7, 0.4])
        np.testing.assert_allclose(R, 0.25 * D3, atol=1e-6)

    def test_canonical_flat(self):
        g = MetricField.constant(random_spd(np.random.default_rng(3), 4))
        R = contravariant_curvature(PoissonField.canonical(2), g, np.ones(4))
        assert np.max(np.abs(R)) <= 1e-10

    def test_kida_cartan_killing(self, kida_c):
        gCK = cartan_killing(kida_c)
        R = contravariant_curvature(PoissonField.lie_poisson(kida_c), MetricField.constant(gCK),
                                    [0.3, 0.1, -0.5])
        # the bracket-slot ordering is the negative of the raw index formula
        np.testing.assert_allclose(R, -oracles.ckr(kida_c.c, gCK), atol=1e-6)

    def test_state_dependent_metric_symmetries(self, kida_c):
        R = contravariant_curvature(PoissonField.lie_poisson(kida_c), MetricField(state_metric),
                                    [0.3, 0.1, -0.5])
        d = symmetry_defects(R)
        scale = np.max(np.abs(R))
        assert max(d["d12"], d["d34"], d["dpair"]) <= 1e-10 * max(1.0, scale)
        assert d["dcyclic"] <= 1e-8 * max(1.0, scale)

    def test_casimir_pair_vanishes(self, so3_poisson, rng):
        z = rng.standard_normal(3)
        R = contravariant_curvature(so3_poisson, MetricField.constant(np.eye(3)), z)
        dS, dC = 2 * z, 4 * (z @ z) * z
        assert abs(contract4(R, dS, dC, dS, dC)) <= 1e-10


class TestDoubleBracketIdentity:
    @pytest.mark.parametrize("lam", [-0.5, -0.25])
    def test_so3(self, so3_poisson, so3, lam, rng):
        g = cartan_killing(so3, lam)
        gbar = np.linalg.inv(g)
        A = lie_algebra_4tensor(so3, g)
        S = ScalarField.quadratic(gbar)
        for _ in range(10):
            z, df, dg = rng.standard_normal((3, 3))
            Jz = so3_poisson(z)
            assert two_bracket(A, S, df, dg, z) == pytest.approx(df @ Jz @ gbar @ Jz.T @ dg, abs=1e-10)


class TestGeneric:
    def test_projector_case(self, rng):
        S = ScalarField.quadratic(random_spd(rng, 3))
        z = rng.standard_normal(3)
        Gh = generic_linearize(S.grad, S, z)
        dS = S.grad(z)
        np.testing.assert_allclose(Gh, np.outer(dS, dS) / (dS @ dS))
        np.testing.assert_allclose(Gh @ dS, dS)

    def test_two_dim_example(self):
        S = ScalarField.linear([0, 1])
        Gh = generic_linearize(lambda z: np.array([0.0, 1.0]), S, [0.5, 0.5])
        np.testing.assert_array_equal(Gh, [[0, 0], [0, 1]])
        G = generic_symmetrize(Gh, S, [0.5, 0.5])
        np.testing.assert_allclose(G, G.T, atol=0)
        np.testing.assert_allclose(G @ [0, 1], [0, 1], atol=1e-15)

    def test_zero_flux(self, rng):
        S = ScalarField.linear([1, 2, 3])
        assert not generic_linearize(np.zeros(3), S, np.zeros(3)).any()

    def test_vanishing_gradient(self):
        S = ScalarField.quadratic(np.eye(3))
        with pytest.raises(VanishingGradientError):
            generic_linearize(np.ones(3), S, np.zeros(3))
        with pytest.raises(VanishingGradientError):
            generic_symmetrize(np.eye(3), S, np.zeros(3))

    def test_symmetric_input_action_kept(self, rng):
        S = ScalarField.quadratic(random_spd(rng, 4))
        Gh = random_spd(rng, 4)
        z = rng.standard_normal(4)
        G = generic_symmetrize(Gh, S, z)
        np.testing.assert_allclose(G @ S.grad(z), Gh @ S.grad(z), atol=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(arrays(float, (4, 4), elements=st.floats(-3, 3, allow_nan=False)),
           arrays(float, 4, elements=st.floats(-3, 3, allow_nan=False)).filter(
               lambda v: np.linalg.norm(v) > 1e-3))
    def test_symmetrize_property(self, Gh, dS):
        S = ScalarField.linear(dS)
        G = generic_symmetrize(Gh, S, np.zeros(4))
        scale = max(1.0, np.abs(Gh).max())
        assert np.max(np.abs(G - G.T)) <= 1e-12 * scale
        assert np.max(np.abs(G @ dS - Gh @ dS)) <= 1e-12 * scale * max(1.0, np.abs(dS).max())

    def test_energy_conserving_flux(self, rng):
        for _ in range(20):
            z, dH, dS, y = rng.standard_normal((4, 3))
            y -= (y @ dH) / (dH @ dH) * dH
            S = ScalarField.linear(dS)
            G = generic_symmetrize(generic_linearize(y, S, z), S, z)
            np.testing.assert_allclose(G @ dS, y, atol=1e-12)
            assert abs(dH @ G @ dS) <= 1e-12
