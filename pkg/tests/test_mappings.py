import numpy as np
import pytest

from ternstab import algebra as alg
from ternstab import mappings as mp
from ternstab.errors import ConstructionError, DegenerateSamplingError, ValidationError

MAT2 = alg.matrix_algebra(2)


def unit_direction(desc, seed):
    g = alg.random_element(desc, 1.0, seed)
    return alg.scale(1.0 / alg.norm(g), g)


def bumped_instance(r=4.0, c=0.01, seed=3):
    u = alg.random_unitary(2, seed)
    v = alg.random_unitary(2, seed + 1)
    core = mp.make_exact_homomorphism(u, v)
    w = unit_direction(MAT2, seed + 2)
    return core, mp.perturb(core, mp.NormPowerBump(r, c, w)), w


class TestExactHomomorphism:
    def test_identity_pair(self):
        e = alg.unit(MAT2)
        h = mp.make_exact_homomorphism(e, e)
        x = alg.random_element(MAT2, 1.0, 0)
        assert alg.distance(h(x), x) == 0.0

    def test_defect_small_on_probes(self):
        core, _, _ = bumped_instance()
        worst = 0.0
        for i in range(100):
            x = alg.random_element(MAT2, 1.0, 1000 + i)
            y = alg.random_element(MAT2, 1.0, 2000 + i)
            z = alg.random_element(MAT2, 1.0, 3000 + i)
            worst = max(worst, alg.norm(mp.homomorphism_defect(core, x, y, z)))
        assert worst <= 1e-12

    def test_non_unitary_rejected(self):
        bad = alg.element(MAT2, [[2.0, 0], [0, 1.0]])
        with pytest.raises(ValidationError):
            mp.make_exact_homomorphism(bad, alg.unit(MAT2))

    def test_diagonal_three_cycle(self):
        desc = alg.diagonal_algebra(3)
        alpha = alg.element(desc, [1.0, 1j, -1.0])
        h = mp.make_exact_diagonal_homomorphism([1, 2, 0], alpha)
        worst = 0.0
        for i in range(50):
            x = alg.random_element(desc, 1.0, i)
            y = alg.random_element(desc, 1.0, 100 + i)
            z = alg.random_element(desc, 1.0, 200 + i)
            worst = max(worst, alg.norm(mp.homomorphism_defect(h, x, y, z)))
        assert worst <= 1e-14

    def test_diagonal_bad_permutation(self):
        desc = alg.diagonal_algebra(3)
        alpha = alg.element(desc, [1.0, 1.0, 1.0])
        with pytest.raises(ValidationError):
            mp.make_exact_diagonal_homomorphism([0, 0, 1], alpha)


class TestExactDerivation:
    def test_zero_generator(self):
        d = mp.make_exact_derivation(alg.zero(MAT2))
        x = alg.random_element(MAT2, 1.0, 4)
        assert alg.norm(d(x)) == 0.0

    def test_diag_generator_brute_force(self):
        a = alg.element(MAT2, [[1j, 0], [0, -1j]])
        d = mp.make_exact_derivation(a)
        ad = a.data
        worst = 0.0
        for i in range(100):
            x = alg.random_element(MAT2, 1.0, i)
            y = alg.random_element(MAT2, 1.0, 500 + i)
            z = alg.random_element(MAT2, 1.0, 900 + i)
            # independent expansion of the Leibniz identity in raw numpy
            xyz = x.data @ y.data.conj().T @ z.data
            lhs = ad @ xyz - xyz @ ad
            rhs = (
                (ad @ x.data - x.data @ ad) @ y.data.conj().T @ z.data
                + x.data @ (ad @ y.data - y.data @ ad).conj().T @ z.data
                + x.data @ y.data.conj().T @ (ad @ z.data - z.data @ ad)
            )
            worst = max(worst, float(np.abs(lhs - rhs).max()))
            worst = max(worst, alg.norm(mp.derivation_defect(d, x, y, z)))
        assert worst <= 1e-13

    def test_hermitian_rejected(self):
        a = alg.element(MAT2, [[1.0, 0], [0, 2.0]])
        with pytest.raises(ValidationError):
            mp.make_exact_derivation(a)


class TestPerturb:
    def test_none_returns_same_handle(self):
        core, _, _ = bumped_instance()
        assert mp.perturb(core, None) is core

    def test_bump_norm_exact(self):
        core, f, _ = bumped_instance(r=4.0, c=0.01)
        for i in range(20):
            x = alg.random_element(MAT2, 1.0, 50 + i)
            got = alg.distance(f(x), core(x))
            want = 0.01 * alg.norm(x) ** 4
            assert abs(got - want) <= 1e-12 * (1.0 + want)

    def test_bump_fixes_zero(self):
        _, f, _ = bumped_instance()
        assert alg.norm(f(alg.zero(MAT2))) == 0.0

    def test_nonpositive_exponent_rejected(self):
        w = unit_direction(MAT2, 1)
        with pytest.raises(ValidationError):
            mp.NormPowerBump(0.0, 0.01, w)

    def test_codomain_mismatch(self):
        core, _, _ = bumped_instance()
        w = unit_direction(alg.matrix_algebra(3), 1)
        with pytest.raises(ValidationError):
            mp.perturb(core, mp.NormPowerBump(4.0, 0.01, w))


class TestCauchyJensenDefect:
    def test_linear_map_zero(self):
        core, _, _ = bumped_instance()
        for i in range(20):
            gen_seed = 700 + i
            x = alg.random_element(MAT2, 1.0, gen_seed)
            y = alg.random_element(MAT2, 1.0, gen_seed + 1000)
            z = alg.random_element(MAT2, 1.0, gen_seed + 2000)
            for mu in mp.TORUS_PROBES:
                assert alg.norm(mp.cauchy_jensen_defect(core, mu, x, y, z)) <= 1e-12

    def test_constant_map(self):
        c_el = alg.scale(0.7, alg.unit(MAT2))
        const = mp.MappingHandle(MAT2, MAT2, lambda x: c_el, "constant")
        x = alg.random_element(MAT2, 1.0, 8)
        d1 = mp.cauchy_jensen_defect(const, 1.0, x, x, x)
        assert alg.norm(d1) <= 1e-15
        d2 = mp.cauchy_jensen_defect(const, -1.0, x, x, x)
        # 3c + 2c + c = 6c
        assert abs(alg.norm(d2) - 6 * 0.7) <= 1e-12

    def test_triangle_envelope_for_bump(self):
        _, f, _ = bumped_instance(r=4.0, c=0.01)
        for i in range(20):
            x = alg.random_element(MAT2, 1.0, i)
            y = alg.random_element(MAT2, 1.0, 300 + i)
            z = alg.random_element(MAT2, 1.0, 600 + i)
            for mu in (1.0, -1.0, 1j):
                lhs = alg.norm(mp.cauchy_jensen_defect(f, mu, x, y, z))
                cap = 0.01 * (
                    3 * alg.norm(alg.scale(1 / 3, x + y + z)) ** 4
                    + 2 * alg.norm(alg.scale(0.5, x + y)) ** 4
                    + alg.norm(z) ** 4
                )
                assert lhs <= cap + 1e-12

    def test_additive_in_f(self):
        core, f, w = bumped_instance(r=4.0, c=0.01)
        zero_core = mp.zero_map(MAT2)
        eps_only = mp.perturb(zero_core, mp.NormPowerBump(4.0, 0.01, w))
        x = alg.random_element(MAT2, 1.0, 21)
        y = alg.random_element(MAT2, 1.0, 22)
        z = alg.random_element(MAT2, 1.0, 23)
        for mu in (1.0, -1.0, 1j):
            combined = mp.cauchy_jensen_defect(f, mu, x, y, z)
            split = mp.cauchy_jensen_defect(core, mu, x, y, z) + mp.cauchy_jensen_defect(
                eps_only, mu, x, y, z
            )
            assert alg.mixed_violation(combined, split) <= 1e-13

    def test_mu_validation(self):
        core, _, _ = bumped_instance()
        x = alg.random_element(MAT2, 1.0, 1)
        with pytest.raises(ValidationError):
            mp.cauchy_jensen_defect(core, 0.5, x, x, x)


class TestDefects:
    def test_homomorphism_defect_matches_independent_expansion(self):
        _, f, _ = bumped_instance()
        for i in range(20):
            x = alg.random_element(MAT2, 1.0, i)
            y = alg.random_element(MAT2, 1.0, 40 + i)
            z = alg.random_element(MAT2, 1.0, 80 + i)
            got = mp.homomorphism_defect(f, x, y, z)
            fx, fy, fz = f(x).data, f(y).data, f(z).data
            ref = f(alg.element(MAT2, x.data @ y.data.conj().T @ z.data)).data - (
                fx @ fy.conj().T @ fz
            )
            assert float(np.abs(got.data - ref).max()) <= 1e-13

    def test_zero_map_derivation_defect(self):
        zm = mp.zero_map(MAT2)
        x = alg.random_element(MAT2, 1.0, 2)
        assert alg.norm(mp.derivation_defect(zm, x, x, x)) == 0.0


class TestEstimateTheta:
    def test_exact_linear_zero(self):
        core, _, _ = bumped_instance()
        assert mp.estimate_theta(core, mp.ControlForm.SUM, 4.0, 200, seed=5) <= 1e-12

    def test_bump_within_cap(self):
        _, f, _ = bumped_instance(r=4.0, c=0.01)
        theta = mp.estimate_theta(f, mp.ControlForm.SUM, 4.0, 1000, seed=5)
        assert 0.0 < theta <= 0.06

    def test_doubling_c_doubles_theta(self):
        core, f1, w = bumped_instance(r=4.0, c=0.01)
        f2 = mp.perturb(core, mp.NormPowerBump(4.0, 0.02, w))
        t1 = mp.estimate_theta(f1, mp.ControlForm.SUM, 4.0, 300, seed=9)
        t2 = mp.estimate_theta(f2, mp.ControlForm.SUM, 4.0, 300, seed=9)
        assert abs(t2 - 2.0 * t1) <= 1e-12 * t2

    def test_monotone_in_sample_count(self):
        _, f, _ = bumped_instance()
        t_small = mp.estimate_theta(f, mp.ControlForm.SUM, 4.0, 200, seed=13)
        t_large = mp.estimate_theta(f, mp.ControlForm.SUM, 4.0, 400, seed=13)
        assert t_large >= t_small

    def test_degenerate_sampling(self, monkeypatch):
        _, f, _ = bumped_instance()
        monkeypatch.setattr(mp, "sample_defects", lambda *a, **k: [])
        with pytest.raises(DegenerateSamplingError):
            mp.estimate_theta(f, mp.ControlForm.SUM, 4.0, 10, seed=0)


class TestHandleContracts:
    def test_constructed_handles_fix_zero(self):
        core, f, _ = bumped_instance()
        for h in (core, f, mp.identity_map(MAT2), mp.conjugation_map(MAT2)):
            assert alg.norm(h(alg.zero(MAT2))) == 0.0

    def test_handle_rejects_wrong_domain(self):
        core, _, _ = bumped_instance()
        with pytest.raises(ValidationError):
            core(alg.random_element(alg.matrix_algebra(3), 1.0, 0))

    def test_constructor_rejects_nonzero_at_zero(self):
        c_el = alg.scale(0.7, alg.unit(MAT2))
        with pytest.raises(ConstructionError):
            mp._checked_handle(MAT2, MAT2, lambda x: c_el, "constant")
