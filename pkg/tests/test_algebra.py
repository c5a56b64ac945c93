import math

import numpy as np
import pytest

from ternstab import algebra as alg
from ternstab.errors import (
    NonUnitalError,
    PowerIterationError,
    ShapeMismatchError,
    ValidationError,
)

from oracles import jacobi_operator_norm

MAT2 = alg.matrix_algebra(2)
MAT3 = alg.matrix_algebra(3)
DIAG = alg.diagonal_algebra(2)
MOD2 = alg.module_algebra(2)


class TestTernaryProduct:
    def test_matrix_unit_identity(self):
        e = alg.unit(MAT2)
        x = alg.random_element(MAT2, 1.0, 5)
        assert alg.distance(alg.ternary_product(e, e, x), x) == 0.0
        assert alg.distance(alg.ternary_product(x, e, e), x) == 0.0

    def test_pointwise_hand_value(self):
        x = alg.element(DIAG, [1.0, 1j])
        out = alg.ternary_product(x, x, x)
        # (1*1*1, i*(-i)*i) = (1, i)
        assert np.allclose(out.data, [1.0, 1j], atol=0)

    def test_module_cube_scales_by_norm_squared(self):
        x = alg.element(MOD2, [1.0 + 2j, -0.5])
        expected = alg.scale(alg.norm(x) ** 2, x)
        assert alg.distance(alg.ternary_product(x, x, x), expected) <= 1e-14

    def test_descriptor_mismatch(self):
        x = alg.random_element(MAT2, 1.0, 1)
        y = alg.random_element(MAT3, 1.0, 1)
        with pytest.raises(ShapeMismatchError):
            alg.ternary_product(x, y, x)

    def test_middle_slot_conjugate_linearity_tight(self):
        for seed in range(10):
            x = alg.random_element(MAT2, 1.0, seed)
            y = alg.random_element(MAT2, 1.0, seed + 100)
            z = alg.random_element(MAT2, 1.0, seed + 200)
            lhs = alg.ternary_product(x, alg.scale(2j, y), z)
            rhs = alg.scale(-2j, alg.ternary_product(x, y, z))
            assert alg.mixed_violation(lhs, rhs) <= 1e-13


class TestNorm:
    def test_identity_is_exactly_one(self):
        assert alg.norm(alg.unit(MAT3)) == 1.0

    def test_diagonal_moduli(self):
        x = alg.element(MAT2, [[3j, 0], [0, 1.0]])
        assert abs(alg.norm(x) - 3.0) <= 1e-12

    def test_zero(self):
        assert alg.norm(alg.zero(MAT3)) == 0.0

    @pytest.mark.parametrize("n", [2, 3, 4, 6, 8])
    def test_against_jacobi_oracle(self, n):
        desc = alg.matrix_algebra(n)
        for seed in range(10):
            x = alg.random_element(desc, 1.0, seed)
            mine = alg.norm(x)
            ref = jacobi_operator_norm(x.data)
            assert abs(mine - ref) <= 1e-10 * ref

    def test_pointwise_sup(self):
        x = alg.element(alg.diagonal_algebra(3), [1.0, -2j, 0.5])
        assert alg.norm(x) == 2.0

    def test_module_euclidean(self):
        x = alg.element(MOD2, [3.0, 4j])
        assert abs(alg.norm(x) - 5.0) <= 1e-15

    def test_nonconvergence_reports_iterations(self):
        x = alg.random_element(MAT3, 1.0, 3)
        with pytest.raises(PowerIterationError) as err:
            alg.matrix_operator_norm(x.data, max_iter=1)
        assert err.value.iterations == 1

    def test_kernel_start_restarts(self):
        # the Gram matrix annihilates the all-ones start vector exactly
        x = alg.element(MAT2, [[1.0, -1.0], [0.0, 0.0]])
        ref = jacobi_operator_norm(x.data)
        assert abs(alg.norm(x) - ref) <= 1e-12 * ref


class TestVectorSpaceOps:
    def test_add_inverse(self):
        x = alg.random_element(MAT2, 1.0, 9)
        assert alg.norm(x + alg.scale(-1.0, x)) == 0.0

    def test_scale_i(self):
        x = alg.element(DIAG, [1.0, 0.0])
        assert np.array_equal(alg.scale(1j, x).data, np.array([1j, 0j]))

    def test_scale_two_identity_norm(self):
        assert alg.norm(alg.scale(2.0, alg.unit(MAT2))) == 2.0

    def test_nonfinite_rejected(self):
        with pytest.raises(ValidationError):
            alg.element(DIAG, [np.inf, 0.0])
        x = alg.element(DIAG, [1.0, 0.0])
        with pytest.raises(ValidationError):
            alg.scale(math.nan, x)

    def test_elements_immutable(self):
        x = alg.random_element(MAT2, 1.0, 0)
        with pytest.raises(ValueError):
            x.data[0, 0] = 5.0


class TestUnit:
    def test_matrix(self):
        assert np.array_equal(alg.unit(MAT2).data, np.eye(2))

    def test_pointwise(self):
        assert np.array_equal(alg.unit(alg.diagonal_algebra(3)).data, np.ones(3))

    def test_module_d1_has_unit(self):
        e = alg.unit(alg.module_algebra(1))
        x = alg.element(alg.module_algebra(1), [2.0 - 1j])
        assert alg.distance(alg.ternary_product(x, e, e), x) == 0.0

    def test_module_d2_absent(self):
        assert alg.unit(MOD2) is None

    def test_module_no_unit_exists(self):
        # any candidate e forces [x,e,e] into span(e); two independent probes
        # cannot both be multiples of one e, so some probe refutes every e
        probes = [alg.element(MOD2, [1.0, 0.0]), alg.element(MOD2, [0.0, 1.0])]
        candidates = [
            alg.element(MOD2, [1.0, 0.0]),
            alg.element(MOD2, [0.0, 1.0]),
            alg.element(MOD2, [1.0, 1.0]),
            alg.element(MOD2, [1 / math.sqrt(2), 1j / math.sqrt(2)]),
            alg.random_element(MOD2, 1.0, 77),
        ]
        for e in candidates:
            worst = max(
                alg.distance(alg.ternary_product(x, e, e), x) for x in probes
            )
            assert worst > 0.4


class TestInducedCStar:
    def test_matrix_500_samples(self):
        report = alg.induced_cstar_check(MAT2, 500, 1e-10, 11)
        assert report.passed, report.violations

    def test_pointwise_commutative(self):
        report = alg.induced_cstar_check(alg.diagonal_algebra(4), 500, 1e-12, 12)
        assert report.passed, report.violations

    def test_exact_probes_zero_violation(self):
        e = alg.unit(MAT2)
        found = alg.induced_cstar_violations(e, e, e, e)
        assert all(v == 0.0 for v in found.values()), found

    def test_nonunital_rejected(self):
        with pytest.raises(NonUnitalError):
            alg.induced_cstar_check(MOD2, 10, 1e-9, 0)


class TestAxioms:
    @pytest.mark.parametrize(
        "desc", [MAT3, alg.module_algebra(5), alg.diagonal_algebra(4)]
    )
    def test_random_tuples_pass(self, desc):
        report = alg.check_axioms(desc, 1000, 1e-9, 42)
        assert report.passed, report.violations

    def test_zero_tuple_exact(self):
        z = alg.zero(MAT2)
        found = alg.ternary_axiom_violations(z, z, z, z, z)
        assert all(v == 0.0 for v in found.values()), found

    def test_samples_validated(self):
        with pytest.raises(ValidationError):
            alg.check_axioms(MAT2, 0, 1e-9, 0)


class TestSampling:
    def test_same_seed_identical(self):
        a = alg.random_element(MAT3, 2.0, 123)
        b = alg.random_element(MAT3, 2.0, 123)
        assert np.array_equal(a.data, b.data)

    def test_norm_homogeneous_in_scale(self):
        base = alg.norm(alg.random_element(MAT3, 1.0, 5))
        scaled = alg.norm(alg.random_element(MAT3, 2.5, 5))
        assert abs(scaled - 2.5 * base) <= 1e-12 * scaled

    def test_unitary_is_unitary(self):
        for seed in range(5):
            u = alg.random_unitary(3, seed)
            gram = u.data.conj().T @ u.data
            assert alg.matrix_operator_norm(gram - np.eye(3)) <= 1e-12

    def test_matrix_dim_cap(self):
        with pytest.raises(ValidationError):
            alg.matrix_algebra(17)

    def test_scale_positive(self):
        with pytest.raises(ValidationError):
            alg.random_element(MAT2, 0.0, 1)
