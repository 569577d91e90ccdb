import numpy as np
import pytest

from src.errors import InputError
from src.tensor_core import (
    as_tensor,
    contract_first_modes,
    contract_state,
    fold,
    frobenius_norm,
    from_flat,
    is_almost_symmetric,
    is_symmetric,
    kron_power,
    mode_mul_matrix,
    mode_mul_vector,
    outer,
    require_cubical,
    slice_norms,
    symmetrize,
    symmetrize_first_modes,
    to_flat,
    tucker_product,
    unfold,
)


def test_unfold_uses_first_index_fastest_columns():
    A = from_flat((2, 2, 2), np.arange(1, 9))
    assert A[1, 0, 0] == 2
    assert A[0, 1, 0] == 3
    np.testing.assert_array_equal(unfold(A, 0), [[1, 3, 5, 7], [2, 4, 6, 8]])
    np.testing.assert_array_equal(unfold(A, 1), [[1, 2, 5, 6], [3, 4, 7, 8]])
    np.testing.assert_array_equal(unfold(A, 2), [[1, 2, 3, 4], [5, 6, 7, 8]])


def test_fold_inverts_unfold(rng):
    A = rng.standard_normal((3, 4, 2, 5))
    for p in range(A.ndim):
        np.testing.assert_array_equal(fold(unfold(A, p), p, A.shape), A)


def test_flat_roundtrip_is_exact(rng):
    A = rng.standard_normal((3, 2, 4))
    np.testing.assert_array_equal(from_flat(A.shape, to_flat(A)), A)


def test_from_flat_rejects_wrong_length():
    with pytest.raises(InputError):
        from_flat((2, 2), [1.0, 2.0, 3.0])


def test_as_tensor_rejects_non_finite():
    with pytest.raises(InputError):
        as_tensor([[1.0, np.nan], [0.0, 1.0]])


def test_mode_product_matches_unfolding_identity(rng):
    A = rng.standard_normal((3, 4, 5))
    M = rng.standard_normal((2, 4))
    B = mode_mul_matrix(A, 1, M)
    assert B.shape == (3, 2, 5)
    np.testing.assert_allclose(unfold(B, 1), M @ unfold(A, 1), atol=1e-12)


def test_mode_product_dimension_mismatch():
    with pytest.raises(InputError):
        mode_mul_matrix(np.zeros((3, 3)), 0, np.zeros((2, 4)))
    with pytest.raises(InputError):
        mode_mul_matrix(np.zeros((3, 3)), 2, np.zeros((2, 3)))


def test_mode_products_on_distinct_modes_commute(rng):
    A = rng.standard_normal((3, 4, 5))
    M, N = rng.standard_normal((2, 3)), rng.standard_normal((6, 5))
    lhs = mode_mul_matrix(mode_mul_matrix(A, 0, M), 2, N)
    rhs = mode_mul_matrix(mode_mul_matrix(A, 2, N), 0, M)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_mode_vector_product_drops_a_mode(rng):
    A = rng.standard_normal((3, 4, 5))
    v = rng.standard_normal(4)
    np.testing.assert_allclose(mode_mul_vector(A, 1, v), np.einsum("ijk,j->ik", A, v))


def test_contract_state_matches_einsum(rng):
    A = rng.standard_normal((3, 3, 3, 3))
    x = rng.standard_normal(3)
    np.testing.assert_allclose(contract_state(A, x), np.einsum("abcd,a,b,c->d", A, x, x, x))


def test_contract_state_of_scalar_quartic():
    A = -np.ones((1, 1, 1, 1))
    np.testing.assert_allclose(contract_state(A, np.array([2.0])), [-8.0])


def test_contract_first_modes_needs_a_free_mode():
    with pytest.raises(InputError):
        contract_first_modes(np.zeros((2, 2)), [np.ones(2), np.ones(2)])


def test_outer_and_kron_power_agree(rng):
    v = rng.standard_normal(3)
    # kron ordering is last-index-fastest, i.e. C order of the outer product
    np.testing.assert_allclose(kron_power(v, 3), outer([v, v, v]).ravel())
    np.testing.assert_array_equal(kron_power(v, 0), [1.0])


def test_kron_power_of_matrix(rng):
    M = rng.standard_normal((2, 2))
    np.testing.assert_allclose(kron_power(M, 2), np.kron(M, M))
    np.testing.assert_array_equal(kron_power(M, 0), np.eye(1))


def test_symmetry_predicates(rng):
    raw = rng.standard_normal((3, 3, 3))
    assert not is_almost_symmetric(raw)
    almost = symmetrize_first_modes(raw)
    assert is_almost_symmetric(almost)
    assert not is_symmetric(almost)
    assert is_symmetric(symmetrize(raw))


def test_symmetrize_first_modes_keeps_vector_field(rng):
    raw = rng.standard_normal((3, 3, 3, 3))
    x = rng.standard_normal(3)
    np.testing.assert_allclose(
        contract_state(symmetrize_first_modes(raw), x), contract_state(raw, x), atol=1e-12
    )


def test_require_cubical_rejects_rectangular():
    assert require_cubical(np.zeros((2, 2, 2))) == 2
    with pytest.raises(InputError):
        require_cubical(np.zeros((2, 3)))


def test_tucker_product_with_identity_is_noop(rng):
    A = rng.standard_normal((2, 3, 4))
    np.testing.assert_allclose(tucker_product(A, [np.eye(n) for n in A.shape]), A)


def test_slice_norms(rng):
    A = rng.standard_normal((3, 4, 2))
    expected = [np.linalg.norm(A[:, j, :]) for j in range(4)]
    np.testing.assert_allclose(slice_norms(A, 1), expected)


def test_frobenius_norm_is_invariant_under_orthogonal_mode_products(rng):
    A = rng.standard_normal((3, 4, 2))
    Q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    assert frobenius_norm(from_flat((2, 2), [3.0, 0.0, 0.0, 4.0])) == 5.0
    assert frobenius_norm(mode_mul_matrix(A, 1, Q)) == pytest.approx(frobenius_norm(A), rel=1e-12)


def test_symmetrize_first_modes_is_idempotent(rng):
    S = symmetrize_first_modes(rng.standard_normal((3, 3, 3, 2)))
    np.testing.assert_allclose(symmetrize_first_modes(S), S, atol=1e-15)
    assert is_almost_symmetric(S)


def test_contract_state_is_multilinear(rng):
    for _ in range(20):
        A = symmetrize_first_modes(rng.standard_normal((3, 3, 3)))
        u, v = rng.standard_normal(3), rng.standard_normal(3)
        a, b = rng.standard_normal(2)
        expected = (
            a ** 2 * contract_first_modes(A, [u, u])
            + 2 * a * b * contract_first_modes(A, [u, v])
            + b ** 2 * contract_first_modes(A, [v, v])
        )
        np.testing.assert_allclose(contract_state(A, a * u + b * v), expected, atol=1e-12)
