import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from choi_twirl.errors import ResourceGuardError, ShapeError
from choi_twirl.tensor import (
    TensorSpace,
    all_permutations,
    compose,
    cycle_count,
    dimension_guard,
    factorial_guard,
    hs_inner,
    inverse_permutation,
    kron,
    partial_trace,
    partial_transpose,
    permutation_matrix,
    swap_operator,
)

from conftest import SWAP, X, Z, random_matrix


def test_kron_examples():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))
    assert np.array_equal(kron(np.diag([1, 2]), np.diag([3, 4])), np.diag([3, 4, 6, 8]))
    ket00 = np.array([1, 0, 0, 0])
    assert np.array_equal(kron(X, X) @ ket00, [0, 0, 0, 1])


def test_kron_empty_product_is_scalar_one():
    assert np.array_equal(kron(), [[1]])


def test_kron_mixed_product(rng):
    for n in (2, 3):
        a, b, c, d = (random_matrix(rng, n) for _ in range(4))
        err = np.linalg.norm(kron(a, b) @ kron(c, d) - kron(a @ c, b @ d))
        assert err <= 1e-12 * max(1.0, np.linalg.norm(kron(a @ c, b @ d)))


def test_partial_transpose_of_max_entangled_is_swap():
    v = np.eye(2).reshape(-1)
    rho = np.outer(v, v)
    assert np.array_equal(partial_transpose(rho, TensorSpace(2, 2), [1]), SWAP)


def test_partial_transpose_on_all_factors_is_transpose(rng):
    x = random_matrix(rng, 8)
    assert np.allclose(partial_transpose(x, TensorSpace(2, 3), [0, 1, 2]), x.T, atol=0)


def test_partial_transpose_on_single_factor_of_product(rng):
    a, b, c = (random_matrix(rng, 2) for _ in range(3))
    out = partial_transpose(kron(a, b, c), TensorSpace(2, 3), [1])
    assert np.allclose(out, kron(a, b.T, c), atol=1e-14)


def test_partial_transpose_rejects_wrong_shape():
    with pytest.raises(ShapeError):
        partial_transpose(np.eye(3), TensorSpace(2, 2), [0])


def test_partial_trace_examples(rng):
    space = TensorSpace(2, 2)
    assert np.allclose(partial_trace(SWAP, space, [1]), np.eye(2), atol=0)
    x = random_matrix(rng, 4)
    assert np.array_equal(partial_trace(x, space, []), x)
    a, b = random_matrix(rng, 2), random_matrix(rng, 2)
    assert np.allclose(partial_trace(kron(a, b), space, [1]), a * np.trace(b), atol=1e-13)
    assert np.allclose(partial_trace(kron(a, b), space, [0]), b * np.trace(a), atol=1e-13)


@settings(max_examples=30, deadline=None)
@given(
    arrays(np.float64, (2, 8, 8), elements=st.floats(-5, 5)),
    st.sets(st.integers(0, 2)),
)
def test_partial_transpose_involution_and_trace(parts, subset):
    x = parts[0] + 1j * parts[1]
    space = TensorSpace(2, 3)
    y = partial_transpose(x, space, subset)
    assert np.array_equal(partial_transpose(y, space, subset), x)
    assert np.isclose(np.trace(y), np.trace(x), atol=1e-12)


def test_permutation_matrix_examples():
    assert np.array_equal(permutation_matrix((0, 1, 2), TensorSpace(2, 3)), np.eye(8))
    assert np.array_equal(permutation_matrix((1, 0), TensorSpace(2, 2)), SWAP)
    p = permutation_matrix((1, 2, 0), TensorSpace(2, 3))
    assert np.array_equal(np.linalg.matrix_power(p, 3), np.eye(8))
    assert np.array_equal(swap_operator(2), SWAP)


def test_permutation_action_moves_slots():
    # slot k of P(σ)|i> carries i_{σ^{-1}(k)}
    space = TensorSpace(3, 3)
    sigma = (1, 2, 0)
    i = (0, 1, 2)
    ket = np.zeros(27)
    ket[np.ravel_multi_index(i, space.shape)] = 1
    out = permutation_matrix(sigma, space) @ ket
    inv = inverse_permutation(sigma)
    expected = tuple(i[inv[k]] for k in range(3))
    assert out[np.ravel_multi_index(expected, space.shape)] == 1


def test_permutation_homomorphism_on_s3():
    space = TensorSpace(2, 3)
    perms = all_permutations(3)
    pairs = 0
    for s in perms:
        for t in perms:
            lhs = permutation_matrix(s, space) @ permutation_matrix(t, space)
            assert np.array_equal(lhs, permutation_matrix(compose(s, t), space))
            pairs += 1
    assert pairs == 36


@pytest.mark.parametrize("d", [2, 3])
def test_permutation_trace_is_d_to_cycle_count(d):
    space = TensorSpace(d, 4)
    for s in all_permutations(4):
        assert np.trace(permutation_matrix(s, space)).real == d ** cycle_count(s)


def test_cycle_count_and_inverse():
    assert cycle_count((0, 1, 2)) == 3
    assert cycle_count((1, 0, 2)) == 2
    assert cycle_count((1, 2, 0)) == 1
    s = (2, 0, 3, 1)
    assert compose(s, inverse_permutation(s)) == (0, 1, 2, 3)
    assert len(all_permutations(4)) == math.factorial(4)


def test_hs_inner_examples():
    assert hs_inner(np.eye(4), np.eye(4)) == 4
    assert hs_inner(np.eye(4), SWAP) == 2
    assert hs_inner(X, Z) == 0


def test_resource_guards():
    factorial_guard(6)
    dimension_guard(256)
    with pytest.raises(ResourceGuardError):
        factorial_guard(7)
    with pytest.raises(ResourceGuardError):
        dimension_guard(257)
