import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qsuff.matcore import (
    NotHermitianError,
    SuperOperator,
    embed,
    expm_h,
    hermitian_eig,
    hs_inner,
    imag_power,
    integral_log,
    left_mult,
    logm_pd,
    matrix_fn,
    partial_trace,
    powm_psd,
    right_mult,
    sqrtm_psd,
    tensor,
    unvec,
    vec,
)

from conftest import brute_partial_trace, rand_herm, rand_mat


def rand_pd(n, rng):
    G = rand_mat(n, rng)
    return G @ G.conj().T + 0.1 * np.eye(n)


def test_eig_identity():
    spec = hermitian_eig(np.eye(3))
    assert np.abs(spec.eigenvalues - 1).max() < 1e-14


def test_eig_diagonal_permutation():
    spec = hermitian_eig(np.diag([3.0, 1.0, 2.0]))
    assert np.abs(spec.eigenvalues - [1, 2, 3]).max() < 1e-14
    P = np.abs(spec.eigenvectors)
    assert np.abs(P - np.eye(3)[:, [1, 2, 0]]).max() < 1e-14


def test_eig_random_residual(rng):
    M = rand_herm(6, rng)
    spec = hermitian_eig(M)
    assert np.linalg.norm(M - spec.reconstruct()) <= 1e-10 * np.linalg.norm(M)
    U = spec.eigenvectors
    assert np.abs(U.conj().T @ U - np.eye(6)).max() < 1e-10


def test_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        hermitian_eig(np.array([[0, 1], [0, 0]]))


@settings(max_examples=50, deadline=None)
@given(n=st.integers(1, 8), seed=st.integers(0, 2**32 - 1),
       scale=st.sampled_from([1e-6, 1.0, 1e4]))
def test_eig_residual_property(n, seed, scale):
    M = rand_herm(n, np.random.default_rng(seed), scale)
    spec = hermitian_eig(M)
    assert np.linalg.norm(M - spec.reconstruct()) <= 1e-10 * max(1.0, np.linalg.norm(M))
    U = spec.eigenvectors
    assert np.abs(U.conj().T @ U - np.eye(n)).max() < 1e-10


def test_matrix_fn_exp_zero():
    assert np.abs(matrix_fn(np.zeros((3, 3)), np.exp) - np.eye(3)).max() < 1e-15


def test_log_exp_round_trip(rng):
    P = rand_pd(4, rng)
    assert np.abs(expm_h(logm_pd(P)) - P).max() < 1e-9


def test_imag_power_unitary(rng):
    P = rand_pd(5, rng)
    U = imag_power(P, 0.73)
    assert np.abs(U @ U.conj().T - np.eye(5)).max() < 1e-10


def test_matrix_fn_composition(rng):
    M = rand_herm(5, rng)
    once = matrix_fn(M, lambda w: np.sin(np.exp(w)))
    twice = matrix_fn(matrix_fn(M, np.exp), np.sin)
    assert np.abs(once - twice).max() < 1e-10


def test_matrix_fn_undefined():
    with pytest.raises(ValueError):
        matrix_fn(np.diag([1.0, 0.0]), np.log)


def test_powers(rng):
    P = rand_pd(4, rng)
    s = sqrtm_psd(P)
    assert np.abs(s @ s - P).max() < 1e-10
    assert np.abs(powm_psd(P, -1) @ P - np.eye(4)).max() < 1e-9


def test_powm_inverse_on_support():
    P = np.diag([2.0, 0.0])
    assert np.abs(powm_psd(P, -0.5) - np.diag([2 ** -0.5, 0])).max() < 1e-15


def test_integral_log_identity():
    assert np.abs(integral_log(np.eye(3))).max() < 1e-12


def test_integral_log_diagonal():
    L = integral_log(np.diag([2.0, 0.5]))
    assert np.abs(L - np.diag([np.log(2), -np.log(2)])).max() < 1e-8


def test_integral_log_random(rng):
    P = rand_pd(3, rng)
    assert np.abs(integral_log(P) - logm_pd(P)).max() < 1e-8


def test_tensor_identity():
    assert np.abs(tensor(np.eye(2), np.eye(3)) - np.eye(6)).max() == 0


def test_tensor_trace_and_mixed_product(rng):
    A, C = rand_mat(2, rng), rand_mat(2, rng)
    B, D = rand_mat(3, rng), rand_mat(3, rng)
    assert abs(np.trace(tensor(A, B)) - np.trace(A) * np.trace(B)) < 1e-12
    assert np.abs(tensor(A, B) @ tensor(C, D) - tensor(A @ C, B @ D)).max() < 1e-12


def test_partial_trace_product(rng):
    a, b, c = rand_mat(2, rng), rand_mat(3, rng), rand_mat(2, rng)
    out = partial_trace(tensor(a, b, c), (2, 3, 2), [1, 2])
    assert np.abs(out - tensor(b, c) * np.trace(a)).max() < 1e-12


@pytest.mark.parametrize("keep", [[0], [1], [2], [0, 1], [1, 2], [0, 2], [0, 1, 2]])
def test_partial_trace_brute_force(rng, keep):
    M = rand_mat(8, rng)
    got = partial_trace(M, (2, 2, 2), keep)
    assert np.abs(got - brute_partial_trace(M, (2, 2, 2), keep)).max() < 1e-12


def test_partial_trace_uneven_dims(rng):
    M = rand_mat(12, rng)
    for keep in ([0], [1], [2], [0, 2]):
        got = partial_trace(M, (3, 2, 2), keep)
        assert np.abs(got - brute_partial_trace(M, (3, 2, 2), keep)).max() < 1e-12


def test_partial_trace_preserves_trace(rng):
    M = rand_mat(12, rng)
    assert abs(np.trace(partial_trace(M, (2, 3, 2), [1])) - np.trace(M)) < 1e-12


def test_partial_trace_composes(rng):
    M = rand_mat(12, rng)
    step = partial_trace(partial_trace(M, (2, 3, 2), [1, 2]), (3, 2), [0])
    assert np.abs(step - partial_trace(M, (2, 3, 2), [1])).max() < 1e-12


def test_embed(rng):
    y = rand_mat(3, rng)
    assert np.abs(embed(y, (2, 3, 2), [1]) - tensor(np.eye(2), y, np.eye(2))).max() == 0
    z = rand_mat(6, rng)
    assert np.abs(embed(z, (2, 3, 2), [1, 2]) - tensor(np.eye(2), z)).max() == 0
    with pytest.raises(ValueError):
        embed(rand_mat(4, rng), (2, 3, 2), [0, 2])


def test_hs_inner():
    assert hs_inner(np.eye(4), np.eye(4)) == 4
    A = np.array([[1j, 0], [0, 0]])
    # conjugate-linear in the first slot
    assert hs_inner(A, np.diag([1, 0])) == -1j


def test_left_right_commute(rng):
    X, Y = rand_mat(3, rng), rand_mat(3, rng)
    L, R = left_mult(X), right_mult(Y)
    assert np.abs((L @ R).matrix - (R @ L).matrix).max() < 1e-12


def test_left_right_apply(rng):
    X, Y, a = rand_mat(3, rng), rand_mat(3, rng), rand_mat(3, rng)
    assert np.abs((left_mult(X) @ right_mult(Y))(a) - X @ a @ Y).max() < 1e-12


def test_vec_round_trip(rng):
    a = rand_mat(4, rng)
    assert np.abs(unvec(vec(a), 4) - a).max() == 0


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_superoperator_matrix_units(rng, n):
    X, Y = rand_mat(n, rng), rand_mat(n, rng)
    fn = lambda a: X @ a @ Y + np.trace(a) * np.eye(n)
    S = SuperOperator.from_map(fn, n)
    # exhaustive over matrix units
    for i in range(n):
        for j in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = 1
            assert np.abs(S(e) - fn(e)).max() < 1e-12
            assert np.abs(S.matrix[:, i * n + j] - vec(fn(e))).max() < 1e-12


@pytest.mark.parametrize("n", [2, 3, 4])
def test_superoperator_adjoint(rng, n):
    X, Y = rand_mat(n, rng), rand_mat(n, rng)
    S = left_mult(X) @ right_mult(Y)
    a, b = rand_mat(n, rng), rand_mat(n, rng)
    assert abs(hs_inner(b, S(a)) - hs_inner(S.adjoint()(b), a)) < 1e-10
