import math

import numpy as np
import pytest

from qsuff.divergences import rel_entropy, von_neumann_entropy
from qsuff.matcore import partial_trace
from qsuff.ssa import (
    TripartiteState,
    check_theorem3,
    entropy_increments,
    lift,
    markov_from_classical,
    markov_from_hamiltonians,
    petz_recovery,
    product_state,
    random_markov_classical,
    random_markov_hamiltonians,
    random_tripartite,
    rss_check,
    ssa_gap,
    theorem3_log_residual,
    tracial,
)
from qsuff.states import random_density

from conftest import brute_partial_trace


def rand_product(rng, dims=(2, 3, 2)):
    return product_state(*(random_density(d, rng) for d in dims))


def test_lift_exhaustive():
    dims = (2, 3, 2)
    for on, d in (("1", 2), ("2", 3), ("3", 2), ("12", 6), ("23", 6)):
        for i in range(d):
            for j in range(d):
                y = np.zeros((d, d))
                y[i, j] = 1
                if on == "1":
                    ref = np.kron(y, np.eye(6))
                elif on == "2":
                    ref = np.kron(np.kron(np.eye(2), y), np.eye(2))
                elif on == "3":
                    ref = np.kron(np.eye(6), y)
                elif on == "12":
                    ref = np.kron(y, np.eye(2))
                else:
                    ref = np.kron(np.eye(2), y)
                assert np.array_equal(lift(y, dims, on), ref)
    with pytest.raises(ValueError):
        lift(np.eye(2), dims, "13")


def test_marginals_product(rng):
    a, b, c = random_density(2, rng), random_density(3, rng), random_density(2, rng)
    r12, r23, r2 = product_state(a, b, c).marginals()
    assert np.abs(r12 - np.kron(a, b)).max() < 1e-14
    assert np.abs(r23 - np.kron(b, c)).max() < 1e-14
    assert np.abs(r2 - b).max() < 1e-14


def test_marginals_brute_force(rng):
    s = random_tripartite((2, 2, 2), rng)
    r12, r23, r2 = s.marginals()
    assert np.abs(r12 - brute_partial_trace(s.rho, (2, 2, 2), [0, 1])).max() < 1e-12
    assert np.abs(r23 - brute_partial_trace(s.rho, (2, 2, 2), [1, 2])).max() < 1e-12
    assert np.abs(r2 - brute_partial_trace(s.rho, (2, 2, 2), [1])).max() < 1e-12
    assert np.abs(partial_trace(r12, (2, 2), [1]) - r2).max() < 1e-14


def test_state_validation():
    with pytest.raises(ValueError):
        TripartiteState((2, 2), np.eye(4) / 4)
    with pytest.raises(ValueError):
        TripartiteState((2, 2, 2), np.eye(4) / 4)


def test_ssa_gap_product(rng):
    assert abs(ssa_gap(rand_product(rng))) < 1e-12


def test_ssa_gap_classical_markov():
    assert abs(ssa_gap(random_markov_classical((2, 3, 2), seed=3))) < 1e-9


def test_ssa_gap_random_positive(rng):
    for _ in range(20):
        g = ssa_gap(random_tripartite((2, 2, 2), rng))
        assert g > 1e-3


def test_entropy_increments(rng):
    s = random_tripartite((2, 3, 2), rng)
    a, b = entropy_increments(s)
    assert abs((a - b) - ssa_gap(s)) < 1e-10


def test_rss_product(rng):
    rep = rss_check(rand_product(rng))
    assert abs(rep.gap) < 1e-10 and abs(rep.ssa_gap) < 1e-10


def test_rss_random(rng):
    s = random_tripartite((2, 2, 2), rng)
    rep = rss_check(s)
    assert rep.gap > 0
    assert rep.identity_residual < 1e-8
    assert rep.replay.quadrature_error < 1e-7
    assert rep.replay.worst_integrand_margin >= -1e-12


def test_rss_markov():
    rep = rss_check(random_markov_classical((2, 2, 2), seed=8))
    assert abs(rep.upper - rep.lower) < 1e-8


def test_rss_chain_terms(rng):
    s = random_tripartite((2, 3, 2), rng)
    r12, r23, r2 = s.marginals()
    up = rel_entropy(s.rho, np.kron(r12, tracial(2)))
    ref = -von_neumann_entropy(s.rho) + von_neumann_entropy(r12) + math.log(2)
    assert abs(up - ref) < 1e-10


def test_theorem3_product(rng):
    v = check_theorem3(rand_product(rng))
    assert v.equal
    assert max(v.condition1_residual, v.condition2_residual) <= 1e-9


def test_theorem3_classical_markov():
    v = check_theorem3(random_markov_classical((2, 3, 2), seed=1))
    assert v.equal and v.conditions_hold and v.consistent


def test_theorem3_random(rng):
    v = check_theorem3(random_tripartite((2, 2, 2), rng))
    assert v.entropy_gap > 0 and not v.equal
    assert min(v.condition1_residual, v.condition2_residual) > v.residual_tol
    assert v.consistent


def test_recovery_tracial_state():
    s = TripartiteState((2, 3, 2), np.eye(12) / 12)
    g = petz_recovery(s)
    assert g.restriction_residual("2") < 1e-12
    assert g.unital_residual() < 1e-12


def test_recovery_product_split(rng):
    s = TripartiteState((2, 2, 3), np.kron(random_density(2, rng), random_density(6, rng)))
    g = petz_recovery(s)
    assert g.restriction_residual("2") < 1e-9
    assert g.restriction_residual("3") < 1e-9


def test_recovery_random_not_identity(rng):
    g = petz_recovery(random_tripartite((2, 2, 2), rng))
    assert g.restriction_residual("2") > 1e-3
    assert g.restriction_residual("3") > 1e-3


def test_recovery_cp_unital_dual(rng):
    for s in (random_tripartite((2, 2, 2), rng), random_markov_classical((2, 3, 2), rng)):
        g = petz_recovery(s)
        assert g.choi_min_eigenvalue() > -1e-10
        assert g.unital_residual() < 1e-10
        assert g.dual_residual() < 1e-9


def test_recovery_state_preservation(rng):
    # holds for every state, Markov or not
    s = random_tripartite((2, 2, 2), rng)
    g = petz_recovery(s)
    x = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    assert g.state_preservation_residual(x) < 1e-10


def test_recovery_dual_marginal_markov():
    g = petz_recovery(random_markov_classical((2, 3, 2), seed=4))
    assert g.dual_marginal_residual() < 1e-10


def test_recovery_fixes_H3_on_markov():
    g = petz_recovery(random_markov_classical((3, 2, 2), seed=6))
    assert g.restriction_residual("3") < 1e-10


def test_recovery_on_H2_is_fidelity_damping():
    # on a classical chain gamma(|a><b| in B(H2)) = F(a, b) |a><b| kron I3
    rng = np.random.default_rng(12)
    p = rng.dirichlet(np.ones(2))
    A = rng.dirichlet(np.ones(3), size=2)
    B = rng.dirichlet(np.ones(2), size=3)
    s = markov_from_classical(p, A, B)
    g = petz_recovery(s)
    joint12 = p[:, None] * A
    cond1 = joint12 / joint12.sum(axis=0)
    for a in range(3):
        for b in range(3):
            y = np.zeros((3, 3))
            y[a, b] = 1
            F = np.sum(np.sqrt(cond1[:, a] * cond1[:, b]))
            out = g(lift(y, s.dims, "2"))
            assert np.abs(out - F * np.kron(y, np.eye(2))).max() < 1e-12
    assert g.restriction_residual("2") > 1e-3


def test_literal_E_fails_by_factor():
    s = TripartiteState((2, 2, 2), np.eye(8) / 8)
    g = petz_recovery(s, literal_E=True)
    assert abs(g.unital_residual() - 0.5 * np.linalg.norm(np.eye(4))) < 1e-12
    out = g(np.eye(8))
    assert np.abs(out - np.eye(4) / 2).max() < 1e-12


def test_markov_from_hamiltonians_zero():
    Z = [np.zeros((2, 2))] * 3 + [np.zeros((4, 4))] * 2
    s = markov_from_hamiltonians(*Z)
    assert np.abs(s.rho - np.eye(8) / 8).max() < 1e-14
    assert abs(ssa_gap(s)) < 1e-12


def test_markov_from_hamiltonians_random():
    for seed in range(5):
        s = markov_from_hamiltonians(*random_markov_hamiltonians((2, 2, 2), seed))
        assert abs(ssa_gap(s)) <= 1e-9
        assert np.linalg.norm(theorem3_log_residual(s)) <= 1e-9


def test_markov_from_hamiltonians_rotated_basis(rng):
    from qsuff.states import random_unitary

    H = random_markov_hamiltonians((2, 3, 2), 3)
    U = tuple(random_unitary(d, rng) for d in (2, 3, 2))
    U12, U23 = np.kron(U[0], U[1]), np.kron(U[1], U[2])
    rot = [U[0] @ H[0] @ U[0].conj().T, U[1] @ H[1] @ U[1].conj().T, U[2] @ H[2] @ U[2].conj().T,
           U12 @ H[3] @ U12.conj().T, U23 @ H[4] @ U23.conj().T]
    s = markov_from_hamiltonians(*rot, basis=U)
    assert abs(ssa_gap(s)) <= 1e-9
    assert check_theorem3(s).conditions_hold


def test_markov_from_hamiltonians_rejects():
    rng = np.random.default_rng(0)
    H = list(random_markov_hamiltonians((2, 2, 2), 1))
    H[3] = np.diag(rng.standard_normal(4))
    with pytest.raises(ValueError, match="marginal"):
        markov_from_hamiltonians(*H)
    H[0] = np.array([[0, 1], [1, 0]])
    with pytest.raises(ValueError, match="diagonal"):
        markov_from_hamiltonians(*H)


def test_deterministic_chain():
    P = np.array([[0.0, 1.0], [1.0, 0.0]])
    s = markov_from_classical(np.array([0.5, 0.5]), P, P)
    assert abs(ssa_gap(s)) <= 1e-12


def test_classical_chain_theorem3():
    s = markov_from_classical(np.array([0.3, 0.7]), np.array([[0.2, 0.8], [0.6, 0.4]]),
                              np.array([[0.5, 0.5], [0.1, 0.9]]))
    assert abs(ssa_gap(s)) <= 1e-9
    assert check_theorem3(s).consistent


def test_equivalence_gap_and_theorem3():
    rng = np.random.default_rng(77)
    bad = 0
    states = [random_tripartite((2, 2, 2), rng) for _ in range(20)]
    states += [random_markov_classical((2, 2, 2), rng) for _ in range(10)]
    states += [markov_from_hamiltonians(*random_markov_hamiltonians((2, 2, 2), rng)) for _ in range(10)]
    for s in states:
        v = check_theorem3(s)
        fixes_H3 = petz_recovery(s).restriction_residual("3") <= 1e-6
        bad += not (v.equal == v.conditions_hold == fixes_H3)
    assert bad == 0
