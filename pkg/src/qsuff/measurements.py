"""POVMs, measured (a-posteriori) relative entropy and the Holevo bound."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .divergences import (
    classical_kl,
    holevo_as_relative_entropy,
    holevo_quantity,
    rel_entropy,
    shannon_entropy,
)
from .matcore import hermitian_eig, hermitian_part, is_hermitian, sqrtm_psd
from .states import Ensemble, QuantumChannel, is_invertible, povm_channel


@dataclass(frozen=True, eq=False)
class Povm:
    effects: tuple

    def __post_init__(self):
        effs = tuple(np.asarray(E, dtype=complex) for E in self.effects)
        if not effs:
            raise ValueError("a POVM needs at least one effect")
        n = effs[0].shape[0]
        for j, E in enumerate(effs):
            if E.shape != (n, n) or not is_hermitian(E, 1e-10):
                raise ValueError(f"effect {j} is not a Hermitian {n}x{n} matrix")
            w = hermitian_eig(hermitian_part(E)).eigenvalues
            if w[0] < -1e-10:
                raise ValueError(f"effect {j} is not positive (eigenvalue {w[0]:.3e})")
        resid = np.max(np.abs(sum(effs) - np.eye(n)))
        if resid > 1e-10:
            raise ValueError(f"effects do not sum to the identity (deviation {resid:.3e})")
        object.__setattr__(self, "effects", tuple(hermitian_part(E) for E in effs))

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    def __len__(self) -> int:
        return len(self.effects)

    def channel(self) -> QuantumChannel:
        return povm_channel(self.effects)


def basis_povm(n: int) -> Povm:
    return Povm(tuple(np.diag(np.eye(n)[k]) for k in range(n)))


def random_povm(n: int, m: int, seed=None) -> Povm:
    """``m`` effects ``S^{-1/2} G_j S^{-1/2}`` from random positive ``G_j``, ``S = sum G_j``."""
    from .matcore import powm_psd

    rng = np.random.default_rng(seed)
    Gs = []
    for _ in range(m):
        A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        Gs.append(A @ A.conj().T)
    R = powm_psd(sum(Gs), -0.5)
    effs = [hermitian_part(R @ G @ R) for G in Gs]
    # absorb rounding so the effects sum to I exactly up to ulp
    effs[-1] = hermitian_part(np.eye(n) - sum(effs[:-1]))
    return Povm(tuple(effs))


def induced_dist(rho, E: Povm) -> np.ndarray:
    rho = np.asarray(rho)
    if rho.shape != (E.dim, E.dim):
        raise ValueError("state and POVM dimensions differ")
    return np.array([np.trace(rho @ Ej).real for Ej in E.effects])


def aposteriori_gap(D1, D2, E: Povm) -> float:
    """``S(D1, D2) - S(mu1, mu2)`` for the measured distributions.

    Returns ``inf`` when only the quantum side is infinite and ``nan`` when
    both sides are infinite.
    """
    quantum = rel_entropy(D1, D2)
    classical = classical_kl(induced_dist(D1, E), induced_dist(D2, E))
    if math.isinf(quantum):
        return math.nan if math.isinf(classical) else math.inf
    return quantum - classical


def example1(mu: float, x: float, z: complex):
    """The three-outcome measurement on a qutrit that keeps all relative entropy.

    ``D2 = I/3``, ``D1 = Diag(1 - 2 mu, mu, mu)``, ``E1 = Diag(1, 0, 0)`` and
    ``E2``, ``E3`` act on the last two coordinates through the blocks
    ``[[x, z], [conj z, 1 - x]]`` and ``[[1 - x, -z], [-conj z, x]]``.
    """
    if not 0.0 < mu < 0.5:
        raise ValueError("mu must satisfy 0 < mu < 1/2")
    if not 0.0 < x < 1.0:
        raise ValueError("x must satisfy 0 < x < 1")
    if abs(z) ** 2 > x * (1.0 - x) + 1e-15:
        raise ValueError(f"|z|^2 <= x(1 - x) is required for positive effects "
                         f"(|z|^2 = {abs(z) ** 2:.6g}, x(1 - x) = {x * (1 - x):.6g})")
    D2 = np.eye(3, dtype=complex) / 3.0
    D1 = np.diag([1.0 - 2.0 * mu, mu, mu]).astype(complex)
    E1 = np.diag([1.0, 0.0, 0.0]).astype(complex)
    E2 = np.array([[0, 0, 0], [0, x, z], [0, np.conj(z), 1 - x]], dtype=complex)
    E3 = np.array([[0, 0, 0], [0, 1 - x, -z], [0, -np.conj(z), x]], dtype=complex)
    return D1, D2, Povm((E1, E2, E3))


def example1_entropy(mu: float) -> float:
    return (1 - 2 * mu) * math.log(3 * (1 - 2 * mu)) + 2 * mu * math.log(3 * mu)


@dataclass
class Lemma1Report:
    states_commutator: float
    effects_commutator: float
    lambdas: np.ndarray
    fit_residuals: np.ndarray
    sqrt_fidelity_classical: float
    sqrt_fidelity_quantum: float

    @property
    def fidelity_residual(self) -> float:
        return abs(self.sqrt_fidelity_classical - self.sqrt_fidelity_quantum)

    def commutes(self, tol: float = 1e-7) -> bool:
        return max(self.states_commutator, self.effects_commutator) <= tol


def lemma1_diagnostics(D1, D2, E: Povm, tau: float = 1e-9) -> Lemma1Report:
    """Commutation diagnostics in the equality case of the measured entropy bound.

    Requires invertible ``D2`` and ``aposteriori_gap <= tau``.  ``lambdas``
    are the least-squares scalars in
    ``D1^{1/2} E_j^{1/2} = lambda_j D2^{1/2} E_j^{1/2}``.
    """
    D1 = np.asarray(D1, dtype=complex)
    D2 = np.asarray(D2, dtype=complex)
    if not is_invertible(D2):
        raise ValueError("D2 must be invertible")
    gap = aposteriori_gap(D1, D2, E)
    if not gap <= tau:
        raise ValueError(f"no equality in the measured entropy bound (gap {gap:.3e})")
    s1 = sqrtm_psd(D1)
    s2 = sqrtm_psd(D2)
    comm = float(np.linalg.norm(D2 @ D1 - D1 @ D2))
    ecomm = max(float(np.linalg.norm(D2 @ Ej - Ej @ D2)) for Ej in E.effects)
    lams, resids = [], []
    for Ej in E.effects:
        r = sqrtm_psd(Ej)
        A = s1 @ r
        B = s2 @ r
        bb = np.vdot(B, B).real
        lam = np.vdot(B, A) / bb if bb > 0 else 0.0
        lams.append(lam)
        resids.append(float(np.linalg.norm(A - lam * B)))
    p1 = induced_dist(D1, E)
    p2 = induced_dist(D2, E)
    classical = float(np.sum(np.sqrt(np.clip(p1, 0, None) * np.clip(p2, 0, None))))
    quantum = float(np.trace(s1 @ s2).real)
    return Lemma1Report(comm, ecomm, np.array(lams), np.array(resids), classical, quantum)


def _common_eigenbasis(D1, D2) -> np.ndarray:
    """Unitary diagonalizing two commuting Hermitian matrices (identity if both are diagonal)."""
    n = D1.shape[0]
    off = lambda M: np.max(np.abs(M - np.diag(np.diag(M))), initial=0.0)
    if off(D1) <= 1e-14 and off(D2) <= 1e-14:
        return np.eye(n, dtype=complex)
    spec = hermitian_eig(D2)
    U = spec.eigenvectors
    w = spec.eigenvalues
    A = U.conj().T @ D1 @ U
    # refine inside each degenerate eigenspace of D2
    blocks = []
    start = 0
    tol = 1e-9 * max(1.0, abs(w[-1]))
    for k in range(1, len(w) + 1):
        if k == len(w) or w[k] - w[k - 1] > tol:
            blocks.append((start, k))
            start = k
    W = np.zeros_like(U)
    for a, b in blocks:
        sub = hermitian_eig(hermitian_part(A[a:b, a:b]), rtol=1e-8).eigenvectors
        W[a:b, a:b] = sub
    return U @ W


@dataclass
class SupportClassReport:
    classes: list
    projections: list
    projection_residuals: list
    ratios: list
    ratio_spreads: list
    basis: np.ndarray = field(repr=False)

    @property
    def max_projection_residual(self) -> float:
        return max(self.projection_residuals)

    @property
    def max_ratio_spread(self) -> float:
        return max(self.ratio_spreads)


def support_class_diagnostics(D1, D2, E: Povm, support_tol: float = 1e-12) -> SupportClassReport:
    """Group effects by overlapping supports of their diagonals.

    Works in a common eigenbasis of the commuting pair ``D1, D2``.  Effects
    ``j, k`` are linked when the supports of the diagonals of ``E_j`` and
    ``E_k`` intersect; each connected class ``[j]`` gives
    ``P_[j] = sum_{k in [j]} diag(E_k)``, which should be a projection on
    which ``D1 D2^{-1}`` is constant.
    """
    D1 = np.asarray(D1, dtype=complex)
    D2 = np.asarray(D2, dtype=complex)
    if np.linalg.norm(D1 @ D2 - D2 @ D1) > 1e-8:
        raise ValueError("D1 and D2 must commute")
    if not is_invertible(D2):
        raise ValueError("D2 must be invertible")
    U = _common_eigenbasis(D1, D2)
    v1 = np.real(np.diag(U.conj().T @ D1 @ U))
    v2 = np.real(np.diag(U.conj().T @ D2 @ U))
    diags = [np.real(np.diag(U.conj().T @ Ej @ U)) for Ej in E.effects]
    supports = [set(np.flatnonzero(d > support_tol)) for d in diags]

    m = len(diags)
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for j in range(m):
        for k in range(j + 1, m):
            if supports[j] & supports[k]:
                parent[find(j)] = find(k)
    groups: dict[int, list] = {}
    for j in range(m):
        if supports[j]:
            groups.setdefault(find(j), []).append(j)
    classes = sorted(groups.values())

    ratio = v1 / v2
    projs, presid, ratios, spreads = [], [], [], []
    for cls in classes:
        P = np.diag(sum(diags[k] for k in cls))
        projs.append(P)
        presid.append(float(np.linalg.norm(P @ P - P)))
        idx = sorted(set().union(*(supports[k] for k in cls)))
        r = ratio[idx]
        ratios.append(float(np.mean(r)))
        spreads.append(float(np.max(r) - np.min(r)))
    return SupportClassReport(classes, projs, presid, ratios, spreads, U)


@dataclass
class HolevoReport:
    lhs: float
    rhs: float
    gap: float
    lhs_relative_form: float
    rhs_relative_form: float
    lemma1_applicable: bool
    lemma1: list = field(default_factory=list)

    @property
    def form_residual(self) -> float:
        return max(abs(self.lhs - self.lhs_relative_form), abs(self.rhs - self.rhs_relative_form))


def holevo_bound_check(e: Ensemble, T: QuantumChannel, E: Povm,
                       tau: float = 1e-9) -> HolevoReport:
    """Compare the classical information after ``E`` and ``T`` with the Holevo quantity.

    ``lhs = H(mu) - sum_i p_i H(mu_i)`` with ``mu_i`` the outcome law of
    ``E`` on ``T(D_i)``; ``rhs`` is the Holevo quantity of the input
    ensemble.  In the equality case, with ``T(D)`` invertible, the measurement
    diagnostics (``lemma1_diagnostics``) are run for every pair ``(T(D_i), T(D))``.
    """
    if T.in_dim != e.dim or T.out_dim != E.dim:
        raise ValueError("ensemble, channel and POVM dimensions are incompatible")
    out = e.map(T)
    mus = [induced_dist(s, E) for s in out.states]
    mu = sum(p * m for p, m in zip(e.weights, mus))
    lhs = shannon_entropy(mu) - sum(p * shannon_entropy(m) for p, m in zip(e.weights, mus))
    rhs = holevo_quantity(e)
    lhs_rel = sum(p * classical_kl(m, mu) for p, m in zip(e.weights, mus) if p > 0)
    rhs_rel = holevo_as_relative_entropy(e)
    gap = rhs - lhs
    TD = out.average()
    applicable = bool(gap <= tau and is_invertible(TD))
    diags = []
    if applicable:
        for s, p in zip(out.states, e.weights):
            if p > 0:
                diags.append(lemma1_diagnostics(s, TD, E, tau=max(tau / p, 1e-9)))
    return HolevoReport(lhs, rhs, gap, lhs_rel, rhs_rel, applicable, diags)
