"""Density matrices, Kraus-form channels and a few standard channels."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

from .matcore import (
    SuperOperator,
    dagger,
    hermitian_eig,
    hermitian_part,
    is_hermitian,
    powm_psd,
    support_threshold,
)

PSD_TOL = 1e-10
TRACE_TOL = 1e-10


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def check_density(rho, tol: float = TRACE_TOL) -> np.ndarray:
    """Return ``rho`` as a complex array after validating it as a density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if not is_hermitian(rho):
        raise ValueError("density matrix is not Hermitian")
    w = hermitian_eig(rho).eigenvalues
    if w[0] < -1e-11:
        raise ValueError(f"density matrix has negative eigenvalue {w[0]:.3e}")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise ValueError(f"density matrix has trace {tr:.12g}")
    return rho


def is_density(rho) -> bool:
    try:
        check_density(rho)
    except ValueError:
        return False
    return True


def is_invertible(rho) -> bool:
    w = hermitian_eig(rho).eigenvalues
    return bool(w[0] > support_threshold(w))


def regularize(rho, eps: float) -> np.ndarray:
    """Mix with the maximally mixed state: ``(1 - eps) rho + eps I / n``."""
    n = rho.shape[0]
    return (1.0 - eps) * np.asarray(rho) + eps * np.eye(n) / n


def random_density(n: int, seed=None, rank: int | None = None) -> np.ndarray:
    """Random density matrix ``G G* / Tr G G*`` from a complex Ginibre matrix."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = _rng(seed)
    r = n if rank is None else rank
    G = rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r))
    rho = G @ dagger(G)
    rho = hermitian_part(rho / np.trace(rho).real)
    return rho


def random_unitary(n: int, seed=None) -> np.ndarray:
    rng = _rng(seed)
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


@dataclass(frozen=True)
class ChannelReport:
    trace_preserving: bool
    completely_positive: bool
    tp_residual: float
    choi_min_eigenvalue: float

    @property
    def valid(self) -> bool:
        return self.trace_preserving and self.completely_positive


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """Completely positive map ``rho -> sum_k K rho K*`` given by Kraus operators.

    Each Kraus operator is an ``out_dim x in_dim`` matrix.
    """

    kraus: tuple
    in_dim: int = field(default=0)
    out_dim: int = field(default=0)

    def __post_init__(self):
        ks = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        if not ks:
            raise ValueError("a channel needs at least one Kraus operator")
        shape = ks[0].shape
        if len(shape) != 2 or any(k.shape != shape for k in ks):
            raise ValueError("Kraus operators must be matrices of a common shape")
        if self.in_dim and self.in_dim != shape[1] or self.out_dim and self.out_dim != shape[0]:
            raise ValueError("Kraus shape disagrees with the stated dimensions")
        object.__setattr__(self, "kraus", ks)
        object.__setattr__(self, "out_dim", shape[0])
        object.__setattr__(self, "in_dim", shape[1])

    def apply(self, rho) -> np.ndarray:
        rho = np.asarray(rho)
        if rho.shape != (self.in_dim, self.in_dim):
            raise ValueError(f"input shape {rho.shape} does not match in_dim {self.in_dim}")
        return sum(K @ rho @ dagger(K) for K in self.kraus)

    __call__ = apply

    def adjoint(self, x) -> np.ndarray:
        """Heisenberg-picture map ``x -> sum_k K* x K``."""
        x = np.asarray(x)
        if x.shape != (self.out_dim, self.out_dim):
            raise ValueError(f"input shape {x.shape} does not match out_dim {self.out_dim}")
        return sum(dagger(K) @ x @ K for K in self.kraus)

    def adjoint_channel(self) -> "QuantumChannel":
        """The adjoint as a Kraus family (unital, generally not trace preserving)."""
        return QuantumChannel(tuple(dagger(K) for K in self.kraus))

    def then(self, other: "QuantumChannel") -> "QuantumChannel":
        """``other`` applied after ``self``."""
        if other.in_dim != self.out_dim:
            raise ValueError("dimension mismatch in channel composition")
        return QuantumChannel(tuple(B @ A for B in other.kraus for A in self.kraus))

    def superop(self) -> SuperOperator:
        m = sum(np.kron(K, np.conj(K)) for K in self.kraus)
        return SuperOperator(self.in_dim, self.out_dim, m)

    def adjoint_superop(self) -> SuperOperator:
        return self.superop().adjoint()

    def choi(self) -> np.ndarray:
        """``sum_ij |i><j| kron T(|i><j|)`` built from matrix units."""
        n = self.in_dim
        blocks = np.zeros((n * self.out_dim, n * self.out_dim), dtype=complex)
        m = self.out_dim
        for i in range(n):
            for j in range(n):
                e = np.zeros((n, n), dtype=complex)
                e[i, j] = 1.0
                blocks[i * m:(i + 1) * m, j * m:(j + 1) * m] = self.apply(e)
        return blocks


def channel_apply(T: QuantumChannel, rho) -> np.ndarray:
    return T.apply(rho)


def channel_adjoint_apply(T: QuantumChannel, x) -> np.ndarray:
    return T.adjoint(x)


def channel_validate(T: QuantumChannel, tol: float = PSD_TOL) -> ChannelReport:
    S = sum(dagger(K) @ K for K in T.kraus)
    tp_resid = float(np.linalg.norm(S - np.eye(T.in_dim)))
    C = T.choi()
    w = hermitian_eig(hermitian_part(C)).eigenvalues
    scale = max(1.0, float(np.linalg.norm(C, 2)))
    return ChannelReport(
        trace_preserving=tp_resid <= tol,
        completely_positive=bool(w[0] >= -tol * scale),
        tp_residual=tp_resid,
        choi_min_eigenvalue=float(w[0]),
    )


@dataclass(frozen=True)
class MultiplicativeDomainReport:
    in_domain: bool
    left_residual: float
    right_residual: float
    product_residual: float | None


def multiplicative_domain_test(T: QuantumChannel, X, tol: float = 1e-9,
                               seed=0) -> MultiplicativeDomainReport:
    """Test whether ``X`` lies in the multiplicative domain of the unital map ``T*``.

    Both ``T*(X* X) = T*(X*) T*(X)`` and ``T*(X X*) = T*(X) T*(X*)`` are
    required.  When they hold, ``T*(X Y) = T*(X) T*(Y)`` is spot-checked on a
    random ``Y``.
    """
    X = np.asarray(X, dtype=complex)
    phi = T.adjoint
    unit_resid = np.linalg.norm(phi(np.eye(T.out_dim)) - np.eye(T.in_dim))
    if unit_resid > tol:
        raise ValueError("the adjoint map is not unital")
    Xs = dagger(X)
    left = float(np.linalg.norm(phi(Xs @ X) - phi(Xs) @ phi(X)))
    right = float(np.linalg.norm(phi(X @ Xs) - phi(X) @ phi(Xs)))
    ok = left <= tol and right <= tol
    prod_resid = None
    if ok:
        rng = _rng(seed)
        n = T.out_dim
        Y = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        prod_resid = float(np.linalg.norm(phi(X @ Y) - phi(X) @ phi(Y)))
    return MultiplicativeDomainReport(ok, left, right, prod_resid)


# -- constructors ----------------------------------------------------------

def identity_channel(n: int) -> QuantumChannel:
    return QuantumChannel((np.eye(n),))


def unitary_channel(U) -> QuantumChannel:
    U = np.asarray(U, dtype=complex)
    if not np.allclose(dagger(U) @ U, np.eye(U.shape[0]), atol=1e-10):
        raise ValueError("matrix is not unitary")
    return QuantumChannel((U,))


def depolarizing(n: int, lam: float) -> QuantumChannel:
    """``rho -> (1 - lam) rho + lam Tr(rho) I / n``."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError("depolarizing strength must lie in [0, 1]")
    ks = []
    if lam < 1.0:
        ks.append(np.sqrt(1.0 - lam) * np.eye(n))
    if lam > 0.0:
        for i, j in product(range(n), repeat=2):
            K = np.zeros((n, n))
            K[i, j] = np.sqrt(lam / n)
            ks.append(K)
    return QuantumChannel(tuple(ks))


def partial_trace_channel(dims: Sequence[int], keep: Sequence[int]) -> QuantumChannel:
    """Partial trace over the subsystems not in ``keep`` (0-based) as a channel."""
    dims = [int(d) for d in dims]
    keep = sorted(set(int(k) for k in keep))
    if not keep or keep[0] < 0 or keep[-1] >= len(dims):
        raise ValueError("invalid subsystem selection")
    traced = [i for i in range(len(dims)) if i not in keep]
    ks = []
    for idx in product(*(range(dims[i]) for i in traced)):
        pick = dict(zip(traced, idx))
        K = np.ones((1, 1))
        for i, d in enumerate(dims):
            if i in pick:
                bra = np.zeros((1, d))
                bra[0, pick[i]] = 1.0
                K = np.kron(K, bra)
            else:
                K = np.kron(K, np.eye(d))
        ks.append(K)
    return QuantumChannel(tuple(ks))


def pinching(n: int) -> QuantumChannel:
    """Deletes off-diagonal entries in the computational basis."""
    ks = []
    for i in range(n):
        P = np.zeros((n, n))
        P[i, i] = 1.0
        ks.append(P)
    return QuantumChannel(tuple(ks))


def povm_channel(effects) -> QuantumChannel:
    """Measurement channel ``D -> Diag(Tr D E_1, ..., Tr D E_m)``."""
    effects = [np.asarray(E, dtype=complex) for E in effects]
    n = effects[0].shape[0]
    m = len(effects)
    ks = []
    for j, E in enumerate(effects):
        spec = hermitian_eig(E)
        for lam, v in zip(spec.eigenvalues, spec.eigenvectors.T):
            if lam <= 1e-14:
                continue
            K = np.zeros((m, n), dtype=complex)
            K[j, :] = np.sqrt(lam) * np.conj(v)
            ks.append(K)
    if not ks:
        raise ValueError("POVM has no nonzero effect")
    T = QuantumChannel(tuple(ks))
    if not channel_validate(T).trace_preserving:
        raise ValueError("effects do not sum to the identity")
    return T


def random_channel(n_in: int, n_out: int, k: int, seed=None) -> QuantumChannel:
    """Random channel with ``k`` Kraus operators.

    Gaussian matrices ``G_i`` are right-multiplied by ``(sum G_i* G_i)^{-1/2}``,
    which makes the family trace preserving.
    """
    if min(n_in, n_out, k) < 1:
        raise ValueError("dimensions and Kraus count must be positive")
    if n_out * k < n_in:
        raise ValueError(f"no trace-preserving channel from dimension {n_in} to {n_out} "
                         f"has only {k} Kraus operators (need n_out * k >= n_in)")
    rng = _rng(seed)
    Gs = [rng.standard_normal((n_out, n_in)) + 1j * rng.standard_normal((n_out, n_in))
          for _ in range(k)]
    S = sum(dagger(G) @ G for G in Gs)
    R = powm_psd(S, -0.5)
    return QuantumChannel(tuple(G @ R for G in Gs))


@dataclass(frozen=True, eq=False)
class Ensemble:
    weights: np.ndarray
    states: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or len(w) != len(self.states) or len(w) == 0:
            raise ValueError("weights and states must be nonempty and of equal length")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must form a probability vector")
        states = tuple(check_density(s) for s in self.states)
        if len({s.shape for s in states}) != 1:
            raise ValueError("ensemble states must share one dimension")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "states", states)

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    def average(self) -> np.ndarray:
        return sum(p * s for p, s in zip(self.weights, self.states))

    def map(self, T: QuantumChannel) -> "Ensemble":
        return Ensemble(self.weights, tuple(hermitian_part(T(s)) for s in self.states))
