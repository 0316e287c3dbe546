"""Strong subadditivity, its equality case, the recovery map and Markov states.

Tripartite states live on ``H1 kron H2 kron H3`` with dims ``(d1, d2, d3)``.
Every comparison between operators on different subproducts goes through
:func:`lift`, which embeds an operator on ``H2``, ``H1 H2`` or ``H2 H3`` into
the full space with identities on the missing factors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .divergences import rel_entropy, von_neumann_entropy
from .matcore import (
    SuperOperator,
    dagger,
    embed,
    expm_h,
    hermitian_eig,
    hermitian_part,
    imag_power,
    logm_pd,
    partial_trace,
    powm_psd,
    sqrtm_psd,
)
from .states import check_density, is_invertible, partial_trace_channel, random_density
from .sufficiency import GAP_TOL, RESIDUAL_TOL, DEFAULT_T_SAMPLES, EqualityVerdict

_SLOTS = {"1": [0], "2": [1], "3": [2], "12": [0, 1], "23": [1, 2], "123": [0, 1, 2]}


def lift(op, dims: Sequence[int], on: str) -> np.ndarray:
    """Embed ``op`` acting on subsystems ``on`` (one of '1', '2', '3', '12', '23', '123')."""
    try:
        where = _SLOTS[on]
    except KeyError:
        raise ValueError(f"unknown subsystem label {on!r}") from None
    return embed(op, dims, where)


@dataclass(frozen=True, eq=False)
class TripartiteState:
    dims: tuple
    rho: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 3 or min(dims) < 1:
            raise ValueError("a tripartite state needs three positive dimensions")
        rho = check_density(self.rho)
        if rho.shape[0] != int(np.prod(dims)):
            raise ValueError(f"state dimension {rho.shape[0]} does not match dims {dims}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "rho", rho)

    def marginal(self, on: str) -> np.ndarray:
        return hermitian_part(partial_trace(self.rho, self.dims, _SLOTS[on]))

    def marginals(self):
        """``(rho12, rho23, rho2)``."""
        return self.marginal("12"), self.marginal("23"), self.marginal("2")

    @property
    def invertible(self) -> bool:
        return is_invertible(self.rho)


def marginals(state: TripartiteState):
    return state.marginals()


def product_state(a, b, c) -> TripartiteState:
    a, b, c = (np.asarray(x, dtype=complex) for x in (a, b, c))
    return TripartiteState((a.shape[0], b.shape[0], c.shape[0]), np.kron(np.kron(a, b), c))


def random_tripartite(dims, seed=None) -> TripartiteState:
    return TripartiteState(tuple(dims), random_density(int(np.prod(dims)), seed))


def tracial(d: int) -> np.ndarray:
    return np.eye(d) / d


def ssa_gap(state: TripartiteState) -> float:
    """``S(rho12) + S(rho23) - S(rho123) - S(rho2)``; nonnegative by strong subadditivity."""
    r12, r23, r2 = state.marginals()
    return (von_neumann_entropy(r12) + von_neumann_entropy(r23)
            - von_neumann_entropy(state.rho) - von_neumann_entropy(r2))


def entropy_increments(state: TripartiteState) -> tuple[float, float]:
    """``(S(rho23) - S(rho2), S(rho123) - S(rho12))``; their difference is the SSA gap."""
    r12, r23, r2 = state.marginals()
    return (von_neumann_entropy(r23) - von_neumann_entropy(r2),
            von_neumann_entropy(state.rho) - von_neumann_entropy(r12))


@dataclass
class RSSReport:
    upper: float
    lower: float
    gap: float
    ssa_gap: float
    replay: object = None

    @property
    def identity_residual(self) -> float:
        return abs(self.gap - self.ssa_gap)


def rss_check(state: TripartiteState, replay: bool = True, quad_tol: float = 1e-8) -> RSSReport:
    """``S(rho123, rho12 kron tr3) >= S(rho23, rho2 kron tr3)`` as an instance of monotonicity.

    The partial trace over ``H1`` maps the first pair onto the second.  When
    ``replay`` is set and ``rho123`` is invertible, the resolvent-integral
    replay of the monotonicity argument is attached.
    """
    d1, d2, d3 = state.dims
    r12, r23, r2 = state.marginals()
    ref_in = np.kron(r12, tracial(d3))
    ref_out = np.kron(r2, tracial(d3))
    upper = rel_entropy(state.rho, ref_in)
    lower = rel_entropy(r23, ref_out)
    rep = None
    if replay and state.invertible:
        from .modular import replay_monotonicity

        T = partial_trace_channel(state.dims, [1, 2])
        rep = replay_monotonicity(state.rho, ref_in, T, quad_tol=quad_tol)
    return RSSReport(upper, lower, upper - lower, ssa_gap(state), rep)


def _require(state: TripartiteState, what: str):
    if not state.invertible:
        raise ValueError(f"{what} needs an invertible rho123")


def theorem3_matrices(state: TripartiteState, t: float):
    """Both sides of ``rho123^{it} rho12^{-it} = rho23^{it} rho2^{-it}`` in the full space."""
    _require(state, "the Markov criterion")
    dims = state.dims
    r12, r23, r2 = state.marginals()
    lhs = imag_power(state.rho, t) @ lift(imag_power(r12, -t), dims, "12")
    rhs = lift(imag_power(r23, t), dims, "23") @ lift(imag_power(r2, -t), dims, "2")
    return lhs, rhs


def theorem3_log_residual(state: TripartiteState) -> np.ndarray:
    """``(log rho123 - log rho12) - (log rho23 - log rho2)`` in the full space."""
    _require(state, "the Markov criterion")
    dims = state.dims
    r12, r23, r2 = state.marginals()
    return (logm_pd(state.rho) - lift(logm_pd(r12), dims, "12")
            - lift(logm_pd(r23), dims, "23") + lift(logm_pd(r2), dims, "2"))


def check_theorem3(state: TripartiteState, t_samples=DEFAULT_T_SAMPLES,
                   tau: float = GAP_TOL, tau_res: float = RESIDUAL_TOL) -> EqualityVerdict:
    by_t = {}
    for t in t_samples:
        lhs, rhs = theorem3_matrices(state, t)
        by_t[float(t)] = float(np.linalg.norm(lhs - rhs))
    c2 = float(np.linalg.norm(theorem3_log_residual(state)))
    gap = ssa_gap(state)
    return EqualityVerdict(
        entropy_gap=gap,
        condition1_residual=max(by_t.values()),
        condition2_residual=c2,
        equal=bool(gap <= tau),
        gap_tol=tau,
        residual_tol=tau_res,
        condition1_by_t=by_t,
    )


# -- recovery map ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RecoveryMap:
    """``x -> rho23^{-1/2} Tr_1(rho123^{1/2} x rho123^{1/2}) rho23^{-1/2}``.

    With ``literal_E`` the partial trace is divided by ``d1`` (the normalized
    conditional expectation onto ``B(H2 H3)``).  That variant is neither
    unital nor the identity on ``B(H2)``; it is kept only to exhibit this.
    """

    state: TripartiteState
    literal_E: bool = False
    _sqrt123: np.ndarray = field(init=False, repr=False)
    _isqrt23: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        _require(self.state, "the recovery map")
        r23 = self.state.marginal("23")
        if not is_invertible(r23):
            raise ValueError("the recovery map needs an invertible rho23")
        object.__setattr__(self, "_sqrt123", sqrtm_psd(self.state.rho))
        object.__setattr__(self, "_isqrt23", powm_psd(r23, -0.5))

    @property
    def _scale(self) -> float:
        return 1.0 / self.state.dims[0] if self.literal_E else 1.0

    def __call__(self, x) -> np.ndarray:
        s = self._sqrt123
        inner = partial_trace(s @ np.asarray(x) @ s, self.state.dims, [1, 2]) * self._scale
        return self._isqrt23 @ inner @ self._isqrt23

    def dual(self, y) -> np.ndarray:
        """Hilbert-Schmidt adjoint: ``y -> rho123^{1/2} (I1 kron rho23^{-1/2} y rho23^{-1/2}) rho123^{1/2}``."""
        s = self._sqrt123
        mid = self._isqrt23 @ np.asarray(y) @ self._isqrt23
        return s @ lift(mid, self.state.dims, "23") @ s * self._scale

    def superop(self) -> SuperOperator:
        return SuperOperator.from_map(self, int(np.prod(self.state.dims)))

    def choi_min_eigenvalue(self) -> float:
        n = int(np.prod(self.state.dims))
        m = int(np.prod(self.state.dims[1:]))
        C = np.zeros((n * m, n * m), dtype=complex)
        for i in range(n):
            for j in range(n):
                e = np.zeros((n, n), dtype=complex)
                e[i, j] = 1.0
                C[i * m:(i + 1) * m, j * m:(j + 1) * m] = self(e)
        return float(hermitian_eig(hermitian_part(C), rtol=1e-8).eigenvalues[0])

    def unital_residual(self) -> float:
        n = int(np.prod(self.state.dims))
        m = int(np.prod(self.state.dims[1:]))
        return float(np.linalg.norm(self(np.eye(n)) - np.eye(m)))

    def restriction_residual(self, on: str = "2") -> float:
        """Largest deviation of gamma from the identity on ``B(H_on)``, over matrix units.

        For ``on="2"`` this is ``max_y ||gamma(I1 kron y kron I3) - y kron I3||``.
        Markov states in the order 1-2-3 are fixed on ``B(H3)`` but in general
        not on ``B(H2)``: a classical Markov chain maps the off-diagonal unit
        ``|a><b|`` of ``B(H2)`` to ``F(a, b) |a><b|`` with ``F`` the fidelity of
        the conditional laws of ``x1`` given ``x2 = a`` and ``x2 = b``.
        """
        if on not in ("2", "3"):
            raise ValueError("restriction is defined on subsystem '2' or '3'")
        d1, d2, d3 = self.state.dims
        d = d2 if on == "2" else d3
        worst = 0.0
        for i in range(d):
            for j in range(d):
                y = np.zeros((d, d), dtype=complex)
                y[i, j] = 1.0
                out = self(lift(y, self.state.dims, on))
                target = np.kron(y, np.eye(d3)) if on == "2" else np.kron(np.eye(d2), y)
                worst = max(worst, float(np.linalg.norm(out - target)))
        return worst

    def dual_residual(self) -> float:
        """``||gamma*(rho23) - rho123||``."""
        return float(np.linalg.norm(self.dual(self.state.marginal("23")) - self.state.rho))

    def dual_marginal_residual(self) -> float:
        """``||gamma*(rho2 kron I3) - rho12 kron I3||``."""
        d3 = self.state.dims[2]
        r12, _, r2 = self.state.marginals()
        return float(np.linalg.norm(self.dual(np.kron(r2, np.eye(d3))) - np.kron(r12, np.eye(d3))))

    def state_preservation_residual(self, x) -> float:
        """``|Tr(rho123 (I1 kron gamma(x))) - Tr(rho123 x)|``."""
        g = lift(self(x), self.state.dims, "23")
        return float(abs(np.trace(self.state.rho @ g) - np.trace(self.state.rho @ np.asarray(x))))


def petz_recovery(state: TripartiteState, literal_E: bool = False) -> RecoveryMap:
    return RecoveryMap(state, literal_E)


# -- Markov state constructors ----------------------------------------------

def markov_from_classical(initial, P12, P23) -> TripartiteState:
    """Diagonal state with entries ``p(x1) P12[x1, x2] P23[x2, x3]``."""
    p = np.asarray(initial, dtype=float)
    A = np.asarray(P12, dtype=float)
    B = np.asarray(P23, dtype=float)
    if p.ndim != 1 or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
        raise ValueError("initial distribution must be a probability vector")
    for name, P in (("P12", A), ("P23", B)):
        if P.ndim != 2 or np.any(P < 0) or np.max(np.abs(P.sum(axis=1) - 1.0)) > 1e-12:
            raise ValueError(f"{name} must be row-stochastic")
    if A.shape[0] != p.size or B.shape[0] != A.shape[1]:
        raise ValueError("stochastic matrix shapes do not chain")
    joint = p[:, None, None] * A[:, :, None] * B[None, :, :]
    dims = joint.shape
    return TripartiteState(dims, np.diag(joint.reshape(-1)).astype(complex))


def random_markov_classical(dims, seed=None) -> TripartiteState:
    rng = np.random.default_rng(seed)
    d1, d2, d3 = dims
    p = rng.dirichlet(np.ones(d1))
    A = rng.dirichlet(np.ones(d2), size=d1)
    B = rng.dirichlet(np.ones(d3), size=d2)
    return markov_from_classical(p, A, B)


def _is_diagonal(M, tol=1e-12) -> bool:
    M = np.asarray(M)
    return float(np.max(np.abs(M - np.diag(np.diag(M))), initial=0.0)) <= tol * max(1.0, np.max(np.abs(M)))


def markov_from_hamiltonians(H1, H2, H3, H12, H23, basis=None,
                             tol: float = 1e-8) -> TripartiteState:
    """Markov state with ``log rho123 = log rho12 + log rho23 - log rho2`` (embedded).

    Here ``log rho12 = H1 + H2 + H12``, ``log rho23 = H2 + H3 + H23`` and
    ``log rho2 = H2``.  All Hamiltonians must be diagonal in the product basis,
    or in the rotated product basis ``basis = (U1, U2, U3)`` (columns are the
    basis vectors) when one is supplied.  The marginals of the resulting
    state are checked against the normalized ``exp(H1 + H2 + H12)``,
    ``exp(H2 + H3 + H23)`` and ``exp(H2)``; a mismatch beyond ``tol`` raises.
    """
    H1, H2, H3, H12, H23 = (np.asarray(h, dtype=complex) for h in (H1, H2, H3, H12, H23))
    dims = (H1.shape[0], H2.shape[0], H3.shape[0])
    d1, d2, d3 = dims
    if H12.shape != (d1 * d2, d1 * d2) or H23.shape != (d2 * d3, d2 * d3):
        raise ValueError("interaction terms have the wrong shape")
    if basis is not None:
        U1, U2, U3 = (np.asarray(u, dtype=complex) for u in basis)
        U12 = np.kron(U1, U2)
        U23 = np.kron(U2, U3)
        rot = [(H1, U1), (H2, U2), (H3, U3), (H12, U12), (H23, U23)]
        H1, H2, H3, H12, H23 = (dagger(U) @ H @ U for H, U in rot)
    for name, H in (("H1", H1), ("H2", H2), ("H3", H3), ("H12", H12), ("H23", H23)):
        if not _is_diagonal(H):
            raise ValueError(f"{name} is not diagonal in the product basis; the "
                             "Hamiltonians must form a commuting (classical) family")
    log12 = embed(H1, (d1, d2), [0]) + embed(H2, (d1, d2), [1]) + H12
    log23 = embed(H2, (d2, d3), [0]) + embed(H3, (d2, d3), [1]) + H23
    log123 = lift(log12, dims, "12") + lift(log23, dims, "23") - lift(H2, dims, "2")
    rho = expm_h(hermitian_part(log123))
    rho = rho / np.trace(rho).real
    if basis is not None:
        U = np.kron(np.kron(U1, U2), U3)
        rho = hermitian_part(U @ rho @ dagger(U))
    state = TripartiteState(dims, rho)

    targets = {"12": expm_h(hermitian_part(log12)), "23": expm_h(hermitian_part(log23)),
               "2": expm_h(hermitian_part(H2))}
    if basis is not None:
        targets = {"12": U12 @ targets["12"] @ dagger(U12),
                   "23": U23 @ targets["23"] @ dagger(U23),
                   "2": U2 @ targets["2"] @ dagger(U2)}
    for on, target in targets.items():
        target = target / np.trace(target).real
        err = float(np.linalg.norm(state.marginal(on) - target))
        if err > tol:
            raise ValueError(
                f"marginal rho{on} disagrees with its Hamiltonian by {err:.3e}: the "
                "inputs do not describe consistent marginals"
            )
    return state


def random_markov_hamiltonians(dims, seed=None, scale: float = 1.0):
    """Random diagonal Hamiltonians satisfying the marginal consistency conditions.

    The interaction terms are shifted so that ``sum_x1 exp(H1 + H12)`` and
    ``sum_x3 exp(H3 + H23)`` do not depend on ``x2``.
    """
    rng = np.random.default_rng(seed)
    d1, d2, d3 = dims
    h1 = scale * rng.standard_normal(d1)
    h2 = scale * rng.standard_normal(d2)
    h3 = scale * rng.standard_normal(d3)
    h12 = scale * rng.standard_normal((d1, d2))
    h23 = scale * rng.standard_normal((d2, d3))
    h12 = h12 - np.log(np.exp(h1[:, None] + h12).sum(axis=0))[None, :]
    h23 = h23 - np.log(np.exp(h3[None, :] + h23).sum(axis=1))[:, None]
    return (np.diag(h1), np.diag(h2), np.diag(h3),
            np.diag(h12.reshape(-1)), np.diag(h23.reshape(-1)))
