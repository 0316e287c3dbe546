"""Equality in the monotonicity of relative entropy (sufficiency of a channel).

For invertible ``D1, D2, T(D1), T(D2)`` equality
``S(D1, D2) = S(T(D1), T(D2))`` holds exactly when

  (1) ``T*(T(D1)^{it} T(D2)^{-it}) = D1^{it} D2^{-it}`` for all real t, or
  (2) ``T*(log T(D1) - log T(D2)) = log D1 - log D2``.

Condition (1) is sampled at finitely many ``t``; condition (2) is its
derivative at ``t = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .divergences import alpha_divergence, rel_entropy
from .matcore import hermitian_part, imag_power, logm_pd
from .states import QuantumChannel, is_invertible

DEFAULT_T_SAMPLES = (-2.7, -1.0, -0.3, 0.3, 1.0, 2.7)
GAP_TOL = 1e-8
RESIDUAL_TOL = 1e-6


class HypothesisError(ValueError):
    pass


@dataclass
class EqualityVerdict:
    entropy_gap: float
    condition1_residual: float
    condition2_residual: float
    equal: bool
    gap_tol: float = GAP_TOL
    residual_tol: float = RESIDUAL_TOL
    condition1_by_t: dict = field(default_factory=dict)

    @property
    def conditions_hold(self) -> bool:
        return max(self.condition1_residual, self.condition2_residual) <= self.residual_tol

    @property
    def consistent(self) -> bool:
        """Whether the entropy verdict agrees with the condition residuals."""
        return self.equal == self.conditions_hold


def _images(D1, D2, T):
    D1 = np.asarray(D1, dtype=complex)
    D2 = np.asarray(D2, dtype=complex)
    TD1 = hermitian_part(T(D1))
    TD2 = hermitian_part(T(D2))
    for name, M in (("D1", D1), ("D2", D2), ("T(D1)", TD1), ("T(D2)", TD2)):
        if not is_invertible(M):
            raise HypothesisError(
                f"{name} is not invertible; the equality criterion needs invertible "
                "density matrices D1, D2, T(D1), T(D2)"
            )
    return D1, D2, TD1, TD2


def condition1_matrix(D1, D2, T: QuantumChannel, t: float) -> np.ndarray:
    """``T*(T(D1)^{it} T(D2)^{-it}) - D1^{it} D2^{-it}``."""
    D1, D2, TD1, TD2 = _images(D1, D2, T)
    u = imag_power(TD1, t) @ imag_power(TD2, -t)
    w = imag_power(D1, t) @ imag_power(D2, -t)
    return T.adjoint(u) - w


def condition1_swapped_matrix(D1, D2, T: QuantumChannel, t: float) -> np.ndarray:
    """The same intertwining relation with the pair written in the opposite order.

    ``T*(T(D2)^{it} T(D1)^{-it}) - D2^{it} D1^{-it}``; this is the adjoint of
    :func:`condition1_matrix` at the same ``t``.
    """
    D1, D2, TD1, TD2 = _images(D1, D2, T)
    u = imag_power(TD2, t) @ imag_power(TD1, -t)
    w = imag_power(D2, t) @ imag_power(D1, -t)
    return T.adjoint(u) - w


def condition2_matrix(D1, D2, T: QuantumChannel) -> np.ndarray:
    """``T*(log T(D1) - log T(D2)) - (log D1 - log D2)``."""
    D1, D2, TD1, TD2 = _images(D1, D2, T)
    return T.adjoint(logm_pd(TD1) - logm_pd(TD2)) - (logm_pd(D1) - logm_pd(D2))


def _verdict(gap, D1, D2, T, t_samples, tau, tau_res) -> EqualityVerdict:
    by_t = {float(t): float(np.linalg.norm(condition1_matrix(D1, D2, T, t)))
            for t in t_samples}
    c2 = float(np.linalg.norm(condition2_matrix(D1, D2, T)))
    return EqualityVerdict(
        entropy_gap=float(gap),
        condition1_residual=max(by_t.values()),
        condition2_residual=c2,
        equal=bool(gap <= tau),
        gap_tol=tau,
        residual_tol=tau_res,
        condition1_by_t=by_t,
    )


def check_theorem2(D1, D2, T: QuantumChannel, t_samples=DEFAULT_T_SAMPLES,
                   tau: float = GAP_TOL, tau_res: float = RESIDUAL_TOL) -> EqualityVerdict:
    D1, D2, TD1, TD2 = _images(D1, D2, T)
    gap = rel_entropy(D1, D2) - rel_entropy(TD1, TD2)
    return _verdict(gap, D1, D2, T, t_samples, tau, tau_res)


def check_alpha_equality(D1, D2, T: QuantumChannel, alpha: float,
                         t_samples=DEFAULT_T_SAMPLES, tau: float = GAP_TOL,
                         tau_res: float = RESIDUAL_TOL) -> EqualityVerdict:
    """As :func:`check_theorem2` with the gap measured by the alpha-divergence."""
    D1, D2, TD1, TD2 = _images(D1, D2, T)
    gap = alpha_divergence(D1, D2, alpha) - alpha_divergence(TD1, TD2, alpha)
    return _verdict(gap, D1, D2, T, t_samples, tau, tau_res)


@dataclass
class CommutationReport:
    preconditions_met: bool
    output_commutator: float
    equality: EqualityVerdict
    commutator: float
    cocycle_residual: float
    commute: bool | None


def corollary_commutation(D1, D2, T: QuantumChannel, tau: float = 1e-9,
                          cocycle_pairs=((0.4, 1.1), (-0.7, 0.25))) -> CommutationReport:
    """If ``T(D1), T(D2)`` commute and equality holds, ``D1`` and ``D2`` commute.

    The cocycle ``w_{t+s} = w_t w_s`` for ``w_t = D1^{it} D2^{-it}`` is
    checked at the given ``(t, s)`` pairs.  Unmet preconditions are reported
    through ``preconditions_met`` and leave ``commute`` as ``None``.
    """
    D1, D2, TD1, TD2 = _images(D1, D2, T)
    out_comm = float(np.linalg.norm(TD1 @ TD2 - TD2 @ TD1))
    verdict = check_theorem2(D1, D2, T)
    comm = float(np.linalg.norm(D1 @ D2 - D2 @ D1))

    def w(t):
        return imag_power(D1, t) @ imag_power(D2, -t)

    cocycle = max(float(np.linalg.norm(w(t + s) - w(t) @ w(s))) for t, s in cocycle_pairs)
    ok = out_comm <= tau and verdict.equal
    return CommutationReport(
        preconditions_met=ok,
        output_commutator=out_comm,
        equality=verdict,
        commutator=comm,
        cocycle_residual=cocycle,
        commute=(comm <= tau) if ok else None,
    )
