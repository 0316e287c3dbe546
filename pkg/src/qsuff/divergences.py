"""Entropies and divergences, in nats.

An infinite relative entropy is returned as ``math.inf``, and only after an
explicit support test; it never comes from evaluating ``log(0)``.
"""

from __future__ import annotations

import math

import numpy as np

from .matcore import hermitian_eig, support_threshold
from .states import Ensemble

INF = math.inf


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def von_neumann_entropy(rho) -> float:
    w = hermitian_eig(rho).eigenvalues
    w = w[w > support_threshold(w)]
    return float(-np.sum(w * np.log(w)))


def rel_entropy(D1, D2) -> float:
    """``Tr D1 (log D1 - log D2)``, or ``inf`` unless supp D1 is inside supp D2."""
    D1 = np.asarray(D1)
    D2 = np.asarray(D2)
    if D1.shape != D2.shape:
        raise ValueError(f"dimension mismatch {D1.shape} vs {D2.shape}")
    s1 = hermitian_eig(D1)
    s2 = hermitian_eig(D2)
    p, U = s1.eigenvalues, s1.eigenvectors
    q, V = s2.eigenvalues, s2.eigenvectors
    p_on = p > support_threshold(p)
    q_on = q > support_threshold(q)
    # overlaps[i, j] = |<u_i|v_j>|^2
    overlaps = np.abs(U.conj().T @ V) ** 2
    # weight of D1 on ker D2
    leak = float(p[p_on] @ overlaps[p_on][:, ~q_on].sum(axis=1))
    if leak > 1e-12 * max(1.0, float(p[-1])):
        return INF
    pp = p[p_on]
    cross = overlaps[p_on][:, q_on] @ np.log(q[q_on])
    return float(pp @ np.log(pp) - pp @ cross)


def classical_kl(p, q) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("distributions have different lengths")
    on = p > 1e-15
    if np.any(q[on] <= 1e-15):
        return INF
    return float(np.sum(p[on] * (np.log(p[on]) - np.log(q[on]))))


def _frac_power_trace(D1, D2, a: float, b: float) -> float:
    """``Tr D1^a D2^b`` for ``a, b > 0`` with zero eigenvalues mapped to zero."""
    s1 = hermitian_eig(D1)
    s2 = hermitian_eig(D2)
    p = np.clip(s1.eigenvalues, 0.0, None)
    q = np.clip(s2.eigenvalues, 0.0, None)
    p = np.where(p > support_threshold(p), p, 0.0)
    q = np.where(q > support_threshold(q), q, 0.0)
    overlaps = np.abs(s1.eigenvectors.conj().T @ s2.eigenvectors) ** 2
    return float((p ** a) @ overlaps @ (q ** b))


def alpha_divergence(D1, D2, alpha: float) -> float:
    """``4 / (1 - alpha^2) Tr(D1 - D1^((1+alpha)/2) D2^((1-alpha)/2))`` for |alpha| < 1."""
    if not -1.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly between -1 and 1")
    D1 = np.asarray(D1)
    D2 = np.asarray(D2)
    if D1.shape != D2.shape:
        raise ValueError("dimension mismatch")
    tr = np.trace(D1).real
    f = _frac_power_trace(D1, D2, (1.0 + alpha) / 2.0, (1.0 - alpha) / 2.0)
    return 4.0 / (1.0 - alpha ** 2) * (tr - f)


def alpha_limit(D1, D2, h: float = 1e-3) -> float:
    """Estimate of the alpha -> 1 limit by two-point Richardson extrapolation."""
    a = alpha_divergence(D1, D2, 1.0 - h)
    b = alpha_divergence(D1, D2, 1.0 - h / 2)
    return 2.0 * b - a


def holevo_quantity(e: Ensemble) -> float:
    avg = e.average()
    return von_neumann_entropy(avg) - sum(
        p * von_neumann_entropy(s) for p, s in zip(e.weights, e.states)
    )


def holevo_as_relative_entropy(e: Ensemble) -> float:
    avg = e.average()
    return sum(p * rel_entropy(s, avg) for p, s in zip(e.weights, e.states) if p > 0)
