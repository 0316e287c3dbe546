"""Relative modular operators and a numerical replay of the monotonicity argument.

For invertible densities ``D1, D2`` on ``H`` the relative modular operator is
the superoperator ``a -> D2 a D1^{-1}`` on ``B(H)``.  With ``xi = D1^{1/2}``
the relative entropy is ``-<xi, log(Delta) xi>`` and, through the resolvent
identity for the logarithm,

    S(D1, D2) = int_0^inf <xi, (Delta + t)^{-1} xi> - (1 + t)^{-1} dt.

For a channel ``T`` the contraction ``V: B(K) -> B(H)`` is fixed by
``V(x T(D1)^{1/2}) = T*(x) D1^{1/2}``.  From ``V* Delta V <= Delta_0`` and
the Jensen inequality for the operator convex ``y -> (y + t)^{-1}`` one gets

    <xi, (Delta + t)^{-1} xi> >= <xi0, (Delta_0 + t)^{-1} xi0>

for ``xi0 = T(D1)^{1/2}`` and ``xi = V xi0 = D1^{1/2}``, and integrating in
``t`` gives monotonicity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .matcore import (
    SuperOperator,
    dagger,
    hermitian_eig,
    hermitian_part,
    left_mult,
    logm_pd,
    powm_psd,
    right_mult,
    sqrtm_psd,
    vec,
)
from .states import QuantumChannel, is_invertible

DEFAULT_T_GRID = np.logspace(-4, 4, 40)


class NotInvertibleError(ValueError):
    pass


def _require_invertible(**mats):
    for name, M in mats.items():
        if not is_invertible(M):
            raise NotInvertibleError(f"{name} must be invertible")


@dataclass(frozen=True, eq=False)
class ModularPair:
    D1: np.ndarray
    D2: np.ndarray
    delta: SuperOperator

    @property
    def dim(self) -> int:
        return self.D1.shape[0]

    def hermitian_matrix(self) -> np.ndarray:
        return hermitian_part(self.delta.matrix)

    def spectrum(self) -> np.ndarray:
        return hermitian_eig(self.hermitian_matrix()).eigenvalues

    def log_delta(self) -> SuperOperator:
        """``log L + log R`` with ``L a = D2 a`` and ``R a = a D1^{-1}``."""
        logL = left_mult(logm_pd(self.D2))
        logR = right_mult(-logm_pd(self.D1))
        return SuperOperator(self.dim, self.dim, logL.matrix + logR.matrix)

    def spectral_weights(self, xi) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues of Delta and the weights ``|<e_k, xi>|^2`` of ``xi`` on them."""
        spec = hermitian_eig(self.hermitian_matrix())
        w = np.abs(dagger(spec.eigenvectors) @ vec(xi)) ** 2
        return spec.eigenvalues, w

    def resolvent_form(self, xi, t: float) -> float:
        """``<xi, (Delta + t)^{-1} xi>`` by a linear solve."""
        n2 = self.dim ** 2
        y = np.linalg.solve(self.delta.matrix + t * np.eye(n2), vec(xi))
        return float(np.vdot(vec(xi), y).real)


def relative_modular(D1, D2) -> ModularPair:
    D1 = np.asarray(D1, dtype=complex)
    D2 = np.asarray(D2, dtype=complex)
    if D1.shape != D2.shape:
        raise ValueError("dimension mismatch")
    _require_invertible(D1=D1, D2=D2)
    delta = left_mult(D2) @ right_mult(powm_psd(D1, -1.0))
    return ModularPair(D1, D2, delta)


def modular_relative_entropy(D1, D2) -> float:
    """``-<D1^{1/2}, log(Delta) D1^{1/2}>`` with ``log Delta = log L + log R``."""
    pair = relative_modular(D1, D2)
    xi = sqrtm_psd(pair.D1)
    return -float(np.vdot(vec(xi), pair.log_delta().matrix @ vec(xi)).real)


@dataclass(frozen=True, eq=False)
class ContractionV:
    source_dim: int
    target_dim: int
    V: SuperOperator
    norm: float


def build_V(T: QuantumChannel, D1) -> ContractionV:
    """The contraction ``x T(D1)^{1/2} -> T*(x) D1^{1/2}`` from ``B(K)`` to ``B(H)``."""
    D1 = np.asarray(D1, dtype=complex)
    TD1 = hermitian_part(T(D1))
    _require_invertible(D1=D1, **{"T(D1)": TD1})
    V = right_mult(sqrtm_psd(D1)) @ T.adjoint_superop() @ right_mult(powm_psd(TD1, -0.5))
    norm = float(np.linalg.norm(V.matrix, 2))
    return ContractionV(T.out_dim, T.in_dim, V, norm)


@dataclass
class OperatorChainReport:
    """Margins (smallest eigenvalues) of the operator inequalities on ``B(K)``.

    ``literal_margins`` test ``V* (Delta + t)^{-1} V - (Delta_0 + t)^{-1} >= 0``
    as an operator inequality, which fails for contractions that are not
    isometries.  ``corrected_margins`` add the Jensen term
    ``(I - V* V) / t`` that makes it valid for every contraction;
    ``form_margins`` evaluate the uncorrected difference on
    ``xi0 = T(D1)^{1/2}``, where the correction vanishes because ``V`` is
    isometric on ``xi0``.  ``holds`` is decided by the corrected and form
    margins together with ``V* Delta V <= Delta_0`` and ``||V|| <= 1``.
    """

    t_grid: np.ndarray
    # Delta_0 - V* Delta V
    contraction_margin: float
    # (V* Delta V + t)^{-1} - (Delta_0 + t)^{-1}
    monotone_margins: np.ndarray
    # V* (Delta + t)^{-1} V + (I - V*V)/t - (V* Delta V + t)^{-1}
    jensen_margins: np.ndarray
    # V* (Delta + t)^{-1} V + (I - V*V)/t - (Delta_0 + t)^{-1}
    corrected_margins: np.ndarray
    # V* (Delta + t)^{-1} V - (Delta_0 + t)^{-1}
    literal_margins: np.ndarray
    form_margins: np.ndarray
    v_norm: float
    isometry_defect: float
    tol: float = 1e-9

    @property
    def worst_margin(self) -> float:
        return float(min(self.contraction_margin, self.monotone_margins.min(),
                         self.jensen_margins.min(), self.corrected_margins.min(),
                         self.form_margins.min()))

    @property
    def holds(self) -> bool:
        return self.worst_margin >= -self.tol and self.v_norm <= 1 + self.tol


def _min_eig(M) -> float:
    return float(hermitian_eig(hermitian_part(M), rtol=1e-8).eigenvalues[0])


def check_operator_chain(D1, D2, T: QuantumChannel, t_grid=None,
                         tol: float = 1e-9) -> OperatorChainReport:
    t_grid = DEFAULT_T_GRID if t_grid is None else np.asarray(t_grid, dtype=float)
    if t_grid.size == 0:
        raise ValueError("t grid is empty")
    if np.any(t_grid <= 0):
        raise ValueError("t grid must be positive")
    D1 = np.asarray(D1, dtype=complex)
    D2 = np.asarray(D2, dtype=complex)
    TD1 = hermitian_part(T(D1))
    TD2 = hermitian_part(T(D2))
    _require_invertible(**{"T(D1)": TD1, "T(D2)": TD2})
    big = relative_modular(D1, D2).delta.matrix
    small = relative_modular(TD1, TD2).delta.matrix
    cv = build_V(T, D1)
    V = cv.V.matrix
    Vh = dagger(V)
    VDV = hermitian_part(Vh @ big @ V)
    nH = big.shape[0]
    nK = small.shape[0]
    defect = hermitian_part(np.eye(nK) - Vh @ V)
    xi0 = vec(sqrtm_psd(TD1))

    contraction = _min_eig(small - VDV)
    mono, jensen, corr, lit, form = [], [], [], [], []
    for t in t_grid:
        inv_small = np.linalg.inv(small + t * np.eye(nK))
        inv_vdv = np.linalg.inv(VDV + t * np.eye(nK))
        sandwich = Vh @ np.linalg.inv(big + t * np.eye(nH)) @ V
        mono.append(_min_eig(inv_vdv - inv_small))
        jensen.append(_min_eig(sandwich + defect / t - inv_vdv))
        corr.append(_min_eig(sandwich + defect / t - inv_small))
        lit.append(_min_eig(sandwich - inv_small))
        form.append(float(np.vdot(xi0, (sandwich - inv_small) @ xi0).real))
    return OperatorChainReport(
        t_grid=t_grid,
        contraction_margin=contraction,
        monotone_margins=np.array(mono),
        jensen_margins=np.array(jensen),
        corrected_margins=np.array(corr),
        literal_margins=np.array(lit),
        form_margins=np.array(form),
        v_norm=cv.norm,
        isometry_defect=float(np.linalg.norm(defect, 2)),
        tol=tol,
    )


def _resolvent_entropy(eigs: np.ndarray, weights: np.ndarray, tol: float) -> float:
    """``int_0^inf sum_k w_k [(lam_k + t)^{-1} - (1 + t)^{-1}] dt`` with ``t = u / (1 - u)``."""
    c = weights * (1.0 - eigs)

    def g(u):
        if u >= 1.0:
            return float(np.sum(c))
        t = u / (1.0 - u)
        # integrand times dt/du = (1+t)^2
        return float(np.sum(c / (eigs + t))) * (1.0 + t)

    brk = [x / (1.0 + x) for x in np.unique(np.clip(eigs, 1e-300, None))]
    brk = [b for b in brk if 0.0 < b < 1.0][:50]
    val, err = integrate.quad(g, 0.0, 1.0, epsabs=tol * 1e-2, epsrel=1e-12,
                              limit=1000, points=brk or None)
    if err > tol:
        raise ArithmeticError(f"quadrature did not converge (error estimate {err:.3e})")
    return val


@dataclass
class ReplayReport:
    lhs: float
    rhs: float
    gap: float
    spectral_lhs: float
    spectral_rhs: float
    t_grid: np.ndarray
    integrand_margins: np.ndarray
    quad_tol: float

    @property
    def quadrature_error(self) -> float:
        return max(abs(self.lhs - self.spectral_lhs), abs(self.rhs - self.spectral_rhs))

    @property
    def worst_integrand_margin(self) -> float:
        return float(self.integrand_margins.min())


def replay_monotonicity(D1, D2, T: QuantumChannel, quad_tol: float = 1e-8,
                        t_grid=None) -> ReplayReport:
    """Integrate the resolvent forms for the input pair and the output pair.

    ``lhs`` and ``rhs`` are the quadrature values of ``S(D1, D2)`` and
    ``S(T(D1), T(D2))``; ``integrand_margins`` are the pointwise differences
    ``<xi, (Delta+t)^{-1} xi> - <xi0, (Delta_0+t)^{-1} xi0>`` on ``t_grid``,
    each obtained by a direct linear solve.
    """
    from .divergences import rel_entropy

    t_grid = DEFAULT_T_GRID if t_grid is None else np.asarray(t_grid, dtype=float)
    D1 = np.asarray(D1, dtype=complex)
    D2 = np.asarray(D2, dtype=complex)
    TD1 = hermitian_part(T(D1))
    TD2 = hermitian_part(T(D2))
    _require_invertible(**{"T(D1)": TD1, "T(D2)": TD2})
    big = relative_modular(D1, D2)
    small = relative_modular(TD1, TD2)
    xi = sqrtm_psd(D1)
    xi0 = sqrtm_psd(TD1)

    lhs = _resolvent_entropy(*big.spectral_weights(xi), quad_tol)
    rhs = _resolvent_entropy(*small.spectral_weights(xi0), quad_tol)
    margins = np.array([big.resolvent_form(xi, t) - small.resolvent_form(xi0, t)
                        for t in t_grid])
    return ReplayReport(
        lhs=lhs,
        rhs=rhs,
        gap=lhs - rhs,
        spectral_lhs=rel_entropy(D1, D2),
        spectral_rhs=rel_entropy(TD1, TD2),
        t_grid=t_grid,
        integrand_margins=margins,
        quad_tol=quad_tol,
    )


@dataclass(frozen=True)
class AlphaFormReport:
    spectral: float
    integral: float

    @property
    def discrepancy(self) -> float:
        return abs(self.spectral - self.integral)


def alpha_quadratic_form(D1, D2, beta: float, tol: float = 1e-10) -> AlphaFormReport:
    """``<D1^{1/2}, Delta^beta D1^{1/2}>`` computed spectrally and by integration.

    The integral route uses
    ``Delta^beta = sin(pi beta)/pi int_0^inf t^(beta-1) Delta (Delta + t)^{-1} dt``
    with resolvents from linear solves, after substituting ``t = e^s``.
    The value equals ``Tr D1^(1-beta) D2^beta``; with ``beta = (1 - alpha)/2``
    the alpha-divergence is ``4 / (1 - alpha^2) (1 - value)``.
    """
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie strictly between 0 and 1")
    pair = relative_modular(D1, D2)
    xi = vec(sqrtm_psd(pair.D1))
    eigs, w = pair.spectral_weights(sqrtm_psd(pair.D1))
    spectral = float(np.sum(w * eigs ** beta))

    M = pair.delta.matrix
    Mxi = M @ xi
    eye = np.eye(M.shape[0])

    def g(s):
        if s <= 0.0:
            y = np.linalg.solve(M + math.exp(s) * eye, Mxi)
            return math.exp(beta * s) * float(np.vdot(xi, y).real)
        # same quantity scaled by e^{-s} to keep the shift finite
        y = np.linalg.solve(math.exp(-s) * M + eye, Mxi)
        return math.exp((beta - 1.0) * s) * float(np.vdot(xi, y).real)

    lo = math.log(eigs[0])
    hi = math.log(eigs[-1])
    val = 0.0
    for a, b in ((-np.inf, lo - 1.0), (lo - 1.0, hi + 1.0), (hi + 1.0, np.inf)):
        part, _ = integrate.quad(g, a, b, epsabs=tol, epsrel=1e-12, limit=500)
        val += part
    integral = math.sin(math.pi * beta) / math.pi * val
    return AlphaFormReport(spectral, integral)
