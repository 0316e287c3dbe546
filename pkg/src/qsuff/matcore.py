"""Dense complex linear algebra used throughout the package.

Vectorization convention
------------------------
Matrices are vectorized by stacking rows (``a.reshape(-1)`` for a C-ordered
array).  Under this rule

    vec(X a Y) = (X kron Y^T) vec(a),

so ``left_mult(X)`` is ``kron(X, I)`` and ``right_mult(Y)`` is
``kron(I, Y^T)``.  The map is an isometry from the Hilbert-Schmidt space onto
C^(n*n), hence the Hilbert-Schmidt adjoint of a superoperator is the
conjugate transpose of its matrix and a superoperator is self-adjoint exactly
when its matrix is Hermitian.

Tensor products use ``numpy.kron``: the first factor is the slowest index.
Subsystem indices are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

SUPPORT_RTOL = 1e-12
HERMITIAN_RTOL = 1e-12


class NotHermitianError(ValueError):
    pass


def _as_square(M) -> np.ndarray:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def dagger(M: np.ndarray) -> np.ndarray:
    return np.conj(M).T


def hermitian_part(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + dagger(M))


def is_hermitian(M, rtol: float = HERMITIAN_RTOL) -> bool:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return False
    scale = max(1.0, float(np.max(np.abs(M), initial=0.0)))
    return float(np.max(np.abs(M - dagger(M)), initial=0.0)) <= rtol * scale


def check_hermitian(M, rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    M = _as_square(M)
    if not is_hermitian(M, rtol):
        asym = float(np.max(np.abs(M - dagger(M))))
        raise NotHermitianError(f"matrix is not Hermitian (max |M - M*| = {asym:.3e})")
    return M


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues in ascending order and the unitary whose columns are eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        U = self.eigenvectors
        return (U * self.eigenvalues) @ dagger(U)


def hermitian_eig(M, rtol: float = HERMITIAN_RTOL) -> Spectrum:
    """Spectral decomposition of a Hermitian matrix.

    The input must be Hermitian to ``rtol`` relative to its largest entry;
    the exactly Hermitian part is diagonalized.  Raises
    :class:`NotHermitianError` for non-Hermitian input and
    :class:`numpy.linalg.LinAlgError` when the solver does not converge or the
    reconstruction residual exceeds ``1e-10 * max(1, ||M||_F)``.
    """
    M = check_hermitian(M, rtol)
    H = hermitian_part(M.astype(complex))
    w, U = np.linalg.eigh(H)
    spec = Spectrum(w, U)
    scale = max(1.0, np.linalg.norm(H))
    resid = np.linalg.norm(H - spec.reconstruct())
    if resid > 1e-10 * scale:
        raise np.linalg.LinAlgError(f"eigen-reconstruction residual {resid:.3e} too large")
    return spec


def matrix_fn(M, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Apply the scalar function ``f`` to a Hermitian matrix through its spectrum.

    ``f`` receives the real eigenvalue vector and may return real or complex
    values.  A ``ValueError`` is raised when ``f`` produces non-finite values,
    e.g. ``np.log`` on a zero eigenvalue.
    """
    spec = M if isinstance(M, Spectrum) else hermitian_eig(M)
    with np.errstate(divide="ignore", invalid="ignore"):
        fw = np.asarray(f(spec.eigenvalues))
    if not np.all(np.isfinite(fw)):
        raise ValueError("function undefined on part of the spectrum")
    U = spec.eigenvectors
    out = (U * fw) @ dagger(U)
    if np.isrealobj(fw):
        out = hermitian_part(out)
    return out


def support_threshold(eigenvalues: np.ndarray) -> float:
    top = float(np.max(np.abs(eigenvalues), initial=0.0))
    return SUPPORT_RTOL * top


def is_positive_definite(M) -> bool:
    w = hermitian_eig(M).eigenvalues
    return bool(w[0] > support_threshold(w))


def logm_pd(M) -> np.ndarray:
    """Matrix logarithm of a positive definite matrix."""
    spec = hermitian_eig(M)
    w = spec.eigenvalues
    if w[0] <= support_threshold(w):
        raise ValueError(
            f"logarithm needs a positive definite matrix (smallest eigenvalue {w[0]:.3e})"
        )
    return matrix_fn(spec, np.log)


def expm_h(M) -> np.ndarray:
    return matrix_fn(M, np.exp)


def powm_psd(M, power: float) -> np.ndarray:
    """Real power of a positive semidefinite matrix.

    Eigenvalues below the support threshold count as zero; negative powers are
    taken on the support only (a generalized inverse).
    """
    spec = hermitian_eig(M)
    w = spec.eigenvalues
    thr = support_threshold(w)
    if w[0] < -1e-10 * max(1.0, abs(w[-1])):
        raise ValueError(f"matrix is not positive semidefinite (eigenvalue {w[0]:.3e})")
    on = w > thr
    fw = np.zeros_like(w)
    fw[on] = w[on] ** power
    return matrix_fn(spec, lambda _: fw)


def sqrtm_psd(M) -> np.ndarray:
    return powm_psd(M, 0.5)


def imag_power(M, s: float) -> np.ndarray:
    """``M^{i s}`` for positive definite ``M``; the result is unitary."""
    spec = hermitian_eig(M)
    w = spec.eigenvalues
    if w[0] <= support_threshold(w):
        raise ValueError("imaginary powers need a positive definite matrix")
    return matrix_fn(spec, lambda x: np.exp(1j * s * np.log(x)))


def integral_log(P, tol: float = 1e-8, limit: int = 400) -> np.ndarray:
    """Matrix logarithm from the resolvent integral.

    Evaluates ``int_0^inf (1+t)^{-1} I - (P+t)^{-1} dt`` after mapping
    ``t = u / (1 - u)`` onto ``[0, 1]`` and integrating adaptively.  The
    integrand is written as ``(P+t)^{-1} (P - I) / (1+t)`` and resolvents are
    obtained by linear solves, so no eigendecomposition is involved.
    """
    P = check_hermitian(P).astype(complex)
    n = P.shape[0]
    if tol <= 0:
        raise ValueError("tol must be positive")
    eye = np.eye(n)
    PmI = P - eye

    def integrand(u: float) -> np.ndarray:
        if u >= 1.0:
            return PmI
        t = u / (1.0 - u)
        # dt/du = (1+t)^2
        return np.linalg.solve(P + t * eye, PmI) * (1.0 + t)

    val, err, info = integrate.quad_vec(
        integrand, 0.0, 1.0, epsabs=tol * 1e-2, epsrel=0.0, norm="2",
        limit=limit, full_output=True,
    )
    if not info.success or err > tol:
        raise ArithmeticError(f"quadrature budget exceeded (error estimate {err:.3e})")
    return hermitian_part(val)


def tensor(*mats) -> np.ndarray:
    out = np.asarray(mats[0])
    for m in mats[1:]:
        out = np.kron(out, np.asarray(m))
    return out


def partial_trace(M, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep`` (0-based, any order).

    The kept subsystems appear in ascending order in the result.
    """
    M = np.asarray(M)
    dims = [int(d) for d in dims]
    total = int(np.prod(dims))
    if M.shape != (total, total):
        raise ValueError(f"matrix shape {M.shape} does not match dims {dims}")
    keep = sorted(set(int(k) for k in keep))
    if not keep or keep[0] < 0 or keep[-1] >= len(dims):
        raise ValueError(f"invalid subsystem selection {keep} for {len(dims)} subsystems")
    k = len(dims)
    T = M.reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    if 2 * k > len(letters):
        raise ValueError("too many subsystems")
    row = list(letters[:k])
    col = list(letters[k:2 * k])
    for i in range(k):
        if i not in keep:
            col[i] = row[i]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    R = np.einsum("".join(row) + "".join(col) + "->" + out, T)
    d = int(np.prod([dims[i] for i in keep]))
    return R.reshape(d, d)


def embed(op, dims: Sequence[int], where: Sequence[int]) -> np.ndarray:
    """Place ``op`` (acting on the subsystems ``where``) into the full product space.

    ``where`` must be a contiguous ascending run of subsystem indices; the
    remaining factors receive identities.  E.g. on dims ``(d1, d2, d3)``,
    ``embed(D2, dims, [1])`` is ``I1 kron D2 kron I3``.
    """
    dims = [int(d) for d in dims]
    where = [int(w) for w in where]
    if not where or where != list(range(where[0], where[0] + len(where))):
        raise ValueError("subsystems must be a contiguous ascending run")
    if where[0] < 0 or where[-1] >= len(dims):
        raise ValueError("subsystem index out of range")
    op = np.asarray(op)
    d = int(np.prod([dims[i] for i in where]))
    if op.shape != (d, d):
        raise ValueError(f"operator shape {op.shape} does not match subsystems {where}")
    left = int(np.prod(dims[:where[0]]))
    right = int(np.prod(dims[where[-1] + 1:]))
    return np.kron(np.kron(np.eye(left), op), np.eye(right))


def hs_inner(A, B) -> complex:
    """Hilbert-Schmidt inner product ``Tr A* B`` (conjugate-linear in ``A``)."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch {A.shape} vs {B.shape}")
    return complex(np.vdot(A, B))


def vec(a) -> np.ndarray:
    return np.asarray(a).reshape(-1)


def unvec(v, n: int) -> np.ndarray:
    return np.asarray(v).reshape(n, n)


@dataclass(frozen=True)
class SuperOperator:
    """Linear map ``B(C^in_dim) -> B(C^out_dim)`` stored on row-stacked vectors."""

    in_dim: int
    out_dim: int
    matrix: np.ndarray

    def __post_init__(self):
        if self.matrix.shape != (self.out_dim ** 2, self.in_dim ** 2):
            raise ValueError(
                f"superoperator matrix has shape {self.matrix.shape}, expected "
                f"{(self.out_dim ** 2, self.in_dim ** 2)}"
            )

    def apply(self, a) -> np.ndarray:
        a = np.asarray(a)
        if a.shape != (self.in_dim, self.in_dim):
            raise ValueError(f"input shape {a.shape} does not match in_dim {self.in_dim}")
        return unvec(self.matrix @ vec(a), self.out_dim)

    __call__ = apply

    def __matmul__(self, other: "SuperOperator") -> "SuperOperator":
        if other.out_dim != self.in_dim:
            raise ValueError("dimension mismatch in superoperator composition")
        return SuperOperator(other.in_dim, self.out_dim, self.matrix @ other.matrix)

    def adjoint(self) -> "SuperOperator":
        return SuperOperator(self.out_dim, self.in_dim, dagger(self.matrix))

    @classmethod
    def from_map(cls, fn: Callable[[np.ndarray], np.ndarray], in_dim: int) -> "SuperOperator":
        """Build the matrix by applying ``fn`` to every matrix unit."""
        cols = []
        out_dim = None
        for i in range(in_dim):
            for j in range(in_dim):
                e = np.zeros((in_dim, in_dim), dtype=complex)
                e[i, j] = 1.0
                y = np.asarray(fn(e))
                out_dim = y.shape[0]
                cols.append(vec(y))
        return cls(in_dim, out_dim, np.stack(cols, axis=1).astype(complex))

    @classmethod
    def identity(cls, n: int) -> "SuperOperator":
        return cls(n, n, np.eye(n * n, dtype=complex))


def left_mult(X) -> SuperOperator:
    X = _as_square(X)
    n = X.shape[0]
    return SuperOperator(n, n, np.kron(X, np.eye(n)).astype(complex))


def right_mult(Y) -> SuperOperator:
    Y = _as_square(Y)
    n = Y.shape[0]
    return SuperOperator(n, n, np.kron(np.eye(n), Y.T).astype(complex))
