"""Dense complex-matrix kernels: Gram-based pseudo-inverses, log-det rates
and inverse-Gram traces.

Pseudo-inverses go through a Cholesky factor of the smaller Gram matrix
rather than an SVD. At massive-MIMO sizes the Gram matrices are well
conditioned with overwhelming probability, and the factor's diagonal gives
a cheap condition estimate that guards the rare bad draw.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .errors import NegativeEigenvalue, NotHermitian, ShapeError, SingularGram

__all__ = [
    "NumericPolicy",
    "POLICY",
    "GramFactor",
    "gram_factor",
    "right_pseudo_inverse",
    "left_pseudo_inverse",
    "pseudo_inverse",
    "log_det_capacity",
    "trace_of_inverse_gram",
]


@dataclass(frozen=True)
class NumericPolicy:
    identity_rtol: float = 1e-10
    hermitian_tol: float = 1e-10
    eigenvalue_tol: float = 1e-10
    condition_threshold: float = 1e12


POLICY = NumericPolicy()


def _as_matrix(A):
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise ShapeError(f"expected a non-empty 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A.astype(complex, copy=False)


@dataclass(frozen=True)
class GramFactor:
    """Lower Cholesky factor ``L`` of a Hermitian positive-definite Gram
    matrix ``G = L L^H``."""

    chol: np.ndarray

    @property
    def size(self):
        return self.chol.shape[0]

    @property
    def condition_estimate(self):
        # cond(G) ~ (max L_ii / min L_ii)^2; a lower bound, cheap, and
        # sufficient to flag near-singular draws
        d = np.abs(np.diag(self.chol))
        return float((d.max() / d.min()) ** 2)

    def solve(self, b):
        return la.cho_solve((self.chol, True), b)

    def inverse(self):
        return self.solve(np.eye(self.size, dtype=complex))

    def inverse_trace(self):
        Linv = la.solve_triangular(self.chol, np.eye(self.size), lower=True)
        return float(np.sum(np.abs(Linv) ** 2))

    def quad_diag(self, B):
        """Diagonal of ``B^H G^{-1} B`` (real, one entry per column of B)."""
        Y = la.solve_triangular(self.chol, B, lower=True)
        return np.sum(np.abs(Y) ** 2, axis=0)


def gram_factor(A, side="rows", threshold=None):
    """Cholesky-factor ``A A^H`` (``side="rows"``) or ``A^H A``
    (``side="cols"``).

    Raises
    ------
    SingularGram
        If the factorization fails or the condition estimate exceeds
        `threshold` (default: ``POLICY.condition_threshold``).
    """
    A = _as_matrix(A)
    if threshold is None:
        threshold = POLICY.condition_threshold
    if side == "rows":
        G = A @ A.conj().T
    elif side == "cols":
        G = A.conj().T @ A
    else:
        raise ValueError(f"side must be 'rows' or 'cols', got {side!r}")
    try:
        L = la.cholesky(G, lower=True)
    except la.LinAlgError as exc:
        raise SingularGram(f"Gram matrix of shape {G.shape} is not positive definite") from exc
    factor = GramFactor(L)
    if not factor.condition_estimate < threshold:
        raise SingularGram(
            f"Gram condition estimate {factor.condition_estimate:.3g} exceeds {threshold:.3g}"
        )
    return factor


def right_pseudo_inverse(A, threshold=None):
    """Return ``A^H (A A^H)^{-1}`` for a wide, full-row-rank `A`."""
    A = _as_matrix(A)
    if A.shape[0] > A.shape[1]:
        raise ShapeError(f"right pseudo-inverse needs rows <= cols, got {A.shape}")
    factor = gram_factor(A, "rows", threshold)
    # (A A^H)^{-1} is Hermitian, so A^H (A A^H)^{-1} = ((A A^H)^{-1} A)^H
    return factor.solve(A).conj().T


def left_pseudo_inverse(A, threshold=None):
    """Return ``(A^H A)^{-1} A^H`` for a tall, full-column-rank `A`."""
    A = _as_matrix(A)
    if A.shape[0] < A.shape[1]:
        raise ShapeError(f"left pseudo-inverse needs rows >= cols, got {A.shape}")
    factor = gram_factor(A, "cols", threshold)
    return factor.solve(A.conj().T)


def pseudo_inverse(A, threshold=None):
    """Dagger by shape: right inverse for wide `A`, left inverse for tall."""
    A = _as_matrix(A)
    if A.shape[0] <= A.shape[1]:
        return right_pseudo_inverse(A, threshold)
    return left_pseudo_inverse(A, threshold)


def log_det_capacity(G, scale):
    """``log2 det(I + scale * G)`` for Hermitian positive-semidefinite `G`.

    Parameters
    ----------
    G : (n, n) array_like
        Hermitian PSD matrix (tolerances from `POLICY`).
    scale : float
        Non-negative multiplier, typically power over noise variance.

    Returns
    -------
    float
        The log-determinant in bits, never negative.
    """
    G = _as_matrix(G)
    if G.shape[0] != G.shape[1]:
        raise ShapeError(f"expected a square matrix, got {G.shape}")
    if scale < 0:
        raise ValueError(f"scale must be non-negative, got {scale}")
    size = max(1.0, float(np.max(np.abs(G))))
    if np.max(np.abs(G - G.conj().T)) > POLICY.hermitian_tol * size:
        raise NotHermitian("matrix is not Hermitian within tolerance")
    G = 0.5 * (G + G.conj().T)
    lam_min = float(np.linalg.eigvalsh(G)[0])
    if lam_min < -POLICY.eigenvalue_tol * size:
        raise NegativeEigenvalue(f"smallest eigenvalue {lam_min:.3g} is negative")
    if scale == 0:
        return 0.0
    L = la.cholesky(np.eye(G.shape[0]) + scale * G, lower=True)
    value = 2.0 * np.sum(np.log(np.real(np.diag(L)))) / np.log(2.0)
    return max(float(value), 0.0)


def trace_of_inverse_gram(A, threshold=None):
    """Trace of the inverse of the smaller Gram matrix of `A`.

    For a wide `A` this is ``tr[(A A^H)^{-1}]``; for a tall one,
    ``tr[(A^H A)^{-1}]``.
    """
    A = _as_matrix(A)
    side = "rows" if A.shape[0] <= A.shape[1] else "cols"
    return gram_factor(A, side, threshold).inverse_trace()
