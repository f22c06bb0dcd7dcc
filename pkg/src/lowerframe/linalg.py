"""Dense linear-algebra primitives.

Thin, contract-checked wrappers around numpy's LAPACK bindings. Vectors are
1-D arrays; bases are ``(d, r)`` arrays whose columns are orthonormal.
Everything is computed in complex128 (float64 for real-valued results).
"""

import numpy as np
import scipy.linalg

from .exceptions import InconsistencyError, InputError

DEFAULT_RANK_TOL = 1e-10
ORTHO_TOL = 1e-10
HERMITIAN_TOL = 1e-10

__all__ = [
    "DEFAULT_RANK_TOL",
    "as_column_matrix",
    "normalize_phase",
    "orthonormal_basis",
    "complement_within",
    "min_norm_least_squares",
    "operator_norm",
    "hermitian_min_eig",
    "weighted_gram_min_eig",
]


def as_column_matrix(vectors, dim=None):
    """Stack a sequence of d-vectors as the columns of a complex ``(d, m)`` array.

    A 2-D array is taken to already hold the vectors as columns.
    """
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        A = np.asarray(vectors, dtype=complex)
        if dim is not None and A.shape[0] != dim:
            raise InputError(f"expected vectors of dimension {dim}, got {A.shape[0]}")
        return A
    vectors = [np.asarray(v, dtype=complex).ravel() for v in vectors]
    if not vectors:
        if dim is None:
            raise InputError("dimension is required for an empty vector list")
        return np.zeros((dim, 0), dtype=complex)
    d = vectors[0].shape[0] if dim is None else dim
    for i, v in enumerate(vectors):
        if v.shape[0] != d:
            raise InputError(f"vector {i} has dimension {v.shape[0]}, expected {d}")
    return np.column_stack(vectors)


def normalize_phase(B):
    """Rotate each column so its first largest-modulus entry is real positive.

    Entries within a relative 1e-9 of the column maximum count as ties so
    that the choice survives rounding noise.
    """
    B = np.array(B, dtype=complex, copy=True)
    for j in range(B.shape[1]):
        col = B[:, j]
        mags = np.abs(col)
        top = mags.max()
        if top == 0:
            continue
        i = int(np.argmax(mags >= top * (1 - 1e-9)))
        B[:, j] = col * (np.conj(col[i]) / mags[i])
        B[i, j] = B[i, j].real
    return B


def orthonormal_basis(vectors, rank_tol=DEFAULT_RANK_TOL, dim=None):
    """Orthonormal basis for the span of ``vectors``.

    Singular values below ``rank_tol`` times the largest one are dropped.

    Parameters
    ----------
    vectors : sequence of array_like or ndarray of shape (d, m)
        Spanning vectors (columns when given as a 2-D array).
    rank_tol : float
        Relative numerical-rank threshold.
    dim : int, optional
        Ambient dimension; required when ``vectors`` is empty.

    Returns
    -------
    ndarray of shape (d, r)
        Columns are orthonormal and phase-normalized; ``r`` is the numerical
        rank.
    """
    if rank_tol < 0:
        raise InputError("rank_tol must be nonnegative")
    A = as_column_matrix(vectors, dim)
    d, m = A.shape
    if m == 0 or not np.any(A):
        return np.zeros((d, 0), dtype=complex)
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    r = int(np.count_nonzero(s > rank_tol * s[0]))
    return normalize_phase(U[:, :r])


def complement_within(B_big, B_small, tol=1e-8):
    """Orthonormal basis of ``span(B_big) ∩ span(B_small)^⊥``.

    Raises :class:`InconsistencyError` if ``span(B_small)`` is not contained
    in ``span(B_big)`` to within ``tol``.
    """
    B_big = np.asarray(B_big, dtype=complex)
    B_small = np.asarray(B_small, dtype=complex)
    d, r_big = B_big.shape
    r_small = B_small.shape[1]
    if B_small.shape[0] != d:
        raise InputError("bases live in different ambient dimensions")
    if r_small > r_big:
        raise InconsistencyError(f"subspace of rank {r_small} cannot sit inside rank {r_big}")
    if r_small:
        leak = B_small - B_big @ (B_big.conj().T @ B_small)
        worst = float(np.linalg.norm(leak, axis=0).max())
        if worst > tol:
            raise InconsistencyError(
                f"containment violated: residual {worst:.3e} exceeds {tol:.3e}"
            )
    k = r_big - r_small
    if k == 0:
        return np.zeros((d, 0), dtype=complex)
    P = B_big - B_small @ (B_small.conj().T @ B_big)
    U, _, _ = np.linalg.svd(P, full_matrices=False)
    C = U[:, :k]
    # one re-projection pass keeps the columns orthogonal to B_small at 1e-16
    C = C - B_small @ (B_small.conj().T @ C)
    C, _ = np.linalg.qr(C)
    return normalize_phase(C)


def min_norm_least_squares(A, b, tol=DEFAULT_RANK_TOL):
    """Minimum-norm minimizer of ``||A c - b||``.

    Uses a truncated SVD: singular values at or below ``tol * s_max`` are
    treated as zero, so rank-deficient ``A`` is fine.
    """
    if tol < 0:
        raise InputError("tol must be nonnegative")
    A = np.asarray(A, dtype=complex)
    b = np.asarray(b, dtype=complex).ravel()
    if A.ndim != 2 or A.shape[0] != b.shape[0]:
        raise InputError(f"shape mismatch: A {A.shape}, b {b.shape}")
    m = A.shape[1]
    if m == 0 or not np.any(A):
        return np.zeros(m, dtype=complex)
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    keep = s > tol * s[0]
    proj = U[:, keep].conj().T @ b
    return Vh[keep].conj().T @ (proj / s[keep])


def operator_norm(M):
    """Largest singular value of ``M`` (0 for an empty matrix)."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    if M.ndim == 1:
        return float(np.linalg.norm(M))
    return float(np.linalg.svd(M, compute_uv=False)[0])


def _check_hermitian(M):
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InputError(f"expected a square matrix, got shape {M.shape}")
    scale = max(1.0, float(np.abs(M).max())) if M.size else 1.0
    skew = float(np.abs(M - M.conj().T).max()) if M.size else 0.0
    if skew > HERMITIAN_TOL * scale:
        raise InputError(f"matrix is not Hermitian (max asymmetry {skew:.3e})")
    return (M + M.conj().T) / 2


def hermitian_min_eig(M):
    """Smallest eigenvalue of a Hermitian matrix.

    The input is symmetrized first; asymmetry beyond 1e-10 (relative to the
    largest entry, floored at 1) is an :class:`InputError`.
    """
    H = _check_hermitian(M)
    if H.shape[0] == 0:
        raise InputError("empty matrix has no eigenvalues")
    return float(scipy.linalg.eigvalsh(H, subset_by_index=[0, 0])[0])


def weighted_gram_min_eig(vectors, weights):
    """Smallest eigenvalue of ``sum_k weights[k] v_k v_k^*``, graded-accurate.

    Forming the sum and calling an eigensolver loses the small end of the
    spectrum once the weights span many orders of magnitude, because the
    absolute error scales with the largest weight. Instead factor the
    operator as ``G G^*`` with ``G^* = diag(sqrt(w)) V^*`` and take the
    smallest singular value of that row-scaled matrix with LAPACK's
    preconditioned one-sided Jacobi SVD (``gejsv``), which is accurate
    relative to each singular value for scaled, well-conditioned factors.

    Parameters
    ----------
    vectors : ndarray of shape (d, K)
        The vectors ``v_k`` as columns.
    weights : array_like of shape (K,)
        Nonnegative weights.
    """
    V = np.asarray(vectors, dtype=complex)
    w = np.asarray(weights, dtype=float)
    if V.ndim != 2 or V.shape[1] != w.shape[0]:
        raise InputError("need one weight per vector")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise InputError("weights must be finite and nonnegative")
    d = V.shape[0]
    keep = (w > 0) & np.any(V != 0, axis=0)
    if np.count_nonzero(keep) < d:
        return 0.0
    Gh = (V[:, keep] * np.sqrt(w[keep])).conj().T
    # realify: [[Re, -Im], [Im, Re]] has each singular value of Gh twice
    if np.any(Gh.imag):
        Gh = np.block([[Gh.real, -Gh.imag], [Gh.imag, Gh.real]])
    else:
        Gh = Gh.real
    sva, _, _, work, _, info = scipy.linalg.lapack.dgejsv(
        np.asfortranarray(Gh), joba=0, jobu=3, jobv=3
    )
    if info != 0:
        smin = float(np.linalg.svd(Gh, compute_uv=False)[-1])
    else:
        smin = float(np.min(sva)) * (work[1] / work[0])
    return smin * smin
