"""Complex-matrix kernels shared by every design algorithm.

Hermitian square roots, truncated eigenbases with a deterministic phase
convention, orthogonal range projectors, and the unitary factor that aligns
a matrix with a target in Frobenius norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    KOutOfRange,
    NotHermitian,
    NotPSD,
    NotSquare,
    SingularForInverse,
    ZeroMatrix,
)

# Relative tolerances; rank cuts and PSD clamps are tied to the largest
# eigen/singular value so the checks are scale invariant.
HERMITIAN_RTOL = 1e-9
EIG_CUT_RTOL = 1e-12
SV_CUT_RTOL = 1e-12


def as_complex(m) -> np.ndarray:
    return np.asarray(m, dtype=np.complex128)


def hermitian_part(m: np.ndarray) -> np.ndarray:
    """(M + M*) / 2; cancels roundoff asymmetry from products like X @ X*."""
    return (m + m.conj().T) / 2


def check_hermitian(m, rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    """Validate that m is square and Hermitian within rtol; return its Hermitian part."""
    m = as_complex(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSquare(f"expected a square matrix, got shape {m.shape}")
    scale = np.linalg.norm(m)
    if np.linalg.norm(m - m.conj().T) > rtol * max(scale, np.finfo(float).tiny):
        raise NotHermitian("matrix is not Hermitian within tolerance")
    return hermitian_part(m)


@dataclass(frozen=True)
class HermitianFactor:
    """Principal PSD square root of a Hermitian matrix.

    sqrt @ sqrt reconstructs base; inv_sqrt is present only when the matrix
    is nonsingular and the inverse root was requested.
    """

    base: np.ndarray
    sqrt: np.ndarray
    inv_sqrt: np.ndarray | None = None


def hermitian_sqrt(m, need_inverse: bool = False) -> HermitianFactor:
    """Principal square root of a PSD Hermitian matrix via eigendecomposition.

    Eigenvalues within -EIG_CUT_RTOL * lam_max of zero are clamped to zero;
    anything more negative raises NotPSD.  With need_inverse, every
    eigenvalue must clear the relative cut or SingularForInverse is raised.
    """
    ms = check_hermitian(m)
    w, v = np.linalg.eigh(ms)
    lam_max = max(float(w[-1]), 0.0) if w.size else 0.0
    if np.any(w < -EIG_CUT_RTOL * lam_max):
        raise NotPSD("eigenvalue below the PSD tolerance")
    wc = np.clip(w, 0.0, None)
    sqrt = hermitian_part((v * np.sqrt(wc)) @ v.conj().T)
    inv_sqrt = None
    if need_inverse:
        if np.any(wc <= EIG_CUT_RTOL * lam_max) or lam_max == 0.0:
            raise SingularForInverse("matrix is singular; inverse root unavailable")
        inv_sqrt = hermitian_part((v / np.sqrt(wc)) @ v.conj().T)
    return HermitianFactor(base=ms, sqrt=sqrt, inv_sqrt=inv_sqrt)


def top_eigvecs(m, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvectors of the k largest eigenvalues of a Hermitian matrix.

    Columns are ordered by descending eigenvalue (ties keep the
    decomposition's original order).  Each column is rotated so its first
    component of magnitude > 1e-9 is real and nonnegative, which makes the
    output deterministic across runs.

    Returns (vecs, vals) with vecs of shape (n, k) and vals of length k.
    """
    ms = check_hermitian(m)
    n = ms.shape[0]
    if not 1 <= k <= n:
        raise KOutOfRange(f"k={k} outside [1, {n}]")
    w, v = np.linalg.eigh(ms)
    order = np.argsort(-w, kind="stable")[:k]
    vecs = v[:, order].copy()
    vals = w[order].copy()
    for j in range(k):
        col = vecs[:, j]
        sig = np.flatnonzero(np.abs(col) > 1e-9)
        if sig.size:
            pivot = col[sig[0]]
            vecs[:, j] = col * (pivot.conjugate() / abs(pivot))
    return vecs, vals


def orth_projector(x) -> np.ndarray:
    """Orthogonal projector onto the column range of x.

    The range basis keeps singular values above SV_CUT_RTOL times the
    largest one.
    """
    x = as_complex(x)
    if x.ndim == 1:
        x = x[:, None]
    u, s, _ = np.linalg.svd(x, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        raise ZeroMatrix("cannot project onto the range of a zero matrix")
    rank = int(np.count_nonzero(s > SV_CUT_RTOL * s[0]))
    ur = u[:, :rank]
    return hermitian_part(ur @ ur.conj().T)


def procrustes_unitary(m) -> np.ndarray:
    """Unitary T maximizing Re tr(M T); the maximum equals the nuclear norm of M."""
    m = as_complex(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSquare(f"expected a square matrix, got shape {m.shape}")
    u, _, vh = np.linalg.svd(m)
    return (u @ vh).conj().T
