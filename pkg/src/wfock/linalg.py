"""Dense complex linear algebra helpers: PSD square roots, thresholded
pseudoinverses, orthonormal frames and nullspaces via SVD.

Everything here works on plain ``numpy`` arrays of dtype complex128.  Empty
(zero-dimensional) matrices are legal inputs throughout; they show up whenever
a tensor power of a correspondence vanishes.
"""

from __future__ import annotations

import numpy as np

ATOL = 1e-10
RANK_TOL = 1e-10
PINV_TOL = 1e-12


def as_complex(a) -> np.ndarray:
    return np.asarray(a, dtype=complex)


def operator_norm(a: np.ndarray) -> float:
    """Largest singular value; 0.0 for empty matrices."""
    a = as_complex(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def herm_eigs(a: np.ndarray) -> np.ndarray:
    a = as_complex(a)
    if a.size == 0:
        return np.zeros(0)
    return np.linalg.eigvalsh(0.5 * (a + a.conj().T))


def psd_sqrt(a: np.ndarray, floor: float = 1e-12) -> np.ndarray:
    """Hermitian square root, clipping eigenvalues in [-floor, 0] to 0.

    Raises ValueError if an eigenvalue falls below -floor * max(1, ||a||).
    """
    a = as_complex(a)
    if a.size == 0:
        return a.copy()
    h = 0.5 * (a + a.conj().T)
    w, v = np.linalg.eigh(h)
    scale = max(1.0, float(abs(w).max()))
    if w.min() < -floor * scale:
        raise ValueError(f"matrix is not PSD: min eigenvalue {w.min():.3e}")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def pinv(a: np.ndarray, tol: float = PINV_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse with relative singular value threshold."""
    a = as_complex(a)
    if a.size == 0:
        return a.conj().T.copy()
    return np.linalg.pinv(a, rcond=tol)


def orth_columns(a: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis (columns) for the column space of ``a``."""
    a = as_complex(a)
    if a.size == 0:
        return np.zeros((a.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    if s.size == 0:
        return np.zeros((a.shape[0], 0), dtype=complex)
    rank = int(np.sum(s > tol * max(1.0, s[0])))
    return u[:, :rank]


def nullspace(a: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis (columns) for the kernel of ``a``."""
    a = as_complex(a)
    if a.shape[1] == 0:
        return np.zeros((0, 0), dtype=complex)
    if a.shape[0] == 0 or a.size == 0:
        return np.eye(a.shape[1], dtype=complex)
    _, s, vh = np.linalg.svd(a)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * max(1.0, smax)))
    return vh[rank:].conj().T


def residual(a: np.ndarray, b: np.ndarray) -> float:
    """Operator-norm distance between two matrices of equal shape."""
    return operator_norm(as_complex(a) - as_complex(b))


def rng_complex(rng: np.random.Generator, *shape: int) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
