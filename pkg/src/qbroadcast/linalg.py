"""Dense linear algebra helpers for small multipartite quantum systems.

Everything here works on plain complex ndarrays.  Composite indices are
ordered with the first tensor factor slowest (most significant), i.e.
``kron(A, B)`` puts ``A`` on the slow index, matching the row-major
reshape ``(dA, dB, dA, dB)``.
"""

from __future__ import annotations

from typing import Callable, NamedTuple, Sequence

import numpy as np

# Eigenvalues at or below SUPPORT_CUTOFF * (largest eigenvalue) are treated
# as exact zeros when inverting / taking functions on the support.
SUPPORT_CUTOFF = 1e-12

# Hermiticity / PSD slack tolerated on *inputs* before we refuse them.
HERM_ATOL = 1e-10


class HermitianEig(NamedTuple):
    """Eigendecomposition with eigenvalues sorted in descending order.

    ``vectors[:, k]`` is the unit eigenvector for ``values[k]``.
    """

    values: np.ndarray
    vectors: np.ndarray


def dag(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return a.conj().T


def kron(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more operators, first factor slowest."""
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def is_hermitian(a: np.ndarray, atol: float = HERM_ATOL) -> bool:
    return bool(np.abs(a - dag(a)).max() <= atol)


def max_abs(a: np.ndarray) -> float:
    """Largest entry modulus; the norm used for residual reporting."""
    return float(np.abs(a).max()) if a.size else 0.0


def _check_square(mat: np.ndarray, dims: Sequence[int]) -> int:
    d = int(np.prod(dims))
    if mat.shape != (d, d):
        raise ValueError(
            f"operator shape {mat.shape} does not match dims {list(dims)} "
            f"(product {d})"
        )
    return d


def partial_trace(mat: np.ndarray, dims: Sequence[int], keep) -> np.ndarray:
    """Trace out all subsystems not listed in ``keep``.

    Parameters
    ----------
    mat : square array on the tensor product of ``dims``
    dims : subsystem dimensions, slowest factor first
    keep : int or sequence of ints; subsystem indices to retain,
        in their original order

    Returns the reduced operator on the kept factors.
    """
    if np.isscalar(keep):
        keep = [int(keep)]
    keep = sorted(set(int(k) for k in keep))
    dims = [int(d) for d in dims]
    n = len(dims)
    if any(k < 0 or k >= n for k in keep):
        raise ValueError(f"keep={keep} out of range for {n} subsystems")
    _check_square(mat, dims)
    tensor = np.asarray(mat, dtype=complex).reshape(dims + dims)
    # Contract row/column indices of every traced subsystem, highest first
    # so the remaining axis numbers stay valid.
    traced = [k for k in range(n) if k not in keep]
    for k in sorted(traced, reverse=True):
        tensor = np.trace(tensor, axis1=k, axis2=k + tensor.ndim // 2)
    d_keep = int(np.prod([dims[k] for k in keep])) if keep else 1
    return tensor.reshape(d_keep, d_keep)


def hermitian_eig(mat: np.ndarray, atol: float = HERM_ATOL) -> HermitianEig:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Raises ValueError if ``mat`` is not Hermitian within ``atol``.
    """
    mat = np.asarray(mat, dtype=complex)
    if not is_hermitian(mat, atol):
        raise ValueError(
            f"matrix is not Hermitian: max deviation "
            f"{max_abs(mat - dag(mat)):.3e} exceeds atol {atol:.1e}"
        )
    vals, vecs = np.linalg.eigh((mat + dag(mat)) / 2.0)
    order = np.argsort(vals)[::-1]
    return HermitianEig(vals[order], vecs[:, order])


def matrix_function_on_support(
    mat: np.ndarray,
    fn: Callable[[np.ndarray], np.ndarray],
    atol: float = HERM_ATOL,
) -> np.ndarray:
    """Apply ``fn`` to the nonzero spectrum of a PSD matrix.

    Eigenvalues at or below ``SUPPORT_CUTOFF`` times the largest one are
    treated as exact zeros (the function is *not* applied to them), so
    e.g. ``fn=lambda x: x**-0.5`` yields the pseudo-inverse square root.
    Eigenvalues below ``-atol`` raise; small negative dust is clipped.
    """
    vals, vecs = hermitian_eig(mat, atol)
    if vals.size and vals[-1] < -atol:
        raise ValueError(
            f"matrix is not positive semidefinite: min eigenvalue {vals[-1]:.3e}"
        )
    top = vals[0] if vals.size else 0.0
    if top <= 0.0:
        return np.zeros_like(np.asarray(mat, dtype=complex))
    mask = vals > SUPPORT_CUTOFF * top
    out_vals = np.zeros_like(vals)
    out_vals[mask] = fn(vals[mask])
    return (vecs * out_vals) @ dag(vecs)


def support_projector(mat: np.ndarray, atol: float = HERM_ATOL) -> np.ndarray:
    """Orthogonal projector onto the support (range) of a PSD matrix."""
    return matrix_function_on_support(mat, lambda x: np.ones_like(x), atol)


def support_isometry(mat: np.ndarray, atol: float = HERM_ATOL) -> np.ndarray:
    """Isometry V whose columns span the support of a PSD matrix.

    ``dag(V) @ mat @ V`` is the compression of ``mat`` onto its support.
    """
    vals, vecs = hermitian_eig(mat, atol)
    top = vals[0] if vals.size else 0.0
    if top <= 0.0:
        return np.zeros((mat.shape[0], 0), dtype=complex)
    mask = vals > SUPPORT_CUTOFF * top
    return vecs[:, mask]


def trace_norm(mat: np.ndarray) -> float:
    """Sum of singular values (Schatten 1-norm)."""
    return float(np.linalg.svd(np.asarray(mat, dtype=complex), compute_uv=False).sum())
