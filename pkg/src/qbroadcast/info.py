"""Entropic and distance measures, all in bits (base-2 logarithms).

Small negative results caused by floating-point dust are clamped to zero
within NEGATIVE_DUST; anything more negative raises, since it signals an
invalid input rather than roundoff.
"""

from __future__ import annotations

import numpy as np

from .linalg import (
    SUPPORT_CUTOFF,
    dag,
    hermitian_eig,
    matrix_function_on_support,
    support_projector,
    trace_norm,
)
from .states import DensityMatrix

NEGATIVE_DUST = 1e-9
CMI_DUST = 1e-8

# Relative entropy is +inf when the support condition fails; "fails" means
# more than this much of the first state leaks outside the second's support.
SUPPORT_LEAK_TOL = 1e-9


def _clamp_dust(value: float, what: str, dust: float = NEGATIVE_DUST) -> float:
    if value < -dust:
        raise ValueError(f"{what} = {value:.3e} is negative beyond roundoff")
    return max(value, 0.0)


def entropy_of_spectrum(p: np.ndarray) -> float:
    """Shannon entropy in bits of a (sub)normalized nonnegative vector."""
    p = np.asarray(p, dtype=float)
    top = p.max(initial=0.0)
    p = p[p > SUPPORT_CUTOFF * max(top, 1.0)]
    if p.size == 0:
        return 0.0
    return float(-(p * np.log2(p)).sum())


def entropy_matrix(mat: np.ndarray) -> float:
    """von Neumann entropy of a raw density matrix (no validation)."""
    vals = np.linalg.eigvalsh(mat)
    vals = np.clip(vals, 0.0, None)
    return _clamp_dust(entropy_of_spectrum(vals), "entropy")


def entropy(rho: DensityMatrix) -> float:
    """von Neumann entropy S(rho) in bits."""
    return entropy_matrix(rho.matrix)


def relative_entropy(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Quantum relative entropy S(rho || sigma) in bits.

    Returns ``float("inf")`` when the support of rho is not contained in
    the support of sigma (more than SUPPORT_LEAK_TOL of rho's weight sits
    outside).
    """
    if rho.dim != sigma.dim:
        raise ValueError(f"dimension mismatch {rho.dim} != {sigma.dim}")
    proj = support_projector(sigma.matrix)
    leak = float(np.trace(rho.matrix @ (np.eye(rho.dim) - proj)).real)
    if leak > SUPPORT_LEAK_TOL:
        return float("inf")
    log_sigma = matrix_function_on_support(sigma.matrix, np.log2)
    cross = float(np.trace(rho.matrix @ log_sigma).real)
    value = -entropy(rho) - cross
    return _clamp_dust(value, "relative entropy")


def fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Uhlmann fidelity F(rho, sigma) = || sqrt(rho) sqrt(sigma) ||_1.

    Square-root convention: F is 1 iff the states coincide, and for pure
    |psi> it reduces to sqrt(<psi| sigma |psi>).
    """
    if rho.dim != sigma.dim:
        raise ValueError(f"dimension mismatch {rho.dim} != {sigma.dim}")
    sq_r = matrix_function_on_support(rho.matrix, np.sqrt)
    sq_s = matrix_function_on_support(sigma.matrix, np.sqrt)
    value = trace_norm(sq_r @ sq_s)
    if value > 1.0 + 1e-9:
        raise ValueError(f"fidelity {value} exceeds 1 beyond roundoff")
    return min(value, 1.0)


def _split_groups(dims, *groups):
    seen = []
    for g in groups:
        idx = [int(i) for i in ([g] if np.isscalar(g) else g)]
        for i in idx:
            if i < 0 or i >= len(dims):
                raise ValueError(f"subsystem index {i} out of range")
            if i in seen:
                raise ValueError(f"subsystem index {i} listed twice")
            seen.append(i)
        yield idx


def mutual_information(rho: DensityMatrix, side_a=(0,)) -> float:
    """I(A:B) = S(A) + S(B) - S(AB), with A the listed subsystem indices.

    B is everything else.  Equals S(rho || rho_A (x) rho_B).
    """
    (a,) = _split_groups(rho.dims, side_a)
    b = [i for i in range(len(rho.dims)) if i not in a]
    if not a or not b:
        raise ValueError("both sides of the cut must be nonempty")
    value = (
        entropy(rho.marginal(a)) + entropy(rho.marginal(b)) - entropy(rho)
    )
    return _clamp_dust(value, "mutual information")


def conditional_mutual_information(
    rho: DensityMatrix, side_a, side_c, side_b=None
) -> float:
    """I(A:C|B) = S(AB) + S(BC) - S(ABC) - S(B).

    ``side_b`` defaults to all remaining subsystems.  Tiny negative values
    down to -1e-8 are returned as-is (strong subadditivity guarantees the
    exact quantity is nonnegative); anything lower raises.
    """
    a, c = _split_groups(rho.dims, side_a, side_c)
    if side_b is None:
        b = [i for i in range(len(rho.dims)) if i not in a and i not in c]
    else:
        (b,) = _split_groups(rho.dims, side_b)
        if set(b) & (set(a) | set(c)):
            raise ValueError("conditioning system overlaps A or C")
    if not a or not c:
        raise ValueError("A and C must be nonempty")
    value = (
        entropy(rho.marginal(sorted(a + b)))
        + entropy(rho.marginal(sorted(b + c)))
        - entropy(rho.marginal(sorted(a + b + c)))
        - (entropy(rho.marginal(sorted(b))) if b else 0.0)
    )
    if value < -CMI_DUST:
        raise ValueError(
            f"conditional mutual information {value:.3e} violates strong "
            f"subadditivity beyond roundoff"
        )
    return value
