"""Quantum channels and completely positive maps in Choi form.

The canonical Choi matrix convention is

    J = sum_{ij} |i><j| (x) ch(|i><j|)

with the *input* factor on the slow index, so ``J`` lives on
``in_dims + out_dims`` and the channel acts as

    ch(rho)[o, p] = sum_{ij} rho[i, j] * J[(i, o), (j, p)].

Kraus and Stinespring forms are derived views of the Choi matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .linalg import (
    SUPPORT_CUTOFF,
    dag,
    hermitian_eig,
    is_hermitian,
    kron,
    matrix_function_on_support,
    max_abs,
    partial_trace,
)
from .states import VALIDATION_ATOL, DensityMatrix, Povm, _as_dims, _freeze


@dataclass(frozen=True, eq=False)
class CompletelyPositiveMap:
    """A completely positive (not necessarily trace-preserving) map.

    Validation enforces hermiticity and positivity of the Choi matrix.
    """

    in_dims: tuple[int, ...]
    out_dims: tuple[int, ...]
    choi: np.ndarray

    def __post_init__(self):
        in_dims = _as_dims(self.in_dims)
        out_dims = _as_dims(self.out_dims)
        din = int(np.prod(in_dims))
        dout = int(np.prod(out_dims))
        j = np.asarray(self.choi, dtype=complex)
        if j.shape != (din * dout, din * dout):
            raise ValueError(
                f"Choi shape {j.shape} does not match dims "
                f"{list(in_dims)} -> {list(out_dims)}"
            )
        if not is_hermitian(j, VALIDATION_ATOL):
            raise ValueError("Choi matrix is not Hermitian")
        lo = float(np.linalg.eigvalsh((j + dag(j)) / 2.0)[0])
        scale = max(1.0, max_abs(j))
        if lo < -VALIDATION_ATOL * scale:
            raise ValueError(
                f"Choi matrix is not positive semidefinite "
                f"(min eigenvalue {lo:.3e}); the map is not completely positive"
            )
        object.__setattr__(self, "in_dims", in_dims)
        object.__setattr__(self, "out_dims", out_dims)
        object.__setattr__(self, "choi", _freeze(j))

    @property
    def in_dim(self) -> int:
        return int(np.prod(self.in_dims))

    @property
    def out_dim(self) -> int:
        return int(np.prod(self.out_dims))

    def apply_matrix(self, mat: np.ndarray) -> np.ndarray:
        """Action on an arbitrary operator (no state validation)."""
        mat = np.asarray(mat, dtype=complex)
        din, dout = self.in_dim, self.out_dim
        if mat.shape != (din, din):
            raise ValueError(f"operator shape {mat.shape}, expected {(din, din)}")
        return choi_action(self.choi, din, dout, mat)


@dataclass(frozen=True, eq=False)
class Channel(CompletelyPositiveMap):
    """A completely positive trace-preserving map."""

    def __post_init__(self):
        super().__post_init__()
        tp_dev = max_abs(
            partial_trace(self.choi, (self.in_dim, self.out_dim), 0)
            - np.eye(self.in_dim)
        )
        if tp_dev > VALIDATION_ATOL * max(1, self.out_dim):
            raise ValueError(
                f"map is not trace preserving: "
                f"max |Tr_out J - I| = {tp_dev:.3e}"
            )


def choi_action(
    choi: np.ndarray, in_dim: int, out_dim: int, mat: np.ndarray
) -> np.ndarray:
    """Action of a raw Choi matrix on an operator.

    Linear in ``choi`` with no positivity or trace assumptions, which makes
    it usable on individual Hermitian basis elements when a channel enters
    an optimization as a variable.
    """
    j4 = choi.reshape(in_dim, out_dim, in_dim, out_dim)
    return np.einsum("ij,iojp->op", mat, j4)


def choi_subsystem_action(
    choi: np.ndarray,
    in_dim: int,
    out_dim: int,
    mat: np.ndarray,
    dims,
    target: int,
) -> np.ndarray:
    """Raw-Choi counterpart of apply_on_subsystem (same linearity caveats).

    ``mat`` lives on ``dims``; the factor at ``target`` (of size in_dim)
    is replaced by the map output.
    """
    dims = _as_dims(dims)
    d_pre = int(np.prod(dims[:target], dtype=int))
    d_post = int(np.prod(dims[target + 1:], dtype=int))
    j4 = choi.reshape(in_dim, out_dim, in_dim, out_dim)
    t = mat.reshape(d_pre, in_dim, d_post, d_pre, in_dim, d_post)
    out = np.einsum("aibcjd,iejf->aebcfd", t, j4)
    return out.reshape(d_pre * out_dim * d_post, d_pre * out_dim * d_post)


def apply(ch: CompletelyPositiveMap, rho: DensityMatrix) -> DensityMatrix:
    """Apply a channel to a whole state."""
    if rho.dim != ch.in_dim:
        raise ValueError(f"state dim {rho.dim} != channel input dim {ch.in_dim}")
    out = ch.apply_matrix(rho.matrix)
    out = (out + dag(out)) / 2.0
    return DensityMatrix(ch.out_dims, out)


def apply_on_subsystem(
    ch: CompletelyPositiveMap, rho: DensityMatrix, target: int
) -> DensityMatrix:
    """Apply a channel to one tensor factor, identity on the rest.

    ``target`` is the index into ``rho.dims``; its dimension must equal
    the channel input.  The output dims replace the target factor with
    ``ch.out_dims`` in place.
    """
    n = len(rho.dims)
    if target < 0 or target >= n:
        raise ValueError(f"target {target} out of range for {n} subsystems")
    if rho.dims[target] != ch.in_dim:
        raise ValueError(
            f"subsystem dim {rho.dims[target]} != channel input dim {ch.in_dim}"
        )
    out = choi_subsystem_action(
        ch.choi, ch.in_dim, ch.out_dim, rho.matrix, rho.dims, target
    )
    out = (out + dag(out)) / 2.0
    new_dims = rho.dims[:target] + ch.out_dims + rho.dims[target + 1:]
    return DensityMatrix(new_dims, out)


def choi_from_action(
    action: Callable[[np.ndarray], np.ndarray], in_dims, out_dims
) -> np.ndarray:
    """Choi matrix of a linear map given as a callable on operators."""
    in_dims = _as_dims(in_dims)
    out_dims = _as_dims(out_dims)
    din = int(np.prod(in_dims))
    dout = int(np.prod(out_dims))
    j = np.zeros((din * dout, din * dout), dtype=complex)
    j4 = j.reshape(din, dout, din, dout)
    unit = np.zeros((din, din), dtype=complex)
    for i in range(din):
        for k in range(din):
            unit[i, k] = 1.0
            j4[i, :, k, :] = action(unit)
            unit[i, k] = 0.0
    return j


def channel_from_kraus(kraus: Sequence[np.ndarray], in_dims, out_dims) -> Channel:
    """Build a channel from Kraus operators (shape out_dim x in_dim each)."""
    in_dims = _as_dims(in_dims)
    out_dims = _as_dims(out_dims)
    din = int(np.prod(in_dims))
    dout = int(np.prod(out_dims))
    j = np.zeros((din * dout, din * dout), dtype=complex)
    for k in kraus:
        k = np.asarray(k, dtype=complex)
        if k.shape != (dout, din):
            raise ValueError(f"Kraus shape {k.shape}, expected {(dout, din)}")
        # vec with the input index slow: v[(i, o)] = K[o, i]
        v = k.T.reshape(-1)
        j += np.outer(v, v.conj())
    return Channel(in_dims, out_dims, j)


def kraus_from_choi(ch: CompletelyPositiveMap) -> list:
    """Kraus operators from the spectral decomposition of the Choi matrix."""
    vals, vecs = hermitian_eig(ch.choi)
    top = vals[0] if vals.size else 0.0
    ops = []
    for lam, v in zip(vals, vecs.T):
        if top <= 0 or lam <= SUPPORT_CUTOFF * top:
            break
        ops.append(np.sqrt(lam) * v.reshape(ch.in_dim, ch.out_dim).T)
    return ops


def stinespring(ch: Channel) -> np.ndarray:
    """Stinespring isometry V of shape (out_dim * env_dim, in_dim).

    The environment index is the fast factor of the output:
    ch(rho) = Tr_env[V rho V^dag].  env_dim equals the Choi rank.
    """
    kraus = kraus_from_choi(ch)
    env = len(kraus)
    v = np.zeros((ch.out_dim * env, ch.in_dim), dtype=complex)
    for e, k in enumerate(kraus):
        v[e::env, :] = k
    dev = max_abs(dag(v) @ v - np.eye(ch.in_dim))
    if dev > 1e-8:
        raise ValueError(f"Stinespring dilation is not an isometry ({dev:.3e})")
    return v


def dual_channel(ch: CompletelyPositiveMap) -> CompletelyPositiveMap:
    """Adjoint map with respect to the Hilbert-Schmidt inner product.

    Unital whenever ``ch`` is trace preserving; generally not trace
    preserving itself, hence returned as a plain CP map.
    """
    kraus = kraus_from_choi(ch)

    def action(x):
        return sum(dag(k) @ x @ k for k in kraus)

    j = choi_from_action(action, ch.out_dims, ch.in_dims)
    return CompletelyPositiveMap(ch.out_dims, ch.in_dims, j)


def compose(after: CompletelyPositiveMap, first: CompletelyPositiveMap):
    """The map ``rho -> after(first(rho))``."""
    if first.out_dim != after.in_dim:
        raise ValueError(
            f"cannot compose: inner output dim {first.out_dim} != "
            f"outer input dim {after.in_dim}"
        )
    j = choi_from_action(
        lambda x: after.apply_matrix(first.apply_matrix(x)),
        first.in_dims,
        after.out_dims,
    )
    cls = Channel if isinstance(first, Channel) and isinstance(after, Channel) \
        else CompletelyPositiveMap
    return cls(first.in_dims, after.out_dims, j)


def identity_channel(dims) -> Channel:
    dims = _as_dims(dims)
    d = int(np.prod(dims))
    return channel_from_kraus([np.eye(d)], dims, dims)


def trace_out_channel(dims, keep) -> Channel:
    """Partial trace over the unlisted factors, as a channel."""
    dims = _as_dims(dims)
    if np.isscalar(keep):
        keep = [keep]
    keep = sorted(set(int(k) for k in keep))
    out_dims = tuple(dims[k] for k in keep)
    j = choi_from_action(lambda x: partial_trace(x, dims, keep), dims, out_dims)
    return Channel(dims, out_dims, j)


def povm_kraus(povm: Povm) -> list:
    """Rank-one Kraus pieces |i><phi_ir| splitting each POVM element.

    Element i contributes one operator per nonzero eigenvalue r, with
    E_i = sum_r |phi_ir><phi_ir|.  Output lives in C^k, k = n_outcomes.
    """
    k = povm.n_outcomes
    ops = []
    for i, e in enumerate(povm.elements):
        vals, vecs = hermitian_eig(e)
        top = vals[0] if vals.size else 0.0
        for lam, v in zip(vals, vecs.T):
            if top <= 0 or lam <= SUPPORT_CUTOFF * top:
                break
            op = np.zeros((k, povm.dim), dtype=complex)
            op[i, :] = np.sqrt(lam) * v.conj()
            ops.append(op)
    return ops


def quantum_to_classical(povm: Povm) -> Channel:
    """Measure-and-record channel: rho -> sum_i Tr(E_i rho) |i><i|."""
    return channel_from_kraus(povm_kraus(povm), (povm.dim,), (povm.n_outcomes,))


def entanglement_breaking(povm: Povm, preps: Sequence[DensityMatrix]) -> Channel:
    """Measure-and-prepare channel: rho -> sum_i Tr(E_i rho) tau_i.

    The Choi matrix is sum_i E_i^T (x) tau_i, separable by construction.
    """
    if len(preps) != povm.n_outcomes:
        raise ValueError(
            f"{len(preps)} preparation states for {povm.n_outcomes} outcomes"
        )
    out_dims = preps[0].dims
    if any(p.dims != out_dims for p in preps):
        raise ValueError("preparation states live on different spaces")
    j = sum(
        kron(e.T, p.matrix) for e, p in zip(povm.elements, preps)
    )
    return Channel((povm.dim,), out_dims, j)


def project_to_nearest_channel(choi: np.ndarray, in_dims, out_dims) -> Channel:
    """Closest channel to an approximately CP/TP Choi matrix.

    Clips negative Choi eigenvalues, then restores trace preservation by
    the congruence J -> (T^{-1/2} (x) I) J (T^{-1/2} (x) I) with
    T = Tr_out J.  Intended for solver output.
    """
    in_dims = _as_dims(in_dims)
    out_dims = _as_dims(out_dims)
    din = int(np.prod(in_dims))
    dout = int(np.prod(out_dims))
    j = np.asarray(choi, dtype=complex)
    j = (j + dag(j)) / 2.0
    vals, vecs = hermitian_eig(j, atol=np.inf)
    vals = np.clip(vals, 0.0, None)
    j = (vecs * vals) @ dag(vecs)
    t = partial_trace(j, (din, dout), 0)
    t_isqrt = matrix_function_on_support(t, lambda x: x ** -0.5)
    if np.linalg.matrix_rank(t, tol=1e-9) < din:
        # The map is undefined on part of the input space; route the
        # missing weight through the maximally mixed output.
        proj = t_isqrt @ t @ t_isqrt
        missing = np.eye(din) - proj
        j = kron(t_isqrt, np.eye(dout)) @ j @ kron(t_isqrt, np.eye(dout))
        j = j + kron(missing, np.eye(dout) / dout)
    else:
        j = kron(t_isqrt, np.eye(dout)) @ j @ kron(t_isqrt, np.eye(dout))
    j = (j + dag(j)) / 2.0
    return Channel(in_dims, out_dims, j)
