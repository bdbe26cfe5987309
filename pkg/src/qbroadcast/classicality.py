"""Classicality structure of bipartite states and exact broadcasters.

A state can be broadcast on B by some channel iff it is classical on B
(block-diagonal in an orthonormal B basis); it can be broadcast on both
sides iff it is classical-classical.  Detection works through the frame
decomposition: the conditional states on one side commute pairwise iff
the state is classical on that side, and their common eigenbasis is the
basis a measure-and-prepare broadcaster needs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .channels import Channel, apply, apply_on_subsystem, channel_from_kraus
from .frames import build_ic_povm, decompose
from .info import mutual_information
from .linalg import dag, max_abs, trace_norm
from .states import DensityMatrix

COMMUTE_TOL = 1e-9
# conditional states carrying less weight than this are pure roundoff
WEIGHT_FLOOR = 1e-12
# spectral gaps below this trigger the joint block-diagonalization fallback
DEGENERACY_GAP = 1e-6


def commutator(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return x @ y - y @ x


def commute_test(rho: DensityMatrix, sigma: DensityMatrix, tol: float = COMMUTE_TOL):
    """Do two states commute?  Returns (flag, max-entry commutator norm)."""
    if rho.dim != sigma.dim:
        raise ValueError(f"dimension mismatch {rho.dim} != {sigma.dim}")
    norm = max_abs(commutator(rho.matrix, sigma.matrix))
    return norm < tol, norm


def common_eigenbasis(ops, rng, gap_tol: float = DEGENERACY_GAP) -> np.ndarray:
    """Common eigenbasis of a family of pairwise-commuting Hermitian ops.

    Diagonalizes a random positive mixture; if that mixture has a
    near-degenerate spectrum the basis is refined by block-diagonalizing
    the individual operators inside each degenerate eigenspace (with a
    warning, since the generic mixture should separate eigenvalues).
    """
    ops = [np.asarray(o, dtype=complex) for o in ops]
    d = ops[0].shape[0]
    coeffs = rng.uniform(0.5, 1.5, size=len(ops))
    mix = sum(c * o for c, o in zip(coeffs, ops))
    mix = (mix + dag(mix)) / 2.0
    vals, vecs = np.linalg.eigh(mix)
    # cluster eigenvalues into degenerate groups
    scale = max(1.0, float(np.abs(vals).max()))
    blocks = []
    start = 0
    for i in range(1, d + 1):
        if i == d or vals[i] - vals[i - 1] > gap_tol * scale:
            blocks.append(list(range(start, i)))
            start = i
    if all(len(b) == 1 for b in blocks):
        return vecs
    warnings.warn(
        "generic mixture has a near-degenerate spectrum; refining the "
        "common eigenbasis by joint block diagonalization",
        RuntimeWarning,
    )
    basis = vecs.copy()
    for op in ops:
        new_blocks = []
        for block in blocks:
            if len(block) == 1:
                new_blocks.append(block)
                continue
            sub = basis[:, block]
            inner = dag(sub) @ op @ sub
            inner = (inner + dag(inner)) / 2.0
            ivals, ivecs = np.linalg.eigh(inner)
            basis[:, block] = sub @ ivecs
            # split the block wherever this operator separates eigenvalues
            iscale = max(1.0, float(np.abs(ivals).max()))
            sub_start = 0
            for k in range(1, len(block) + 1):
                if k == len(block) or ivals[k] - ivals[k - 1] > gap_tol * iscale:
                    new_blocks.append(block[sub_start:k])
                    sub_start = k
        blocks = new_blocks
    return basis


@dataclass(frozen=True, eq=False)
class ClassicalityVerdict:
    """Which sides of a bipartite state are classical.

    ``witness_a``/``witness_b`` are the largest pairwise commutator
    spectral norms over the conditional-state family of the respective
    side; a side is classical iff its witness is below tolerance.
    ``basis_a``/``basis_b`` hold the common eigenbases (columns) when the
    corresponding side is classical, else None.
    """

    classical_on_a: bool
    classical_on_b: bool
    witness_a: float
    witness_b: float
    basis_a: np.ndarray | None
    basis_b: np.ndarray | None

    @property
    def classical_classical(self) -> bool:
        return self.classical_on_a and self.classical_on_b

    @property
    def witness(self) -> float:
        return max(self.witness_a, self.witness_b)


def _side_witness(rho: DensityMatrix, measured: int, tol, seed):
    """Conditional states from an IC-POVM on ``measured``; max pairwise
    spectral-norm commutator and (if commuting) their common basis."""
    ic = build_ic_povm(rho.dims[measured], seed=seed)
    dec = decompose(rho, ic, measured=measured)
    supported = [
        c.matrix for w, c in zip(dec.weights, dec.cond_states) if w > WEIGHT_FLOOR
    ]
    witness = 0.0
    for i in range(len(supported)):
        for j in range(i + 1, len(supported)):
            norm = float(
                np.linalg.norm(commutator(supported[i], supported[j]), ord=2)
            )
            witness = max(witness, norm)
    basis = None
    if witness < tol:
        rng = np.random.default_rng(seed + 1)
        basis = common_eigenbasis(supported, rng)
    return witness, basis


def classify(
    rho: DensityMatrix, tol: float = COMMUTE_TOL, seed: int = 7
) -> ClassicalityVerdict:
    """Detect on which sides a bipartite state is classical.

    The A-side verdict comes from the conditional states left on A by an
    informationally complete POVM on B, and vice versa.
    """
    if len(rho.dims) != 2:
        raise ValueError(f"need a bipartite state, got dims {rho.dims}")
    witness_b, basis_b = _side_witness(rho, 0, tol, seed)
    witness_a, basis_a = _side_witness(rho, 1, tol, seed)
    return ClassicalityVerdict(
        classical_on_a=witness_a < tol,
        classical_on_b=witness_b < tol,
        witness_a=witness_a,
        witness_b=witness_b,
        basis_a=basis_a,
        basis_b=basis_b,
    )


def basis_broadcaster(basis: np.ndarray, copies: int = 2) -> Channel:
    """Measure in an orthonormal basis, then prepare ``copies`` copies.

    Broadcasts exactly every state diagonal in ``basis``; anything else
    is dephased.
    """
    basis = np.asarray(basis, dtype=complex)
    d = basis.shape[0]
    if basis.shape != (d, d) or max_abs(dag(basis) @ basis - np.eye(d)) > 1e-10:
        raise ValueError("basis columns are not orthonormal within 1e-10")
    kraus = []
    for i in range(d):
        ket = basis[:, i]
        out = ket
        for _ in range(copies - 1):
            out = np.kron(out, ket)
        kraus.append(np.outer(out, ket.conj()))
    return channel_from_kraus(kraus, (d,), (d,) * copies)


def verify_broadcast(rho: DensityMatrix, ch: Channel):
    """Trace-norm residuals of both output marginals against the input.

    ``ch`` must map the state's space to two copies of it.
    """
    if ch.out_dims != (rho.dim, rho.dim):
        raise ValueError(
            f"channel output dims {ch.out_dims} are not two copies of {rho.dim}"
        )
    out = apply(ch, rho.regroup((rho.dim,)))
    return tuple(
        trace_norm(out.marginal(i).matrix - rho.matrix) for i in (0, 1)
    )


def verify_unilocal_broadcast(rho: DensityMatrix, ch: Channel):
    """Residuals ||rho~_{A B_i} - rho_AB||_1 for a B -> B1 B2 channel."""
    if len(rho.dims) != 2:
        raise ValueError(f"need a bipartite state, got dims {rho.dims}")
    if len(ch.out_dims) != 2 or ch.out_dims != (rho.dims[1],) * 2:
        raise ValueError(
            f"channel must map B to two copies of B, got {ch.out_dims}"
        )
    out = apply_on_subsystem(ch, rho, 1)  # dims (A, B1, B2)
    return tuple(
        trace_norm(out.marginal([0, k]).matrix - rho.matrix) for k in (1, 2)
    )


def verify_local_broadcast(rho: DensityMatrix, ch_a: Channel, ch_b: Channel):
    """Residuals ||rho~_{A_i B_i} - rho_AB||_1 for two-sided broadcasting."""
    if len(rho.dims) != 2:
        raise ValueError(f"need a bipartite state, got dims {rho.dims}")
    if ch_a.out_dims != (rho.dims[0],) * 2:
        raise ValueError(f"A-side channel output dims {ch_a.out_dims} invalid")
    if ch_b.out_dims != (rho.dims[1],) * 2:
        raise ValueError(f"B-side channel output dims {ch_b.out_dims} invalid")
    out = apply_on_subsystem(ch_a, rho, 0)  # (A1, A2, B)
    out = apply_on_subsystem(ch_b, out, 2)  # (A1, A2, B1, B2)
    return tuple(
        trace_norm(out.marginal([a, b]).matrix - rho.matrix)
        for a, b in ((0, 2), (1, 3))
    )


def broadcast_mi_check(rho: DensityMatrix, ch_b: Channel):
    """Mutual informations I(A:B_1), I(A:B_2) after a B-side broadcaster.

    Exact unilocal broadcasting forces both to equal I(A:B); the deficit
    is strictly positive for non-classical states.
    """
    out = apply_on_subsystem(ch_b, rho, 1)
    return tuple(
        mutual_information(out.marginal([0, k])) for k in (1, 2)
    )
