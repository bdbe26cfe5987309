"""Petz recovery maps and recoverability of tripartite correlations.

The central objects: the Petz (transpose) recovery map of a channel with
respect to a reference state, the fidelity of recovering a tripartite
state from its AB marginal by acting on B alone, and the SDP that
maximizes that fidelity over all recovery channels.  Small conditional
mutual information certifies good recoverability: the optimal fidelity is
at least 2^(-cmi/2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import (
    Channel,
    apply,
    apply_on_subsystem,
    choi_subsystem_action,
    choi_action,
    kraus_from_choi,
    channel_from_kraus,
    project_to_nearest_channel,
    trace_out_channel,
)
from .info import conditional_mutual_information, fidelity, relative_entropy
from .linalg import (
    SUPPORT_CUTOFF,
    dag,
    hermitian_eig,
    kron,
    matrix_function_on_support,
    support_projector,
    trace_norm,
)
from .sdp import (
    AffineMatrixExpr,
    SdpBuilder,
    fidelity_sdp,
    hermitian_basis,
    solution_diagnostics,
    solve,
)
from .states import DensityMatrix

FIDELITY_CLIP = 1e-6


@dataclass(frozen=True)
class RecoveryReport:
    """Recoverability summary for one tripartite state."""

    cmi: float
    petz_fidelity: float
    optimal_fidelity: float
    bound: float
    sigma_recovery_residual: float


@dataclass(frozen=True)
class MonotonicityReport:
    """Relative-entropy drop under a channel and how well recovery does."""

    drop: float
    petz_fidelity: float
    optimal_fidelity: float
    bound: float
    petz_meets_bound: bool
    optimal_meets_bound: bool


def petz_map(sigma: DensityMatrix, channel: Channel) -> Channel:
    """Recovery channel sigma^1/2 ch^dag((ch sigma)^-1/2 . (ch sigma)^-1/2) sigma^1/2.

    Exactly recovers ``sigma`` from its image.  Inputs supported outside
    the image's support are routed to ``sigma`` itself, which completes
    the map to a total channel without affecting any input state whose
    support lies inside supp(channel(sigma)).
    """
    if channel.in_dim != sigma.dim:
        raise ValueError(
            f"channel input dim {channel.in_dim} != state dim {sigma.dim}"
        )
    image = apply(channel, sigma).matrix
    sqrt_sigma = matrix_function_on_support(sigma.matrix, np.sqrt)
    inv_sqrt_image = matrix_function_on_support(
        image, lambda x: 1.0 / np.sqrt(x)
    )
    kraus = [
        sqrt_sigma @ dag(k) @ inv_sqrt_image
        for k in kraus_from_choi(channel)
    ]

    vals, vecs = hermitian_eig(image)
    top = vals[0] if vals.size else 0.0
    kernel = [
        vecs[:, idx]
        for idx, lam in enumerate(vals)
        if top <= 0 or lam <= SUPPORT_CUTOFF * top
    ]
    svals, svecs = hermitian_eig(sigma.matrix)
    stop = svals[0]
    for w in kernel:
        for s, u in zip(svals, svecs.T):
            if s <= SUPPORT_CUTOFF * stop:
                break
            kraus.append(np.sqrt(s) * np.outer(u, w.conj()))
    return channel_from_kraus(kraus, channel.out_dims, sigma.dims)


def _require_tripartite(rho: DensityMatrix):
    if len(rho.dims) != 3:
        raise ValueError(f"expected three subsystems, got dims {rho.dims}")


def petz_recovery_map(rho_abc: DensityMatrix) -> Channel:
    """Transpose channel rebuilding BC from B, built from the BC marginal."""
    _require_tripartite(rho_abc)
    _, d_b, d_c = rho_abc.dims
    rho_bc = rho_abc.marginal((1, 2))
    return petz_map(rho_bc, trace_out_channel((d_b, d_c), keep=(0,)))


def petz_recovery_fidelity(rho_abc: DensityMatrix) -> float:
    """Fidelity of Petz-recovering the full state from its AB marginal."""
    _require_tripartite(rho_abc)
    recovery = petz_recovery_map(rho_abc)
    rho_ab = rho_abc.marginal((0, 1))
    rebuilt = apply_on_subsystem(recovery, rho_ab, target=1)
    return fidelity(rho_abc, rebuilt)


def optimal_recovery_fidelity(
    rho_abc: DensityMatrix,
    tol: float = 1e-7,
    max_iters: int = 500,
    diagnostics: dict | None = None,
) -> tuple[float, Channel]:
    """Best achievable F(rho_ABC, (id_A x R)(rho_AB)) over channels R: B->BC.

    Solved as an SDP over the Choi matrix of R, with the rebuilt state
    entering the fidelity block as an affine expression.  Returns the
    optimum and an optimal recovery channel.  A ``diagnostics`` dict, if
    given, is filled with solver status, iterations and residuals.
    """
    _require_tripartite(rho_abc)
    d_a, d_b, d_c = rho_abc.dims
    d_bc = d_b * d_c
    rho_ab = rho_abc.marginal((0, 1))

    builder = SdpBuilder()
    j_blk = builder.add_block(d_b * d_bc)
    for h in hermitian_basis(d_b):
        builder.add_constraint(
            {j_blk: kron(h, np.eye(d_bc, dtype=complex))},
            float(np.trace(h).real),
        )

    def rebuild(choi):
        return choi_subsystem_action(
            choi, d_b, d_bc, rho_ab.matrix, rho_ab.dims, 1
        )

    support_bound = kron(
        support_projector(rho_abc.marginal((0,)).matrix),
        np.eye(d_bc, dtype=complex),
    )
    expr = AffineMatrixExpr(
        side=rho_abc.dim,
        const=np.zeros((rho_abc.dim, rho_abc.dim), dtype=complex),
        terms=((j_blk, rebuild),),
    )
    fidelity_sdp(builder, rho_abc.matrix, expr, sigma_support=support_bound)

    solution = solve(builder.build(), tol=tol, max_iters=max_iters)
    if diagnostics is not None:
        diagnostics.update(solution_diagnostics(solution))
    if solution.status == "infeasible":
        raise RuntimeError("recovery SDP reported infeasible")
    value = float(min(max(solution.primal_value, 0.0), 1.0))
    channel = project_to_nearest_channel(
        solution.primal_blocks[j_blk], (d_b,), (d_b, d_c)
    )
    return value, channel


def recovery_report(
    rho_abc: DensityMatrix,
    tol: float = 1e-7,
    max_iters: int = 500,
    diagnostics: dict | None = None,
) -> RecoveryReport:
    """Full recoverability diagnostics for a tripartite state."""
    _require_tripartite(rho_abc)
    cmi = conditional_mutual_information(rho_abc, side_a=(0,), side_c=(2,))
    petz = petz_recovery_map(rho_abc)
    rho_b = rho_abc.marginal((1,))
    rho_bc = rho_abc.marginal((1, 2))
    residual = trace_norm(apply(petz, rho_b).matrix - rho_bc.matrix)
    optimal, _ = optimal_recovery_fidelity(
        rho_abc, tol=tol, max_iters=max_iters, diagnostics=diagnostics
    )
    return RecoveryReport(
        cmi=cmi,
        petz_fidelity=petz_recovery_fidelity(rho_abc),
        optimal_fidelity=optimal,
        bound=float(2.0 ** (-max(cmi, 0.0) / 2.0)),
        sigma_recovery_residual=float(residual),
    )


def optimal_fixing_recovery_fidelity(
    rho: DensityMatrix,
    sigma: DensityMatrix,
    channel: Channel,
    tol: float = 1e-7,
    max_iters: int = 500,
) -> float:
    """Best F(rho, R(channel(rho))) over channels R with R(channel(sigma)) = sigma."""
    image_rho = apply(channel, rho).matrix
    image_sigma = apply(channel, sigma).matrix
    d_in, d_out = channel.out_dim, sigma.dim

    builder = SdpBuilder()
    j_blk = builder.add_block(d_in * d_out)
    for h in hermitian_basis(d_in):
        builder.add_constraint(
            {j_blk: kron(h, np.eye(d_out, dtype=complex))},
            float(np.trace(h).real),
        )
    # sigma-fixing: <H, R(image_sigma)> = <H, sigma> for a Hermitian basis,
    # with the left side rewritten as <conj(image_sigma) x H, J>
    for h in hermitian_basis(d_out):
        builder.add_constraint(
            {j_blk: kron(image_sigma.conj(), h)},
            float(np.trace(h @ sigma.matrix).real),
        )

    expr = AffineMatrixExpr(
        side=d_out,
        const=np.zeros((d_out, d_out), dtype=complex),
        terms=((j_blk, lambda e: choi_action(e, d_in, d_out, image_rho)),),
    )
    fidelity_sdp(builder, rho.matrix, expr, sigma_support=sigma.matrix)
    solution = solve(builder.build(), tol=tol, max_iters=max_iters)
    if solution.status == "infeasible":
        raise RuntimeError("sigma-fixing recovery SDP reported infeasible")
    return float(min(max(solution.primal_value, 0.0), 1.0))


def relative_entropy_recovery_check(
    rho: DensityMatrix,
    sigma: DensityMatrix,
    channel: Channel,
    slack: float = FIDELITY_CLIP,
) -> MonotonicityReport:
    """Relative-entropy loss under a channel versus recovery fidelities.

    Computes drop = S(rho||sigma) - S(channel(rho)||channel(sigma)), the
    Petz recovery fidelity for rho, and the SDP optimum over all channels
    that send channel(sigma) back to sigma.  The optimum must reach
    2^(-drop/2); the plain Petz map is only reported against that bound.
    """
    rel_before = relative_entropy(rho, sigma)
    if not np.isfinite(rel_before):
        raise ValueError(
            "support violation: supp(rho) is not contained in supp(sigma)"
        )
    rel_after = relative_entropy(apply(channel, rho), apply(channel, sigma))
    drop = rel_before - rel_after

    petz = petz_map(sigma, channel)
    petz_fid = fidelity(rho, apply(petz, apply(channel, rho)))
    optimal = optimal_fixing_recovery_fidelity(rho, sigma, channel)
    bound = float(2.0 ** (-max(drop, 0.0) / 2.0))
    return MonotonicityReport(
        drop=float(drop),
        petz_fidelity=float(petz_fid),
        optimal_fidelity=float(optimal),
        bound=bound,
        petz_meets_bound=bool(petz_fid >= bound - slack),
        optimal_meets_bound=bool(optimal >= bound - slack),
    )
