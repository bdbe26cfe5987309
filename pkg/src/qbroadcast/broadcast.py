"""Approximate broadcasting: optimal fidelities, discord, and MI loss.

Three quantifiers of how well one side of a bipartite state can be
copied:

* ``f_max_broadcast`` — best fidelity between the state and either output
  of a symmetric one-to-two channel on B, computed as an SDP over the
  channel's Choi matrix.
* ``f_eb`` — the same question restricted to entanglement-breaking
  channels, imposed as positivity of the partially transposed Choi
  (exact for a qubit B side, a relaxation above that), cross-checked
  from below by an explicit measure-and-prepare search.
* ``discord`` — mutual information lost by the best measurement on one
  side, found by multi-start coordinate ascent over rank-one POVMs.

The three obey f_max >= f_eb and discord >= -2 log2 f_eb, which
``broadcast_report`` assembles into one record.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .channels import (
    Channel,
    apply_on_subsystem,
    channel_from_kraus,
    choi_subsystem_action,
    project_to_nearest_channel,
)
from .classicality import ClassicalityVerdict, classify
from .frames import build_ic_povm
from .info import entropy, mutual_information
from .linalg import (
    SUPPORT_CUTOFF,
    dag,
    hermitian_eig,
    kron,
    matrix_function_on_support,
    partial_trace,
    support_projector,
)
from .sdp import (
    AffineMatrixExpr,
    SdpBuilder,
    fidelity_sdp,
    hermitian_basis,
    solution_diagnostics,
    solve,
)
from .states import DensityMatrix, Povm

MAX_BROADCAST_DIM = 4
CONVERGENCE_WINDOW = 1e-6
SWEEP_GAIN_FLOOR = 1e-10
MAX_SWEEPS = 40


@dataclass(frozen=True)
class DiscordResult:
    """Outcome of the measured-mutual-information maximization."""

    value: float
    best_povm: Povm
    classical_mi: float
    restarts: int
    converged: bool


@dataclass(frozen=True)
class EbDetail:
    """Entanglement-breaking fidelity with its certification status."""

    value: float
    lower_bound: float
    eb_exact: bool


@dataclass(frozen=True, eq=False)
class BroadcastReport:
    """All broadcastability quantifiers of one state, side B."""

    f_max: float
    f_eb: float
    discord_bound_eb: float
    discord_bound_max: float
    discord: DiscordResult
    exact: ClassicalityVerdict
    eb_exact: bool


def _require_bipartite(rho: DensityMatrix):
    if len(rho.dims) != 2:
        raise ValueError(f"expected two subsystems, got dims {rho.dims}")


def _swap_sides(rho: DensityMatrix) -> DensityMatrix:
    d0, d1 = rho.dims
    mat = (
        rho.matrix.reshape(d0, d1, d0, d1)
        .transpose(1, 0, 3, 2)
        .reshape(rho.dim, rho.dim)
    )
    return DensityMatrix((d1, d0), mat, rho.label)


# ---------------------------------------------------------------------------
# discord via rank-one POVM ascent


def _classical_mi_stack(rho4, s_keep: float, v_stack: np.ndarray) -> np.ndarray:
    """I(A:B') after measuring side B with rank-one POVMs.

    ``v_stack`` has shape (r, k, d_B): r candidate POVMs, each with k
    outcomes given by rows w (element = outer(conj(w), w)).  Uses
    I = S(A) + H(p) - sum_i S_raw(A_i) with A_i the unnormalized
    conditional states on A, which is smooth through zero-weight outcomes.
    """
    elements = np.einsum("ria,rib->riab", v_stack.conj(), v_stack)
    cond = np.einsum("abcd,ridb->riac", rho4, elements)
    weights = np.einsum("riaa->ri", cond).real
    spectra = np.clip(np.linalg.eigvalsh(cond), 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        ent_terms = np.where(spectra > 0, -spectra * np.log2(spectra), 0.0)
        weight_terms = np.where(
            weights > 0, -weights * np.log2(weights), 0.0
        )
    return s_keep + weight_terms.sum(axis=1) - ent_terms.sum(axis=(1, 2))


def _projective_rows(basis: np.ndarray, k: int) -> np.ndarray:
    """Isometry rows for a projective measurement, zero-padded to k."""
    d = basis.shape[0]
    rows = np.zeros((k, d), dtype=complex)
    rows[:d] = basis.T.conj()
    return rows


def _povm_rows(povm: Povm, k: int) -> np.ndarray | None:
    """Rows reproducing a rank-one POVM, or None if any element isn't."""
    rows = []
    for e in povm.elements:
        vals, vecs = hermitian_eig(e)
        if vals.size and vals[0] > 0 and (vals[1:] > 1e-10 * vals[0]).any():
            return None
        if vals.size and vals[0] > 0:
            rows.append(np.sqrt(vals[0]) * vecs[:, 0].conj())
        else:
            rows.append(np.zeros(e.shape[0], dtype=complex))
    if len(rows) > k:
        return None
    out = np.zeros((k, povm.dim), dtype=complex)
    out[: len(rows)] = rows
    return out


def discord(
    rho: DensityMatrix,
    side: str = "B",
    seed: int = 0,
    restarts: int = 32,
    outcomes: int | None = None,
) -> DiscordResult:
    """Quantum discord with measurement on the given side ("A" or "B").

    Maximizes I(A:B') over rank-one POVMs with up to d^2 outcomes by
    multi-start coordinate ascent on the unitary acting on an outcome
    isometry; the reported value is the MI gap and is a certified upper
    bound on nothing — only a lower bound on the true discord is implied
    by any feasible measurement, so convergence across restarts is
    reported explicitly.
    """
    _require_bipartite(rho)
    side = side.upper()
    if side not in ("A", "B"):
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    work = rho if side == "B" else _swap_sides(rho)
    d_keep, d_meas = work.dims
    k = outcomes if outcomes is not None else d_meas * d_meas
    if k < d_meas:
        raise ValueError(f"need at least {d_meas} outcomes, got {k}")

    rho4 = work.matrix.reshape(d_keep, d_meas, d_keep, d_meas)
    s_keep = entropy(work.marginal((0,)))
    quantum_mi = mutual_information(work, (0,))

    def score(v_stack):
        return _classical_mi_stack(rho4, s_keep, v_stack)

    rng = np.random.default_rng(seed)
    starts = []
    marg_basis = hermitian_eig(work.marginal((1,)).matrix).vectors
    starts.append(_projective_rows(marg_basis, k))
    starts.append(_projective_rows(np.eye(d_meas, dtype=complex), k))
    verdict = classify(work)
    if verdict.basis_b is not None:
        starts.append(_projective_rows(verdict.basis_b, k))
    ic_rows = _povm_rows(build_ic_povm(d_meas).povm, k)
    if ic_rows is not None:
        starts.append(ic_rows)
    while len(starts) < max(restarts, 1):
        g = rng.normal(size=(k, d_meas)) + 1j * rng.normal(size=(k, d_meas))
        q, _ = np.linalg.qr(g)
        starts.append(q[:, :d_meas] if k >= d_meas else q)
    starts = starts[: max(restarts, 1)]

    gens = [np.linalg.eigh(g) for g in hermitian_basis(k)]
    coarse = np.linspace(-np.pi, np.pi, 17)

    def rotate(gen, ts, v):
        gvals, gvecs = gen
        phases = np.exp(1j * np.outer(ts, gvals))
        u = np.einsum("ab,tb,cb->tac", gvecs, phases, gvecs.conj())
        return u @ v

    results = []
    for v in starts:
        best = float(score(v[None])[0])
        for _ in range(MAX_SWEEPS):
            sweep_gain = 0.0
            for gen in gens:
                grid = rotate(gen, coarse, v)
                vals = score(grid)
                pick = int(np.argmax(vals))
                t_best, val_best = coarse[pick], float(vals[pick])
                h = coarse[1] - coarse[0]
                res = minimize_scalar(
                    lambda t: -float(score(rotate(gen, np.array([t]), v))[0]),
                    bounds=(t_best - h, t_best + h),
                    method="bounded",
                    options={"xatol": 1e-9},
                )
                if -res.fun > val_best:
                    t_best, val_best = float(res.x), float(-res.fun)
                if val_best > best + 1e-13:
                    sweep_gain += val_best - best
                    best = val_best
                    v = rotate(gen, np.array([t_best]), v)[0]
            if sweep_gain < SWEEP_GAIN_FLOOR:
                break
        results.append((best, v))

    results.sort(key=lambda item: item[0], reverse=True)
    classical_mi, v_best = results[0]
    converged = len(results) >= 2 and (
        results[0][0] - results[1][0] <= CONVERGENCE_WINDOW
    )
    # polish away rotation roundoff so the POVM sums to the identity exactly
    gram = dag(v_best) @ v_best
    v_best = v_best @ matrix_function_on_support(gram, lambda x: 1 / np.sqrt(x))
    elements = [
        np.outer(row.conj(), row) for row in v_best
    ]
    best_povm = Povm(tuple(elements))
    return DiscordResult(
        value=float(quantum_mi - classical_mi),
        best_povm=best_povm,
        classical_mi=float(classical_mi),
        restarts=len(starts),
        converged=bool(converged),
    )


# ---------------------------------------------------------------------------
# broadcast-fidelity SDPs


def _swap_operator(d: int) -> np.ndarray:
    s = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            s[j * d + i, i * d + j] = 1.0
    return s


def _swap_antisymmetric_basis(d: int) -> list:
    """Hermitian basis of the Choi subspace flipped by swapping outputs.

    Conjugation by I_B x S is an involution; its -1 Hermitian eigenspace
    is spanned by |a><b| + |b><a| and i|a><b| - i|b><a| with a from the
    +1 and b from the -1 eigenvectors of I_B x S.  Constraining these
    components to zero enforces output-swap covariance of the channel.
    """
    plus, minus = [], []
    for i in range(d):
        for j in range(d):
            vec = np.zeros(d * d, dtype=complex)
            if i == j:
                vec[i * d + i] = 1.0
                plus.append(vec)
            elif i < j:
                vec[i * d + j] = vec[j * d + i] = 1.0 / np.sqrt(2)
                plus.append(vec.copy())
                anti = np.zeros(d * d, dtype=complex)
                anti[i * d + j] = 1.0 / np.sqrt(2)
                anti[j * d + i] = -1.0 / np.sqrt(2)
                minus.append(anti)
    out = []
    for e_in in range(d):
        base_in = np.zeros(d, dtype=complex)
        base_in[e_in] = 1.0
        for f_in in range(d):
            base_f = np.zeros(d, dtype=complex)
            base_f[f_in] = 1.0
            for a in plus:
                for b in minus:
                    ka = np.kron(base_in, a)
                    kb = np.kron(base_f, b)
                    h = np.outer(ka, kb.conj())
                    out.append((h + dag(h)) / np.sqrt(2))
                    out.append((1j * h + dag(1j * h)) / np.sqrt(2))
    return out


def f_max_broadcast(
    rho: DensityMatrix,
    tol: float = 1e-7,
    max_iters: int = 500,
    diagnostics: dict | None = None,
) -> tuple[float, Channel]:
    """Best single-output fidelity of a symmetric one-to-two broadcast of B.

    Optimizes over Choi matrices of channels B -> B1 B2 that commute with
    swapping the outputs; by that symmetry both output marginals agree,
    so the objective is F(rho_AB, Tr_B1[(id x ch)(rho_AB)]).  Returns the
    certified optimum and an optimal channel.  A ``diagnostics`` dict, if
    given, is filled with solver status, iterations and residuals.
    """
    _require_bipartite(rho)
    d_a, d_b = rho.dims
    if d_b > MAX_BROADCAST_DIM:
        raise ValueError(
            f"B dimension {d_b} too large for the broadcast SDP "
            f"(limit {MAX_BROADCAST_DIM})"
        )
    d_out = d_b * d_b

    builder = SdpBuilder()
    j_blk = builder.add_block(d_b * d_out)
    for h in hermitian_basis(d_b):
        builder.add_constraint(
            {j_blk: kron(h, np.eye(d_out, dtype=complex))},
            float(np.trace(h).real),
        )
    for h in _swap_antisymmetric_basis(d_b):
        builder.add_constraint({j_blk: h}, 0.0)

    full_dims = (d_a, d_b, d_b)

    def one_output(choi):
        both = choi_subsystem_action(
            choi, d_b, d_out, rho.matrix, rho.dims, 1
        )
        return partial_trace(both, full_dims, keep=(0, 2))

    support_bound = kron(
        support_projector(rho.marginal((0,)).matrix),
        np.eye(d_b, dtype=complex),
    )
    expr = AffineMatrixExpr(
        side=rho.dim,
        const=np.zeros((rho.dim, rho.dim), dtype=complex),
        terms=((j_blk, one_output),),
    )
    fidelity_sdp(builder, rho.matrix, expr, sigma_support=support_bound)

    solution = solve(builder.build(), tol=tol, max_iters=max_iters)
    if diagnostics is not None:
        diagnostics.update(solution_diagnostics(solution))
    if solution.status == "infeasible":
        raise RuntimeError("broadcast SDP reported infeasible")
    value = float(min(max(solution.primal_value, 0.0), 1.0))
    channel = project_to_nearest_channel(
        solution.primal_blocks[j_blk], (d_b,), (d_b, d_b)
    )
    return value, channel


def _partial_transpose_output(mat: np.ndarray, din: int, dout: int) -> np.ndarray:
    four = mat.reshape(din, dout, din, dout)
    return four.transpose(0, 3, 2, 1).reshape(din * dout, din * dout)


def f_eb_detailed(
    rho: DensityMatrix,
    tol: float = 1e-7,
    max_iters: int = 500,
    rounds: int = 2,
    init_povm: Povm | None = None,
    diagnostics: dict | None = None,
) -> EbDetail:
    """Entanglement-breaking broadcast fidelity of side B.

    The main value is an SDP over Choi matrices with positive partial
    transpose — exactly the EB set for a qubit B, a superset (hence an
    upper bound on the fidelity) in higher dimension, reported via
    ``eb_exact``.  An explicit measure-and-prepare ascent provides the
    matching achievable value from below.
    """
    _require_bipartite(rho)
    d_a, d_b = rho.dims
    side = d_b * d_b

    builder = SdpBuilder()
    j_blk = builder.add_block(side)
    pt_blk = builder.add_block(side)
    for h in hermitian_basis(d_b):
        builder.add_constraint(
            {j_blk: kron(h, np.eye(d_b, dtype=complex))},
            float(np.trace(h).real),
        )
    # tie the second block to the output partial transpose of the first;
    # PT is self-adjoint, so <H, PT(J)> = <PT(H), J>
    for h in hermitian_basis(side):
        builder.add_constraint(
            {
                pt_blk: h,
                j_blk: -_partial_transpose_output(h, d_b, d_b),
            },
            0.0,
        )

    def one_output(choi):
        return choi_subsystem_action(
            choi, d_b, d_b, rho.matrix, rho.dims, 1
        )

    support_bound = kron(
        support_projector(rho.marginal((0,)).matrix),
        np.eye(d_b, dtype=complex),
    )
    expr = AffineMatrixExpr(
        side=rho.dim,
        const=np.zeros((rho.dim, rho.dim), dtype=complex),
        terms=((j_blk, one_output),),
    )
    fidelity_sdp(builder, rho.matrix, expr, sigma_support=support_bound)
    solution = solve(builder.build(), tol=tol, max_iters=max_iters)
    if diagnostics is not None:
        diagnostics.update(solution_diagnostics(solution))
    if solution.status == "infeasible":
        raise RuntimeError("EB broadcast SDP reported infeasible")
    value = float(min(max(solution.primal_value, 0.0), 1.0))

    lower = _measure_prepare_ascent(
        rho, rounds=rounds, tol=tol, max_iters=max_iters, init_povm=init_povm
    )
    return EbDetail(
        value=value, lower_bound=lower, eb_exact=bool(d_b == 2)
    )


def f_eb(rho: DensityMatrix, tol: float = 1e-7, max_iters: int = 500) -> float:
    """Entanglement-breaking broadcast fidelity (see f_eb_detailed)."""
    return f_eb_detailed(rho, tol=tol, max_iters=max_iters).value


def _measure_prepare_ascent(
    rho: DensityMatrix,
    rounds: int,
    tol: float,
    max_iters: int,
    init_povm: Povm | None,
) -> float:
    """Alternating SDP over measure-and-prepare channels, from below.

    A measure-and-prepare channel acts as X -> sum_i Tr(E_i X) tau_i.
    With either factor fixed the output is affine in the other, so each
    half-step is a fidelity SDP; the value climbs monotonically.
    """
    d_a, d_b = rho.dims
    k = d_b * d_b
    rho4 = rho.matrix.reshape(d_a, d_b, d_a, d_b)
    povm = init_povm if init_povm is not None else build_ic_povm(d_b).povm
    if povm.n_outcomes > k:
        k = povm.n_outcomes
    elements = list(povm.elements) + [
        np.zeros((d_b, d_b), dtype=complex)
    ] * (k - povm.n_outcomes)

    def conditionals(els):
        return [
            np.einsum("abcd,db->ac", rho4, e) for e in els
        ]

    preps = None
    best = 0.0
    for _ in range(rounds):
        # optimize preparations for the current measurement
        conds = conditionals(elements)
        builder = SdpBuilder()
        blocks = [builder.add_block(d_b) for _ in range(k)]
        for blk in blocks:
            builder.add_constraint(
                {blk: np.eye(d_b, dtype=complex)}, 1.0
            )
        terms = tuple(
            (blk, (lambda e, c=cond: np.kron(c, e)))
            for blk, cond in zip(blocks, conds)
        )
        expr = AffineMatrixExpr(
            side=rho.dim,
            const=np.zeros((rho.dim, rho.dim), dtype=complex),
            terms=terms,
        )
        bound = kron(
            support_projector(rho.marginal((0,)).matrix),
            np.eye(d_b, dtype=complex),
        )
        fidelity_sdp(builder, rho.matrix, expr, sigma_support=bound)
        sol = solve(builder.build(), tol=tol, max_iters=max_iters)
        best = max(best, float(sol.primal_value))
        preps = [
            _nearest_unit_trace_state(sol.primal_blocks[blk]) for blk in blocks
        ]

        # optimize the measurement for the current preparations
        builder = SdpBuilder()
        blocks = [builder.add_block(d_b) for _ in range(k)]
        for h in hermitian_basis(d_b):
            builder.add_constraint(
                {blk: h for blk in blocks}, float(np.trace(h).real)
            )
        terms = tuple(
            (
                blk,
                (
                    lambda e, t=tau: np.kron(
                        np.einsum("abcd,db->ac", rho4, e), t
                    )
                ),
            )
            for blk, tau in zip(blocks, preps)
        )
        expr = AffineMatrixExpr(
            side=rho.dim,
            const=np.zeros((rho.dim, rho.dim), dtype=complex),
            terms=terms,
        )
        prep_span = support_projector(sum(preps))
        bound = kron(
            support_projector(rho.marginal((0,)).matrix), prep_span
        )
        fidelity_sdp(builder, rho.matrix, expr, sigma_support=bound)
        sol = solve(builder.build(), tol=tol, max_iters=max_iters)
        best = max(best, float(sol.primal_value))
        elements = [
            _nearest_psd(sol.primal_blocks[blk]) for blk in blocks
        ]
    return float(min(max(best, 0.0), 1.0))


def _nearest_psd(mat: np.ndarray) -> np.ndarray:
    vals, vecs = hermitian_eig(mat)
    vals = np.clip(vals, 0.0, None)
    return (vecs * vals) @ dag(vecs)


def _nearest_unit_trace_state(mat: np.ndarray) -> np.ndarray:
    psd = _nearest_psd(mat)
    tr = np.trace(psd).real
    if tr <= 0:
        return np.eye(mat.shape[0], dtype=complex) / mat.shape[0]
    return psd / tr


# ---------------------------------------------------------------------------
# measurement-copy broadcasting and the MI-loss functional


def measurement_copy_broadcaster(
    povm: Povm, copies: int, prep_basis: np.ndarray | None = None
) -> Channel:
    """Measure, then write the outcome into ``copies`` classical registers.

    Each output register carries the outcome in ``prep_basis``
    (computational basis of dimension n_outcomes by default), so every
    single-register marginal equals the plain measurement channel output.
    """
    if copies < 1:
        raise ValueError(f"copies must be >= 1, got {copies}")
    k = povm.n_outcomes
    if prep_basis is None:
        prep_basis = np.eye(k, dtype=complex)
    prep_basis = np.asarray(prep_basis, dtype=complex)
    gram = dag(prep_basis) @ prep_basis
    if np.abs(gram - np.eye(prep_basis.shape[1])).max() > 1e-10:
        raise ValueError("prep basis columns must be orthonormal")
    if prep_basis.shape[1] < k:
        raise ValueError(
            f"need {k} prep vectors, got {prep_basis.shape[1]}"
        )

    d_reg = prep_basis.shape[0]
    kraus = []
    for i, element in enumerate(povm.elements):
        ket = prep_basis[:, i]
        stacked = ket
        for _ in range(copies - 1):
            stacked = np.kron(stacked, ket)
        vals, vecs = hermitian_eig(element)
        top = vals[0] if vals.size else 0.0
        for lam, vec in zip(vals, vecs.T):
            if top <= 0 or lam <= SUPPORT_CUTOFF * top:
                break
            kraus.append(np.sqrt(lam) * np.outer(stacked, vec.conj()))
    return channel_from_kraus(
        kraus, (povm.dim,), (d_reg,) * copies
    )


def average_mi_loss(rho: DensityMatrix, channel: Channel) -> float:
    """I(A:B) minus the average I(A:B'_i) over output registers of B.

    Nonnegative for every channel by monotonicity of mutual information;
    zero is achievable exactly when the state is classical on B.
    """
    _require_bipartite(rho)
    if channel.in_dim != rho.dims[1]:
        raise ValueError(
            f"channel input dim {channel.in_dim} != B dim {rho.dims[1]}"
        )
    out = apply_on_subsystem(channel, rho, target=1)
    registers = len(channel.out_dims)
    base = mutual_information(rho, (0,))
    avg = 0.0
    for i in range(registers):
        avg += mutual_information(out.marginal((0, 1 + i)), (0,))
    return float(base - avg / registers)


def broadcast_report(
    rho: DensityMatrix,
    seed: int = 0,
    restarts: int = 32,
    tol: float = 1e-7,
    max_iters: int = 500,
    diagnostics: dict | None = None,
) -> BroadcastReport:
    """All broadcastability quantifiers for one bipartite state."""
    _require_bipartite(rho)
    diag_max = {} if diagnostics is not None else None
    diag_eb = {} if diagnostics is not None else None
    disc = discord(rho, side="B", seed=seed, restarts=restarts)
    fmax, _ = f_max_broadcast(
        rho, tol=tol, max_iters=max_iters, diagnostics=diag_max
    )
    eb = f_eb_detailed(
        rho,
        tol=tol,
        max_iters=max_iters,
        init_povm=disc.best_povm,
        diagnostics=diag_eb,
    )
    if diagnostics is not None:
        diagnostics["f_max"] = diag_max
        diagnostics["f_eb"] = diag_eb
    return BroadcastReport(
        f_max=fmax,
        f_eb=eb.value,
        discord_bound_eb=_fidelity_to_discord_bound(eb.value),
        discord_bound_max=_fidelity_to_discord_bound(fmax),
        discord=disc,
        exact=classify(rho),
        eb_exact=eb.eb_exact,
    )


def _fidelity_to_discord_bound(fid: float) -> float:
    if fid <= 0:
        return float("inf")
    return float(-2.0 * np.log2(min(fid, 1.0)))
