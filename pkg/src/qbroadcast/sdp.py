"""Self-contained dense semidefinite-program solver.

Standard form over complex Hermitian PSD blocks X_k:

    maximize    sum_k <C_k, X_k>
    subject to  sum_k <A_ik, X_k> = b_i      (i = 1..m)
                X_k >= 0

with <A, B> = Tr(A B) real for Hermitian arguments.  The problem is
embedded into real symmetric blocks ([[Re, -Im], [Im, Re]], coefficients
halved so objective and duals carry over), redundant constraints are
removed, and the reduced problem is solved by a primal-dual path-following
interior-point method with Nesterov-Todd scaling.  Instances here are
small (block side <= ~70 real, <= ~2500 constraints), so dense linear
algebra per iteration is the right tool.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .linalg import dag, max_abs, support_isometry

COEFF_HERM_TOL = 1e-12
DEFAULT_TOL = 1e-7
DEFAULT_MAX_ITERS = 500


# ---------------------------------------------------------------------------
# problem containers


@dataclass(frozen=True, eq=False)
class SdpProblem:
    """Standard-form SDP data over complex Hermitian blocks."""

    blocks: tuple[int, ...]
    objective: tuple
    constraints: tuple  # of (dict block -> Hermitian ndarray, float rhs)

    def __post_init__(self):
        for k, c in enumerate(self.objective):
            if c.shape != (self.blocks[k], self.blocks[k]):
                raise ValueError(f"objective block {k} has shape {c.shape}")
            if max_abs(c - dag(c)) > COEFF_HERM_TOL:
                raise ValueError(f"objective block {k} is not Hermitian")
        for i, (coeffs, _) in enumerate(self.constraints):
            for k, a in coeffs.items():
                if a.shape != (self.blocks[k], self.blocks[k]):
                    raise ValueError(
                        f"constraint {i} block {k} has shape {a.shape}"
                    )
                if max_abs(a - dag(a)) > COEFF_HERM_TOL:
                    raise ValueError(f"constraint {i} block {k} not Hermitian")

    @property
    def n_constraints(self) -> int:
        return len(self.constraints)


@dataclass(frozen=True)
class SdpResiduals:
    primal: float
    dual: float
    gap: float


@dataclass(frozen=True, eq=False)
class SdpSolution:
    status: str  # optimal | infeasible | max-iterations
    primal_blocks: tuple
    dual_vector: np.ndarray
    primal_value: float
    dual_value: float
    residuals: SdpResiduals
    iterations: int


class SdpBuilder:
    """Incremental construction of an SdpProblem."""

    def __init__(self):
        self._blocks: list[int] = []
        self._objective: list[np.ndarray] = []
        self._constraints: list = []

    def add_block(self, side: int) -> int:
        self._blocks.append(int(side))
        self._objective.append(np.zeros((side, side), dtype=complex))
        return len(self._blocks) - 1

    def block_side(self, block: int) -> int:
        return self._blocks[block]

    def add_objective(self, block: int, coeff: np.ndarray):
        self._objective[block] = self._objective[block] + np.asarray(
            coeff, dtype=complex
        )

    def add_constraint(self, coeffs: dict, rhs: float):
        clean = {
            k: np.asarray(a, dtype=complex) for k, a in coeffs.items()
        }
        self._constraints.append((clean, float(rhs)))

    def build(self) -> SdpProblem:
        # kill sub-tolerance Hermiticity dust before the strict validation
        objective = tuple((c + dag(c)) / 2.0 for c in self._objective)
        constraints = tuple(
            ({k: (a + dag(a)) / 2.0 for k, a in coeffs.items()}, rhs)
            for coeffs, rhs in self._constraints
        )
        return SdpProblem(tuple(self._blocks), objective, constraints)


# ---------------------------------------------------------------------------
# hermitian operator bases and the real embedding


def hermitian_basis(n: int) -> list:
    """Orthonormal (Hilbert-Schmidt) basis of n x n Hermitian matrices."""
    basis = []
    for i in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[i, i] = 1.0
        basis.append(e)
    for i in range(n):
        for j in range(i + 1, n):
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = e[j, i] = 1.0 / np.sqrt(2)
            basis.append(e)
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = -1j / np.sqrt(2)
            e[j, i] = 1j / np.sqrt(2)
            basis.append(e)
    return basis


def embed_hermitian(h: np.ndarray) -> np.ndarray:
    """[[Re, -Im], [Im, Re]] real-symmetric image of a Hermitian matrix."""
    re, im = h.real, h.imag
    top = np.hstack([re, -im])
    bot = np.hstack([im, re])
    return np.vstack([top, bot])


def unembed_hermitian(y: np.ndarray) -> np.ndarray:
    """Inverse of embed_hermitian on the invariant subspace (averages)."""
    n = y.shape[0] // 2
    re = (y[:n, :n] + y[n:, n:]) / 2.0
    im = (y[n:, :n] - y[:n, n:]) / 2.0
    return re + 1j * im


def _structure_symmetrize(y: np.ndarray) -> np.ndarray:
    """Average with the conjugation that fixes embedded Hermitian images.

    Keeps the matrix PSD and all embedded-coefficient inner products
    unchanged, but lands it exactly on the complex-structure subspace.
    """
    n = y.shape[0] // 2
    t = np.zeros_like(y)
    t[:n, n:] = -np.eye(n)
    t[n:, :n] = np.eye(n)
    return (y + t @ y @ t.T) / 2.0


# ---------------------------------------------------------------------------
# the interior-point core (real symmetric blocks)


def _steplength(x: np.ndarray, dx: np.ndarray) -> float:
    """Largest alpha with x + alpha*dx still PSD (x assumed PD)."""
    try:
        chol = np.linalg.cholesky(x)
    except np.linalg.LinAlgError:
        vals, vecs = np.linalg.eigh(x)
        vals = np.clip(vals, 1e-14 * max(vals.max(), 1e-300), None)
        chol = vecs * np.sqrt(vals)
    inner = scipy.linalg.solve_triangular(chol, dx, lower=True)
    inner = scipy.linalg.solve_triangular(
        chol, inner.T, lower=True
    )
    lam_min = float(np.linalg.eigvalsh((inner + inner.T) / 2.0)[0])
    if lam_min >= -1e-14:
        return np.inf
    return -1.0 / lam_min


class _RealSdp:
    """Reduced real-symmetric standard-form problem and its IPM state."""

    def __init__(self, blocks, c_mats, a_stacks, b):
        self.blocks = blocks
        self.c = c_mats
        self.a = a_stacks  # list over blocks of (m, n, n)
        self.b = b
        self.m = b.size
        self.a_flat = [a.reshape(self.m, -1) for a in a_stacks]

    def a_apply(self, xs):
        out = np.zeros(self.m)
        for a_flat, x in zip(self.a_flat, xs):
            out += a_flat @ x.reshape(-1)
        return out

    def a_adjoint(self, y):
        return [
            np.tensordot(y, a, axes=(0, 0)) for a in self.a
        ]

    def objective(self, xs) -> float:
        return float(sum(np.tensordot(c, x) for c, x in zip(self.c, xs)))


def _solve_real(real: _RealSdp, tol: float, max_iters: int):
    """NT-scaled primal-dual path following.  Returns (xs, y, zs, info)."""
    m = real.m
    norm_b = np.linalg.norm(real.b)
    norm_c = np.sqrt(sum(np.linalg.norm(c) ** 2 for c in real.c))

    xs, zs = [], []
    for n, c, a in zip(real.blocks, real.c, real.a):
        a_norms = np.sqrt((a.reshape(m, -1) ** 2).sum(axis=1)) if m else np.zeros(0)
        xi = max(10.0, np.sqrt(n))
        if m:
            xi = max(xi, n * float(((1 + np.abs(real.b)) / (1 + a_norms)).max()))
        eta = max(10.0, np.sqrt(n), float(np.linalg.norm(c)))
        if m:
            eta = max(eta, float(a_norms.max()))
        xs.append(xi * np.eye(n))
        zs.append(eta * np.eye(n))
    y = np.zeros(m)

    status = "max-iterations"
    iterations = max_iters
    for it in range(max_iters):
        rp = real.b - real.a_apply(xs)
        aty = real.a_adjoint(y)
        rds = [c + z - at for c, z, at in zip(real.c, zs, aty)]

        pval = real.objective(xs)
        dval = float(real.b @ y)
        gap = sum(float(np.tensordot(x, z)) for x, z in zip(xs, zs))
        mu = gap / sum(real.blocks)

        pinf = np.linalg.norm(rp) / (1 + norm_b)
        dinf = np.sqrt(sum(np.linalg.norm(r) ** 2 for r in rds)) / (1 + norm_c)
        relgap = abs(pval - dval) / (1 + (abs(pval) + abs(dval)) / 2)

        if pinf < tol and dinf < tol and relgap < tol:
            status = "optimal"
            iterations = it
            break
        if dval < -1e8 * (1 + norm_b) or np.isnan(mu):
            status = "infeasible"
            iterations = it
            break

        # Nesterov-Todd scaling point per block
        ws, zinvs = [], []
        for x, z in zip(xs, zs):
            sx, ux = np.linalg.eigh(x)
            sx = np.clip(sx, 1e-300, None)
            rx = (ux * np.sqrt(sx)) @ ux.T
            mmat = rx @ z @ rx
            sm, um = np.linalg.eigh((mmat + mmat.T) / 2.0)
            sm = np.clip(sm, 1e-300, None)
            ws.append(rx @ ((um * sm ** -0.5) @ um.T) @ rx)
            zinvs.append(rx @ ((um * (1.0 / sm)) @ um.T) @ rx)

        # Schur complement S_ij = sum_k <A_ik, W_k A_jk W_k>
        schur = np.zeros((m, m))
        waws = []
        for a, a_flat, w in zip(real.a, real.a_flat, ws):
            waw = np.matmul(np.matmul(w, a), w)
            waws.append(waw)
            schur += a_flat @ waw.reshape(m, -1).T
        schur = (schur + schur.T) / 2.0

        factor = None
        jitter = 0.0
        base = max(np.trace(schur) / max(m, 1), 1.0)
        for attempt in range(4):
            try:
                factor = scipy.linalg.cho_factor(
                    schur + jitter * np.eye(m), lower=True
                )
                break
            except np.linalg.LinAlgError:
                jitter = base * (1e-14 if attempt == 0 else jitter / base * 100)
        if factor is None:
            status = "max-iterations"
            iterations = it
            break

        def newton(rcs):
            rhs = rp.copy() * -1.0
            for a_flat, rc, rd, w in zip(real.a_flat, rcs, rds, ws):
                rhs += a_flat @ (rc + w @ rd @ w).reshape(-1)
            dy = scipy.linalg.cho_solve(factor, rhs)
            daty = real.a_adjoint(dy)
            dzs = [da - rd for da, rd in zip(daty, rds)]
            dxs = []
            for rc, w, dz in zip(rcs, ws, dzs):
                dx = rc - w @ dz @ w
                dxs.append((dx + dx.T) / 2.0)
            return dxs, dy, dzs

        # predictor probe chooses the centering weight
        rcs_aff = [-x for x in xs]
        dxs_a, dy_a, dzs_a = newton(rcs_aff)
        ap = min(
            (_steplength(x, dx) for x, dx in zip(xs, dxs_a)), default=np.inf
        )
        ad = min(
            (_steplength(z, dz) for z, dz in zip(zs, dzs_a)), default=np.inf
        )
        ap, ad = min(1.0, ap), min(1.0, ad)
        gap_aff = sum(
            float(np.tensordot(x + ap * dx, z + ad * dz))
            for x, dx, z, dz in zip(xs, dxs_a, zs, dzs_a)
        )
        sigma = min(max((max(gap_aff, 0.0) / gap) ** 3, 1e-6), 0.999999)

        rcs = [sigma * mu * zi - x for zi, x in zip(zinvs, xs)]
        dxs, dy, dzs = newton(rcs)

        ap = min((_steplength(x, dx) for x, dx in zip(xs, dxs)), default=np.inf)
        ad = min((_steplength(z, dz) for z, dz in zip(zs, dzs)), default=np.inf)
        ap = min(1.0, 0.98 * ap)
        ad = min(1.0, 0.98 * ad)

        xs = [(x + ap * dx) for x, dx in zip(xs, dxs)]
        xs = [(x + x.T) / 2.0 for x in xs]
        y = y + ad * dy
        zs = [(z + ad * dz) for z, dz in zip(zs, dzs)]
        zs = [(z + z.T) / 2.0 for z in zs]
    else:
        iterations = max_iters

    return xs, y, zs, status, iterations


# ---------------------------------------------------------------------------
# preprocessing: row scaling and redundancy elimination


def _svec_rows(problem: SdpProblem):
    """Stack constraints as real row vectors (embedded, coefficient-halved)."""
    sides = [2 * n for n in problem.blocks]
    offsets = np.cumsum([0] + [s * s for s in sides])
    rows = np.zeros((problem.n_constraints, offsets[-1]))
    for i, (coeffs, _) in enumerate(problem.constraints):
        for k, a in coeffs.items():
            emb = embed_hermitian(a) / 2.0
            rows[i, offsets[k]:offsets[k + 1]] = emb.reshape(-1)
    return rows


def _reduce_constraints(problem: SdpProblem, rows: np.ndarray, b: np.ndarray):
    """Normalize rows, drop dependent ones, verify consistency.

    Returns (kept indices, scales, reduced_b).  Raises on a structurally
    inconsistent system (a dropped row whose rhs disagrees with the kept
    combination).
    """
    m = rows.shape[0]
    scales = np.linalg.norm(rows, axis=1)
    zero_rows = scales < 1e-14
    for i in np.nonzero(zero_rows)[0]:
        if abs(b[i]) > 1e-10:
            raise ValueError(
                f"structurally inconsistent input: constraint {i} has zero "
                f"coefficients but rhs {b[i]:.3e}"
            )
    keep_mask = ~zero_rows
    idx = np.nonzero(keep_mask)[0]
    normed = rows[idx] / scales[idx, None]
    nb = b[idx] / scales[idx]

    if len(idx) == 0:
        return idx, scales, nb

    q, r, piv = scipy.linalg.qr(normed.T, mode="economic", pivoting=True)
    diag = np.abs(np.diagonal(r))
    rank = int((diag > 1e-10 * max(diag[0], 1e-300)).sum()) if diag.size else 0
    kept_local = np.sort(piv[:rank])
    dropped_local = np.sort(piv[rank:])
    if dropped_local.size:
        # dropped rows must be consistent linear combinations of kept ones
        coeff, *_ = np.linalg.lstsq(
            normed[kept_local].T, normed[dropped_local].T, rcond=None
        )
        implied = coeff.T @ nb[kept_local]
        worst = float(np.abs(implied - nb[dropped_local]).max())
        if worst > 1e-8:
            raise ValueError(
                f"structurally inconsistent input: dependent constraints "
                f"disagree by {worst:.3e}"
            )
    return idx[kept_local], scales, nb[kept_local]


# ---------------------------------------------------------------------------
# public entry points


def solve(
    problem: SdpProblem,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
    seed: int = 0,
) -> SdpSolution:
    """Solve a standard-form SDP.

    ``seed`` is accepted for interface stability; the algorithm is fully
    deterministic and does not consume randomness.
    """
    del seed
    b_full = np.array([rhs for _, rhs in problem.constraints], dtype=float)
    rows = _svec_rows(problem)
    kept, scales, b_red = _reduce_constraints(problem, rows, b_full)

    sides = [2 * n for n in problem.blocks]
    c_mats = [embed_hermitian(c) / 2.0 for c in problem.objective]
    a_stacks = []
    offsets = np.cumsum([0] + [s * s for s in sides])
    for k, s in enumerate(sides):
        stack = rows[kept][:, offsets[k]:offsets[k + 1]] / (
            scales[kept, None] if kept.size else 1.0
        )
        a_stacks.append(stack.reshape(len(kept), s, s))

    real = _RealSdp(sides, c_mats, a_stacks, b_red)
    xs, y_red, zs, status, iterations = _solve_real(real, tol, max_iters)

    # back to complex Hermitian blocks; the embedded dual slack carries the
    # coefficient halving, so it unembeds with a factor two
    primal = tuple(
        unembed_hermitian(_structure_symmetrize(x)) for x in xs
    )
    duals_z = tuple(
        2.0 * unembed_hermitian(_structure_symmetrize(z)) for z in zs
    )
    y = np.zeros(problem.n_constraints)
    if kept.size:
        y[kept] = y_red / scales[kept]

    pval = float(
        sum(np.trace(c @ x).real for c, x in zip(problem.objective, primal))
    )
    dval = float(b_full @ y)
    res = _residuals(problem, primal, y, duals_z, pval, dval)
    return SdpSolution(status, primal, y, pval, dval, res, iterations)


def _residuals(problem, primal, y, duals_z, pval, dval) -> SdpResiduals:
    b = np.array([rhs for _, rhs in problem.constraints])
    viol = np.zeros(problem.n_constraints)
    for i, (coeffs, rhs) in enumerate(problem.constraints):
        got = sum(
            np.trace(a @ primal[k]).real for k, a in coeffs.items()
        )
        viol[i] = got - rhs
    pinf = float(np.linalg.norm(viol) / (1 + np.linalg.norm(b)))
    dual_dev = 0.0
    norm_c = np.sqrt(
        sum(np.linalg.norm(c) ** 2 for c in problem.objective)
    )
    for k, (c, z) in enumerate(zip(problem.objective, duals_z)):
        aty = sum(
            y[i] * coeffs[k]
            for i, (coeffs, _) in enumerate(problem.constraints)
            if k in coeffs
        )
        if np.isscalar(aty):
            aty = np.zeros_like(c)
        dual_dev += np.linalg.norm(c + z - aty) ** 2
    dinf = float(np.sqrt(dual_dev) / (1 + norm_c))
    relgap = float(abs(pval - dval) / (1 + (abs(pval) + abs(dval)) / 2))
    return SdpResiduals(pinf, dinf, relgap)


def solution_diagnostics(solution: SdpSolution) -> dict:
    """Plain-dict summary of solver effort and certificates."""
    return {
        "status": solution.status,
        "iterations": solution.iterations,
        "residual_primal": solution.residuals.primal,
        "residual_dual": solution.residuals.dual,
        "residual_gap": solution.residuals.gap,
    }


def audit(problem: SdpProblem, solution: SdpSolution, tol: float = DEFAULT_TOL):
    """Independent feasibility check of a reported solution.

    Recomputes constraint violations and block eigenvalues from scratch;
    returns (ok, details dict).  Deliberately shares no state with the
    solver loop.
    """
    details = {}
    worst_eig = 0.0
    for k, x in enumerate(solution.primal_blocks):
        lo = float(np.linalg.eigvalsh((x + dag(x)) / 2.0)[0])
        worst_eig = min(worst_eig, lo)
    details["min_block_eigenvalue"] = worst_eig
    worst_con = 0.0
    for coeffs, rhs in problem.constraints:
        got = sum(
            np.trace(a @ solution.primal_blocks[k]).real
            for k, a in coeffs.items()
        )
        worst_con = max(worst_con, abs(got - rhs))
    details["max_constraint_violation"] = worst_con
    pval = float(
        sum(
            np.trace(c @ x).real
            for c, x in zip(problem.objective, solution.primal_blocks)
        )
    )
    details["primal_value"] = pval
    details["gap_vs_dual"] = abs(pval - solution.dual_value)
    scale = 1 + abs(pval) + abs(solution.dual_value)
    ok = (
        worst_eig > -1e-6
        and worst_con < 100 * tol
        and details["gap_vs_dual"] / scale < 100 * tol
    )
    return ok, details


def dump_sdpa(problem: SdpProblem, path: str):
    """Write the real-embedded problem in sparse SDPA (.dat-s) format.

    Layout: mDIM / nBLOCK / block sizes / rhs vector / entry lines
    ``matno blkno i j value`` with 1-based upper-triangle indices, matno 0
    holding the objective.  Suitable for cross-checking with external
    SDPA-compatible solvers.
    """
    sides = [2 * n for n in problem.blocks]
    lines = [
        f"{problem.n_constraints} = mDIM",
        f"{len(sides)} = nBLOCK",
        " ".join(str(s) for s in sides) + " = bLOCKsTRUCT",
        " ".join(
            repr(float(rhs)) for _, rhs in problem.constraints
        ),
    ]

    def emit(matno, blkno, mat):
        emb = embed_hermitian(mat) / 2.0
        rows_i, cols_j = np.nonzero(np.triu(np.abs(emb) > 1e-16))
        for i, j in zip(rows_i, cols_j):
            lines.append(
                f"{matno} {blkno + 1} {i + 1} {j + 1} {emb[i, j]!r}"
            )

    for k, c in enumerate(problem.objective):
        if max_abs(c) > 0:
            emit(0, k, c)
    for i, (coeffs, _) in enumerate(problem.constraints):
        for k, a in coeffs.items():
            emit(i + 1, k, a)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# the fidelity gadget


@dataclass(frozen=True, eq=False)
class AffineMatrixExpr:
    """sigma = const + sum over (block, L) of L(X_block), Hermitian-valued."""

    side: int
    const: np.ndarray
    terms: tuple = ()  # of (block index, callable ndarray -> ndarray)


def fidelity_sdp(
    builder: SdpBuilder,
    rho: np.ndarray,
    sigma: AffineMatrixExpr,
    sigma_support: np.ndarray | None = None,
) -> int:
    """Add a fidelity block for F(rho, sigma) to a problem under construction.

    Encodes max (Tr X + Tr X^dag)/2 over [[rho, X], [X^dag, sigma]] >= 0,
    where ``sigma`` may be affine in other problem blocks.  Both corners
    are compressed onto supports: rho onto its own, sigma onto the
    projector ``sigma_support`` (callers must guarantee every reachable
    sigma lives inside it; identity if omitted).  The compression keeps
    strictly feasible points available when rho or sigma is singular.

    Returns the index of the added PSD block.  The block's objective
    contribution equals the fidelity at the optimum.
    """
    v1 = support_isometry(np.asarray(rho, dtype=complex))
    if sigma_support is None:
        v2 = np.eye(sigma.side, dtype=complex)
    else:
        v2 = support_isometry(np.asarray(sigma_support, dtype=complex))
    r, s = v1.shape[1], v2.shape[1]
    if r == 0:
        raise ValueError("rho has empty support")
    w_blk = builder.add_block(r + s)

    c12 = (dag(v1) @ v2) / 2.0
    c_w = np.zeros((r + s, r + s), dtype=complex)
    c_w[:r, r:] = c12
    c_w[r:, :r] = dag(c12)
    builder.add_objective(w_blk, c_w)

    rho_c = dag(v1) @ rho @ v1
    for h in hermitian_basis(r):
        placed = np.zeros((r + s, r + s), dtype=complex)
        placed[:r, :r] = h
        builder.add_constraint(
            {w_blk: placed}, float(np.trace(h @ rho_c).real)
        )

    # conditioning of sigma: project the affine expression onto the
    # compressed corner, one scalar equation per Hermitian basis element
    sig_basis = hermitian_basis(s)
    const_c = dag(v2) @ sigma.const @ v2
    term_data = []
    for blk, lin in sigma.terms:
        side = builder.block_side(blk)
        basis_b = hermitian_basis(side)
        images = [dag(v2) @ lin(e) @ v2 for e in basis_b]
        term_data.append((blk, basis_b, images))
    for g in sig_basis:
        placed = np.zeros((r + s, r + s), dtype=complex)
        placed[r:, r:] = g
        coeffs = {w_blk: placed}
        for blk, basis_b, images in term_data:
            k_mat = np.zeros_like(basis_b[0])
            for e, img in zip(basis_b, images):
                overlap = np.trace(g @ img)
                if abs(overlap.imag) > 1e-9:
                    raise ValueError(
                        "sigma coupling is not Hermiticity-preserving"
                    )
                k_mat = k_mat + overlap.real * e
            if blk in coeffs:
                coeffs[blk] = coeffs[blk] - k_mat
            else:
                coeffs[blk] = -k_mat
        builder.add_constraint(coeffs, float(np.trace(g @ const_c).real))
    return w_blk
