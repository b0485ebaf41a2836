"""Parrott completion and the weighted commutant lifting loop.

The lifting theorem takes a co-invariant subspace J of an induced Fock space
K, an operator G on J commuting with all compressed algebra elements, and
produces a norm-preserving extension commuting with the full induced algebra.
The construction is an induction over growing subspaces: at each step the
least level subspace K_n escaping the current J is adjoined, a contraction F
is assembled from the orthonormal-basis data of the correspondence powers,
and the new operator is completed from the blocks

    F^* = [R; S]   and   G_m = [R, T]

by Parrott's lemma.  The completion is evaluated in closed form with a
thresholded pseudoinverse rather than as a weak limit, which keeps the run
deterministic; optimality is verified per instance.

Everything operates on a ``LiftModel``: a bundle of the induced space
dimensions, the generator images Y (x) I, the vacuum insertion, and, per
level, the basis insertions together with the weighted creations at the
inverse weight product.  Both the graph side and the transported dual side
produce such bundles, so one loop serves the lifting theorem and, through the
Putnam trick, its two-space corollary.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import as_complex, operator_norm, orth_columns, pinv, residual


@dataclass
class ParrottProblem:
    """The three known blocks of a 2x2 completion [[R, T], [S, ?]]."""

    R: np.ndarray
    S: np.ndarray
    T: np.ndarray
    mu: float | None = None

    def __post_init__(self):
        self.R = as_complex(self.R)
        self.S = as_complex(self.S)
        self.T = as_complex(self.T)
        if self.R.shape[1] != self.S.shape[1] or self.R.shape[0] != self.T.shape[0]:
            raise ValueError("Parrott blocks are not conformal")
        if self.mu is None:
            self.mu = max(operator_norm(np.vstack([self.R, self.S])),
                          operator_norm(np.hstack([self.R, self.T])))

    def assemble(self, u: np.ndarray) -> np.ndarray:
        top = np.hstack([self.R, self.T])
        bottom = np.hstack([self.S, u])
        return np.vstack([top, bottom])


def parrott_complete(p: ParrottProblem) -> np.ndarray:
    """The closed-form Parrott corner U = -S (mu^2 I - R^* R)^+ R^* T.

    The pseudoinverse threshold handles the boundary case ||[R; S]|| = mu; if
    the completion block is badly conditioned the bound is damped by a
    relative 1e-12 before inverting.  Degenerate (zero-size) blocks pass
    through as correctly shaped zeros.
    """
    mu = float(p.mu)
    rows, cols = p.S.shape[0], p.T.shape[1]
    if mu == 0.0 or rows == 0 or cols == 0:
        return np.zeros((rows, cols), dtype=complex)
    gram = mu * mu * np.eye(p.R.shape[1]) - p.R.conj().T @ p.R
    if gram.size:
        eigs = np.linalg.eigvalsh(0.5 * (gram + gram.conj().T))
        if eigs.size and eigs.min() < 1e-12 * mu * mu:
            mu_eff = mu * (1.0 + 1e-12)
            gram = mu_eff * mu_eff * np.eye(p.R.shape[1]) - p.R.conj().T @ p.R
    return -p.S @ pinv(gram) @ p.R.conj().T @ p.T


@dataclass
class LiftModel:
    """Everything the lifting loop needs about one induced Fock space.

    ``prefix_dims[n]`` is the dimension of K_n (levels 0..n) and
    ``prefix_indices`` its coordinate set (contiguous when None, which is the
    base layout; amplified copies interleave).  ``basis_ops[k]`` pairs, for
    each orthonormal basis element of the level-k power, the insertion
    L_{xi^}: H -> K with the image of the weighted creation at the inverse
    weight product applied to xi.
    """

    dim: int
    h_dim: int
    levels: int
    prefix_dims: list[int]
    generators: list[np.ndarray]
    vacuum: np.ndarray
    basis_ops: list[list[tuple[np.ndarray, np.ndarray]]]
    prefix_indices: list[np.ndarray] | None = None

    def prefix_idx(self, n: int) -> np.ndarray:
        """Coordinate indices of K_n; empty for n < 0."""
        if n < 0:
            return np.zeros(0, dtype=int)
        n = min(n, self.levels)
        if self.prefix_indices is None:
            return np.arange(self.prefix_dims[n])
        return self.prefix_indices[n]

    def amplify(self, copies: int) -> "LiftModel":
        """The same model on ``copies`` direct summands (copy-major layout).

        The level subspaces of the sum are the direct sums of the per-copy
        level subspaces, so the prefix coordinate sets interleave rather than
        stay contiguous.
        """
        if copies == 1:
            return self
        eye = np.eye(copies)
        indices = [np.concatenate([self.prefix_idx(n) + r * self.dim for r in range(copies)])
                   for n in range(self.levels + 1)]
        return LiftModel(
            dim=self.dim * copies,
            h_dim=self.h_dim * copies,
            levels=self.levels,
            prefix_dims=[d * copies for d in self.prefix_dims],
            generators=[np.kron(eye, g) for g in self.generators],
            vacuum=np.kron(eye, self.vacuum),
            basis_ops=[[(np.kron(eye, ins), np.kron(eye, wc)) for ins, wc in level]
                       for level in self.basis_ops],
            prefix_indices=indices,
        )

    def prefix_columns(self, n: int) -> np.ndarray:
        idx = self.prefix_idx(n)
        out = np.zeros((self.dim, idx.size), dtype=complex)
        out[idx, np.arange(idx.size)] = 1.0
        return out


@dataclass
class CoinvariantSubspace:
    """An orthonormal frame for J with its co-invariance certificate."""

    model: LiftModel
    frame: np.ndarray

    def __post_init__(self):
        self.frame = as_complex(self.frame)
        if residual(self.frame.conj().T @ self.frame, np.eye(self.frame.shape[1])) > 1e-12:
            raise ValueError("frame columns are not orthonormal")

    def coinvariance_residual(self) -> float:
        p = self.frame @ self.frame.conj().T
        comp = np.eye(self.model.dim) - p
        return max(operator_norm(comp @ g.conj().T @ p) for g in self.model.generators)


@dataclass
class LiftState:
    """The inductive state: levels n_i, nested frames, compatible operators.

    ``frame`` spans J_m; ``g_mat`` is G_m as a map K -> J_m in frame
    coordinates; ``ledger`` collects per-step condition residuals.
    """

    model: LiftModel
    frame: np.ndarray
    g_mat: np.ndarray
    n_list: list[int]
    ledger: list[dict] = field(default_factory=list)

    @property
    def m(self) -> int:
        return len(self.n_list)

    @property
    def dim_j(self) -> int:
        return self.frame.shape[1]

    def is_full(self) -> bool:
        return self.dim_j >= self.model.dim


RANK_TOL = 1e-10


def _escape_level(state: LiftState) -> int:
    """Least n with K_n not contained in the current J (rank test)."""
    model = state.model
    q = state.frame
    for n in range(model.levels + 1):
        res = model.prefix_columns(n)
        for _ in range(2):
            res = res - q @ (q.conj().T @ res)
        if res.size and operator_norm(res) > RANK_TOL:
            return n
    raise RuntimeError("no level escapes J although J is proper")


def _condition_residuals(state: LiftState) -> dict:
    """Residuals of the seven running conditions at the current state."""
    model = state.model
    q = state.frame
    p = q @ q.conj().T
    comp = np.eye(model.dim) - p
    out = {}
    n = state.n_list[-1]
    if n >= 0:
        out["contains_prefix"] = operator_norm(comp[:, model.prefix_idx(n)])
    else:
        out["contains_prefix"] = 0.0
    out["coinvariant"] = max(operator_norm(comp @ g.conj().T @ p) for g in model.generators)
    out["intertwining"] = max(
        residual(q.conj().T @ g @ q @ state.g_mat, state.g_mat @ g)
        for g in model.generators)
    out["norm_one"] = abs(operator_norm(state.g_mat) - 1.0)
    return out


def lift_step(state: LiftState, step_validator=None) -> LiftState:
    """One induction step: adjoin the least escaping level and complete.

    Computes n_{m+1} and the enlarged subspace, assembles the contraction F
    from the basis data via g = G_m L_{1^}, splits F^* = [R; S] and
    G_m = [R, T], fills the missing corner by Parrott, and returns the new
    state.  Raises if J is already everything.
    """
    model = state.model
    if state.is_full():
        raise ValueError("subspace is already the whole induced space")
    q_m = state.frame
    d_m = q_m.shape[1]
    n_new = _escape_level(state)
    if state.n_list and n_new <= state.n_list[-1]:
        raise RuntimeError("escape level did not increase; numerical failure")
    res = model.prefix_columns(n_new)
    # two projection passes against the running frame stop orthogonality drift
    for _ in range(2):
        res = res - q_m @ (q_m.conj().T @ res)
    q_new = orth_columns(res, RANK_TOL)
    q_new = q_new - q_m @ (q_m.conj().T @ q_new)
    q_new = orth_columns(q_new, 0.5)
    if q_new.shape[1] == 0:
        raise RuntimeError("escaping level added no new directions")
    q_m1 = np.hstack([q_m, q_new])

    g_vec = state.g_mat @ model.vacuum  # g = G_m L_{1^}: H -> J_m
    f_mat = np.zeros((model.dim, q_m1.shape[1]), dtype=complex)
    gram = np.zeros((q_m1.shape[1], q_m1.shape[1]), dtype=complex)
    for k in range(1, model.levels + 1):
        for ins, wc in model.basis_ops[k]:
            beta = q_m1.conj().T @ wc @ q_m  # beta(W_{Z^{(k)-1} xi})
            row = g_vec.conj().T @ beta.conj().T  # h x d_{m+1}
            f_mat += ins @ row
            col = beta @ g_vec
            gram += col @ col.conj().T
    k0_idx = model.prefix_idx(0)
    rest_idx = np.setdiff1d(np.arange(model.dim), k0_idx)

    r_blk = state.g_mat[:, rest_idx]
    t_blk = state.g_mat[:, k0_idx]
    f_star = f_mat.conj().T  # J_{m+1} coords x K
    s_blk = f_star[np.ix_(np.arange(d_m, q_m1.shape[1]), rest_idx)]
    # On the truncation the contraction bound on F can be violated by the
    # chopped kernel tails; scaling the new rows back restores the exact
    # situation of the untruncated construction without touching the G_m rows.
    mu_row = operator_norm(np.hstack([r_blk, t_blk]))
    f_clamp = 1.0
    col_norm = operator_norm(np.vstack([r_blk, s_blk]))
    target = mu_row * (1.0 + 1e-11)
    if mu_row > 0.0 and col_norm > target:
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if operator_norm(np.vstack([r_blk, mid * s_blk])) <= target:
                lo = mid
            else:
                hi = mid
        f_clamp = lo
        s_blk = f_clamp * s_blk
    problem = ParrottProblem(r_blk, s_blk, t_blk)
    u_blk = parrott_complete(problem)
    g_m1 = np.zeros((q_m1.shape[1], model.dim), dtype=complex)
    new_rows = np.arange(d_m, q_m1.shape[1])
    g_m1[np.ix_(np.arange(d_m), k0_idx)] = t_blk
    g_m1[np.ix_(np.arange(d_m), rest_idx)] = r_blk
    g_m1[np.ix_(new_rows, k0_idx)] = u_blk
    g_m1[np.ix_(new_rows, rest_idx)] = s_blk

    new_state = LiftState(model, q_m1, g_m1, state.n_list + [n_new], list(state.ledger))
    entry = _condition_residuals(new_state)
    entry.update({
        "m": new_state.m,
        "n_m": n_new,
        "dim_j": new_state.dim_j,
        "mu": problem.mu,
        "f_norm": operator_norm(f_mat),
        "f_clamp": f_clamp,
        "f_gram_bound": float(np.linalg.eigvalsh(gram).max()) if gram.size else 0.0,
        "f_restriction": residual(f_star[np.ix_(np.arange(d_m), rest_idx)], r_blk),
        "nesting": residual(g_m1[:d_m, :], state.g_mat),
        "completed_norm": operator_norm(problem.assemble(u_blk)),
    })
    if step_validator is not None:
        entry["extra"] = step_validator(state, new_state)
    new_state.ledger.append(entry)
    return new_state


def gm_star_expansion_residual(state: LiftState) -> float:
    """Residual of the adjoint expansion of G_m over the basis insertions."""
    model = state.model
    g_vec = state.g_mat @ model.vacuum
    acc = np.zeros((model.dim, state.dim_j), dtype=complex)
    q = state.frame
    for k in range(model.levels + 1):
        for ins, wc in model.basis_ops[k]:
            alpha = q.conj().T @ wc @ q
            acc += ins @ (g_vec.conj().T @ alpha.conj().T)
    return residual(acc, state.g_mat.conj().T)


def commutant_lift(model: LiftModel, j_frame: np.ndarray, g_on_j: np.ndarray,
                   hypothesis_tol: float = 1e-9, step_validator=None):
    """Lift a commuting operator on a co-invariant subspace to all of K.

    Returns (g_tilde, trace) with the four conclusions residual-checked in
    trace["conclusions"]: co-invariance of the adjoint, compression back to
    the input, commutation with every generator image, and norm equality.
    """
    j_frame = as_complex(j_frame)
    g_on_j = as_complex(g_on_j)
    sub = CoinvariantSubspace(model, j_frame)
    coin = sub.coinvariance_residual()
    if coin > hypothesis_tol:
        raise ValueError(f"subspace is not co-invariant (residual {coin:.2e})")
    comm = max(
        residual(j_frame.conj().T @ g @ j_frame @ g_on_j, g_on_j @ j_frame.conj().T @ g @ j_frame)
        for g in model.generators)
    if comm > hypothesis_tol:
        raise ValueError(f"operator does not commute with compressions (residual {comm:.2e})")

    scale = operator_norm(g_on_j)
    trace: dict = {"steps": [], "hypothesis": {"coinvariance": coin, "commutation": comm}}
    if scale == 0.0:
        g_tilde = np.zeros((model.dim, model.dim), dtype=complex)
        trace["conclusions"] = _conclusions(model, j_frame, g_on_j, g_tilde)
        return g_tilde, trace

    state = LiftState(model, j_frame, (g_on_j / scale) @ j_frame.conj().T, [-1])
    while not state.is_full():
        state = lift_step(state, step_validator=step_validator)
    trace["steps"] = state.ledger
    g_tilde = scale * (state.frame @ state.g_mat)
    trace["conclusions"] = _conclusions(model, j_frame, g_on_j, g_tilde)
    return g_tilde, trace


def _conclusions(model: LiftModel, j_frame: np.ndarray, g_on_j: np.ndarray,
                 g_tilde: np.ndarray) -> dict[str, float]:
    p = j_frame @ j_frame.conj().T
    comp = np.eye(model.dim) - p
    return {
        "adjoint_invariance": operator_norm(comp @ g_tilde.conj().T @ j_frame),
        "compression": residual(j_frame.conj().T @ g_tilde @ j_frame, g_on_j),
        "commutation": max(residual(g_tilde @ g, g @ g_tilde) for g in model.generators),
        "norm": abs(operator_norm(g_tilde) - operator_norm(g_on_j)),
    }


def two_space_lift(model_sum: LiftModel, emb1: np.ndarray, emb2: np.ndarray,
                   j1_frame: np.ndarray, j2_frame: np.ndarray, g12: np.ndarray,
                   hypothesis_tol: float = 1e-9, step_validator=None):
    """Two-representation lifting by the Putnam trick.

    ``emb1``/``emb2`` are the isometries of the two induced spaces into the
    direct-sum space; ``g12`` maps J_1 coordinates to J_2 coordinates.  The
    operator [[0, 0], [G, 0]] on J_1 ⊕ J_2 is lifted on the sum space and the
    lower-left corner extracted; the returned trace carries the corollary's
    conclusion residuals.
    """
    emb1, emb2 = as_complex(emb1), as_complex(emb2)
    col1 = emb1 @ j1_frame
    col2 = emb2 @ j2_frame
    d1, d2 = col1.shape[1], col2.shape[1]
    j_frame = np.hstack([col1, col2])
    g0 = np.zeros((d1 + d2, d1 + d2), dtype=complex)
    g0[d1:, :d1] = g12
    g_tilde0, trace = commutant_lift(model_sum, j_frame, g0,
                                     hypothesis_tol=hypothesis_tol,
                                     step_validator=step_validator)
    g_tilde = emb2.conj().T @ g_tilde0 @ emb1
    gens1 = [emb1.conj().T @ g @ emb1 for g in model_sum.generators]
    gens2 = [emb2.conj().T @ g @ emb2 for g in model_sum.generators]
    p1 = j1_frame @ j1_frame.conj().T
    trace["corollary"] = {
        "adjoint_invariance": operator_norm(
            (np.eye(p1.shape[0]) - p1) @ g_tilde.conj().T @ j2_frame),
        "compression": residual(j2_frame.conj().T @ g_tilde @ j1_frame, g12),
        "intertwining": max(residual(g_tilde @ a, b @ g_tilde) for a, b in zip(gens1, gens2)),
        "norm": abs(operator_norm(g_tilde) - operator_norm(g12)),
    }
    return g_tilde, trace
