"""Duality: intertwiner spaces, identification unitaries, and dual weights.

The sigma-dual of E is the space of intertwiners T: H -> E (x)_sigma H with
T sigma(a) = (phi(a) (x) I) T; it is a correspondence over the commutant
sigma(M)'.  Rather than building tensor powers of the dual abstractly, almost
everything here is transported through the identification unitaries
U_k: (E^sigma)^{(x)k} (x)_iota H -> E^{(x)k} (x)_sigma H onto the primal
induced space, where the dual algebra acts by

    rho(phi'(A))        = ⊕_k I_k (x) A,
    rho(creation by t)  blocks (j+k, j) = (C^{(j+k,k)} (x) I) (I_j (x) t),

with C^{(i,k)} = Z^{(i)} ((Z^{(i-k)})^{-1} (x) I_k) the prefix-sided weight
product.  These images generate the commutant of {Y (x) I_H}, which is what
the double-commutant checks and the interpolation solver consume.

Concretely we fix a product-structured orthonormal basis of each dual tensor
power: the level-1 elements alpha_{e,i} place the matrix unit E_{i,0} at edge
e, and longer elements chain edges by s(e_{j+1}) = r(e_j) with the row index
carried by the first factor only.  Every basis element has a rank-one inner
product, so the decomposition unitary Theta_k of the dual induced space has
one row per basis element, and dual module operators become plain matrices
indexed by basis tuples.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .fock import TruncatedFock, phi_inf, weighted_creation
from .graphs import CorrElement, GraphCorrespondence, path_basis
from .induced import CommutantAlgebra, InducedSpace, Representation
from .linalg import as_complex, nullspace, operator_norm, pinv, psd_sqrt, residual
from .weights import WeightSystem


# ---------------------------------------------------------------------------
# the dual correspondence as computed intertwiners
# ---------------------------------------------------------------------------


@dataclass
class DualCorrespondence:
    """A basis of the intertwiner space I(sigma, sigma^E phi), with Grams.

    ``basis`` holds matrices H -> E (x) H, orthonormal for the trace inner
    product; the module inner product <T, S> = T^* S is sigma(M)'-valued.
    """

    graph: GraphCorrespondence
    rep: Representation
    basis: list[np.ndarray]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def gram(self, i: int, j: int) -> np.ndarray:
        return self.basis[i].conj().T @ self.basis[j]


def dual_left_level(ind: InducedSpace, a: np.ndarray, k: int) -> np.ndarray:
    """(I_k (x) A) restricted to level k of the induced space."""
    a = as_complex(a)
    basis = path_basis(ind.graph, k)
    out = np.zeros((ind.level_dim(k), ind.level_dim(k)), dtype=complex)
    for p in range(basis.size):
        sl = slice(ind.block_offsets[k][p], ind.block_offsets[k][p + 1])
        v = basis.sources[p]
        out[sl, sl] = a[ind.rep.block(v), ind.rep.block(v)]
    return out


def intertwiner_basis(graph: GraphCorrespondence, rep: Representation) -> DualCorrespondence:
    """Solve the intertwining equations by nullspace SVD.

    The dimension always equals sum over edges of m_{r(e)} * m_{s(e)}; a
    mismatch raises, since everything downstream depends on it.
    """
    ind = InducedSpace(graph, rep, 1)
    rows_dim = ind.level_dim(1)
    h = rep.h_dim
    blocks = []
    for v in range(graph.n_vertices):
        a = np.zeros(graph.n_vertices)
        a[v] = 1.0
        sig = rep.sigma(a)
        ind_act = ind.sigma_level(a, 1)
        # vec(T sigma(a) - ind_act T) with column-major vec of T
        blocks.append(np.kron(sig.T, np.eye(rows_dim)) - np.kron(np.eye(h), ind_act))
    null = nullspace(np.vstack(blocks))
    basis = [null[:, i].reshape(h, rows_dim).T for i in range(null.shape[1])]
    expected = sum(rep.multiplicities[graph.range_(e)] * rep.multiplicities[graph.source(e)]
                   for e in range(graph.n_edges))
    if len(basis) != expected:
        raise RuntimeError(f"intertwiner dimension {len(basis)} != expected {expected}")
    return DualCorrespondence(graph, rep, basis)


# ---------------------------------------------------------------------------
# interior tensor products from operator-valued Grams
# ---------------------------------------------------------------------------


@dataclass
class InteriorTensor:
    """F (x) H realized as the column space of the PSD root of the big Gram."""

    n_family: int
    h_dim: int
    rank: int
    coord_map: np.ndarray  # rank x (n_family * h_dim)

    def coords(self, weights: np.ndarray) -> np.ndarray:
        """Coordinates of sum_l f_l (x) h_l from stacked (l, h) weights."""
        return self.coord_map @ as_complex(weights).reshape(-1)


def interior_tensor(gram_blocks, h_dim: int, tol: float = 1e-10) -> InteriorTensor:
    """Build F (x) H from a family with B(H)-valued Gram blocks.

    Null directions of the Gram are quotiented away, so the embedding
    dimension is the numerical rank; an indefinite Gram is rejected.
    """
    n = len(gram_blocks)
    big = np.zeros((n * h_dim, n * h_dim), dtype=complex)
    for i in range(n):
        for j in range(n):
            big[i * h_dim:(i + 1) * h_dim, j * h_dim:(j + 1) * h_dim] = as_complex(gram_blocks[i][j])
    big = 0.5 * (big + big.conj().T)
    if big.size == 0:
        return InteriorTensor(n, h_dim, 0, np.zeros((0, n * h_dim), dtype=complex))
    w, v = np.linalg.eigh(big)
    scale = max(1.0, float(abs(w).max()))
    if w.min() < -tol * scale:
        raise ValueError(f"Gram is indefinite: min eigenvalue {w.min():.3e}")
    keep = w > tol * scale
    coord = np.sqrt(w[keep])[:, None] * v[:, keep].conj().T
    return InteriorTensor(n, h_dim, int(keep.sum()), coord)


# ---------------------------------------------------------------------------
# structured orthonormal bases of dual tensor powers, and Theta frames
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DualBasisElement:
    """A basis element of (E^sigma)^{(x)k}: an edge chain plus one row index.

    The chain satisfies s(e_{j+1}) = r(e_j); only the first factor carries a
    free row index i < m_{s(e_1)}.  The inner product of the element is the
    rank-one matrix unit at (vertex r(e_k), coordinate 0).
    """

    edges: tuple[int, ...]
    row: int
    vertex: int


class DualStructure:
    """Structured dual bases, Theta frames, and transported dual operators."""

    def __init__(self, ind: InducedSpace, ws: WeightSystem):
        if not ind.graph.full:
            raise ValueError("duality requires a full correspondence (every vertex a source)")
        self.ind = ind
        self.ws = ws
        self.graph = ind.graph
        self.rep = ind.rep
        self._theta: dict[int, np.ndarray] = {}
        self._tuples: dict[int, list[DualBasisElement]] = {}
        self._intertwiners: dict[tuple[tuple[int, ...], int], np.ndarray] = {}
        self._chain_cache: dict[tuple[int, int], tuple] = {}

    # -- bases ----------------------------------------------------------------

    def alpha_matrix(self, e: int, i: int) -> np.ndarray:
        """alpha_{e,i}: the matrix unit E_{i,0} placed at edge e."""
        ind = self.ind
        out = np.zeros((ind.level_dim(1), self.rep.h_dim), dtype=complex)
        out[ind.block_offsets[1][e] + i, self.rep.offsets[self.graph.range_(e)]] = 1.0
        return out

    def _chains(self, start: int, length: int):
        """Edge chains (f_1..f_len) with s(f_1) = start and s(f_{j+1}) = r(f_j)."""
        key = (start, length)
        if key in self._chain_cache:
            return self._chain_cache[key]
        if length == 0:
            out = (((), start),)
        else:
            acc = []
            for f in range(self.graph.n_edges):
                if self.graph.source(f) != start:
                    continue
                for chain, vtx in self._chains(self.graph.range_(f), length - 1):
                    acc.append(((f,) + chain, vtx))
            out = tuple(acc)
        self._chain_cache[key] = out
        return out

    def tuples(self, k: int) -> list[DualBasisElement]:
        """The level-k basis, lex ordered in the edge chain, then the row."""
        if k in self._tuples:
            return self._tuples[k]
        if k == 0:
            out = [DualBasisElement((), 0, -1)]
        else:
            out = []
            for e in range(self.graph.n_edges):
                for i in range(self.rep.multiplicities[self.graph.source(e)]):
                    out.extend(DualBasisElement((e,) + chain, i, vtx)
                               for chain, vtx in self._chains(self.graph.range_(e), k - 1))
        self._tuples[k] = out
        return out

    def tuple_index(self, k: int) -> dict[tuple[tuple[int, ...], int], int]:
        return {(t.edges, t.row): n for n, t in enumerate(self.tuples(k))}

    def intertwiner(self, edges: tuple[int, ...], row: int) -> np.ndarray:
        """The identification image of a basis tuple: a map H -> level k.

        Product formula: the first factor is inserted outermost, the last
        applies to H first.
        """
        key = (edges, row)
        if key in self._intertwiners:
            return self._intertwiners[key]
        k = len(edges)
        if k == 0:
            mat = np.eye(self.rep.h_dim, dtype=complex)
        elif k == 1:
            mat = self.alpha_matrix(edges[0], row)
        else:
            rest = self.intertwiner(edges[1:], 0)
            mat = self.ind.suffix_insert(self.alpha_matrix(edges[0], row), 1, k - 1) @ rest
        self._intertwiners[key] = mat
        return mat

    def theta(self, k: int) -> np.ndarray:
        """Unitary from level k of the induced space onto the dual-basis frame.

        Row t is the adjoint of the single nonvanishing column of the t-th
        intertwiner; rows are orthonormal and complete exactly because the
        tuples form an orthonormal module basis.
        """
        if k in self._theta:
            return self._theta[k]
        if k == 0:
            self._theta[0] = np.eye(self.rep.h_dim, dtype=complex)
            return self._theta[0]
        tuples = self.tuples(k)
        out = np.zeros((len(tuples), self.ind.level_dim(k)), dtype=complex)
        for n, t in enumerate(tuples):
            col = self.rep.offsets[t.vertex]
            out[n, :] = self.intertwiner(t.edges, t.row)[:, col].conj()
        self._theta[k] = out
        return out

    def theta_full(self) -> np.ndarray:
        """Block diagonal of the Theta_k over all truncation levels."""
        blocks = [self.theta(k) for k in range(self.ind.levels + 1)]
        dim = sum(b.shape[0] for b in blocks)
        out = np.zeros((dim, self.ind.dim), dtype=complex)
        r = 0
        for k, b in enumerate(blocks):
            out[r:r + b.shape[0], self.ind.level_slice(k)] = b
            r += b.shape[0]
        return out

    # -- transported dual operators on the primal induced space ---------------

    def rho_phi(self, a: np.ndarray) -> np.ndarray:
        """rho(phi'(A)) = ⊕_k I_k (x) A."""
        return self.ind.dual_left(a)

    def rho_creation(self, t_mat: np.ndarray, k: int) -> np.ndarray:
        """rho of the weighted creation by the dual element with intertwiner t."""
        ind = self.ind
        out = np.zeros((ind.dim, ind.dim), dtype=complex)
        for j in range(ind.levels + 1 - k):
            if ind.level_dim(j + k) == 0 or ind.level_dim(j) == 0:
                continue
            cw = ind.level_tensor_identity(self.ws.c_between(j + k, k), j + k)
            out[ind.level_slice(j + k), ind.level_slice(j)] = cw @ ind.suffix_insert(t_mat, k, j)
        return out

    def dual_generators(self) -> list[tuple[str, np.ndarray]]:
        """Transported dual algebra generators: left actions plus creations."""
        out = []
        for v, i, j in self.rep.commutant_basis():
            out.append((f"phi'({v},{i},{j})", self.rho_phi(self.rep.commutant_unit(v, i, j))))
        for t in self.tuples(1):
            out.append((f"W'({t.edges[0]},{t.row})",
                        self.rho_creation(self.alpha_matrix(t.edges[0], t.row), 1)))
        return out

    def pi_sigma(self, y) -> np.ndarray:
        """pi(Y) = U_inf^* (Y (x) I_H) U_inf, written in the dual-basis frame."""
        th = self.theta_full()
        return th @ self.ind.fock_tensor_identity(y) @ th.conj().T


# ---------------------------------------------------------------------------
# lifting models for both sides
# ---------------------------------------------------------------------------


def primal_lift_model(ind: InducedSpace, ws: WeightSystem):
    """Lifting data for the graph side: K = F(E) (x)_sigma H.

    Per level k and basis path p the bundle pairs the insertion of p with the
    image of the weighted creation at (Z^{(k)})^{-1} applied to p.
    """
    from .lifting import LiftModel

    space = TruncatedFock(ind.graph, ind.levels)
    basis_ops: list[list[tuple[np.ndarray, np.ndarray]]] = []
    for k in range(ind.levels + 1):
        zinv = ws.z_prod_inv(k)
        level = []
        for p in range(path_basis(ind.graph, k).size):
            ins = ind.basis_inserter(k, p)
            w = weighted_creation(space, ws, CorrElement(k, zinv[:, p]))
            level.append((ins, ind.fock_tensor_identity(w)))
        basis_ops.append(level)
    return LiftModel(
        dim=ind.dim,
        h_dim=ind.rep.h_dim,
        levels=ind.levels,
        prefix_dims=[ind.prefix_dim(n) for n in range(ind.levels + 1)],
        generators=[m for _, m in primal_generators(ind, ws)],
        vacuum=ind.vacuum_inserter(),
        basis_ops=basis_ops,
    )


def dual_lift_model(structure: DualStructure):
    """Lifting data for the transported dual side, on the same space K.

    The algebra here is the transported dual algebra; inserters come from the
    structured tuple intertwiners, and the weighted creations carry the
    inverse dual weight product, which transports to (Z^{(k)})^{-1} (x) I.
    """
    from .lifting import LiftModel

    ind, ws = structure.ind, structure.ws
    basis_ops: list[list[tuple[np.ndarray, np.ndarray]]] = []
    for k in range(ind.levels + 1):
        level = []
        if k == 0:
            level.append((ind.vacuum_inserter(), np.eye(ind.dim, dtype=complex)))
        else:
            zinv_ind = ind.level_tensor_identity(ws.z_prod_inv(k), k)
            for t in structure.tuples(k):
                t_mat = structure.intertwiner(t.edges, t.row)
                ins = ind.level_embed(k) @ t_mat
                level.append((ins, structure.rho_creation(zinv_ind @ t_mat, k)))
        basis_ops.append(level)
    return LiftModel(
        dim=ind.dim,
        h_dim=ind.rep.h_dim,
        levels=ind.levels,
        prefix_dims=[ind.prefix_dim(n) for n in range(ind.levels + 1)],
        generators=[m for _, m in structure.dual_generators()],
        vacuum=ind.vacuum_inserter(),
        basis_ops=basis_ops,
    )


def direct_sum_embedding(ind1: InducedSpace, ind2: InducedSpace):
    """Identify K_1 ⊕ K_2 with the induced space of sigma_1 ⊕ sigma_2.

    Returns (ind_sum, emb1, emb2): the summed-representation space and the
    isometries matching each (level, path) block into the widened blocks.
    """
    if ind1.graph != ind2.graph or ind1.levels != ind2.levels:
        raise ValueError("spaces must share the graph and truncation")
    rep_sum = ind1.rep.direct_sum(ind2.rep)
    ind_sum = InducedSpace(ind1.graph, rep_sum, ind1.levels)
    emb1 = np.zeros((ind_sum.dim, ind1.dim), dtype=complex)
    emb2 = np.zeros((ind_sum.dim, ind2.dim), dtype=complex)
    for k in range(ind1.levels + 1):
        basis = path_basis(ind1.graph, k)
        for p in range(basis.size):
            m1 = ind1.block_sizes[k][p]
            tgt = ind_sum.block_slice(k, p)
            emb1[tgt.start:tgt.start + m1, ind1.block_slice(k, p)] = np.eye(m1)
            m2 = ind2.block_sizes[k][p]
            emb2[tgt.start + m1:tgt.stop, ind2.block_slice(k, p)] = np.eye(m2)
    return ind_sum, emb1, emb2


# ---------------------------------------------------------------------------
# dual module operator calculus in the Theta frame
# ---------------------------------------------------------------------------


class DualCalculus:
    """Dual module operators as plain matrices over the structured bases.

    A module operator on (E^sigma)^{(x)k} is stored as the matrix of
    <t, A' u> over basis tuples (inner products are rank one, so entries are
    scalars).  Identity legs are index bookkeeping: identity on a dual prefix
    restricts to equal prefixes, identity on a suffix to equal suffixes.
    """

    def __init__(self, structure: DualStructure):
        self.s = structure

    def embed_suffix(self, m: np.ndarray, a: int, k: int) -> np.ndarray:
        """I'_a (x) B' for B' on the last k - a dual legs."""
        if a == 0:
            return as_complex(m)
        s = self.s
        tuples = s.tuples(k)
        idx_suf = s.tuple_index(k - a)
        out = np.zeros((len(tuples), len(tuples)), dtype=complex)
        m = as_complex(m)
        for r, t in enumerate(tuples):
            sr = idx_suf[(t.edges[a:], 0)]
            for c, u in enumerate(tuples):
                if u.edges[:a] != t.edges[:a] or u.row != t.row:
                    continue
                out[r, c] = m[sr, idx_suf[(u.edges[a:], 0)]]
        return out

    def embed_prefix(self, m: np.ndarray, b: int, k: int) -> np.ndarray:
        """B' (x) I'_b for B' on the first k - b dual legs."""
        if b == 0:
            return as_complex(m)
        s = self.s
        a = k - b
        if a == 0:
            # a level-0 factor is an element of sigma(M)'; it acts as phi'
            return self.phi_prime(as_complex(m), k)
        tuples = s.tuples(k)
        idx_pre = s.tuple_index(a)
        out = np.zeros((len(tuples), len(tuples)), dtype=complex)
        m = as_complex(m)
        for r, t in enumerate(tuples):
            pr = idx_pre[(t.edges[:a], t.row)]
            for c, u in enumerate(tuples):
                if u.edges[a:] != t.edges[a:]:
                    continue
                out[r, c] = m[pr, idx_pre[(u.edges[:a], u.row)]]
        return out

    def tensor(self, m_a: np.ndarray, a: int, m_b: np.ndarray, b: int) -> np.ndarray:
        """A' (x) B' on level a + b of the dual powers."""
        return self.embed_prefix(m_a, b, a + b) @ self.embed_suffix(m_b, a, a + b)

    def phi_prime(self, a_mat: np.ndarray, k: int) -> np.ndarray:
        """The dual left action phi'_k(A) in the Theta frame."""
        th = self.s.theta(k)
        return th @ dual_left_level(self.s.ind, a_mat, k) @ th.conj().T

    def z_matrices(self) -> list[np.ndarray]:
        """Z'_k = Theta_k (C_k (x) I) Theta_k^* for all truncation levels."""
        s = self.s
        out = [np.eye(s.rep.h_dim, dtype=complex)]
        for k in range(1, s.ind.levels + 1):
            th = s.theta(k)
            out.append(th @ s.ind.level_tensor_identity(s.ws.c_quotient(k), k) @ th.conj().T)
        return out

    def z_products(self, zp: list[np.ndarray]) -> list[np.ndarray]:
        """Telescoping products Z'^{(k)} = Z'_k (I'_1 (x) Z'_{k-1}) ... ."""
        out = [np.eye(self.s.rep.h_dim, dtype=complex)]
        for k in range(1, len(zp)):
            acc = zp[k].copy()
            for a in range(1, k):
                acc = acc @ self.embed_suffix(zp[k - a], a, k)
            out.append(acc)
        return out


@dataclass
class DualWeightData:
    """Transported weights: C_k on the primal side, X'_k, Z'_k, R'_k dual-side."""

    C: list[np.ndarray]
    X_prime: list[np.ndarray]
    Z_prime: list[np.ndarray]
    R_prime: list[np.ndarray]
    residuals: dict[str, float]


def dual_weights(structure: DualStructure, x_seq) -> DualWeightData:
    """Extract C_k, X'_k, Z'_k and verify the dual weight laws.

    X'_k and Z'_k are the unique dual module operators with
    U_k^* (X_k (x) I) U_k = X'_k (x) I and U_k^* (C_k (x) I) U_k = Z'_k (x) I;
    in the Theta frame the extraction is conjugation.  The verification is
    genuinely dual-sided: R'_k is rebuilt from X' by the composition
    recursion, Z'^{(k)} from the Z'_j by dual products, and then the weight
    law Z'^{(k)*} Z'^{(k)} = R'^{-2}_k and the quotient law
    U_k^* (Z_k (x) I) U_k = Z'^{(k)} (Z'^{(k-1)} (x) I'_1)^{-1} are checked.
    """
    s = structure
    ind, ws = s.ind, s.ws
    calc = DualCalculus(s)
    levels = ind.levels
    for k in range(1, levels + 1):
        th = s.theta(k)
        gap = max(residual(th @ th.conj().T, np.eye(th.shape[0])),
                  residual(th.conj().T @ th, np.eye(ind.level_dim(k))))
        if gap > 1e-9:
            raise ValueError(f"dual basis frame at level {k} is not unitary "
                             f"(residual {gap:.2e}); representation or basis invalid")
    C = [ws.c_quotient(k) for k in range(levels + 1)]
    Zp = calc.z_matrices()
    Xp: list[np.ndarray] = [np.zeros((s.rep.h_dim, s.rep.h_dim), dtype=complex)]
    res = {"commutant": 0.0, "weight_law": 0.0, "quotient_law": 0.0}
    for k in range(1, levels + 1):
        th = s.theta(k)
        Xp.append(th @ ind.level_tensor_identity(as_complex(x_seq.X[k]), k) @ th.conj().T)
        for v, i, j in s.rep.commutant_basis():
            phi = calc.phi_prime(s.rep.commutant_unit(v, i, j), k)
            res["commutant"] = max(res["commutant"],
                                   residual(Xp[k] @ phi, phi @ Xp[k]),
                                   residual(Zp[k] @ phi, phi @ Zp[k]))
    r2p: list[np.ndarray] = [np.eye(s.rep.h_dim, dtype=complex)]
    Rp: list[np.ndarray] = [np.eye(s.rep.h_dim, dtype=complex)]
    for k in range(1, levels + 1):
        n_k = len(s.tuples(k))
        acc = np.zeros((n_k, n_k), dtype=complex)
        for j in range(1, k + 1):
            if k - j == 0:
                acc += Xp[j]
            else:
                acc += calc.tensor(Xp[j], j, r2p[k - j], k - j)
        r2p.append(acc)
        Rp.append(psd_sqrt(acc))
    zprod = calc.z_products(Zp)
    for k in range(1, levels + 1):
        if len(s.tuples(k)) == 0:
            continue
        res["weight_law"] = max(res["weight_law"],
                                residual(zprod[k].conj().T @ zprod[k], np.linalg.inv(r2p[k])))
        th = s.theta(k)
        lhs = th @ ind.level_tensor_identity(ws.Z[k], k) @ th.conj().T
        cpk = zprod[k] @ np.linalg.inv(calc.embed_prefix(zprod[k - 1], 1, k))
        res["quotient_law"] = max(res["quotient_law"], residual(lhs, cpk))
    return DualWeightData(C, Xp, Zp, Rp, res)


# ---------------------------------------------------------------------------
# identification unitaries from the computed (unstructured) dual basis
# ---------------------------------------------------------------------------


def _abstract_gram(dual: DualCorrespondence, ind: InducedSpace,
                   s_tuple: tuple[int, ...], t_mats: list[np.ndarray]) -> np.ndarray:
    """<s_1 (x) ..., t_1 (x) ...> by the recursive module formula."""
    c = dual.basis[s_tuple[0]].conj().T @ t_mats[0]
    if len(s_tuple) == 1:
        return c
    modified = [dual_left_level(ind, c, 1) @ t_mats[1]] + list(t_mats[2:])
    return _abstract_gram(dual, ind, s_tuple[1:], modified)


def u_k_unitary(graph: GraphCorrespondence, rep: Representation, k: int,
                dual: DualCorrespondence | None = None):
    """U_k: (E^sigma)^{(x)k} (x)_iota H -> E^{(x)k} (x)_sigma H as a matrix.

    The domain is built by interior_tensor from the recursive operator-valued
    Gram of dual basis tuples; the map sends a tuple tensor h to the product
    of insertions applied to h.  Returns (U_k, interior).  U_k is square and
    unitary exactly when the identification is complete; a dimension mismatch
    between the two constructions signals an intertwiner-basis bug.
    """
    dual = dual or intertwiner_basis(graph, rep)
    ind = InducedSpace(graph, rep, max(k, 1))
    h = rep.h_dim
    if k == 0:
        units = CommutantAlgebra(rep).units()
        gram = [[a.conj().T @ b for b in units] for a in units]
        interior = interior_tensor(gram, h)
        cols = np.zeros((ind.level_dim(0), len(units) * h), dtype=complex)
        for l, a in enumerate(units):
            cols[:, l * h:(l + 1) * h] = a  # level-0 coordinates are H itself
        return cols @ pinv(interior.coord_map), interior
    tuples = list(itertools.product(range(dual.dim), repeat=k))
    gram_blocks = [[None] * len(tuples) for _ in tuples]
    for a, s_t in enumerate(tuples):
        for b, t_t in enumerate(tuples):
            gram_blocks[a][b] = _abstract_gram(dual, ind, s_t, [dual.basis[i] for i in t_t])
    interior = interior_tensor(gram_blocks, h)
    d_target = ind.level_dim(k)
    if interior.rank != d_target:
        raise RuntimeError(
            f"interior tensor dimension {interior.rank} != induced dimension {d_target}; "
            "the intertwiner basis is inconsistent (is the correspondence full?)")
    cols = np.zeros((d_target, len(tuples) * h), dtype=complex)
    for l, t_t in enumerate(tuples):
        mat = dual.basis[t_t[-1]]
        for pos in range(k - 2, -1, -1):
            mat = ind.suffix_insert(dual.basis[t_t[pos]], 1, k - 1 - pos) @ mat
        cols[:, l * h:(l + 1) * h] = mat
    return cols @ pinv(interior.coord_map), interior


def u_k_unitarity_residual(graph: GraphCorrespondence, rep: Representation, k: int) -> float:
    try:
        u, interior = u_k_unitary(graph, rep, k)
    except RuntimeError:
        return float("inf")
    d_target = InducedSpace(graph, rep, max(k, 1)).level_dim(k)
    eye = np.eye(d_target)
    return max(residual(u @ u.conj().T, eye), residual(u.conj().T @ u, eye))


# ---------------------------------------------------------------------------
# section-5 commutation checks and reports
# ---------------------------------------------------------------------------


def primal_generators(ind: InducedSpace, ws: WeightSystem) -> list[tuple[str, np.ndarray]]:
    """Images Y (x) I_H of the algebra generators: vertex units and edges."""
    out = []
    space = TruncatedFock(ind.graph, ind.levels)
    for v in range(ind.graph.n_vertices):
        a = np.zeros(ind.graph.n_vertices)
        a[v] = 1.0
        out.append((f"phi({v})", ind.fock_tensor_identity(phi_inf(space, a))))
    for e in range(ind.graph.n_edges):
        w = weighted_creation(space, ws, CorrElement.basis_vector(ind.graph, 1, e))
        out.append((f"W({e})", ind.fock_tensor_identity(w)))
    return out


def commutation_check_section5(ind: InducedSpace, ws: WeightSystem,
                               commutant_dims: bool = False) -> dict:
    """Max commutator norm between primal images and transported dual images.

    Commutation holds exactly in the graded model; equality of commutants is
    not asserted at finite truncation, but nullspace dimensions of the two
    commutation systems are reported on small configurations when asked.
    """
    s = DualStructure(ind, ws)
    prim = primal_generators(ind, ws)
    dual_gens = s.dual_generators()
    worst, worst_pair = 0.0, ""
    for name_y, y in prim:
        for name_s, t in dual_gens:
            r = operator_norm(y @ t - t @ y)
            if r > worst:
                worst, worst_pair = r, f"[{name_y}, {name_s}]"
    report = {"max_commutator": worst, "worst_pair": worst_pair}
    if commutant_dims and ind.dim <= 40:
        report["primal_commutant_dim"] = _commutant_dim([m for _, m in prim])
        report["dual_commutant_dim"] = _commutant_dim([m for _, m in dual_gens])
    return report


def _commutant_dim(gens: list[np.ndarray], tol: float = 1e-9) -> int:
    d = gens[0].shape[0]
    eye = np.eye(d)
    rows = [np.kron(eye, g) - np.kron(g.T, eye) for g in gens]
    return nullspace(np.vstack(rows), tol).shape[1]


def pi_sigma_residuals(ind: InducedSpace, ws: WeightSystem, seed: int = 0) -> dict[str, float]:
    """Checks of pi = Ad(U_inf^*) o (- (x) I_H) on generators and short words.

    Verified: pi(I) = I; pi(phi_inf(a)) acts as sigma(a) through every
    dual-basis block; pi is isometric and multiplicative on random words; the
    image of a creation operator is one-subdiagonal in the dual frame.
    """
    rng = np.random.default_rng(seed)
    s = DualStructure(ind, ws)
    space = TruncatedFock(ind.graph, ind.levels)
    out = {"identity": residual(s.pi_sigma(np.eye(ind.fock.dim)), np.eye(ind.dim))}

    a = rng.standard_normal(ind.graph.n_vertices)
    img = s.pi_sigma(phi_inf(space, a))
    expected = np.zeros_like(img)
    pos = 0
    for k in range(ind.levels + 1):
        for t in s.tuples(k):
            if k == 0:
                expected[pos:pos + ind.rep.h_dim, pos:pos + ind.rep.h_dim] = ind.rep.sigma(a)
                pos += ind.rep.h_dim
            else:
                expected[pos, pos] = a[t.vertex]
                pos += 1
    out["left_action_formula"] = residual(img, expected)

    words = []
    for _ in range(3):
        e1, e2 = rng.integers(0, ind.graph.n_edges, size=2)
        w1 = weighted_creation(space, ws, CorrElement.basis_vector(ind.graph, 1, int(e1)))
        w2 = weighted_creation(space, ws, CorrElement.basis_vector(ind.graph, 1, int(e2)))
        words.append(w1.matrix @ w2.matrix + 0.3 * phi_inf(space, a).matrix)
    out["isometry"] = max(abs(operator_norm(s.pi_sigma(w)) -
                              operator_norm(ind.fock_tensor_identity(w))) for w in words)
    out["multiplicativity"] = max(
        residual(s.pi_sigma(w1 @ w2), s.pi_sigma(w1) @ s.pi_sigma(w2))
        for w1, w2 in zip(words, words[1:]))

    band = 0.0
    dims = [len(s.tuples(k)) if k else ind.rep.h_dim for k in range(ind.levels + 1)]
    offs = np.concatenate([[0], np.cumsum(dims)])
    for e in range(ind.graph.n_edges):
        img = s.pi_sigma(weighted_creation(space, ws, CorrElement.basis_vector(ind.graph, 1, e)))
        for i in range(ind.levels + 1):
            for j in range(ind.levels + 1):
                if i - j == 1:
                    continue
                band = max(band, operator_norm(img[offs[i]:offs[i + 1], offs[j]:offs[j + 1]]))
    out["creation_band"] = band
    return out


# ---------------------------------------------------------------------------
# dual of the dual: the omega identification (multiplicity-one case)
# ---------------------------------------------------------------------------


def omega_transport(ind: InducedSpace, ws: WeightSystem):
    """Double-dual identification data at multiplicities one.

    The first dual of a multiplicity-one graph correspondence is the edge
    space of the reversed graph, and dual basis tuples coincide index-by-index
    with reversed-graph paths, so the second dualization reuses the whole
    structured machinery on the reversed graph.  Returns
    (omega_full, s1, s2, ws_rev, z_second): the induced matrix of omega, the
    two dual structures, the first-dual weights as a reversed-graph weight
    system, and the extracted double-dual weight matrices (indexed by primal
    path bases, which the double-dual tuple bases reproduce).
    """
    if any(m != 1 for m in ind.rep.multiplicities):
        raise ValueError("double-dual transport is implemented for multiplicities one")
    s1 = DualStructure(ind, ws)
    calc1 = DualCalculus(s1)
    z_first = calc1.z_matrices()
    rev = ind.graph.reversed()
    ws_rev = WeightSystem(rev, ind.levels, z_first)
    rev_ind = InducedSpace(rev, ind.rep, ind.levels)
    s2 = DualStructure(rev_ind, ws_rev)
    z_second = [np.eye(ind.rep.h_dim, dtype=complex)]
    for k in range(1, ind.levels + 1):
        th2 = s2.theta(k)
        z_second.append(th2 @ rev_ind.level_tensor_identity(ws_rev.c_quotient(k), k) @ th2.conj().T)
    omega_full = s2.theta_full() @ s1.theta_full()
    return omega_full, s1, s2, ws_rev, z_second


def omega_checks(ind: InducedSpace, ws: WeightSystem, x_seq) -> dict[str, float]:
    """Residuals of the double-dual identities at multiplicities one.

    Checks, against independently built second-dual data:
      * conjugation by omega_k sends Z_k to Z''_k (the second-level weight is
        extracted from telescoping quotients of the first-dual weights, so the
        two routes genuinely differ) and X_k to X''_k;
      * conjugation by omega sends generators to generators: the image of a
        weighted creation operator is the double-dual weighted creation at
        omega(xi), and left actions are fixed;
      * the identification composed with the second-level product formula
        reproduces the plain insertion of each basis path.
    """
    omega_full, s1, s2, ws_rev, z_second = omega_transport(ind, ws)
    g = ind.graph
    space = TruncatedFock(g, ind.levels)
    ws2 = WeightSystem(g, ind.levels, z_second)
    out = {"weights": 0.0, "creation": 0.0, "left_action": 0.0, "insertion": 0.0}
    for k in range(1, ind.levels + 1):
        omega_k = s2.theta(k) @ s1.theta(k)
        x2 = s2.theta(k) @ (s1.theta(k) @ as_complex(x_seq.X[k]) @ s1.theta(k).conj().T) \
            @ s2.theta(k).conj().T
        out["weights"] = max(out["weights"],
                             residual(omega_k @ ws.Z[k] @ omega_k.conj().T, z_second[k]),
                             residual(omega_k @ as_complex(x_seq.X[k]) @ omega_k.conj().T, x2))
    for e in range(g.n_edges):
        xi = CorrElement.basis_vector(g, 1, e)
        w_mat = ind.fock_tensor_identity(weighted_creation(space, ws, xi))
        lhs = omega_full @ w_mat @ omega_full.conj().T
        omega_xi = s1.theta(1) @ _insertion_map(ind, xi)
        coeffs = _tuple_coefficients(s2, omega_xi)
        rhs = ind.fock_tensor_identity(weighted_creation(space, ws2, CorrElement(1, coeffs)))
        out["creation"] = max(out["creation"], residual(lhs, rhs))
    for v in range(g.n_vertices):
        a = np.zeros(g.n_vertices)
        a[v] = 1.0
        mat = ind.fock_tensor_identity(phi_inf(space, a))
        out["left_action"] = max(out["left_action"],
                                 residual(omega_full @ mat @ omega_full.conj().T, mat))
    # insertion identity: U_k Lambda^iota(omega_k xi) = L_xi for basis paths
    for k in range(1, min(ind.levels, 3) + 1):
        basis = path_basis(g, k)
        for p in range(basis.size):
            edges = basis.paths[p]
            omegas = [s1.theta(1) @ _insertion_map(ind, CorrElement.basis_vector(g, 1, f))
                      for f in edges]
            lam = omegas[-1]
            for pos in range(k - 2, -1, -1):
                lam = s2.ind.suffix_insert(omegas[pos], 1, k - 1 - pos) @ lam
            l_xi = _insertion_map(ind, CorrElement.basis_vector(g, k, p))
            out["insertion"] = max(out["insertion"],
                                   residual(s1.theta(k).conj().T @ lam, l_xi))
    return out


def _insertion_map(ind: InducedSpace, xi: CorrElement) -> np.ndarray:
    """L_xi: H -> level k of the induced space."""
    out = np.zeros((ind.level_dim(xi.level), ind.rep.h_dim), dtype=complex)
    for col in range(ind.rep.h_dim):
        h = np.zeros(ind.rep.h_dim)
        h[col] = 1.0
        out[:, col] = ind.simple_tensor(xi, h, embed=False)
    return out


def _tuple_coefficients(s2: DualStructure, mat: np.ndarray) -> np.ndarray:
    """Coefficients of a level-1 double-dual element over the tuple basis."""
    tuples = s2.tuples(1)
    out = np.zeros(len(tuples), dtype=complex)
    for n, t in enumerate(tuples):
        out[n] = (s2.intertwiner(t.edges, t.row).conj() * mat).sum()
    return out
