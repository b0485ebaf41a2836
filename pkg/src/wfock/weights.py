"""Admissible sequences, the derived positive operators R_k, and weight systems.

An admissible sequence X assigns to each level k a PSD matrix X_k on the path
basis, commuting with the left action, with X_0 = 0 and X_1 invertible.  From
X one forms

    R_k^2 = sum over j and over compositions alpha of k into j positive parts
            of X_{alpha(1)} (x) ... (x) X_{alpha(j)},

which we evaluate through the equivalent first-part recursion
R_k^2 = sum_j X_j (x) R_{k-j}^2 (the literal composition sum is exponential in
k and infeasible at scalar truncations around 60; the two agree term by term
by splitting off alpha(1), and the test suite cross-checks the enumeration).

A weight system Z is any sequence of invertible operators in the commutant of
the left action with Z_0 = I and Z^{(k)*} Z^{(k)} = R_k^{-2}, where Z^{(k)} is
the telescoping product of the weights.  The canonical choice is
Z_k = R_k^{-1} (I_1 (x) R_{k-1}), for which Z^{(k)} collapses to R_k^{-1}.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .graphs import (
    CorrElement,
    GraphCorrespondence,
    embed_prefix,
    embed_suffix,
    left_action,
    path_basis,
    tensor_pair,
)
from .linalg import ATOL, as_complex, operator_norm, psd_sqrt, residual


@dataclass(frozen=True)
class CompositionSet:
    """All functions alpha: {1..j} -> N with sum alpha = k, in colex order."""

    k: int
    j: int
    parts: tuple[tuple[int, ...], ...]

    @property
    def size(self) -> int:
        return len(self.parts)


def compositions(k: int, j: int) -> CompositionSet:
    """Compositions of k into j positive parts; |result| = C(k-1, j-1)."""
    if not (1 <= j <= k):
        raise ValueError("need 1 <= j <= k")
    out = []
    for cuts in itertools.combinations(range(1, k), j - 1):
        bounds = (0,) + cuts + (k,)
        out.append(tuple(bounds[i + 1] - bounds[i] for i in range(j)))
    out.sort(key=lambda t: t[::-1])
    return CompositionSet(k, j, tuple(out))


@dataclass
class AdmissibleSequence:
    """The data X = {X_k}_{k<=N} with the admissibility constraints.

    ``radius_certificate`` is a user-supplied bound asserting the growth
    condition limsup ||X_k||^{1/k} < inf; it cannot be checked from finitely
    many terms and is recorded, not verified.
    """

    graph: GraphCorrespondence
    levels: int
    X: list[np.ndarray] = field(default_factory=list)
    radius_certificate: float | None = None

    def __post_init__(self):
        self.X = [as_complex(x) for x in self.X]
        if len(self.X) != self.levels + 1:
            raise ValueError("need X_0 .. X_N")
        self.validate()

    @classmethod
    def from_scalar(cls, graph: GraphCorrespondence, xs, levels: int | None = None,
                    radius_certificate: float | None = None) -> "AdmissibleSequence":
        """Lift a scalar sequence (x_1, x_2, ...) to X_k = x_k * I per level."""
        xs = [float(x) for x in xs]
        n = levels if levels is not None else len(xs)
        mats = [np.zeros((graph.n_vertices, graph.n_vertices), dtype=complex)]
        for k in range(1, n + 1):
            d = path_basis(graph, k).size
            xk = xs[k - 1] if k - 1 < len(xs) else 0.0
            mats.append(xk * np.eye(d, dtype=complex))
        return cls(graph, n, mats, radius_certificate)

    def validate(self, tol: float = ATOL):
        g = self.graph
        if operator_norm(self.X[0]) > tol:
            raise ValueError("X_0 must vanish")
        for k, xk in enumerate(self.X):
            d = path_basis(g, k).size
            if xk.shape != (d, d):
                raise ValueError(f"X_{k} has shape {xk.shape}, expected {(d, d)}")
            if d == 0:
                continue
            if residual(xk, xk.conj().T) > tol:
                raise ValueError(f"X_{k} is not Hermitian")
            eigs = np.linalg.eigvalsh(0.5 * (xk + xk.conj().T))
            if eigs.size and eigs.min() < -tol:
                raise ValueError(f"X_{k} has eigenvalue {eigs.min():.2e} below the PSD floor")
            for v in range(g.n_vertices):
                a = np.zeros(g.n_vertices)
                a[v] = 1.0
                phi = left_action(g, a, k)
                if residual(xk @ phi, phi @ xk) > tol:
                    raise ValueError(f"X_{k} does not commute with the left action")
        if path_basis(g, 1).size:
            s = np.linalg.svd(self.X[1], compute_uv=False)
            if s.size == 0 or s.min() <= 1e-10:
                raise ValueError("X_1 must be invertible")


def composition_r2(x: AdmissibleSequence, k: int) -> np.ndarray:
    """R_k^2 by literal enumeration of compositions; test oracle, O(2^k)."""
    g = x.graph
    d = path_basis(g, k).size
    total = np.zeros((d, d), dtype=complex)
    for j in range(1, k + 1):
        for alpha in compositions(k, j).parts:
            term = x.X[alpha[0]]
            lvl = alpha[0]
            for part in alpha[1:]:
                term = tensor_pair(g, term, lvl, x.X[part], part)
                lvl += part
            total += term
    return total


def compute_R(x: AdmissibleSequence, k: int | None = None) -> list[np.ndarray]:
    """The positive invertible square roots R_0 .. R_k (R_0 = I on M).

    Evaluated through R_k^2 = sum_{j=1}^k X_j (x) R_{k-j}^2; the square root is
    Hermitian-eigendecomposition based with a small negative-eigenvalue clip.
    A sum that fails PSD beyond tolerance marks X invalid.
    """
    g = x.graph
    n = x.levels if k is None else k
    r2 = [np.eye(g.n_vertices, dtype=complex)]
    rs = [np.eye(g.n_vertices, dtype=complex)]
    for i in range(1, n + 1):
        d = path_basis(g, i).size
        acc = np.zeros((d, d), dtype=complex)
        for j in range(1, i + 1):
            if path_basis(g, j).size == 0:
                continue
            if i - j == 0:
                acc += x.X[j]
            else:
                acc += embed_prefix(g, x.X[j], j, i) @ embed_suffix(g, r2[i - j], i - j, i)
        r2.append(acc)
        try:
            rs.append(psd_sqrt(acc))
        except ValueError as exc:
            raise ValueError(f"R_{i}^2 is not PSD; X is not admissible: {exc}") from exc
    return rs


@dataclass
class WeightSystem:
    """Weights Z with cached products Z^{(k)}, Z^{(k,j)} and inverses."""

    graph: GraphCorrespondence
    levels: int
    Z: list[np.ndarray]
    R: list[np.ndarray] | None = None

    def __post_init__(self):
        self.Z = [as_complex(z) for z in self.Z]
        if len(self.Z) != self.levels + 1:
            raise ValueError("need Z_0 .. Z_N")
        if residual(self.Z[0], np.eye(self.graph.n_vertices)) > ATOL:
            raise ValueError("Z_0 must be the identity on M")
        self._zprod: dict[int, np.ndarray] = {}
        self._zprod_inv: dict[int, np.ndarray] = {}

    def z_prod(self, k: int) -> np.ndarray:
        """Z^{(k)} = Z_k (I_1 (x) Z_{k-1}) ... (I_{k-1} (x) Z_1)."""
        if k not in self._zprod:
            g = self.graph
            if k == 0:
                acc = np.eye(g.n_vertices, dtype=complex)
            else:
                acc = self.Z[k].copy()
                for a in range(1, k):
                    acc = acc @ embed_suffix(g, self.Z[k - a], k - a, k)
            self._zprod[k] = acc
        return self._zprod[k]

    def z_prod_inv(self, k: int) -> np.ndarray:
        if k not in self._zprod_inv:
            zp = self.z_prod(k)
            self._zprod_inv[k] = np.linalg.inv(zp) if zp.size else zp.copy()
        return self._zprod_inv[k]

    def z_between(self, k: int, j: int) -> np.ndarray:
        """Z^{(k,j)} = Z^{(k)} (I_{k-j} (x) Z^{(j)})^{-1}, the partial product."""
        if not (0 <= j <= k):
            raise ValueError("need 0 <= j <= k")
        if j == k:
            d = path_basis(self.graph, k).size
            return np.eye(d, dtype=complex)
        if j == 0:
            return self.z_prod(k)
        inner = embed_suffix(self.graph, self.z_prod(j), j, k)
        return self.z_prod(k) @ np.linalg.inv(inner)

    def c_quotient(self, k: int) -> np.ndarray:
        """C_k = Z^{(k)} (Z^{(k-1)} (x) I_1)^{-1}; the prefix-sided quotient."""
        if k == 0:
            return np.eye(self.graph.n_vertices, dtype=complex)
        inner = embed_prefix(self.graph, self.z_prod(k - 1), k - 1, k)
        return self.z_prod(k) @ np.linalg.inv(inner)

    def c_between(self, i: int, k: int) -> np.ndarray:
        """Z^{(i)} ((Z^{(i-k)})^{-1} (x) I_k): prefix-sided partial product."""
        if not (0 <= k <= i):
            raise ValueError("need 0 <= k <= i")
        if k == 0:
            d = path_basis(self.graph, i).size
            return np.eye(d, dtype=complex)
        if k == i:
            return self.z_prod(i)
        inner = embed_prefix(self.graph, self.z_prod_inv(i - k), i - k, i)
        return self.z_prod(i) @ inner

    def validate(self, tol: float = ATOL) -> dict[str, float]:
        """Residuals of the defining laws against the attached R sequence."""
        if self.R is None:
            raise ValueError("no R sequence attached")
        g = self.graph
        out = {"weight_law": 0.0, "projection_law": 0.0, "telescope": 0.0, "commutant": 0.0}
        for k in range(self.levels + 1):
            d = path_basis(g, k).size
            if d == 0:
                continue
            zp = self.z_prod(k)
            r2 = self.R[k] @ self.R[k]
            eye = np.eye(d)
            out["weight_law"] = max(out["weight_law"], residual(zp.conj().T @ zp, np.linalg.inv(r2)))
            out["projection_law"] = max(out["projection_law"], residual(zp @ r2 @ zp.conj().T, eye))
            for v in range(g.n_vertices):
                a = np.zeros(g.n_vertices)
                a[v] = 1.0
                phi = left_action(g, a, k)
                out["commutant"] = max(out["commutant"], residual(self.Z[k] @ phi, phi @ self.Z[k]))
            if k >= 1 and path_basis(g, k).size:
                lhs = self.z_prod_inv(k) @ self.Z[k]
                rhs = embed_suffix(g, self.z_prod_inv(k - 1), k - 1, k)
                out["telescope"] = max(out["telescope"], residual(lhs, rhs))
        return out


def canonical_weights(graph: GraphCorrespondence, R: list[np.ndarray]) -> WeightSystem:
    """The canonical sequence Z_k = R_k^{-1} (I_1 (x) R_{k-1}).

    The unweighted setting is recovered when every Z_k is the identity, which
    happens exactly for the free-Szego choice X_1 = I, X_k = 0 (k >= 2).
    """
    zs = [np.eye(graph.n_vertices, dtype=complex)]
    for k in range(1, len(R)):
        d = path_basis(graph, k).size
        if d == 0:
            zs.append(np.zeros((0, 0), dtype=complex))
            continue
        lifted = embed_suffix(graph, R[k - 1], k - 1, k)
        zs.append(np.linalg.solve(R[k], lifted))
    return WeightSystem(graph, len(R) - 1, zs, R=R)


def weight_system_from(x: AdmissibleSequence, Z: list[np.ndarray] | None = None) -> WeightSystem:
    """Canonical weights for X, or validate a user-supplied Z against X."""
    R = compute_R(x)
    if Z is None:
        return canonical_weights(x.graph, R)
    ws = WeightSystem(x.graph, x.levels, Z, R=R)
    res = ws.validate()
    worst = max(res.values())
    if worst > 1e-8:
        raise ValueError(f"supplied Z is not a weight sequence for X (residual {worst:.2e})")
    return ws


def scale_root_element(x: AdmissibleSequence, k: int, idx: int) -> CorrElement:
    """X_k^{1/2} applied to the idx-th basis path, as a correspondence element."""
    root = psd_sqrt(x.X[k])
    return CorrElement(k, root[:, idx])


def admissible_from_kernel_coeffs(a, tol: float = 1e-12) -> tuple[list[float], bool, str]:
    """Invert kernel coefficients a_k = R_k^2 into the scalar sequence x.

    Solves sum_k a_k t^k = 1 / (1 - sum_{k>=1} x_k t^k) by power-series
    reciprocal: x_k = a_k - sum_{j=1}^{k-1} x_j a_{k-j}.  The sequence is
    admissible iff every x_k clears a small negative floor and x_1 > 0; this
    is the scalar complete-Pick criterion (Hardy and Dirichlet pass, Bergman
    fails at x_2 = -1).
    """
    a = [float(v) for v in a]
    if not a or abs(a[0] - 1.0) > tol:
        raise ValueError("kernel coefficients must start at a_0 = 1")
    if any(v <= 0 for v in a):
        raise ValueError("kernel coefficients must be positive")
    xs: list[float] = []
    for k in range(1, len(a)):
        xk = a[k] - sum(xs[j - 1] * a[k - j] for j in range(1, k))
        xs.append(xk)
    if xs and xs[0] <= 0:
        return xs, False, "x_1 <= 0"
    for k, xk in enumerate(xs, start=1):
        if xk < -tol:
            return xs, False, f"x_{k} = {xk:.6g} < 0"
    return xs, True, "admissible"


def scalar_r2(xs, n: int) -> list[float]:
    """Scalar R_k^2 from x by the same recursion; round-trip oracle."""
    r2 = [1.0]
    for k in range(1, n + 1):
        r2.append(sum((xs[j - 1] if j - 1 < len(xs) else 0.0) * r2[k - j] for j in range(1, k + 1)))
    return r2
