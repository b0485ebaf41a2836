import numpy as np
import pytest

from wfock.fock import TruncatedFock, creation, phi_inf
from wfock.graphs import CorrElement, GraphCorrespondence, path_basis
from wfock.induced import (
    CommutantAlgebra,
    InducedSpace,
    Representation,
    gamma_conjugation_residual,
    gamma_decomposition,
)
from wfock.linalg import residual, rng_complex

CYCLE2 = GraphCorrespondence.cycle(2)
FREE2 = GraphCorrespondence.free(2)


def test_representation_basics():
    rep = Representation((2, 3))
    assert rep.h_dim == 5
    a = np.array([2.0, -1.0])
    sig = rep.sigma(a)
    assert np.allclose(np.diag(sig), [2, 2, -1, -1, -1])
    with pytest.raises(ValueError):
        Representation((1, 0))


def test_commutant_algebra():
    rep = Representation((2, 1))
    alg = CommutantAlgebra(rep)
    assert alg.dim == 5
    units = alg.units()
    assert len(units) == 5
    for u in units:
        assert alg.contains(u)
        assert np.allclose(u @ rep.sigma([1.0, 2.0]), rep.sigma([1.0, 2.0]) @ u)
    assert not alg.contains(np.ones((3, 3)))


def test_induced_dims():
    rep = Representation((2, 1))
    ind = InducedSpace(CYCLE2, rep, 3)
    # level k paths alternate; block size = multiplicity at the path source
    for k in range(4):
        basis = path_basis(CYCLE2, k)
        assert ind.level_dim(k) == sum(rep.multiplicities[s] for s in basis.sources)


def test_fock_tensor_identity_multiplicative():
    rng = np.random.default_rng(0)
    rep = Representation((2, 1))
    ind = InducedSpace(CYCLE2, rep, 3)
    space = TruncatedFock(CYCLE2, 3)
    a = rng.standard_normal(2)
    t = creation(space, CorrElement.basis_vector(CYCLE2, 1, 0))
    p = phi_inf(space, a)
    lhs = ind.fock_tensor_identity(t.matrix @ p.matrix)
    rhs = ind.fock_tensor_identity(t) @ ind.fock_tensor_identity(p)
    assert residual(lhs, rhs) < 1e-12


def test_dual_left_commutes_with_primal():
    rep = Representation((2, 2))
    ind = InducedSpace(CYCLE2, rep, 3)
    space = TruncatedFock(CYCLE2, 3)
    rng = np.random.default_rng(1)
    a_mat = CommutantAlgebra(rep).project(rng_complex(rng, 4, 4))
    da = ind.dual_left(a_mat)
    for e in range(CYCLE2.n_edges):
        t = ind.fock_tensor_identity(creation(space, CorrElement.basis_vector(CYCLE2, 1, e)))
        assert residual(da @ t, t @ da) < 1e-12


def test_simple_tensor_balancing():
    # xi . a (x) h = xi (x) sigma(a) h
    rep = Representation((2, 1))
    ind = InducedSpace(CYCLE2, rep, 2)
    rng = np.random.default_rng(2)
    basis = path_basis(CYCLE2, 2)
    xi = CorrElement(2, rng_complex(rng, basis.size))
    h = rng_complex(rng, rep.h_dim)
    a = np.array([0.5, -2.0])
    xa = CorrElement(2, xi.coeffs * a[list(basis.sources)])
    assert np.allclose(ind.simple_tensor(xa, h), ind.simple_tensor(xi, rep.sigma(a) @ h))


def test_gamma_identity_unitary():
    rep = Representation((1, 2))
    u, blocks = gamma_decomposition(CYCLE2, rep, 2)
    assert np.allclose(u @ u.conj().T, np.eye(u.shape[0]))
    assert np.allclose(u.conj().T @ u, np.eye(u.shape[0]))
    assert len(blocks) == path_basis(CYCLE2, 2).size


def test_gamma_conjugation_formula():
    rng = np.random.default_rng(3)
    for graph, mults in [(CYCLE2, (2, 1)), (FREE2, (3,))]:
        rep = Representation(mults)
        k = 2
        basis = path_basis(graph, k)
        y = rng_complex(rng, basis.size, basis.size)
        for i in range(basis.size):
            for j in range(basis.size):
                if basis.sources[i] != basis.sources[j]:
                    y[i, j] = 0.0
        assert gamma_conjugation_residual(graph, rep, y, k) < 1e-12
        # Y = I: block-diagonal projections
        assert gamma_conjugation_residual(graph, rep, np.eye(basis.size), k) < 1e-14


def test_gamma_single_loop_trivial():
    rep = Representation((1,))
    u, blocks = gamma_decomposition(GraphCorrespondence.free(1), rep, 3)
    assert u.shape == (1, 1)


def test_vacuum_and_basis_inserters():
    rep = Representation((2, 1))
    ind = InducedSpace(CYCLE2, rep, 2)
    vac = ind.vacuum_inserter()
    assert np.allclose(vac.conj().T @ vac, np.eye(rep.h_dim))
    ins = ind.basis_inserter(1, 0)
    # edge 0 runs 0 -> 1, so the inserter ranges over the source block (vertex 0)
    assert np.allclose(ins.conj().T @ ins, rep.sigma([1.0, 0.0]))
