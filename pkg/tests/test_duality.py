import numpy as np
import pytest

from wfock.duality import (
    DualCalculus,
    DualStructure,
    commutation_check_section5,
    dual_weights,
    intertwiner_basis,
    interior_tensor,
    omega_checks,
    pi_sigma_residuals,
    u_k_unitarity_residual,
    u_k_unitary,
)
from wfock.fock import TruncatedFock, phi_inf
from wfock.graphs import GraphCorrespondence, path_basis
from wfock.induced import InducedSpace, Representation
from wfock.linalg import operator_norm, residual
from wfock.weights import AdmissibleSequence, admissible_from_kernel_coeffs, weight_system_from

FREE2 = GraphCorrespondence.free(2)
CYCLE2 = GraphCorrespondence.cycle(2)
TRIANGLE = GraphCorrespondence(3, ((0, 1), (1, 2), (2, 0), (0, 0)))


def dirichlet_x(graph, n):
    xs, ok, _ = admissible_from_kernel_coeffs([1 / (k + 1) for k in range(n + 1)])
    assert ok
    return AdmissibleSequence.from_scalar(graph, xs, levels=n)


def szego_x(graph, n):
    return AdmissibleSequence.from_scalar(graph, [1.0], levels=n)


CASES = [
    (FREE2, Representation((1,)), 4),
    (FREE2, Representation((2,)), 3),
    (CYCLE2, Representation((1, 1)), 4),
    (CYCLE2, Representation((2, 1)), 4),
    (TRIANGLE, Representation((1, 1, 1)), 3),
]


def test_intertwiner_dimensions():
    # single vertex, d loops, multiplicity 1: dimension d
    dual = intertwiner_basis(FREE2, Representation((1,)))
    assert dual.dim == 2
    dual = intertwiner_basis(CYCLE2, Representation((1, 1)))
    assert dual.dim == 2
    dual = intertwiner_basis(CYCLE2, Representation((2, 3)))
    assert dual.dim == 2 * 3 + 3 * 2


def test_intertwiner_property():
    graph, rep = CYCLE2, Representation((2, 1))
    dual = intertwiner_basis(graph, rep)
    ind = InducedSpace(graph, rep, 1)
    for t in dual.basis:
        for v in range(graph.n_vertices):
            a = np.zeros(graph.n_vertices)
            a[v] = 1.0
            assert residual(t @ rep.sigma(a), ind.sigma_level(a, 1) @ t) < 1e-10


def test_interior_tensor_identity_gram():
    out = interior_tensor([[np.eye(3)]], 3)
    assert out.rank == 3
    v = out.coords(np.array([1.0, 2.0, 3.0]))
    assert np.isclose(np.linalg.norm(v) ** 2, 14.0)


def test_interior_tensor_rank_deficient():
    gram = [[np.eye(2), np.eye(2)], [np.eye(2), np.eye(2)]]
    out = interior_tensor(gram, 2)
    assert out.rank == 2  # quotient by the null direction f_0 - f_1


def test_interior_tensor_rejects_indefinite():
    with pytest.raises(ValueError):
        interior_tensor([[-np.eye(2)]], 2)


def test_theta_unitary():
    for graph, rep, n in CASES:
        ws = weight_system_from(szego_x(graph, n))
        s = DualStructure(InducedSpace(graph, rep, n), ws)
        for k in range(n + 1):
            th = s.theta(k)
            d = s.ind.level_dim(k)
            if k > 0:
                assert th.shape == (len(s.tuples(k)), d)
            assert residual(th @ th.conj().T, np.eye(th.shape[0])) < 1e-12
            assert residual(th.conj().T @ th, np.eye(d)) < 1e-12


def test_u_k_unitarity():
    for graph, rep in [(FREE2, Representation((1,))), (CYCLE2, Representation((1, 1))),
                       (CYCLE2, Representation((2, 1)))]:
        for k in range(0, 3):
            assert u_k_unitarity_residual(graph, rep, k) < 1e-10


def test_u1_dimension_free_case():
    u, interior = u_k_unitary(FREE2, Representation((1,)), 1)
    assert interior.rank == 2
    assert u.shape == (2, 2)


def test_u_k_insertion_identity():
    # U_k applied to (tuple tensor h)-coordinates reproduces the product map
    graph, rep, k = CYCLE2, Representation((2, 1)), 2
    dual = intertwiner_basis(graph, rep)
    u, interior = u_k_unitary(graph, rep, k, dual=dual)
    ind = InducedSpace(graph, rep, k)
    h = rep.h_dim
    n_tuples = dual.dim ** k
    for flat, (i, j) in enumerate((a, b) for a in range(dual.dim) for b in range(dual.dim)):
        lam = ind.suffix_insert(dual.basis[i], 1, 1) @ dual.basis[j]
        for col in range(h):
            weights = np.zeros(n_tuples * h)
            weights[flat * h + col] = 1.0
            assert np.allclose(u @ interior.coords(weights), lam[:, col], atol=1e-10)


def test_rho_phi_isometric_on_commutant():
    graph, rep, n = CYCLE2, Representation((2, 1)), 3
    ws = weight_system_from(szego_x(graph, n))
    s = DualStructure(InducedSpace(graph, rep, n), ws)
    rng = np.random.default_rng(2)
    from wfock.induced import CommutantAlgebra
    from wfock.linalg import operator_norm, rng_complex

    a = CommutantAlgebra(rep).project(rng_complex(rng, rep.h_dim, rep.h_dim))
    assert abs(operator_norm(s.rho_phi(a)) - operator_norm(a)) < 1e-12
    assert residual(s.rho_phi(a.conj().T), s.rho_phi(a).conj().T) < 1e-14


def test_commutation_section5():
    for graph, rep, n in CASES:
        for make_x in (szego_x, dirichlet_x):
            ws = weight_system_from(make_x(graph, n))
            ind = InducedSpace(graph, rep, n)
            report = commutation_check_section5(ind, ws)
            assert report["max_commutator"] < 1e-10, (graph, rep, report)


def test_commutant_dims_report():
    graph, rep, n = CYCLE2, Representation((1, 1)), 2
    ws = weight_system_from(szego_x(graph, n))
    report = commutation_check_section5(InducedSpace(graph, rep, n), ws, commutant_dims=True)
    assert report["primal_commutant_dim"] >= len(rep.commutant_basis())
    assert report["dual_commutant_dim"] >= graph.n_vertices


def test_pi_sigma_properties():
    graph, rep, n = CYCLE2, Representation((2, 1)), 3
    ws = weight_system_from(dirichlet_x(graph, n))
    res = pi_sigma_residuals(InducedSpace(graph, rep, n), ws, seed=11)
    assert res["identity"] < 1e-12
    assert res["left_action_formula"] < 1e-12
    assert res["isometry"] < 1e-10
    assert res["multiplicativity"] < 1e-10
    assert res["creation_band"] < 1e-12


def test_dual_weights_laws():
    for graph, rep, n in CASES:
        for make_x in (szego_x, dirichlet_x):
            x = make_x(graph, n)
            ws = weight_system_from(x)
            s = DualStructure(InducedSpace(graph, rep, n), ws)
            data = dual_weights(s, x)
            assert max(data.residuals.values()) < 1e-9, (graph, rep, data.residuals)


def test_dual_weights_unweighted_trivial():
    graph, rep, n = CYCLE2, Representation((1, 1)), 3
    ws = weight_system_from(szego_x(graph, n))
    s = DualStructure(InducedSpace(graph, rep, n), ws)
    data = dual_weights(s, szego_x(graph, n))
    for k in range(n + 1):
        assert residual(data.C[k], np.eye(data.C[k].shape[0])) < 1e-12
        assert residual(data.Z_prime[k], np.eye(data.Z_prime[k].shape[0])) < 1e-12


def test_dual_weights_scalar_case_matches_c():
    # one vertex, one loop, multiplicity 1: Z'_k = C_k as numbers
    graph, rep, n = GraphCorrespondence.free(1), Representation((1,)), 4
    x = dirichlet_x(graph, n)
    ws = weight_system_from(x)
    s = DualStructure(InducedSpace(graph, rep, n), ws)
    data = dual_weights(s, x)
    for k in range(1, n + 1):
        assert np.isclose(data.Z_prime[k][0, 0], data.C[k][0, 0])


def test_dual_calculus_embeddings_consistent():
    graph, rep, n = CYCLE2, Representation((1, 1)), 3
    ws = weight_system_from(dirichlet_x(graph, n))
    s = DualStructure(InducedSpace(graph, rep, n), ws)
    calc = DualCalculus(s)
    zp = calc.z_matrices()
    # I'_1 (x) (I'_1 (x) Z'_1) = I'_2 (x) Z'_1
    inner = calc.embed_suffix(zp[1], 1, 2)
    assert residual(calc.embed_suffix(inner, 1, 3), calc.embed_suffix(zp[1], 2, 3)) < 1e-13
    # prefix and suffix embeddings commute on disjoint legs
    a = calc.embed_prefix(zp[1], 2, 3)
    b = calc.embed_suffix(zp[2], 1, 3)
    assert residual(a @ b, b @ a) < 1e-13


def test_omega_checks_multiplicity_one():
    for graph, n in [(FREE2, 3), (CYCLE2, 4), (TRIANGLE, 3)]:
        rep = Representation((1,) * graph.n_vertices)
        for make_x in (szego_x, dirichlet_x):
            x = make_x(graph, n)
            ws = weight_system_from(x)
            out = omega_checks(InducedSpace(graph, rep, n), ws, x)
            assert max(out.values()) < 1e-9, (graph, make_x, out)


def test_omega_requires_multiplicity_one():
    graph, n = CYCLE2, 2
    ws = weight_system_from(szego_x(graph, n))
    with pytest.raises(ValueError):
        omega_checks(InducedSpace(graph, Representation((2, 1)), n), ws, szego_x(graph, n))
