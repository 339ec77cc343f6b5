from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from symsearch.errors import InvalidParameterError
from symsearch.graph import _hamiltonian, build_balanced_tree, build_complete, build_truncated_simplex
from symsearch.reduction import (
    ReducedBasis,
    class_sums,
    invariance_residual,
    lanczos_basis,
    lift,
    project_state,
    reduce,
)
from symsearch.search import orbit_basis, uniform_state
from symsearch.symmetry import GeneratorSet, OrbitPartition, family_generators, find_automorphisms, orbits

from conftest import small_graphs


def tree_closed_form(M: int, gamma: float) -> np.ndarray:
    """6x6 tree Hamiltonian in the (a, b, c, d, e, f) orbit basis."""
    r1, rM = math.sqrt(M - 1), math.sqrt(M)
    X = np.array([
        [-1 + 1 / gamma, 0, 0, 1, 0, 0],
        [0, -1, 0, r1, 0, 0],
        [0, 0, -1, 0, rM, 0],
        [1, r1, 0, -M - 1, 0, 1],
        [0, 0, rM, 0, -M - 1, r1],
        [0, 0, 0, 1, r1, -M],
    ])
    return -gamma * X


def family_instances():
    return [
        ("complete", build_complete(12), "adjacency", 0),
        ("tree", build_balanced_tree(2, 4), "laplacian", 0),
        ("simplex", build_truncated_simplex(2, 3), "adjacency", 3),
        ("simplex1", build_truncated_simplex(1, 5), "laplacian", 0),
    ]


class TestReducedBasis:
    def test_marked_first(self):
        part = OrbitPartition.from_labels([0, 0, 1, 2, 2])
        b = ReducedBasis.from_partition(part, marked=2)
        assert b.classes == ((2,), (0, 1), (3, 4))
        assert b.labels == ("2", "0", "3")
        assert b.class_index.tolist() == [1, 1, 0, 2, 2]

    def test_marked_must_be_singleton(self):
        with pytest.raises(InvalidParameterError):
            ReducedBasis.from_partition(OrbitPartition.from_labels([0, 0, 1]), marked=0)

    def test_isometry(self, tree4):
        B = orbit_basis(tree4, 0).matrix()
        np.testing.assert_allclose(B.T @ B, np.eye(6), atol=1e-15)


class TestReduce:
    @pytest.mark.parametrize("N", [3, 4, 7, 16, 64, 256])
    @pytest.mark.parametrize("gamma", [0.01, 1 / 3, 1.0, 2.5])
    def test_complete_closed_form(self, N, gamma):
        g = build_complete(N)
        basis = orbit_basis(g, 0)
        red = reduce(_hamiltonian(g, "adjacency", gamma, 0, sparse=True), basis).matrix
        expected = -gamma * np.array([[1 / gamma, math.sqrt(N - 1)], [math.sqrt(N - 1), N - 2]])
        # tens of thousands of inexact edge terms are summed per block
        np.testing.assert_allclose(red, expected, rtol=1e-11, atol=1e-13)

    @pytest.mark.parametrize("M", [2, 3, 4, 6])
    @pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
    def test_tree_closed_form(self, M, gamma):
        g = build_balanced_tree(2, M)
        basis = orbit_basis(g, 0)
        assert basis.sizes.tolist() == [1, M - 1, M * (M - 1), 1, M - 1, 1]
        red = reduce(_hamiltonian(g, "laplacian", gamma, 0), basis).matrix
        np.testing.assert_allclose(red, tree_closed_form(M, gamma), atol=1e-13)

    def test_trivial_partition_is_identity_map(self, tree4):
        H = _hamiltonian(tree4, "laplacian", 0.7, 5)
        basis = ReducedBasis.from_partition(OrbitPartition.from_labels(range(21)), marked=5)
        perm = [c[0] for c in basis.classes]
        np.testing.assert_array_equal(reduce(H, basis).matrix, H[np.ix_(perm, perm)])
        natural = ReducedBasis.from_partition(OrbitPartition.from_labels(range(21)))
        np.testing.assert_array_equal(reduce(H, natural).matrix, H)

    def test_exactly_symmetric(self, simplex25):
        basis = orbit_basis(simplex25, 4)
        red = reduce(_hamiltonian(simplex25, "adjacency", 0.6, 4, sparse=True), basis).matrix
        assert np.array_equal(red, red.T)

    @given(small_graphs(max_n=7), st.data())
    def test_entries_match_double_sum(self, g, data):
        w = data.draw(st.integers(0, g.n - 1))
        basis = orbit_basis(g, w, find_automorphisms(g))
        # integer matrix: laplacian with unit rate plus an integer oracle weight
        H = _hamiltonian(g, "laplacian", 1.0, w)
        S = class_sums(H, basis)
        for a, ca in enumerate(basis.classes):
            for b, cb in enumerate(basis.classes):
                assert S[a, b] == sum(H[i, j] for i in ca for j in cb)

    def test_matches_dense_projection(self, simplex25):
        basis = orbit_basis(simplex25, 4)
        H = _hamiltonian(simplex25, "laplacian", 0.6, 4)
        B = basis.matrix()
        np.testing.assert_allclose(reduce(H, basis).matrix, B.T @ H @ B, atol=1e-13)


class TestResidual:
    @pytest.mark.parametrize("name,g,kind,w", family_instances(), ids=lambda x: x if isinstance(x, str) else "")
    def test_orbit_basis_closed(self, name, g, kind, w):
        basis = orbit_basis(g, w, find_automorphisms(g))
        for gamma in (0.1, 1.0, 3.0):
            assert invariance_residual(_hamiltonian(g, kind, gamma, w, sparse=True), basis) <= 1e-12

    @pytest.mark.parametrize("M", [4, 8, 16])
    def test_tree_sizes(self, M):
        g = build_balanced_tree(2, M)
        assert invariance_residual(_hamiltonian(g, "laplacian", 2.0, 0, sparse=True), orbit_basis(g, 0)) <= 1e-12

    @pytest.mark.parametrize("N", [4, 64, 256])
    def test_complete_sizes(self, N):
        g = build_complete(N)
        H = _hamiltonian(g, "adjacency", 1 / N, 0, sparse=True)
        assert invariance_residual(H, orbit_basis(g, 0)) <= 1e-12

    def test_wrong_basis_value(self):
        # one class over K_4 against the marked Hamiltonian: leak on the w column is
        # -e_w/2 + u/4, so the largest entry of (I-P)HP is (3/8) * (1/2)
        g = build_complete(4)
        basis = orbit_basis(g, None)
        assert basis.dim == 1
        for gamma in (0.25, 1.0):
            H = _hamiltonian(g, "laplacian", gamma, 0)
            assert invariance_residual(H, basis) == pytest.approx(3 / 16, abs=1e-15)
            P = basis.matrix() @ basis.matrix().T
            brute = np.max(np.abs((np.eye(4) - P) @ H @ P))
            assert brute == pytest.approx(3 / 16, abs=1e-15)

    def test_identity(self, tree4):
        assert invariance_residual(np.eye(21), orbit_basis(tree4, 0)) <= 1e-15  # zero up to rounding

    def test_shape_mismatch(self, tree4):
        with pytest.raises(InvalidParameterError):
            invariance_residual(np.eye(3), orbit_basis(tree4, 0))


class TestStateMaps:
    def test_uniform_coordinates(self, tree4):
        basis = orbit_basis(tree4, 0)
        np.testing.assert_allclose(project_state(uniform_state(21), basis), np.sqrt(basis.sizes / 21), atol=1e-15)

    def test_lift_unit(self, tree4):
        basis = orbit_basis(tree4, 0)
        for a in range(basis.dim):
            e = np.zeros(basis.dim)
            e[a] = 1.0
            np.testing.assert_allclose(lift(e, basis), basis.state(a), atol=1e-15)

    def test_orthogonal_vector(self, tree4):
        basis = orbit_basis(tree4, 0)
        v = np.zeros(21)
        v[1], v[2] = 1.0, -1.0  # antisymmetric within the sibling class
        np.testing.assert_allclose(project_state(v / math.sqrt(2), basis), 0.0, atol=1e-16)

    @given(st.lists(st.floats(-1, 1), min_size=6, max_size=6))
    def test_project_lift_roundtrip(self, coords):
        basis = orbit_basis(build_balanced_tree(2, 3), 0)
        u = np.array(coords)
        np.testing.assert_allclose(project_state(lift(u, basis), basis), u, atol=1e-14)

    @given(st.lists(st.floats(-1, 1), min_size=13, max_size=13))
    def test_lift_project_is_projector(self, values):
        basis = orbit_basis(build_balanced_tree(2, 3), 0)
        v = np.array(values)
        once = lift(project_state(v, basis), basis)
        B = basis.matrix()
        np.testing.assert_allclose(once, B @ (B.T @ v), atol=1e-14)
        np.testing.assert_allclose(lift(project_state(once, basis), basis), once, atol=1e-14)

    def test_size_checks(self, tree4):
        basis = orbit_basis(tree4, 0)
        with pytest.raises(InvalidParameterError):
            project_state(np.ones(3), basis)
        with pytest.raises(InvalidParameterError):
            lift(np.ones(3), basis)


class TestEigenLift:
    @pytest.mark.parametrize("name,g,kind,w", family_instances(), ids=lambda x: x if isinstance(x, str) else "")
    def test_reduced_eigenpairs_are_full_eigenpairs(self, name, g, kind, w):
        from symsearch.dynamics import eigendecompose
        basis = orbit_basis(g, w, find_automorphisms(g))
        H = _hamiltonian(g, kind, 0.8, w)
        spec = eigendecompose(reduce(H, basis).matrix)
        full = np.linalg.eigvalsh(H)
        for lam, v in zip(spec.eigenvalues, spec.eigenvectors.T):
            x = lift(v, basis)
            assert np.linalg.norm(H @ x - lam * x) <= 1e-10
            assert np.min(np.abs(full - lam)) <= 1e-10


class TestLanczos:
    @pytest.mark.parametrize("M", [3, 4, 5, 7])
    def test_tree_vectors(self, M):
        g = build_balanced_tree(2, M)
        basis = orbit_basis(g, 0)
        H = _hamiltonian(g, "laplacian", 1.0, 0)
        vecs = lanczos_basis(H, basis.state(0), 3)
        coords = [project_state(v, basis) for v in vecs]
        d = np.zeros(6)
        d[3] = 1.0
        assert abs(abs(coords[1] @ d) - 1) < 1e-12
        target = np.zeros(6)
        target[1], target[5] = math.sqrt(M - 1), 1.0
        target /= np.linalg.norm(target)
        assert np.min([np.linalg.norm(coords[2] - s * target) for s in (1, -1)]) < 1e-10

    def test_eigenvector_start_deflates(self, tree4):
        H = _hamiltonian(tree4, "laplacian", 1.0, None)
        assert len(lanczos_basis(H, uniform_state(21), 5)) == 1

    def test_span_from_uniform(self, tree4):
        basis = orbit_basis(tree4, 0)
        H = _hamiltonian(tree4, "laplacian", 1.0, 0)
        K = np.column_stack(lanczos_basis(H, uniform_state(21), 21))
        assert K.shape[1] == 6
        assert np.max(scipy.linalg.subspace_angles(K, basis.matrix())) <= 1e-8

    @given(small_graphs(min_n=3, max_n=7), st.integers(1, 7), st.data())
    def test_orthonormal(self, g, k, data):
        w = data.draw(st.integers(0, g.n - 1))
        H = _hamiltonian(g, "laplacian", 1.0, w)
        start = np.zeros(g.n)
        start[w] = 1.0
        K = np.column_stack(lanczos_basis(H, start, min(k, g.n)))
        np.testing.assert_allclose(K.T @ K, np.eye(K.shape[1]), atol=1e-10)

    def test_argument_checks(self, tree4):
        H = np.eye(21)
        with pytest.raises(InvalidParameterError):
            lanczos_basis(H, np.ones(21), 2)
        with pytest.raises(InvalidParameterError):
            lanczos_basis(H, uniform_state(21), 0)


class TestOtherSymmetricStarts:
    """Orbit-mates also evolve identically from any class-constant start."""

    @given(st.lists(st.floats(-1, 1, allow_nan=False), min_size=6, max_size=6).filter(
        lambda xs: np.linalg.norm(xs) > 1e-3), st.floats(0, 20))
    def test_tree_class_constant_start(self, coords, t):
        g = build_balanced_tree(2, 4)
        basis = orbit_basis(g, 0)
        u = np.array(coords) / np.linalg.norm(coords)
        H = _hamiltonian(g, "laplacian", 1.0, 0)
        full = scipy.linalg.expm(-1j * t * H) @ lift(u, basis)
        red = scipy.linalg.expm(-1j * t * reduce(H, basis).matrix) @ u
        for c in basis.classes:
            np.testing.assert_allclose(full[list(c)], full[c[0]], atol=1e-10)
        np.testing.assert_allclose(project_state(full, basis), red, atol=1e-10)
