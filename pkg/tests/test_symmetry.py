from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from symsearch.errors import (
    InvalidParameterError,
    ParseError,
    PartialResultError,
    ResourceLimitError,
    UnsupportedFamilyError,
)
from symsearch.graph import Graph, build_balanced_tree, build_complete, build_truncated_simplex, laplacian
from symsearch.symmetry import (
    FULL,
    USER,
    GeneratorSet,
    OrbitPartition,
    Permutation,
    StabilizerChain,
    family_generators,
    find_automorphisms,
    group_order,
    is_automorphism,
    orbit_of,
    orbits,
    project_trivial,
    stabilizer,
    stabilizer_chain,
)

from conftest import brute_force_automorphisms, group_closure, small_graphs

perms = st.integers(1, 7).flatmap(lambda n: st.permutations(list(range(n))))


def perm_pairs(count: int):
    return st.integers(1, 7).flatmap(
        lambda n: st.tuples(*[st.permutations(list(range(n))) for _ in range(count)]))


def tree_wreath_order(M: int) -> int:
    return math.factorial(M) ** (M + 1)


class TestPermutation:
    def test_composition_is_function_composition(self):
        p = Permutation([1, 2, 0])
        q = Permutation.transposition(3, 0, 1)
        assert (p * q)(0) == p(q(0))
        assert (p * q).image == (2, 1, 0)

    @given(perm_pairs(3))
    def test_group_laws(self, trio):
        p, q, r = (Permutation(x) for x in trio)
        n = p.degree
        assert (p * q) * r == p * (q * r)
        assert p * p.inverse() == Permutation.identity(n)
        assert (p * Permutation.identity(n)) == p

    @given(perms)
    def test_cycles_roundtrip(self, img):
        p = Permutation(img)
        assert Permutation.from_cycles(p.degree, p.cycles()) == p
        assert Permutation.from_line(p.to_line()) == p

    @given(perm_pairs(2))
    def test_matrix_is_representation(self, pair):
        p, q = (Permutation(x) for x in pair)
        np.testing.assert_array_equal((p * q).matrix(), p.matrix() @ q.matrix())

    def test_rejects_non_bijection(self):
        with pytest.raises(InvalidParameterError):
            Permutation([0, 0, 1])
        with pytest.raises(ParseError):
            Permutation.from_line("0 a")

    def test_moved_points_and_repr(self):
        p = Permutation.from_cycles(5, [(1, 3)])
        assert p.moved_points() == [1, 3]
        assert repr(p) == "Permutation<5>(1 3)"
        assert Permutation.identity(3).is_identity()


class TestGeneratorSet:
    def test_drops_identity_and_duplicates(self):
        gs = GeneratorSet(3, [[0, 1, 2], [1, 0, 2], [1, 0, 2], [0, 2, 1]])
        assert gs.images.tolist() == [[1, 0, 2], [0, 2, 1]]
        assert not gs.images.flags.writeable

    def test_text_roundtrip(self):
        gs = family_generators(build_complete(5))
        back = GeneratorSet.from_text(gs.to_text())
        assert back.claims == FULL and np.array_equal(back.images, gs.images)

    @pytest.mark.parametrize("text,line", [
        ("", 1),
        ("3 1\n1 0 2", 1),
        ("3 2 user_supplied\n1 0 2", 1),
        ("3 1 user_supplied\n1 1 2", 2),
        ("3 1 user_supplied\n1 x 2", 2),
    ])
    def test_parse_errors(self, text, line):
        with pytest.raises(ParseError) as exc:
            GeneratorSet.from_text(text)
        assert exc.value.line == line

    def test_stabilized_point(self):
        assert GeneratorSet(2, [[1, 0]], "stabilizer_of(7)").stabilized_point == 7
        assert GeneratorSet(2, [[1, 0]], USER).stabilized_point is None

    def test_degree_mismatch(self):
        with pytest.raises(InvalidParameterError):
            GeneratorSet.from_perms(3, [Permutation([1, 0])])


class TestAutomorphismCheck:
    def test_complete_transpositions(self):
        g = build_complete(4)
        for i in range(4):
            for j in range(i + 1, 4):
                assert is_automorphism(g, Permutation.transposition(4, i, j))

    def test_tree_leaf_swap(self, tree4):
        assert is_automorphism(tree4, Permutation.transposition(21, 0, 1))

    def test_tree_leaf_with_branch_vertex(self, tree4):
        assert not is_automorphism(tree4, Permutation.transposition(21, 0, 16))

    def test_degree_mismatch_raises(self, tree4):
        with pytest.raises(InvalidParameterError):
            is_automorphism(tree4, Permutation.identity(5))

    @given(small_graphs(max_n=6), st.data())
    def test_matches_laplacian_conjugation(self, g, data):
        img = data.draw(st.permutations(list(range(g.n))))
        D = Permutation(img).matrix()
        L = laplacian(g)
        assert is_automorphism(g, Permutation(img)) == bool(np.array_equal(D.T @ L @ D, L))


class TestFamilyGenerators:
    def test_complete_five(self):
        gs = family_generators(build_complete(5))
        assert len(gs) == 4 and gs.claims == FULL

    def test_tree_2_4(self, tree4):
        gs = family_generators(tree4)
        assert len(gs) == 15
        assert all(is_automorphism(tree4, row) for row in gs.images)
        assert group_order(gs) == 24 ** 5

    def test_simplex_unsupported(self, simplex25):
        with pytest.raises(UnsupportedFamilyError):
            family_generators(simplex25)

    @pytest.mark.parametrize("r,M", [(1, 3), (2, 2), (2, 3), (3, 2)])
    def test_tree_generators_valid(self, r, M):
        g = build_balanced_tree(r, M)
        gs = family_generators(g)
        assert all(is_automorphism(g, row) for row in gs.images)
        # same group as the generic search finds
        assert group_order(gs) == group_order(find_automorphisms(g))


class TestFindAutomorphisms:
    def test_k6(self):
        assert group_order(find_automorphisms(build_complete(6))) == 720

    def test_tree_2_4(self, tree4):
        assert group_order(find_automorphisms(tree4)) == 7_962_624

    def test_path3(self):
        g = Graph.from_edges(3, [(0, 1), (1, 2)])
        assert group_order(find_automorphisms(g)) == 2

    def test_simplex_generators_valid(self, simplex25):
        gs = find_automorphisms(simplex25)
        assert all(is_automorphism(simplex25, row) for row in gs.images)
        # S_{M+1} acting on the top-level blocks
        assert group_order(gs) == 720

    @given(small_graphs(max_n=6))
    def test_group_matches_brute_force(self, g):
        gs = find_automorphisms(g)
        assert all(is_automorphism(g, row) for row in gs.images)
        assert group_order(gs) == len(brute_force_automorphisms(g))

    @given(small_graphs(max_n=6), st.data())
    def test_marked_search_matches_stabilizer(self, g, data):
        w = data.draw(st.integers(0, g.n - 1))
        direct = find_automorphisms(g, marked=w)
        assert direct.claims == f"stabilizer_of({w})"
        expected = sum(1 for p in brute_force_automorphisms(g) if p[w] == w)
        assert group_order(direct) == expected
        assert orbits(direct) == orbits(stabilizer(find_automorphisms(g), w))

    def test_relabeling_invariance(self, tree4):
        rng = np.random.default_rng(3)
        p = rng.permutation(tree4.n)
        relabeled = Graph.from_edges(tree4.n, [(p[u], p[v]) for u, v in tree4.edges])
        assert group_order(find_automorphisms(relabeled)) == group_order(find_automorphisms(tree4))

    def test_cap(self):
        with pytest.raises(ResourceLimitError):
            find_automorphisms(build_complete(20), cap=10)

    def test_timeout_returns_partial(self, simplex25):
        with pytest.raises(PartialResultError) as exc:
            find_automorphisms(simplex25, timeout=0.0)
        assert isinstance(exc.value.partial, GeneratorSet)

    def test_bad_marked(self):
        with pytest.raises(InvalidParameterError):
            find_automorphisms(build_complete(3), marked=3)


class TestStabilizer:
    @pytest.mark.parametrize("N", [3, 5, 8])
    def test_complete(self, N):
        w = N // 2
        st_ = stabilizer(family_generators(build_complete(N)), w)
        assert group_order(st_) == math.factorial(N - 1)
        part = orbits(st_)
        assert sorted(part.sizes) == [1, N - 1]
        assert part.classes[part.class_of[w]] == (w,)

    def test_tree_leaf(self, tree4):
        st_ = stabilizer(family_generators(tree4), 0)
        part = orbits(st_)
        assert part.sizes == [1, 3, 12, 1, 3, 1]
        assert sorted(part.sizes) == sorted([1, 3, 1, 12, 3, 1])
        assert part.classes[1] == (1, 2, 3)  # the other leaves of the marked branch
        assert group_order(st_) == 7_962_624 // 16

    def test_fixed_point_keeps_group(self, tree4):
        gs = GeneratorSet(21, family_generators(tree4).images[:3], USER)  # leaf swaps in branch 0 only
        st_ = stabilizer(gs, 20)
        assert group_order(st_) == group_order(gs)
        assert orbits(st_) == orbits(gs)

    def test_needs_full_claim(self, tree4):
        st_ = stabilizer(family_generators(tree4), 0)
        with pytest.raises(InvalidParameterError):
            stabilizer(st_, 1)

    def test_out_of_range(self):
        with pytest.raises(InvalidParameterError):
            stabilizer(family_generators(build_complete(3)), 3)

    def test_empty_group(self):
        st_ = stabilizer(GeneratorSet(4, np.zeros((0, 4)), USER), 2)
        assert len(st_) == 0 and group_order(st_) == 1

    @given(small_graphs(max_n=6), st.data())
    def test_properties(self, g, data):
        w = data.draw(st.integers(0, g.n - 1))
        gs = find_automorphisms(g)
        st_ = stabilizer(gs, w)
        assert all(row[w] == w for row in st_.images)
        assert all(is_automorphism(g, row) for row in st_.images)
        full, marked = orbits(gs), orbits(st_)
        assert marked.classes[marked.class_of[w]] == (w,)
        for c in marked.classes:  # refinement
            assert len({full.class_of[v] for v in c}) == 1
        # orbit-stabilizer theorem
        assert group_order(gs) == group_order(st_) * len(full.classes[full.class_of[w]])

    def test_simplex_against_enumeration(self, simplex25):
        gs = find_automorphisms(simplex25)
        w = 4
        group = group_closure(gs.images, simplex25.n)
        assert len(group) == 720
        fixing = np.array([p for p in group if p[w] == w])
        # orbits by direct images under every stabilizer element
        labels = np.arange(simplex25.n)
        for v in range(simplex25.n):
            labels[v] = fixing[:, v].min()
        brute = OrbitPartition.from_labels(labels)
        assert orbits(stabilizer(gs, w)) == brute
        assert len(brute) == 20


class TestOrbits:
    def test_unmarked_tree(self, tree4):
        assert sorted(orbits(family_generators(tree4)).sizes) == [1, 4, 16]

    def test_trivial_group(self):
        part = orbits(GeneratorSet(3, np.zeros((0, 3)), USER))
        assert part.classes == ((0,), (1,), (2,))

    def test_canonical_order(self):
        part = OrbitPartition.from_labels([5, 2, 5, 2, 9])
        assert part.classes == ((0, 2), (1, 3), (4,))
        assert part.class_of == (0, 1, 0, 1, 2)

    def test_orbit_of(self, tree4):
        assert orbit_of(16, family_generators(tree4)) == [16, 17, 18, 19]


class TestProjectTrivial:
    def test_complete_stabilizer(self):
        N, w = 7, 0
        v = project_trivial(3, stabilizer(family_generators(build_complete(N)), w))
        expected = np.full(N, 1 / math.sqrt(N - 1))
        expected[w] = 0
        np.testing.assert_allclose(v, expected, atol=1e-15)

    def test_fixed_point(self):
        v = project_trivial(2, GeneratorSet(4, [[1, 0, 2, 3]], USER))
        np.testing.assert_array_equal(v, [0, 0, 1, 0])

    def test_tree_leaf_outside_branch(self, tree4):
        v = project_trivial(4, stabilizer(family_generators(tree4), 0))
        support = np.flatnonzero(v)
        assert support.tolist() == list(range(4, 16))
        np.testing.assert_allclose(v[support], 1 / math.sqrt(12))

    @given(small_graphs(max_n=6), st.data())
    def test_invariant_unit_vector(self, g, data):
        gs = find_automorphisms(g)
        i = data.draw(st.integers(0, g.n - 1))
        v = project_trivial(i, gs)
        assert abs(np.linalg.norm(v) - 1) < 1e-12
        nz = v[v != 0]
        assert np.allclose(nz, nz[0])
        for p in gs.gens:
            np.testing.assert_allclose(p.matrix() @ v, v, atol=1e-15)

    def test_group_average_agrees(self):
        # the literal group average over a small group equals the orbit closure
        g = build_balanced_tree(2, 2)
        gs = stabilizer(family_generators(g), 0)
        group = group_closure(gs.images, g.n)
        e = np.zeros(g.n)
        e[4] = 1.0
        avg = sum(Permutation(p).matrix() @ e for p in group) / len(group)
        np.testing.assert_allclose(avg / np.linalg.norm(avg), project_trivial(4, gs), atol=1e-15)


class TestGroupOrder:
    @pytest.mark.parametrize("n", range(2, 8))
    def test_symmetric(self, n):
        assert group_order(family_generators(build_complete(n))) == math.factorial(n)

    def test_identity_only(self):
        assert group_order(GeneratorSet(5, [[0, 1, 2, 3, 4]])) == 1

    @pytest.mark.parametrize("M", [2, 3, 4])
    def test_tree_wreath(self, M):
        assert group_order(family_generators(build_balanced_tree(2, M))) == tree_wreath_order(M)

    @given(st.integers(2, 6).flatmap(
        lambda n: st.lists(st.permutations(list(range(n))), min_size=1, max_size=3)))
    def test_matches_enumeration(self, gens):
        n = len(gens[0])
        gs = GeneratorSet(n, gens)
        group = group_closure(np.array(gens), n)
        assert group_order(gs) == len(group)
        chain = stabilizer_chain(gs)
        assert all(chain.contains(np.array(p)) for p in group)

    def test_chain_rejects_outsider(self):
        chain = stabilizer_chain(GeneratorSet(4, [[1, 0, 2, 3]]))
        assert not chain.contains(np.array([0, 1, 3, 2]))

    def test_caps(self):
        with pytest.raises(ResourceLimitError):
            group_order(family_generators(build_complete(10)), degree_cap=5)
        chain = StabilizerChain(6, strong_cap=1)
        with pytest.raises(ResourceLimitError):
            for row in family_generators(build_complete(6)).images:
                chain.add_generator(row)
