"""Switching actions, orbits, rigidity, rank invariance."""

import random
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chio.matrix_core import PartialTernaryMatrix
from chio.signed_graph import SignedBipartiteGraph, betti, build_graph, is_balanced
from chio.switching import (
    SwitchElement,
    all_switches,
    balanced_extension,
    balanced_signings,
    orbit,
    rank_invariance_check,
    signing_tuple,
    switch_matrix,
    switch_signing,
)

from oracles import brute_is_balanced

C4 = {(1, 1), (1, 2), (2, 1), (2, 2)}


def circuit_graph(sign=None, dims=(4, 4)):
    sign = sign or {p: -1 for p in C4}
    return SignedBipartiteGraph(
        dims=dims,
        row_vertices=frozenset({1, 2}),
        col_vertices=frozenset({1, 2}),
        edges=frozenset(C4),
        sign=sign,
    )


class TestAction:
    def test_identity_fixes_matrices(self):
        matrix = PartialTernaryMatrix((4, 4), {p: -1 for p in C4})
        g = SwitchElement.identity(4, 4)
        assert switch_matrix(matrix, g).entries == matrix.entries

    def test_all_ones_is_in_the_kernel(self):
        matrix = PartialTernaryMatrix((4, 4), {p: -1 for p in C4})
        g = SwitchElement((1, 1, 1), (1, 1, 1))
        assert switch_matrix(matrix, g).entries == matrix.entries

    def test_row_flip(self):
        matrix = PartialTernaryMatrix((4, 4), {p: -1 for p in C4})
        g = SwitchElement((1, 0, 0), (0, 0, 0))
        flipped = switch_matrix(matrix, g)
        assert flipped[(1, 1)] == flipped[(1, 2)] == 1
        assert flipped[(2, 1)] == flipped[(2, 2)] == -1

    def test_support_is_preserved(self):
        matrix = PartialTernaryMatrix((4, 4), {(1, 1): 0, (2, 2): 1})
        for g in all_switches(4, 4):
            assert switch_matrix(matrix, g).support == matrix.support

    def test_group_law_exhaustive_on_3x3_grid(self):
        positions = [(i, j) for i in range(1, 4) for j in range(1, 4)]
        matrix = PartialTernaryMatrix(
            (4, 4), {p: (1 if (p[0] * p[1]) % 3 == 0 else -1) for p in positions}
        )
        switches = list(all_switches(4, 4))
        for g in switches:
            for h in switches:
                lhs = switch_matrix(switch_matrix(matrix, g), h)
                rhs = switch_matrix(matrix, g + h)
                assert lhs.entries == rhs.entries

    def test_kernel_is_exactly_two_elements(self):
        positions = [(i, j) for i in range(1, 4) for j in range(1, 4)]
        matrix = PartialTernaryMatrix((4, 4), {p: 1 for p in positions})
        kernel = [
            g for g in all_switches(4, 4)
            if switch_matrix(matrix, g).entries == matrix.entries
        ]
        assert len(kernel) == 2

    def test_matrix_and_signing_actions_agree_exhaustively_n3(self):
        cells = [(i, j) for i in range(1, 3) for j in range(1, 3)]
        for values in product((-1, 0, 1), repeat=4):
            matrix = PartialTernaryMatrix((3, 3), dict(zip(cells, values)))
            graph = build_graph(matrix)
            balanced_before = is_balanced(graph)[0] if graph.edges else True
            for g in all_switches(3, 3):
                switched = build_graph(switch_matrix(matrix, g))
                assert switched.edges == graph.edges
                if graph.edges:
                    assert switched.sign == switch_signing(graph, g).sign
                    assert is_balanced(switched)[0] == balanced_before

    def test_balance_is_switching_invariant(self):
        for signs in product((-1, 1), repeat=4):
            graph = circuit_graph(dict(zip(sorted(C4), signs)))
            before = is_balanced(graph)[0]
            for g in all_switches(4, 4):
                assert is_balanced(switch_signing(graph, g))[0] == before


class TestOrbits:
    def test_circuit_orbit_is_balanced_set(self):
        graph = circuit_graph()
        orb = orbit(graph)
        assert len(orb) == 8
        balanced_set = {signing_tuple(g) for g in balanced_signings(graph)}
        assert orb == balanced_set

    def test_single_edge_orbit(self):
        graph = SignedBipartiteGraph(
            dims=(3, 3),
            row_vertices=frozenset({1}),
            col_vertices=frozenset({1}),
            edges=frozenset({(1, 1)}),
            sign={(1, 1): -1},
        )
        assert orbit(graph) == {(-1,), (1,)}

    def test_unbalanced_orbit_avoids_balanced_signings(self):
        sign = {p: -1 for p in C4}
        sign[(1, 1)] = 1
        graph = circuit_graph(sign)
        orb = orbit(graph)
        assert len(orb) == 8
        balanced_set = {signing_tuple(g) for g in balanced_signings(circuit_graph())}
        assert orb.isdisjoint(balanced_set)

    def test_orbit_size_for_connected_samples(self):
        k23 = {(i, j) for i in (1, 2) for j in (1, 2, 3)}
        graph = SignedBipartiteGraph(
            dims=(4, 4),
            row_vertices=frozenset({1, 2}),
            col_vertices=frozenset({1, 2, 3}),
            edges=frozenset(k23),
            sign={e: -1 for e in k23},
        )
        data = betti(graph)
        assert len(orbit(graph)) == 2 ** (data.f0 - data.beta0) == 16


class TestBalancedExtension:
    def test_circuit_parity_forced(self):
        graph = circuit_graph().unsigned()
        tree = {(1, 1): -1, (1, 2): -1, (2, 1): -1}
        extended = balanced_extension(graph, tree)
        assert extended.sign[(2, 2)] == -1
        assert is_balanced(extended)[0]

    def test_all_tree_signings_of_k23_extend(self):
        k23 = {(i, j) for i in (1, 2) for j in (1, 2, 3)}
        graph = SignedBipartiteGraph(
            dims=(4, 4),
            row_vertices=frozenset({1, 2}),
            col_vertices=frozenset({1, 2, 3}),
            edges=frozenset(k23),
        )
        tree = [(1, 1), (1, 2), (1, 3), (2, 1)]
        seen = set()
        for signs in product((-1, 1), repeat=4):
            extended = balanced_extension(graph, dict(zip(tree, signs)))
            assert is_balanced(extended)[0]
            seen.add(signing_tuple(extended))
        assert len(seen) == 16  # bijection with balanced signings

    def test_extension_count_matches_formula(self):
        graph = circuit_graph().unsigned()
        signings = {signing_tuple(g) for g in balanced_signings(graph)}
        data = betti(graph)
        assert len(signings) == 2 ** (data.f0 - data.beta0)

    def test_order_independence_against_greedy_oracle(self):
        # Greedy circuit-parity filling in random edge orders must agree.
        rng = random.Random(7)
        k23 = {(i, j) for i in (1, 2) for j in (1, 2, 3)}
        graph = SignedBipartiteGraph(
            dims=(4, 4),
            row_vertices=frozenset({1, 2}),
            col_vertices=frozenset({1, 2, 3}),
            edges=frozenset(k23),
        )
        tree = [(1, 1), (1, 2), (1, 3), (2, 1)]
        for signs in product((-1, 1), repeat=4):
            tree_sign = dict(zip(tree, signs))
            expected = balanced_extension(graph, tree_sign).sign
            for _ in range(4):
                remaining = [e for e in k23 if e not in tree_sign]
                rng.shuffle(remaining)
                greedy = dict(tree_sign)
                for edge in remaining:
                    choice = None
                    for candidate in (-1, 1):
                        trial = dict(greedy)
                        trial[edge] = candidate
                        if brute_is_balanced(trial):
                            choice = candidate
                            break
                    assert choice is not None
                    greedy[edge] = choice
                assert greedy == dict(expected)

    def test_rejects_cycles_and_wrong_counts(self):
        graph = circuit_graph().unsigned()
        with pytest.raises(ValueError):
            balanced_extension(graph, {p: -1 for p in C4})
        with pytest.raises(ValueError):
            balanced_extension(graph, {(1, 1): -1})
        with pytest.raises(ValueError):
            balanced_extension(graph, {(1, 1): -1, (1, 2): -1, (3, 3): 1})


class TestRankInvariance:
    def test_all_ones_2x2(self):
        pattern = PartialTernaryMatrix((3, 3), {p: 1 for p in C4})
        report = rank_invariance_check(pattern)
        assert report.pattern_rank == 1
        assert report.signings_checked == 8
        assert report.all_equal

    def test_identity_pattern_3x3(self):
        pattern = PartialTernaryMatrix((4, 4), {(i, i): 1 for i in (1, 2, 3)})
        report = rank_invariance_check(pattern)
        assert report.pattern_rank == 3 and report.all_equal

    def test_all_ones_3x3_rank_one_but_unbalanced_signings_jump(self):
        cells = [(i, j) for i in range(1, 4) for j in range(1, 4)]
        pattern = PartialTernaryMatrix((4, 4), {p: 1 for p in cells})
        report = rank_invariance_check(pattern)
        assert report.pattern_rank == 1 and report.all_equal
        # Some unbalanced signing has a larger rank.
        from chio.matrix_core import IntMatrix, rank_int

        signed = {p: 1 for p in cells}
        signed[(1, 1)] = -1
        assert rank_int(IntMatrix.from_ternary(PartialTernaryMatrix((4, 4), signed))) > 1

    def test_rejects_signed_input(self):
        with pytest.raises(ValueError):
            rank_invariance_check(PartialTernaryMatrix((3, 3), {(1, 1): -1}))

    @given(st.integers(0, 2**9 - 1))
    @settings(max_examples=40)
    def test_random_patterns_hold(self, code):
        cells = [(i, j) for i in range(1, 4) for j in range(1, 4)]
        pattern = PartialTernaryMatrix(
            (4, 4), {p: (code >> b) & 1 for b, p in enumerate(cells)}
        )
        assert rank_invariance_check(pattern).all_equal
