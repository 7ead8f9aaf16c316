"""
Tests for the four lifts and their back-maps.
"""

import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from src.automaton import accepts, closed_paths_up_to, count_paths, make_path
from src.errors import CapExceededError, InputError
from src.lifts import (
    KRONECKER_NODE,
    LiftKind,
    base_cycle_edges,
    d_lift_matrix,
    d_lift_system,
    d_lift_vector,
    kronecker_block_forms,
    kronecker_lift,
    kronecker_system,
    lift,
    lifted_dimension,
    path_dependent_lift,
    path_node_id,
    t_product_lift,
)
from src.switched_system import bracket, cycle_lower_bound, product_along_path, rho_hat_k

finite = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False, allow_infinity=False)


def test_t_product_structure(two_node):
    lifted = t_product_lift(two_node, 2)
    a = lifted.system.automaton
    assert a.nodes == ("a", "b")
    assert len(a.edges) == 8
    # Every node keeps four outgoing length-2 paths
    assert all(len(a.out_edges(v)) == 4 for v in a.nodes)
    assert lifted.exponent == 2
    assert lifted.descriptor.kind == LiftKind.T_PRODUCT
    assert len(lifted.descriptor.edge_backmap) == len(a.edges)


def test_t_product_matrices_are_path_products(two_node):
    lifted = t_product_lift(two_node, 3)
    base = two_node.automaton
    for i, e in enumerate(lifted.system.automaton.edges):
        origin = lifted.descriptor.edge_backmap[i]
        p = make_path(base, origin)
        assert (e.source, e.target) == (p.source, p.target)
        assert np.allclose(lifted.system.matrices[e.label], product_along_path(two_node, p))
        assert lifted.descriptor.label_words[e.label] == tuple(base.edges[k].label for k in origin)


def test_t_product_keeps_parallel_edges_distinct(identity_system):
    lifted = t_product_lift(identity_system, 2)
    assert len(lifted.system.automaton.edges) == count_paths(identity_system.automaton, 2)


def test_t_product_rho_hat_identity(three_node):
    # rho_hat_k of the lift is rho_hat_2k of the base, to the power 2
    lifted = t_product_lift(three_node, 2).system
    for k in (1, 2):
        assert rho_hat_k(lifted, k) ** 0.5 == pytest.approx(rho_hat_k(three_node, 2 * k))


def test_t_product_bracket_inside_base_bracket(three_node):
    base = bracket(three_node, max_k=4, max_cycle_len=6)
    lifted = bracket(t_product_lift(three_node, 2).system, max_k=2, max_cycle_len=3)
    assert lifted.upper ** 0.5 >= base.lower - 1e-9
    assert lifted.lower ** 0.5 <= base.upper + 1e-9


def test_t_product_bracket_is_a_square(uniform_random_system):
    for seed in range(10):
        s = uniform_random_system(seed)
        lifted = bracket(t_product_lift(s, 2).system, max_k=3, max_cycle_len=3)

        upper = min(rho_hat_k(s, 2 * j) for j in (1, 2, 3))
        # Lifted closed paths are base closed paths of even length, or odd ones walked twice
        lower = max(
            [0.0]
            + [
                cycle_lower_bound(s, c)
                for c in closed_paths_up_to(s.automaton, 6)
                if c.length % 2 == 0 or c.length <= 3
            ]
        )
        assert lifted.upper ** 0.5 == pytest.approx(upper, rel=1e-8, abs=1e-12), seed
        assert lifted.lower ** 0.5 == pytest.approx(lower, rel=1e-8, abs=1e-12), seed


def test_t_product_cap(two_node):
    with pytest.raises(CapExceededError):
        t_product_lift(two_node, 5, max_paths=10)
    with pytest.raises(InputError):
        t_product_lift(two_node, 0)


def test_path_dependent_zero_is_a_copy(two_node):
    lifted = path_dependent_lift(two_node, 0)
    assert lifted.system == two_node
    assert lifted.system is not two_node
    assert lifted.descriptor.edge_backmap == tuple((i,) for i in range(4))


def test_path_dependent_example_names(scalar_cycle):
    lifted = path_dependent_lift(scalar_cycle, 1)
    a = lifted.system.automaton
    assert set(a.nodes) == {"a-1->b", "b-2->a"}
    assert len(a.edges) == 2
    assert lifted.system.matrices == scalar_cycle.matrices


def test_path_dependent_memory_one_edges(two_node):
    a = path_dependent_lift(two_node, 1).system.automaton
    assert len(a.nodes) == 4
    triples = {(e.source, e.target, e.label) for e in a.edges}
    assert ("b-2->b", "b-4->a", 4) in triples


@pytest.mark.parametrize("M", [1, 2])
def test_path_dependent_keeps_the_language(two_node, M):
    base = two_node.automaton
    lifted = path_dependent_lift(two_node, M).system.automaton
    for length in range(M + 1, 5):
        for word in itertools.product(range(1, base.num_labels + 1), repeat=length):
            assert accepts(lifted, word) == accepts(base, word), word


def test_path_dependent_sizes(two_node):
    for M in (1, 2):
        lifted = path_dependent_lift(two_node, M)
        assert len(lifted.system.automaton.nodes) == count_paths(two_node.automaton, M)
        assert len(lifted.system.automaton.edges) == count_paths(two_node.automaton, M + 1)


def test_path_dependent_advances_one_base_edge(two_node):
    lifted = path_dependent_lift(two_node, 2)
    base = two_node.automaton
    for i, e in enumerate(lifted.system.automaton.edges):
        step = lifted.descriptor.advance(i)
        assert len(step) == 1
        assert base.edges[step[0]].label == e.label
        head = lifted.descriptor.node_backmap[e.source]
        assert head == lifted.descriptor.edge_backmap[i][:-1]
        assert path_node_id(base, head) == e.source


def test_base_cycle_edges_through_path_dependent_lift(scalar_cycle):
    lifted = path_dependent_lift(scalar_cycle, 1)
    assert sorted(base_cycle_edges(lifted.descriptor, [0, 1])) == [0, 1]
    assert base_cycle_edges(None, [1, 0]) == (1, 0)


def test_d_lift_small_cases():
    assert lifted_dimension(2, 2) == 3
    assert np.allclose(d_lift_matrix(np.eye(2), 3), np.eye(lifted_dimension(2, 3)))
    assert np.allclose(d_lift_matrix(np.diag([2.0, 3.0]), 2), np.diag([4.0, 6.0, 9.0]))
    A = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.allclose(d_lift_matrix(A, 1), A)


@given(
    arrays(np.float64, (2, 2), elements=finite),
    arrays(np.float64, 2, elements=finite),
    st.integers(min_value=1, max_value=3),
)
def test_d_lift_defining_identity(A, x, d):
    lhs = d_lift_matrix(A, d) @ d_lift_vector(x, d)
    rhs = d_lift_vector(A @ x, d)
    scale = max(1.0, float(np.max(np.abs(rhs))))
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * scale


@given(arrays(np.float64, 3, elements=finite), st.integers(min_value=1, max_value=4))
def test_d_lift_preserves_euclidean_norm(x, d):
    norm = np.linalg.norm(x)
    assert abs(np.linalg.norm(d_lift_vector(x, d)) - norm ** d) <= 1e-12 * max(1.0, norm ** d)


def test_d_lift_is_multiplicative():
    rng = np.random.default_rng(7)
    A, B = rng.standard_normal((2, 2, 2))
    for d in (2, 3):
        assert np.allclose(d_lift_matrix(A @ B, d), d_lift_matrix(A, d) @ d_lift_matrix(B, d))


def test_d_lift_system_and_cap(two_node):
    lifted = d_lift_system(two_node, 2)
    assert lifted.system.dimension == 3
    assert lifted.system.automaton == two_node.automaton
    assert lifted.exponent == 2
    with pytest.raises(CapExceededError):
        d_lift_system(two_node, 5, max_dim=4)


def test_kronecker_lift_example(scalar_cycle):
    ms = kronecker_lift(scalar_cycle)
    assert ms.labels == [1, 2]
    assert np.allclose(ms[1], [[0.0, 0.0], [2.0, 0.0]])
    assert np.allclose(ms[2], [[0.0, 0.125], [0.0, 0.0]])


def test_kronecker_products_vanish_off_paths(two_node):
    ms = kronecker_lift(two_node)
    a = two_node.automaton
    for i, e in enumerate(a.edges):
        for j, f in enumerate(a.edges):
            product = ms[j + 1] @ ms[i + 1]
            if e.target != f.source:
                assert np.allclose(product, 0.0)
            else:
                assert np.linalg.norm(product, 2) == pytest.approx(
                    np.linalg.norm(two_node.matrices[f.label] @ two_node.matrices[e.label], 2)
                )


def test_kronecker_system_is_single_node(two_node):
    lifted = kronecker_system(two_node)
    a = lifted.system.automaton
    assert a.nodes == (KRONECKER_NODE,)
    assert len(a.edges) == 4
    assert lifted.system.dimension == 4
    assert lifted.descriptor.node_backmap[KRONECKER_NODE] == ("a", "b")
    with pytest.raises(CapExceededError):
        kronecker_system(two_node, max_dim=3)


def test_kronecker_block_forms_read_diagonal_blocks():
    Q = np.arange(16.0).reshape(4, 4)
    blocks = kronecker_block_forms(Q, ["a", "b"], 2)
    assert np.array_equal(blocks["a"], [[0.0, 1.0], [4.0, 5.0]])
    assert np.array_equal(blocks["b"], [[10.0, 11.0], [14.0, 15.0]])


def test_lift_dispatch(two_node):
    assert lift(two_node, LiftKind.T_PRODUCT, 2).exponent == 2
    assert lift(two_node, "path_dependent", 1).exponent == 1
    assert lift(two_node, LiftKind.D_LIFT, 2).system.dimension == 3
    assert lift(two_node, LiftKind.KRONECKER).system.dimension == 4


def test_descriptor_to_dict_is_json_ready(two_node):
    data = t_product_lift(two_node, 2).descriptor.to_dict()
    assert data["kind"] == "t_product"
    assert data["parameter"] == 2
    assert len(data["edge_backmap"]) == 8
    assert all(isinstance(k, str) for k in data["label_words"])
    assert len(data["node_backmap"]) == 2
