"""
Tests for matrix sets, path products and the brute-force CJSR bracket.
"""

import numpy as np
import pytest

from src.automaton import Automaton, Cycle, make_path
from src.errors import CapExceededError, InputError, InvalidSystemError
from src.switched_system import (
    ConstrainedSystem,
    MatrixSet,
    bracket,
    cycle_lower_bound,
    product_along_path,
    rho_hat_k,
    spectral_radius,
    stability_verdict,
    validate_system,
)

EXTREMAL_CYCLE = (2, 3, 1, 1, 1, 1, 2, 1)


def test_matrix_set_is_read_only_and_ordered():
    ms = MatrixSet({2: [[1.0]], 1: 3.0})
    assert ms.labels == [1, 2]
    assert ms[1].shape == (1, 1)
    with pytest.raises(ValueError):
        ms[1][0, 0] = 5.0


def test_create_rejects_non_square_matrix():
    a = Automaton.from_triples(["a"], [("a", "a", 1), ("a", "a", 2)])
    with pytest.raises(InvalidSystemError) as info:
        ConstrainedSystem.create(a, {1: np.eye(2), 2: np.ones((2, 3))})
    assert "mode 2" in str(info.value)


def test_missing_mode_is_reported():
    a = Automaton.from_triples(["a"], [("a", "a", 1), ("a", "a", 2)])
    report = validate_system(ConstrainedSystem(a, MatrixSet({1: np.eye(2)})))
    assert not report.valid
    assert any("no matrix for modes [2]" in p for p in report.problems)


def test_empty_path_product_is_identity(two_node):
    p = make_path(two_node.automaton, [], source="a")
    assert np.array_equal(product_along_path(two_node, p), np.eye(2))


def test_product_multiplies_on_the_left(two_node):
    # Edge 1 carries mode 3, edge 3 carries mode 4
    p = make_path(two_node.automaton, [1, 3])
    expected = two_node.matrices[4] @ two_node.matrices[3]
    assert np.allclose(product_along_path(two_node, p), expected)


def test_rho_hat_on_example(scalar_cycle):
    assert rho_hat_k(scalar_cycle, 1) == pytest.approx(2.0)
    assert rho_hat_k(scalar_cycle, 2) == pytest.approx(0.5)
    with pytest.raises(InputError):
        rho_hat_k(scalar_cycle, 0)


def test_cycle_lower_bound(scalar_cycle):
    cycle = Cycle((0, 1), "a", "a")
    assert cycle_lower_bound(scalar_cycle, cycle) == pytest.approx(0.5)
    with pytest.raises(InputError):
        cycle_lower_bound(scalar_cycle, make_path(scalar_cycle.automaton, [0]))


def test_bracket_example_is_tight(scalar_cycle):
    result = bracket(scalar_cycle, max_k=4, max_cycle_len=4)
    assert result.lower == pytest.approx(0.5)
    assert result.upper == pytest.approx(0.5)
    assert result.lower_labels == (1, 2)
    assert result.upper_k in (2, 4)
    assert not result.partial


def test_bracket_identity_modes(identity_system):
    result = bracket(identity_system, max_k=3, max_cycle_len=3)
    assert result.lower == pytest.approx(1.0)
    assert result.upper == pytest.approx(1.0)


def test_bracket_lower_never_exceeds_upper(random_system):
    for seed in range(5):
        result = bracket(random_system(seed), max_k=3, max_cycle_len=3)
        assert result.lower <= result.upper + 1e-12


def test_bracket_reports_partial_on_cap(two_node):
    result = bracket(two_node, max_k=3, max_cycle_len=2, max_paths=3)
    assert result.partial
    assert "max_paths" in result.partial_reason
    assert result.upper == pytest.approx(two_node.max_edge_norm())


def test_rho_hat_cap(two_node):
    with pytest.raises(CapExceededError):
        rho_hat_k(two_node, 4, max_paths=10)


def test_controller_extremal_cycle(controller):
    labels = {e.label: i for i, e in enumerate(controller.automaton.edges) if e.source == "n1"}
    assert set(labels) == {1, 2, 3, 4}
    # Edges traversed by the label word starting from the node reached by mode 1
    a = controller.automaton
    node, edges = "n1", []
    for label in EXTREMAL_CYCLE:
        i = next(i for i in a.out_edges(node) if a.edges[i].label == label)
        edges.append(i)
        node = a.edges[i].target
    cycle = make_path(a, edges)
    assert cycle.source == cycle.target
    assert cycle_lower_bound(controller, cycle) == pytest.approx(0.9478, abs=5e-4)


@pytest.mark.slow
def test_controller_bracket_finds_extremal_cycle(controller):
    result = bracket(controller, max_k=4, max_cycle_len=8)
    assert result.lower == pytest.approx(0.9478, abs=5e-4)
    word = result.lower_labels
    rotations = {word[k:] + word[:k] for k in range(len(word))}
    assert EXTREMAL_CYCLE in rotations


def test_spectral_radius_and_verdict():
    assert spectral_radius(np.array([[-0.7]])) == pytest.approx(0.7)
    assert spectral_radius(np.array([[0.0, 1.0], [-1.0, 0.0]])) == pytest.approx(1.0)
    assert stability_verdict(0.5, 0.9) == "stable"
    assert stability_verdict(1.0, 1.2) == "unstable"
    assert stability_verdict(0.9, 1.1) == "undecided"


def test_scaling_is_homogeneous(two_node):
    scaled = two_node.scaled(3.0)
    assert rho_hat_k(scaled, 2) == pytest.approx(3.0 * rho_hat_k(two_node, 2))


@pytest.mark.parametrize("k, multiple", [(1, 2), (1, 3), (2, 4), (2, 6), (3, 6)])
def test_rho_hat_is_submultiplicative(two_node, three_node, k, multiple):
    for s in (two_node, three_node):
        assert rho_hat_k(s, multiple) <= rho_hat_k(s, k) * (1 + 1e-12)
