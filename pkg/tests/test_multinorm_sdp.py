"""
Tests for the multinorm feasibility program and multinorm evaluation.
"""

import numpy as np
import pytest

from src.errors import InputError
from src.multinorm_sdp import (
    FeasibilityStatus,
    QuadraticMultinorm,
    dump_problem,
    edge_value,
    feasibility_at,
    identity_multinorm,
    multinorm_value,
    value_bound_after_slack,
)


def test_identity_multinorm_value_is_largest_norm(two_node):
    m = identity_multinorm(two_node)
    expected = max(np.linalg.norm(A, 2) for _, A in two_node.matrices.items())
    assert multinorm_value(two_node, m) == pytest.approx(expected)


def test_multinorm_value_is_homogeneous(two_node):
    m = QuadraticMultinorm({"a": np.diag([1.0, 2.0]), "b": np.diag([3.0, 1.0])})
    base = multinorm_value(two_node, m)
    assert multinorm_value(two_node, m.scaled(7.0)) == pytest.approx(base)
    assert multinorm_value(two_node.scaled(2.0), m) == pytest.approx(2.0 * base)


def test_multinorm_value_needs_every_form(two_node):
    with pytest.raises(InputError):
        multinorm_value(two_node, QuadraticMultinorm({"a": np.eye(2)}))


def test_edge_value_generalized_eigenvalue():
    A = np.diag([2.0, 1.0])
    # |Ax|_to^2 = 4 x1^2 + x2^2 against |x|_from^2 = 4 x1^2 + x2^2
    assert edge_value(A, np.diag([4.0, 1.0]), np.eye(2)) == pytest.approx(1.0)
    assert edge_value(A, np.eye(2), np.eye(2)) == pytest.approx(2.0)


def test_two_node_multinorm_value(scalar_cycle):
    m = QuadraticMultinorm({"a": np.array([[16.0]]), "b": np.array([[1.0]])})
    assert abs(multinorm_value(scalar_cycle, m) - 0.5) <= 1e-12


def test_example_feasibility_either_side(scalar_cycle):
    above = feasibility_at(scalar_cycle, 0.6)
    assert above.status == FeasibilityStatus.FEASIBLE
    assert above.witness is not None
    assert not above.witness.problems()
    bound = value_bound_after_slack(0.6, 1e-8, above.diagnostics["scale"])
    assert multinorm_value(scalar_cycle, above.witness) <= bound + 1e-6

    below = feasibility_at(scalar_cycle, 0.4)
    assert below.status == FeasibilityStatus.INFEASIBLE
    assert below.witness is None
    assert below.slack > 0


def test_feasibility_is_monotone(three_node):
    levels = np.linspace(0.3, 1.2, 7)
    feasible = [feasibility_at(three_node, g).feasible for g in levels]
    first = feasible.index(True)
    assert all(feasible[first:])


def test_normal_matrix_threshold(self_loop):
    s = self_loop(np.diag([0.9, 0.9]))
    assert feasibility_at(s, 0.901).feasible
    assert feasibility_at(s, 0.899).status == FeasibilityStatus.INFEASIBLE


def test_witness_is_normalized(two_node):
    outcome = feasibility_at(two_node, 2.0)
    assert outcome.feasible
    smallest = min(np.linalg.eigvalsh(Q)[0] for Q in outcome.witness.forms.values())
    assert smallest == pytest.approx(1.0)


def test_zero_matrices_are_trivially_feasible(self_loop):
    s = self_loop(np.zeros((2, 2)))
    outcome = feasibility_at(s, 1e-3)
    assert outcome.feasible
    assert outcome.solver_status == "trivial"


def test_rejects_bad_levels(scalar_cycle):
    with pytest.raises(InputError):
        feasibility_at(scalar_cycle, 0.0)
    with pytest.raises(InputError):
        feasibility_at(scalar_cycle, 1.0, tol=0.0)


def test_multinorm_problems():
    m = QuadraticMultinorm({"a": np.array([[1.0, 2.0], [0.0, 1.0]]), "b": -np.eye(2)})
    assert m.problems() == ["form at a is not symmetric", "form at b is not positive definite"]


def test_value_bound_after_slack():
    assert value_bound_after_slack(0.5, 0.0) == pytest.approx(0.5)
    assert value_bound_after_slack(0.5, 1e-8, 2.0) == pytest.approx(np.sqrt(0.25 + 4e-8))


def test_dump_problem_lists_every_block(two_node):
    text = dump_problem(two_node, 0.8)
    lines = text.strip().splitlines()
    assert lines[0].startswith("# minimize t")
    assert len(lines) == 1 + len(two_node.automaton.edges) + len(two_node.automaton.nodes)
    assert lines[1].startswith("edge 0 a a 1")
    assert "0.59999999999999998" in lines[1]
