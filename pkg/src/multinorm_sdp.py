"""
Multinorm SDP Module - quadratic multinorm feasibility at a fixed level gamma
and exact evaluation of the value of a given quadratic multinorm
"""

import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional

import cvxpy as cp
import numpy as np
import scipy.linalg

from src import config
from src.errors import InputError
from src.switched_system import ConstrainedSystem

logger = logging.getLogger(__name__)


@dataclass
class QuadraticMultinorm:
    """One positive definite form Q_v per node; |x|_v = sqrt(x^T Q_v x)."""

    forms: Dict[str, np.ndarray]

    def problems(self, rel_tol: float = 1e-10) -> List[str]:
        found = []
        for v, Q in self.forms.items():
            scale = max(1.0, float(np.max(np.abs(Q))))
            if not np.allclose(Q, Q.T, rtol=0.0, atol=rel_tol * scale):
                found.append(f"form at {v} is not symmetric")
            elif np.linalg.eigvalsh(Q)[0] <= 0.0:
                found.append(f"form at {v} is not positive definite")
        return found

    def scaled(self, c: float) -> "QuadraticMultinorm":
        return QuadraticMultinorm({v: c * Q for v, Q in self.forms.items()})

    def to_dict(self) -> Dict[str, list]:
        return {v: Q.tolist() for v, Q in self.forms.items()}


class FeasibilityStatus(str, Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    INDETERMINATE = "numerically_indeterminate"


@dataclass
class FeasibilityOutcome:
    status: FeasibilityStatus
    slack: float
    witness: Optional[QuadraticMultinorm] = None
    gamma: float = 0.0
    solver_status: str = ""
    solve_seconds: float = 0.0
    diagnostics: Dict[str, object] = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.status == FeasibilityStatus.FEASIBLE


def identity_multinorm(s: ConstrainedSystem) -> QuadraticMultinorm:
    return QuadraticMultinorm({v: np.eye(s.dimension) for v in s.automaton.nodes})


def _normalized(forms: Dict[str, np.ndarray]) -> QuadraticMultinorm:
    # Rescale so the smallest eigenvalue over all forms is exactly 1
    forms = {v: 0.5 * (Q + Q.T) for v, Q in forms.items()}
    smallest = min(float(np.linalg.eigvalsh(Q)[0]) for Q in forms.values())
    if smallest <= 0.0:
        return QuadraticMultinorm(forms)
    return QuadraticMultinorm({v: Q / smallest for v, Q in forms.items()})


def _classify(solver_status: str, t_star: Optional[float], tol: float, band: float) -> FeasibilityStatus:
    if t_star is None or not np.isfinite(t_star):
        return FeasibilityStatus.INDETERMINATE
    if solver_status == cp.OPTIMAL:
        return FeasibilityStatus.FEASIBLE if t_star <= tol else FeasibilityStatus.INFEASIBLE
    if solver_status == cp.OPTIMAL_INACCURATE:
        if t_star <= -band:
            return FeasibilityStatus.FEASIBLE
        if t_star >= band:
            return FeasibilityStatus.INFEASIBLE
    return FeasibilityStatus.INDETERMINATE


def feasibility_at(
    s: ConstrainedSystem,
    gamma: float,
    tol: Optional[float] = None,
    solver: Optional[str] = None,
    form_bound: Optional[float] = None,
) -> FeasibilityOutcome:
    """Decide whether a quadratic multinorm with value <= gamma exists.

    Solves: minimize t  s.t.  A^T Q_w A - gamma^2 Q_v <= t I on every edge
    (v, w, sigma) and I <= Q_v <= form_bound * I on every node. The matrices are
    first divided by their largest spectral norm, so ``slack`` is reported in
    those scaled units. Feasible iff t* <= tol.
    """
    if not gamma > 0:
        raise InputError(f"gamma must be positive, got {gamma}")
    tol = config.FEASIBILITY_TOL if tol is None else tol
    if not tol > 0:
        raise InputError(f"tol must be positive, got {tol}")
    solver = solver or config.SDP_SOLVER
    kappa = form_bound or config.FORM_BOUND

    a = s.automaton
    n = s.dimension
    scale = s.max_edge_norm()
    if scale == 0.0:
        return FeasibilityOutcome(
            status=FeasibilityStatus.FEASIBLE,
            slack=-1.0,
            witness=identity_multinorm(s),
            gamma=gamma,
            solver_status="trivial",
        )

    g2 = (gamma / scale) ** 2
    scaled = {label: A / scale for label, A in s.matrices.items()}
    eye = np.eye(n)
    Q = {v: cp.Variable((n, n), symmetric=True, name=f"Q_{k}") for k, v in enumerate(a.nodes)}
    t = cp.Variable(name="t")

    constraints = []
    for e in a.edges:
        A = scaled[e.label]
        image = A.T @ Q[e.target] @ A
        constraints.append(t * eye - (0.5 * (image + image.T) - g2 * Q[e.source]) >> 0)
    for v in a.nodes:
        constraints.append(Q[v] >> eye)
        constraints.append(kappa * eye - Q[v] >> 0)

    problem = cp.Problem(cp.Minimize(t), constraints)
    start = time.time()
    try:
        problem.solve(solver=solver)
        solver_status = problem.status
    except cp.error.SolverError as exc:
        logger.warning(f"[SDP] solver failure at gamma={gamma:.9g}: {exc}")
        return FeasibilityOutcome(
            status=FeasibilityStatus.INDETERMINATE,
            slack=float("nan"),
            gamma=gamma,
            solver_status="solver_error",
            solve_seconds=time.time() - start,
            diagnostics={"error": str(exc)},
        )
    elapsed = time.time() - start

    t_star = None if t.value is None else float(t.value)
    status = _classify(solver_status, t_star, tol, config.INDETERMINATE_BAND)
    outcome = FeasibilityOutcome(
        status=status,
        slack=float("nan") if t_star is None else t_star,
        gamma=gamma,
        solver_status=str(solver_status),
        solve_seconds=elapsed,
        diagnostics={"scale": scale, "nodes": len(a.nodes), "edges": len(a.edges), "dimension": n},
    )
    if status == FeasibilityStatus.FEASIBLE:
        outcome.witness = _normalized({v: np.array(Q[v].value) for v in a.nodes})
    logger.debug(f"[SDP] gamma={gamma:.9g} status={status.value} t*={outcome.slack:.3e} ({solver_status}, {elapsed:.2f}s)")
    return outcome


def edge_value(A: np.ndarray, Q_from: np.ndarray, Q_to: np.ndarray) -> float:
    """Smallest gamma with |A x|_to <= gamma |x|_from for all x."""
    image = A.T @ Q_to @ A
    image = 0.5 * (image + image.T)
    top = scipy.linalg.eigh(image, 0.5 * (Q_from + Q_from.T), eigvals_only=True)[-1]
    return float(np.sqrt(max(top, 0.0)))


def multinorm_value(s: ConstrainedSystem, m: QuadraticMultinorm) -> float:
    """Value of a quadratic multinorm: max over edges of the edge contraction."""
    missing = [v for v in s.automaton.nodes if v not in m.forms]
    if missing:
        raise InputError(f"multinorm has no form for nodes {missing}")
    return max(
        (edge_value(s.matrices[e.label], m.forms[e.source], m.forms[e.target]) for e in s.automaton.edges),
        default=0.0,
    )


def value_bound_after_slack(gamma: float, tol: float, scale: float = 1.0) -> float:
    """Largest value a feasible witness can have.

    With Q_v >= I and slack t* <= tol in units where the largest edge norm is
    ``scale``, every edge contracts by at most sqrt(gamma^2 + tol * scale^2).
    """
    return float(np.sqrt(gamma ** 2 + tol * scale ** 2))


def dump_problem(s: ConstrainedSystem, gamma: float, form_bound: Optional[float] = None) -> str:
    """Plain-text dump of the slack program, one constraint block per line."""
    kappa = form_bound or config.FORM_BOUND
    n = s.dimension

    def row_major(M: np.ndarray) -> str:
        return " ".join(format(float(x), ".17g") for x in M.ravel())

    lines = [f"# minimize t; n={n} gamma={gamma:.17g} form_bound={kappa:.17g}"]
    for i, e in enumerate(s.automaton.edges):
        lines.append(f"edge {i} {e.source} {e.target} {e.label} A^T Q_w A - gamma^2 Q_v <= t I; A: {row_major(s.matrices[e.label])}")
    for v in s.automaton.nodes:
        lines.append(f"node {v} I <= Q_v <= {kappa:.17g} I; I: {row_major(np.eye(n))}")
    return "\n".join(lines) + "\n"
