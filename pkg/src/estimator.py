"""
Estimator Module - bisection on gamma, certified CJSR intervals for the base
system and every lift, and the tight-cycle exactness certificate
"""

import logging
import math
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from src import config
from src.automaton import Cycle, closed_paths_up_to, cycle_from_edges, label_sequence, make_path
from src.errors import CapExceededError, EstimationError, InputError
from src.lifts import (
    LiftedSystem,
    base_cycle_edges,
    d_lift_system,
    kronecker_block_forms,
    kronecker_system,
    lifted_dimension,
    path_dependent_lift,
    t_product_lift,
)
from src.multinorm_sdp import (
    FeasibilityStatus,
    QuadraticMultinorm,
    feasibility_at,
    identity_multinorm,
    multinorm_value,
)
from src.switched_system import (
    ConstrainedSystem,
    bracket,
    cycle_lower_bound,
    product_along_path,
    spectral_radius,
)

logger = logging.getLogger(__name__)


class Method(str, Enum):
    PLAIN = "plain"
    T_PRODUCT = "t_product"
    PATH_DEPENDENT = "path_dependent"
    D_LIFT = "d_lift"
    KRONECKER = "kronecker"


METHOD_ALIASES = {
    "tproduct": Method.T_PRODUCT,
    "pathdep": Method.PATH_DEPENDENT,
    "dlift": Method.D_LIFT,
    "kron": Method.KRONECKER,
}


def resolve_method(method: Union[str, Method]) -> Method:
    if isinstance(method, Method):
        return method
    key = str(method).strip().lower()
    if key in METHOD_ALIASES:
        return METHOD_ALIASES[key]
    try:
        return Method(key)
    except ValueError:
        raise InputError(f"unknown method {method!r}")


@dataclass
class ExactnessCertificate:
    """A simple cycle of tight edges; its spectral radius gives the exact CJSR.

    ``cycle`` and ``tight_edges`` live in the solved (possibly lifted)
    automaton; ``base_edges`` / ``base_labels`` are the de-lifted cycle.
    """

    cycle: Cycle
    tight_edges: Tuple[int, ...]
    cjsr_exact: float
    eigenvalue_tolerance: float
    solved_value: float = 0.0
    base_edges: Tuple[int, ...] = ()
    base_labels: Tuple[int, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "cycle_edges": list(self.cycle.edges),
            "tight_edges": list(self.tight_edges),
            "base_edges": list(self.base_edges),
            "base_labels": list(self.base_labels),
            "cjsr_exact": self.cjsr_exact,
            "eigenvalue_tolerance": self.eigenvalue_tolerance,
        }


@dataclass
class BisectionResult:
    gamma_lo: float
    gamma_hi: float
    witness: QuadraticMultinorm
    probes: int = 0
    indeterminate: int = 0
    flagged: bool = False
    seconds: float = 0.0

    @property
    def interval(self) -> Tuple[float, float]:
        return (self.gamma_lo, self.gamma_hi)


@dataclass
class CjsrEstimate:
    method: Method
    parameter: Optional[int]
    gamma_star_interval: Tuple[float, float]
    cjsr_upper: float
    cjsr_lower_certified: float
    accuracy_factor: float
    cycle_lower: Optional[float] = None
    cycle_lower_labels: Tuple[int, ...] = ()
    exact: Optional[ExactnessCertificate] = None
    witness: Optional[QuadraticMultinorm] = None
    diagnostics: Dict[str, Any] = field(default_factory=dict)


def required_T(n: int, r: float) -> int:
    """Smallest product length whose accuracy factor n^(1/(2T)) is <= 1 + r."""
    if n < 1 or not r > 0:
        raise InputError("required_T needs n >= 1 and r > 0")
    return max(1, math.ceil(math.log(n) / (2.0 * math.log1p(r))))


def required_d(n: int, r: float, max_dim: Optional[int] = None) -> int:
    """Smallest d with C(n+d-1, d)^(1/(2d)) <= 1 + r, within the dimension cap."""
    if n < 1 or not r > 0:
        raise InputError("required_d needs n >= 1 and r > 0")
    cap = max_dim if max_dim is not None else config.max_lifted_dim()
    d = 1
    while lifted_dimension(n, d) ** (1.0 / (2 * d)) > 1.0 + r:
        d += 1
        if lifted_dimension(n, d) > cap:
            raise CapExceededError("max_lifted_dim", cap, f"[d]-lift reaching accuracy 1+{r}")
    return d


def accuracy_factor(method: Union[str, Method], n: int, parameter: Optional[int] = None) -> float:
    method = resolve_method(method)
    if method in (Method.PLAIN, Method.KRONECKER):
        return math.sqrt(n)
    if method == Method.T_PRODUCT:
        return n ** (1.0 / (2 * parameter))
    if method == Method.D_LIFT:
        return lifted_dimension(n, parameter) ** (1.0 / (2 * parameter))
    return n ** (1.0 / (2 * (parameter + 1)))


def _closed_path_lower(s: ConstrainedSystem, max_len: int) -> float:
    best = 0.0
    try:
        for cycle in closed_paths_up_to(s.automaton, max_len):
            best = max(best, cycle_lower_bound(s, cycle))
    except CapExceededError as exc:
        logger.debug(f"[BISECT] cycle lower bound truncated: {exc}")
    return best


def bisect_gamma_star(
    s: ConstrainedSystem,
    abs_tol: float,
    lower_hint: Optional[float] = None,
    tol: Optional[float] = None,
) -> BisectionResult:
    """Bisection on gamma for the smallest feasible level of the multinorm program.

    The identity multinorm makes the largest edge spectral norm feasible; a cycle
    lower bound of the CJSR (``lower_hint``, or computed here) can never be
    exceeded by gamma*. Indeterminate probes move the lower end up and are
    counted; past the configured fraction the lower end falls back to the last
    certified value minus abs_tol and the result is flagged.
    """
    if not abs_tol > 0:
        raise InputError(f"abs_tol must be positive, got {abs_tol}")
    start = time.time()

    witness = identity_multinorm(s)
    hi = s.max_edge_norm()
    assert multinorm_value(s, witness) <= hi * (1.0 + 1e-12), "identity multinorm must be feasible at the initial upper end"
    if hi == 0.0:
        return BisectionResult(0.0, 0.0, witness, seconds=time.time() - start)

    lo = lower_hint if lower_hint is not None else _closed_path_lower(s, min(config.BRACKET_CYCLE_LEN, 4))
    lo = min(max(lo, 0.0), hi)
    certified_lo = lo

    probes = indeterminate = 0
    while hi - lo > abs_tol:
        mid = 0.5 * (lo + hi)
        outcome = feasibility_at(s, mid, tol=tol)
        probes += 1
        if outcome.status == FeasibilityStatus.FEASIBLE:
            hi, witness = mid, outcome.witness
        elif outcome.status == FeasibilityStatus.INFEASIBLE:
            lo = certified_lo = mid
        else:
            indeterminate += 1
            lo = mid
            logger.warning(f"[BISECT] indeterminate probe at gamma={mid:.9g} ({outcome.solver_status})")

    if probes and indeterminate == probes:
        raise EstimationError(
            "every bisection probe was numerically indeterminate",
            {"probes": probes, "interval": (lo, hi)},
        )
    flagged = False
    if probes and indeterminate / probes > config.MAX_INDETERMINATE_FRACTION:
        flagged = True
        lo = max(0.0, certified_lo - abs_tol)
        logger.warning(f"[BISECT] {indeterminate}/{probes} probes indeterminate; lower end widened to {lo:.9g}")

    result = BisectionResult(lo, hi, witness, probes, indeterminate, flagged, time.time() - start)
    logger.info(f"[BISECT] gamma* in [{lo:.9g}, {hi:.9g}] after {probes} probes ({result.seconds:.2f}s)")
    return result


def _edge_slack_min(A: np.ndarray, Q_from: np.ndarray, Q_to: np.ndarray, gamma: float) -> Tuple[float, float]:
    image = A.T @ Q_to @ A
    image = 0.5 * (image + image.T)
    held = gamma ** 2 * 0.5 * (Q_from + Q_from.T)
    slack = held - image
    # Scaled by the two terms; the slack itself vanishes on an exactly tight edge
    scale = max(float(np.max(np.abs(held))), float(np.max(np.abs(image))), np.finfo(float).tiny)
    return float(np.linalg.eigvalsh(slack)[0]), scale


def tight_edges(s: ConstrainedSystem, witness: QuadraticMultinorm, gamma: float, eig_tol: float) -> List[int]:
    """Edges whose slack gamma^2 Q_v - A^T Q_w A is singular up to eig_tol (relative)."""
    found = []
    for i, e in enumerate(s.automaton.edges):
        lam, scale = _edge_slack_min(s.matrices[e.label], witness.forms[e.source], witness.forms[e.target], gamma)
        if lam <= eig_tol * scale:
            found.append(i)
    return found


def extremality_certificate(
    s_solved: ConstrainedSystem,
    witness: QuadraticMultinorm,
    gamma: float,
    eig_tol: Optional[float] = None,
) -> Optional[ExactnessCertificate]:
    """Certificate when the tight edges form exactly one simple cycle c.

    ``cjsr_exact`` is rho(A_c)^(1/T) in the solved system; ``delift_certificate``
    maps it back to a base system.
    """
    eig_tol = config.EIG_TOL if eig_tol is None else eig_tol
    tight = tight_edges(s_solved, witness, gamma, eig_tol)
    cycle = cycle_from_edges(s_solved.automaton, tight)
    if cycle is None:
        logger.info(f"[CERT] tight edges {tight} do not form a single simple cycle")
        return None
    value = spectral_radius(product_along_path(s_solved, cycle)) ** (1.0 / cycle.length)
    return ExactnessCertificate(
        cycle=cycle,
        tight_edges=tuple(tight),
        cjsr_exact=value,
        eigenvalue_tolerance=eig_tol,
        solved_value=value,
        base_edges=cycle.edges,
        base_labels=label_sequence(s_solved.automaton, cycle),
    )


def delift_certificate(
    cert: ExactnessCertificate,
    base: ConstrainedSystem,
    lifted: Optional[LiftedSystem],
) -> Optional[ExactnessCertificate]:
    """Express a certificate found on a lift in terms of the base system."""
    if lifted is None:
        return cert
    edges = base_cycle_edges(lifted.descriptor, cert.cycle.edges)
    try:
        path = make_path(base.automaton, edges)
    except InputError:
        return None
    if path.source != path.target:
        return None
    base_cycle = Cycle(path.edges, path.source, path.target, simple=False)
    return replace(
        cert,
        cjsr_exact=cycle_lower_bound(base, base_cycle),
        base_edges=path.edges,
        base_labels=label_sequence(base.automaton, path),
    )


def _validate_parameter(method: Method, parameter: Optional[int]) -> Optional[int]:
    if method in (Method.PLAIN, Method.KRONECKER):
        return None
    if parameter is None:
        raise InputError(f"method {method.value} needs a parameter")
    parameter = int(parameter)
    minimum = 0 if method == Method.PATH_DEPENDENT else 1
    if parameter < minimum:
        raise InputError(f"method {method.value} needs a parameter >= {minimum}, got {parameter}")
    return parameter


def _solved_system(s: ConstrainedSystem, method: Method, parameter: Optional[int]) -> Optional[LiftedSystem]:
    if method == Method.T_PRODUCT:
        return t_product_lift(s, parameter)
    if method == Method.PATH_DEPENDENT:
        return path_dependent_lift(s, parameter)
    if method == Method.D_LIFT:
        return d_lift_system(s, parameter)
    if method == Method.KRONECKER:
        return kronecker_system(s)
    return None


def estimate(
    s: ConstrainedSystem,
    method: Union[str, Method] = Method.PLAIN,
    parameter: Optional[int] = None,
    abs_tol: Optional[float] = None,
    tol: Optional[float] = None,
    eig_tol: Optional[float] = None,
    bracket_max_k: Optional[int] = None,
    bracket_cycle_len: Optional[int] = None,
    certify: bool = True,
) -> CjsrEstimate:
    """Certified CJSR interval from the multinorm program on the chosen lift."""
    method = resolve_method(method)
    parameter = _validate_parameter(method, parameter)
    abs_tol = config.BISECTION_TOL if abs_tol is None else abs_tol
    start = time.time()

    base_bracket = bracket(
        s,
        bracket_max_k or config.BRACKET_MAX_K,
        bracket_cycle_len or config.BRACKET_CYCLE_LEN,
    )

    lifted = _solved_system(s, method, parameter)
    solved = s if lifted is None else lifted.system
    exponent = 1 if lifted is None else lifted.exponent

    bisection = bisect_gamma_star(solved, abs_tol, lower_hint=base_bracket.lower ** exponent, tol=tol)
    gamma_lo, gamma_hi = bisection.interval
    upper = gamma_hi ** (1.0 / exponent)
    factor = accuracy_factor(method, s.dimension, parameter)

    diagnostics: Dict[str, Any] = {
        "nodes": len(solved.automaton.nodes),
        "edges": len(solved.automaton.edges),
        "dimension": solved.dimension,
        "probes": bisection.probes,
        "indeterminate_probes": bisection.indeterminate,
        "flagged": bisection.flagged,
        "solve_seconds": bisection.seconds,
        "bracket_partial": base_bracket.partial,
        "bracket_upper": base_bracket.upper,
    }

    if method == Method.KRONECKER and bisection.probes:
        # Diagonal blocks of the shared form are a multinorm of the base system
        (Q,) = bisection.witness.forms.values()
        blocks = QuadraticMultinorm(kronecker_block_forms(Q, s.automaton.nodes, s.dimension))
        diagnostics["block_value"] = multinorm_value(s, blocks)

    result = CjsrEstimate(
        method=method,
        parameter=parameter,
        gamma_star_interval=(gamma_lo, gamma_hi),
        cjsr_upper=upper,
        cjsr_lower_certified=upper / factor,
        accuracy_factor=factor,
        cycle_lower=base_bracket.lower,
        cycle_lower_labels=base_bracket.lower_labels,
        witness=bisection.witness,
        diagnostics=diagnostics,
    )

    if certify and gamma_hi > 0.0:
        result.exact = _certify(s, lifted, solved, bisection, abs_tol, eig_tol, diagnostics)

    diagnostics["seconds"] = time.time() - start
    logger.info(
        f"[ESTIMATE] {method.value}({parameter}): CJSR in [{result.cjsr_lower_certified:.6f}, {upper:.6f}]"
        f" ({diagnostics['nodes']} nodes, {diagnostics['edges']} edges, n'={diagnostics['dimension']})"
    )
    return result


def _certify(
    base: ConstrainedSystem,
    lifted: Optional[LiftedSystem],
    solved: ConstrainedSystem,
    bisection: BisectionResult,
    abs_tol: float,
    eig_tol: Optional[float],
    diagnostics: Dict[str, Any],
) -> Optional[ExactnessCertificate]:
    gamma_lo, gamma_hi = bisection.interval
    # The last feasible level sits up to abs_tol above gamma*
    threshold = max(config.EIG_TOL if eig_tol is None else eig_tol, 50.0 * abs_tol / gamma_hi)
    cert = extremality_certificate(solved, bisection.witness, gamma_hi, threshold)
    if cert is None:
        diagnostics["tight_edges"] = tight_edges(solved, bisection.witness, gamma_hi, threshold)
        return None

    if not gamma_lo - 10 * abs_tol <= cert.solved_value <= gamma_hi + 10 * abs_tol:
        logger.warning(f"[CERT] tight cycle value {cert.solved_value:.9g} outside [{gamma_lo:.9g}, {gamma_hi:.9g}]; withheld")
        diagnostics["tight_edges"] = list(cert.tight_edges)
        return None

    cert = delift_certificate(cert, base, lifted)
    if cert is None:
        logger.warning("[CERT] tight cycle does not map back to a closed base path; withheld")
        return None
    logger.info(f"[CERT] exact CJSR {cert.cjsr_exact:.9g} on labels {cert.base_labels}")
    return cert
