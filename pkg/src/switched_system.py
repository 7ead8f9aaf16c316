"""
Switched System Module - automaton + matrix set
Matrix products along paths and brute-force CJSR brackets
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from src import config
from src.automaton import (
    Automaton,
    Cycle,
    Path,
    ValidationReport,
    closed_paths_up_to,
    count_paths,
    label_sequence,
    validate,
)
from src.errors import CapExceededError, InputError, InvalidSystemError

logger = logging.getLogger(__name__)


class MatrixSet:
    """Real n x n matrices indexed by mode label 1..N."""

    def __init__(self, matrices: Mapping[int, np.ndarray]):
        self._matrices: Dict[int, np.ndarray] = {}
        for label, A in sorted(matrices.items(), key=lambda kv: int(kv[0])):
            M = np.array(A, dtype=float)
            if M.ndim == 0:
                M = M.reshape(1, 1)
            M.setflags(write=False)
            self._matrices[int(label)] = M

    @classmethod
    def from_list(cls, matrices) -> "MatrixSet":
        return cls({i + 1: A for i, A in enumerate(matrices)})

    @property
    def labels(self) -> List[int]:
        return list(self._matrices)

    @property
    def dimension(self) -> int:
        first = next(iter(self._matrices.values()), None)
        return 0 if first is None else first.shape[0]

    def __getitem__(self, label: int) -> np.ndarray:
        return self._matrices[int(label)]

    def __len__(self) -> int:
        return len(self._matrices)

    def items(self):
        return self._matrices.items()

    def __eq__(self, other) -> bool:
        if not isinstance(other, MatrixSet) or self.labels != other.labels:
            return False
        return all(np.array_equal(A, other[label]) for label, A in self._matrices.items())

    def __hash__(self) -> int:
        return hash(tuple((label, A.shape, A.tobytes()) for label, A in self._matrices.items()))

    def __repr__(self) -> str:
        return f"MatrixSet(n={self.dimension}, modes={self.labels})"

    def scaled(self, alpha: float) -> "MatrixSet":
        return MatrixSet({label: alpha * A for label, A in self._matrices.items()})

    def problems(self, num_labels: int) -> List[str]:
        found = []
        n = self.dimension
        for label, A in self._matrices.items():
            if A.ndim != 2 or A.shape[0] != A.shape[1]:
                found.append(f"mode {label}: matrix is not square (shape {A.shape})")
            elif A.shape[0] != n:
                found.append(f"mode {label}: dimension {A.shape[0]} differs from {n}")
            if not np.all(np.isfinite(A)):
                found.append(f"mode {label}: matrix has non-finite entries")
        missing = [s for s in range(1, num_labels + 1) if s not in self._matrices]
        if missing:
            found.append(f"no matrix for modes {missing}")
        extra = [s for s in self._matrices if not 1 <= s <= num_labels]
        if extra:
            found.append(f"matrices for unknown modes {extra}")
        if n < 1:
            found.append("matrix set is empty")
        return found


@dataclass(frozen=True)
class ConstrainedSystem:
    automaton: Automaton
    matrices: MatrixSet

    @classmethod
    def create(cls, automaton: Automaton, matrices) -> "ConstrainedSystem":
        """Build and validate; raises InvalidSystemError listing every problem."""
        if not isinstance(matrices, MatrixSet):
            matrices = MatrixSet(matrices)
        system = cls(automaton, matrices)
        report = validate_system(system)
        if not report.valid:
            raise InvalidSystemError(report)
        return system

    @property
    def dimension(self) -> int:
        return self.matrices.dimension

    def edge_matrix(self, i: int) -> np.ndarray:
        return self.matrices[self.automaton.edges[i].label]

    def max_edge_norm(self) -> float:
        return max((spectral_norm(self.edge_matrix(i)) for i in range(len(self.automaton.edges))), default=0.0)

    def scaled(self, alpha: float) -> "ConstrainedSystem":
        return ConstrainedSystem(self.automaton, self.matrices.scaled(alpha))


@dataclass
class CjsrBracket:
    lower: float
    lower_witness: Optional[Cycle]
    upper: float
    upper_k: int
    upper_witness: Optional[Path] = None
    lower_labels: Tuple[int, ...] = ()
    partial: bool = False
    partial_reason: str = ""
    rho_hat: Dict[int, float] = field(default_factory=dict)


def validate_system(s: ConstrainedSystem) -> ValidationReport:
    report = validate(s.automaton)
    report.problems.extend(s.matrices.problems(s.automaton.num_labels))
    report.valid = not report.problems
    return report


def spectral_norm(A: np.ndarray) -> float:
    return float(np.linalg.norm(A, 2))


def spectral_radius(A: np.ndarray) -> float:
    if A.shape == (1, 1):
        return float(abs(A[0, 0]))
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def product_along_path(s: ConstrainedSystem, p: Path) -> np.ndarray:
    """A_p = A_sigma(T) ... A_sigma(1); the identity for the empty path."""
    product = np.eye(s.dimension)
    for i in p.edges:
        product = s.edge_matrix(i) @ product
    return product


def _rho_hat_k_search(s: ConstrainedSystem, k: int, max_paths: Optional[int]) -> Tuple[float, Tuple[int, ...]]:
    cap = max_paths if max_paths is not None else config.max_paths()
    total = count_paths(s.automaton, k)
    if total > cap:
        raise CapExceededError("max_paths", cap, f"{total} paths of length {k}")

    a = s.automaton
    best = -1.0
    best_path: Tuple[int, ...] = ()
    chain: List[int] = []

    # Depth-first over paths; the prefix product is shared along the tree
    def descend(product: np.ndarray):
        nonlocal best, best_path
        if len(chain) == k:
            value = spectral_norm(product)
            if value > best:
                best, best_path = value, tuple(chain)
            return
        for i in a.out_edges(a.edges[chain[-1]].target):
            chain.append(i)
            descend(s.edge_matrix(i) @ product)
            chain.pop()

    for first in range(len(a.edges)):
        chain[:] = [first]
        descend(s.edge_matrix(first))
    return max(best, 0.0) ** (1.0 / k), best_path


def rho_hat_k(s: ConstrainedSystem, k: int, max_paths: Optional[int] = None) -> float:
    """max over accepted length-k paths of ||A_p||_2^(1/k); an upper bound on the CJSR."""
    if k < 1:
        raise InputError(f"k must be >= 1, got {k}")
    return _rho_hat_k_search(s, k, max_paths)[0]


def cycle_lower_bound(s: ConstrainedSystem, c: Path) -> float:
    """rho(A_c)^(1/T); a lower bound on the CJSR for any cycle c of length T."""
    if c.length < 1 or c.source != c.target:
        raise InputError("cycle_lower_bound needs a closed path of length >= 1")
    return spectral_radius(product_along_path(s, c)) ** (1.0 / c.length)


def bracket(
    s: ConstrainedSystem,
    max_k: int,
    max_cycle_len: int,
    max_paths: Optional[int] = None,
    max_cycles: Optional[int] = None,
) -> CjsrBracket:
    """Brute-force CJSR interval: best cycle bound below, best rho_hat_k above.

    A cap hit stops the enumeration and the bracket computed so far is returned
    with ``partial`` set.
    """
    if max_k < 1 or max_cycle_len < 1:
        raise InputError("max_k and max_cycle_len must be >= 1")

    result = CjsrBracket(lower=0.0, lower_witness=None, upper=float("inf"), upper_k=0)
    try:
        for cycle in closed_paths_up_to(s.automaton, max_cycle_len, max_cycles=max_cycles):
            value = cycle_lower_bound(s, cycle)
            if value > result.lower or result.lower_witness is None:
                result.lower = max(value, result.lower)
                result.lower_witness = cycle
        for k in range(1, max_k + 1):
            value, path = _rho_hat_k_search(s, k, max_paths)
            result.rho_hat[k] = value
            if value < result.upper:
                result.upper, result.upper_k = value, k
                result.upper_witness = Path(path, s.automaton.edges[path[0]].source, s.automaton.edges[path[-1]].target)
    except CapExceededError as exc:
        logger.warning(f"[BRACKET] enumeration stopped early: {exc}")
        result.partial = True
        result.partial_reason = str(exc)
        if result.upper_k == 0:
            result.upper = s.max_edge_norm()
            result.upper_k = 1

    if result.lower_witness is not None:
        result.lower_labels = label_sequence(s.automaton, result.lower_witness)
    logger.debug(f"[BRACKET] [{result.lower:.9g}, {result.upper:.9g}] k={result.upper_k} partial={result.partial}")
    return result


def stability_verdict(lower: float, upper: float) -> str:
    """Stability holds iff the CJSR is below 1."""
    if upper < 1.0:
        return "stable"
    if lower >= 1.0:
        return "unstable"
    return "undecided"
