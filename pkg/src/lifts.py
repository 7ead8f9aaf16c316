"""
Lifts Module - structure-preserving transformations of a constrained system
T-product lift, M-path-dependent lift, [d]-lift and Kronecker lift, each with
back-maps from the lifted structure to the base automaton
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations_with_replacement
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src import config
from src.automaton import Automaton, Edge, count_paths, paths_of_length
from src.errors import CapExceededError, InputError
from src.switched_system import ConstrainedSystem, MatrixSet, product_along_path

logger = logging.getLogger(__name__)

KRONECKER_NODE = "kron"


class LiftKind(str, Enum):
    T_PRODUCT = "t_product"
    PATH_DEPENDENT = "path_dependent"
    D_LIFT = "d_lift"
    KRONECKER = "kronecker"


@dataclass
class LiftDescriptor:
    """Which lift produced a system, and how it maps back to the base.

    ``node_backmap`` sends a lifted node to a tuple: the base node for the
    T-product and [d] lifts, the base edge indices of its length-M path for the
    path-dependent lift, every base node for the Kronecker lift.
    ``edge_backmap[i]`` is the base path (edge indices) lifted edge i came from.
    """

    kind: LiftKind
    parameter: Optional[int]
    node_backmap: Dict[str, tuple]
    edge_backmap: Tuple[Tuple[int, ...], ...]
    label_words: Dict[int, Tuple[int, ...]] = field(default_factory=dict)

    def advance(self, lifted_edge: int) -> Tuple[int, ...]:
        """Base edges traversed when the lifted system takes ``lifted_edge``."""
        origin = self.edge_backmap[lifted_edge]
        if self.kind == LiftKind.PATH_DEPENDENT:
            return origin[-1:]
        return origin

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "parameter": self.parameter,
            "node_backmap": {v: list(origin) for v, origin in self.node_backmap.items()},
            "edge_backmap": [list(origin) for origin in self.edge_backmap],
            "label_words": {str(label): list(word) for label, word in self.label_words.items()},
        }


@dataclass
class LiftedSystem:
    system: ConstrainedSystem
    descriptor: LiftDescriptor
    exponent: int

    def sizes(self) -> Dict[str, int]:
        return {
            "nodes": len(self.system.automaton.nodes),
            "edges": len(self.system.automaton.edges),
            "dimension": self.system.dimension,
        }


def _check_path_cap(a: Automaton, T: int, max_paths: Optional[int]) -> None:
    cap = max_paths if max_paths is not None else config.max_paths()
    total = count_paths(a, T)
    if total > cap:
        raise CapExceededError("max_paths", cap, f"{total} paths of length {T}")


def _check_dim_cap(dim: int, max_dim: Optional[int]) -> None:
    cap = max_dim if max_dim is not None else config.max_lifted_dim()
    if dim > cap:
        raise CapExceededError("max_lifted_dim", cap, f"lifted dimension {dim}")


def _identity_descriptor(s: ConstrainedSystem, kind: LiftKind, parameter: Optional[int]) -> LiftDescriptor:
    return LiftDescriptor(
        kind=kind,
        parameter=parameter,
        node_backmap={v: (v,) for v in s.automaton.nodes},
        edge_backmap=tuple((i,) for i in range(len(s.automaton.edges))),
    )


def t_product_lift(s: ConstrainedSystem, T: int, max_paths: Optional[int] = None) -> LiftedSystem:
    """One lifted edge per length-T base path, carrying A_p; V' = V.

    Every lifted edge gets its own label so that equal label words between the
    same pair of nodes stay distinct edges; ``label_words`` keeps the word.
    """
    if T < 1:
        raise InputError(f"T must be >= 1, got {T}")
    _check_path_cap(s.automaton, T, max_paths)

    a = s.automaton
    edges: List[Edge] = []
    matrices: Dict[int, np.ndarray] = {}
    backmap: List[Tuple[int, ...]] = []
    words: Dict[int, Tuple[int, ...]] = {}
    for p in paths_of_length(a, T, max_paths=max_paths):
        label = len(edges) + 1
        edges.append(Edge(p.source, p.target, label))
        matrices[label] = product_along_path(s, p)
        backmap.append(p.edges)
        words[label] = tuple(a.edges[i].label for i in p.edges)

    lifted = ConstrainedSystem(Automaton(a.nodes, tuple(edges), len(edges)), MatrixSet(matrices))
    descriptor = LiftDescriptor(
        kind=LiftKind.T_PRODUCT,
        parameter=T,
        node_backmap={v: (v,) for v in a.nodes},
        edge_backmap=tuple(backmap),
        label_words=words,
    )
    logger.info(f"[LIFT] {T}-product lift: {len(a.nodes)} nodes, {len(edges)} edges")
    return LiftedSystem(lifted, descriptor, exponent=T)


def path_node_id(a: Automaton, edge_indices: Sequence[int]) -> str:
    """Lifted node name for a base path, e.g. ``b-2->b|b-4->a``."""
    return "|".join(f"{a.edges[i].source}-{a.edges[i].label}->{a.edges[i].target}" for i in edge_indices)


def path_dependent_lift(s: ConstrainedSystem, M: int, max_paths: Optional[int] = None) -> LiftedSystem:
    """Memory-M lift: nodes are length-M base paths, matrices unchanged."""
    if M < 0:
        raise InputError(f"M must be >= 0, got {M}")
    a = s.automaton
    if M == 0:
        copy = ConstrainedSystem(Automaton(a.nodes, a.edges, a.num_labels), s.matrices)
        return LiftedSystem(copy, _identity_descriptor(s, LiftKind.PATH_DEPENDENT, 0), exponent=1)

    _check_path_cap(a, M, max_paths)
    _check_path_cap(a, M + 1, max_paths)

    node_backmap: Dict[str, tuple] = {}
    for p in paths_of_length(a, M, max_paths=max_paths):
        name = path_node_id(a, p.edges)
        if name in node_backmap:
            raise InputError(f"node identifiers produce an ambiguous lifted name {name!r}")
        node_backmap[name] = p.edges

    edges: List[Edge] = []
    backmap: List[Tuple[int, ...]] = []
    for p in paths_of_length(a, M + 1, max_paths=max_paths):
        head, tail = p.edges[:-1], p.edges[1:]
        edges.append(Edge(path_node_id(a, head), path_node_id(a, tail), a.edges[p.edges[-1]].label))
        backmap.append(p.edges)

    lifted = ConstrainedSystem(Automaton(tuple(node_backmap), tuple(edges), a.num_labels), s.matrices)
    descriptor = LiftDescriptor(
        kind=LiftKind.PATH_DEPENDENT,
        parameter=M,
        node_backmap=node_backmap,
        edge_backmap=tuple(backmap),
    )
    logger.info(f"[LIFT] {M}-path-dependent lift: {len(node_backmap)} nodes, {len(edges)} edges")
    return LiftedSystem(lifted, descriptor, exponent=1)


def lifted_dimension(n: int, d: int) -> int:
    return math.comb(n + d - 1, d)


def _monomials(n: int, d: int) -> List[Tuple[int, ...]]:
    # Sorted variable-index tuples; this order is lexicographic (descending) in
    # the exponent vectors: x1^2, x1 x2, x2^2 for n = d = 2
    return list(combinations_with_replacement(range(n), d))


def _monomial_scale(mono: Tuple[int, ...], d: int) -> float:
    counts = np.bincount(mono) if mono else np.zeros(0, dtype=int)
    return math.sqrt(math.factorial(d) / math.prod(math.factorial(int(c)) for c in counts))


def d_lift_vector(x: np.ndarray, d: int) -> np.ndarray:
    """Scaled degree-d monomial vector with |x^[d]| = |x|^d (Euclidean)."""
    if d < 1:
        raise InputError(f"d must be >= 1, got {d}")
    x = np.asarray(x, dtype=float).ravel()
    return np.array([_monomial_scale(m, d) * math.prod(x[i] for i in m) for m in _monomials(x.size, d)])


def d_lift_matrix(A: np.ndarray, d: int) -> np.ndarray:
    """The matrix A^[d] with A^[d] x^[d] = (Ax)^[d] for every x."""
    if d < 1:
        raise InputError(f"d must be >= 1, got {d}")
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    monos = _monomials(n, d)
    position = {m: k for k, m in enumerate(monos)}
    scales = np.array([_monomial_scale(m, d) for m in monos])

    lifted = np.zeros((len(monos), len(monos)))
    for row, beta in enumerate(monos):
        # Expand prod_k (A x)_{beta_k} as a polynomial in x
        poly: Dict[Tuple[int, ...], float] = {(): 1.0}
        for r in beta:
            expanded: Dict[Tuple[int, ...], float] = {}
            for mono, coef in poly.items():
                for j in range(n):
                    if A[r, j] == 0.0:
                        continue
                    key = tuple(sorted(mono + (j,)))
                    expanded[key] = expanded.get(key, 0.0) + coef * A[r, j]
            poly = expanded
        for mono, coef in poly.items():
            col = position[mono]
            lifted[row, col] = scales[row] * coef / scales[col]
    return lifted


def d_lift_system(s: ConstrainedSystem, d: int, max_dim: Optional[int] = None) -> LiftedSystem:
    """Same automaton, every matrix replaced by its [d]-lift; exponent d."""
    if d < 1:
        raise InputError(f"d must be >= 1, got {d}")
    _check_dim_cap(lifted_dimension(s.dimension, d), max_dim)
    matrices = MatrixSet({label: d_lift_matrix(A, d) for label, A in s.matrices.items()})
    lifted = ConstrainedSystem(s.automaton, matrices)
    logger.info(f"[LIFT] [{d}]-lift: dimension {s.dimension} -> {matrices.dimension}")
    return LiftedSystem(lifted, _identity_descriptor(s, LiftKind.D_LIFT, d), exponent=d)


def kronecker_lift(s: ConstrainedSystem, max_dim: Optional[int] = None) -> MatrixSet:
    """(e(j) e(i)^T) kron A_sigma for every edge (v_i, v_j, sigma), in edge order."""
    a = s.automaton
    size = len(a.nodes)
    _check_dim_cap(s.dimension * size, max_dim)
    matrices = {}
    for k, e in enumerate(a.edges):
        selector = np.zeros((size, size))
        selector[a.node_index(e.target), a.node_index(e.source)] = 1.0
        matrices[k + 1] = np.kron(selector, s.matrices[e.label])
    return MatrixSet(matrices)


def kronecker_system(s: ConstrainedSystem, max_dim: Optional[int] = None) -> LiftedSystem:
    """The Kronecker matrix set under arbitrary switching (one node, |E| loops)."""
    matrices = kronecker_lift(s, max_dim=max_dim)
    loops = tuple(Edge(KRONECKER_NODE, KRONECKER_NODE, label) for label in matrices.labels)
    lifted = ConstrainedSystem(Automaton((KRONECKER_NODE,), loops, len(loops)), matrices)
    descriptor = LiftDescriptor(
        kind=LiftKind.KRONECKER,
        parameter=None,
        node_backmap={KRONECKER_NODE: tuple(s.automaton.nodes)},
        edge_backmap=tuple((i,) for i in range(len(s.automaton.edges))),
    )
    logger.info(f"[LIFT] Kronecker lift: {len(loops)} matrices of dimension {matrices.dimension}")
    return LiftedSystem(lifted, descriptor, exponent=1)


def kronecker_block_forms(Q: np.ndarray, nodes: Sequence[str], n: int) -> Dict[str, np.ndarray]:
    """Diagonal n x n blocks of a shared form, one per base node."""
    return {v: np.array(Q[k * n:(k + 1) * n, k * n:(k + 1) * n]) for k, v in enumerate(nodes)}


def base_cycle_edges(descriptor: Optional[LiftDescriptor], lifted_edges: Sequence[int]) -> Tuple[int, ...]:
    """Base edge sequence traversed by a sequence of lifted edges."""
    if descriptor is None:
        return tuple(lifted_edges)
    steps: List[int] = []
    for i in lifted_edges:
        steps.extend(descriptor.advance(i))
    return tuple(steps)


def lift(s: ConstrainedSystem, kind: LiftKind, parameter: Optional[int] = None) -> LiftedSystem:
    kind = LiftKind(kind)
    if kind == LiftKind.T_PRODUCT:
        return t_product_lift(s, int(parameter))
    if kind == LiftKind.PATH_DEPENDENT:
        return path_dependent_lift(s, int(parameter))
    if kind == LiftKind.D_LIFT:
        return d_lift_system(s, int(parameter))
    return kronecker_system(s)
