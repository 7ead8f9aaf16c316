"""
Automaton Module - labelled constraint graph of a switching system
Validation, acceptance of label sequences, path and cycle enumeration
"""

import logging
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import networkx as nx

from src import config
from src.errors import CapExceededError, InputError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    label: int


@dataclass(frozen=True)
class Path:
    """A chain of edges, stored as edge indices into ``Automaton.edges``."""

    edges: Tuple[int, ...]
    source: str
    target: str

    @property
    def length(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class Cycle(Path):
    simple: bool = True


@dataclass
class ValidationReport:
    valid: bool
    problems: List[str] = field(default_factory=list)
    unreachable: List[str] = field(default_factory=list)
    not_coreachable: List[str] = field(default_factory=list)
    duplicate_edges: List[Tuple[str, str, int]] = field(default_factory=list)
    dangling_labels: List[int] = field(default_factory=list)

    def summary(self) -> str:
        if self.valid:
            return "valid"
        return "invalid: " + "; ".join(self.problems)


@dataclass(frozen=True)
class Automaton:
    """Strongly connected directed graph with mode labels 1..N on its edges.

    Node identifiers are opaque strings; their input order fixes the dense
    integer indexing used by every enumeration.
    """

    nodes: Tuple[str, ...]
    edges: Tuple[Edge, ...]
    num_labels: int
    _node_index: Dict[str, int] = field(init=False, repr=False, compare=False)
    _out_edges: Dict[str, Tuple[int, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        nodes = tuple(str(v) for v in self.nodes)
        edges = tuple(e if isinstance(e, Edge) else Edge(str(e[0]), str(e[1]), int(e[2])) for e in self.edges)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "num_labels", int(self.num_labels))

        index = {}
        for i, v in enumerate(nodes):
            index.setdefault(v, i)
        out: Dict[str, List[int]] = {v: [] for v in nodes}
        for i, e in enumerate(edges):
            out.setdefault(e.source, []).append(i)
        object.__setattr__(self, "_node_index", index)
        object.__setattr__(self, "_out_edges", {v: tuple(ix) for v, ix in out.items()})

    @classmethod
    def from_triples(cls, nodes: Sequence[str], triples: Iterable[Sequence], num_labels: Optional[int] = None) -> "Automaton":
        edges = [Edge(str(v), str(w), int(s)) for v, w, s in triples]
        if num_labels is None:
            num_labels = max((e.label for e in edges), default=0)
        return cls(tuple(nodes), tuple(edges), num_labels)

    def node_index(self, node: str) -> int:
        return self._node_index[node]

    def out_edges(self, node: str) -> Tuple[int, ...]:
        return self._out_edges.get(node, ())

    def to_networkx(self) -> nx.MultiDiGraph:
        graph = nx.MultiDiGraph()
        graph.add_nodes_from(self.nodes)
        for i, e in enumerate(self.edges):
            graph.add_edge(e.source, e.target, key=i, label=e.label)
        return graph


def validate(a: Automaton) -> ValidationReport:
    """Check every structural invariant of ``a`` and report each violation."""
    report = ValidationReport(valid=True)

    if a.num_labels < 1:
        report.problems.append(f"num_labels must be a positive integer, got {a.num_labels}")
    if not a.nodes:
        report.problems.append("automaton has no nodes")
    if len(set(a.nodes)) != len(a.nodes):
        report.problems.append("duplicate node identifiers")

    known = set(a.nodes)
    seen = set()
    for i, e in enumerate(a.edges):
        if e.source not in known or e.target not in known:
            report.problems.append(f"edge {i} ({e.source}->{e.target}) references an unknown node")
        if not 1 <= e.label <= a.num_labels:
            report.dangling_labels.append(e.label)
            report.problems.append(f"edge {i} has label {e.label} outside 1..{a.num_labels}")
        key = (e.source, e.target, e.label)
        if key in seen:
            report.duplicate_edges.append(key)
            report.problems.append(f"duplicate edge {key}")
        seen.add(key)

    if a.nodes:
        # One forward and one backward search from the first node
        graph = a.to_networkx()
        graph.remove_nodes_from([v for v in list(graph.nodes) if v not in known])
        root = a.nodes[0]
        forward = nx.descendants(graph, root) | {root}
        backward = nx.ancestors(graph, root) | {root}
        report.unreachable = [v for v in a.nodes if v not in forward]
        report.not_coreachable = [v for v in a.nodes if v not in backward]
        if report.unreachable or report.not_coreachable:
            report.problems.append(
                "not strongly connected (unreachable from "
                f"{root}: {report.unreachable}; cannot reach {root}: {report.not_coreachable})"
            )
        if not a.edges:
            report.problems.append("automaton has no edges")

    report.valid = not report.problems
    return report


def accepts(a: Automaton, labels: Sequence[int]) -> bool:
    """True iff some path of ``a``, from any start node, carries ``labels``."""
    if len(labels) == 0:
        raise InputError("label sequence must be nonempty")
    for s in labels:
        if not 1 <= int(s) <= a.num_labels:
            raise InputError(f"label {s} outside 1..{a.num_labels}")

    current = set(a.nodes)
    for s in labels:
        current = {a.edges[i].target for v in current for i in a.out_edges(v) if a.edges[i].label == int(s)}
        if not current:
            return False
    return True


def label_sequence(a: Automaton, path: Path) -> Tuple[int, ...]:
    return tuple(a.edges[i].label for i in path.edges)


def make_path(a: Automaton, edge_indices: Sequence[int], source: Optional[str] = None) -> Path:
    """Build a Path from edge indices, checking the chaining invariant."""
    edge_indices = tuple(int(i) for i in edge_indices)
    if not edge_indices:
        if source is None:
            raise InputError("an empty path needs an explicit source node")
        return Path((), source, source)
    for prev, nxt in zip(edge_indices, edge_indices[1:]):
        if a.edges[prev].target != a.edges[nxt].source:
            raise InputError(f"edges {prev} and {nxt} do not chain")
    return Path(edge_indices, a.edges[edge_indices[0]].source, a.edges[edge_indices[-1]].target)


def concatenate(a: Automaton, p: Path, q: Path) -> Path:
    if p.target != q.source:
        raise InputError(f"cannot concatenate: {p.target} != {q.source}")
    return make_path(a, p.edges + q.edges, source=p.source)


def count_paths(a: Automaton, T: int) -> int:
    """Number of paths with exactly T edges (exact integer arithmetic)."""
    counts = {v: 1 for v in a.nodes}
    for _ in range(T):
        nxt = {v: 0 for v in a.nodes}
        for e in a.edges:
            nxt[e.target] += counts[e.source]
        counts = nxt
    return sum(counts.values())


def paths_of_length(a: Automaton, T: int, max_paths: Optional[int] = None) -> Iterator[Path]:
    """Enumerate every path of exactly T edges, lexicographic by edge indices."""
    if T < 1:
        raise InputError(f"path length must be >= 1, got {T}")
    cap = max_paths if max_paths is not None else config.max_paths()

    emitted = 0
    chain: List[int] = []

    def extend() -> Iterator[Tuple[int, ...]]:
        if len(chain) == T:
            yield tuple(chain)
            return
        for nxt in a.out_edges(a.edges[chain[-1]].target):
            chain.append(nxt)
            yield from extend()
            chain.pop()

    for first in range(len(a.edges)):
        chain[:] = [first]
        for edges in extend():
            emitted += 1
            if emitted > cap:
                raise CapExceededError("max_paths", cap, f"paths of length {T}")
            yield Path(edges, a.edges[edges[0]].source, a.edges[edges[-1]].target)


def _canonical_rotation(seq: Tuple[int, ...]) -> Tuple[int, ...]:
    return min(seq[k:] + seq[:k] for k in range(len(seq)))


def _is_primitive(seq: Tuple[int, ...]) -> bool:
    n = len(seq)
    return all(seq[k:] + seq[:k] != seq for k in range(1, n))


def _cycle(a: Automaton, edges: Tuple[int, ...]) -> Cycle:
    visited = [a.edges[i].source for i in edges]
    source = a.edges[edges[0]].source
    return Cycle(edges, source, source, simple=len(set(visited)) == len(visited))


def simple_cycles_up_to(a: Automaton, L: int, max_cycles: Optional[int] = None) -> Iterator[Cycle]:
    """Enumerate the simple cycles of length <= L, one per rotation class.

    Node cycles come from networkx (Johnson / Gupta-Suzumura); each is expanded
    over parallel edges and reported in its lexicographically smallest rotation.
    """
    if L < 1:
        raise InputError(f"cycle length bound must be >= 1, got {L}")
    cap = max_cycles if max_cycles is not None else config.max_cycles()

    between: Dict[Tuple[str, str], List[int]] = {}
    for i, e in enumerate(a.edges):
        between.setdefault((e.source, e.target), []).append(i)
    graph = nx.DiGraph()
    graph.add_nodes_from(a.nodes)
    graph.add_edges_from(between.keys())

    found = set()
    for node_cycle in nx.simple_cycles(graph, length_bound=L):
        hops = [between[(v, node_cycle[(k + 1) % len(node_cycle)])] for k, v in enumerate(node_cycle)]
        for choice in product(*hops):
            found.add(_canonical_rotation(tuple(choice)))
            if len(found) > cap:
                raise CapExceededError("max_cycles", cap, f"simple cycles up to length {L}")

    for edges in sorted(found, key=lambda c: (len(c), c)):
        yield _cycle(a, edges)


def closed_paths_up_to(a: Automaton, L: int, max_cycles: Optional[int] = None) -> Iterator[Cycle]:
    """Enumerate all primitive closed paths of length <= L, one per rotation class.

    Nodes may be revisited; ``Cycle.simple`` tells the two kinds apart. Powers of
    a shorter closed path are skipped.
    """
    if L < 1:
        raise InputError(f"cycle length bound must be >= 1, got {L}")
    cap = max_cycles if max_cycles is not None else config.max_cycles()

    emitted = 0
    chain: List[int] = []

    def extend(length: int) -> Iterator[Tuple[int, ...]]:
        # The canonical rotation starts at its smallest edge index
        if len(chain) == length:
            if a.edges[chain[-1]].target == a.edges[chain[0]].source:
                yield tuple(chain)
            return
        for nxt in a.out_edges(a.edges[chain[-1]].target):
            if nxt < chain[0]:
                continue
            chain.append(nxt)
            yield from extend(length)
            chain.pop()

    for length in range(1, L + 1):
        for first in range(len(a.edges)):
            chain[:] = [first]
            for edges in extend(length):
                if edges != _canonical_rotation(edges) or not _is_primitive(edges):
                    continue
                emitted += 1
                if emitted > cap:
                    raise CapExceededError("max_cycles", cap, f"closed paths up to length {L}")
                yield _cycle(a, edges)


def cycle_from_edges(a: Automaton, edge_set: Iterable[int]) -> Optional[Cycle]:
    """The single simple cycle formed by exactly ``edge_set``, or None."""
    edge_set = sorted(set(int(i) for i in edge_set))
    if not edge_set:
        return None
    succ: Dict[str, int] = {}
    indeg: Dict[str, int] = {}
    for i in edge_set:
        e = a.edges[i]
        if e.source in succ:
            return None
        succ[e.source] = i
        indeg[e.target] = indeg.get(e.target, 0) + 1
    if any(d != 1 for d in indeg.values()) or set(indeg) != set(succ):
        return None

    walk = [edge_set[0]]
    while a.edges[walk[-1]].target != a.edges[walk[0]].source:
        walk.append(succ[a.edges[walk[-1]].target])
    if len(walk) != len(edge_set):
        return None
    return _cycle(a, _canonical_rotation(tuple(walk)))
