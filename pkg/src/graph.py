"""Finite simple graphs, Cayley-graph constructors and traversal primitives."""

import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from src.errors import GraphValidationError, InvalidLoopError, InvalidParameterError, InvalidPathError
from src.permutation import Permutation

logger = logging.getLogger(__name__)

GroupElement = Tuple[int, ...]


@dataclass(frozen=True)
class Path:
    """
    Walk x_0, ..., x_N of length N >= 0.

    Consecutive vertices must be adjacent; repeats at distance > 1 are allowed.
    A loop additionally has x_0 = x_N; a single vertex is a loop of length 0.
    """

    vertices: Tuple[int, ...]

    def __post_init__(self):
        vertices = tuple(int(v) for v in self.vertices)
        if not vertices:
            raise InvalidPathError("A path needs at least one vertex")
        object.__setattr__(self, "vertices", vertices)

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    @property
    def start(self) -> int:
        return self.vertices[0]

    @property
    def end(self) -> int:
        return self.vertices[-1]

    @property
    def is_closed(self) -> bool:
        return self.vertices[0] == self.vertices[-1]

    def steps(self) -> List[Tuple[int, int]]:
        return list(zip(self.vertices, self.vertices[1:]))

    def reversed(self) -> "Path":
        return Path(self.vertices[::-1])

    def concat(self, other: "Path") -> "Path":
        if self.end != other.start:
            raise InvalidPathError(f"Cannot join path ending at {self.end} with path starting at {other.start}")
        return Path(self.vertices + other.vertices[1:])

    def check_walk(self, g: "Graph", allow_stationary: bool = False) -> None:
        """
        Raise InvalidPathError unless every step follows an edge of g.

        With allow_stationary, a step x -> x is also accepted.
        """
        for v in self.vertices:
            if not 0 <= v < g.n:
                raise InvalidPathError(f"Vertex {v} out of range in path {list(self.vertices)}")
        for u, v in self.steps():
            if u == v and allow_stationary:
                continue
            if not g.has_edge(u, v):
                raise InvalidPathError(f"Step {u}->{v} is not an edge in path {list(self.vertices)}")

    def check_loop(self, g: "Graph", allow_stationary: bool = False) -> None:
        self.check_walk(g, allow_stationary)
        if not self.is_closed:
            raise InvalidLoopError(f"Walk {list(self.vertices)} is not closed")


PathLike = Union[Path, Sequence[int]]


def as_path(walk: PathLike) -> Path:
    return walk if isinstance(walk, Path) else Path(tuple(walk))


class OrientedEdge(NamedTuple):
    """Oriented edge (tail, head) of an undirected graph."""

    tail: int
    head: int

    def reversed(self) -> "OrientedEdge":
        return OrientedEdge(self.head, self.tail)


@dataclass(frozen=True)
class Graph:
    """Finite undirected graph on vertices 0..n-1 with sorted adjacency tuples."""

    n: int
    adjacency: Tuple[Tuple[int, ...], ...]
    labels: Optional[Tuple[str, ...]] = field(default=None, compare=False)

    def __post_init__(self):
        if self.n < 0 or len(self.adjacency) != self.n:
            raise GraphValidationError(f"Adjacency has {len(self.adjacency)} rows for n={self.n}")
        adjacency = tuple(tuple(sorted(set(int(w) for w in row))) for row in self.adjacency)
        for v, row in enumerate(adjacency):
            for w in row:
                if not 0 <= w < self.n:
                    raise GraphValidationError(f"Vertex {v} has out-of-range neighbor {w}")
        object.__setattr__(self, "adjacency", adjacency)
        if self.labels is not None:
            if len(self.labels) != self.n:
                raise GraphValidationError(f"Got {len(self.labels)} labels for {self.n} vertices")
            object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))

    @classmethod
    def from_edges(
        cls, n: int, edges: Iterable[Tuple[int, int]], labels: Optional[Sequence[str]] = None
    ) -> "Graph":
        """
        Build a simple undirected graph from an edge list.

        Repeated edges collapse into one; self-loops are rejected.

        Raises:
            GraphValidationError: On a self-loop or an out-of-range endpoint
        """
        rows: List[set] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise GraphValidationError(f"Self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphValidationError(f"Edge ({u},{v}) out of range for n={n}")
            rows[u].add(v)
            rows[v].add(u)
        return cls(n, tuple(tuple(r) for r in rows), tuple(labels) if labels is not None else None)

    @classmethod
    def from_networkx(cls, nx_graph: nx.Graph) -> "Graph":
        """Convert a networkx graph, indexing nodes in sorted order."""
        nodes = sorted(nx_graph.nodes())
        index = {node: k for k, node in enumerate(nodes)}
        edges = [(index[u], index[v]) for u, v in nx_graph.edges()]
        return cls.from_edges(len(nodes), edges, [str(node) for node in nodes])

    @cached_property
    def _neighbor_sets(self) -> Tuple[FrozenSet[int], ...]:
        return tuple(frozenset(row) for row in self.adjacency)

    def neighbors(self, v: int) -> Tuple[int, ...]:
        return self.adjacency[v]

    def neighbor_set(self, v: int) -> FrozenSet[int]:
        return self._neighbor_sets[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._neighbor_sets[u]

    def edges(self) -> List[Tuple[int, int]]:
        """Undirected edges (u, v) with u < v, sorted."""
        return [(u, v) for u in range(self.n) for v in self.adjacency[u] if u < v]

    def oriented_edges(self) -> List[OrientedEdge]:
        """Both orientations of every edge, synthesized on demand."""
        return [OrientedEdge(u, v) for u in range(self.n) for v in self.adjacency[u]]

    @property
    def edge_count(self) -> int:
        return sum(len(row) for row in self.adjacency) // 2

    def regular_degree(self) -> Optional[int]:
        """Common degree if the graph is regular, else None."""
        degrees = {len(row) for row in self.adjacency}
        return degrees.pop() if len(degrees) == 1 else None

    def label(self, v: int) -> str:
        return self.labels[v] if self.labels is not None else str(v)

    def adjacency_matrix(self, dtype=object) -> np.ndarray:
        """Dense adjacency matrix; object dtype keeps arithmetic exact."""
        matrix = np.zeros((self.n, self.n), dtype=dtype)
        for u in range(self.n):
            for v in self.adjacency[u]:
                matrix[u, v] = 1
        return matrix

    def to_networkx(self) -> nx.Graph:
        nx_graph = nx.Graph()
        nx_graph.add_nodes_from(range(self.n))
        nx_graph.add_edges_from(self.edges())
        return nx_graph

    def is_connected(self) -> bool:
        if self.n == 0:
            return False
        return nx.is_connected(self.to_networkx())

    def relabel(self, perm: Permutation) -> "Graph":
        """Return the isomorphic copy in which vertex v is renamed perm(v)."""
        if len(perm) != self.n:
            raise InvalidParameterError(f"Relabeling of size {len(perm)} for graph of size {self.n}")
        edges = [(perm(u), perm(v)) for u, v in self.edges()]
        labels = None
        if self.labels is not None:
            relabeled = [""] * self.n
            for v in range(self.n):
                relabeled[perm(v)] = self.labels[v]
            labels = relabeled
        return Graph.from_edges(self.n, edges, labels)

    def same_edges(self, other: "Graph") -> bool:
        return self.n == other.n and self.adjacency == other.adjacency


@dataclass
class ValidationReport:
    """Findings of a graph validation pass."""

    vertex_count: int
    edge_count: int
    simple: bool
    symmetric: bool
    connected: bool
    regular_degree: Optional[int]
    issues: List[str]

    @property
    def ok(self) -> bool:
        return self.simple and self.symmetric and self.connected

    def to_dict(self) -> Dict[str, object]:
        return {
            "vertex_count": self.vertex_count,
            "edge_count": self.edge_count,
            "simple": self.simple,
            "symmetric": self.symmetric,
            "connected": self.connected,
            "regular_degree": self.regular_degree,
            "issues": list(self.issues),
        }


def validate(g: Graph) -> ValidationReport:
    """
    Report simplicity, symmetry, connectivity and regularity of a graph.

    Never raises: every finding is recorded in the report.
    """
    issues = []
    simple = True
    for v in range(g.n):
        if v in g.neighbor_set(v):
            simple = False
            issues.append(f"self-loop at {v}")

    symmetric = True
    for u in range(g.n):
        for v in g.adjacency[u]:
            if u not in g.neighbor_set(v):
                symmetric = False
                issues.append(f"edge {u}->{v} has no reverse")

    # Connectivity on the symmetrized graph, so one-sided edges still count
    connected = g.n > 0
    if g.n > 0:
        symmetrized = nx.Graph()
        symmetrized.add_nodes_from(range(g.n))
        symmetrized.add_edges_from((u, v) for u in range(g.n) for v in g.adjacency[u])
        reachable = len(nx.node_connected_component(symmetrized, 0))
        connected = reachable == g.n
        if not connected:
            issues.append(f"disconnected: {reachable} of {g.n} vertices reachable from 0")

    edge_count = sum(len(row) for row in g.adjacency) // 2
    return ValidationReport(
        vertex_count=g.n,
        edge_count=edge_count,
        simple=simple,
        symmetric=symmetric,
        connected=connected,
        regular_degree=g.regular_degree(),
        issues=issues,
    )


def require_valid(g: Graph, what: str = "graph") -> None:
    """Raise GraphValidationError unless g is simple, symmetric and connected."""
    report = validate(g)
    if not report.ok:
        raise GraphValidationError(f"Invalid {what}: {'; '.join(report.issues)}")


def cycle_graph(n: int) -> Graph:
    """The n-cycle Z_n: vertex i adjacent to (i +- 1) mod n."""
    if n < 3:
        raise InvalidParameterError(f"cycle_graph needs n >= 3, got {n}")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(m: int) -> Graph:
    """The complete graph K_m."""
    if m < 2:
        raise InvalidParameterError(f"complete_graph needs m >= 2, got {m}")
    return Graph.from_edges(m, itertools.combinations(range(m), 2))


def group_elements(group_orders: Sequence[int]) -> List[GroupElement]:
    """Elements of Z/n1 x ... x Z/nk in lexicographic order."""
    return [tuple(e) for e in itertools.product(*(range(n) for n in group_orders))]


def element_index(group_orders: Sequence[int], element: Sequence[int]) -> int:
    """Mixed-radix index of a group element, consistent with group_elements()."""
    index = 0
    for order, coord in zip(group_orders, element):
        index = index * order + (coord % order)
    return index


def _normalize_generator(group_orders: Sequence[int], gen: Union[int, Sequence[int]]) -> GroupElement:
    coords = (gen,) if isinstance(gen, int) else tuple(gen)
    if len(coords) != len(group_orders):
        raise InvalidParameterError(f"Generator {gen} does not match group of rank {len(group_orders)}")
    return tuple(c % n for c, n in zip(coords, group_orders))


def cayley_graph(
    group_orders: Sequence[int], generators: Iterable[Union[int, Sequence[int]]]
) -> Graph:
    """
    Cayley graph of the Abelian group Z/n1 x ... x Z/nk.

    The generator set is symmetrized: g and -g induce the same undirected edges.

    Args:
        group_orders: Orders n1..nk of the cyclic factors
        generators: Group elements (ints allowed for rank one)

    Returns:
        Connected graph on all group elements in lexicographic order

    Raises:
        InvalidParameterError: On a non-positive order or malformed generator
        GraphValidationError: If a generator is the identity or the set does not generate
    """
    orders = [int(n) for n in group_orders]
    if not orders or any(n < 1 for n in orders):
        raise InvalidParameterError(f"Group orders must be positive, got {list(group_orders)}")

    gens = sorted({_normalize_generator(orders, g) for g in generators})
    identity = tuple(0 for _ in orders)
    if identity in gens:
        raise GraphValidationError("Identity among Cayley generators would create a self-loop")
    if not gens:
        raise GraphValidationError("Empty generator set")

    symmetric = set(gens)
    symmetric.update(tuple((-c) % n for c, n in zip(g, orders)) for g in gens)

    elements = group_elements(orders)
    edges = []
    for k, element in enumerate(elements):
        for g in symmetric:
            target = tuple((a + b) % n for a, b, n in zip(element, g, orders))
            edges.append((k, element_index(orders, target)))

    if len(orders) == 1:
        labels = [str(e[0]) for e in elements]
    else:
        labels = ["(" + ",".join(str(c) for c in e) + ")" for e in elements]

    graph = Graph.from_edges(len(elements), edges, labels)
    if not graph.is_connected():
        raise GraphValidationError(f"Generators {gens} do not generate Z/{' x Z/'.join(map(str, orders))}")

    logger.debug(f"Built Cayley graph on {graph.n} vertices, degree {graph.regular_degree()}")
    return graph


def translation(group_orders: Sequence[int], shift: Sequence[int]) -> Permutation:
    """The translation v -> v + shift on the Cayley graph vertex indexing."""
    orders = list(group_orders)
    shift_coords = _normalize_generator(orders, shift)
    image = []
    for element in group_elements(orders):
        target = tuple((a + b) % n for a, b, n in zip(element, shift_coords, orders))
        image.append(element_index(orders, target))
    return Permutation(tuple(image))


def shortest_path_counts(g: Graph, source: int, max_depth: int) -> Dict[int, Tuple[int, int]]:
    """
    Distances from source with the number of shortest paths to each vertex.

    Only vertices within max_depth are returned.
    """
    distance = nx.single_source_shortest_path_length(g.to_networkx(), source, cutoff=max_depth)
    paths: Dict[int, int] = {source: 1}
    for w in sorted(distance, key=distance.get):
        if w != source:
            paths[w] = sum(paths[u] for u in g.adjacency[w] if distance.get(u) == distance[w] - 1)
    return {w: (distance[w], paths[w]) for w in distance}
