"""Connections, graph bundles, holonomy and triviality."""

import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

import networkx as nx

from src.config import Config
from src.errors import (
    ConnectionValidationError,
    InternalConsistencyError,
    InvalidParameterError,
    InvalidPathError,
    NotTrivialError,
)
from src.graph import Graph, Path, PathLike, as_path, require_valid
from src.permutation import Permutation

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Connection:
    """
    Assignment of a fiber automorphism to every oriented base edge.

    Only one orientation is stored: `phi[(u, v)]` with u < v is the transport
    phi_vu from the fiber over u to the fiber over v. The reverse orientation is
    synthesized as the inverse, so phi_uv = phi_vu^-1 holds by construction.
    """

    base: Graph
    fiber: Graph
    phi: Mapping[Tuple[int, int], Permutation]

    def __post_init__(self):
        require_valid(self.base, "base graph")
        require_valid(self.fiber, "fiber graph")
        normalized: Dict[Tuple[int, int], Permutation] = {}
        for (u, v), perm in self.phi.items():
            if u >= v:
                raise ConnectionValidationError("Stored orientation must have tail < head", (u, v))
            if not self.base.has_edge(u, v):
                raise ConnectionValidationError("Not an edge of the base graph", (u, v))
            if len(perm) != self.fiber.n:
                raise ConnectionValidationError(
                    f"Permutation of size {len(perm)} on a fiber with {self.fiber.n} vertices", (u, v)
                )
            if not perm.is_automorphism_of(self.fiber):
                raise ConnectionValidationError(f"{perm} is not an automorphism of the fiber", (u, v))
            normalized[(u, v)] = perm
        identity = Permutation.identity(self.fiber.n)
        for u, v in self.base.edges():
            normalized.setdefault((u, v), identity)
        object.__setattr__(self, "phi", normalized)

    @classmethod
    def from_assignments(
        cls, base: Graph, fiber: Graph, assignments: Mapping[Tuple[int, int], Permutation]
    ) -> "Connection":
        """
        Build a connection from values on oriented edges.

        Args:
            base: Base graph G
            fiber: Fiber graph F
            assignments: Map (x, y) -> phi_yx, the transport from x to y.
                Unlisted edges default to the identity.

        Raises:
            ConnectionValidationError: If both orientations are given and are
                not mutually inverse, or a value is not a fiber automorphism
        """
        stored: Dict[Tuple[int, int], Permutation] = {}
        for (x, y), perm in assignments.items():
            if not base.has_edge(x, y):
                raise ConnectionValidationError("Not an edge of the base graph", (x, y))
            if len(perm) != fiber.n:
                raise ConnectionValidationError(
                    f"Permutation of size {len(perm)} on a fiber with {fiber.n} vertices", (x, y)
                )
            key, value = ((x, y), perm) if x < y else ((y, x), perm.inverse())
            if key in stored and stored[key] != value:
                raise ConnectionValidationError("Values on the two orientations are not inverse", (x, y))
            stored[key] = value
        return cls(base, fiber, stored)

    def transport(self, tail: int, head: int) -> Permutation:
        """phi_{head,tail}; the identity for a stationary step (phi_xx = id)."""
        if tail == head:
            return Permutation.identity(self.fiber.n)
        if tail < head:
            perm = self.phi.get((tail, head))
            if perm is None:
                raise InvalidPathError(f"{tail}->{head} is not a base edge")
            return perm
        perm = self.phi.get((head, tail))
        if perm is None:
            raise InvalidPathError(f"{tail}->{head} is not a base edge")
        return perm.inverse()

    def non_identity_edges(self) -> List[Tuple[Tuple[int, int], Permutation]]:
        """Stored (tail < head) assignments that differ from the identity, sorted."""
        return [(edge, perm) for edge, perm in sorted(self.phi.items()) if not perm.is_identity()]

    def same_spaces(self, other: "Connection") -> bool:
        return self.base.same_edges(other.base) and self.fiber.same_edges(other.fiber)


@dataclass(frozen=True)
class Bundle:
    """Graph bundle G x_phi F with flat vertex index (x, v) -> x * |V_F| + v."""

    connection: Connection
    total: Graph

    @property
    def base(self) -> Graph:
        return self.connection.base

    @property
    def fiber(self) -> Graph:
        return self.connection.fiber

    @property
    def fiber_size(self) -> int:
        return self.connection.fiber.n

    def flat(self, x: int, v: int) -> int:
        return x * self.fiber_size + v

    def split(self, u: int) -> Tuple[int, int]:
        return divmod(u, self.fiber_size)

    def project(self, u: int) -> int:
        """The bundle projection pi onto the base."""
        return u // self.fiber_size


def identity_connection(base: Graph, fiber: Graph) -> Connection:
    """The connection whose bundle is the Cartesian product G x F."""
    return Connection(base, fiber, {})


def build_bundle(c: Connection) -> Bundle:
    """
    Materialize the total graph of G x_phi F.

    (x,v) ~ (y,w) iff x = y and v ~ w in F, or x ~ y in G and w = phi_yx(v).
    """
    base, fiber = c.base, c.fiber
    k = fiber.n
    edges = []
    for x in range(base.n):
        for v, w in fiber.edges():
            edges.append((x * k + v, x * k + w))
    for (x, y), perm in c.phi.items():
        for v in range(k):
            edges.append((x * k + v, y * k + perm(v)))

    labels = [f"({x},{v})" for x in range(base.n) for v in range(k)]
    total = Graph.from_edges(base.n * k, edges, labels)

    d_base, d_fiber = base.regular_degree(), fiber.regular_degree()
    if d_base is not None and d_fiber is not None and total.regular_degree() != d_base + d_fiber:
        raise InternalConsistencyError(
            f"Bundle should be {d_base + d_fiber}-regular, got degree {total.regular_degree()}"
        )
    logger.debug(f"Built bundle with {total.n} vertices and {total.edge_count} edges")
    return Bundle(c, total)


def product(base: Graph, fiber: Graph) -> Bundle:
    return build_bundle(identity_connection(base, fiber))


def transport_along(c: Connection, walk: PathLike) -> Permutation:
    """
    Accumulated transport prod phi_{x_{l+1},x_l} along a base walk.

    Multiplication is on the left: traversing e_1, ..., e_N yields
    phi_{e_N} o ... o phi_{e_1}. Stationary steps contribute the identity.
    """
    path = as_path(walk)
    path.check_walk(c.base, allow_stationary=True)
    acc = Permutation.identity(c.fiber.n)
    for u, v in path.steps():
        acc = c.transport(u, v).compose(acc)
    return acc


def holonomy(c: Connection, loop: PathLike) -> Permutation:
    """Holonomy of a closed base walk."""
    path = as_path(loop)
    path.check_loop(c.base, allow_stationary=True)
    return transport_along(c, path)


def is_balanced(c: Connection, loop: PathLike) -> bool:
    return holonomy(c, loop).is_identity()


def lift_walk(b: Bundle, base_walk: PathLike, v: int) -> Path:
    """Lift a base walk starting at fiber vertex v: (x_i, prod_{l<i} phi (v))."""
    path = as_path(base_walk)
    path.check_walk(b.base)
    current = v
    lifted = [b.flat(path.start, v)]
    for x, y in path.steps():
        current = b.connection.transport(x, y)(current)
        lifted.append(b.flat(y, current))
    return Path(tuple(lifted))


@dataclass
class SpanningTree:
    """BFS spanning tree of the base: visiting order and parent pointers."""

    root: int
    order: List[int]
    parent: Dict[int, int]

    def path_from_root(self, v: int) -> List[int]:
        chain = [v]
        while chain[-1] != self.root:
            chain.append(self.parent[chain[-1]])
        return chain[::-1]

    def is_tree_edge(self, u: int, v: int) -> bool:
        return self.parent.get(v) == u or self.parent.get(u) == v


def spanning_tree(g: Graph, root: int = 0) -> SpanningTree:
    if not g.is_connected():
        raise InvalidParameterError("Base graph must be connected")
    parent = dict(nx.bfs_predecessors(g.to_networkx(), root))
    order = [root] + list(parent)
    return SpanningTree(root=root, order=order, parent=parent)


@dataclass
class TrivialityResult:
    """Outcome of the triviality decision."""

    trivial: bool
    rho: Optional[List[Permutation]] = None
    witness: Optional[Path] = None

    def to_dict(self) -> Dict[str, object]:
        return {
            "trivial": self.trivial,
            "rho": [list(p.image) for p in self.rho] if self.rho is not None else None,
            "witness": list(self.witness.vertices) if self.witness is not None else None,
        }


def is_trivial(c: Connection) -> TrivialityResult:
    """
    Decide whether every loop of the base is balanced.

    Every closed-walk holonomy is a product of conjugates of fundamental-cycle
    holonomies, so it suffices to check one cycle per non-tree edge. When
    trivial, rho_y is the transport along the tree path from the root to y;
    otherwise the first unbalanced fundamental cycle is returned.
    """
    tree = spanning_tree(c.base)
    identity = Permutation.identity(c.fiber.n)
    rho: Dict[int, Permutation] = {tree.root: identity}
    for v in tree.order[1:]:
        p = tree.parent[v]
        rho[v] = c.transport(p, v).compose(rho[p])

    for x, y in c.base.edges():
        if tree.is_tree_edge(x, y):
            continue
        if c.transport(x, y).compose(rho[x]) != rho[y]:
            cycle = tree.path_from_root(x) + tree.path_from_root(y)[::-1]
            witness = Path(tuple(cycle))
            logger.info(f"Connection is non-trivial: fundamental cycle {cycle} is unbalanced")
            return TrivialityResult(trivial=False, witness=witness)

    logger.info("Connection is trivial: all fundamental cycles balanced")
    return TrivialityResult(trivial=True, rho=[rho[v] for v in range(c.base.n)])


def is_pi_preserving_isomorphism(source: Bundle, target: Bundle, mapping: Permutation) -> bool:
    """Check that mapping is a graph isomorphism source -> target with pi o mapping = pi."""
    if source.total.n != target.total.n or source.total.edge_count != target.total.edge_count:
        return False
    for u in range(source.total.n):
        if target.project(mapping(u)) != source.project(u):
            return False
    return all(target.total.has_edge(mapping(u), mapping(v)) for u, v in source.total.edges())


def trivialization_isomorphism(c: Connection) -> Permutation:
    """
    The isomorphism psi(y, v) = (y, rho_y(v)) from G x F onto G x_phi F.

    Raises:
        NotTrivialError: If the connection has an unbalanced loop
        InternalConsistencyError: If the edge-preservation scan fails
    """
    result = is_trivial(c)
    if not result.trivial:
        raise NotTrivialError(f"Connection is not trivial; unbalanced loop {list(result.witness.vertices)}")
    k = c.fiber.n
    image = [0] * (c.base.n * k)
    for y in range(c.base.n):
        rho_y = result.rho[y]
        for v in range(k):
            image[y * k + v] = y * k + rho_y(v)
    psi = Permutation(tuple(image))
    if not is_pi_preserving_isomorphism(product(c.base, c.fiber), build_bundle(c), psi):
        raise InternalConsistencyError("Trivialization map failed the edge-preservation scan")
    return psi


def null_elements(c: Connection) -> List[int]:
    """Fiber vertices fixed by every transport phi_yx; non-empty iff a discrete vector bundle."""
    candidates = set(range(c.fiber.n))
    for perm in c.phi.values():
        candidates &= set(perm.fixed_points())
    return sorted(candidates)


def is_discrete_vector_bundle(c: Connection) -> List[int]:
    """Alias of null_elements(); the empty list means not a discrete vector bundle."""
    return null_elements(c)


def null_section(c: Connection, o: int) -> List[int]:
    """Flat ids of the null section x -> (x, o)."""
    if o not in null_elements(c):
        raise InvalidParameterError(f"Fiber vertex {o} is not a null element")
    return [x * c.fiber.n + o for x in range(c.base.n)]


@dataclass
class EquivalenceResult:
    """Outcome of the gauge-equivalence test; gauge[x] conjugates phi1 into phi2."""

    equivalent: bool
    gauge: Optional[List[Permutation]] = None

    def to_dict(self) -> Dict[str, object]:
        return {
            "equivalent": self.equivalent,
            "gauge": [list(g.image) for g in self.gauge] if self.gauge is not None else None,
        }


def connections_equivalent(c1: Connection, c2: Connection, config: Optional[Config] = None) -> EquivalenceResult:
    """
    Search for a gauge g: V_G -> Aut(F) with g_y o phi1_yx = phi2_yx o g_x on every edge.

    Each choice of g at the root forces g along a spanning tree; non-tree
    edges are then checked. Cost O(|Aut(F)| * |E_G|).

    Raises:
        InvalidParameterError: If the connections live on different base or fiber graphs
        ResourceLimitError: If |Aut(F)| exceeds the configured cap
    """
    from src.symmetry import automorphism_elements

    config = config or Config()
    if not c1.same_spaces(c2):
        raise InvalidParameterError("Connections must share base and fiber graphs")

    tree = spanning_tree(c1.base)
    elements = automorphism_elements(c1.fiber, config)
    logger.debug(f"Trying {len(elements)} root gauges")

    for h in elements:
        gauge: Dict[int, Permutation] = {tree.root: h}
        for v in tree.order[1:]:
            p = tree.parent[v]
            gauge[v] = c2.transport(p, v).compose(gauge[p]).compose(c1.transport(p, v).inverse())
        if all(
            gauge[y].compose(c1.transport(x, y)) == c2.transport(x, y).compose(gauge[x])
            for x, y in c1.base.edges()
        ):
            gauge_list = [gauge[v] for v in range(c1.base.n)]
            k = c1.fiber.n
            mapping = Permutation(tuple(x * k + gauge_list[x](v) for x in range(c1.base.n) for v in range(k)))
            if not is_pi_preserving_isomorphism(build_bundle(c1), build_bundle(c2), mapping):
                raise InternalConsistencyError("Gauge map failed the edge-preservation scan")
            return EquivalenceResult(equivalent=True, gauge=gauge_list)

    return EquivalenceResult(equivalent=False)
