"""
Automorphism groups, orbits and canonical forms by individualize-and-refine.

Colour refinement is iterated until the partition is stable; ties are broken
by individualizing the lowest-index vertex of the first largest
non-singleton cell. Every automorphism and isomorphism returned here has
been checked edge by edge.
"""

import hashlib
import json
import logging
from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field
from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.bundle import Bundle
from src.config import Config
from src.errors import InternalConsistencyError, InvalidLoopError, InvalidParameterError, ResourceLimitError
from src.graph import Graph, Path, PathLike, as_path, cycle_graph, shortest_path_counts
from src.permutation import Permutation
from src.walks import closed_walk_counts

logger = logging.getLogger(__name__)

Trace = Tuple[Tuple[Tuple[Hashable, int], ...], ...]


class UnionFind:
    """Disjoint sets over 0..n-1 with union by rank and path compression."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        y = self.parent[x]
        if self.parent[y] != y:
            y = self.parent[x] = self.find(y)
        return y

    def union(self, x: int, y: int) -> None:
        x, y = self.find(x), self.find(y)
        if x == y:
            return
        if self.rank[x] < self.rank[y]:
            x, y = y, x
        elif self.rank[x] == self.rank[y]:
            self.rank[x] += 1
        self.parent[y] = x


@dataclass
class OrbitPartition:
    """Orbit id per vertex; ids are numbered in order of each orbit's smallest vertex."""

    orbit_of: List[int]

    @classmethod
    def from_generators(cls, n: int, generators: Iterable[Permutation]) -> "OrbitPartition":
        uf = UnionFind(n)
        for gen in generators:
            for v in range(n):
                uf.union(v, gen(v))
        ids: Dict[int, int] = {}
        orbit_of = []
        for v in range(n):
            orbit_of.append(ids.setdefault(uf.find(v), len(ids)))
        return cls(orbit_of)

    @property
    def count(self) -> int:
        return len(set(self.orbit_of))

    def orbits(self) -> List[List[int]]:
        grouped: Dict[int, List[int]] = defaultdict(list)
        for v, k in enumerate(self.orbit_of):
            grouped[k].append(v)
        return [grouped[k] for k in sorted(grouped)]

    def sizes(self) -> List[int]:
        return [len(o) for o in self.orbits()]


@dataclass
class AutomorphismGroup:
    """Generators, orbits and exact order of Aut(g); base is the individualization sequence."""

    n: int
    generators: List[Permutation]
    orbits: OrbitPartition
    order: int
    base: List[int] = field(default_factory=list)

    def to_dict(self) -> Dict[str, object]:
        return {
            "vertex_count": self.n,
            "order": self.order,
            "generators": [list(g.image) for g in self.generators],
            "orbits": self.orbits.orbits(),
            "orbit_count": self.orbits.count,
        }


def _check_cap(g: Graph, config: Config) -> None:
    if g.n > config.aut_vertex_cap:
        raise ResourceLimitError("aut_vertex_cap", config.aut_vertex_cap, g.n)


def seed_colors(g: Graph) -> List[Tuple[int, ...]]:
    """(degree, closed walks of length 3..6) per vertex; bounded by deg^6 so int64 suffices."""
    adjacency = g.adjacency_matrix(dtype=np.int64)
    power = adjacency.copy()
    diagonals = []
    for length in range(2, 7):
        power = power @ adjacency
        if length >= 3:
            diagonals.append(np.diag(power))
    return [(g.degree(v),) + tuple(int(d[v]) for d in diagonals) for v in range(g.n)]


def refine(g: Graph, colors: Sequence[Hashable]) -> Tuple[List[int], Trace]:
    """
    Iterate colour refinement to a stable partition.

    A vertex's signature is its colour together with the sorted colours of its
    neighbours; signatures are re-ranked in sorted order each round, so the
    result is a relabeling-equivariant function of the input colouring.

    Returns:
        Stable colours ranked 0..k-1 and the per-round signature histograms,
        which must agree between two colourings for an isomorphism to map
        one onto the other
    """
    ranking = {c: k for k, c in enumerate(sorted(set(colors)))}
    current = [ranking[c] for c in colors]
    trace = [tuple(sorted(Counter(colors).items()))]
    while True:
        signatures = [(current[v], tuple(sorted(current[w] for w in g.adjacency[v]))) for v in range(g.n)]
        ranking = {s: k for k, s in enumerate(sorted(set(signatures)))}
        refined = [ranking[s] for s in signatures]
        trace.append(tuple(sorted(Counter(signatures).items())))
        if len(ranking) == len(set(current)):
            return refined, tuple(trace)
        current = refined


def _individualize(colors: Sequence[int], v: int) -> List[int]:
    out = [2 * c for c in colors]
    out[v] += 1
    return out


def _target_cell(colors: Sequence[int]) -> Optional[List[int]]:
    """Members (ascending) of the first largest non-singleton cell, or None if discrete."""
    cells: Dict[int, List[int]] = defaultdict(list)
    for v, c in enumerate(colors):
        cells[c].append(v)
    candidates = [(len(members), c) for c, members in cells.items() if len(members) > 1]
    if not candidates:
        return None
    size = max(s for s, _ in candidates)
    color = min(c for s, c in candidates if s == size)
    return cells[color]


def _maps_edges(g1: Graph, g2: Graph, mapping: Permutation) -> bool:
    if g1.n != g2.n or g1.edge_count != g2.edge_count:
        return False
    return all(g2.has_edge(mapping(u), mapping(v)) for u, v in g1.edges())


def _search_pairing(g1: Graph, g2: Graph, c1: List[int], c2: List[int]) -> Optional[Permutation]:
    """
    Find an isomorphism g1 -> g2 carrying the colouring c1 onto c2.

    The g1 side always individualizes the first vertex of its target cell; the
    g2 side tries every vertex of the same colour whose refinement trace matches.
    """
    cell = _target_cell(c1)
    if cell is None:
        if len(set(c2)) != g2.n:
            return None
        position = {c: w for w, c in enumerate(c2)}
        mapping = Permutation(tuple(position[c] for c in c1))
        return mapping if _maps_edges(g1, g2, mapping) else None

    u = cell[0]
    refined1, trace1 = refine(g1, _individualize(c1, u))
    for w in range(g2.n):
        if c2[w] != c1[u]:
            continue
        refined2, trace2 = refine(g2, _individualize(c2, w))
        if trace2 != trace1:
            continue
        found = _search_pairing(g1, g2, refined1, refined2)
        if found is not None:
            return found
    return None


def _orbit_of(v: int, generators: Sequence[Permutation]) -> set:
    orbit = {v}
    queue = deque([v])
    while queue:
        u = queue.popleft()
        for gen in generators:
            w = gen(u)
            if w not in orbit:
                orbit.add(w)
                queue.append(w)
    return orbit


def automorphism_group(g: Graph, config: Optional[Config] = None) -> AutomorphismGroup:
    """
    Compute generators, orbits and the order of Aut(g).

    Individualizing down to a discrete colouring gives a base b_0..b_k. Levels
    are processed deepest first; at level L every vertex w sharing b_L's colour
    and not yet in its orbit is tried as an image of b_L. The generators found
    at levels >= L generate the pointwise stabilizer of b_0..b_{L-1}, so the
    group order is the product of the orbit lengths of b_L.

    Raises:
        ResourceLimitError: If g has more vertices than aut_vertex_cap
        InternalConsistencyError: If a found map fails the edge scan
    """
    config = config or Config()
    _check_cap(g, config)

    colors, _ = refine(g, seed_colors(g))
    base: List[int] = []
    levels = [colors]
    traces: List[Trace] = []
    while (cell := _target_cell(levels[-1])) is not None:
        base.append(cell[0])
        refined, trace = refine(g, _individualize(levels[-1], cell[0]))
        levels.append(refined)
        traces.append(trace)

    generators: List[Permutation] = []
    order = 1
    for level in reversed(range(len(base))):
        b = base[level]
        here = levels[level]
        orbit = _orbit_of(b, generators)
        for w in range(g.n):
            if here[w] != here[b] or w in orbit:
                continue
            refined_w, trace_w = refine(g, _individualize(here, w))
            if trace_w != traces[level]:
                continue
            found = _search_pairing(g, g, levels[level + 1], refined_w)
            if found is None:
                continue
            if not found.is_automorphism_of(g):
                raise InternalConsistencyError(f"Map {found} sending {b}->{w} is not an automorphism")
            generators.append(found)
            orbit = _orbit_of(b, generators)
        order *= len(orbit)
        logger.debug(f"Base point {b} at level {level}: orbit of size {len(orbit)}")

    orbits = OrbitPartition.from_generators(g.n, generators)
    logger.info(f"|Aut| = {order} with {len(generators)} generators and {orbits.count} orbits")
    return AutomorphismGroup(n=g.n, generators=generators, orbits=orbits, order=order, base=base)


def automorphism_elements(g: Graph, config: Optional[Config] = None) -> List[Permutation]:
    """
    Every element of Aut(g), sorted by image array.

    Raises:
        ResourceLimitError: If |Aut(g)| exceeds aut_order_cap
    """
    config = config or Config()
    group = automorphism_group(g, config)
    if group.order > config.aut_order_cap:
        raise ResourceLimitError("aut_order_cap", config.aut_order_cap, group.order)
    identity = Permutation.identity(g.n)
    seen = {identity.image}
    queue = deque([identity])
    while queue:
        element = queue.popleft()
        for gen in group.generators:
            nxt = gen.compose(element)
            if nxt.image not in seen:
                seen.add(nxt.image)
                queue.append(nxt)
    if len(seen) != group.order:
        raise InternalConsistencyError(f"Closure has {len(seen)} elements, expected {group.order}")
    return [Permutation(image) for image in sorted(seen)]


def is_vertex_transitive(g: Graph, config: Optional[Config] = None) -> bool:
    return automorphism_group(g, config).orbits.count == 1


@dataclass
class CanonicalForm:
    """Canonical labeling (v -> position) and the sorted relabeled edge list."""

    labeling: Permutation
    certificate: Tuple[Tuple[int, int], ...]
    vertex_count: int

    @property
    def digest(self) -> str:
        payload = json.dumps({"n": self.vertex_count, "edges": [list(e) for e in self.certificate]})
        return hashlib.sha256(payload.encode()).hexdigest()


def canonical_form(g: Graph, config: Optional[Config] = None) -> CanonicalForm:
    """
    Smallest leaf certificate of the individualize-and-refine search tree.

    At each node only one child per orbit of the automorphisms fixing the
    current path pointwise is expanded; those children carry identical
    certificate sets.
    """
    config = config or Config()
    group = automorphism_group(g, config)
    start, _ = refine(g, seed_colors(g))
    best: List[Tuple[Tuple[Tuple[int, int], ...], Tuple[int, ...]]] = []

    def explore(colors: List[int], path: List[int]) -> None:
        cell = _target_cell(colors)
        if cell is None:
            certificate = tuple(sorted(tuple(sorted((colors[u], colors[v]))) for u, v in g.edges()))
            if not best or certificate < best[0][0]:
                best[:] = [(certificate, tuple(colors))]
            return
        stabilizer = [s for s in group.generators if all(s(p) == p for p in path)]
        uf = UnionFind(g.n)
        for s in stabilizer:
            for v in cell:
                uf.union(v, s(v))
        expanded = set()
        for w in cell:
            root = uf.find(w)
            if root in expanded:
                continue
            expanded.add(root)
            refined, _ = refine(g, _individualize(colors, w))
            explore(refined, path + [w])

    explore(start, [])
    certificate, labeling = best[0]
    return CanonicalForm(labeling=Permutation(labeling), certificate=certificate, vertex_count=g.n)


@dataclass
class IsomorphismResult:
    isomorphic: bool
    mapping: Optional[Permutation] = None

    def to_dict(self) -> Dict[str, object]:
        return {
            "isomorphic": self.isomorphic,
            "mapping": list(self.mapping.image) if self.mapping is not None else None,
        }


def are_isomorphic(g1: Graph, g2: Graph, config: Optional[Config] = None) -> IsomorphismResult:
    """
    Compare canonical certificates; on success the witness is lambda2^-1 o lambda1.

    Raises:
        ResourceLimitError: If either graph exceeds aut_vertex_cap
    """
    config = config or Config()
    _check_cap(g1, config)
    _check_cap(g2, config)
    if g1.n != g2.n or g1.edge_count != g2.edge_count:
        return IsomorphismResult(isomorphic=False)
    if sorted(g1.degree(v) for v in range(g1.n)) != sorted(g2.degree(v) for v in range(g2.n)):
        return IsomorphismResult(isomorphic=False)

    form1, form2 = canonical_form(g1, config), canonical_form(g2, config)
    if form1.certificate != form2.certificate:
        return IsomorphismResult(isomorphic=False)
    mapping = form2.labeling.inverse().compose(form1.labeling)
    if not _maps_edges(g1, g2, mapping):
        raise InternalConsistencyError("Equal certificates but the induced map is not an isomorphism")
    return IsomorphismResult(isomorphic=True, mapping=mapping)


def rho_automorphism(b: Bundle) -> Permutation:
    """
    The rotation rho(i, v) = (i+1, phi_{i+1,i}(v)) of a bundle over Z_n.

    Raises:
        InvalidParameterError: If the base is not the cycle 0 ~ 1 ~ ... ~ n-1 ~ 0
        InternalConsistencyError: If rho fails the edge scan
    """
    n = b.base.n
    if n < 3 or not b.base.same_edges(cycle_graph(n)):
        raise InvalidParameterError("rho is defined for bundles over the cycle graph Z_n")
    image = []
    for i in range(n):
        step = b.connection.transport(i, (i + 1) % n)
        for v in range(b.fiber_size):
            image.append(b.flat((i + 1) % n, step(v)))
    rho = Permutation(tuple(image))
    if not rho.is_automorphism_of(b.total):
        raise InternalConsistencyError("rho does not preserve adjacency")
    return rho


def rho_orbits(b: Bundle) -> OrbitPartition:
    """Orbits of the cyclic group generated by rho."""
    return OrbitPartition.from_generators(b.total.n, [rho_automorphism(b)])


def _is_geodesic_step(g: Graph, a: int, c: int, cache: Optional[Dict[int, Dict[int, Tuple[int, int]]]] = None) -> bool:
    """True iff a and c are at distance exactly 2 joined by a single shortest path."""
    if cache is None:
        counts = shortest_path_counts(g, a, 2)
    else:
        if a not in cache:
            cache[a] = shortest_path_counts(g, a, 2)
        counts = cache[a]
    return counts.get(c) == (2, 1)


def is_geodesic_like(g: Graph, loop: PathLike) -> bool:
    """
    Whether every window beta[i], beta[i+1], beta[i+2] (indices mod l) is the
    unique shortest path between its ends.

    Loops shorter than 3 have a backtrack or no window and are not geodesic-like.

    Raises:
        InvalidPathError: If loop is not a walk in g
        InvalidLoopError: If it is not closed
    """
    path = as_path(loop)
    path.check_loop(g)
    cyclic = path.vertices[:-1]
    length = len(cyclic)
    if length < 3:
        return False
    cache: Dict[int, Dict[int, Tuple[int, int]]] = {}
    return all(
        _is_geodesic_step(g, cyclic[i], cyclic[(i + 2) % length], cache) for i in range(length)
    )


def geodesic_like_loops(g: Graph, start: int, max_length: int) -> List[Path]:
    """
    Geodesic-like loops at start of length <= max_length that meet start only at their ends.

    Depth-first; partial walks whose last window is not a unique geodesic are cut.
    """
    if not 0 <= start < g.n:
        raise InvalidLoopError(f"Start vertex {start} out of range")
    cache: Dict[int, Dict[int, Tuple[int, int]]] = {}
    found: List[Path] = []
    walk = [start]

    def extend() -> None:
        for w in g.adjacency[walk[-1]]:
            if len(walk) >= 2 and not _is_geodesic_step(g, walk[-2], w, cache):
                continue
            if w == start:
                candidate = Path(tuple(walk + [w]))
                if candidate.length >= 3 and is_geodesic_like(g, candidate):
                    found.append(candidate)
                continue
            if len(walk) < max_length:
                walk.append(w)
                extend()
                walk.pop()

    extend()
    return found


@dataclass
class OrbitCertificate:
    """Orbits with explicit generators (lower bound) and invariant profiles (upper bound)."""

    group: AutomorphismGroup
    lengths: List[int]
    profiles: List[Tuple[int, ...]]
    profiles_constant: bool

    @property
    def separated(self) -> bool:
        """Distinct orbits carry distinct profiles, so the orbit count is exact by invariants alone."""
        return len(set(self.profiles)) == len(self.profiles)

    def to_dict(self) -> Dict[str, object]:
        data = self.group.to_dict()
        data.update(
            {
                "profile_lengths": self.lengths,
                "profiles": [list(p) for p in self.profiles],
                "profiles_constant": self.profiles_constant,
                "separated": self.separated,
            }
        )
        return data


def orbit_certificate(
    g: Graph, config: Optional[Config] = None, lengths: Sequence[int] = range(3, 9)
) -> OrbitCertificate:
    group = automorphism_group(g, config)
    counts = [closed_walk_counts(g, L) for L in lengths]
    per_vertex = [tuple(c[v] for c in counts) for v in range(g.n)]
    orbits = group.orbits.orbits()
    constant = all(len({per_vertex[v] for v in orbit}) == 1 for orbit in orbits)
    if not constant:
        raise InternalConsistencyError("Closed-walk profile varies inside an orbit")
    return OrbitCertificate(
        group=group,
        lengths=list(lengths),
        profiles=[per_vertex[orbit[0]] for orbit in orbits],
        profiles_constant=constant,
    )
