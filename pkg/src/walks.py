"""Walk projections, closed-walk counting and shortest unbalanced loops."""

import logging
from collections import Counter, deque
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.bundle import Bundle, Connection, holonomy, is_trivial, null_elements, product
from src.config import Config
from src.errors import HypothesisError, InternalConsistencyError, InvalidPathError, ResourceLimitError
from src.graph import Graph, Path, PathLike, as_path
from src.permutation import Permutation

logger = logging.getLogger(__name__)

__all__ = [
    "Path",
    "ProjectionPair",
    "project_product",
    "project_bundle",
    "closed_walk_count",
    "closed_walk_counts",
    "walk_profile",
    "enumerate_closed_walks",
    "count_walks_with_projections",
    "projection_census",
    "verify_lemmas",
    "shortest_unbalanced_loop",
    "minimal_unbalanced_loop",
    "theorem2_separation",
]


@dataclass(frozen=True)
class ProjectionPair:
    """Deduplicated base and fiber traces of a walk; lengths add up to the walk length."""

    base_part: Path
    fiber_part: Path

    def to_dict(self) -> Dict[str, List[int]]:
        return {"base": list(self.base_part.vertices), "fiber": list(self.fiber_part.vertices)}


def _dedupe(seq: Sequence[int]) -> Path:
    """Apply k(i+1) = min{n >= k(i) : x_n != x_k(i)}: drop consecutive repeats."""
    out = [seq[0]]
    for v in seq[1:]:
        if v != out[-1]:
            out.append(v)
    return Path(tuple(out))


def project_product(g: Graph, f: Graph, walk: PathLike) -> ProjectionPair:
    """
    Project a walk in the Cartesian product G x F onto both factors.

    Raises:
        InvalidPathError: If a step changes both coordinates or follows no edge
    """
    path = as_path(walk)
    k = f.n
    coords = []
    for u in path.vertices:
        if not 0 <= u < g.n * k:
            raise InvalidPathError(f"Vertex {u} out of range for the product")
        coords.append(divmod(u, k))
    for (x, v), (y, w) in zip(coords, coords[1:]):
        base_step = v == w and g.has_edge(x, y)
        fiber_step = x == y and f.has_edge(v, w)
        if not (base_step or fiber_step):
            raise InvalidPathError(f"Step ({x},{v})->({y},{w}) is not a product edge")
    return ProjectionPair(_dedupe([x for x, _ in coords]), _dedupe([v for _, v in coords]))


def project_bundle(b: Bundle, walk: PathLike) -> ProjectionPair:
    """
    Project a bundle walk; fiber coordinates are first pulled back to the start fiber.

    w_i = (prod_{j<i} phi_{x_{j+1},x_j})^-1 (v_i). For a closed walk the fiber
    part joins v_0 to holonomy(base part)^-1 (v_0).
    """
    path = as_path(walk)
    path.check_walk(b.total)
    coords = [b.split(u) for u in path.vertices]
    acc = Permutation.identity(b.fiber_size)
    pulled = [coords[0][1]]
    for (x, _), (y, w) in zip(coords, coords[1:]):
        if x != y:
            acc = b.connection.transport(x, y).compose(acc)
        pulled.append(acc.inverse()(w))
    return ProjectionPair(_dedupe([x for x, _ in coords]), _dedupe(pulled))


def closed_walk_counts(g: Graph, length: int) -> List[int]:
    """Diagonal of A^length with exact integer arithmetic."""
    if length < 0:
        raise InvalidPathError(f"Walk length must be non-negative, got {length}")
    adjacency = g.adjacency_matrix(dtype=object)
    power = np.identity(g.n, dtype=object)
    for _ in range(length):
        power = power @ adjacency
    return [int(power[v, v]) for v in range(g.n)]


def closed_walk_count(g: Graph, v: int, length: int) -> int:
    """Number of closed walks of the given length based at v."""
    if length < 0:
        raise InvalidPathError(f"Walk length must be non-negative, got {length}")
    adjacency = g.adjacency_matrix(dtype=object)
    vector = np.zeros(g.n, dtype=object)
    vector[v] = 1
    for _ in range(length):
        vector = adjacency @ vector
    return int(vector[v])


def walk_profile(g: Graph, v: int, lengths: Sequence[int] = range(3, 9)) -> Tuple[int, ...]:
    return tuple(closed_walk_count(g, v, L) for L in lengths)


def enumerate_closed_walks(g: Graph, v: int, length: int) -> Iterator[Path]:
    """Depth-first enumeration of every closed walk; exponential, used as an oracle."""
    stack = [v]

    def extend() -> Iterator[Path]:
        if len(stack) == length + 1:
            if stack[-1] == v:
                yield Path(tuple(stack))
            return
        for w in g.adjacency[stack[-1]]:
            stack.append(w)
            yield from extend()
            stack.pop()

    yield from extend()


def count_walks_with_projections(space: Bundle, start: int, gamma1: PathLike, gamma2: PathLike) -> int:
    """
    Count closed walks from start whose projections are exactly (gamma1, gamma2).

    Every shuffle of the base steps of gamma1 with the fiber steps of gamma2 is
    replayed in the bundle, fiber steps being pushed forward through the
    transport accumulated so far. Products are bundles with the identity
    connection, so one code path covers both cases.

    Args:
        space: Product or bundle
        start: Flat id of (x, v)
        gamma1: Loop at x in the base
        gamma2: Fiber walk from v to holonomy(gamma1)^-1 (v)

    Raises:
        InvalidPathError: If gamma1 or gamma2 is not a walk
        HypothesisError: If gamma1 does not close at x, or gamma2 has the wrong endpoints
    """
    c = space.connection
    x, v = space.split(start)
    base_walk, fiber_walk = as_path(gamma1), as_path(gamma2)
    base_walk.check_walk(space.base)
    fiber_walk.check_walk(space.fiber)

    if base_walk.start != x or not base_walk.is_closed:
        raise HypothesisError("base loop", f"{list(base_walk.vertices)} is not a loop at {x}")
    target = holonomy(c, base_walk).inverse()(v)
    if fiber_walk.start != v or fiber_walk.end != target:
        raise HypothesisError(
            "fiber endpoints",
            f"fiber walk must join {v} to {target}, got {fiber_walk.start}..{fiber_walk.end}",
        )

    n1, n2 = base_walk.length, fiber_walk.length
    found = set()
    for fiber_slots in combinations(range(n1 + n2), n2):
        slots = set(fiber_slots)
        acc = Permutation.identity(space.fiber_size)
        bi = fi = 0
        walk = [start]
        for step in range(n1 + n2):
            if step in slots:
                fi += 1
            else:
                acc = c.transport(base_walk.vertices[bi], base_walk.vertices[bi + 1]).compose(acc)
                bi += 1
            walk.append(space.flat(base_walk.vertices[bi], acc(fiber_walk.vertices[fi])))
        candidate = Path(tuple(walk))
        pair = project_bundle(space, candidate)
        if pair.base_part != base_walk or pair.fiber_part != fiber_walk or not candidate.is_closed:
            raise InternalConsistencyError(f"Shuffle {fiber_slots} produced {list(candidate.vertices)}")
        found.add(candidate.vertices)
    return len(found)


def projection_census(b: Bundle, start: int, length: int) -> Counter:
    """
    Group every closed walk of the given length at start by its projection pair.

    Depth-first with the pulled-back fiber coordinate tracked incrementally.
    """
    k = b.fiber_size
    transports = {(x, y): b.connection.transport(x, y) for x, y in b.base.oriented_edges()}
    census: Counter = Counter()
    base_trace = [start // k]
    fiber_trace = [start % k]

    def extend(u: int, acc: Permutation, depth: int) -> None:
        if depth == length:
            if u == start:
                census[(tuple(base_trace), tuple(fiber_trace))] += 1
            return
        x = u // k
        for w in b.total.adjacency[u]:
            y, fv = divmod(w, k)
            if y == x:
                fiber_trace.append(acc.inverse()(fv))
                extend(w, acc, depth + 1)
                fiber_trace.pop()
            else:
                base_trace.append(y)
                extend(w, transports[(x, y)].compose(acc), depth + 1)
                base_trace.pop()

    extend(start, Permutation.identity(k), 0)
    return census


@dataclass
class LemmaSweepReport:
    """Outcome of the projection-count sweep at one bundle vertex."""

    start: int
    max_length: int
    walks_checked: int = 0
    pairs_checked: int = 0
    mismatches: List[Dict[str, object]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def to_dict(self) -> Dict[str, object]:
        return {
            "start": self.start,
            "max_length": self.max_length,
            "walks_checked": self.walks_checked,
            "pairs_checked": self.pairs_checked,
            "mismatches": self.mismatches,
            "ok": self.ok,
        }


def verify_lemmas(b: Bundle, start: int, max_length: int) -> LemmaSweepReport:
    """
    Check the binomial closed form for every projection pair of closed walks at start.

    For each length up to max_length the depth-first census, the interleaving
    count and binomial(|g1|+|g2|, |g2|) must agree.
    """
    report = LemmaSweepReport(start=start, max_length=max_length)
    for length in range(max_length + 1):
        census = projection_census(b, start, length)
        for (base_trace, fiber_trace), enumerated in sorted(census.items()):
            expected = comb(len(base_trace) - 1 + len(fiber_trace) - 1, len(fiber_trace) - 1)
            interleaved = count_walks_with_projections(b, start, base_trace, fiber_trace)
            report.walks_checked += enumerated
            report.pairs_checked += 1
            if not enumerated == interleaved == expected:
                report.mismatches.append(
                    {
                        "base": list(base_trace),
                        "fiber": list(fiber_trace),
                        "enumerated": enumerated,
                        "interleaved": interleaved,
                        "binomial": expected,
                    }
                )
    logger.info(
        f"Lemma sweep at {start}: {report.pairs_checked} projection pairs, "
        f"{report.walks_checked} walks, {len(report.mismatches)} mismatches"
    )
    return report


@dataclass
class UnbalancedLoop:
    """A shortest unbalanced loop at its base vertex; length is m(start)."""

    start: int
    length: int
    witness: Path
    holonomy: Permutation

    def to_dict(self) -> Dict[str, object]:
        return {
            "start": self.start,
            "length": self.length,
            "witness": list(self.witness.vertices),
            "holonomy": list(self.holonomy.image),
        }


def shortest_unbalanced_loop(c: Connection, s: int, config: Optional[Config] = None) -> Optional[UnbalancedLoop]:
    """
    Breadth-first search over (base vertex, accumulated transport) states from (s, id).

    Returns None when no unbalanced loop exists at s.

    Raises:
        ResourceLimitError: If more than bfs_state_cap states are visited
    """
    config = config or Config()
    identity = Permutation.identity(c.fiber.n)
    transports = {(x, y): c.transport(x, y) for x, y in c.base.oriented_edges()}
    start_state = (s, identity.image)
    parent: Dict[Tuple[int, Tuple[int, ...]], Optional[Tuple[int, Tuple[int, ...]]]] = {start_state: None}
    depth = {start_state: 0}
    queue = deque([start_state])

    while queue:
        state = queue.popleft()
        x, image = state
        acc = Permutation(image)
        for y in c.base.adjacency[x]:
            nxt_perm = transports[(x, y)].compose(acc)
            nxt = (y, nxt_perm.image)
            if nxt in parent:
                continue
            parent[nxt] = state
            depth[nxt] = depth[state] + 1
            if len(parent) > config.bfs_state_cap:
                raise ResourceLimitError("bfs_state_cap", config.bfs_state_cap, len(parent))
            if y == s and not nxt_perm.is_identity():
                walk = []
                cursor: Optional[Tuple[int, Tuple[int, ...]]] = nxt
                while cursor is not None:
                    walk.append(cursor[0])
                    cursor = parent[cursor]
                witness = Path(tuple(reversed(walk)))
                logger.debug(f"m({s}) = {depth[nxt]} with witness {list(witness.vertices)}")
                return UnbalancedLoop(start=s, length=depth[nxt], witness=witness, holonomy=nxt_perm)
            queue.append(nxt)
    return None


def minimal_unbalanced_loop(c: Connection, config: Optional[Config] = None) -> Optional[UnbalancedLoop]:
    """The loop realizing min_s m(s); ties go to the lowest base vertex."""
    best: Optional[UnbalancedLoop] = None
    for s in range(c.base.n):
        loop = shortest_unbalanced_loop(c, s, config)
        if loop is not None and (best is None or loop.length < best.length):
            best = loop
    return best


@dataclass
class SeparationReport:
    """Closed-walk counts that separate a non-trivial bundle from the product."""

    x0: int
    v0: int
    m: int
    witness: Path
    bundle_count: int
    product_count: int
    null_element: Optional[int] = None
    null_count: Optional[int] = None

    @property
    def not_isomorphic_to_product(self) -> bool:
        return self.bundle_count < self.product_count

    @property
    def not_vertex_transitive(self) -> Optional[bool]:
        if self.null_count is None:
            return None
        return self.null_count != self.bundle_count

    def to_dict(self) -> Dict[str, object]:
        return {
            "x0": self.x0,
            "v0": self.v0,
            "m": self.m,
            "witness": list(self.witness.vertices),
            "bundle_count": self.bundle_count,
            "product_count": self.product_count,
            "null_element": self.null_element,
            "null_count": self.null_count,
            "not_isomorphic_to_product": self.not_isomorphic_to_product,
            "not_vertex_transitive": self.not_vertex_transitive,
        }


def theorem2_separation(b: Bundle, config: Optional[Config] = None) -> SeparationReport:
    """
    Count closed walks of length m(x0) at (x0, v0) in the bundle and in the product.

    x0 minimizes m(s); v0 is the smallest fiber vertex moved by the holonomy of
    the witness loop. When a null element o exists, the count at (x0, o) is
    reported too; it equals the product count, so a difference refutes
    vertex-transitivity.

    Raises:
        HypothesisError: If the connection is trivial
    """
    c = b.connection
    if is_trivial(c).trivial:
        raise HypothesisError("non-trivial connection", "every loop of the base is balanced")

    loop = minimal_unbalanced_loop(c, config)
    v0 = loop.holonomy.moved_points()[0]
    start = b.flat(loop.start, v0)
    prod = product(c.base, c.fiber)
    report = SeparationReport(
        x0=loop.start,
        v0=v0,
        m=loop.length,
        witness=loop.witness,
        bundle_count=closed_walk_count(b.total, start, loop.length),
        product_count=closed_walk_count(prod.total, start, loop.length),
    )
    nulls = null_elements(c)
    if nulls:
        report.null_element = nulls[0]
        report.null_count = closed_walk_count(b.total, b.flat(loop.start, nulls[0]), loop.length)
    logger.info(
        f"m(x0)={report.m} at x0={report.x0}: bundle {report.bundle_count} vs product {report.product_count}"
    )
    return report
