"""
Ricci-flat and S-Ricci-flat certification by local frame search.

A frame at x is a family of d maps eta_i on the closed ball B_1(x). With
n_j the j-th neighbour of x, the search fixes eta_i(x) = n_i, which leaves
the d x d table M[i][j] = eta_i(n_j) to fill:

* column j must list N(n_j) once each (adjacency and distinctness),
* under the per-index reading, row i must list N(n_i) once each,
* commuting frames need M symmetric, which makes rows and columns coincide.

This is an exact-cover problem solved by backtracking with a
minimum-remaining-values choice and a forward check on every group.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from src.bundle import Bundle, Connection, is_balanced, is_trivial, null_elements
from src.config import RICCI_READINGS, Config
from src.errors import HypothesisError, InternalConsistencyError, InvalidParameterError, ResourceLimitError
from src.graph import Graph, Path
from src.symmetry import automorphism_group

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Frame:
    """Maps eta_0..eta_{d-1} on the ball [center, sorted neighbours]; table[i][k] = eta_i(ball[k])."""

    center: int
    ball: Tuple[int, ...]
    table: Tuple[Tuple[int, ...], ...]

    @property
    def degree(self) -> int:
        return len(self.table)

    def apply(self, i: int, u: int) -> int:
        return self.table[i][self.ball.index(u)]

    def to_dict(self) -> Dict[str, object]:
        return {"center": self.center, "ball": list(self.ball), "table": [list(row) for row in self.table]}


@dataclass
class FrameCheck:
    """Per-condition outcome of the frame validator."""

    structure: bool
    adjacent: bool = False
    distinct: bool = False
    multiset: bool = False
    commuting: bool = False
    interpretation_conflict: bool = False

    def ok(self, require_commuting: bool) -> bool:
        base = self.structure and self.adjacent and self.distinct and self.multiset
        return base and (self.commuting or not require_commuting)


def validate_frame(g: Graph, frame: Frame, reading: str = "per-index") -> FrameCheck:
    """
    Check conditions (i)-(iv) directly from the table, independently of the search.

    (iii) per-index: for every i, {eta_j(eta_i(x))}_j == {eta_i(eta_j(x))}_j as multisets.
    (iii) global: the two d^2-element multisets over all (i, j) agree.
    A frame satisfying (iv) but failing per-index (iii) sets interpretation_conflict.
    """
    if reading not in RICCI_READINGS:
        raise InvalidParameterError(f"Unknown condition (iii) reading {reading!r}")
    x = frame.center
    d = g.degree(x)
    expected_ball = (x,) + tuple(g.neighbors(x))
    if frame.ball != expected_ball or len(frame.table) != d or any(len(row) != len(frame.ball) for row in frame.table):
        return FrameCheck(structure=False)

    def eta(i: int, u: int) -> int:
        return frame.apply(i, u)

    check = FrameCheck(structure=True)
    check.adjacent = all(g.has_edge(eta(i, u), u) for i in range(d) for u in frame.ball)
    check.distinct = all(len({eta(i, u) for i in range(d)}) == d for u in frame.ball)
    if not (check.adjacent and check.distinct):
        return check

    first = [eta(i, x) for i in range(d)]
    per_index = all(
        sorted(eta(j, first[i]) for j in range(d)) == sorted(eta(i, first[j]) for j in range(d)) for i in range(d)
    )
    if reading == "per-index":
        check.multiset = per_index
    else:
        check.multiset = sorted(eta(j, first[i]) for i in range(d) for j in range(d)) == sorted(
            eta(i, first[j]) for i in range(d) for j in range(d)
        )
    check.commuting = all(eta(i, first[j]) == eta(j, first[i]) for i in range(d) for j in range(d))
    check.interpretation_conflict = check.commuting and not per_index
    if check.interpretation_conflict:
        logger.error(f"Commuting frame at {x} fails the per-index multiset condition")
    return check


class _ExactCover:
    """
    Fill variables from candidate sets so each group receives its required values exactly once.

    A variable may belong to several groups (a symmetric off-diagonal pair
    belongs to two columns); every group it touches consumes its value.
    """

    def __init__(
        self,
        candidates: Sequence[Sequence[int]],
        memberships: Sequence[Sequence[int]],
        requirements: Sequence[Sequence[int]],
    ):
        self.candidates = [list(c) for c in candidates]
        self.memberships = [list(m) for m in memberships]
        self.requirements = [set(r) for r in requirements]
        self.members: List[List[int]] = [[] for _ in requirements]
        for var, groups in enumerate(self.memberships):
            for grp in groups:
                self.members[grp].append(var)
        self.used: List[set] = [set() for _ in requirements]
        self.assignment: Dict[int, int] = {}

    def _options(self, var: int) -> List[int]:
        return [
            value
            for value in self.candidates[var]
            if all(value in self.requirements[grp] and value not in self.used[grp] for grp in self.memberships[var])
        ]

    def _forward_ok(self) -> bool:
        for grp, required in enumerate(self.requirements):
            needed = required - self.used[grp]
            free = [var for var in self.members[grp] if var not in self.assignment]
            reachable = set()
            for var in free:
                reachable.update(self._options(var))
            if not needed <= reachable:
                return False
        return True

    def solve(self) -> Optional[Dict[int, int]]:
        free = [var for var in range(len(self.candidates)) if var not in self.assignment]
        if not free:
            return dict(self.assignment)
        var = min(free, key=lambda v: (len(self._options(v)), v))
        for value in self._options(var):
            self.assignment[var] = value
            for grp in self.memberships[var]:
                self.used[grp].add(value)
            if self._forward_ok():
                result = self.solve()
                if result is not None:
                    return result
            for grp in self.memberships[var]:
                self.used[grp].discard(value)
            del self.assignment[var]
        return None


def _require_regular(g: Graph, config: Config) -> int:
    d = g.regular_degree()
    if d is None:
        raise InvalidParameterError("Frame search needs a regular graph")
    if d > config.frame_degree_cap:
        raise ResourceLimitError("frame_degree_cap", config.frame_degree_cap, d)
    return d


def find_frame(
    g: Graph, x: int, require_commuting: bool, config: Optional[Config] = None
) -> Optional[Frame]:
    """
    Search for a frame at x; None after exhaustive failure.

    Raises:
        InvalidParameterError: If g is not regular
        ResourceLimitError: If the degree exceeds frame_degree_cap
        InternalConsistencyError: If a found frame fails the validator
    """
    config = config or Config()
    d = _require_regular(g, config)
    nbrs = list(g.neighbors(x))
    per_index = config.ricci_reading == "per-index"

    # Groups 0..d-1 are the columns N(n_j); rows N(n_i) follow when needed
    requirements = [g.neighbor_set(n) for n in nbrs]
    if per_index and not require_commuting:
        requirements += [g.neighbor_set(n) for n in nbrs]

    cells: List[Tuple[int, int]] = []
    candidates: List[List[int]] = []
    memberships: List[List[int]] = []
    for i in range(d):
        for j in range(d):
            if require_commuting and j < i:
                continue
            allowed = g.neighbor_set(nbrs[j])
            if per_index or require_commuting:
                allowed = allowed & g.neighbor_set(nbrs[i])
            cells.append((i, j))
            candidates.append(sorted(allowed))
            if require_commuting:
                memberships.append([j] if i == j else [i, j])
            elif per_index:
                memberships.append([j, d + i])
            else:
                memberships.append([j])

    solution = _ExactCover(candidates, memberships, requirements).solve()
    if solution is None:
        logger.debug(f"No {'commuting ' if require_commuting else ''}frame at {x}")
        return None

    table = [[0] * (d + 1) for _ in range(d)]
    for var, value in solution.items():
        i, j = cells[var]
        table[i][j + 1] = value
        if require_commuting:
            table[j][i + 1] = value
    for i in range(d):
        table[i][0] = nbrs[i]
    frame = Frame(center=x, ball=(x,) + tuple(nbrs), table=tuple(tuple(row) for row in table))

    check = validate_frame(g, frame, config.ricci_reading)
    if not check.ok(require_commuting):
        raise InternalConsistencyError(f"Frame found at {x} fails validation: {check}")
    return frame


@dataclass
class FrameCertificate:
    """Per-vertex frames (None where the search failed) and the resulting flags."""

    frames: Dict[int, Optional[Frame]]
    ricci_flat: bool
    s_ricci_flat: Optional[bool]
    reading: str = "per-index"

    @property
    def failures(self) -> List[int]:
        return sorted(v for v, frame in self.frames.items() if frame is None)

    def to_dict(self) -> Dict[str, object]:
        return {
            "ricci_flat": self.ricci_flat,
            "s_ricci_flat": self.s_ricci_flat,
            "reading": self.reading,
            "failures": self.failures,
            "frames": {str(v): (f.to_dict() if f is not None else None) for v, f in sorted(self.frames.items())},
        }


def certify(
    g: Graph, require_commuting: bool, config: Optional[Config] = None, workers: int = 1
) -> FrameCertificate:
    """
    Run find_frame at every vertex.

    With require_commuting the certificate decides both flags: a commuting
    frame is also a Ricci-flat frame, and vertices without one get a second,
    non-commuting search. Without it s_ricci_flat is only settled when the
    graph is not Ricci-flat.
    """
    config = config or Config()
    _require_regular(g, config)

    def search(v: int) -> Optional[Frame]:
        return find_frame(g, v, require_commuting, config)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            found = list(pool.map(search, range(g.n)))
    else:
        found = [search(v) for v in range(g.n)]
    frames = dict(enumerate(found))
    all_found = all(f is not None for f in found)

    if require_commuting:
        s_flat: Optional[bool] = all_found
        ricci = all_found or all(frames[v] is not None or find_frame(g, v, False, config) for v in range(g.n))
    else:
        ricci = all_found
        s_flat = None if ricci else False

    logger.info(f"Frame certificate: ricci_flat={ricci}, s_ricci_flat={s_flat}")
    return FrameCertificate(frames=frames, ricci_flat=bool(ricci), s_ricci_flat=s_flat, reading=config.ricci_reading)


@dataclass
class FourLoopResult:
    balanced: bool
    witness: Optional[Path] = None
    loops_checked: int = 0

    def to_dict(self) -> Dict[str, object]:
        return {
            "balanced": self.balanced,
            "witness": list(self.witness.vertices) if self.witness is not None else None,
            "loops_checked": self.loops_checked,
        }


def check_4loop_balanced(c: Connection) -> FourLoopResult:
    """Check every closed base walk of length 4 from every vertex; report the first unbalanced one."""
    base = c.base
    checked = 0
    for x in range(base.n):
        for a in base.adjacency[x]:
            for b in base.adjacency[a]:
                for y in base.adjacency[b]:
                    if not base.has_edge(y, x):
                        continue
                    loop = Path((x, a, b, y, x))
                    checked += 1
                    if not is_balanced(c, loop):
                        logger.warning(f"Unbalanced 4-loop {list(loop.vertices)}")
                        return FourLoopResult(balanced=False, witness=loop, loops_checked=checked)
    return FourLoopResult(balanced=True, loops_checked=checked)


def _lifted_frame(b: Bundle, center: int, base_frame: Frame, fiber_frame: Frame) -> Frame:
    """
    Bundle frame at (x, v) built from frames a_i at x and b_j at v.

    eta_{a_i}(s, w) = (a_i(s), phi(a_i(s), s)(w))
    eta_{b_j}(x, v) = (x, b_j(v))
    eta_{b_j}(x, b_k(v)) = (x, b_k(b_j(v)))
    eta_{b_j}(y, phi_yx(v)) = (y, phi_yx(b_j(v)))
    """
    c = b.connection
    x, v = b.split(center)
    ball = (center,) + tuple(b.total.neighbors(center))
    d1, d2 = base_frame.degree, fiber_frame.degree
    rows: List[List[int]] = [[] for _ in range(d1 + d2)]

    for point in ball:
        s, w = b.split(point)
        for i in range(d1):
            target = base_frame.apply(i, s)
            rows[i].append(b.flat(target, c.transport(s, target)(w)))
        for j in range(d2):
            if point == center:
                value = b.flat(x, fiber_frame.apply(j, v))
            elif s == x:
                k = next(k for k in range(d2) if fiber_frame.apply(k, v) == w)
                value = b.flat(x, fiber_frame.apply(k, fiber_frame.apply(j, v)))
            else:
                value = b.flat(s, c.transport(x, s)(fiber_frame.apply(j, v)))
            rows[d1 + j].append(value)

    return Frame(center=center, ball=ball, table=tuple(tuple(r) for r in rows))


def lift_frames(
    b: Bundle, base_frames: FrameCertificate, fiber_frames: FrameCertificate, config: Optional[Config] = None
) -> FrameCertificate:
    """
    Build commuting bundle frames from commuting base and fiber frames.

    Raises:
        HypothesisError: If base or fiber frames are not commuting at every
            vertex, or some 4-loop of the base is unbalanced
        InternalConsistencyError: If a lifted frame fails the validator
    """
    config = config or Config()
    for name, cert, graph in (("S-Ricci-flat base", base_frames, b.base), ("S-Ricci-flat fiber", fiber_frames, b.fiber)):
        if not cert.s_ricci_flat or len(cert.frames) != graph.n:
            raise HypothesisError(name, f"missing commuting frames at {cert.failures}")

    four = check_4loop_balanced(b.connection)
    if not four.balanced:
        raise HypothesisError("4-loop balanced", "base has an unbalanced 4-loop", four.witness.vertices)

    frames: Dict[int, Optional[Frame]] = {}
    for center in range(b.total.n):
        x, v = b.split(center)
        frame = _lifted_frame(b, center, base_frames.frames[x], fiber_frames.frames[v])
        check = validate_frame(b.total, frame, config.ricci_reading)
        if not check.ok(require_commuting=True):
            raise InternalConsistencyError(f"Lifted frame at {b.total.label(center)} fails validation: {check}")
        frames[center] = frame

    logger.info(f"Lifted {len(frames)} commuting frames to the bundle")
    return FrameCertificate(frames=frames, ricci_flat=True, s_ricci_flat=True, reading=config.ricci_reading)


@dataclass
class Theorem4Report:
    """A non-trivial discrete vector bundle that is S-Ricci-flat yet not vertex-transitive."""

    null_elements: List[int]
    four_loop: FourLoopResult
    frames: FrameCertificate
    vertex_transitive: bool
    orbit_count: int
    extras: Dict[str, object] = field(default_factory=dict)

    @property
    def s_ricci_flat(self) -> bool:
        return bool(self.frames.s_ricci_flat)

    @property
    def cayley_excluded(self) -> bool:
        """Cayley graphs are vertex-transitive, so a transitivity failure rules them out."""
        return not self.vertex_transitive

    def to_dict(self) -> Dict[str, object]:
        return {
            "null_elements": self.null_elements,
            "four_loop": self.four_loop.to_dict(),
            "s_ricci_flat": self.s_ricci_flat,
            "vertex_transitive": self.vertex_transitive,
            "orbit_count": self.orbit_count,
            "cayley_excluded": self.cayley_excluded,
            **self.extras,
        }


def theorem4_certificate(b: Bundle, config: Optional[Config] = None) -> Theorem4Report:
    """
    Certify S-Ricci-flatness by lifting frames and refute vertex-transitivity.

    Raises:
        HypothesisError: Naming the first failed hypothesis: non-trivial
            connection, discrete vector bundle, S-Ricci-flat base or fiber,
            4-loop balanced
    """
    config = config or Config()
    c = b.connection
    if is_trivial(c).trivial:
        raise HypothesisError("non-trivial connection", "every loop of the base is balanced")
    nulls = null_elements(c)
    if not nulls:
        raise HypothesisError("discrete vector bundle", "no fiber vertex is fixed by every transport")

    base_frames = certify(c.base, True, config)
    fiber_frames = certify(c.fiber, True, config)
    frames = lift_frames(b, base_frames, fiber_frames, config)
    group = automorphism_group(b.total, config)
    report = Theorem4Report(
        null_elements=nulls,
        four_loop=check_4loop_balanced(c),
        frames=frames,
        vertex_transitive=group.orbits.count == 1,
        orbit_count=group.orbits.count,
    )
    logger.info(
        f"S-Ricci-flat={report.s_ricci_flat}, vertex-transitive={report.vertex_transitive}, orbits={report.orbit_count}"
    )
    return report
