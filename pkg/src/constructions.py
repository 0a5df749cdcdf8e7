"""Generators for the example bundles and their expected-property catalog."""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from src.bundle import Bundle, Connection, identity_connection
from src.errors import InternalConsistencyError, InvalidParameterError
from src.graph import cayley_graph, complete_graph, cycle_graph, element_index
from src.permutation import Permutation

logger = logging.getLogger(__name__)

EXAMPLE_NAMES = ("dvb1", "eg2", "eg3", "dvb2-torus", "product")


def make_dvb1(n: int) -> Connection:
    """Z_n with fiber Z_4; the edge 0 -> 1 carries the double transposition (0 1)(2 3)."""
    if n < 3:
        raise InvalidParameterError(f"dvb1 needs n >= 3, got {n}")
    swap = Permutation.from_cycles(4, [(0, 1), (2, 3)])
    return Connection.from_assignments(cycle_graph(n), cycle_graph(4), {(0, 1): swap})


def dvb1_tau(b: Bundle) -> Permutation:
    """
    The fiber flip (x, j) -> (x, 3 - j) on a dvb1 bundle.

    It commutes with (0 1)(2 3), hence preserves every cross edge.

    Raises:
        InvalidParameterError: If the fiber is not Z_4
        InternalConsistencyError: If the map fails the edge scan
    """
    if b.fiber_size != 4 or not b.fiber.same_edges(cycle_graph(4)):
        raise InvalidParameterError("tau is defined on bundles with fiber Z_4")
    tau = Permutation(tuple(b.flat(x, 3 - j) for x in range(b.base.n) for j in range(4)))
    if not tau.is_automorphism_of(b.total):
        raise InternalConsistencyError("tau does not preserve adjacency")
    return tau


def make_eg2(n: int, m: int) -> Connection:
    """Z_n with fiber K_m; the edge 0 -> 1 carries the cycle (1 2 ... m-1) fixing 0."""
    if n < 3 or m < 3:
        raise InvalidParameterError(f"eg2 needs n, m >= 3, got n={n}, m={m}")
    twist = Permutation.from_cycles(m, [tuple(range(1, m))])
    return Connection.from_assignments(cycle_graph(n), complete_graph(m), {(0, 1): twist})


def eg3_fiber_size(i: int) -> int:
    return i * (i + 1) // 2


def make_eg3(n: int, i: int) -> Connection:
    """
    Z_n with fiber K_{i(i+1)/2}; the edge 0 -> 1 carries disjoint cycles of
    lengths 2, 3, ..., i on the vertices 1..m-1, e.g. (1 2)(3 4 5)(6 7 8 9).
    """
    if n < 5 or i < 2:
        raise InvalidParameterError(f"eg3 needs n >= 5 and i >= 2, got n={n}, i={i}")
    m = eg3_fiber_size(i)
    cycles = []
    start = 1
    for length in range(2, i + 1):
        cycles.append(tuple(range(start, start + length)))
        start += length
    twist = Permutation.from_cycles(m, cycles)
    return Connection.from_assignments(cycle_graph(n), complete_graph(m), {(0, 1): twist})


def make_dvb2_torus(N: int) -> Connection:
    """
    Triangular torus Z/N x Z/N with fiber K_2, swapping the fiber on every diagonal edge.

    Holonomy is the swap raised to the number of diagonal steps, so triangles
    are unbalanced and every 4-loop is balanced. Only even N >= 4 is accepted.
    """
    if N < 4 or N % 2:
        raise InvalidParameterError(f"dvb2 torus needs an even N >= 4, got {N}")
    orders = [N, N]
    base = cayley_graph(orders, [(1, 0), (0, 1), (1, 1)])
    swap = Permutation.from_cycles(2, [(0, 1)])
    assignments = {}
    for a in range(N):
        for b in range(N):
            tail = element_index(orders, (a, b))
            head = element_index(orders, (a + 1, b + 1))
            assignments[(tail, head)] = swap
    return Connection.from_assignments(base, complete_graph(2), assignments)


def make_product(n: int = 5, m: int = 3) -> Connection:
    """Identity connection on Z_n x K_m."""
    return identity_connection(cycle_graph(n), complete_graph(m))


def dvb2_cayley_target(N: int):
    """Cayley graph of Z/N x Z/N x Z/2 with generators +-(1,0,0), +-(0,1,0), +-(1,1,1), (0,0,1)."""
    return cayley_graph([N, N, 2], [(1, 0, 0), (0, 1, 0), (1, 1, 1), (0, 0, 1)])


@dataclass
class ExampleSpec:
    """A named example, its parameters and the properties expected of it."""

    name: str
    params: Dict[str, int]
    expected: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in EXAMPLE_NAMES:
            raise InvalidParameterError(f"Unknown example {self.name!r}; choose from {', '.join(EXAMPLE_NAMES)}")

    @property
    def slug(self) -> str:
        return "_".join([self.name.replace("-", "_")] + [str(v) for v in self.params.values()])

    def build(self) -> Connection:
        p = self.params
        if self.name == "dvb1":
            return make_dvb1(p["n"])
        if self.name == "eg2":
            return make_eg2(p["n"], p["m"])
        if self.name == "eg3":
            return make_eg3(p["n"], p["i"])
        if self.name == "dvb2-torus":
            return make_dvb2_torus(p["N"])
        return make_product(p.get("n", 5), p.get("m", 3))

    def property_card(self) -> Dict[str, object]:
        return {"example": self.name, "params": dict(self.params), "expected": dict(self.expected)}


def catalog() -> List[ExampleSpec]:
    """Every example with the properties asserted for it; None means not asserted."""
    return [
        ExampleSpec("eg2", {"n": 4, "m": 4}, {"trivial": False, "dvb": True, "transitive": False, "orbits": 2,
                                             "four_loop_balanced": False}),
        ExampleSpec("eg2", {"n": 5, "m": 3}, {"trivial": False, "dvb": True, "transitive": False, "orbits": 2,
                                             "four_loop_balanced": True, "s_ricci_flat": True}),
        ExampleSpec("eg2", {"n": 5, "m": 4}, {"trivial": False, "dvb": True, "transitive": False, "orbits": 2,
                                             "four_loop_balanced": True, "s_ricci_flat": True}),
        ExampleSpec("eg3", {"n": 5, "i": 2}, {"trivial": False, "dvb": True, "transitive": False, "orbits": 2}),
        ExampleSpec("eg3", {"n": 5, "i": 3}, {"trivial": False, "dvb": True, "transitive": False, "orbits": 3,
                                             "four_loop_balanced": True, "s_ricci_flat": True}),
        ExampleSpec("eg3", {"n": 6, "i": 3}, {"trivial": False, "dvb": True, "transitive": False, "orbits": 3}),
        ExampleSpec("dvb1", {"n": 5}, {"trivial": False, "dvb": False, "transitive": True, "orbits": 1}),
        ExampleSpec("dvb2-torus", {"N": 4}, {"trivial": False, "dvb": False, "transitive": True, "orbits": 1,
                                            "four_loop_balanced": True, "s_ricci_flat": True}),
        ExampleSpec("product", {"n": 5, "m": 3}, {"trivial": True, "dvb": True, "transitive": True, "orbits": 1,
                                                 "s_ricci_flat": True}),
    ]


def find_example(name: str, params: Dict[str, int]) -> ExampleSpec:
    """Catalog entry with these parameters, or a bare entry without expectations."""
    for entry in catalog():
        if entry.name == name and entry.params == params:
            return entry
    return ExampleSpec(name, params)


def required_params(name: str) -> List[str]:
    return {"dvb1": ["n"], "eg2": ["n", "m"], "eg3": ["n", "i"], "dvb2-torus": ["N"], "product": ["n", "m"]}[name]


def example_params(name: str, n: Optional[int], m: Optional[int], i: Optional[int], N: Optional[int]) -> Dict[str, int]:
    supplied = {"n": n, "m": m, "i": i, "N": N}
    params = {}
    for key in required_params(name):
        if supplied[key] is None:
            raise InvalidParameterError(f"Example {name} needs --{key}")
        params[key] = supplied[key]
    return params
