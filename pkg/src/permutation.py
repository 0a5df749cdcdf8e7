"""Permutations of dense vertex indices."""

from dataclasses import dataclass
from math import lcm
from typing import Iterable, List, Sequence, Tuple

from src.errors import InvalidParameterError


@dataclass(frozen=True)
class Permutation:
    """Bijection on 0..n-1 stored as an image array: image[v] = sigma(v)."""

    image: Tuple[int, ...]

    def __post_init__(self):
        image = tuple(int(v) for v in self.image)
        if sorted(image) != list(range(len(image))):
            raise InvalidParameterError(f"Not a bijection on 0..{len(image) - 1}: {list(image)}")
        object.__setattr__(self, "image", image)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    @classmethod
    def from_cycles(cls, n: int, cycles: Iterable[Sequence[int]]) -> "Permutation":
        """
        Build a permutation from disjoint cycles.

        A cycle (a b c) maps a -> b -> c -> a, matching the usual cycle notation.

        Args:
            n: Size of the underlying set
            cycles: Disjoint cycles of indices

        Returns:
            The permutation fixing every index outside the cycles
        """
        image = list(range(n))
        seen = set()
        for cycle in cycles:
            for k, v in enumerate(cycle):
                if v in seen or not 0 <= v < n:
                    raise InvalidParameterError(f"Invalid or repeated index {v} in cycles")
                seen.add(v)
                image[v] = cycle[(k + 1) % len(cycle)]
        return cls(tuple(image))

    def __len__(self) -> int:
        return len(self.image)

    def __call__(self, v: int) -> int:
        return self.image[v]

    def compose(self, other: "Permutation") -> "Permutation":
        """Return self o other, i.e. v -> self(other(v))."""
        return Permutation(tuple(self.image[w] for w in other.image))

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.image)
        for v, w in enumerate(self.image):
            inv[w] = v
        return Permutation(tuple(inv))

    def is_identity(self) -> bool:
        return all(v == w for v, w in enumerate(self.image))

    def fixed_points(self) -> List[int]:
        return [v for v, w in enumerate(self.image) if v == w]

    def moved_points(self) -> List[int]:
        return [v for v, w in enumerate(self.image) if v != w]

    def cycles(self) -> List[Tuple[int, ...]]:
        """Non-trivial cycles, each starting at its smallest element."""
        seen = set()
        result = []
        for start in range(len(self.image)):
            if start in seen or self.image[start] == start:
                continue
            cycle = [start]
            seen.add(start)
            v = self.image[start]
            while v != start:
                cycle.append(v)
                seen.add(v)
                v = self.image[v]
            result.append(tuple(cycle))
        return result

    def order(self) -> int:
        return lcm(1, *(len(c) for c in self.cycles()))

    def power(self, k: int) -> "Permutation":
        result = Permutation.identity(len(self.image))
        base = self if k >= 0 else self.inverse()
        for _ in range(abs(k)):
            result = base.compose(result)
        return result

    def is_automorphism_of(self, graph) -> bool:
        """
        Check edge preservation by a full scan: u~v iff sigma(u)~sigma(v).

        For a finite simple graph, mapping every edge onto an edge is enough,
        since sigma is a bijection and the edge counts agree.
        """
        if len(self.image) != graph.n:
            return False
        return all(graph.has_edge(self.image[u], self.image[v]) for u, v in graph.edges())

    def __str__(self) -> str:
        cycles = self.cycles()
        if not cycles:
            return "id"
        return "".join("(" + " ".join(str(v) for v in c) + ")" for c in cycles)
