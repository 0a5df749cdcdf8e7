"""Text formats for graphs and connections, and the JSON report envelope."""

import hashlib
import json
import logging
from pathlib import Path as FilePath
from typing import Dict, List, Optional, Tuple

from src import __version__
from src.bundle import Connection
from src.errors import BundleToolkitError, FormatError
from src.graph import Graph
from src.permutation import Permutation

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


def dump_graph(g: Graph) -> str:
    """
    Serialize as `n <count>`, then `e <u> <v>` per edge, then `label <v> <text>`.

    Labels are written only when the graph carries them.
    """
    lines = [f"n {g.n}"]
    lines.extend(f"e {u} {v}" for u, v in g.edges())
    if g.labels is not None:
        lines.extend(f"label {v} {g.labels[v]}" for v in range(g.n))
    return "\n".join(lines) + "\n"


def parse_graph(text: str, source: str = "<string>") -> Graph:
    """
    Parse the graph text format; blank lines and `#` comments are ignored.

    Raises:
        FormatError: On unknown directives, malformed numbers or a missing header
    """
    n: Optional[int] = None
    edges: List[Tuple[int, int]] = []
    labels: Dict[int, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("label"):
            parts = line.split(maxsplit=2)
        else:
            parts = line.split("#", 1)[0].split()
        if not parts:
            continue
        try:
            if parts[0] == "n" and len(parts) == 2:
                n = int(parts[1])
            elif parts[0] == "e" and len(parts) == 3:
                edges.append((int(parts[1]), int(parts[2])))
            elif parts[0] == "label" and len(parts) == 3:
                labels[int(parts[1])] = parts[2]
            else:
                raise FormatError(f"{source}:{lineno}: cannot parse {raw!r}")
        except ValueError:
            raise FormatError(f"{source}:{lineno}: expected integers in {raw!r}")
    if n is None:
        raise FormatError(f"{source}: missing 'n <count>' header")
    label_list = None
    if labels:
        if sorted(labels) != list(range(n)):
            raise FormatError(f"{source}: labels must cover every vertex or none")
        label_list = [labels[v] for v in range(n)]
    try:
        return Graph.from_edges(n, edges, label_list)
    except BundleToolkitError as e:
        raise FormatError(f"{source}: {e}")


def load_graph(path: str) -> Graph:
    try:
        text = FilePath(path).read_text()
    except OSError as e:
        raise FormatError(f"Cannot read graph file {path}: {e}")
    return parse_graph(text, source=path)


def save_graph(path: str, g: Graph) -> None:
    FilePath(path).parent.mkdir(parents=True, exist_ok=True)
    FilePath(path).write_text(dump_graph(g))
    logger.debug(f"Wrote graph with {g.n} vertices to {path}")


def dump_connection(c: Connection, base_ref: str, fiber_ref: str) -> str:
    """Connection file: `base <file>`, `fiber <file>`, then `phi <x> <y> <image...>` per non-identity edge."""
    lines = [f"base {base_ref}", f"fiber {fiber_ref}"]
    for (x, y), perm in c.non_identity_edges():
        lines.append(f"phi {x} {y} " + " ".join(str(v) for v in perm.image))
    return "\n".join(lines) + "\n"


def parse_connection(text: str, base: Graph, fiber: Graph, source: str = "<string>") -> Connection:
    """
    Parse `phi` lines against already loaded graphs; `base`/`fiber` lines are skipped.

    `phi x y images...` gives the transport from the fiber over x to the fiber
    over y. Unlisted edges carry the identity.
    """
    assignments: Dict[Tuple[int, int], Permutation] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line or line.split()[0] in ("base", "fiber"):
            continue
        parts = line.split()
        if parts[0] != "phi" or len(parts) < 3:
            raise FormatError(f"{source}:{lineno}: cannot parse {raw!r}")
        try:
            x, y = int(parts[1]), int(parts[2])
            image = tuple(int(v) for v in parts[3:])
            assignments[(x, y)] = Permutation(image)
        except ValueError:
            raise FormatError(f"{source}:{lineno}: expected integers in {raw!r}")
        except BundleToolkitError as e:
            raise FormatError(f"{source}:{lineno}: {e}")
    return Connection.from_assignments(base, fiber, assignments)


def connection_refs(text: str, source: str = "<string>") -> Tuple[str, str]:
    refs = {}
    for raw in text.splitlines():
        parts = raw.split("#", 1)[0].split()
        if len(parts) == 2 and parts[0] in ("base", "fiber"):
            refs[parts[0]] = parts[1]
    if set(refs) != {"base", "fiber"}:
        raise FormatError(f"{source}: connection file must name a base and a fiber graph file")
    return refs["base"], refs["fiber"]


def load_connection(path: str) -> Connection:
    """Load a connection file; graph references are resolved relative to it."""
    file_path = FilePath(path)
    try:
        text = file_path.read_text()
    except OSError as e:
        raise FormatError(f"Cannot read connection file {path}: {e}")
    base_ref, fiber_ref = connection_refs(text, source=path)
    base = load_graph(str(file_path.parent / base_ref))
    fiber = load_graph(str(file_path.parent / fiber_ref))
    return parse_connection(text, base, fiber, source=path)


def save_connection(path: str, c: Connection, base_ref: str, fiber_ref: str) -> None:
    """Write the connection and its two graph files next to it."""
    file_path = FilePath(path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    save_graph(str(file_path.parent / base_ref), c.base)
    save_graph(str(file_path.parent / fiber_ref), c.fiber)
    file_path.write_text(dump_connection(c, base_ref, fiber_ref))


def digest_files(paths: List[str]) -> Dict[str, str]:
    """SHA-256 of each input file, keyed by the path as given."""
    digests = {}
    for path in paths:
        try:
            digests[path] = hashlib.sha256(FilePath(path).read_bytes()).hexdigest()
        except OSError as e:
            raise FormatError(f"Cannot read {path}: {e}")
    return digests


def build_report(command: List[str], inputs: Dict[str, str], results: Dict[str, object],
                 duration: Optional[float] = None) -> Dict[str, object]:
    return {
        "schema": SCHEMA_VERSION,
        "version": __version__,
        "command": command,
        "inputs": inputs,
        "results": results,
        "duration_seconds": round(duration, 3) if duration is not None else None,
    }


def to_json(data: Dict[str, object]) -> str:
    """Deterministic JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(data, sort_keys=True, indent=2) + "\n"
