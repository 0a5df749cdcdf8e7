"""DOT and plain-text rendering through jinja2 templates."""

import re
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from jinja2 import Environment, FileSystemLoader, StrictUndefined

from src.graph import Graph

TEMPLATE_DIR = Path(__file__).parent / "templates"

_env = Environment(
    loader=FileSystemLoader(str(TEMPLATE_DIR)),
    autoescape=False,
    undefined=StrictUndefined,
)


def _dot_name(name: str) -> str:
    cleaned = re.sub(r"\W", "_", name)
    return cleaned if cleaned and not cleaned[0].isdigit() else f"G_{cleaned}"


def render_dot(g: Graph, name: str = "G", groups: Optional[Sequence[int]] = None) -> str:
    """
    Deterministic DOT: nodes in index order, edges (u < v) sorted.

    Args:
        g: Graph to render
        name: Graph name, sanitized into a DOT identifier
        groups: Optional group id per vertex (e.g. the base coordinate of a bundle vertex)
    """
    nodes = [
        {"id": v, "label": g.label(v).replace('"', '\\"'), "group": groups[v] if groups is not None else None}
        for v in range(g.n)
    ]
    return _env.get_template("graph.dot.j2").render(name=_dot_name(name), nodes=nodes, edges=g.edges()) + "\n"


def render_summary(title: str, checks: List[Tuple[str, Dict[str, object]]]) -> str:
    """Plain-text table of check outcomes; each outcome carries `status` and optional `detail`."""
    rows = [(name, {"status": outcome.get("status", "?"), "detail": outcome.get("detail") or ""}) for name, outcome in checks]
    passed = sum(1 for _, outcome in rows if outcome["status"] == "pass")
    return _env.get_template("summary.txt.j2").render(title=title, checks=rows, passed=passed) + "\n"
