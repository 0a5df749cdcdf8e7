"""Command-line entry point for the graph bundle verifier."""

import argparse
import hashlib
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from src.bundle import Bundle, build_bundle, is_trivial, null_elements
from src.config import Config
from src.constructions import EXAMPLE_NAMES, example_params, find_example
from src.errors import (
    EXIT_INPUT_ERROR,
    EXIT_MISMATCH,
    EXIT_OK,
    EXIT_RESOURCE_CAP,
    BundleToolkitError,
    FormatError,
    HypothesisError,
    InvalidParameterError,
    ResourceLimitError,
)
from src.formats import (
    build_report,
    digest_files,
    load_connection,
    load_graph,
    save_connection,
    save_graph,
    to_json,
)
from src.graph import Graph
from src.permutation import Permutation
from src.render import render_dot, render_summary
from src.ricci import certify, check_4loop_balanced, theorem4_certificate
from src.storage import RunLedger
from src.symmetry import automorphism_group, orbit_certificate
from src.walks import closed_walk_count, closed_walk_counts, project_bundle, theorem2_separation, verify_lemmas

CHECK_NAMES = ("trivial", "dvb", "transitive", "orbits", "ricci", "s-ricci", "theorem2", "theorem4", "4loop")

# Property-card key compared against each check's value
EXPECTATION_KEYS = {
    "trivial": "trivial",
    "dvb": "dvb",
    "transitive": "transitive",
    "orbits": "orbits",
    "s-ricci": "s_ricci_flat",
    "4loop": "four_loop_balanced",
}

# Checks that only look at the total graph and may run on a relabeled copy
GRAPH_CHECKS = ("transitive", "orbits", "ricci", "s-ricci")

STATUS_BY_EXIT = {
    EXIT_OK: "success",
    EXIT_MISMATCH: "mismatch",
    EXIT_INPUT_ERROR: "error",
    EXIT_RESOURCE_CAP: "resource_cap",
}


def setup_logging(data_dir: str, level: str = "INFO") -> None:
    """Configure structured logging."""
    log_dir = Path(data_dir) / "logs"
    log_dir.mkdir(parents=True, exist_ok=True)

    log_file = log_dir / "app.log"

    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        handlers=[logging.FileHandler(log_file), logging.StreamHandler()],
    )


@dataclass
class CommandOutcome:
    """What a subcommand produced: exit code, text for stdout (or --out) and the files it read."""

    exit_code: int
    output: str
    inputs: List[str] = field(default_factory=list)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
        logging.getLogger(__name__).info(f"Wrote {out}")
    else:
        sys.stdout.write(text)


def _report(argv: List[str], inputs: List[str], results: Dict[str, object], started: float) -> str:
    return to_json(build_report(argv, digest_files(inputs), results, time.monotonic() - started))


def _parse_walk(text: str) -> List[int]:
    try:
        return [int(part) for part in text.replace(" ", "").split(",") if part]
    except ValueError:
        raise InvalidParameterError(f"Walk must be comma-separated vertex ids, got {text!r}")


def _load_card(conn_path: str, card_path: Optional[str]) -> Tuple[Optional[str], Dict[str, object]]:
    """Explicit --card, else a `<name>.card.json` next to the connection file."""
    path = Path(card_path) if card_path else Path(conn_path).with_suffix(".card.json")
    if not path.exists():
        if card_path:
            raise FormatError(f"Property card not found: {card_path}")
        return None, {}
    try:
        card = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise FormatError(f"Cannot parse property card {path}: {e}")
    return str(path), dict(card.get("expected", {}))


def _seeded_relabel(g: Graph, seed: int) -> Graph:
    order = np.random.default_rng(seed).permutation(g.n)
    return g.relabel(Permutation(tuple(int(v) for v in order)))


def _check_trivial(b: Bundle, graph: Graph, config: Config) -> Tuple[object, Dict[str, object]]:
    result = is_trivial(b.connection)
    return result.trivial, result.to_dict()


def _check_dvb(b: Bundle, graph: Graph, config: Config) -> Tuple[object, Dict[str, object]]:
    nulls = null_elements(b.connection)
    return bool(nulls), {"discrete_vector_bundle": bool(nulls), "null_elements": nulls}


def _check_transitive(b: Bundle, graph: Graph, config: Config) -> Tuple[object, Dict[str, object]]:
    group = automorphism_group(graph, config)
    transitive = group.orbits.count == 1
    return transitive, {"vertex_transitive": transitive, "group_order": group.order}


def _check_orbits(b: Bundle, graph: Graph, config: Config) -> Tuple[object, Dict[str, object]]:
    cert = orbit_certificate(graph, config)
    return cert.group.orbits.count, cert.to_dict()


def _check_ricci(b: Bundle, graph: Graph, config: Config) -> Tuple[object, Dict[str, object]]:
    cert = certify(graph, False, config)
    return cert.ricci_flat, cert.to_dict()


def _check_s_ricci(b: Bundle, graph: Graph, config: Config) -> Tuple[object, Dict[str, object]]:
    cert = certify(graph, True, config)
    return cert.s_ricci_flat, cert.to_dict()


def _check_theorem2(b: Bundle, graph: Graph, config: Config) -> Tuple[object, Dict[str, object]]:
    report = theorem2_separation(b, config)
    return report.not_isomorphic_to_product, report.to_dict()


def _check_theorem4(b: Bundle, graph: Graph, config: Config) -> Tuple[object, Dict[str, object]]:
    report = theorem4_certificate(b, config)
    return report.s_ricci_flat, report.to_dict()


def _check_4loop(b: Bundle, graph: Graph, config: Config) -> Tuple[object, Dict[str, object]]:
    result = check_4loop_balanced(b.connection)
    return result.balanced, result.to_dict()


CHECKS: Dict[str, Callable[[Bundle, Graph, Config], Tuple[object, Dict[str, object]]]] = {
    "trivial": _check_trivial,
    "dvb": _check_dvb,
    "transitive": _check_transitive,
    "orbits": _check_orbits,
    "ricci": _check_ricci,
    "s-ricci": _check_s_ricci,
    "theorem2": _check_theorem2,
    "theorem4": _check_theorem4,
    "4loop": _check_4loop,
}


def run_check(name: str, b: Bundle, graph: Graph, expected: Dict[str, object], config: Config) -> Dict[str, object]:
    """
    Run one named check and compare it with the property card.

    A failed theorem hypothesis is reported in the outcome; other toolkit
    errors propagate.
    """
    logger = logging.getLogger(__name__)
    outcome: Dict[str, object] = {"status": "pass"}
    try:
        value, payload = CHECKS[name](b, graph, config)
    except HypothesisError as e:
        logger.warning(f"Check {name}: {e}")
        return {
            "status": "hypothesis-failed",
            "detail": e.hypothesis,
            "result": {"hypothesis": e.hypothesis, "message": str(e), "witness": e.witness},
        }

    outcome["result"] = payload
    key = EXPECTATION_KEYS.get(name)
    if key is not None and expected.get(key) is not None:
        outcome["expected"] = expected[key]
        outcome["actual"] = value
        if value != expected[key]:
            outcome["status"] = "mismatch"
            outcome["detail"] = f"expected {key}={expected[key]}, got {value}"
            logger.error(f"Check {name}: {outcome['detail']}")
    return outcome


def cmd_example(args: argparse.Namespace, config: Config) -> CommandOutcome:
    """Build a named example and write its connection, graphs and property card."""
    logger = logging.getLogger(__name__)
    params = example_params(args.name, args.n, args.m, args.i, args.N)
    entry = find_example(args.name, params)
    c = entry.build()
    b = build_bundle(c)

    out_dir = Path(args.dir or Path(config.data_dir) / "examples")
    slug = entry.slug
    files = {
        "connection": out_dir / f"{slug}.conn",
        "base": out_dir / f"{slug}_base.graph",
        "fiber": out_dir / f"{slug}_fiber.graph",
        "bundle": out_dir / f"{slug}_bundle.graph",
        "card": out_dir / f"{slug}.card.json",
    }
    save_connection(str(files["connection"]), c, files["base"].name, files["fiber"].name)
    save_graph(str(files["bundle"]), b.total)
    card = entry.property_card()
    card["bundle"] = {"vertices": b.total.n, "edges": b.total.edge_count}
    files["card"].write_text(to_json(card))

    logger.info(f"Example {slug}: {b.total.n} vertices, {b.total.edge_count} edges in {out_dir}")
    results = {"example": slug, "card": card, "files": {k: str(v) for k, v in sorted(files.items())}}
    return CommandOutcome(EXIT_OK, to_json(results))


def cmd_check(args: argparse.Namespace, config: Config, argv: List[str]) -> CommandOutcome:
    """Run the selected checks on a connection file; exit 1 if any card expectation fails."""
    logger = logging.getLogger(__name__)
    started = time.monotonic()
    names = [n.strip() for n in args.checks.split(",") if n.strip()]
    unknown = [n for n in names if n not in CHECKS]
    if unknown or not names:
        raise InvalidParameterError(f"Unknown checks {unknown}; choose from {', '.join(CHECK_NAMES)}")

    b = build_bundle(load_connection(args.connection))
    card_path, expected = _load_card(args.connection, args.card)
    graph = _seeded_relabel(b.total, args.seed) if args.relabel else b.total
    logger.info(f"Checking {args.connection} ({b.total.n} vertices): {', '.join(names)}")

    def run(name: str) -> Dict[str, object]:
        target = graph if name in GRAPH_CHECKS else b.total
        return run_check(name, b, target, expected, config)

    if args.workers > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            outcomes = dict(zip(names, pool.map(run, names)))
    else:
        outcomes = {name: run(name) for name in names}

    mismatched = [name for name, o in outcomes.items() if o["status"] == "mismatch"]
    exit_code = EXIT_MISMATCH if mismatched else EXIT_OK
    inputs = [args.connection] + ([card_path] if card_path else [])

    if args.format == "text":
        rows = [(name, outcomes[name]) for name in names]
        return CommandOutcome(exit_code, render_summary(f"check {Path(args.connection).name}", rows), inputs)

    results = {
        "checks": outcomes,
        "expectations_met": not mismatched,
        "relabel_seed": args.seed if args.relabel else None,
    }
    return CommandOutcome(exit_code, _report(argv, inputs, results, started), inputs)


def cmd_count(args: argparse.Namespace, config: Config, argv: List[str]) -> CommandOutcome:
    """Exact closed-walk counts at one vertex, or at every vertex."""
    started = time.monotonic()
    if args.length > config.count_max_length:
        raise ResourceLimitError("count_max_length", config.count_max_length, args.length)
    g = load_graph(args.graph)
    results: Dict[str, object] = {"length": args.length}
    if args.vertex is None:
        results["counts"] = closed_walk_counts(g, args.length)
    else:
        if not 0 <= args.vertex < g.n:
            raise InvalidParameterError(f"Vertex {args.vertex} out of range for {g.n} vertices")
        results["vertex"] = args.vertex
        results["count"] = closed_walk_count(g, args.vertex, args.length)
    return CommandOutcome(EXIT_OK, _report(argv, [args.graph], results, started), [args.graph])


def cmd_project(args: argparse.Namespace, config: Config, argv: List[str]) -> CommandOutcome:
    """Base and fiber projections of a bundle walk given by flat vertex ids."""
    started = time.monotonic()
    b = build_bundle(load_connection(args.connection))
    walk = _parse_walk(args.walk)
    pair = project_bundle(b, walk)
    results = {"walk": walk, "labels": [b.total.label(u) for u in walk], **pair.to_dict()}
    return CommandOutcome(EXIT_OK, _report(argv, [args.connection], results, started), [args.connection])


def cmd_export_dot(args: argparse.Namespace, config: Config) -> CommandOutcome:
    """DOT for a graph file, or for the total graph of a connection file grouped by base vertex."""
    if args.path.endswith(".conn"):
        b = build_bundle(load_connection(args.path))
        groups = [b.project(u) for u in range(b.total.n)]
        text = render_dot(b.total, Path(args.path).stem, groups)
    else:
        text = render_dot(load_graph(args.path), Path(args.path).stem)
    return CommandOutcome(EXIT_OK, text, [args.path])


def cmd_verify_lemmas(args: argparse.Namespace, config: Config, argv: List[str]) -> CommandOutcome:
    """Projection-count sweep at one bundle vertex; exit 1 on any disagreement."""
    started = time.monotonic()
    if args.max_length > config.count_max_length:
        raise ResourceLimitError("count_max_length", config.count_max_length, args.max_length)
    b = build_bundle(load_connection(args.connection))
    if not 0 <= args.vertex < b.total.n:
        raise InvalidParameterError(f"Vertex {args.vertex} out of range for {b.total.n} vertices")
    report = verify_lemmas(b, args.vertex, args.max_length)
    exit_code = EXIT_OK if report.ok else EXIT_MISMATCH
    return CommandOutcome(exit_code, _report(argv, [args.connection], report.to_dict(), started), [args.connection])


def cmd_history(args: argparse.Namespace, config: Config) -> CommandOutcome:
    ledger = RunLedger(str(Path(config.data_dir) / "runs.db"))
    try:
        runs = ledger.recent_runs(args.limit)
    finally:
        ledger.close()
    return CommandOutcome(EXIT_OK, to_json({"runs": runs}))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Graph Bundle Verifier", allow_abbrev=False)
    parser.add_argument("--out", help="Write the report to this file instead of stdout")
    parser.add_argument("--no-ledger", action="store_true", help="Do not record this run in the run ledger")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("example", help="Build a named example bundle and write its files")
    p.add_argument("name", choices=EXAMPLE_NAMES)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--i", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--dir", help="Output directory (default: <data_dir>/examples)")

    p = sub.add_parser("check", help="Run verification pipelines on a connection file")
    p.add_argument("connection")
    p.add_argument("--checks", default="trivial,dvb,transitive,orbits", help=f"Comma list of {', '.join(CHECK_NAMES)}")
    p.add_argument("--card", help="Property card (default: <connection>.card.json when present)")
    p.add_argument("--workers", type=int, default=1, help="Run checks concurrently on this many threads")
    p.add_argument("--relabel", action="store_true", help="Run graph-only checks on a randomly relabeled copy")
    p.add_argument("--seed", type=int, default=0, help="Seed for --relabel")
    p.add_argument("--format", choices=["json", "text"], default="json")

    p = sub.add_parser("count", help="Exact closed-walk counts")
    p.add_argument("graph")
    p.add_argument("--vertex", type=int)
    p.add_argument("--length", type=int, required=True)

    p = sub.add_parser("project", help="Project a bundle walk to base and fiber")
    p.add_argument("connection")
    p.add_argument("--walk", required=True, help="Comma-separated flat vertex ids of the total graph")

    p = sub.add_parser("export-dot", help="Render a graph or connection file as DOT")
    p.add_argument("path")

    p = sub.add_parser("verify-lemmas", help="Compare projection counts against the binomial closed form")
    p.add_argument("connection")
    p.add_argument("--vertex", type=int, default=0)
    p.add_argument("--max-length", type=int, default=6)

    p = sub.add_parser("history", help="Show recent runs from the run ledger")
    p.add_argument("--limit", type=int, default=20)

    return parser


def _input_digest(paths: List[str]) -> Optional[str]:
    if not paths:
        return None
    try:
        digests = digest_files(paths)
    except FormatError:
        return None
    joined = "\n".join(f"{p}:{d}" for p, d in sorted(digests.items()))
    return hashlib.sha256(joined.encode()).hexdigest()


def dispatch(args: argparse.Namespace, config: Config, argv: List[str]) -> CommandOutcome:
    if args.command == "example":
        return cmd_example(args, config)
    elif args.command == "check":
        return cmd_check(args, config, argv)
    elif args.command == "count":
        return cmd_count(args, config, argv)
    elif args.command == "project":
        return cmd_project(args, config, argv)
    elif args.command == "export-dot":
        return cmd_export_dot(args, config)
    elif args.command == "verify-lemmas":
        return cmd_verify_lemmas(args, config, argv)
    return cmd_history(args, config)


def _command_argv(argv: List[str], args: argparse.Namespace) -> List[str]:
    """The subcommand and its own arguments, with the global options stripped."""
    rest = list(argv)
    while rest and rest[0] != args.command:
        token = rest.pop(0)
        if token == "--out":
            rest.pop(0)
    return rest or [args.command]


def main(
argv: Optional[List[str]] = None) -> int:
    """
    Main entry point.

    Returns:
        Exit code (0=success, 1=expectation mismatch, 2=input error, 3=resource cap)
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)

    # Load configuration
    config = Config.from_env()

    # Setup logging
    setup_logging(config.data_dir, config.log_level)
    logger = logging.getLogger(__name__)

    started = time.monotonic()
    inputs: List[str] = []
    error_message = None
    try:
        outcome = dispatch(args, config, argv)
        inputs = outcome.inputs
        _emit(outcome.output, args.out)
        exit_code = outcome.exit_code
    except BundleToolkitError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"ERROR: {e}", file=sys.stderr)
        exit_code = e.exit_code
        error_message = str(e)

    if config.ledger_enabled and not args.no_ledger and args.command != "history":
        ledger = RunLedger(str(Path(config.data_dir) / "runs.db"))
        try:
            ledger.log_run(
                " ".join(_command_argv(argv, args)),
                exit_code,
                STATUS_BY_EXIT.get(exit_code, "error"),
                input_digest=_input_digest(inputs),
                duration=time.monotonic() - started,
                error_message=error_message,
            )
        finally:
            ledger.close()

    return exit_code


if __name__ == "__main__":
    try:
        sys.exit(main())
    except SystemExit as e:
        sys.exit(e.code if hasattr(e, "code") else 1)
    except KeyboardInterrupt:
        print("\nInterrupted by user")
        sys.exit(1)
    except Exception as e:
        logging.error(f"Fatal error: {e}", exc_info=True)
        sys.exit(1)
