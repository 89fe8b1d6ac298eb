"""
subtree-bounds - command-line entry point

Exact inference on junction trees, sub-tree lower-bound catalogs, the
inequality verification suite and the instance generator.
"""

import argparse
import asyncio
import logging
import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .bounds.catalog import (
    CatalogEntry,
    EnumerationMode,
    SelectionStrategy,
    SubtreeCatalog,
    build_catalog,
    greedy_min_entropy,
)
from .bounds.lower_bound import BoundCalculator
from .exceptions import (
    CapacityError,
    ConsistencyError,
    ContractError,
    InvalidModelError,
    ModelParseError,
    SubtreeBoundsError,
    VerificationError,
)
from .generators.families import FamilySpec, InstanceGenerator
from .inference.gdl import calibrate
from .inference.oracle import joint_distribution, kl_divergence, marginalize
from .model.io import ModelDocument, emit_problem, load_problem
from .model.junction import is_junction_tree, validate_junction_graph
from .model.models import InferenceProblem, JunctionGraph
from .utils.config import Config, load_config
from .utils.extended import ext_sum, format_ext
from .utils.reporting import format_table, to_json_line
from .verify.suite import SuiteConfig, run_suite

DEFAULT_CONFIG_PATH = "config/config.yaml"
EXIT_OK = 0
EXIT_USAGE = 2
AGREEMENT_TOL = 1e-9


def setup_logging(log_file: Optional[str], log_level: str) -> None:
    """Configure logging; console output goes to stderr so reports stay on stdout."""
    level = getattr(logging, log_level.upper(), logging.INFO)

    # Create formatters
    file_formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    console_formatter = logging.Formatter(
        '%(asctime)s - %(levelname)s - %(message)s'
    )

    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    for handler in list(root_logger.handlers):
        root_logger.removeHandler(handler)

    # Console handler
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)
    console_handler.setFormatter(console_formatter)
    root_logger.addHandler(console_handler)

    # File handler
    if log_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(level)
        file_handler.setFormatter(file_formatter)
        root_logger.addHandler(file_handler)


logger = logging.getLogger(__name__)


@dataclass
class RunConfig:
    """Resolved settings of one CLI invocation."""
    command: str
    config: Config
    model_path: Optional[str] = None
    families: List[str] = field(default_factory=list)
    seed: Optional[int] = None
    seeds: Optional[int] = None
    tol: float = 1e-8
    max_states: int = 2 ** 22
    mode: EnumerationMode = EnumerationMode.SPANNING
    strategy: SelectionStrategy = SelectionStrategy.EXHAUSTIVE
    out: Optional[str] = None
    fmt: str = "structured"
    allow_zeros: bool = False
    inject_fault: bool = False

    def __post_init__(self):
        if self.seed is not None and not 0 <= self.seed < 2 ** 64:
            raise ValueError("Seed must be an unsigned 64-bit integer")
        if self.max_states < 1:
            raise ValueError("--max-states must be positive")
        if self.tol < 0:
            raise ValueError("--tol must be non-negative")
        if self.seeds is not None and self.seeds < 0:
            raise ValueError("--seeds must be non-negative")


def _require_graph_valid(problem: InferenceProblem, graph: JunctionGraph) -> None:
    result = validate_junction_graph(problem, graph)
    if not result:
        details = "; ".join(str(violation) for violation in result.violations)
        raise InvalidModelError(f"Invalid junction graph: {details}")


def _require_graph(document: ModelDocument) -> JunctionGraph:
    if document.graph is None:
        raise ContractError("This command needs a model file with 'edges' (a junction graph)")
    _require_graph_valid(document.problem, document.graph)
    return document.graph


def _tree_marginals(problem: InferenceProblem, graph: JunctionGraph) -> Dict[int, np.ndarray]:
    beliefs = calibrate(problem, graph)
    marginals = {}
    for variable in range(problem.num_vars):
        vertex = next(v for v in graph.vertex_ids if variable in graph.label(v))
        label = graph.label(vertex)
        axes = tuple(i for i, var in enumerate(label) if var != variable)
        marginals[variable] = beliefs.vertex_beliefs[vertex].sum(axis=axes)
    return marginals


def cmd_solve(run: RunConfig) -> Dict[str, Any]:
    """ln Z by enumeration and, on a junction tree, by message passing; single-variable marginals."""
    document = load_problem(run.model_path)
    problem, graph = document.problem, document.graph
    if graph is not None and document.edges_given:
        _require_graph_valid(problem, graph)
    tree = (
        graph is not None
        and bool(validate_junction_graph(problem, graph))
        and is_junction_tree(graph)
    )

    log_z_oracle = None
    marginals: Optional[Dict[int, np.ndarray]] = None
    try:
        dist = joint_distribution(problem, run.max_states)
        log_z_oracle = dist.log_norm
        marginals = {v: marginalize(dist, [v]) for v in range(problem.num_vars)}
    except CapacityError as e:
        if not tree:
            raise
        logger.warning(f"Enumeration skipped: {e}")

    log_z_tree = None
    if tree:
        log_z_tree = calibrate(problem, graph).log_partition
        if marginals is None:
            marginals = _tree_marginals(problem, graph)
        if log_z_oracle is not None:
            gap = abs(log_z_tree - log_z_oracle)
            if gap > AGREEMENT_TOL * max(1.0, abs(log_z_oracle)):
                raise ConsistencyError(
                    f"ln Z routes disagree: enumeration {log_z_oracle!r}, message passing {log_z_tree!r}"
                )

    return {
        "model": problem.name,
        "num_vars": problem.num_vars,
        "num_kernels": problem.num_kernels,
        "states": problem.state_count(),
        "junction_tree": tree,
        "log_Z_oracle": log_z_oracle,
        "log_Z_tree": log_z_tree,
        "marginals": {v: marginals[v].tolist() for v in sorted(marginals)},
    }


def render_solve(report: Dict[str, Any], fmt: str) -> str:
    if fmt == "structured":
        head = {k: v for k, v in report.items() if k != "marginals"}
        lines = [to_json_line({"record": "solve", **head})]
        lines += [
            to_json_line({"record": "marginal", "variable": v, "probs": probs})
            for v, probs in report["marginals"].items()
        ]
        return "\n".join(lines)

    tree_route = (
        format_ext(report["log_Z_tree"], 12) if report["junction_tree"]
        else "not applicable (junction graph is not a tree)"
    )
    lines = [
        f"model: {report['model']} ({report['num_vars']} variables, "
        f"{report['num_kernels']} kernels, {report['states']} states)",
        f"ln Z (enumeration):      {format_ext(report['log_Z_oracle'], 12)}",
        f"ln Z (message passing):  {tree_route}",
        "",
        format_table(
            ["variable", "marginal"],
            [[v, " ".join(f"{p:.6f}" for p in probs)] for v, probs in report["marginals"].items()],
        ),
    ]
    return "\n".join(lines)


def _row(rank: int, entry: CatalogEntry, catalog: SubtreeCatalog, index: int) -> Dict[str, Any]:
    flags = []
    if index == catalog.min_entropy_index:
        flags.append("q_S")
    if index == catalog.best_bound_index:
        flags.append("q_B")
    return {
        "record": "subtree",
        "rank": rank,
        "subtree": entry.subtree.identifier,
        "kernels": list(entry.subtree.kernel_subset),
        "entropy": entry.entropy,
        "log_Z_T": entry.log_Z_T,
        "excluded_term": entry.report.excluded_term,
        "lower_bound": entry.lower_bound,
        "flags": flags,
    }


def cmd_bounds(run: RunConfig) -> Dict[str, Any]:
    """Sub-tree catalog sorted by L, the q_S / q_B flags, the guarantee and the pair divergence."""
    document = load_problem(run.model_path)
    problem = document.problem
    graph = _require_graph(document)
    settings = run.config.enumeration

    calculator = BoundCalculator(problem, run.max_states, route=run.config.solver.route)
    catalog = build_catalog(
        problem,
        graph,
        run.mode,
        min_vertices=settings.min_vertices,
        max_vertices=settings.max_vertices,
        max_combinations=settings.max_combinations,
        calculator=calculator,
    )
    if not catalog.entries:
        raise ContractError("No sub-trees in the enumerated family")

    rows = [
        _row(rank, entry, catalog, index)
        for rank, (index, entry) in enumerate(catalog.by_bound(), start=1)
    ]

    source, best = catalog.min_entropy.subtree, catalog.best_bound.subtree
    q_s = calculator.tree_distribution(source)
    self_gap = kl_divergence(q_s, calculator.complement(source))
    guarantee = {
        "record": "guarantee",
        "q_S": source.identifier,
        "q_B": best.identifier,
        "lower_bound_S": catalog.min_entropy.lower_bound,
        "divergence_S_complement": self_gap,
        "guarantee": ext_sum([catalog.min_entropy.lower_bound, self_gap], indeterminate=math.inf),
        "divergence_B_S": kl_divergence(calculator.tree_distribution(best), q_s),
    }

    greedy = None
    if run.strategy == SelectionStrategy.GREEDY:
        floor = settings.min_vertices
        if run.mode == EnumerationMode.SPANNING:
            floor = len(catalog.entries[0].subtree.vertex_subset)
        subtree, entropy = greedy_min_entropy(problem, graph, min_vertices=floor)
        report = calculator.report(subtree)
        greedy = {
            "record": "greedy",
            "subtree": subtree.identifier,
            "entropy": entropy,
            "lower_bound": report.lower_bound,
            "entropy_gap_to_family_min": entropy - catalog.min_entropy.entropy,
        }

    log_z = None
    try:
        log_z = calculator.log_partition()
    except CapacityError as e:
        logger.info(f"ln Z not enumerated: {e}")

    return {
        "header": {
            "record": "bounds",
            "model": problem.name,
            "family": run.mode.value,
            "entries": len(catalog.entries),
            "log_Z": log_z,
        },
        "rows": rows,
        "guarantee": guarantee,
        "greedy": greedy,
    }


def render_bounds(report: Dict[str, Any], fmt: str) -> str:
    if fmt == "structured":
        records = [report["header"], *report["rows"], report["guarantee"]]
        if report["greedy"] is not None:
            records.append(report["greedy"])
        return "\n".join(to_json_line(record) for record in records)

    header, guarantee = report["header"], report["guarantee"]
    table = format_table(
        ["rank", "subtree", "H(q_T)", "ln Z_T", "excluded", "L", "flags"],
        [
            [
                row["rank"],
                row["subtree"],
                format_ext(row["entropy"], 6),
                format_ext(row["log_Z_T"], 6),
                format_ext(row["excluded_term"], 6),
                format_ext(row["lower_bound"], 6)
                + (" (kernel zero hit)" if row["lower_bound"] == -math.inf else ""),
                ",".join(row["flags"]),
            ]
            for row in report["rows"]
        ],
    )
    lines = [
        f"model: {header['model']}  family: {header['family']}  sub-trees: {header['entries']}",
        f"ln Z: {format_ext(header['log_Z'], 6)}",
        "",
        table,
        "",
        f"guarantee L_S + D(q_S||q̄_S) = {format_ext(guarantee['guarantee'], 6)} "
        f"(q_S = {guarantee['q_S']}, D(q_S||q̄_S) = {format_ext(guarantee['divergence_S_complement'], 6)})",
        f"D(q_B||q_S) = {format_ext(guarantee['divergence_B_S'], 6)} (q_B = {guarantee['q_B']})",
    ]
    if report["greedy"] is not None:
        greedy = report["greedy"]
        lines.append(
            f"greedy: {greedy['subtree']} H = {format_ext(greedy['entropy'], 6)} "
            f"L = {format_ext(greedy['lower_bound'], 6)} "
            f"(H gap to family minimum {format_ext(greedy['entropy_gap_to_family_min'], 6)})"
        )
    return "\n".join(lines)


def cmd_verify(run: RunConfig) -> Tuple[str, bool]:
    """Run the verification suite; returns the rendered report and whether it passed."""
    document = load_problem(run.model_path) if run.model_path else None
    config = run.config
    start = run.seed if run.seed is not None else config.suite.start_seed
    count = run.seeds if run.seeds is not None else config.suite.seeds
    generator = config.generator
    if run.allow_zeros:
        generator = replace(generator, allow_zeros=True)

    suite_config = SuiteConfig.from_config(
        config,
        families=run.families or None,
        seeds=list(range(start, start + count)),
        tol=run.tol,
        max_states=run.max_states,
        mode=run.mode,
        inject_fault=run.inject_fault,
        generator=generator,
    )
    report = asyncio.run(run_suite(suite_config, document))
    if run.fmt == "structured":
        return "\n".join(report.structured_lines()), report.ok
    return report.human_table(), report.ok


def cmd_gen(run: RunConfig) -> str:
    """Emit a generated model file (with its junction graph)."""
    if len(run.families) != 1:
        raise ValueError("gen needs exactly one --family")
    generator_config = run.config.generator
    if run.allow_zeros:
        generator_config = replace(generator_config, allow_zeros=True)
    seed = run.seed if run.seed is not None else 0
    document = InstanceGenerator(generator_config).generate(run.families[0], seed)
    _require_graph_valid(document.problem, document.graph)
    return emit_problem(document.problem, document.graph, document.metadata)


def _emit(text: str, out: Optional[str]) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
        logger.info(f"Report written to {out}")
    else:
        sys.stdout.write(text)


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", default=None, help=f"Configuration file (default: {DEFAULT_CONFIG_PATH} if present)")
    common.add_argument("--seed", type=int, default=None, help="Seed (unsigned 64-bit)")
    common.add_argument("--tol", type=float, default=None, help="Inequality tolerance in nats")
    common.add_argument("--max-states", type=int, default=None, help="Cap on the joint state space")
    common.add_argument("--out", default=None, help="Write the report to this path instead of stdout")
    common.add_argument("--format", dest="fmt", choices=["structured", "human"], default="structured")
    common.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="subtree-bounds",
        description="Junction-tree inference and sub-tree lower bounds on the log-partition function"
    )
    parser.add_argument("--version", action="version", version=f"subtree-bounds {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve", parents=[common], help="Exact ln Z and marginals of a model file")
    solve.add_argument("--model", required=True, help="Model file")

    bounds = commands.add_parser("bounds", parents=[common], help="Sub-tree lower-bound catalog")
    bounds.add_argument("--model", required=True, help="Model file with a junction graph")
    bounds.add_argument("--enumerate", dest="mode", choices=["spanning", "exhaustive"], default=None)
    bounds.add_argument("--strategy", choices=["exhaustive", "greedy"], default=None)

    verify = commands.add_parser("verify", parents=[common], help="Run the inequality verification suite")
    verify.add_argument("--model", default=None, help="Also check this model file")
    verify.add_argument("--family", action="append", default=[], help="Family such as grid(3,3); repeatable")
    verify.add_argument("--seeds", type=int, default=None, help="Number of seeds per family")
    verify.add_argument("--enumerate", dest="mode", choices=["spanning", "exhaustive"], default=None)
    verify.add_argument("--allow-zeros", action="store_true")
    verify.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)

    gen = commands.add_parser("gen", parents=[common], help="Generate a model file")
    gen.add_argument("--family", action="append", default=[], required=True, help="grid(m,n), cycle(k) or random_junction(M,max_label)")
    gen.add_argument("--allow-zeros", action="store_true")
    return parser


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """
    Merge command-line flags over the configuration file.

    Raises:
        FileNotFoundError: If an explicit configuration file doesn't exist
        ValueError: If a setting is invalid
    """
    config_path = args.config
    if config_path is None and Path(DEFAULT_CONFIG_PATH).exists():
        config_path = DEFAULT_CONFIG_PATH
    config = load_config(config_path)

    families = list(getattr(args, "family", []) or [])
    for family in families:
        FamilySpec.parse(family)

    return RunConfig(
        command=args.command,
        config=config,
        model_path=getattr(args, "model", None),
        families=families,
        seed=args.seed,
        seeds=getattr(args, "seeds", None),
        tol=args.tol if args.tol is not None else config.solver.tol,
        max_states=args.max_states if args.max_states is not None else config.solver.max_states,
        mode=EnumerationMode(getattr(args, "mode", None) or config.enumeration.mode),
        strategy=SelectionStrategy(getattr(args, "strategy", None) or config.enumeration.strategy),
        out=args.out,
        fmt=args.fmt,
        allow_zeros=getattr(args, "allow_zeros", False) or config.generator.allow_zeros,
        inject_fault=getattr(args, "inject_fault", False),
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command; returns the process exit code."""
    args = build_parser().parse_args(argv)

    try:
        run = build_run_config(args)
    except FileNotFoundError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        return EXIT_USAGE

    setup_logging(run.config.logging.log_file, args.log_level or run.config.logging.log_level)

    try:
        if run.command == "solve":
            _emit(render_solve(cmd_solve(run), run.fmt), run.out)
        elif run.command == "bounds":
            _emit(render_bounds(cmd_bounds(run), run.fmt), run.out)
        elif run.command == "verify":
            text, passed = cmd_verify(run)
            _emit(text, run.out)
            if not passed:
                raise VerificationError("The verification suite reported violations")
        elif run.command == "gen":
            _emit(cmd_gen(run), run.out)
    except FileNotFoundError as e:
        logger.error(str(e))
        return ModelParseError.exit_code
    except ValueError as e:
        logger.error(f"Invalid arguments: {e}")
        return EXIT_USAGE
    except SubtreeBoundsError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except Exception as e:
        logger.exception(f"Fatal error: {e}")
        return 1
    return EXIT_OK


def run():
    """CLI entry point."""
    sys.exit(main())


if __name__ == "__main__":
    run()
