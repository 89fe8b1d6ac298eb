"""Verification suite: every inequality over generated instance families."""

import asyncio
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from ..bounds.catalog import (
    DEFAULT_MAX_COMBINATIONS,
    DEFAULT_MAX_VERTICES,
    EnumerationMode,
    catalog_from_subtrees,
    enumerate_subtrees,
    partition_pairs,
)
from ..bounds.lower_bound import BoundCalculator
from ..exceptions import ContractError, InvalidModelError, SubtreeBoundsError
from ..generators.families import FamilySpec, InstanceGenerator
from ..inference.oracle import DEFAULT_MAX_STATES
from ..model.io import ModelDocument
from ..model.junction import is_junction_tree, validate_junction_graph
from ..utils.config import Config, GeneratorConfig
from ..utils.digest import digest_lines
from ..utils.extended import format_ext
from ..utils.reporting import format_table, to_json_line
from .checks import (
    DEFAULT_TOL,
    EXACT_TOL,
    InequalityCheck,
    check_bound,
    check_corollary1,
    check_corollary2,
    check_corollary3,
    check_theorem2,
    check_theorem3,
    check_tree_exactness,
)

logger = logging.getLogger(__name__)

FAULT_OFFSET = 1.0


@dataclass
class SuiteConfig:
    """What the suite runs and how strictly."""
    families: List[str] = field(default_factory=list)
    seeds: List[int] = field(default_factory=list)
    tol: float = DEFAULT_TOL
    exact_tol: float = EXACT_TOL
    mode: EnumerationMode = EnumerationMode.SPANNING
    max_states: int = DEFAULT_MAX_STATES
    max_vertices: int = DEFAULT_MAX_VERTICES
    max_combinations: int = DEFAULT_MAX_COMBINATIONS
    workers: int = 4
    inject_fault: bool = False
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)

    def __post_init__(self):
        self.mode = EnumerationMode(self.mode)
        for family in self.families:
            FamilySpec.parse(family)
        if self.workers < 1:
            raise ValueError("At least one suite worker is required")

    @classmethod
    def from_config(cls, config: Config, **overrides) -> "SuiteConfig":
        """Suite settings from the loaded configuration, with per-run overrides."""
        settings = dict(
            families=list(config.suite.families),
            seeds=list(range(config.suite.start_seed, config.suite.start_seed + config.suite.seeds)),
            tol=config.solver.tol,
            exact_tol=config.solver.gdl_tol,
            mode=EnumerationMode(config.enumeration.mode),
            max_states=config.solver.max_states,
            max_vertices=config.enumeration.max_vertices,
            max_combinations=config.enumeration.max_combinations,
            workers=config.suite.workers,
            generator=config.generator,
        )
        settings.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**settings)


@dataclass(frozen=True)
class InstanceSpec:
    """One suite instance: a generated (family, seed) or a given model."""
    family: str
    seed: Optional[int] = None
    document: Optional[ModelDocument] = field(default=None, compare=False, repr=False)


@dataclass
class InstanceResult:
    """Checks of one instance, or the error that stopped it."""
    spec: InstanceSpec
    checks: List[InequalityCheck] = field(default_factory=list)
    catalog_size: int = 0
    partition_pairs: int = 0
    error: Optional[str] = None
    error_kind: Optional[str] = None

    @property
    def violations(self) -> List[InequalityCheck]:
        return [check for check in self.checks if not check.satisfied]


@dataclass
class SuiteReport:
    """All instance results in deterministic order."""
    results: List[InstanceResult]
    tol: float = DEFAULT_TOL

    @property
    def checks(self) -> List[InequalityCheck]:
        return [check for result in self.results for check in result.checks]

    @property
    def violations(self) -> List[InequalityCheck]:
        return [check for result in self.results for check in result.violations]

    @property
    def errors(self) -> List[InstanceResult]:
        return [result for result in self.results if result.error is not None]

    @property
    def ok(self) -> bool:
        return not self.violations

    def names(self) -> List[str]:
        return sorted({check.name for check in self.checks})

    def records(self) -> List[Dict[str, Any]]:
        """Per-check and per-error records (without the summary)."""
        records = []
        for result in self.results:
            if result.error is not None:
                records.append({
                    "record": "error",
                    "family": result.spec.family,
                    "seed": result.spec.seed,
                    "kind": result.error_kind,
                    "message": result.error,
                })
                continue
            for check in result.checks:
                records.append({
                    "record": "check",
                    "family": result.spec.family,
                    "seed": result.spec.seed,
                    "name": check.name,
                    "lhs": check.lhs,
                    "rhs": check.rhs,
                    "slack": check.slack,
                    "satisfied": check.satisfied,
                    "tol": check.tol,
                    "context": check.context,
                })
        return records

    def summary(self, lines: Optional[List[str]] = None) -> Dict[str, Any]:
        lines = lines if lines is not None else [to_json_line(r) for r in self.records()]
        totals = Counter(check.name for check in self.checks)
        failed = Counter(check.name for check in self.violations)
        return {
            "record": "summary",
            "instances": len(self.results),
            "checks": len(self.checks),
            "violations": len(self.violations),
            "errors": len(self.errors),
            "by_name": {name: [totals[name], failed[name]] for name in sorted(totals)},
            "status": "ok" if self.ok else "violations",
            "digest": digest_lines(lines),
        }

    def structured_lines(self) -> List[str]:
        """JSON lines: one per check or error, then the summary with the digest of the rest."""
        lines = [to_json_line(record) for record in self.records()]
        return lines + [to_json_line(self.summary(lines))]

    def human_table(self, violations_only: bool = False) -> str:
        rows = []
        for result in self.results:
            if result.error is not None:
                rows.append([result.spec.family, result.spec.seed, result.error_kind, "", "", "", "ERROR", result.error])
                continue
            for check in result.checks:
                if violations_only and check.satisfied:
                    continue
                rows.append([
                    result.spec.family,
                    result.spec.seed if result.spec.seed is not None else "-",
                    check.name,
                    format_ext(check.lhs, 9),
                    format_ext(check.rhs, 9),
                    format_ext(check.slack, 9),
                    "ok" if check.satisfied else "VIOLATED",
                    " ".join(f"{k}={v}" for k, v in check.context.items()),
                ])
        table = format_table(["family", "seed", "check", "lhs", "rhs", "slack", "status", "context"], rows)
        summary = self.summary()
        footer = (
            f"{summary['instances']} instances, {summary['checks']} checks, "
            f"{summary['violations']} violations, {summary['errors']} errors"
        )
        return f"{table}\n\n{footer}"


def instance_specs(config: SuiteConfig, document: Optional[ModelDocument] = None) -> List[InstanceSpec]:
    """Given model first, then every family × seed in configuration order."""
    specs = []
    if document is not None:
        specs.append(InstanceSpec(f"model:{document.problem.name}", None, document))
    for family in config.families:
        canonical = str(FamilySpec.parse(family))
        specs.extend(InstanceSpec(canonical, seed) for seed in config.seeds)
    return specs


def _pair_roles(calculator: BoundCalculator, t1, t2):
    """(q_S, q_B) within a two-tree family; ties keep catalog order."""
    r1, r2 = calculator.report(t1), calculator.report(t2)
    source = t2 if r2.entropy < r1.entropy - 1e-12 else t1
    best = t2 if r2.lower_bound > r1.lower_bound + 1e-12 else t1
    return source, best


def _instance_checks(spec: InstanceSpec, document: ModelDocument, config: SuiteConfig) -> InstanceResult:
    problem, graph = document.problem, document.graph
    if graph is None:
        raise ContractError(f"Instance {spec.family} has no junction graph")
    validation = validate_junction_graph(problem, graph)
    if not validation:
        raise InvalidModelError("; ".join(str(v) for v in validation.violations))

    calculator = BoundCalculator(problem, config.max_states)
    subtrees = enumerate_subtrees(graph, config.mode, 1, config.max_vertices, config.max_combinations)
    if config.inject_fault and subtrees:
        calculator.bound_offsets[subtrees[0].key] = FAULT_OFFSET
    catalog = catalog_from_subtrees(problem, subtrees, config.mode, calculator)

    checks: List[InequalityCheck] = []
    for i, first in enumerate(subtrees):
        for second in subtrees[i + 1:]:
            checks.append(check_theorem2(problem, first, second, config.tol, calculator))
    if catalog.entries:
        checks += check_corollary2(problem, catalog, config.tol, calculator)
        checks.append(check_theorem3(problem, catalog, config.tol, calculator))
    for subtree in subtrees:
        checks += check_bound(problem, subtree, calculator, config.exact_tol)

    pairs = []
    if graph.num_vertices <= config.max_vertices:
        family = subtrees
        if config.mode != EnumerationMode.EXHAUSTIVE:
            family = enumerate_subtrees(
                graph, EnumerationMode.EXHAUSTIVE, 1, config.max_vertices, config.max_combinations
            )
        pairs = partition_pairs(family)
        for i, j in pairs:
            t1, t2 = family[i], family[j]
            checks += check_corollary1(problem, t1, t2, config.tol, calculator)
            source, best = _pair_roles(calculator, t1, t2)
            checks.append(check_corollary3(problem, source, best, config.tol, calculator))
    else:
        logger.debug(f"{spec.family}: graph too large for the two-tree partition search")

    if is_junction_tree(graph):
        checks += check_tree_exactness(problem, graph, config.exact_tol, config.max_states)

    checks.sort(key=InequalityCheck.sort_key)
    return InstanceResult(spec, checks, catalog_size=len(subtrees), partition_pairs=len(pairs))


def evaluate_instance(spec: InstanceSpec, config: SuiteConfig) -> InstanceResult:
    """Generate (if needed) and check one instance; library errors are recorded, not raised."""
    try:
        document = spec.document
        if document is None:
            document = InstanceGenerator(config.generator).generate(spec.family, spec.seed)
        result = _instance_checks(spec, document, config)
    except SubtreeBoundsError as e:
        logger.warning(f"Instance {spec.family} seed={spec.seed} skipped: {type(e).__name__}: {e}")
        return InstanceResult(spec, error=str(e), error_kind=type(e).__name__)

    logger.debug(
        f"Instance {spec.family} seed={spec.seed}: {len(result.checks)} checks, "
        f"{len(result.violations)} violations"
    )
    return result


async def run_suite(config: SuiteConfig, document: Optional[ModelDocument] = None) -> SuiteReport:
    """
    Run every check over the configured instances.

    Instances are evaluated concurrently in worker threads; the report keeps
    the order of :func:`instance_specs`.

    Args:
        config: Families, seeds, tolerances and caps
        document: Optional model checked before the generated instances

    Returns:
        SuiteReport (violations are reported, never raised)
    """
    specs = instance_specs(config, document)
    semaphore = asyncio.Semaphore(config.workers)

    async def run_one(spec: InstanceSpec) -> InstanceResult:
        async with semaphore:
            return await asyncio.to_thread(evaluate_instance, spec, config)

    logger.info(f"Running verification suite over {len(specs)} instances")
    results = list(await asyncio.gather(*(run_one(spec) for spec in specs)))
    report = SuiteReport(results, config.tol)
    logger.info(
        f"Suite finished: {len(report.checks)} checks, {len(report.violations)} violations, "
        f"{len(report.errors)} errors"
    )
    return report
