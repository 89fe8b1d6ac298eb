"""Seeded instance families: grids, cycles and random junction trees."""

import logging
import math
import re
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from ..model.io import ModelDocument
from ..model.models import Edge, InferenceProblem, JunctionGraph, Kernel
from ..utils.config import GeneratorConfig

logger = logging.getLogger(__name__)

_FAMILY_PATTERN = re.compile(r"^\s*([a-z_]+)\s*\((.*)\)\s*$")

# family name -> (required integer arguments, optional trailing arguments)
FAMILY_ARITY: Dict[str, Tuple[int, int]] = {
    "grid": (2, 2),
    "cycle": (1, 2),
    "random_junction": (2, 1),
}


@dataclass(frozen=True)
class FamilySpec:
    """A parsed family expression such as ``grid(3,3)`` or ``cycle(5,0.5,2)``."""

    name: str
    args: Tuple[float, ...]

    @classmethod
    def parse(cls, text: str) -> "FamilySpec":
        """
        Parse ``name(arg, ...)``.

        Raises:
            ValueError: If the name is unknown or the arguments do not fit it
        """
        match = _FAMILY_PATTERN.match(text)
        if not match:
            raise ValueError(f"Family '{text}' must look like name(arg, ...)")
        name, raw_args = match.groups()
        if name not in FAMILY_ARITY:
            raise ValueError(f"Unknown family '{name}', expected one of {sorted(FAMILY_ARITY)}")
        try:
            args = tuple(float(a) for a in raw_args.split(",") if a.strip())
        except ValueError:
            raise ValueError(f"Family '{text}' has a non-numeric argument")

        required, optional = FAMILY_ARITY[name]
        if not required <= len(args) <= required + optional:
            raise ValueError(
                f"Family '{name}' takes {required} to {required + optional} arguments, got {len(args)}"
            )
        for value in args[:required]:
            if value != int(value) or value < 1:
                raise ValueError(f"Family '{name}' size arguments must be positive integers")
        return cls(name, args)

    def int_arg(self, index: int) -> int:
        return int(self.args[index])

    def __str__(self) -> str:
        rendered = ",".join(
            str(int(a)) if i < FAMILY_ARITY[self.name][0] else repr(a)
            for i, a in enumerate(self.args)
        )
        return f"{self.name}({rendered})"


class InstanceGenerator:
    """Builds model documents (problem plus junction graph) for a family and a seed."""

    def __init__(self, config: GeneratorConfig):
        self.config = config

    def generate(self, family: "FamilySpec | str", seed: int) -> ModelDocument:
        """
        Generate one instance.

        Args:
            family: Family expression or parsed FamilySpec
            seed: Seed of the random stream; equal seeds give equal documents

        Returns:
            ModelDocument whose graph is a valid junction graph for the problem
        """
        spec = family if isinstance(family, FamilySpec) else FamilySpec.parse(family)
        builders: Dict[str, Callable[[FamilySpec, np.random.Generator], ModelDocument]] = {
            "grid": self._generate_grid,
            "cycle": self._generate_cycle,
            "random_junction": self._generate_random_junction,
        }
        rng = np.random.default_rng(seed)
        document = builders[spec.name](spec, rng)
        document.metadata.update({"family": str(spec), "seed": int(seed)})
        logger.debug(
            f"Generated {spec} seed={seed}: {document.problem.num_vars} variables, "
            f"{document.problem.num_kernels} kernels"
        )
        return document

    def _coupling_range(self, spec: FamilySpec, first_optional: int) -> Tuple[float, float]:
        low = spec.args[first_optional] if len(spec.args) > first_optional else self.config.coupling_low
        high = spec.args[first_optional + 1] if len(spec.args) > first_optional + 1 else self.config.coupling_high
        if not 0 < low <= high:
            raise ValueError(f"Coupling range must satisfy 0 < low <= high, got [{low}, {high}]")
        return low, high

    def _table(self, rng: np.random.Generator, shape: Tuple[int, ...], low: float, high: float) -> np.ndarray:
        table = np.exp(rng.uniform(math.log(low), math.log(high), size=shape))
        if self.config.allow_zeros:
            mask = rng.random(shape) < self.config.zero_probability
            mask[(0,) * len(shape)] = False
            table[mask] = 0.0
        return table

    def _pairwise_document(
        self,
        name: str,
        num_vars: int,
        pairs: Sequence[Tuple[int, int]],
        rng: np.random.Generator,
        low: float,
        high: float
    ) -> ModelDocument:
        card = self.config.cardinality
        kernels = [Kernel(pair, self._table(rng, (card, card), low, high)) for pair in pairs]
        problem = InferenceProblem((card,) * num_vars, tuple(kernels), name)
        return ModelDocument(problem, chain_junction_graph(problem), {})

    def _generate_grid(self, spec: FamilySpec, rng: np.random.Generator) -> ModelDocument:
        rows, cols = spec.int_arg(0), spec.int_arg(1)
        if rows * cols < 2:
            raise ValueError("A grid needs at least two cells")
        low, high = self._coupling_range(spec, 2)
        pairs = []
        for r in range(rows):
            for c in range(cols):
                cell = r * cols + c
                if c + 1 < cols:
                    pairs.append((cell, cell + 1))
                if r + 1 < rows:
                    pairs.append((cell, cell + cols))
        return self._pairwise_document(f"grid_{rows}x{cols}", rows * cols, pairs, rng, low, high)

    def _generate_cycle(self, spec: FamilySpec, rng: np.random.Generator) -> ModelDocument:
        length = spec.int_arg(0)
        if length < 3:
            raise ValueError("A cycle needs at least three variables")
        low, high = self._coupling_range(spec, 1)
        pairs = [(i, i + 1) for i in range(length - 1)] + [(0, length - 1)]
        return self._pairwise_document(f"cycle_{length}", length, pairs, rng, low, high)

    def _generate_random_junction(self, spec: FamilySpec, rng: np.random.Generator) -> ModelDocument:
        """Random junction tree: each new vertex hangs off an earlier one,
        sharing a non-empty part of its label and adding fresh variables."""
        num_vertices, max_label = spec.int_arg(0), spec.int_arg(1)
        max_vars = int(spec.args[2]) if len(spec.args) > 2 else self.config.max_vars
        if max_vars < max_label:
            raise ValueError("max_vars must be at least max_label")

        labels: List[Tuple[int, ...]] = []
        edges: List[Edge] = []
        num_vars = 0
        for vertex in range(num_vertices):
            if vertex == 0:
                shared: List[int] = []
                fresh_count = int(rng.integers(1, max_label + 1))
            else:
                parent = int(rng.integers(vertex))
                parent_label = labels[parent]
                size = int(rng.integers(1, min(len(parent_label), max_label) + 1))
                shared = sorted(int(v) for v in rng.choice(parent_label, size=size, replace=False))
                fresh_count = int(rng.integers(0, max_label - size + 1))
            fresh_count = min(fresh_count, max_vars - num_vars)
            fresh = list(range(num_vars, num_vars + fresh_count))
            num_vars += fresh_count
            labels.append(tuple(sorted(shared + fresh)))
            if vertex > 0:
                edges.append(Edge(parent, vertex, tuple(shared)))

        card = self.config.cardinality
        low, high = self.config.coupling_low, self.config.coupling_high
        kernels = [Kernel(label, self._table(rng, (card,) * len(label), low, high)) for label in labels]
        problem = InferenceProblem(
            (card,) * num_vars, tuple(kernels), f"random_junction_{num_vertices}_{max_label}"
        )
        return ModelDocument(problem, JunctionGraph.for_problem(problem, edges), {})


def chain_junction_graph(problem: InferenceProblem) -> JunctionGraph:
    """Junction graph chaining, for each variable, the kernels that contain it.

    Kernels are chained in list order; an edge joining two kernels that share
    several variables carries all of them.
    """
    labels: Dict[Tuple[int, int], set] = {}
    for variable in range(problem.num_vars):
        carriers = [i for i, kernel in enumerate(problem.kernels) if variable in kernel.scope]
        for u, v in zip(carriers, carriers[1:]):
            labels.setdefault((u, v), set()).add(variable)
    edges = [Edge(u, v, tuple(sorted(label))) for (u, v), label in sorted(labels.items())]
    return JunctionGraph.for_problem(problem, edges)
