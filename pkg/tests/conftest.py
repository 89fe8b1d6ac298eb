"""Pytest fixtures for subtree-bounds tests."""

import pytest
import tempfile
import sys
import os
from pathlib import Path

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from subtree_bounds.model.models import Edge, InferenceProblem, JunctionGraph, Kernel

AGREE = [[2.0, 1.0], [1.0, 2.0]]

TRIANGLE_YAML = """
name: triangle
num_vars: 3
cardinalities: [2, 2, 2]
kernels:
  - {scope: [0, 1], table: [2, 1, 1, 2]}
  - {scope: [1, 2], table: [2, 1, 1, 2]}
  - {scope: [0, 2], table: [2, 1, 1, 2]}
edges:
  - {u: 0, v: 1, label: [1]}
  - {u: 0, v: 2, label: [0]}
  - {u: 1, v: 2, label: [2]}
"""

UNIFORM_CHAIN_YAML = """
name: uniform_chain
num_vars: 3
cardinalities: [2, 2, 2]
kernels:
  - {scope: [0, 1], table: [1, 1, 1, 1]}
  - {scope: [1, 2], table: [1, 1, 1, 1]}
edges:
  - {u: 0, v: 1, label: [1]}
"""


@pytest.fixture
def temp_dir():
    """Create a temporary directory for test files."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def triangle_problem():
    """Three binary variables, one agreement kernel per pair (Z = 28)."""
    kernels = (
        Kernel((0, 1), np.array(AGREE)),
        Kernel((1, 2), np.array(AGREE)),
        Kernel((0, 2), np.array(AGREE)),
    )
    return InferenceProblem((2, 2, 2), kernels, "triangle")


@pytest.fixture
def triangle_graph(triangle_problem):
    """The loopy junction graph of the triangle: e0=(0,1|1), e1=(0,2|0), e2=(1,2|2)."""
    edges = (Edge(0, 1, (1,)), Edge(0, 2, (0,)), Edge(1, 2, (2,)))
    return JunctionGraph.for_problem(triangle_problem, edges)


@pytest.fixture
def chain_problem():
    """Four variables of mixed cardinality on a chain, plus a singleton kernel."""
    rng = np.random.default_rng(7)
    kernels = (
        Kernel((0, 1), rng.uniform(0.5, 2.0, size=(2, 3))),
        Kernel((1, 2), rng.uniform(0.5, 2.0, size=(3, 2))),
        Kernel((2, 3), rng.uniform(0.5, 2.0, size=(2, 2))),
        Kernel((3,), np.array([1.0, 3.0])),
    )
    return InferenceProblem((2, 3, 2, 2), kernels, "chain")


@pytest.fixture
def chain_graph(chain_problem):
    """A junction tree for chain_problem."""
    edges = (Edge(0, 1, (1,)), Edge(1, 2, (2,)), Edge(2, 3, (3,)))
    return JunctionGraph.for_problem(chain_problem, edges)


@pytest.fixture
def triangle_model_file(temp_dir):
    """Triangle model written as a model file."""
    path = temp_dir / "triangle.yaml"
    path.write_text(TRIANGLE_YAML)
    return path


@pytest.fixture
def uniform_chain_file(temp_dir):
    """All-ones kernels over three binary variables on a junction tree (Z = 8)."""
    path = temp_dir / "uniform_chain.yaml"
    path.write_text(UNIFORM_CHAIN_YAML)
    return path


@pytest.fixture
def sample_config_yaml(temp_dir):
    """Create a sample configuration file."""
    config_content = """
solver:
  max_states: 65536
  tol: 1.0e-8
  gdl_tol: 1.0e-9
  route: "dense"

enumeration:
  mode: "exhaustive"
  strategy: "greedy"
  max_vertices: 8

generator:
  cardinality: 3
  coupling_low: 0.5
  coupling_high: 2.0

suite:
  families:
    - "cycle(3)"
    - "grid(2,2)"
  seeds: 2
  start_seed: 5
  workers: 2

logging:
  log_level: "DEBUG"
"""
    config_path = temp_dir / "config.yaml"
    config_path.write_text(config_content)
    return config_path
