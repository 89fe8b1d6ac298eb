"""Seeded instance generators."""

from .families import FamilySpec, InstanceGenerator, chain_junction_graph

__all__ = ["FamilySpec", "InstanceGenerator", "chain_junction_graph"]
