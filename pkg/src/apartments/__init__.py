"""Search for genus-2 periodic apartments in triangle-presentation buildings."""

from __future__ import annotations

__version__ = "0.1.0"

from .multigraph import Multigraph, canonical_form, from_mgtext, read_graph, to_mgtext, write_graph
from .octagons import OctagonSet, RotationSystem, surface_budget
from .presentations import Presentation, TriangleUse, builtin, load_presentation

__all__ = [
    "Multigraph",
    "OctagonSet",
    "Presentation",
    "RotationSystem",
    "TriangleUse",
    "builtin",
    "canonical_form",
    "from_mgtext",
    "load_presentation",
    "read_graph",
    "surface_budget",
    "to_mgtext",
    "write_graph",
]
