"""Constrained joint and lower spectral radius of linear systems on multigraphs."""
from __future__ import annotations

from importlib import resources

from .system import MultigraphSystem, loads_system

__version__ = "0.1.0"


def load_fixture(name: str) -> MultigraphSystem:
    """Load one of the bundled example systems, e.g. ``load_fixture("example2")``."""
    text = resources.files(__package__).joinpath("fixtures", f"{name}.json").read_text(encoding="utf-8")
    return loads_system(text)


__all__ = ["MultigraphSystem", "load_fixture", "__version__"]
