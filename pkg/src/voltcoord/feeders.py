"""Access to the feeder models shipped with the package."""
from __future__ import annotations

from importlib import resources

from .netmodel import FeederModel, parse_feeder


def builtin_feeder_text(name: str = "feeder4") -> str:
    return resources.files("voltcoord").joinpath(f"data/{name}.json").read_text()


def four_bus() -> FeederModel:
    """The bundled 4-bus unbalanced feeder: mid-feeder ganged regulator, two PVs."""
    return parse_feeder(builtin_feeder_text("feeder4"))
