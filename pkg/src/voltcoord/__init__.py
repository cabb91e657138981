"""Coordinated voltage-regulator tap and PV reactive-power scheduling on
unbalanced distribution feeders, benchmarked against a rule-based local
regulator controller with an exact Z-bus power flow as the oracle."""

from .netmodel import (
    FeederModel,
    FeederError,
    SchemaError,
    TopologyError,
    parse_feeder,
    serialize_feeder,
    build_admittance,
    tap_to_ratio,
)
from .powerflow import PowerFlowCase, PowerFlowSolution, solve_zbus
from .feeders import four_bus

__all__ = [
    "FeederModel", "FeederError", "SchemaError", "TopologyError",
    "parse_feeder", "serialize_feeder", "build_admittance", "tap_to_ratio",
    "PowerFlowCase", "PowerFlowSolution", "solve_zbus", "four_bus",
]
