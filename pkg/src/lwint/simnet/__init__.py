from .engine import GroundTruth, RunResult, Scenario, UpdatePlan, run
from .topology import Topology, chain, load_topology, parse_topology, route
from .traffic import FlowSpec, TrafficParams, generate_flows, make_key

__all__ = [
    "FlowSpec", "GroundTruth", "RunResult", "Scenario", "Topology", "TrafficParams", "UpdatePlan",
    "chain", "generate_flows", "load_topology", "make_key", "parse_topology", "route", "run",
]
