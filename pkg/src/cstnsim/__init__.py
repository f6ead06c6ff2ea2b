"""Block propagation simulator for terrestrial P2P overlays with a satellite broadcast tier."""

from .engine import PropagationTrace, hop_delay, run
from .experiments import Mode, Scenario, SweepKind, SweepRow, run_sweep
from .metrics import TpsResult, sync_time, tps
from .model import (
    ConfigError,
    Message,
    MessageKind,
    NeighborEntry,
    NeighborList,
    NodeRole,
    SimConfig,
    bandwidth_for_tps,
    validate_config,
)
from .protocol import ForwardPlan, Via, miner_plan, relay_plan, satellite_broadcast
from .topology import (
    JoinResponse,
    Network,
    Verdict,
    build_network,
    demote_supers,
    handle_join,
    replace_entry,
)

__all__ = [
    "ConfigError",
    "ForwardPlan",
    "JoinResponse",
    "Message",
    "MessageKind",
    "Mode",
    "NeighborEntry",
    "NeighborList",
    "Network",
    "NodeRole",
    "PropagationTrace",
    "Scenario",
    "SimConfig",
    "SweepKind",
    "SweepRow",
    "TpsResult",
    "Verdict",
    "Via",
    "bandwidth_for_tps",
    "build_network",
    "demote_supers",
    "handle_join",
    "hop_delay",
    "miner_plan",
    "relay_plan",
    "replace_entry",
    "run",
    "run_sweep",
    "satellite_broadcast",
    "sync_time",
    "tps",
    "validate_config",
]

__version__ = "0.1.0"
