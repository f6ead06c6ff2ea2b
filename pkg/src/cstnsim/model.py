"""Domain types and configuration for the propagation simulator.

Times are milliseconds (float), sizes are bits, bandwidth is bits/second.
"""

from __future__ import annotations

import dataclasses
import enum
import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

NodeId = int


class NodeRole(enum.Enum):
    ORDINARY = "ordinary"
    SUPER = "super"
    GATEWAY = "gateway"


class MessageKind(enum.Enum):
    BLOCK = "block"
    TRANSACTION = "transaction"


class ConfigError(ValueError):
    """Raised when a configuration violates one of its invariants."""

    def __init__(self, message: str, field_name: Optional[str] = None):
        super().__init__(message)
        self.field_name = field_name


def default_gateway_count(n_nodes: int) -> int:
    return max(1, n_nodes // 1000)


def role_count(fraction: float, n_nodes: int) -> int:
    # 0.29 * 100 == 28.999999999999996 in binary floating point
    return int(math.floor(round(fraction * n_nodes, 9)))


def bandwidth_for_tps(tps: float, tx_size_bits: float) -> float:
    """Bandwidth in bits/s needed to carry ``tps`` transactions of ``tx_size_bits``."""
    return tps * tx_size_bits


@dataclass(frozen=True)
class SimConfig:
    n_nodes: int = 10_000
    super_fraction: float = 0.2
    # None resolves to default_gateway_count(n_nodes) on validation
    gateway_count: Optional[int] = None
    list_capacity: int = 4
    bandwidth_bps: float = 100e6
    intrinsic_delay_ms: float = 200.0
    satellite_delay_ms: float = 300.0
    tx_size_bits: float = 2000.0
    block_size_bits: float = 8e6
    sync_threshold: float = 0.8
    satellite_miss_prob: float = 0.0
    gateway_fail_prob: float = 0.0
    demotion_interval_count: int = 3
    rng_seed: int = 0

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)

    @property
    def n_supers(self) -> int:
        return role_count(self.super_fraction, self.n_nodes)

    @property
    def n_gateways(self) -> int:
        if self.gateway_count is None:
            return default_gateway_count(self.n_nodes)
        return self.gateway_count


CONFIG_FIELDS: Dict[str, type] = {
    "n_nodes": int,
    "super_fraction": float,
    "gateway_count": int,
    "list_capacity": int,
    "bandwidth_bps": float,
    "intrinsic_delay_ms": float,
    "satellite_delay_ms": float,
    "tx_size_bits": float,
    "block_size_bits": float,
    "sync_threshold": float,
    "satellite_miss_prob": float,
    "gateway_fail_prob": float,
    "demotion_interval_count": int,
    "rng_seed": int,
}

assert set(CONFIG_FIELDS) == {f.name for f in dataclasses.fields(SimConfig)}


def validate_config(config: SimConfig) -> SimConfig:
    """Check every invariant and return the config with gateway_count resolved.

    Raises ConfigError naming the first violated invariant.
    """
    if config.n_nodes < 2:
        raise ConfigError("n_nodes ≥ 2 violated", "n_nodes")
    if not 0.0 <= config.super_fraction <= 1.0:
        raise ConfigError("super_fraction out of range", "super_fraction")
    if config.gateway_count is not None and config.gateway_count < 0:
        raise ConfigError("gateway_count must be non-negative", "gateway_count")
    if config.n_supers + config.n_gateways > config.n_nodes:
        raise ConfigError("role fractions exceed population", "super_fraction")
    if config.list_capacity < 1:
        raise ConfigError("list_capacity must be positive", "list_capacity")
    for name in ("bandwidth_bps", "intrinsic_delay_ms", "satellite_delay_ms",
                 "tx_size_bits", "block_size_bits"):
        value = getattr(config, name)
        if not (value > 0 and math.isfinite(value)):
            raise ConfigError(f"{name} must be positive", name)
    if not 0.0 < config.sync_threshold <= 1.0:
        raise ConfigError("sync_threshold out of range", "sync_threshold")
    if not 0.0 <= config.satellite_miss_prob <= 1.0:
        raise ConfigError("satellite_miss_prob out of range", "satellite_miss_prob")
    if not 0.0 <= config.gateway_fail_prob <= 1.0:
        raise ConfigError("gateway_fail_prob out of range", "gateway_fail_prob")
    if config.demotion_interval_count < 1:
        raise ConfigError("demotion_interval_count must be positive",
                          "demotion_interval_count")
    if not -(2**63) <= config.rng_seed < 2**64:
        raise ConfigError("rng_seed must fit in 64 bits", "rng_seed")
    if config.gateway_count is None:
        config = config.replace(gateway_count=default_gateway_count(config.n_nodes))
    return config


# -- textual form -----------------------------------------------------------

def _format_value(value) -> str:
    if value is None:
        return "auto"
    return repr(value)


def dump_config(config: SimConfig) -> str:
    lines = [f"{name} = {_format_value(getattr(config, name))}" for name in CONFIG_FIELDS]
    return "\n".join(lines) + "\n"


def parse_value(name: str, raw: str):
    if name not in CONFIG_FIELDS:
        raise ConfigError(f"unknown config key: {name}", name)
    raw = raw.strip()
    if name == "gateway_count" and raw.lower() == "auto":
        return None
    kind = CONFIG_FIELDS[name]
    try:
        if kind is int:
            return int(float(raw)) if _is_integral_float(raw) else int(raw)
        return float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {name}: {raw!r}", name) from None


def _is_integral_float(raw: str) -> bool:
    # allow "1e4" for counts
    if not any(c in raw for c in ".eE"):
        return False
    try:
        value = float(raw)
    except ValueError:
        return False
    return value.is_integer()


def parse_config(text: str, base: Optional[SimConfig] = None) -> SimConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment. Unknown keys are an error."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        values[key] = parse_value(key, raw)
    return dataclasses.replace(base or SimConfig(), **values)


def load_config(path) -> SimConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config not found: {path}")
    return parse_config(path.read_text())


def save_config(config: SimConfig, path) -> None:
    Path(path).write_text(dump_config(config))


# -- neighbor lists ---------------------------------------------------------

@dataclass
class NeighborEntry:
    peer: NodeId
    last_forward_time: Optional[float] = None
    last_response_time: Optional[float] = None
    active: bool = True

    def touch_forward(self, now: float) -> None:
        if self.last_forward_time is None or now > self.last_forward_time:
            self.last_forward_time = now

    def touch_response(self, now: float) -> None:
        if self.last_response_time is None or now > self.last_response_time:
            self.last_response_time = now


@dataclass
class NeighborList:
    capacity: int
    owner: Optional[NodeId] = None
    entries: List[NeighborEntry] = field(default_factory=list)

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("capacity must be positive")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __contains__(self, peer: NodeId) -> bool:
        return self.find(peer) is not None

    @property
    def full(self) -> bool:
        return len(self.entries) >= self.capacity

    def peers(self) -> List[NodeId]:
        return [e.peer for e in self.entries]

    def find(self, peer: NodeId) -> Optional[NeighborEntry]:
        for entry in self.entries:
            if entry.peer == peer:
                return entry
        return None

    def append(self, entry: NeighborEntry) -> None:
        if entry.peer == self.owner:
            raise ValueError(f"node {entry.peer} cannot list itself")
        if self.full:
            raise ValueError("neighbor list is full")
        if entry.peer in self:
            raise ValueError(f"duplicate peer {entry.peer}")
        self.entries.append(entry)

    def remove(self, peer: NodeId) -> bool:
        for i, entry in enumerate(self.entries):
            if entry.peer == peer:
                del self.entries[i]
                return True
        return False


@dataclass(frozen=True)
class Message:
    kind: MessageKind
    size_bits: float
    origin: NodeId

    def __post_init__(self):
        if not self.size_bits > 0:
            raise ValueError("message size must be positive")

    @classmethod
    def block(cls, config: SimConfig, origin: NodeId) -> "Message":
        return cls(MessageKind.BLOCK, config.block_size_bits, origin)

    @classmethod
    def transaction(cls, config: SimConfig, origin: NodeId) -> "Message":
        return cls(MessageKind.TRANSACTION, config.tx_size_bits, origin)


def derive_seed(seed: int, label: str) -> int:
    """Independent 64-bit sub-seed for a named random stream."""
    digest = hashlib.blake2b(f"{seed}:{label}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")
