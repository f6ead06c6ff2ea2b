"""Forwarding strategies per node role and the satellite broadcast path."""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

from .model import NeighborList, NodeId, NodeRole, SimConfig
from .topology import Network


class Via(enum.Enum):
    ORIGIN = "origin"
    TERRESTRIAL = "terrestrial"
    SATELLITE = "satellite"


@dataclass
class ForwardPlan:
    sender: NodeId
    targets: List[Tuple[NodeId, int]] = field(default_factory=list)
    uplink: Optional[NodeId] = None

    @classmethod
    def serial(cls, sender: NodeId, peers, uplink: Optional[NodeId] = None) -> "ForwardPlan":
        return cls(sender, [(p, slot) for slot, p in enumerate(peers, 1)], uplink)

    @property
    def peers(self) -> List[NodeId]:
        return [p for p, _ in self.targets]


def _recency(entry) -> float:
    times = [t for t in (entry.last_forward_time, entry.last_response_time) if t is not None]
    return max(times) if times else float("-inf")


def gateways_by_recency(gateway_list: NeighborList) -> List[NodeId]:
    """Gateways ordered most recently contacted first; list order breaks ties."""
    ranked = sorted(enumerate(gateway_list.entries), key=lambda ie: (-_recency(ie[1]), ie[0]))
    return [entry.peer for _, entry in ranked]


def miner_plan(network: Network, miner: NodeId, now: float,
               gateway_up: Optional[Callable[[NodeId], bool]] = None) -> ForwardPlan:
    """Sends for a freshly mined block: one gateway, then all listed supers, then ordinary peers.

    ``gateway_up`` reports whether contacting a gateway succeeds; failed
    gateways are skipped in recency order until one answers.
    """
    gateway = None
    gw_list = network.gateway_lists.get(miner)
    if gw_list is not None:
        for candidate in gateways_by_recency(gw_list):
            if gateway_up is None or gateway_up(candidate):
                gateway = candidate
                break

    lists = []
    if gateway is not None:
        lists.append([gw_list.find(gateway)])
    for source in (network.super_lists, network.ordinary_lists):
        nlist = source.get(miner)
        if nlist is not None:
            lists.append(nlist.entries)

    peers = []
    for entries in lists:
        for entry in entries:
            entry.touch_forward(now)
            # a super may sit in both the super and the ordinary list
            if entry.peer not in peers:
                peers.append(entry.peer)
    return ForwardPlan.serial(miner, peers, uplink=gateway)


def relay_plan(network: Network, node: NodeId, via: Via) -> ForwardPlan:
    """Sends made by a node on first receipt of someone else's message."""
    role = network.role(node)
    if role is NodeRole.GATEWAY:
        return ForwardPlan(node, [], uplink=node)
    if role is NodeRole.SUPER:
        return ForwardPlan.serial(node, network.super_member_lists[node].peers())
    return ForwardPlan.serial(node, network.ordinary_lists[node].peers())


def satellite_broadcast(network: Network, gateway_rx_ms: float, config: SimConfig,
                        rng: random.Random) -> List[Tuple[NodeId, float]]:
    """Deliveries produced by one gateway uplink.

    Every gateway and every super node hears the broadcast after the fixed
    satellite delay, except super nodes that independently miss it; those
    get their miss counter bumped.
    """
    at = gateway_rx_ms + config.satellite_delay_ms
    p_miss = config.satellite_miss_prob
    out = []
    for node, role in enumerate(network.roles):
        if role is NodeRole.GATEWAY:
            out.append((node, at))
        elif role is NodeRole.SUPER:
            if p_miss > 0 and rng.random() < p_miss:
                network.missed_counts[node] = network.missed_counts.get(node, 0) + 1
            else:
                out.append((node, at))
    return out
