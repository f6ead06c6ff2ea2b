"""Synchronization time and TPS from propagation traces."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Optional

from .engine import PropagationTrace
from .protocol import Via


@dataclass(frozen=True)
class TpsResult:
    sync_time_ms: Optional[float]
    tps: Optional[float]
    reached_fraction: float


def required_count(threshold: float, n_nodes: int) -> int:
    if not 0.0 < threshold <= 1.0:
        raise ValueError("threshold must be in (0, 1]")
    # 0.07 * 100 == 7.000000000000001
    return max(1, math.ceil(round(threshold * n_nodes, 9)))


def sync_time(trace: PropagationTrace, threshold: float) -> Optional[float]:
    """Time at which ``ceil(threshold * N)`` nodes hold the message, origin included."""
    need = required_count(threshold, trace.n_nodes)
    times = sorted(t for t in trace.first_receipt_ms if t is not None)
    if len(times) < need:
        return None
    return times[need - 1]


def tps_from_sync(sync_ms: Optional[float], block_size_bits: float,
                  tx_size_bits: float) -> Optional[float]:
    if sync_ms is None or sync_ms <= 0:
        return None
    return (block_size_bits / tx_size_bits) / (sync_ms / 1000.0)


def tps(trace: PropagationTrace, block_size_bits: float, tx_size_bits: float,
        threshold: float) -> TpsResult:
    """Throughput when blocks are spaced by exactly the threshold sync time."""
    if not (block_size_bits > 0 and tx_size_bits > 0):
        raise ValueError("sizes must be positive")
    sync = sync_time(trace, threshold)
    return TpsResult(sync, tps_from_sync(sync, block_size_bits, tx_size_bits),
                     trace.reached_fraction)


def transactions_per_block(block_size_bits: float, tx_size_bits: float) -> int:
    return int(block_size_bits // tx_size_bits)


def path_class(trace: PropagationTrace, node: int) -> str:
    """How the message reached ``node``.

    One of ``origin``, ``satellite`` (straight from the broadcast),
    ``super-relay`` (terrestrial hops below a satellite receiver),
    ``terrestrial`` (gossip from the origin only) or ``missed``.
    """
    if trace.first_receipt_ms[node] is None:
        return "missed"
    via = trace.via[node]
    if via is Via.ORIGIN:
        return "origin"
    if via is Via.SATELLITE:
        return "satellite"
    cur = trace.sender[node]
    while cur is not None:
        if trace.via[cur] is Via.SATELLITE:
            return "super-relay"
        cur = trace.sender[cur]
    return "terrestrial"


def path_class_counts(trace: PropagationTrace, nodes=None) -> Dict[str, int]:
    nodes = range(trace.n_nodes) if nodes is None else nodes
    return dict(Counter(path_class(trace, n) for n in nodes))
