"""Single-message discrete-event propagation."""

from __future__ import annotations

import enum
import heapq
import random
from dataclasses import dataclass, field
from typing import Callable, List, NamedTuple, Optional

from .model import Message, NodeId, NodeRole, SimConfig
from .protocol import ForwardPlan, Via, miner_plan, relay_plan, satellite_broadcast
from .topology import Network


class EventKind(enum.IntEnum):
    DELIVER = 0
    SATELLITE_DROP = 1


class Event(NamedTuple):
    # (time_ms, seq) is unique, so tuple ordering never reaches the payload
    time_ms: float
    seq: int
    kind: EventKind
    node: NodeId
    via: Via
    sender: Optional[NodeId]


class EventQueue:
    def __init__(self):
        self._heap: List[Event] = []
        self._seq = 0

    def __len__(self) -> int:
        return len(self._heap)

    def push(self, time_ms: float, kind: EventKind, node: NodeId,
             via: Via = Via.TERRESTRIAL, sender: Optional[NodeId] = None) -> Event:
        event = Event(time_ms, self._seq, kind, node, via, sender)
        self._seq += 1
        heapq.heappush(self._heap, event)
        return event

    def pop(self) -> Event:
        return heapq.heappop(self._heap)


def hop_delay(msg_size_bits: float, bandwidth_bps: float, intrinsic_delay_ms: float,
              send_slot: int) -> float:
    """Arrival delay of the ``send_slot``-th unicast of a message from one sender.

    Transmissions from one node are serialized; the intrinsic delay is paid
    once per hop.
    """
    return send_slot * (msg_size_bits / bandwidth_bps * 1000.0) + intrinsic_delay_ms


@dataclass
class PropagationTrace:
    origin: NodeId
    first_receipt_ms: List[Optional[float]]
    via: List[Optional[Via]]
    sender: List[Optional[NodeId]]
    plans: List[ForwardPlan] = field(default_factory=list)

    @property
    def n_nodes(self) -> int:
        return len(self.first_receipt_ms)

    @property
    def received(self) -> int:
        return sum(t is not None for t in self.first_receipt_ms)

    @property
    def reached_fraction(self) -> float:
        return self.received / self.n_nodes

    def dump(self) -> str:
        lines = []
        for node, (t, via) in enumerate(zip(self.first_receipt_ms, self.via)):
            if t is None:
                lines.append(f"{node} - -\n")
            else:
                lines.append(f"{node} {t!r} {via.value}\n")
        return "".join(lines)


def run(network: Network, config: SimConfig, msg: Message, origin: NodeId,
        seed: Optional[int] = None, record_plans: bool = False,
        on_plan: Optional[Callable[[ForwardPlan], None]] = None) -> PropagationTrace:
    """Propagate ``msg`` from ``origin`` until no events remain.

    Only a node's first delivery is recorded and triggers forwarding. The
    first gateway uplink schedules the satellite broadcast; later uplinks
    of the same message do nothing.
    """
    n = network.n_nodes
    if not 0 <= origin < n:
        raise ValueError(f"origin {origin} out of range [0, {n})")
    rng = random.Random(config.rng_seed if seed is None else seed)
    size = msg.size_bits
    tx_ms = size / config.bandwidth_bps * 1000.0
    intrinsic = config.intrinsic_delay_ms
    p_fail = config.gateway_fail_prob

    def gateway_up(_gateway: NodeId) -> bool:
        return not (p_fail > 0 and rng.random() < p_fail)

    times: List[Optional[float]] = [None] * n
    vias: List[Optional[Via]] = [None] * n
    senders: List[Optional[NodeId]] = [None] * n
    trace = PropagationTrace(origin, times, vias, senders)
    queue = EventQueue()
    broadcast_done = False

    def dispatch(plan: ForwardPlan, now: float) -> None:
        if record_plans:
            trace.plans.append(plan)
        if on_plan is not None:
            on_plan(plan)
        for target, slot in plan.targets:
            # same expression as hop_delay, inlined for speed
            queue.push(now + (slot * tx_ms + intrinsic), EventKind.DELIVER, target,
                       Via.TERRESTRIAL, plan.sender)
        if plan.uplink is not None and plan.uplink == plan.sender:
            queue.push(now, EventKind.SATELLITE_DROP, plan.sender)

    times[origin] = 0.0
    vias[origin] = Via.ORIGIN
    if network.role(origin) is NodeRole.ORDINARY:
        dispatch(miner_plan(network, origin, 0.0, gateway_up), 0.0)
    else:
        dispatch(relay_plan(network, origin, Via.ORIGIN), 0.0)

    while queue:
        event = queue.pop()
        now = event.time_ms
        if event.kind is EventKind.SATELLITE_DROP:
            if broadcast_done:
                continue
            broadcast_done = True
            for receiver, at in satellite_broadcast(network, now, config, rng):
                queue.push(at, EventKind.DELIVER, receiver, Via.SATELLITE, None)
            continue
        node = event.node
        if times[node] is not None:
            continue
        times[node] = now
        vias[node] = event.via
        senders[node] = event.sender
        dispatch(relay_plan(network, node, event.via), now)
    return trace
