"""Overlay construction and neighbor-list maintenance.

Ordinary nodes hold three lists (ordinary peers, super nodes, gateways);
super nodes hold one list of ordinary members. Gateways hold no lists.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

from .model import (
    NeighborEntry,
    NeighborList,
    NodeId,
    NodeRole,
    SimConfig,
    validate_config,
)


class Verdict(enum.Enum):
    ACCEPT = "accept"
    REJECT = "reject"


@dataclass(frozen=True)
class JoinResponse:
    verdict: Verdict
    replaced: Optional[NodeId] = None

    @property
    def accepted(self) -> bool:
        return self.verdict is Verdict.ACCEPT


@dataclass
class Network:
    roles: List[NodeRole]
    capacity: int
    ordinary_lists: Dict[NodeId, NeighborList] = field(default_factory=dict)
    super_lists: Dict[NodeId, NeighborList] = field(default_factory=dict)
    gateway_lists: Dict[NodeId, NeighborList] = field(default_factory=dict)
    super_member_lists: Dict[NodeId, NeighborList] = field(default_factory=dict)
    # satellite broadcasts each super node failed to receive
    missed_counts: Dict[NodeId, int] = field(default_factory=dict)

    @classmethod
    def from_lists(cls, roles: Sequence[NodeRole], capacity: int,
                   ordinary: Optional[Mapping[NodeId, Sequence[NodeId]]] = None,
                   supers: Optional[Mapping[NodeId, Sequence[NodeId]]] = None,
                   gateways: Optional[Mapping[NodeId, Sequence[NodeId]]] = None,
                   members: Optional[Mapping[NodeId, Sequence[NodeId]]] = None) -> "Network":
        """Hand-built network; lists not given are empty."""
        net = cls(roles=list(roles), capacity=capacity)

        def fill(target, node, peers):
            nlist = NeighborList(capacity, owner=node)
            for peer in peers:
                nlist.append(NeighborEntry(peer))
            target[node] = nlist

        for node, role in enumerate(net.roles):
            if role is NodeRole.ORDINARY:
                fill(net.ordinary_lists, node, (ordinary or {}).get(node, ()))
                fill(net.super_lists, node, (supers or {}).get(node, ()))
                fill(net.gateway_lists, node, (gateways or {}).get(node, ()))
            elif role is NodeRole.SUPER:
                fill(net.super_member_lists, node, (members or {}).get(node, ()))
                net.missed_counts[node] = 0
        return net

    @property
    def n_nodes(self) -> int:
        return len(self.roles)

    def role(self, node: NodeId) -> NodeRole:
        return self.roles[node]

    def nodes_with_role(self, role: NodeRole) -> List[NodeId]:
        return [i for i, r in enumerate(self.roles) if r is role]

    @property
    def ordinaries(self) -> List[NodeId]:
        return self.nodes_with_role(NodeRole.ORDINARY)

    @property
    def supers(self) -> List[NodeId]:
        return self.nodes_with_role(NodeRole.SUPER)

    @property
    def gateways(self) -> List[NodeId]:
        return self.nodes_with_role(NodeRole.GATEWAY)

    def make_ordinary(self, node: NodeId) -> None:
        """Give ``node`` the Ordinary role with three empty lists."""
        self.roles[node] = NodeRole.ORDINARY
        self.super_member_lists.pop(node, None)
        self.missed_counts.pop(node, None)
        for lists in (self.ordinary_lists, self.super_lists, self.gateway_lists):
            lists[node] = NeighborList(self.capacity, owner=node)

    def check(self) -> None:
        """Assert the structural invariants; used by tests."""
        for node, role in enumerate(self.roles):
            owned = [self.ordinary_lists, self.super_lists, self.gateway_lists]
            if role is NodeRole.ORDINARY:
                assert all(node in lists for lists in owned), node
                assert node not in self.super_member_lists
            elif role is NodeRole.SUPER:
                assert node in self.super_member_lists
                assert not any(node in lists for lists in owned)
            else:
                assert node not in self.super_member_lists
                assert not any(node in lists for lists in owned)
        for lists in (self.ordinary_lists, self.super_lists, self.gateway_lists,
                      self.super_member_lists):
            for owner, nlist in lists.items():
                peers = nlist.peers()
                assert nlist.capacity == self.capacity
                assert len(peers) <= nlist.capacity
                assert len(set(peers)) == len(peers)
                assert owner not in peers

    def edges(self):
        """Yield (src, dst, listkind) for every list entry."""
        kinds = (
            ("ordinary", self.ordinary_lists),
            ("super", self.super_lists),
            ("gateway", self.gateway_lists),
            ("member", self.super_member_lists),
        )
        for node in range(self.n_nodes):
            for kind, lists in kinds:
                nlist = lists.get(node)
                if nlist is None:
                    continue
                for entry in nlist:
                    yield node, entry.peer, kind

    def edge_list(self) -> str:
        return "".join(f"{src} {dst} {kind}\n" for src, dst, kind in self.edges())


def _sample_peers(rng: random.Random, population: Sequence[NodeId], k: int,
                  exclude: NodeId) -> List[NodeId]:
    """Up to ``k`` distinct members of ``population`` other than ``exclude``, in random order."""
    if len(population) <= k + 1:
        chosen = [p for p in population if p != exclude]
        rng.shuffle(chosen)
        return chosen[:k]
    picks = rng.sample(population, k + 1)
    return [p for p in picks if p != exclude][:k]


def assign_roles(config: SimConfig, rng: random.Random) -> List[NodeRole]:
    order = list(range(config.n_nodes))
    rng.shuffle(order)
    roles = [NodeRole.ORDINARY] * config.n_nodes
    n_gw, n_sup = config.n_gateways, config.n_supers
    for node in order[:n_gw]:
        roles[node] = NodeRole.GATEWAY
    for node in order[n_gw:n_gw + n_sup]:
        roles[node] = NodeRole.SUPER
    return roles


def build_network(config: SimConfig, seed: Optional[int] = None, *,
                  supers_in_ordinary_lists: bool = True) -> Network:
    """Build a seeded random overlay.

    Every ordinary node gets K random terrestrial peers, K random super
    nodes and K random gateways (fewer when the role population is
    smaller). Terrestrial peers are drawn from ordinary and super nodes,
    or from ordinary nodes only with ``supers_in_ordinary_lists=False``.
    Super-node member lists are then filled through ``handle_join`` with
    requesters drawn uniformly from the ordinary population.
    """
    config = validate_config(config)
    if seed is None:
        seed = config.rng_seed
    rng = random.Random(seed)
    k = config.list_capacity
    net = Network(roles=assign_roles(config, rng), capacity=k)
    ordinaries, supers, gateways = net.ordinaries, net.supers, net.gateways
    if supers_in_ordinary_lists:
        peers = [i for i, r in enumerate(net.roles) if r is not NodeRole.GATEWAY]
    else:
        peers = ordinaries

    for node in ordinaries:
        for lists, population in ((net.ordinary_lists, peers),
                                  (net.super_lists, supers),
                                  (net.gateway_lists, gateways)):
            # sampled peers are distinct and exclude node; skip append's checks
            lists[node] = NeighborList(k, owner=node, entries=[
                NeighborEntry(peer) for peer in _sample_peers(rng, population, k, node)])

    target = min(k, len(ordinaries))
    for sup in supers:
        members = NeighborList(k, owner=sup)
        while len(members) < target:
            requester = ordinaries[rng.randrange(len(ordinaries))]
            handle_join(members, requester, 0.0)
        net.super_member_lists[sup] = members
        net.missed_counts[sup] = 0
    return net


def handle_join(member_list: NeighborList, requester: NodeId, now: float,
                rng: Optional[random.Random] = None) -> JoinResponse:
    """Answer an ordinary node's request to join a super node's member list."""
    entry = member_list.find(requester)
    if entry is not None:
        entry.touch_response(now)
        entry.active = True
        return JoinResponse(Verdict.ACCEPT)
    newcomer = NeighborEntry(requester, last_response_time=now)
    if not member_list.full:
        member_list.append(newcomer)
        return JoinResponse(Verdict.ACCEPT)
    inactive = [i for i, e in enumerate(member_list.entries) if not e.active]
    if not inactive:
        return JoinResponse(Verdict.REJECT)
    victim = _pick_min(member_list.entries, inactive,
                       lambda e: _absent_first(e.last_response_time), rng)
    evicted = member_list.entries[victim].peer
    member_list.entries[victim] = newcomer
    return JoinResponse(Verdict.ACCEPT, replaced=evicted)


def _absent_first(t: Optional[float]) -> tuple:
    return (0, 0.0) if t is None else (1, t)


def _pick_min(entries, candidates: Iterable[int], key, rng) -> int:
    """Index of the entry minimising ``key``; ties go to ``rng`` (or list order)."""
    candidates = list(candidates)
    best = min(key(entries[i]) for i in candidates)
    tied = [i for i in candidates if key(entries[i]) == best]
    if len(tied) == 1 or rng is None:
        return tied[0]
    return tied[rng.randrange(len(tied))]


def replacement_victim(nlist: NeighborList, rng: Optional[random.Random]) -> int:
    """Position of the entry Table-1 priority would evict.

    Earliest forward time first, then earliest response time, then a
    uniform random pick among what is still tied. Absent times sort first.
    """
    entries = nlist.entries
    idx = range(len(entries))
    tied = _all_min(entries, idx, lambda e: _absent_first(e.last_forward_time))
    tied = _all_min(entries, tied, lambda e: _absent_first(e.last_response_time))
    if len(tied) == 1:
        return tied[0]
    if rng is None:
        raise ValueError("random tiebreak needs a seeded stream")
    return tied[rng.randrange(len(tied))]


def _all_min(entries, candidates, key) -> List[int]:
    candidates = list(candidates)
    best = min(key(entries[i]) for i in candidates)
    return [i for i in candidates if key(entries[i]) == best]


def replace_entry(nlist: NeighborList, newcomer: NeighborEntry,
                  role_of_list: NodeRole, rng: Optional[random.Random] = None) -> NodeId:
    """Evict one entry from a full list in favour of ``newcomer``; returns the evicted peer.

    ``role_of_list`` is the role of the peers the list holds. Every
    ordinary-node list uses the same forward-time/response-time priority.
    """
    if not nlist.full:
        raise ValueError("list is not full; append instead")
    if newcomer.peer == nlist.owner:
        raise ValueError("a node cannot list itself")
    if newcomer.peer in nlist:
        raise ValueError(f"peer {newcomer.peer} already listed")
    victim = replacement_victim(nlist, rng)
    evicted = nlist.entries[victim].peer
    nlist.entries[victim] = newcomer
    return evicted


def add_or_replace(nlist: NeighborList, newcomer: NeighborEntry, role_of_list: NodeRole,
                   rng: Optional[random.Random] = None) -> Optional[NodeId]:
    """Insert ``newcomer``, evicting by priority when full. Returns the evicted peer, if any."""
    existing = nlist.find(newcomer.peer)
    if existing is not None:
        if newcomer.last_forward_time is not None:
            existing.touch_forward(newcomer.last_forward_time)
        if newcomer.last_response_time is not None:
            existing.touch_response(newcomer.last_response_time)
        return None
    if not nlist.full:
        nlist.append(newcomer)
        return None
    return replace_entry(nlist, newcomer, role_of_list, rng)


def mark_inactive(member_list: NeighborList, peer: NodeId) -> bool:
    """Flag a member that did not answer a forwarded message."""
    entry = member_list.find(peer)
    if entry is None:
        return False
    entry.active = False
    return True


def demote_supers(network: Network, missed_counts: Mapping[NodeId, int],
                  threshold: int) -> List[NodeId]:
    """Turn every super node that missed ``threshold`` or more broadcasts into an ordinary node.

    Demoted nodes also disappear from ordinary nodes' super lists, which is
    where their silence would eventually push them out anyway.
    """
    if threshold < 1:
        raise ValueError("threshold must be at least 1")
    demoted = [s for s in network.supers if missed_counts.get(s, 0) >= threshold]
    for node in demoted:
        network.make_ordinary(node)
    gone = set(demoted)
    if gone:
        for nlist in network.super_lists.values():
            nlist.entries = [e for e in nlist.entries if e.peer not in gone]
    return demoted


def join_network(network: Network, node: NodeId, rng: random.Random,
                 now: float = 0.0) -> None:
    """Fill an ordinary node's lists from the current population.

    Super nodes are only listed after they accept the join request.
    """
    if network.role(node) is not NodeRole.ORDINARY:
        raise ValueError(f"node {node} is not ordinary")
    k = network.capacity
    others = [n for n in network.ordinaries if n != node]
    for peer in _sample_peers(rng, others, k, node):
        add_or_replace(network.ordinary_lists[node], NeighborEntry(peer),
                       NodeRole.ORDINARY, rng)
    for peer in _sample_peers(rng, network.gateways, k, node):
        add_or_replace(network.gateway_lists[node], NeighborEntry(peer),
                       NodeRole.GATEWAY, rng)
    for sup in _sample_peers(rng, network.supers, k, node):
        response = handle_join(network.super_member_lists[sup], node, now, rng)
        if response.accepted:
            add_or_replace(network.super_lists[node],
                           NeighborEntry(sup, last_response_time=now), NodeRole.SUPER, rng)


def terrestrial_view(network: Network) -> Network:
    """Copy of ``network`` keeping only ordinary lists, every node ordinary."""
    net = Network(roles=[NodeRole.ORDINARY] * network.n_nodes, capacity=network.capacity)
    for node in range(network.n_nodes):
        src = network.ordinary_lists.get(node)
        nlist = NeighborList(network.capacity, owner=node)
        if src is not None:
            for entry in src:
                nlist.append(NeighborEntry(entry.peer))
        net.ordinary_lists[node] = nlist
        net.super_lists[node] = NeighborList(network.capacity, owner=node)
        net.gateway_lists[node] = NeighborList(network.capacity, owner=node)
    return net
