"""Deterministic discrete-event packet simulation of an INT domain.

Every switch of the topology is INT-capable; for each flow the first and last
switch of its route act as INT source and sink.  Hosts hang off the endpoint
switches with zero-latency links.  There is no queueing: a packet reaches the
next hop exactly one link latency after leaving the previous one.

Events are ordered by ``(time, seq)`` with a monotone ``seq``, so a scenario
and seed fully determine the report stream.
"""

from __future__ import annotations

import heapq
import math
import random
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..baselines import P4IntSwitch, PintLiteSwitch
from ..bloom import BloomStateStore, default_seeds
from ..dlint import DlintSwitch
from ..errors import ConfigError, Unreachable
from ..model import INITIAL_TTL, Direction, Packet, Scheme, role_at
from ..plint import PlintSwitch
from .topology import Topology
from .traffic import FlowSpec, TrafficParams, generate_flows

DEFAULT_BF_CELLS = 1 << 16

_EMIT, _ARRIVE, _UPDATE = 0, 1, 2


@dataclass
class UpdatePlan:
    """Route changes enacted at ``update_time``.

    ``remove_links`` drops links and re-routes every flow on what remains;
    ``reroute`` pins flows whose endpoints match a listed path onto it.
    """

    remove_links: list = field(default_factory=list)
    reroute: list = field(default_factory=list)


@dataclass
class Scenario:
    topology: Topology
    scheme: Scheme = Scheme.DLINT
    flows: Optional[list] = None
    traffic: Optional[TrafficParams] = None
    v: int = 1
    bf_cells: Optional[int] = None
    bf_ratio: Optional[float] = None
    hash_count: int = 1
    hash_seeds: Optional[list] = None
    seed: int = 1
    duration: float = 60.0
    loss_prob: float = 0.0
    link_loss: dict = field(default_factory=dict)
    update_time: Optional[float] = None
    update_plan: Optional[UpdatePlan] = None
    trace_reverse: bool = False
    dedup_at_sink: bool = False
    watchdog: Optional[int] = None
    ack_every: int = 1

    def __post_init__(self):
        self.scheme = Scheme(self.scheme)
        if not 1 <= self.v <= 8:
            raise ConfigError("v", f"must be in [1, 8], got {self.v}")
        if self.ack_every < 1:
            raise ConfigError("ack_every", f"must be >= 1, got {self.ack_every}")
        if self.hash_count < 1:
            raise ConfigError("hash_count", f"must be >= 1, got {self.hash_count}")
        if not 0.0 <= self.loss_prob <= 1.0:
            raise ConfigError("loss_prob", f"must be in [0, 1], got {self.loss_prob}")
        if self.flows is None and self.traffic is None:
            raise ConfigError("flows", "either explicit flows or traffic parameters are required")

    def flow_specs(self) -> list:
        if self.flows is not None:
            return list(self.flows)
        rng = np.random.Generator(np.random.PCG64(_derive(self.seed, 1)))
        return generate_flows(self.traffic, rng)

    def flow_count(self) -> int:
        return len(self.flows) if self.flows is not None else self.traffic.flow_count

    def bloom_cells(self) -> int:
        if self.bf_cells is not None:
            return self.bf_cells
        if self.bf_ratio is not None:
            return max(1, math.ceil(self.flow_count() / self.bf_ratio))
        return DEFAULT_BF_CELLS


def _derive(seed: int, *words: int) -> int:
    state = np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, *words]).generate_state(2, np.uint64)
    return int(state[0]) << 64 | int(state[1])


def switch_rng(seed: int, node: int) -> random.Random:
    return random.Random(_derive(seed, 2, node))


def build_switch(scenario: Scenario, node: int):
    scheme = scenario.scheme
    if scheme is Scheme.DLINT:
        m = scenario.hash_count
        seeds = scenario.hash_seeds or default_seeds(m)
        store = BloomStateStore(scenario.bloom_cells(), m, seeds)
        return DlintSwitch(node, scenario.v, store=store, trace_reverse=scenario.trace_reverse,
                           watchdog=scenario.watchdog)
    if scheme is Scheme.PLINT:
        return PlintSwitch(node, scenario.v, switch_rng(scenario.seed, node), scenario.dedup_at_sink)
    if scheme is Scheme.P4INT:
        return P4IntSwitch(node, scenario.v)
    return PintLiteSwitch(node, switch_rng(scenario.seed, node))


class GroundTruth:
    """Route history per flow: which path packets emitted from a given seq/time took."""

    def __init__(self):
        self._hist: dict = {}  # key -> ([first_seq...], [time...], [path...])
        self.update_time: Optional[float] = None
        self.changed: dict = {}  # key -> (old_path, new_path)

    def record(self, key, time: float, first_seq: int, path: tuple) -> None:
        seqs, times, paths = self._hist.setdefault(key, ([], [], []))
        seqs.append(first_seq)
        times.append(time)
        paths.append(tuple(path))

    def path_for_seq(self, key, seq: int) -> tuple:
        seqs, _, paths = self._hist[key]
        return paths[bisect_right(seqs, seq) - 1]

    def path_at(self, key, t: float) -> tuple:
        _, times, paths = self._hist[key]
        return paths[max(bisect_right(times, t) - 1, 0)]

    def paths(self, key) -> list:
        return list(self._hist[key][2])

    def flows(self):
        return self._hist.keys()


@dataclass
class FlowAccount:
    emitted: int = 0
    delivered: int = 0
    dropped: int = 0
    header_bytes: int = 0
    bare: int = 0
    first_emit: float = math.inf
    last_emit: float = -math.inf
    acks_emitted: int = 0
    acks_delivered: int = 0
    acks_dropped: int = 0
    reverse_header_bytes: int = 0


@dataclass
class RunResult:
    scenario: Scenario
    flows: list
    reports: list
    ground_truth: GroundTruth
    accounting: dict  # FlowKey -> FlowAccount
    switches: dict
    events: int = 0

    def totals(self) -> FlowAccount:
        tot = FlowAccount()
        for acc in self.accounting.values():
            for name in ("emitted", "delivered", "dropped", "header_bytes", "bare",
                         "acks_emitted", "acks_delivered", "acks_dropped", "reverse_header_bytes"):
                setattr(tot, name, getattr(tot, name) + getattr(acc, name))
        return tot


def _route_or_config_error(topo: Topology, src: int, dst: int, where: str) -> tuple:
    try:
        return tuple(topo.route(src, dst))
    except (Unreachable, ValueError) as exc:
        raise ConfigError(where, str(exc)) from None


def run(scenario: Scenario) -> RunResult:
    topo = scenario.topology
    flows: list = scenario.flow_specs()
    duration = scenario.duration
    needs_acks = scenario.scheme is Scheme.DLINT

    for i, f in enumerate(flows):
        for n in (f.src_node, f.dst_node):
            if n not in topo.adjacency:
                raise ConfigError(f"flows[{i}]", f"node {n} is not in the topology")
    switches = {node: build_switch(scenario, node) for node in topo.nodes}

    gt = GroundTruth()
    gt.update_time = scenario.update_time
    accounting = {}
    index = {}
    routes = []
    for i, f in enumerate(flows):
        if f.key in index:
            raise ConfigError(f"flows[{i}]", f"duplicate flow key {f.key}")
        index[f.key] = i
        path = _route_or_config_error(topo, f.src_node, f.dst_node, f"flows[{i}]")
        routes.append(path)
        gt.record(f.key, 0.0, 0, path)
        accounting[f.key] = FlowAccount()
    next_seq = [0] * len(flows)
    acks_rx = [0] * len(flows)
    accounts = [accounting[f.key] for f in flows]

    loss_rng = random.Random(_derive(scenario.seed, 3))
    base_loss = scenario.loss_prob
    link_loss = {}
    for pair, p in scenario.link_loss.items():
        a, b = tuple(pair)
        link_loss[(a, b)] = link_loss[(b, a)] = p
    lat = {(a, b): topo.latency(a, b) for a in topo.nodes for b in topo.adjacency[a]}

    reports = []
    heap = []
    counter = 0

    def push(t, kind, obj):
        nonlocal counter
        counter += 1
        heapq.heappush(heap, (t, counter, kind, obj))

    for i, f in enumerate(flows):
        if f.start < duration:
            push(f.start, _EMIT, i)
    if scenario.update_time is not None:
        push(scenario.update_time, _UPDATE, None)

    def apply_update(t):
        plan = scenario.update_plan or UpdatePlan()
        new_topo = topo.without_links(plan.remove_links) if plan.remove_links else topo
        pinned = {(p[0], p[-1]): tuple(p) for p in plan.reroute}
        for i, f in enumerate(flows):
            new = pinned.get((f.src_node, f.dst_node))
            if new is None and plan.remove_links:
                new = _route_or_config_error(new_topo, f.src_node, f.dst_node, "update.remove_links")
            if new is not None and new != routes[i]:
                gt.changed[f.key] = (routes[i], new)
                routes[i] = new
                gt.record(f.key, t, next_seq[i], new)

    events = 0
    while heap:
        t, _, kind, obj = heapq.heappop(heap)
        events += 1
        if kind == _EMIT:
            i = obj
            f = flows[i]
            seq = next_seq[i]
            next_seq[i] = seq + 1
            acc = accounts[i]
            acc.emitted += 1
            if acc.first_emit == math.inf:
                acc.first_emit = t
            acc.last_emit = t
            pkt = Packet(f.key, Direction.FORWARD, INITIAL_TTL, seq, f.payload_bytes, None, t,
                         routes[i], 0)
            nxt = t + f.inter_packet_gap
            if seq + 1 < f.size_packets and nxt < duration:
                push(nxt, _EMIT, i)
            # host-to-switch links have zero latency
            obj = pkt
        elif kind == _UPDATE:
            apply_update(t)
            continue

        pkt = obj
        path = pkt.path
        hop = pkt.hop
        last = len(path) - 1
        node = path[hop]
        role = role_at(hop, last + 1)
        pkt.timestamp = t
        forward = pkt.direction is Direction.FORWARD
        sw = switches[node]
        act = sw.process_forward(pkt, role) if forward else sw.process_reverse(pkt, role)
        pkt.ttl -= 1
        if forward:
            acc = accounts[index[pkt.flow]]
        else:
            acc = accounts[index[pkt.flow.reversed()]]
        if act.report is not None:
            r = act.report
            reports.append(r)
            acc.header_bytes += r.header_bytes
            if not r.header_present and not r.direct:
                acc.bare += 1

        if hop == last:
            if forward:
                acc.delivered += 1
                if needs_acks:
                    i = index[pkt.flow]
                    acks_rx[i] += 1
                    if acks_rx[i] % scenario.ack_every == 0:
                        acc.acks_emitted += 1
                        ack = Packet(pkt.flow.reversed(), Direction.REVERSE, INITIAL_TTL, pkt.seq, 0,
                                     None, t, tuple(reversed(routes[i])), 0)
                        push(t, _ARRIVE, ack)
            else:
                acc.acks_delivered += 1
            continue

        nxt_node = path[hop + 1]
        p = link_loss.get((node, nxt_node), base_loss)
        if p > 0.0 and loss_rng.random() < p:
            if forward:
                acc.dropped += 1
            else:
                acc.acks_dropped += 1
            continue
        if not forward and pkt.header is not None and hop == 0:
            acc.reverse_header_bytes += pkt.header.size()
        pkt.hop = hop + 1
        push(t + lat[(node, nxt_node)], _ARRIVE, pkt)

    return RunResult(scenario, flows, reports, gt, accounting, switches, events)
