"""Undirected weighted topologies and deterministic shortest-path routing."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigError, Unreachable
from ..wire import is_switch_id


@dataclass
class Topology:
    nodes: list = field(default_factory=list)
    edges: list = field(default_factory=list)  # (a, b, latency_seconds)

    def __post_init__(self):
        self._adj: dict = {}
        self._lat: dict = {}
        seen = set(self.nodes)
        for a, b, lat in self.edges:
            self._check_edge(a, b, lat)
            seen.update((a, b))
        self.nodes = sorted(seen)
        self._rebuild()

    @staticmethod
    def _check_edge(a, b, lat):
        if a == b:
            raise ValueError(f"self-loop on node {a}")
        if lat <= 0:
            raise ValueError(f"edge {a}-{b}: latency must be > 0, got {lat}")
        for n in (a, b):
            if not is_switch_id(n):
                raise ValueError(f"node ID {n} is not a valid switch ID")

    def _rebuild(self):
        self._adj = {n: [] for n in self.nodes}
        self._lat = {}
        for a, b, lat in self.edges:
            if (a, b) in self._lat:
                raise ValueError(f"duplicate edge {a}-{b}")
            self._adj[a].append(b)
            self._adj[b].append(a)
            self._lat[(a, b)] = self._lat[(b, a)] = float(lat)
        for n in self._adj:
            self._adj[n].sort()

    @property
    def adjacency(self) -> dict:
        return self._adj

    def latency(self, a: int, b: int) -> float:
        return self._lat[(a, b)]

    def has_edge(self, a: int, b: int) -> bool:
        return (a, b) in self._lat

    def without_links(self, links) -> "Topology":
        drop = {frozenset(link) for link in links}
        return Topology(list(self.nodes), [e for e in self.edges if frozenset(e[:2]) not in drop])

    def route(self, src: int, dst: int) -> list:
        return route(self, src, dst)

    def path_latency(self, path) -> float:
        return sum(self._lat[(a, b)] for a, b in zip(path, path[1:]))


def route(topology: Topology, src: int, dst: int) -> list:
    """Minimum-latency path; equal-latency ties go to the lexicographically smallest node sequence.

    Dijkstra keyed on ``(distance, path)``; the key order is preserved under
    extension because two distinct simple paths to the same node cannot be
    prefixes of one another.
    """
    if src == dst:
        raise ValueError("route needs src != dst")
    adj = topology.adjacency
    for n in (src, dst):
        if n not in adj:
            raise Unreachable(f"node {n} is not in the topology")
    heap = [(0.0, (src,))]
    done = set()
    lat = topology._lat
    while heap:
        d, path = heapq.heappop(heap)
        u = path[-1]
        if u in done:
            continue
        if u == dst:
            return list(path)
        done.add(u)
        for w in adj[u]:
            if w not in done:
                heapq.heappush(heap, (d + lat[(u, w)], path + (w,)))
    raise Unreachable(f"no path from {src} to {dst}")


def parse_topology(text: str, source: str = "<string>") -> Topology:
    """Parse ``node_a node_b latency_seconds`` lines; ``#`` starts a comment."""
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"{source}:{lineno}: expected 'node_a node_b latency', got {raw!r}")
        try:
            a, b, lat = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise ValueError(f"{source}:{lineno}: cannot parse {raw!r}") from None
        edges.append((a, b, lat))
    try:
        return Topology(edges=edges)
    except ValueError as exc:
        raise ValueError(f"{source}: {exc}") from None


def load_topology(path, field_path: str = "topology") -> Topology:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(field_path, f"cannot read topology file {str(p)!r}: {exc.strerror}") from None
    try:
        return parse_topology(text, str(p))
    except ValueError as exc:
        raise ConfigError(field_path, str(exc)) from None


def chain(n: int, latency: float = 0.001, first: int = 1) -> Topology:
    """Linear topology ``first - first+1 - ... - first+n-1``."""
    return Topology(list(range(first, first + n)),
                    [(first + i, first + i + 1, latency) for i in range(n - 1)])
