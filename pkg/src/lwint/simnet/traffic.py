"""Flow specifications and the Zipf flow-size traffic generator."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..model import FlowKey

DEFAULT_GAP = 0.01
DEFAULT_PAYLOAD = 1000
MAX_FLOW_SIZE = 100_000


@dataclass(frozen=True)
class FlowSpec:
    key: FlowKey
    src_node: int
    dst_node: int
    start: float
    size_packets: int
    inter_packet_gap: float = DEFAULT_GAP
    payload_bytes: int = DEFAULT_PAYLOAD

    def __post_init__(self):
        if self.size_packets < 1:
            raise ValueError(f"size_packets must be >= 1, got {self.size_packets}")
        if self.start < 0:
            raise ValueError(f"start must be >= 0, got {self.start}")
        if self.inter_packet_gap <= 0:
            raise ValueError(f"inter_packet_gap must be > 0, got {self.inter_packet_gap}")

    def to_dict(self) -> dict:
        return {"key": str(self.key), "src": self.src_node, "dst": self.dst_node,
                "start": self.start, "size": self.size_packets, "gap": self.inter_packet_gap}


@dataclass
class TrafficParams:
    flow_count: int
    endpoints: list
    duration: float = 60.0
    zipf_exponent: float = 1.2
    inter_packet_gap: float = DEFAULT_GAP
    max_size: int = MAX_FLOW_SIZE
    payload_bytes: int = DEFAULT_PAYLOAD
    endpoint_weights: list = field(default_factory=list)


def make_key(index: int, src_node: int, dst_node: int, src_port: int, dst_port: int,
             proto: int = 6) -> FlowKey:
    """Addresses 10.x.y.z encode the attachment node and the flow index."""
    src = (10 << 24) | ((src_node & 0xFFF) << 12) | (index & 0xFFF)
    dst = (10 << 24) | ((dst_node & 0xFFF) << 12) | ((index >> 12) & 0xFFF)
    return FlowKey(src, dst, src_port, dst_port, proto)


def zipf_pmf(s: float, max_size: int) -> np.ndarray:
    k = np.arange(1, max_size + 1, dtype=float)
    w = k ** -s
    return w / w.sum()


def generate_flows(params: TrafficParams, rng: np.random.Generator) -> list:
    """Draw ``flow_count`` flows with Zipf(s) sizes truncated to ``[1, max_size]``.

    Sizes come from inverse-CDF sampling of the truncated pmf, start times are
    uniform on ``[0, duration)`` and endpoints are drawn from the pool.
    """
    if params.flow_count < 1:
        raise ValueError("flow_count must be >= 1")
    if params.zipf_exponent <= 1:
        raise ValueError("zipf_exponent must be > 1")
    if not params.endpoints:
        raise ValueError("endpoint pool is empty")

    n = params.flow_count
    cdf = np.cumsum(zipf_pmf(params.zipf_exponent, params.max_size))
    cdf[-1] = 1.0
    sizes = np.searchsorted(cdf, rng.random(n), side="right") + 1
    sizes = np.minimum(sizes, params.max_size)
    starts = rng.uniform(0.0, params.duration, n)
    weights = None
    if params.endpoint_weights:
        w = np.asarray(params.endpoint_weights, dtype=float)
        weights = w / w.sum()
    picks = rng.choice(len(params.endpoints), size=n, p=weights)
    ports = rng.integers(1024, 65536, size=(n, 2))

    flows = []
    used = set()
    for i in range(n):
        src, dst = params.endpoints[int(picks[i])]
        sport, dport = int(ports[i, 0]), int(ports[i, 1])
        key = make_key(i, src, dst, sport, dport)
        while key in used or key.reversed() in used:
            sport = int(rng.integers(1024, 65536))
            key = make_key(i, src, dst, sport, dport)
        used.add(key)
        flows.append(FlowSpec(key, int(src), int(dst), float(starts[i]), int(sizes[i]),
                              params.inter_packet_gap, params.payload_bytes))
    return flows
