"""Strict JSON scenario configuration.

A config document is a JSON object.  Unknown keys anywhere are rejected with a
:class:`ConfigError` carrying the dotted path of the offending entry.

Recognized top-level keys::

    topology        "file.topo" (relative to the config file), "builtin:btn27",
                    {"edges": [[a, b, latency], ...]} or {"chain": n, "latency": s}
    scheme          DLINT | PLINT | P4INT | PINT_LITE
    v, seed, duration, hash_count, hash_seeds, bf_cells, bf_ratio
    flows           [{"src", "dst", "start", "size", "gap", "payload",
                      "sport", "dport", "proto"}, ...]
    traffic         {"flow_count", "endpoints", "zipf_exponent", "inter_packet_gap",
                     "max_size", "payload_bytes", "endpoint_weights"}
    loss_prob       per-link drop probability
    link_loss       [[a, b, p], ...]
    update          {"time", "remove_links": [[a, b], ...], "reroute": [[path], ...]}
    trace_reverse, dedup_at_sink, watchdog, ack_every
    sweep           {"scheme": [...], "v": [...], "bf_ratio": [...]}
"""

from __future__ import annotations

import itertools
import json
import math
from importlib import resources
from pathlib import Path

from .dlint import DEFAULT_WATCHDOG
from .errors import ConfigError
from .model import Scheme
from .simnet import FlowSpec, Scenario, TrafficParams, UpdatePlan, chain, make_key
from .simnet.topology import Topology, load_topology, parse_topology
from .simnet.traffic import DEFAULT_GAP, DEFAULT_PAYLOAD, MAX_FLOW_SIZE

SWEEP_AXES = ("scheme", "v", "bf_ratio")

_TOP_KEYS = {"topology", "scheme", "v", "seed", "duration", "hash_count", "hash_seeds", "bf_cells",
             "bf_ratio", "flows", "traffic", "loss_prob", "link_loss", "update", "trace_reverse",
             "dedup_at_sink", "watchdog", "ack_every", "sweep"}
_FLOW_KEYS = {"src", "dst", "start", "size", "gap", "payload", "sport", "dport", "proto"}
_TRAFFIC_KEYS = {"flow_count", "endpoints", "zipf_exponent", "inter_packet_gap", "max_size",
                 "payload_bytes", "endpoint_weights"}
_UPDATE_KEYS = {"time", "remove_links", "reroute"}


def _reject_unknown(obj: dict, allowed: set, where: str) -> None:
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"{where}.{key}" if where else key, "unknown key")


def _int(value, where: str, lo=None, hi=None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(where, f"expected an integer, got {value!r}")
    if lo is not None and value < lo:
        raise ConfigError(where, f"must be >= {lo}, got {value}")
    if hi is not None and value > hi:
        raise ConfigError(where, f"must be <= {hi}, got {value}")
    return value


def _num(value, where: str, lo=None, hi=None, positive=False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(where, f"expected a finite number, got {value!r}")
    value = float(value)
    if positive and value <= 0:
        raise ConfigError(where, f"must be > 0, got {value}")
    if lo is not None and value < lo:
        raise ConfigError(where, f"must be >= {lo}, got {value}")
    if hi is not None and value > hi:
        raise ConfigError(where, f"must be <= {hi}, got {value}")
    return value


def _bool(value, where: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(where, f"expected true or false, got {value!r}")
    return value


def _list(value, where: str) -> list:
    if not isinstance(value, list):
        raise ConfigError(where, f"expected a list, got {type(value).__name__}")
    return value


def _object(value, where: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(where, f"expected an object, got {type(value).__name__}")
    return value


def _scheme(value, where: str) -> Scheme:
    try:
        return Scheme(value)
    except ValueError:
        choices = ", ".join(s.value for s in Scheme)
        raise ConfigError(where, f"unknown scheme {value!r} (expected one of {choices})") from None


def load_config(path) -> dict:
    """Read and JSON-decode a config file; structure is checked by :func:`build_scenario`."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {str(p)!r}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"{p}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    doc = _object(doc, "config")
    _reject_unknown(doc, _TOP_KEYS, "")
    return doc


def parse_topology_field(value, base_dir: Path) -> Topology:
    where = "topology"
    if isinstance(value, str):
        if value.startswith("builtin:"):
            name = value.split(":", 1)[1]
            res = resources.files("lwint") / "data" / f"{name}.topo"
            if not res.is_file():
                raise ConfigError(where, f"no built-in topology named {name!r}")
            try:
                return parse_topology(res.read_text(), value)
            except ValueError as exc:
                raise ConfigError(where, str(exc)) from None
        return load_topology(base_dir / value, where)
    obj = _object(value, where)
    if "chain" in obj:
        _reject_unknown(obj, {"chain", "latency"}, where)
        n = _int(obj["chain"], f"{where}.chain", lo=1)
        lat = _num(obj.get("latency", 0.001), f"{where}.latency", positive=True)
        return chain(n, lat)
    _reject_unknown(obj, {"edges", "nodes"}, where)
    edges = []
    for i, e in enumerate(_list(obj.get("edges", []), f"{where}.edges")):
        at = f"{where}.edges[{i}]"
        e = _list(e, at)
        if len(e) != 3:
            raise ConfigError(at, "expected [node_a, node_b, latency]")
        edges.append((_int(e[0], f"{at}[0]", lo=1), _int(e[1], f"{at}[1]", lo=1),
                      _num(e[2], f"{at}[2]", positive=True)))
    nodes = None
    if "nodes" in obj:
        nodes = [_int(n, f"{where}.nodes[{i}]", lo=1)
                 for i, n in enumerate(_list(obj["nodes"], f"{where}.nodes"))]
    try:
        return Topology(nodes, edges) if nodes is not None else Topology(edges=edges)
    except ValueError as exc:
        raise ConfigError(where, str(exc)) from None


def _parse_flows(value, duration: float) -> list:
    flows = []
    for i, f in enumerate(_list(value, "flows")):
        at = f"flows[{i}]"
        f = _object(f, at)
        _reject_unknown(f, _FLOW_KEYS, at)
        for req in ("src", "dst"):
            if req not in f:
                raise ConfigError(f"{at}.{req}", "required")
        src = _int(f["src"], f"{at}.src", lo=1)
        dst = _int(f["dst"], f"{at}.dst", lo=1)
        start = _num(f.get("start", 0.0), f"{at}.start", lo=0.0)
        if start >= duration:
            raise ConfigError(f"{at}.start", f"must be < duration ({duration}), got {start}")
        size = _int(f.get("size", MAX_FLOW_SIZE), f"{at}.size", lo=1)
        gap = _num(f.get("gap", DEFAULT_GAP), f"{at}.gap", positive=True)
        payload = _int(f.get("payload", DEFAULT_PAYLOAD), f"{at}.payload", lo=0)
        sport = _int(f.get("sport", 1024 + i % 64512), f"{at}.sport", lo=0, hi=0xFFFF)
        dport = _int(f.get("dport", 80), f"{at}.dport", lo=0, hi=0xFFFF)
        proto = _int(f.get("proto", 6), f"{at}.proto", lo=0, hi=0xFF)
        key = make_key(i, src, dst, sport, dport, proto)
        flows.append(FlowSpec(key, src, dst, start, size, gap, payload))
    return flows


def _parse_traffic(value, duration: float) -> TrafficParams:
    t = _object(value, "traffic")
    _reject_unknown(t, _TRAFFIC_KEYS, "traffic")
    for req in ("flow_count", "endpoints"):
        if req not in t:
            raise ConfigError(f"traffic.{req}", "required")
    endpoints = []
    for i, pair in enumerate(_list(t["endpoints"], "traffic.endpoints")):
        at = f"traffic.endpoints[{i}]"
        pair = _list(pair, at)
        if len(pair) != 2:
            raise ConfigError(at, "expected [src_node, dst_node]")
        a, b = _int(pair[0], f"{at}[0]", lo=1), _int(pair[1], f"{at}[1]", lo=1)
        if a == b:
            raise ConfigError(at, "source and destination must differ")
        endpoints.append((a, b))
    if not endpoints:
        raise ConfigError("traffic.endpoints", "must not be empty")
    weights = [_num(w, f"traffic.endpoint_weights[{i}]", lo=0.0)
               for i, w in enumerate(_list(t.get("endpoint_weights", []), "traffic.endpoint_weights"))]
    if weights and (len(weights) != len(endpoints) or sum(weights) <= 0):
        raise ConfigError("traffic.endpoint_weights",
                          "need one non-negative weight per endpoint pair, not all zero")
    zipf = _num(t.get("zipf_exponent", 1.2), "traffic.zipf_exponent")
    if zipf <= 1.0:
        raise ConfigError("traffic.zipf_exponent", f"must be > 1, got {zipf}")
    return TrafficParams(
        flow_count=_int(t["flow_count"], "traffic.flow_count", lo=1),
        endpoints=endpoints,
        duration=duration,
        zipf_exponent=zipf,
        inter_packet_gap=_num(t.get("inter_packet_gap", DEFAULT_GAP), "traffic.inter_packet_gap",
                              positive=True),
        max_size=_int(t.get("max_size", MAX_FLOW_SIZE), "traffic.max_size", lo=1),
        payload_bytes=_int(t.get("payload_bytes", DEFAULT_PAYLOAD), "traffic.payload_bytes", lo=0),
        endpoint_weights=weights,
    )


def _parse_update(value, topo: Topology, duration: float):
    u = _object(value, "update")
    _reject_unknown(u, _UPDATE_KEYS, "update")
    if "time" not in u:
        raise ConfigError("update.time", "required")
    t = _num(u["time"], "update.time", lo=0.0)
    if t >= duration:
        raise ConfigError("update.time", f"must be < duration ({duration}), got {t}")
    removed = []
    for i, link in enumerate(_list(u.get("remove_links", []), "update.remove_links")):
        at = f"update.remove_links[{i}]"
        link = _list(link, at)
        if len(link) != 2:
            raise ConfigError(at, "expected [node_a, node_b]")
        a, b = _int(link[0], f"{at}[0]"), _int(link[1], f"{at}[1]")
        if not topo.has_edge(a, b):
            raise ConfigError(at, f"no link {a}-{b} in the topology")
        removed.append((a, b))
    reroute = []
    for i, path in enumerate(_list(u.get("reroute", []), "update.reroute")):
        at = f"update.reroute[{i}]"
        path = [_int(n, f"{at}[{j}]") for j, n in enumerate(_list(path, at))]
        if len(path) < 2 or len(set(path)) != len(path):
            raise ConfigError(at, "expected a loop-free path of at least two nodes")
        for a, b in zip(path, path[1:]):
            if not topo.has_edge(a, b):
                raise ConfigError(at, f"no link {a}-{b} in the topology")
        reroute.append(tuple(path))
    return t, UpdatePlan(removed, reroute)


def _parse_sweep_values(axis: str, values, where: str) -> list:
    values = _list(values, where)
    if not values:
        raise ConfigError(where, "must list at least one value")
    out = []
    for i, raw in enumerate(values):
        at = f"{where}[{i}]"
        if axis == "scheme":
            out.append(_scheme(raw, at))
        elif axis == "v":
            out.append(_int(raw, at, lo=1, hi=8))
        else:
            out.append(_num(raw, at, positive=True))
    return out


def parse_sweep(doc: dict, overrides: dict | None = None) -> dict:
    """Sweep axes from the config, replaced axis-by-axis by ``overrides``."""
    axes = {}
    if "sweep" in doc:
        sweep = _object(doc["sweep"], "sweep")
        _reject_unknown(sweep, set(SWEEP_AXES), "sweep")
        for axis, values in sweep.items():
            axes[axis] = _parse_sweep_values(axis, values, f"sweep.{axis}")
    for axis, values in (overrides or {}).items():
        if axis not in SWEEP_AXES:
            raise ConfigError(f"sweep.{axis}", f"not a sweep axis (expected one of {', '.join(SWEEP_AXES)})")
        axes[axis] = _parse_sweep_values(axis, values, f"sweep.{axis}")
    return axes


def sweep_cells(doc: dict, overrides: dict | None = None) -> list:
    """Cartesian product of sweep axes as ``{"scheme", "v", "bf_ratio"}`` dicts.

    Axes not swept take the document's value.  Cells come back sorted by
    ``(scheme, v, bf_ratio)`` with duplicates removed.
    """
    axes = parse_sweep(doc, overrides)
    base = {
        "scheme": _scheme(doc.get("scheme", "DLINT"), "scheme"),
        "v": _int(doc.get("v", 1), "v", lo=1, hi=8),
        "bf_ratio": _num(doc["bf_ratio"], "bf_ratio", positive=True) if doc.get("bf_ratio") is not None
        else None,
    }
    choices = [axes.get(axis, [base[axis]]) for axis in SWEEP_AXES]
    cells = {tuple(c) for c in itertools.product(*choices)}
    ordered = sorted(cells, key=lambda c: (c[0].value, c[1], -1.0 if c[2] is None else c[2]))
    return [dict(zip(SWEEP_AXES, c)) for c in ordered]


def build_scenario(doc: dict, base_dir=".", *, seed: int | None = None, cell: dict | None = None
                   ) -> Scenario:
    """Turn a validated config document (plus one sweep cell) into a :class:`Scenario`."""
    _reject_unknown(doc, _TOP_KEYS, "")
    if "topology" not in doc:
        raise ConfigError("topology", "required")
    topo = parse_topology_field(doc["topology"], Path(base_dir))
    duration = _num(doc.get("duration", 60.0), "duration", positive=True)

    if ("flows" in doc) == ("traffic" in doc):
        raise ConfigError("flows", "give exactly one of 'flows' or 'traffic'")
    flows = traffic = None
    if "flows" in doc:
        flows = _parse_flows(doc["flows"], duration)
        if not flows:
            raise ConfigError("flows", "must not be empty")
        for i, f in enumerate(flows):
            for name, node in (("src", f.src_node), ("dst", f.dst_node)):
                if node not in topo.adjacency:
                    raise ConfigError(f"flows[{i}].{name}", f"node {node} is not in the topology")
    else:
        traffic = _parse_traffic(doc["traffic"], duration)
        for i, (a, b) in enumerate(traffic.endpoints):
            for j, node in enumerate((a, b)):
                if node not in topo.adjacency:
                    raise ConfigError(f"traffic.endpoints[{i}][{j}]",
                                      f"node {node} is not in the topology")

    cell = cell or {}
    scheme = cell.get("scheme") or _scheme(doc.get("scheme", "DLINT"), "scheme")
    v = cell.get("v") or _int(doc.get("v", 1), "v", lo=1, hi=8)
    bf_ratio = cell.get("bf_ratio")
    if bf_ratio is None and doc.get("bf_ratio") is not None:
        bf_ratio = _num(doc["bf_ratio"], "bf_ratio", positive=True)
    bf_cells = None
    if doc.get("bf_cells") is not None:
        bf_cells = _int(doc["bf_cells"], "bf_cells", lo=1)
        if bf_ratio is not None:
            raise ConfigError("bf_cells", "give either bf_cells or bf_ratio, not both")

    hash_count = _int(doc.get("hash_count", 1), "hash_count", lo=1)
    hash_seeds = None
    if doc.get("hash_seeds") is not None:
        hash_seeds = [_int(s, f"hash_seeds[{i}]", lo=0, hi=0xFFFFFFFFFFFFFFFF)
                      for i, s in enumerate(_list(doc["hash_seeds"], "hash_seeds"))]
        if len(hash_seeds) != hash_count:
            raise ConfigError("hash_seeds", f"need exactly hash_count={hash_count} seeds")

    link_loss = {}
    for i, entry in enumerate(_list(doc.get("link_loss", []), "link_loss")):
        at = f"link_loss[{i}]"
        entry = _list(entry, at)
        if len(entry) != 3:
            raise ConfigError(at, "expected [node_a, node_b, probability]")
        a, b = _int(entry[0], f"{at}[0]"), _int(entry[1], f"{at}[1]")
        if not topo.has_edge(a, b):
            raise ConfigError(at, f"no link {a}-{b} in the topology")
        link_loss[frozenset((a, b))] = _num(entry[2], f"{at}[2]", lo=0.0, hi=1.0)

    update_time = plan = None
    if doc.get("update") is not None:
        update_time, plan = _parse_update(doc["update"], topo, duration)

    watchdog = doc.get("watchdog")
    if watchdog is True:
        watchdog = DEFAULT_WATCHDOG
    elif watchdog is False:
        watchdog = None
    elif watchdog is not None:
        watchdog = _int(watchdog, "watchdog", lo=1)

    if seed is None:
        seed = _int(doc.get("seed", 1), "seed", lo=0, hi=0xFFFFFFFFFFFFFFFF)

    return Scenario(
        topology=topo,
        scheme=scheme,
        flows=flows,
        traffic=traffic,
        v=v,
        bf_cells=bf_cells,
        bf_ratio=bf_ratio,
        hash_count=hash_count,
        hash_seeds=hash_seeds,
        seed=seed,
        duration=duration,
        loss_prob=_num(doc.get("loss_prob", 0.0), "loss_prob", lo=0.0, hi=1.0),
        link_loss=link_loss,
        update_time=update_time,
        update_plan=plan,
        trace_reverse=_bool(doc.get("trace_reverse", False), "trace_reverse"),
        dedup_at_sink=_bool(doc.get("dedup_at_sink", False), "dedup_at_sink"),
        watchdog=watchdog,
        ack_every=_int(doc.get("ack_every", 1), "ack_every", lo=1),
    )
