"""Per-run metrics: overhead, trace delivery, header use, duplicates and update detection."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import Optional

from .collector import Collector, DetectionMode
from .model import Scheme

# A flow counts toward update detection only if it emits on both sides of the
# update for at least this long; shorter overlaps leave no scheme a baseline.
DETECTION_MARGIN = 2.0


@dataclass
class MetricsSummary:
    scheme: str
    v: int
    bf_ratio: Optional[float]
    packets_delivered: int = 0
    overhead_bytes_per_packet: float = 0.0
    complete_traces: int = 0
    incomplete_traces: int = 0
    header_space_utilization: float = 0.0
    switch_ids_delivered: int = 0
    pct_ids_conveyed: float = 0.0
    duplicate_pct: float = 0.0
    ids_per_trace: Optional[float] = None
    off_path_ids: int = 0
    updates_eligible: int = 0
    update_detection_rate: Optional[float] = None
    detection_time_mean: Optional[float] = None
    early_detection_rate: Optional[float] = None
    early_detection_time_mean: Optional[float] = None
    false_detections: int = 0
    bare_packet_fraction: float = 0.0

    @classmethod
    def columns(cls) -> list:
        return [f.name for f in fields(cls)]

    def as_row(self) -> dict:
        return asdict(self)


def trace_matches(scheme: Scheme, hops, truth) -> bool:
    if scheme is Scheme.PINT_LITE:
        return len(hops) == len(truth) and set(hops) == set(truth)
    return tuple(hops) == tuple(truth)


def _mean(values):
    return sum(values) / len(values) if values else None


def update_eligible(accounting, ground_truth, margin: float = DETECTION_MARGIN) -> list:
    """Flows whose route changed and that kept emitting ``margin`` seconds around the update."""
    t_up = ground_truth.update_time
    if t_up is None:
        return []
    return [k for k in ground_truth.changed
            if accounting[k].first_emit <= t_up - margin and accounting[k].last_emit >= t_up + margin]


def compute_metrics(reports, traces, detections, accounting, ground_truth, *, scheme, v,
                    bf_ratio=None, detection_margin: float = DETECTION_MARGIN) -> MetricsSummary:
    scheme = Scheme(scheme)
    s = MetricsSummary(str(scheme), v, bf_ratio)

    delivered = sum(a.delivered for a in accounting.values())
    s.packets_delivered = delivered
    if delivered:
        s.overhead_bytes_per_packet = sum(a.header_bytes for a in accounting.values()) / delivered
        s.bare_packet_fraction = sum(a.bare for a in accounting.values()) / delivered

    capacity = 1 if scheme is Scheme.PINT_LITE else v
    ids = used = dup_sum = dup_n = 0
    for r in reports:
        k = len(r.items)
        ids += k
        used += k - (1 if r.direct else 0)
        if k:
            dup_sum += (k - len({sw for sw, _ in r.items})) / k
            dup_n += 1
    s.switch_ids_delivered = ids
    if reports:
        if scheme is Scheme.P4INT:
            # every stack entry carries data
            s.header_space_utilization = 1.0
            s.pct_ids_conveyed = 1.0
        else:
            s.header_space_utilization = used / (capacity * len(reports))
            s.pct_ids_conveyed = ids / (capacity * len(reports))
    if dup_n:
        s.duplicate_pct = dup_sum / dup_n

    consumed = []
    on_path: dict = {}
    for t in traces:
        truth = ground_truth.path_for_seq(t.flow, t.seq)
        if t.complete and trace_matches(scheme, t.hops, truth):
            s.complete_traces += 1
            consumed.append(t.ids_consumed)
        else:
            s.incomplete_traces += 1
        allowed = on_path.get(t.flow)
        if allowed is None:
            allowed = on_path[t.flow] = {sw for p in ground_truth.paths(t.flow) for sw in p}
        s.off_path_ids += sum(1 for sw in t.hops if sw not in allowed)
    s.ids_per_trace = _mean(consumed)

    t_up = ground_truth.update_time
    if t_up is not None:
        eligible = update_eligible(accounting, ground_truth, detection_margin)
        s.updates_eligible = len(eligible)
        first = {}
        for ev in detections:
            if ev.detected_at < t_up:
                if ev.mode is DetectionMode.WHOLE_TRACE:
                    s.false_detections += 1
                continue
            first.setdefault((ev.mode, ev.flow), ev.detected_at)
        for mode, rate_attr, time_attr in (
                (DetectionMode.WHOLE_TRACE, "update_detection_rate", "detection_time_mean"),
                (DetectionMode.EARLY, "early_detection_rate", "early_detection_time_mean")):
            times = [first[(mode, k)] - t_up for k in eligible if (mode, k) in first]
            if eligible:
                setattr(s, rate_attr, len(times) / len(eligible))
            setattr(s, time_attr, _mean(times))
    return s


def evaluate(result, bf_ratio=None, detection_margin: float = DETECTION_MARGIN):
    """Run the collector over a finished simulation and summarize it."""
    sc = result.scenario
    collector = Collector(sc.scheme, adjacency=sc.topology.adjacency)
    collector.ingest_all(result.reports)
    summary = compute_metrics(result.reports, collector.traces, collector.detections,
                              result.accounting, result.ground_truth, scheme=sc.scheme, v=sc.v,
                              bf_ratio=sc.bf_ratio if bf_ratio is None else bf_ratio,
                              detection_margin=detection_margin)
    return collector, summary


def detection_times(detections, update_time: float, mode: DetectionMode) -> dict:
    """First post-update detection instant per flow for ``mode``."""
    out = {}
    for ev in detections:
        if ev.mode is mode and ev.detected_at >= update_time:
            out.setdefault(ev.flow, ev.detected_at)
    return out
