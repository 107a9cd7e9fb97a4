"""Telemetry server: per-flow path reconstruction and path-update detection.

The collector only applies structural rules (INIT boundaries, cycle markers,
gap-free hop maps).  Whether a trace matches the real path is decided by the
metrics layer, which has the simulator's ground truth.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import InconsistentHop
from .model import FlowKey, Scheme, SinkReport
from .wire import INIT


class DetectionMode(str, enum.Enum):
    WHOLE_TRACE = "WHOLE_TRACE"
    EARLY = "EARLY"


@dataclass
class TraceRecord:
    flow: FlowKey
    hops: list
    complete: bool
    ids_consumed: int
    completed_at: float
    seq: int = 0
    path_len: int = 0
    ordered: bool = True

    def to_dict(self) -> dict:
        return {"flow": str(self.flow), "hops": list(self.hops), "complete": self.complete,
                "ids_consumed": self.ids_consumed, "completed_at": round(self.completed_at, 9),
                "seq": self.seq, "path_len": self.path_len, "ordered": self.ordered}


@dataclass
class DetectionEvent:
    flow: FlowKey
    mode: DetectionMode
    detected_at: float


# -- reconstruction -----------------------------------------------------------

@dataclass
class DlintAccumulator:
    partial: list = field(default_factory=list)
    ids_since: int = 0


@dataclass
class PlintAccumulator:
    hop_map: dict = field(default_factory=dict)
    path_len: int = 0
    ids_since: int = 0


@dataclass
class PintLiteAccumulator:
    seen: dict = field(default_factory=dict)  # insertion-ordered set of IDs
    path_len: int = 0
    ids_since: int = 0


def collect_dlint(state: DlintAccumulator, r: SinkReport) -> list:
    out = []
    if INIT in r.signals and state.partial:
        out.append(TraceRecord(r.flow, state.partial, False, state.ids_since, r.timestamp,
                               r.seq, r.path_len))
        state.partial = []
    for sw, _ in r.items:
        state.partial.append(sw)
        state.ids_since += 1
    if r.cycle_complete:
        hops = state.partial
        complete = len(hops) == r.path_len and len(set(hops)) == len(hops)
        out.append(TraceRecord(r.flow, hops, complete, state.ids_since, r.timestamp,
                               r.seq, r.path_len))
        state.partial = []
        if complete:
            state.ids_since = 0
    return out


def collect_plint(state: PlintAccumulator, r: SinkReport) -> list:
    n = r.path_len
    if n != state.path_len:
        state.hop_map.clear()
        state.path_len = n
    out = []
    hop_map = state.hop_map
    for sw, hop in r.items:
        if hop is None or not 1 <= hop <= n:
            raise InconsistentHop(f"hop_num {hop} outside [1, {n}] for {r.flow}")
        hop_map[hop] = sw
        state.ids_since += 1
        if len(hop_map) == n:
            out.append(TraceRecord(r.flow, [hop_map[h] for h in range(1, n + 1)], True,
                                   state.ids_since, r.timestamp, r.seq, n))
            hop_map.clear()
            state.ids_since = 0
    return out


def order_by_adjacency(ids, sink: int, adjacency) -> Optional[list]:
    """The unique simple path visiting exactly ``ids`` and ending at ``sink``, if any."""
    nodes = set(ids)
    if sink not in nodes:
        return None
    found = []

    def extend(path, visited):
        if len(found) > 1:
            return
        if len(path) == len(nodes):
            found.append(path[::-1])
            return
        for nb in adjacency.get(path[-1], ()):
            if nb in nodes and nb not in visited:
                visited.add(nb)
                path.append(nb)
                extend(path, visited)
                path.pop()
                visited.discard(nb)

    extend([sink], {sink})
    return found[0] if len(found) == 1 else None


def collect_pintlite(state: PintLiteAccumulator, r: SinkReport, adjacency=None) -> list:
    n = r.path_len
    if n != state.path_len:
        state.seen.clear()
        state.path_len = n
    out = []
    for sw, _ in r.items:
        state.seen[sw] = None
        state.ids_since += 1
        if len(state.seen) >= n:
            ids = list(state.seen)
            ordered = order_by_adjacency(ids, r.sink_id, adjacency) if adjacency else None
            out.append(TraceRecord(r.flow, ordered or ids, True, state.ids_since, r.timestamp,
                                   r.seq, n, ordered=ordered is not None))
            state.seen.clear()
            state.ids_since = 0
    return out


def collect_p4int(r: SinkReport) -> list:
    hops = [sw for sw, _ in r.items]
    return [TraceRecord(r.flow, hops, True, len(hops), r.timestamp, r.seq, r.path_len)]


# -- update detection ---------------------------------------------------------

@dataclass
class DetectorState:
    """Known path of one flow plus the bookkeeping for one detection mode.

    After an event fires the detector settles: it stays silent until two
    consecutive complete traces agree, and that trace becomes the new known
    path.  This keeps one event per enacted change even when the first trace
    after a change still mixes old and new hops.
    """

    scheme: Scheme
    known: Optional[list] = None
    known_set: frozenset = frozenset()
    settling: bool = False
    candidate: Optional[list] = None

    def set_known(self, hops) -> None:
        self.known = list(hops)
        self.known_set = frozenset(hops)


def _same_path(scheme: Scheme, a, b) -> bool:
    if scheme is Scheme.PINT_LITE:
        return len(a) == len(b) and set(a) == set(b)
    return list(a) == list(b)


def _early_mismatch(state: DetectorState, r: SinkReport) -> bool:
    known = state.known
    if known is None:
        return False
    if r.path_len != len(known):
        return True
    if state.scheme is Scheme.PLINT or state.scheme is Scheme.P4INT:
        return any(known[hop - 1] != sw for sw, hop in r.items)
    # without positions only an ID foreign to the known path counts; DLINT
    # collisions can drop or repeat on-path IDs but never add foreign ones
    return any(sw not in state.known_set for sw, _ in r.items)


def detect_update(state: DetectorState, mode: DetectionMode,
                  observation: Union[TraceRecord, SinkReport]) -> Optional[DetectionEvent]:
    if isinstance(observation, SinkReport):
        if mode is not DetectionMode.EARLY:
            return None
        mismatch = _early_mismatch(state, observation)
        if mismatch and state.known is not None and not state.settling:
            state.settling = True
            state.candidate = None
            return DetectionEvent(observation.flow, mode, observation.timestamp)
        return None

    trace = observation
    if not trace.complete:
        return None
    if state.known is None:
        state.set_known(trace.hops)
        return None
    if state.settling:
        if state.candidate is not None and _same_path(state.scheme, state.candidate, trace.hops):
            state.set_known(trace.hops)
            state.settling = False
            state.candidate = None
        else:
            state.candidate = list(trace.hops)
        return None
    if not _same_path(state.scheme, state.known, trace.hops):
        state.settling = True
        state.candidate = list(trace.hops)
        return DetectionEvent(trace.flow, mode, trace.completed_at)
    return None


# -- facade -------------------------------------------------------------------

class _FlowState:
    __slots__ = ("acc", "detectors")

    def __init__(self, scheme: Scheme, modes):
        if scheme is Scheme.DLINT:
            self.acc = DlintAccumulator()
        elif scheme is Scheme.PLINT:
            self.acc = PlintAccumulator()
        elif scheme is Scheme.PINT_LITE:
            self.acc = PintLiteAccumulator()
        else:
            self.acc = None
        self.detectors = {mode: DetectorState(scheme) for mode in modes}


class Collector:
    """Consumes sink reports in arrival order and keeps traces and detections."""

    def __init__(self, scheme: Scheme, adjacency=None,
                 modes=(DetectionMode.WHOLE_TRACE, DetectionMode.EARLY)):
        self.scheme = Scheme(scheme)
        self.adjacency = adjacency
        self.modes = tuple(DetectionMode(m) for m in modes)
        self.flows: dict = {}
        self.traces: list = []
        self.detections: list = []

    def ingest(self, r: SinkReport) -> list:
        fs = self.flows.get(r.flow)
        if fs is None:
            fs = self.flows[r.flow] = _FlowState(self.scheme, self.modes)
        for mode, det in fs.detectors.items():
            ev = detect_update(det, mode, r)
            if ev is not None:
                self.detections.append(ev)

        scheme = self.scheme
        if scheme is Scheme.DLINT:
            new = collect_dlint(fs.acc, r)
        elif scheme is Scheme.PLINT:
            new = collect_plint(fs.acc, r)
        elif scheme is Scheme.PINT_LITE:
            new = collect_pintlite(fs.acc, r, self.adjacency)
        else:
            new = collect_p4int(r)

        for trace in new:
            for mode, det in fs.detectors.items():
                ev = detect_update(det, mode, trace)
                if ev is not None:
                    self.detections.append(ev)
        self.traces.extend(new)
        return new

    def ingest_all(self, reports) -> "Collector":
        for r in reports:
            self.ingest(r)
        return self
