"""Small drivers for pushing packets through switch objects without the event engine."""

from lwint.model import INITIAL_TTL, Direction, FlowKey, Packet, role_at

FLOW = FlowKey(0x0A000001, 0x0A000002, 40000, 80, 6)


def send(switches, flow=FLOW, seq=0, direction=Direction.FORWARD, header=None):
    """Carry one packet hop by hop along ``switches``; returns ``(actions, packet)``."""
    pkt = Packet(flow, direction, INITIAL_TTL, seq, 0, header)
    actions = []
    for hop, sw in enumerate(switches):
        role = role_at(hop, len(switches))
        if direction is Direction.FORWARD:
            actions.append(sw.process_forward(pkt, role))
        else:
            actions.append(sw.process_reverse(pkt, role))
        pkt.ttl -= 1
    return actions, pkt


def sink_report(switches, flow=FLOW, seq=0):
    actions, _ = send(switches, flow, seq)
    return actions[-1].report


def ack(switches, flow=FLOW, seq=0):
    """Reverse packet for ``flow`` travelling ``switches`` back to front."""
    return send(list(reversed(switches)), flow.reversed(), seq, Direction.REVERSE)
