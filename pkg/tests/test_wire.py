from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lwint.errors import InvariantViolation, MalformedHeader, MalformedSlot, TruncatedHeader
from lwint.model import FlowKey, Scheme
from lwint.wire import (EMPTY, INIT, MAX_SWITCH_ID, PROBE, RESET, DlintHeader, P4IntHeader,
                        PintLiteHeader, PlintHeader, decode_header, encode_header, is_signal,
                        is_switch_id, is_valid_slot, overhead_bytes)

VECTORS = Path(__file__).parent / "fixtures" / "wire_vectors.txt"
NAMED = {"INIT": INIT, "RESET": RESET, "PROBE": PROBE, "EMPTY": EMPTY}


def _word(text):
    return NAMED[text] if text in NAMED else int(text, 0)


def _header_from_fields(scheme, v, fields):
    kv = dict(f.split("=", 1) for f in fields)
    if scheme is Scheme.DLINT:
        return DlintHeader([_word(s) for s in kv["slots"].split(",")])
    if scheme is Scheme.PLINT:
        pairs = [tuple(_word(x) for x in p.split(":")) for p in kv["slots"].split(",")]
        return PlintHeader(int(kv["init_ttl"]), pairs)
    if scheme is Scheme.P4INT:
        return P4IntHeader(v, [_word(s) for s in kv["stack"].split(",")])
    return PintLiteHeader(_word(kv["sw_id"]))


def _vectors():
    for line in VECTORS.read_text().splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        scheme, v, hexstr, *fields = line.split()
        scheme, v = Scheme(scheme), int(v)
        yield pytest.param(scheme, v, bytes.fromhex(hexstr), _header_from_fields(scheme, v, fields),
                           id=f"{scheme.value}-{hexstr[:16]}")


@pytest.mark.parametrize("scheme,v,raw,header", list(_vectors()))
def test_golden_vectors(scheme, v, raw, header):
    assert encode_header(header) == raw
    assert decode_header(raw, scheme, v) == header


# -- examples ----------------------------------------------------------------

def test_dlint_init_slot():
    assert encode_header(DlintHeader([INIT])) == b"\xff\xff\xff\xff"


def test_plint_single_slot_layout():
    assert encode_header(PlintHeader(64, [(7, 3)])) == bytes.fromhex("400000000703")


def test_p4int_five_hops_five_values_is_116_bytes():
    h = P4IntHeader(5)
    for sw in range(1, 6):
        h.push(sw)
    raw = encode_header(h)
    assert len(raw) == 116
    assert decode_header(raw, Scheme.P4INT, 5).switch_ids() == [1, 2, 3, 4, 5]


def test_p4int_twenty_byte_stack_at_v5_is_one_hop():
    h = P4IntHeader(5)
    h.push(42)
    raw = encode_header(h)
    assert len(raw) - 16 == 20
    assert decode_header(raw, Scheme.P4INT, 5).hop_count == 1


def test_truncated_dlint():
    with pytest.raises(TruncatedHeader):
        decode_header(b"\x00\x00\x01", Scheme.DLINT, 1)


@pytest.mark.parametrize("scheme,v,size", [(Scheme.PLINT, 2, 10), (Scheme.P4INT, 1, 19),
                                           (Scheme.P4INT, 2, 16 + 4), (Scheme.PINT_LITE, 1, 5)])
def test_wrong_length(scheme, v, size):
    with pytest.raises(TruncatedHeader):
        decode_header(bytes(size), scheme, v)


def test_plint_signal_in_slot_is_malformed():
    raw = bytes.fromhex("40") + INIT.to_bytes(4, "big") + b"\x02"
    with pytest.raises(MalformedSlot):
        decode_header(raw, Scheme.PLINT, 1)


def test_plint_hop_zero_is_malformed():
    with pytest.raises(MalformedSlot):
        decode_header(bytes.fromhex("400000000700"), Scheme.PLINT, 1)


def test_dlint_reserved_gap_value_rejected():
    # 0xFFFFFFF1..0xFFFFFFFC are neither IDs nor signals
    with pytest.raises(InvariantViolation):
        encode_header(DlintHeader([0xFFFFFFF5]))
    with pytest.raises(MalformedSlot):
        decode_header(b"\xff\xff\xff\xf5", Scheme.DLINT, 1)


@pytest.mark.parametrize("bad", [INIT, RESET, EMPTY])
def test_signal_where_switch_id_required(bad):
    with pytest.raises(InvariantViolation):
        encode_header(PlintHeader(64, [(bad, 1)]))
    with pytest.raises(InvariantViolation):
        encode_header(PintLiteHeader(bad))
    with pytest.raises(InvariantViolation):
        encode_header(P4IntHeader(1, [bad]))


def test_p4int_metadata_mismatch():
    raw = bytearray(encode_header(P4IntHeader(1, [1, 2])))
    raw[2] = 5  # hop count disagrees with the stack
    with pytest.raises(MalformedHeader):
        decode_header(bytes(raw), Scheme.P4INT, 1)


def test_slot_classification():
    assert is_signal(INIT) and is_signal(RESET) and is_signal(PROBE)
    assert not is_switch_id(EMPTY) and not is_switch_id(INIT)
    assert is_switch_id(1) and is_switch_id(MAX_SWITCH_ID) and not is_switch_id(MAX_SWITCH_ID + 1)
    assert is_valid_slot(EMPTY) and not is_valid_slot(0xFFFFFFF8)


@pytest.mark.parametrize("scheme,hops,v,expected", [
    (Scheme.P4INT, 5, 1, 36), (Scheme.P4INT, 5, 5, 116),
    (Scheme.DLINT, 5, 1, 4), (Scheme.DLINT, 5, 5, 20), (Scheme.DLINT, 9, 1, 4),
    (Scheme.PLINT, 5, 1, 6), (Scheme.PLINT, 5, 5, 26),
    (Scheme.PINT_LITE, 7, 1, 4),
])
def test_overhead_table(scheme, hops, v, expected):
    assert overhead_bytes(scheme, hops, v) == expected


def test_overhead_rejects_zero():
    with pytest.raises(ValueError):
        overhead_bytes(Scheme.DLINT, 0, 1)
    with pytest.raises(ValueError):
        overhead_bytes(Scheme.PLINT, 3, 0)


# -- properties --------------------------------------------------------------

switch_ids = st.integers(1, MAX_SWITCH_ID)
dlint_slots = st.one_of(switch_ids, st.sampled_from([EMPTY, INIT, RESET, PROBE]))


@st.composite
def headers(draw):
    kind = draw(st.sampled_from(list(Scheme)))
    v = draw(st.integers(1, 8))
    if kind is Scheme.DLINT:
        return kind, v, DlintHeader(draw(st.lists(dlint_slots, min_size=v, max_size=v)))
    if kind is Scheme.PLINT:
        pairs = draw(st.lists(st.tuples(switch_ids, st.integers(1, 255)), min_size=v, max_size=v))
        return kind, v, PlintHeader(draw(st.integers(0, 255)), pairs)
    if kind is Scheme.P4INT:
        h = P4IntHeader(v)
        for sw in draw(st.lists(switch_ids, min_size=0, max_size=12)):
            h.push(sw)
        return kind, v, h
    return kind, 1, PintLiteHeader(draw(switch_ids))


@given(headers())
def test_round_trip(case):
    scheme, v, h = case
    raw = encode_header(h)
    assert decode_header(raw, scheme, v) == h
    assert encode_header(decode_header(raw, scheme, v)) == raw


@given(st.sampled_from(list(Scheme)), st.integers(1, 8), st.integers(1, 64))
def test_encoded_length_matches_overhead(scheme, v, hops):
    if scheme is Scheme.DLINT:
        h = DlintHeader.empty(v)
    elif scheme is Scheme.PLINT:
        h = PlintHeader(64, [(1, 1)] * v)
    elif scheme is Scheme.P4INT:
        h = P4IntHeader(v)
        for sw in range(1, hops + 1):
            h.push(sw)
    else:
        h = PintLiteHeader(1)
    assert len(encode_header(h)) == h.size() == overhead_bytes(scheme, hops, v)


@given(st.integers(1, 8), st.integers(1, 200))
def test_overhead_shape_in_hops(v, hops):
    for scheme in (Scheme.DLINT, Scheme.PLINT, Scheme.PINT_LITE):
        assert overhead_bytes(scheme, hops, v) == overhead_bytes(scheme, hops + 1, v)
    assert overhead_bytes(Scheme.P4INT, hops + 1, v) - overhead_bytes(Scheme.P4INT, hops, v) == 4 * v


@given(st.integers(0, 2**32 - 1), st.integers(0, 2**32 - 1), st.integers(0, 0xFFFF),
       st.integers(0, 0xFFFF), st.integers(0, 0xFF))
def test_flowkey_serialization(src, dst, sport, dport, proto):
    key = FlowKey(src, dst, sport, dport, proto)
    assert len(key.packed) == 13
    assert FlowKey.unpack(key.packed) == key
    assert key.reversed().reversed() == key
    assert hash(FlowKey(src, dst, sport, dport, proto)) == hash(key)


def test_flowkey_range_checked():
    with pytest.raises(ValueError):
        FlowKey(0, 0, 70000, 0)
