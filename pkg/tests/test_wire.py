"""Wire line codec: encode/parse round trips and rejection of malformed lines."""

import pytest
from hypothesis import given, strategies as st

from dukptlab.errors import EmptyMessage, WireFormatError
from dukptlab.key_hierarchy import parse_ksn
from dukptlab.wire import Scheme, TransactionMessage, encode_wire, parse_wire

KSN = parse_ksn("FFFF9876543210E00001")


def test_round_trip_both_payloads():
    msg = TransactionMessage(KSN, b"\x01" * 8, b"\x02" * 16)
    assert parse_wire(encode_wire(msg)) == msg


def test_round_trip_pin_only():
    msg = TransactionMessage(KSN, encrypted_pin_block=b"\xaa" * 8)
    line = encode_wire(msg)
    assert line == "DUKPT1|FFFF9876543210E00001|AAAAAAAAAAAAAAAA|-|DUKPT"
    assert parse_wire(line) == msg


def test_round_trip_data_only():
    msg = TransactionMessage(KSN, encrypted_data=b"\xbb" * 8)
    assert parse_wire(encode_wire(msg)) == msg


def test_round_trip_master_session():
    msg = TransactionMessage(
        KSN,
        encrypted_data=b"\xcc" * 8,
        scheme=Scheme.MASTER_SESSION,
        wrapped_session_key=b"\xdd" * 16,
    )
    line = encode_wire(msg)
    assert line.endswith("|MS|" + "DD" * 16)
    assert parse_wire(line) == msg


@given(st.binary(min_size=8, max_size=8), st.binary(min_size=8, max_size=40).filter(lambda b: len(b) % 8 == 0))
def test_round_trip_random_payloads(pin_ct, data_ct):
    msg = TransactionMessage(KSN, pin_ct, data_ct, Scheme.DUKPT)
    assert parse_wire(encode_wire(msg)) == msg


def test_lowercase_hex_accepted():
    line = "DUKPT1|ffff9876543210e00001|aaaaaaaaaaaaaaaa|-|DUKPT"
    msg = parse_wire(line)
    assert msg.ksn == KSN
    assert encode_wire(msg) == "DUKPT1|FFFF9876543210E00001|AAAAAAAAAAAAAAAA|-|DUKPT"


def test_message_requires_some_payload():
    with pytest.raises(EmptyMessage):
        TransactionMessage(KSN)


def test_message_validates_payload_shapes():
    with pytest.raises(WireFormatError):
        TransactionMessage(KSN, encrypted_pin_block=b"\x01" * 7)
    with pytest.raises(WireFormatError):
        TransactionMessage(KSN, encrypted_data=b"\x01" * 9)
    with pytest.raises(WireFormatError):
        TransactionMessage(KSN, encrypted_data=b"")


@pytest.mark.parametrize(
    "line",
    [
        "NOPE|FFFF9876543210E00001|AAAAAAAAAAAAAAAA|-|DUKPT",
        "DUKPT1|FFFF9876543210E00001|AAAAAAAAAAAAAAAA|-",
        "DUKPT1|FFFF9876543210E0000|AAAAAAAAAAAAAAAA|-|DUKPT",
        "DUKPT1|FFFF9876543210E00001|AAAAAAAAAAAAAAA|-|DUKPT",
        "DUKPT1|FFFF9876543210E00001|-|-|DUKPT",
        "DUKPT1|FFFF9876543210E00001|AAAAAAAAAAAAAAAA|ABC|DUKPT",
        "DUKPT1|FFFF9876543210E00001|AAAAAAAAAAAAAAAA|-|TLS",
        "DUKPT1|FFFF9876543210E00001|AAAAAAAAAAAAAAAA|-|MS",
        "DUKPT1|FFFF9876543210E00001|AAAAAAAAAAAAAAAA|-|DUKPT|EXTRA",
        "DUKPT1|FFFF9876543210E00001|AAAA AAAAAAAAAAAA|-|DUKPT",
        "DUKPT1|FFFF9876543210E00001|AAAAAAAAAAAAAAAA||DUKPT",
    ],
)
def test_parse_rejects_malformed(line):
    with pytest.raises(WireFormatError):
        parse_wire(line)
