"""Simulator transport: one pipe-delimited ASCII line per transaction.

Layout (fields in order, ``-`` for an absent payload)::

    DUKPT1|<ksn:20 hex>|<pinblock:16 hex or ->|<data:even hex or ->|<scheme>

where ``<scheme>`` is ``DUKPT``, ``FIXED`` or ``MS``. Master/Session lines
append a sixth field carrying the wrapped session key (32 hex). Hex is
accepted in either case and always emitted uppercase.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import EmptyMessage, WireFormatError
from .key_hierarchy import Ksn, parse_ksn

WIRE_TAG = "DUKPT1"


class Scheme(Enum):
    DUKPT = "DUKPT"
    FIXED = "FIXED"
    MASTER_SESSION = "MS"


@dataclass(frozen=True)
class TransactionMessage:
    """What a terminal emits per transaction.

    Weight policy on the counter is deliberately *not* enforced here: the
    host must be able to receive (and reject) a forged overweight KSN, so
    only the payload-presence invariant is structural.
    """

    ksn: Ksn
    encrypted_pin_block: bytes | None = None
    encrypted_data: bytes | None = None
    scheme: Scheme = Scheme.DUKPT
    wrapped_session_key: bytes | None = None

    def __post_init__(self) -> None:
        if self.encrypted_pin_block is None and self.encrypted_data is None:
            raise EmptyMessage("message must carry a PIN block or data (or both)")
        if self.encrypted_pin_block is not None and len(self.encrypted_pin_block) != 8:
            raise WireFormatError("encrypted PIN block must be 8 bytes")
        if self.encrypted_data is not None and (
            not self.encrypted_data or len(self.encrypted_data) % 8
        ):
            raise WireFormatError("encrypted data must be a positive multiple of 8 bytes")


def _hex_or_dash(value: bytes | None) -> str:
    return value.hex().upper() if value is not None else "-"


def encode_wire(msg: TransactionMessage) -> str:
    fields = [
        WIRE_TAG,
        msg.ksn.hex,
        _hex_or_dash(msg.encrypted_pin_block),
        _hex_or_dash(msg.encrypted_data),
        msg.scheme.value,
    ]
    if msg.scheme is Scheme.MASTER_SESSION:
        if msg.wrapped_session_key is None:
            raise WireFormatError("MS message missing its wrapped session key")
        fields.append(msg.wrapped_session_key.hex().upper())
    return "|".join(fields)


_HEX_CHARS = frozenset("0123456789abcdefABCDEF")


def _parse_payload(field: str, name: str) -> bytes | None:
    if field == "-":
        return None
    # bytes.fromhex tolerates embedded whitespace; the wire format does not
    if not field or len(field) % 2 or not set(field) <= _HEX_CHARS:
        raise WireFormatError(f"{name} is not valid even-length hex: {field!r}")
    return bytes.fromhex(field)


def parse_wire(line: str) -> TransactionMessage:
    fields = line.strip().split("|")
    if not fields or fields[0] != WIRE_TAG:
        raise WireFormatError(f"line does not start with {WIRE_TAG}")
    if len(fields) < 5:
        raise WireFormatError(f"expected at least 5 fields, got {len(fields)}")
    try:
        ksn = parse_ksn(fields[1])
    except (ValueError, WireFormatError) as exc:
        raise WireFormatError(f"bad KSN field: {exc}") from exc
    pin_ct = _parse_payload(fields[2], "pinblock")
    if pin_ct is not None and len(pin_ct) != 8:
        raise WireFormatError("pinblock field must be 16 hex characters")
    data_ct = _parse_payload(fields[3], "data")
    try:
        scheme = Scheme(fields[4])
    except ValueError as exc:
        raise WireFormatError(f"unknown scheme tag {fields[4]!r}") from exc
    wrapped = None
    if scheme is Scheme.MASTER_SESSION:
        if len(fields) != 6:
            raise WireFormatError("MS line must carry exactly 6 fields")
        wrapped = _parse_payload(fields[5], "wrapped session key")
        if wrapped is None or len(wrapped) != 16:
            raise WireFormatError("wrapped session key must be 32 hex characters")
    elif len(fields) != 5:
        raise WireFormatError(f"expected exactly 5 fields, got {len(fields)}")
    try:
        return TransactionMessage(ksn, pin_ct, data_ct, scheme, wrapped)
    except EmptyMessage as exc:
        raise WireFormatError(str(exc)) from exc
