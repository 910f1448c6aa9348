"""Host engine: registry, re-derivation, replay policy, wire handling."""

import threading

import pytest

from dukptlab.errors import CounterOverweight, DuplicateKeySet, KeyRoleError, UnknownKeySet
from dukptlab.host import HostRegistry, VerdictStatus, format_reply
from dukptlab.key_hierarchy import (
    KeyRole,
    Ksn,
    TdeaKey,
    derive_ipek,
    derive_key_chain,
    parse_ksn,
)
from dukptlab.pin_block import encode_iso0
from dukptlab.terminal import encrypt_pin, init_terminal
from dukptlab.wire import Scheme, TransactionMessage, encode_wire

from conftest import INTEROP_PAN, INTEROP_PIN, OTHER_BDK_HEX

CLEAR_BLOCK_ARGS = (INTEROP_PIN, INTEROP_PAN)


def _message(terminal, data=b"Sale: 42.00 USD"):
    return terminal.build_message(
        clear_pin_block=encode_iso0(*CLEAR_BLOCK_ARGS), data=data
    )


# --- registration ----------------------------------------------------------------

def test_register_then_process(registry, terminal):
    verdict = registry.process_message(_message(terminal))
    assert verdict.status is VerdictStatus.ACCEPTED
    assert verdict.clear_pin_block == encode_iso0(*CLEAR_BLOCK_ARGS)
    assert verdict.clear_data == b"Sale: 42.00 USD"


def test_unregistered_key_set(terminal):
    empty = HostRegistry()
    verdict = empty.process_message(_message(terminal))
    assert verdict.status is VerdictStatus.UNKNOWN_KEY_SET
    assert verdict.clear_pin_block is None and verdict.clear_data is None


def test_duplicate_registration_needs_overwrite(registry, bdk, initial_ksn):
    with pytest.raises(DuplicateKeySet):
        registry.register_bdk(initial_ksn.key_set_id, bdk)
    registry.register_bdk(initial_ksn.key_set_id, bdk, overwrite=True)


def test_register_validates_inputs(registry, bdk):
    with pytest.raises(ValueError):
        registry.register_bdk(1 << 24, bdk)
    with pytest.raises(KeyRoleError):
        registry.register_bdk(0x123456, TdeaKey.from_bytes(bytes(16), KeyRole.TRANSACTION))


def test_old_bdk_message_fails_decrypt(registry, terminal, initial_ksn):
    # message encrypted under the original BDK, registry re-keyed since
    msg = _message(terminal)
    other = TdeaKey.from_hex(OTHER_BDK_HEX, KeyRole.BASE_DERIVATION)
    registry.register_bdk(initial_ksn.key_set_id, other, overwrite=True)
    assert registry.process_message(msg).status is VerdictStatus.DECRYPT_FAILED


def test_pin_only_wrong_key_fails_structure_check(registry, initial_ksn):
    # hand-built PIN-only message under a foreign key chain; counter 2's
    # decryption shape is frozen to fail the structural check
    other = TdeaKey.from_hex(OTHER_BDK_HEX, KeyRole.BASE_DERIVATION)
    foreign_key = derive_key_chain(
        derive_ipek(other, initial_ksn), initial_ksn.with_counter(2)
    )
    pin_ct = encrypt_pin(foreign_key, encode_iso0(*CLEAR_BLOCK_ARGS))
    msg = TransactionMessage(initial_ksn.with_counter(2), encrypted_pin_block=pin_ct)
    assert registry.process_message(msg).status is VerdictStatus.DECRYPT_FAILED


# --- counter policy ----------------------------------------------------------------

def test_replay_same_message_rejected(registry, terminal):
    msg = _message(terminal)
    assert registry.process_message(msg).status is VerdictStatus.ACCEPTED
    assert registry.process_message(msg).status is VerdictStatus.REPLAY_REJECTED


def test_reordered_messages_rejected(registry, terminal):
    first = _message(terminal)
    second = _message(terminal)
    assert registry.process_message(second).status is VerdictStatus.ACCEPTED
    assert registry.process_message(first).status is VerdictStatus.REPLAY_REJECTED


def test_forged_overweight_counter_rejected(registry, initial_ksn):
    msg = TransactionMessage(
        initial_ksn.with_counter(0x7FF),  # eleven set bits
        encrypted_pin_block=b"\x42" * 8,
    )
    assert (
        registry.process_message(msg).status
        is VerdictStatus.OVERWEIGHT_COUNTER_REJECTED
    )


def test_replay_policy_can_be_disabled(bdk, ipek, initial_ksn):
    registry = HostRegistry(enforce_replay=False)
    registry.register_bdk(initial_ksn.key_set_id, bdk)
    terminal = init_terminal(ipek, initial_ksn)
    msg = _message(terminal)
    assert registry.process_message(msg).status is VerdictStatus.ACCEPTED
    assert registry.process_message(msg).status is VerdictStatus.ACCEPTED


@pytest.mark.parametrize("enforce", [True, False])
def test_counter_zero_message_always_rejected(bdk, initial_ksn, enforce):
    # counter 0 names the initial key; no transaction may carry it
    registry = HostRegistry(enforce_replay=enforce)
    registry.register_bdk(initial_ksn.key_set_id, bdk)
    msg = TransactionMessage(initial_ksn, encrypted_pin_block=b"\x42" * 8)
    assert registry.process_message(msg).status is VerdictStatus.REPLAY_REJECTED


def test_rejected_messages_leave_no_log_entry(registry, terminal, initial_ksn):
    msg = _message(terminal)
    tampered = TransactionMessage(
        msg.ksn, msg.encrypted_pin_block, b"\x00" * 16, Scheme.DUKPT
    )
    assert registry.process_message(tampered).status is VerdictStatus.DECRYPT_FAILED
    assert registry.last_accepted_counter(initial_ksn.initial_id) == 0
    assert registry.process_message(msg).status is VerdictStatus.ACCEPTED
    assert registry.last_accepted_counter(initial_ksn.initial_id) == msg.ksn.counter


def test_process_message_requires_dukpt_scheme(registry, initial_ksn):
    msg = TransactionMessage(
        initial_ksn.with_counter(1), encrypted_data=b"\x00" * 8, scheme=Scheme.FIXED
    )
    with pytest.raises(ValueError):
        registry.process_message(msg)


# --- re-derivation -------------------------------------------------------------------

def test_rederive_matches_terminal_sweep(registry, terminal):
    for _ in range(300):
        ksn, key = terminal.next_transaction_key()
        assert registry.rederive_key(ksn) == key


def test_rederive_counter_zero_gives_initial_key(registry, initial_ksn, ipek):
    assert registry.rederive_key(initial_ksn) == ipek


def test_rederive_errors(registry, initial_ksn):
    with pytest.raises(UnknownKeySet):
        registry.rederive_key(parse_ksn("0000000000000000000A").with_counter(1))
    with pytest.raises(CounterOverweight):
        registry.rederive_key(initial_ksn.with_counter(0x7FF))


def test_rederive_has_no_replay_side_effects(registry, terminal, initial_ksn):
    ksn, _ = terminal.next_transaction_key()
    registry.rederive_key(ksn)
    assert registry.last_accepted_counter(initial_ksn.initial_id) == 0


# --- wire handling -------------------------------------------------------------------

def test_wire_accept_reply(registry, terminal):
    msg = _message(terminal)
    assert registry.handle_wire_line(encode_wire(msg)) == f"OK|{msg.ksn.counter}"


def test_wire_error_replies(registry, terminal):
    line = encode_wire(_message(terminal))
    assert registry.handle_wire_line(line).startswith("OK|")
    assert registry.handle_wire_line(line) == "ERR|ReplayRejected"
    assert registry.handle_wire_line("garbage") == "ERR|MalformedMessage"
    fixed_line = encode_wire(
        TransactionMessage(
            parse_ksn("00000000000000000001"),
            encrypted_data=b"\x00" * 8,
            scheme=Scheme.FIXED,
        )
    )
    assert registry.handle_wire_line(fixed_line) == "ERR|UnsupportedScheme"


def test_format_reply_names(registry, initial_ksn):
    msg = TransactionMessage(
        initial_ksn.with_counter(0x7FF), encrypted_pin_block=b"\x42" * 8
    )
    assert format_reply(registry.process_message(msg)) == "ERR|OverweightCounterRejected"


def test_no_bdk_bytes_in_any_reply(registry, terminal, bdk):
    replies = []
    for _ in range(20):
        replies.append(registry.handle_wire_line(encode_wire(_message(terminal))))
    replies.append(registry.handle_wire_line("garbage"))
    blob = "\n".join(replies).upper()
    assert bdk.hex not in blob
    assert bdk.hex.lower() not in blob.lower()


# --- concurrency ----------------------------------------------------------------------

def test_concurrent_devices_process_cleanly(bdk):
    registry = HostRegistry()
    devices = []
    for device_index in range(4):
        value = (0xABCDEF << 56) | (device_index << 21)
        ksn = Ksn(value.to_bytes(10, "big"))
        if device_index == 0:  # one key set serves the whole fleet
            registry.register_bdk(ksn.key_set_id, bdk)
        terminal = init_terminal(derive_ipek(bdk, ksn), ksn)
        lines = [encode_wire(_message(terminal)) for _ in range(50)]
        devices.append(lines)

    results: dict[int, list[str]] = {}

    def run(index: int, lines: list[str]) -> None:
        results[index] = [registry.handle_wire_line(line) for line in lines]

    threads = [
        threading.Thread(target=run, args=(i, lines)) for i, lines in enumerate(devices)
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    for replies in results.values():
        assert all(reply.startswith("OK|") for reply in replies)
