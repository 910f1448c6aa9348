"""Acquirer-side processing: key registry, re-derivation, and policy.

The registry is a software stand-in for the HSM that would normally hold
base derivation keys: BDKs go in through :meth:`HostRegistry.register_bdk`
and never come out through any reply, verdict, or log. For each incoming
message the host recomputes the device's initial key from the registered
BDK and the counter-zeroed KSN, folds the derivation chain to the
transaction key, and decrypts — the same route the terminal took, which is
the whole point of the scheme.

Two policies guard the counter: KSNs whose counter exceeds the weight bound
are rejected outright, and each device's accepted counters must be strictly
increasing (replay and reordering both surface as ``ReplayRejected``). The
replay policy can be disabled to demonstrate what cloning costs without it.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from enum import Enum

from .errors import (
    DecryptFailed,
    DuplicateKeySet,
    KeyRoleError,
    UnknownKeySet,
    WireFormatError,
)
from .key_hierarchy import (
    KeyRole,
    Ksn,
    MAX_COUNTER_WEIGHT,
    TdeaKey,
    counter_weight,
    derive_ipek,
    derive_key_chain,
)
from .pin_block import structure_ok
from .terminal import decrypt_data, decrypt_pin
from .wire import Scheme, TransactionMessage, parse_wire

KEY_SET_ID_BITS = 24


class VerdictStatus(Enum):
    ACCEPTED = "Accepted"
    REPLAY_REJECTED = "ReplayRejected"
    OVERWEIGHT_COUNTER_REJECTED = "OverweightCounterRejected"
    UNKNOWN_KEY_SET = "UnknownKeySet"
    DECRYPT_FAILED = "DecryptFailed"


@dataclass(frozen=True)
class HostVerdict:
    """Outcome of processing one message; clear fields only when accepted."""

    status: VerdictStatus
    derived_counter: int
    clear_pin_block: bytes | None = None
    clear_data: bytes | None = None

    @property
    def accepted(self) -> bool:
        return self.status is VerdictStatus.ACCEPTED


class HostRegistry:
    """BDK store plus per-device replay log.

    Message processing for distinct devices may run concurrently; the
    check-and-update of one device's counter is serialized under a
    per-device lock, and the decrypt happens inside it so an accept and its
    log update are atomic.
    """

    def __init__(self, enforce_replay: bool = True):
        self.enforce_replay = enforce_replay
        self._bdks: dict[int, TdeaKey] = {}
        self._device_log: dict[int, int] = {}
        self._admin_lock = threading.Lock()
        self._device_locks: dict[int, threading.Lock] = {}

    def register_bdk(self, key_set_id: int, bdk: TdeaKey, overwrite: bool = False) -> None:
        """Install the base derivation key serving one key-set identifier."""
        if not 0 <= key_set_id < (1 << KEY_SET_ID_BITS):
            raise ValueError(f"key-set id out of 24-bit range: {key_set_id:#x}")
        if bdk.role is not KeyRole.BASE_DERIVATION:
            raise KeyRoleError(f"registry stores BaseDerivation keys, got {bdk.role.value}")
        with self._admin_lock:
            if key_set_id in self._bdks and not overwrite:
                raise DuplicateKeySet(f"key set {key_set_id:06X} already registered")
            self._bdks[key_set_id] = bdk

    def known_key_set(self, key_set_id: int) -> bool:
        with self._admin_lock:
            return key_set_id in self._bdks

    def last_accepted_counter(self, initial_id: int) -> int:
        """Replay-log position for a device; 0 when never seen."""
        with self._admin_lock:
            return self._device_log.get(initial_id, 0)

    def _bdk_for(self, ksn: Ksn) -> TdeaKey | None:
        with self._admin_lock:
            return self._bdks.get(ksn.key_set_id)

    def _device_lock(self, initial_id: int) -> threading.Lock:
        with self._admin_lock:
            return self._device_locks.setdefault(initial_id, threading.Lock())

    def rederive_key(self, ksn: Ksn) -> TdeaKey:
        """Recompute the transaction key named by a KSN, with no side effects.

        Diagnostic path: does not consult or update the replay log. A zero
        counter yields the device's initial key.
        """
        bdk = self._bdk_for(ksn)
        if bdk is None:
            raise UnknownKeySet(f"no BDK for key set {ksn.key_set_id:06X}")
        return derive_key_chain(derive_ipek(bdk, ksn.base), ksn)

    def process_message(self, msg: TransactionMessage) -> HostVerdict:
        """Authenticate-by-derivation: re-derive, decrypt, enforce policy."""
        if msg.scheme is not Scheme.DUKPT:
            raise ValueError(f"host engine processes DUKPT messages, got {msg.scheme.value}")
        counter = msg.ksn.counter
        bdk = self._bdk_for(msg.ksn)
        if bdk is None:
            return HostVerdict(VerdictStatus.UNKNOWN_KEY_SET, counter)
        if counter_weight(counter) > MAX_COUNTER_WEIGHT:
            return HostVerdict(VerdictStatus.OVERWEIGHT_COUNTER_REJECTED, counter)
        device = msg.ksn.initial_id
        with self._device_lock(device):
            last = self._device_log.get(device, 0)
            # counter 0 names the initial key, never a transaction; it fails
            # the strictly-greater floor whatever the policy setting
            if counter == 0 or (self.enforce_replay and counter <= last):
                return HostVerdict(VerdictStatus.REPLAY_REJECTED, counter)
            key = derive_key_chain(derive_ipek(bdk, msg.ksn.base), msg.ksn)
            clear_pin = None
            if msg.encrypted_pin_block is not None:
                clear_pin = decrypt_pin(key, msg.encrypted_pin_block)
                if not structure_ok(clear_pin):
                    return HostVerdict(VerdictStatus.DECRYPT_FAILED, counter)
            clear_data = None
            if msg.encrypted_data is not None:
                try:
                    clear_data = decrypt_data(key, msg.encrypted_data)
                except DecryptFailed:
                    return HostVerdict(VerdictStatus.DECRYPT_FAILED, counter)
            self._device_log[device] = max(last, counter)
            return HostVerdict(VerdictStatus.ACCEPTED, counter, clear_pin, clear_data)

    def handle_wire_line(self, line: str) -> str:
        """Process one transport line and produce the reply line."""
        try:
            msg = parse_wire(line)
        except WireFormatError:
            return "ERR|MalformedMessage"
        if msg.scheme is not Scheme.DUKPT:
            return "ERR|UnsupportedScheme"
        verdict = self.process_message(msg)
        return format_reply(verdict)


def format_reply(verdict: HostVerdict) -> str:
    """Reply line: ``OK|<counter-decimal>`` or ``ERR|<status-name>``."""
    if verdict.accepted:
        return f"OK|{verdict.derived_counter}"
    return f"ERR|{verdict.status.value}"


def rederive_key(registry: HostRegistry, ksn: Ksn) -> TdeaKey:
    """Function-style alias for :meth:`HostRegistry.rederive_key`."""
    return registry.rederive_key(ksn)
