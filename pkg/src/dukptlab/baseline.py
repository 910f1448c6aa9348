"""The two predecessor key-management schemes, for side-by-side comparison.

Fixed key: one permanent shared key per terminal. Simple, and visibly weak:
the cipher is deterministic, so equal payloads produce equal ciphertexts
across transactions — the exact property per-transaction derivation removes.

Master/Session: a pre-shared key-encrypting key (the "master") wraps a
randomly generated session key which travels in-band with each message.
Fresh keys per transaction, but at the cost of transporting wrapped key
material and of the KEK being a long-lived secret on both sides.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass, field
from typing import Callable

from . import tdes
from .errors import EmptyPlaintext, LengthError
from .key_hierarchy import KeyRole, Ksn, TdeaKey


@dataclass
class FixedKeyTerminal:
    """A terminal welded to one key for its whole service life."""

    key: TdeaKey
    terminal_id: Ksn


def fixed_encrypt(terminal: FixedKeyTerminal, payload: bytes) -> bytes:
    """CBC under the permanent key; deterministic by construction."""
    if not payload:
        raise EmptyPlaintext("refusing to encrypt an empty payload")
    return tdes.cbc_encrypt(terminal.key.material, payload)


def fixed_decrypt(key: TdeaKey, ciphertext: bytes) -> bytes:
    """Host-side inverse; padding violations raise DecryptFailed."""
    return tdes.cbc_decrypt(key.material, ciphertext)


@dataclass
class MasterSessionContext:
    """Holder of the pre-shared KEK on the terminal side.

    ``random_source`` defaults to the OS CSPRNG; simulations inject a
    seeded source so their reports are reproducible.
    """

    kek: TdeaKey
    random_source: Callable[[int], bytes] = secrets.token_bytes
    current_session_key: TdeaKey | None = field(default=None, repr=False)


def ms_wrap_session(ctx: MasterSessionContext) -> tuple[bytes, TdeaKey]:
    """Generate a fresh session key and return (wrapped form, clear key).

    The wrapped form is the 16 key bytes TDEA-ECB'd under the KEK; only it
    goes on the wire.
    """
    material = ctx.random_source(16)
    if len(material) != 16:
        raise LengthError("random source must supply 16 bytes")
    session = TdeaKey.from_bytes(material, KeyRole.TRANSACTION)
    ctx.current_session_key = session
    wrapped = tdes.ecb_encrypt(ctx.kek.material, material)
    return wrapped, session


def ms_unwrap_session(kek: TdeaKey, wrapped: bytes) -> TdeaKey:
    """Host-side inverse of :func:`ms_wrap_session`."""
    if len(wrapped) != 16:
        raise LengthError(f"wrapped session key must be 16 bytes, got {len(wrapped)}")
    return TdeaKey.from_bytes(tdes.ecb_decrypt(kek.material, wrapped), KeyRole.TRANSACTION)
