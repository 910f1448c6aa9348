"""Raw TDEA (triple DES) block operations and message padding.

Everything here works on plain ``bytes``; key objects and role policy live
one layer up in :mod:`dukptlab.key_hierarchy`. Keys are double-length
(16 bytes) unless noted. Single-DES is exercised through the EDE construction
with three equal subkeys, which is the identical permutation.

Padding is the 0x80-marker scheme: append one 0x80 byte, then 0x00 bytes up
to the next 8-byte boundary. It is mandatory, so every ciphertext decrypts
to a checkable shape.
"""

from cryptography.hazmat.decrepit.ciphers.algorithms import TripleDES
from cryptography.hazmat.primitives.ciphers import Cipher, modes

from .errors import DecryptFailed, EmptyPlaintext, LengthError

BLOCK_SIZE = 8
ZERO_IV = bytes(BLOCK_SIZE)


def xor_bytes(a: bytes, b: bytes) -> bytes:
    if len(a) != len(b):
        raise LengthError(f"xor operands differ in length: {len(a)} vs {len(b)}")
    return bytes(x ^ y for x, y in zip(a, b))


def _expand(key: bytes) -> bytes:
    # always hand a full 24-byte bundle to the backend
    if len(key) == 16:
        return key + key[:8]
    if len(key) == 8:
        return key * 3
    if len(key) == 24:
        return key
    raise LengthError(f"TDEA key must be 8, 16 or 24 bytes, got {len(key)}")


def encrypt_block(key: bytes, block: bytes) -> bytes:
    """TDEA-ECB of a single 8-byte block."""
    if len(block) != BLOCK_SIZE:
        raise LengthError(f"block must be {BLOCK_SIZE} bytes, got {len(block)}")
    enc = Cipher(TripleDES(_expand(key)), modes.ECB()).encryptor()
    return enc.update(block) + enc.finalize()


def decrypt_block(key: bytes, block: bytes) -> bytes:
    """Inverse of :func:`encrypt_block`."""
    if len(block) != BLOCK_SIZE:
        raise LengthError(f"block must be {BLOCK_SIZE} bytes, got {len(block)}")
    dec = Cipher(TripleDES(_expand(key)), modes.ECB()).decryptor()
    return dec.update(block) + dec.finalize()


def des_encrypt_block(key8: bytes, block: bytes) -> bytes:
    """Single-DES of one block (K1=K2=K3 degenerate TDEA)."""
    if len(key8) != 8:
        raise LengthError(f"DES key must be 8 bytes, got {len(key8)}")
    return encrypt_block(key8 * 3, block)


def ecb_encrypt(key: bytes, data: bytes) -> bytes:
    """TDEA-ECB over a whole-block payload (used for key wrapping)."""
    if not data or len(data) % BLOCK_SIZE:
        raise LengthError("ECB payload must be a positive multiple of 8 bytes")
    enc = Cipher(TripleDES(_expand(key)), modes.ECB()).encryptor()
    return enc.update(data) + enc.finalize()


def ecb_decrypt(key: bytes, data: bytes) -> bytes:
    if not data or len(data) % BLOCK_SIZE:
        raise LengthError("ECB payload must be a positive multiple of 8 bytes")
    dec = Cipher(TripleDES(_expand(key)), modes.ECB()).decryptor()
    return dec.update(data) + dec.finalize()


def pad(data: bytes) -> bytes:
    """Append the 0x80 marker and zero-fill to a block boundary."""
    padded = data + b"\x80"
    short = len(padded) % BLOCK_SIZE
    if short:
        padded += bytes(BLOCK_SIZE - short)
    return padded


def unpad(data: bytes) -> bytes:
    """Strip marker padding; raise :class:`DecryptFailed` if it is absent."""
    if not data or len(data) % BLOCK_SIZE:
        raise DecryptFailed("padded data must be a positive multiple of 8 bytes")
    i = len(data)
    while i > 0 and data[i - 1] == 0x00:
        i -= 1
    if i == 0 or data[i - 1] != 0x80 or len(data) - i >= BLOCK_SIZE:
        raise DecryptFailed("padding marker missing or malformed")
    return data[: i - 1]


def cbc_encrypt(key: bytes, plaintext: bytes, iv: bytes = ZERO_IV) -> bytes:
    """TDEA-CBC with mandatory marker padding applied first."""
    if not plaintext:
        raise EmptyPlaintext("refusing to encrypt an empty payload")
    enc = Cipher(TripleDES(_expand(key)), modes.CBC(iv)).encryptor()
    return enc.update(pad(plaintext)) + enc.finalize()


def cbc_decrypt(key: bytes, ciphertext: bytes, iv: bytes = ZERO_IV) -> bytes:
    """Inverse of :func:`cbc_encrypt`; padding violations raise DecryptFailed."""
    if not ciphertext or len(ciphertext) % BLOCK_SIZE:
        raise DecryptFailed("ciphertext must be a positive multiple of 8 bytes")
    dec = Cipher(TripleDES(_expand(key)), modes.CBC(iv)).decryptor()
    return unpad(dec.update(ciphertext) + dec.finalize())
