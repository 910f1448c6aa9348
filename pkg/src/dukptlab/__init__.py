"""Per-transaction key management for payment terminals.

The package covers the full scheme end to end — pure derivation math
(:mod:`~dukptlab.key_hierarchy`), the terminal-side future-key machine
(:mod:`~dukptlab.terminal`), acquirer-side re-derivation and policy
(:mod:`~dukptlab.host`) — plus the predecessor schemes it replaced
(:mod:`~dukptlab.baseline`), format-0 PIN blocks
(:mod:`~dukptlab.pin_block`), and an endpoint-applicability and attack
harness (:mod:`~dukptlab.scenarios`).
"""

from .errors import DukptError
from .host import HostRegistry, HostVerdict, VerdictStatus
from .key_hierarchy import (
    COUNTER_SPACE,
    KeyRole,
    Ksn,
    TdeaKey,
    derive_ipek,
    derive_key_chain,
    next_counter,
    nrkgp,
    parse_ksn,
    remaining_counters,
    variant_data_key,
    variant_pin_key,
)
from .pin_block import decode_iso0, encode_iso0
from .scenarios import (
    BUILTIN_PROFILES,
    ApplicabilityStatus,
    ApplicabilityVerdict,
    EndpointProfile,
    clone_attack_demo,
    evaluate_applicability,
    run_simulation,
)
from .terminal import TerminalState, init_terminal
from .wire import Scheme, TransactionMessage, encode_wire, parse_wire

__version__ = "0.1.0"

__all__ = [
    "ApplicabilityStatus",
    "ApplicabilityVerdict",
    "BUILTIN_PROFILES",
    "COUNTER_SPACE",
    "DukptError",
    "EndpointProfile",
    "HostRegistry",
    "HostVerdict",
    "KeyRole",
    "Ksn",
    "Scheme",
    "TdeaKey",
    "TerminalState",
    "TransactionMessage",
    "VerdictStatus",
    "clone_attack_demo",
    "decode_iso0",
    "derive_ipek",
    "derive_key_chain",
    "encode_iso0",
    "encode_wire",
    "evaluate_applicability",
    "init_terminal",
    "next_counter",
    "nrkgp",
    "parse_ksn",
    "parse_wire",
    "remaining_counters",
    "run_simulation",
    "variant_data_key",
    "variant_pin_key",
]
