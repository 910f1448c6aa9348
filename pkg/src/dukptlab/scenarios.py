"""Endpoint applicability analysis and end-to-end scheme simulations.

Per-transaction key derivation needs a pre-established cryptographic
relationship between the endpoint and the host: an initial key injected
into storage the endpoint actually controls. Whether that exists, and who
you depend on for it, is a property of the endpoint:

* certified payment hardware: yes, unconditionally;
* a SIM/UICC secure element: yes, but the mobile network operator owns it;
* an embedded secure element: yes, if the device manufacturer opens it up;
* a micro-SD secure element: yes, but the wallet provider must distribute
  (and the user must carry) the card;
* a plain browser: no — there is nowhere to keep the initial key;
* a cloud wallet, where the *server* initiates payment: ruled out — the
  transacting party has no device-side key at all, and any workaround
  reintroduces one of the dependencies above.

:func:`evaluate_applicability` encodes those rules deterministically, one
reason code each, and gates the simulator: no run ever installs an initial
key into a profile with no secure storage.
"""

from __future__ import annotations

import copy
import random
import time
from dataclasses import dataclass, field
from enum import Enum

from . import tdes
from .baseline import (
    FixedKeyTerminal,
    MasterSessionContext,
    fixed_decrypt,
    fixed_encrypt,
    ms_unwrap_session,
    ms_wrap_session,
)
from .errors import DecryptFailed, ProfileFormatError, ProfileIncompatible
from .host import HostRegistry, VerdictStatus, format_reply
from .key_hierarchy import COUNTER_MASK, KeyRole, Ksn, TdeaKey, derive_ipek
from .pin_block import encode_iso0
from .terminal import TerminalState, init_terminal
from .wire import Scheme, TransactionMessage, encode_wire, parse_wire


class SecureStorage(Enum):
    CERTIFIED_DEVICE = "CertifiedDevice"
    SIM_SE = "SimSE"
    EMBEDDED_SE = "EmbeddedSE"
    MICRO_SD_SE = "MicroSdSE"
    NONE = "None"


class TransactionOrigin(Enum):
    DEVICE = "Device"
    SERVER = "Server"


class Dependency(Enum):
    MOBILE_NETWORK_OPERATOR = "MobileNetworkOperator"
    DEVICE_MANUFACTURER = "DeviceManufacturer"
    WALLET_PROVIDER = "WalletProvider"


class ApplicabilityStatus(Enum):
    APPLICABLE = "Applicable"
    APPLICABLE_WITH_DEPENDENCY = "ApplicableWithDependency"
    NOT_APPLICABLE = "NotApplicable"
    RULED_OUT = "RuledOut"


class ReasonCode(Enum):
    NO_SECURE_IPEK_STORAGE = "NoSecureIpekStorage"
    SERVER_INITIATED_NO_DEVICE_KEY_RELATIONSHIP = "ServerInitiatedNoDeviceKeyRelationship"
    DEPENDENCY_NOT_DESIRABLE = "DependencyNotDesirable"
    MOBILE_NETWORK_OPERATOR_DEPENDENCY = "MobileNetworkOperatorDependency"
    DEVICE_MANUFACTURER_DEPENDENCY = "DeviceManufacturerDependency"
    WALLET_PROVIDER_DEPENDENCY = "WalletProviderDependency"


@dataclass(frozen=True)
class EndpointProfile:
    """A transaction endpoint as the verdict engine sees it."""

    name: str
    secure_key_storage: SecureStorage
    transaction_origin: TransactionOrigin
    dependencies: frozenset[Dependency] = frozenset()


@dataclass(frozen=True)
class ApplicabilityVerdict:
    status: ApplicabilityStatus
    reasons: tuple[ReasonCode, ...]
    dependency_set: frozenset[Dependency]

    @property
    def permits_dukpt(self) -> bool:
        return self.status in (
            ApplicabilityStatus.APPLICABLE,
            ApplicabilityStatus.APPLICABLE_WITH_DEPENDENCY,
        )


_SE_RULES = {
    SecureStorage.SIM_SE: (
        Dependency.MOBILE_NETWORK_OPERATOR,
        ReasonCode.MOBILE_NETWORK_OPERATOR_DEPENDENCY,
    ),
    SecureStorage.EMBEDDED_SE: (
        Dependency.DEVICE_MANUFACTURER,
        ReasonCode.DEVICE_MANUFACTURER_DEPENDENCY,
    ),
    SecureStorage.MICRO_SD_SE: (
        Dependency.WALLET_PROVIDER,
        ReasonCode.WALLET_PROVIDER_DEPENDENCY,
    ),
}


def evaluate_applicability(profile: EndpointProfile) -> ApplicabilityVerdict:
    """Deterministic verdict for one endpoint profile.

    Rule order: server-initiated transactions are ruled out before anything
    else (the initiating party holds no device key, whatever the device's
    storage looks like); then endpoints with no secure storage are not
    applicable; then each secure-element form factor is applicable with its
    characteristic dependency; certified devices are applicable outright.
    """
    deps = set(profile.dependencies)
    if profile.transaction_origin is TransactionOrigin.SERVER:
        se_rule = _SE_RULES.get(profile.secure_key_storage)
        if se_rule:
            deps.add(se_rule[0])
        return ApplicabilityVerdict(
            ApplicabilityStatus.RULED_OUT,
            (
                ReasonCode.SERVER_INITIATED_NO_DEVICE_KEY_RELATIONSHIP,
                ReasonCode.DEPENDENCY_NOT_DESIRABLE,
            ),
            frozenset(deps),
        )
    if profile.secure_key_storage is SecureStorage.NONE:
        return ApplicabilityVerdict(
            ApplicabilityStatus.NOT_APPLICABLE,
            (ReasonCode.NO_SECURE_IPEK_STORAGE,),
            frozenset(deps),
        )
    se_rule = _SE_RULES.get(profile.secure_key_storage)
    if se_rule:
        dependency, reason = se_rule
        deps.add(dependency)
        return ApplicabilityVerdict(
            ApplicabilityStatus.APPLICABLE_WITH_DEPENDENCY, (reason,), frozenset(deps)
        )
    return ApplicabilityVerdict(ApplicabilityStatus.APPLICABLE, (), frozenset(deps))


BUILTIN_PROFILES: dict[str, EndpointProfile] = {
    p.name: p
    for p in (
        EndpointProfile("pos", SecureStorage.CERTIFIED_DEVICE, TransactionOrigin.DEVICE),
        EndpointProfile("sim_se", SecureStorage.SIM_SE, TransactionOrigin.DEVICE),
        EndpointProfile("embedded_se", SecureStorage.EMBEDDED_SE, TransactionOrigin.DEVICE),
        EndpointProfile("micro_sd", SecureStorage.MICRO_SD_SE, TransactionOrigin.DEVICE),
        EndpointProfile("browser", SecureStorage.NONE, TransactionOrigin.DEVICE),
        EndpointProfile("cloud_wallet", SecureStorage.NONE, TransactionOrigin.SERVER),
    )
}


_STORAGE_TOKENS = {
    "certifieddevice": SecureStorage.CERTIFIED_DEVICE,
    "certified_device": SecureStorage.CERTIFIED_DEVICE,
    "certified": SecureStorage.CERTIFIED_DEVICE,
    "simse": SecureStorage.SIM_SE,
    "sim_se": SecureStorage.SIM_SE,
    "sim": SecureStorage.SIM_SE,
    "embeddedse": SecureStorage.EMBEDDED_SE,
    "embedded_se": SecureStorage.EMBEDDED_SE,
    "embedded": SecureStorage.EMBEDDED_SE,
    "microsdse": SecureStorage.MICRO_SD_SE,
    "micro_sd_se": SecureStorage.MICRO_SD_SE,
    "micro_sd": SecureStorage.MICRO_SD_SE,
    "microsd": SecureStorage.MICRO_SD_SE,
    "none": SecureStorage.NONE,
}

_ORIGIN_TOKENS = {
    "device": TransactionOrigin.DEVICE,
    "server": TransactionOrigin.SERVER,
}

_DEPENDENCY_TOKENS = {
    "mobilenetworkoperator": Dependency.MOBILE_NETWORK_OPERATOR,
    "operator": Dependency.MOBILE_NETWORK_OPERATOR,
    "mno": Dependency.MOBILE_NETWORK_OPERATOR,
    "devicemanufacturer": Dependency.DEVICE_MANUFACTURER,
    "manufacturer": Dependency.DEVICE_MANUFACTURER,
    "walletprovider": Dependency.WALLET_PROVIDER,
    "wallet_provider": Dependency.WALLET_PROVIDER,
    "wallet": Dependency.WALLET_PROVIDER,
}


def parse_profile_line(line: str) -> EndpointProfile:
    """Parse ``name,storage,origin[,dep1+dep2]``; tokens are case-insensitive."""
    parts = [p.strip() for p in line.split(",")]
    if len(parts) not in (3, 4) or not parts[0]:
        raise ProfileFormatError(f"expected name,storage,origin[,deps]: {line!r}")
    storage = _STORAGE_TOKENS.get(parts[1].casefold())
    if storage is None:
        raise ProfileFormatError(f"unknown storage token {parts[1]!r}")
    origin = _ORIGIN_TOKENS.get(parts[2].casefold())
    if origin is None:
        raise ProfileFormatError(f"unknown origin token {parts[2]!r}")
    deps: set[Dependency] = set()
    if len(parts) == 4 and parts[3] not in ("", "-"):
        for token in parts[3].split("+"):
            dep = _DEPENDENCY_TOKENS.get(token.strip().casefold())
            if dep is None:
                raise ProfileFormatError(f"unknown dependency token {token!r}")
            deps.add(dep)
    return EndpointProfile(parts[0], storage, origin, frozenset(deps))


def load_profiles_file(path: str) -> list[EndpointProfile]:
    """One profile per line; ``#`` comments and blank lines are skipped."""
    profiles = []
    with open(path, encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            try:
                profiles.append(parse_profile_line(stripped))
            except ProfileFormatError as exc:
                raise ProfileFormatError(f"{path}:{lineno}: {exc}") from exc
    return profiles


def applicability_table(profiles: list[EndpointProfile] | None = None) -> str:
    """Plain-text verdict table, one row per profile."""
    profiles = list(BUILTIN_PROFILES.values()) if profiles is None else profiles
    rows = [("profile", "storage", "origin", "status", "dependencies", "reasons")]
    for profile in profiles:
        verdict = evaluate_applicability(profile)
        rows.append(
            (
                profile.name,
                profile.secure_key_storage.value,
                profile.transaction_origin.value,
                verdict.status.value,
                "+".join(sorted(d.value for d in verdict.dependency_set)) or "-",
                "+".join(r.value for r in verdict.reasons) or "-",
            )
        )
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    return "\n".join(
        "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
        for row in rows
    )


@dataclass
class SimulationReport:
    """Counts from one simulation run.

    ``elapsed_seconds`` is measured wall time and is deliberately excluded
    from both renderings so identical (scheme, profile, count, seed) runs
    produce byte-identical output.
    """

    scheme: Scheme
    profile: str
    transactions: int
    status_counts: dict[VerdictStatus, int]
    distinct_keys: int
    ciphertext_reuse: bool
    elapsed_seconds: float = field(default=0.0, compare=False)

    @property
    def accepted(self) -> int:
        return self.status_counts.get(VerdictStatus.ACCEPTED, 0)

    def _fields(self) -> list[tuple[str, str]]:
        pairs = [
            ("scheme", self.scheme.value),
            ("profile", self.profile),
            ("transactions", str(self.transactions)),
        ]
        for status in VerdictStatus:
            label = "accepted" if status is VerdictStatus.ACCEPTED else f"rejected_{status.value}"
            pairs.append((label, str(self.status_counts.get(status, 0))))
        pairs.append(("distinct_keys", str(self.distinct_keys)))
        pairs.append(("ciphertext_reuse", "yes" if self.ciphertext_reuse else "no"))
        return pairs

    def record_line(self) -> str:
        """Machine-readable ``field=value`` pairs, one record per line."""
        return " ".join(f"{k}={v}" for k, v in self._fields())

    def table(self) -> str:
        pairs = self._fields()
        width = max(len(k) for k, _ in pairs)
        return "\n".join(f"{k.ljust(width)}  {v}" for k, v in pairs)


def _random_initial_ksn(rng: random.Random) -> Ksn:
    value = int.from_bytes(rng.randbytes(10), "big") & ~COUNTER_MASK
    return Ksn(value.to_bytes(10, "big"))


def _provision_dukpt(rng: random.Random, registry: HostRegistry) -> TerminalState:
    bdk = TdeaKey.from_bytes(rng.randbytes(16), KeyRole.BASE_DERIVATION)
    initial_ksn = _random_initial_ksn(rng)
    registry.register_bdk(initial_ksn.key_set_id, bdk)
    return init_terminal(derive_ipek(bdk, initial_ksn), initial_ksn)


def run_simulation(
    scheme: Scheme,
    profile: EndpointProfile,
    count: int,
    seed: int,
) -> SimulationReport:
    """Drive ``count`` terminal-to-host transactions over the wire format.

    The applicability verdict gates per-transaction derivation: profiles it
    does not permit never receive an initial key and the run refuses with
    :class:`ProfileIncompatible`. Every transaction in a run carries the
    same (seed-derived) payload, which is what makes the fixed-key scheme's
    ciphertext reuse — and its absence under per-transaction keys —
    directly observable in the report.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if scheme is Scheme.DUKPT:
        verdict = evaluate_applicability(profile)
        if not verdict.permits_dukpt:
            raise ProfileIncompatible(
                f"profile {profile.name!r}: {verdict.status.value} "
                f"({'+'.join(r.value for r in verdict.reasons)})"
            )
    start = time.perf_counter()
    rng = random.Random(seed)
    pin = "".join(rng.choice("0123456789") for _ in range(4))
    pan = "4" + "".join(rng.choice("0123456789") for _ in range(12))
    clear_block = encode_iso0(pin, pan)
    payload = f"AMT={rng.randrange(100, 100000):06d};MERCHANT={rng.randrange(10**8):08d}".encode()

    status_counts: dict[VerdictStatus, int] = {s: 0 for s in VerdictStatus}
    seen_keys: set[bytes] = set()
    seen_ciphertexts: set[tuple[bytes | None, bytes | None]] = set()
    reuse = False

    if scheme is Scheme.DUKPT:
        registry = HostRegistry()
        term = _provision_dukpt(rng, registry)
        for _ in range(count):
            line = encode_wire(term.build_message(clear_pin_block=clear_block, data=payload))
            msg = parse_wire(line)
            verdict_msg = registry.process_message(msg)
            status_counts[verdict_msg.status] += 1
            if verdict_msg.accepted:
                seen_keys.add(registry.rederive_key(msg.ksn).material)
            ct = (msg.encrypted_pin_block, msg.encrypted_data)
            reuse = reuse or ct in seen_ciphertexts
            seen_ciphertexts.add(ct)
    elif scheme is Scheme.FIXED:
        key = TdeaKey.from_bytes(rng.randbytes(16), KeyRole.BASE_DERIVATION)
        term_fixed = FixedKeyTerminal(key, _random_initial_ksn(rng))
        seen_keys.add(key.material)
        for _ in range(count):
            line = encode_wire(
                TransactionMessage(
                    term_fixed.terminal_id,
                    encrypted_data=fixed_encrypt(term_fixed, payload),
                    scheme=Scheme.FIXED,
                )
            )
            msg = parse_wire(line)
            try:
                fixed_decrypt(key, msg.encrypted_data)
                status_counts[VerdictStatus.ACCEPTED] += 1
            except DecryptFailed:
                status_counts[VerdictStatus.DECRYPT_FAILED] += 1
            ct = (msg.encrypted_pin_block, msg.encrypted_data)
            reuse = reuse or ct in seen_ciphertexts
            seen_ciphertexts.add(ct)
    elif scheme is Scheme.MASTER_SESSION:
        kek = TdeaKey.from_bytes(rng.randbytes(16), KeyRole.BASE_DERIVATION)
        ctx = MasterSessionContext(kek, random_source=rng.randbytes)
        device_id = _random_initial_ksn(rng)
        for _ in range(count):
            wrapped, session = ms_wrap_session(ctx)
            line = encode_wire(
                TransactionMessage(
                    device_id,
                    encrypted_data=tdes.cbc_encrypt(session.material, payload),
                    scheme=Scheme.MASTER_SESSION,
                    wrapped_session_key=wrapped,
                )
            )
            msg = parse_wire(line)
            host_session = ms_unwrap_session(kek, msg.wrapped_session_key)
            try:
                tdes.cbc_decrypt(host_session.material, msg.encrypted_data)
                status_counts[VerdictStatus.ACCEPTED] += 1
                seen_keys.add(host_session.material)
            except DecryptFailed:
                status_counts[VerdictStatus.DECRYPT_FAILED] += 1
            ct = (msg.encrypted_pin_block, msg.encrypted_data)
            reuse = reuse or ct in seen_ciphertexts
            seen_ciphertexts.add(ct)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")

    return SimulationReport(
        scheme=scheme,
        profile=profile.name,
        transactions=count,
        status_counts=status_counts,
        distinct_keys=len(seen_keys),
        ciphertext_reuse=reuse,
        elapsed_seconds=time.perf_counter() - start,
    )


@dataclass
class CloneAttackReport:
    """Outcome of replaying a device whose full state was copied."""

    n_legit: int
    n_clone: int
    replay_policy: bool
    clone_first_accepted: bool
    legit_replay_rejected: bool
    accepted: int
    replay_rejected: int
    reply_lines: list[str] = field(default_factory=list, repr=False)


def clone_attack_demo(
    n_legit: int,
    n_clone: int,
    seed: int = 0,
    enforce_replay: bool = True,
) -> CloneAttackReport:
    """Copy a terminal's state and run clone and original against one host.

    Because the clone holds identical key material, its first message is
    cryptographically indistinguishable from the original's and the host
    accepts it. What *does* make cloning visible is counter policy: once
    both devices walk the same counter sequence, every collision leaves
    exactly one side accepted and the other replay-rejected. With the
    policy disabled nothing is rejected at all — derivation alone cannot
    tell the devices apart.
    """
    if n_legit < 1:
        raise ValueError("n_legit must be at least 1")
    rng = random.Random(seed)
    registry = HostRegistry(enforce_replay=enforce_replay)
    legit = _provision_dukpt(rng, registry)
    payload = b"checkout-request"
    replies: list[str] = []
    counts = {status: 0 for status in VerdictStatus}

    def send(term: TerminalState) -> VerdictStatus:
        line = encode_wire(term.build_message(data=payload))
        verdict = registry.process_message(parse_wire(line))
        replies.append(format_reply(verdict))
        counts[verdict.status] += 1
        return verdict.status

    send(legit)  # the device transacts at least once before the theft
    clone = copy.deepcopy(legit)

    clone_first = send(clone) if n_clone >= 1 else None
    legit_after = send(legit) if n_legit >= 2 else None

    clone_left = max(n_clone - 1, 0)
    legit_left = max(n_legit - 2, 0)
    while clone_left or legit_left:
        if clone_left:
            send(clone)
            clone_left -= 1
        if legit_left:
            send(legit)
            legit_left -= 1

    return CloneAttackReport(
        n_legit=n_legit,
        n_clone=n_clone,
        replay_policy=enforce_replay,
        clone_first_accepted=clone_first is VerdictStatus.ACCEPTED,
        legit_replay_rejected=legit_after is VerdictStatus.REPLAY_REJECTED,
        accepted=counts[VerdictStatus.ACCEPTED],
        replay_rejected=counts[VerdictStatus.REPLAY_REJECTED],
        reply_lines=replies,
    )
