"""The login server: registration, two-phase login, challenge lifecycle.

Phase 1 checks the password against the sweetword hashes and asks the
honeychecker whether the matched position is the real one. Phase 2 issues
n one-time codes, delivers them out of band, and again lets the
honeychecker decide whether the submitted code sat at the real position.

The server itself never learns which sweetword or which token is real:
both indices live only at the honeychecker, so stealing this server's
state reveals neither.
"""

from __future__ import annotations

import hmac
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .core import (
    CredentialRecord,
    AccountState,
    HoneywordGenParams,
    SweetwordSet,
    assign_correct_index,
    compute_hash,
    generate_honeywords,
    generate_otp_set,
    hash_record,
    verify_password,
)
from .delivery import (
    ChannelKind,
    SmsMessage,
    make_qr_payloads,
    open_memory_sinks,
    QrPayload,
    render_qr_pngs,
    render_sms,
)
from .errors import (
    HoneycheckerUnavailable,
    InvalidArgument,
    ProtocolError,
    StorageFailure,
    UsernameTaken,
)
from .honeychecker import Domain, USER_ID_RE
from .rng import RngHandle
from .storage import AppendLog

# Reserved id used by health probes; never registrable.
PROBE_USER = "health.probe"


class DenialReason(str, Enum):
    BAD_CREDENTIALS = "bad-credentials"
    BAD_OTP = "bad-otp"
    SUSPENDED = "suspended"
    CHALLENGE_GONE = "challenge-gone"
    UNKNOWN_CHALLENGE = "unknown-challenge"
    UNAVAILABLE = "unavailable"


class SuspensionReason(str, Enum):
    HONEYWORD_HIT = "honeyword-hit"
    HONEYTOKEN_HIT = "honeytoken-hit"
    TOO_MANY_FAILURES = "too-many-failures"


@dataclass(frozen=True)
class RegistrationReceipt:
    """Shown to the user exactly once: the secret token position."""

    username: str
    m_index: int
    n: int


@dataclass(frozen=True)
class Session:
    session_id: str
    username: str
    created_at: float
    expires_at: float


@dataclass(frozen=True)
class Denied:
    reason: DenialReason


@dataclass(frozen=True)
class ChallengeIssued:
    challenge_id: str
    qr_payloads: list[QrPayload]
    delivery: str = "sent"


@dataclass
class PendingChallenge:
    challenge_id: str
    username: str
    otp_salt: bytes
    otp_hashes: tuple[bytes, ...]
    issued_at: float
    ttl_seconds: int
    consumed: bool = False
    failure_count: int = 0


@dataclass
class UserRecord:
    credential: CredentialRecord
    channel: ChannelKind = ChannelKind.SMS
    recipient: str = ""
    suspended_reason: SuspensionReason | None = None


# --- user stores --------------------------------------------------------------


class MemoryUserStore:
    def __init__(self):
        self.users: dict[str, UserRecord] = {}

    def get(self, username: str) -> UserRecord | None:
        return self.users.get(username)

    def put(self, record: UserRecord) -> None:
        self.users[record.credential.username] = record


class FileUserStore:
    """Credential/account state in an append-only upsert log."""

    def __init__(self, data_dir: str | Path, fsync: bool = True):
        self.log = AppendLog(Path(data_dir) / "ls_users.log", fsync=fsync)
        self.users: dict[str, UserRecord] = {}
        for raw in self.log.replay():
            record = self._decode(raw)
            self.users[record.credential.username] = record

    def get(self, username: str) -> UserRecord | None:
        return self.users.get(username)

    def put(self, record: UserRecord) -> None:
        self.log.append(self._encode(record))
        self.users[record.credential.username] = record
        if self.log.should_compact(len(self.users)):
            self.log.compact(self._encode(r) for r in self.users.values())

    @staticmethod
    def _encode(record: UserRecord) -> dict:
        cred = record.credential
        return {
            "username": cred.username,
            "salt": cred.salt.hex(),
            "algorithm": cred.hash_algorithm_id,
            "cost": cred.cost_params,
            "hashes": [h.hex() for h in cred.sweetword_hashes],
            "state": cred.account_state.value,
            "reason": record.suspended_reason.value if record.suspended_reason else None,
            "channel": record.channel.value,
            "recipient": record.recipient,
        }

    @staticmethod
    def _decode(raw: dict) -> UserRecord:
        credential = CredentialRecord(
            username=raw["username"],
            salt=bytes.fromhex(raw["salt"]),
            hash_algorithm_id=raw["algorithm"],
            cost_params=raw["cost"],
            sweetword_hashes=tuple(bytes.fromhex(h) for h in raw["hashes"]),
            account_state=AccountState(raw["state"]),
        )
        return UserRecord(
            credential=credential,
            channel=ChannelKind(raw["channel"]),
            recipient=raw["recipient"],
            suspended_reason=SuspensionReason(raw["reason"]) if raw["reason"] else None,
        )


# --- the service ---------------------------------------------------------------


_HC_FAILURES = (HoneycheckerUnavailable, StorageFailure, ProtocolError, OSError)


class LoginService:
    """Two-phase login over a honeychecker-backed credential store.

    ``hc`` is anything with ``set(domain, user, index)`` and
    ``check(domain, user, index) -> bool``: a TCP client in deployment, a
    HoneycheckerService instance in-process for tests and simulations.
    """

    def __init__(
        self,
        hc,
        user_store=None,
        sinks=None,
        *,
        n: int = 3,
        otp_length: int = 6,
        otp_alphabet: str = "0123456789",
        min_distance: int = 3,
        ttl_seconds: int = 120,
        max_failures: int = 3,
        session_ttl_seconds: int = 3600,
        honeyword_params: HoneywordGenParams | None = None,
        hash_algorithm: str = "pbkdf2-sha256",
        hash_cost: dict | None = None,
        rotate_token_index: bool = False,
        qr_image_dir: str | Path | None = None,
        rng: RngHandle | None = None,
        clock=time.time,
    ):
        self.hc = hc
        self.users = user_store if user_store is not None else MemoryUserStore()
        self.sinks = sinks if sinks is not None else open_memory_sinks()
        self.n = n
        self.otp_length = otp_length
        self.otp_alphabet = otp_alphabet
        self.min_distance = min_distance
        self.ttl_seconds = ttl_seconds
        self.max_failures = max_failures
        self.session_ttl_seconds = session_ttl_seconds
        self.honeyword_params = honeyword_params or HoneywordGenParams()
        self.hash_algorithm = hash_algorithm
        self.hash_cost = dict(hash_cost or {})
        self.rotate_token_index = rotate_token_index
        self.qr_image_dir = Path(qr_image_dir) if qr_image_dir else None
        self.rng = rng or RngHandle.system()
        self.clock = clock
        self._challenges: dict[str, PendingChallenge] = {}
        self._active_challenge: dict[str, str] = {}  # username -> challenge_id
        self._sessions: dict[str, Session] = {}
        self._lock = threading.RLock()

    # -- registration ----------------------------------------------------------

    def register(
        self,
        username: str,
        password: str,
        channel: ChannelKind | str = ChannelKind.SMS,
        recipient: str | None = None,
        sweetwords: SweetwordSet | None = None,
    ) -> RegistrationReceipt:
        """Create the credential record and both honeychecker entries.

        Both honeychecker writes must acknowledge before anything is
        persisted locally, so a honeychecker outage aborts registration
        without leaving a partial record. ``sweetwords`` lets tests and
        the attack harness supply a precomputed set; normally the decoys
        are generated here.
        """
        channel = ChannelKind(channel)
        if not USER_ID_RE.match(username) or username == PROBE_USER:
            raise InvalidArgument(f"invalid username: {username!r}")
        if not password:
            raise InvalidArgument("password must be non-empty")
        with self._lock:
            if self.users.get(username) is not None:
                raise UsernameTaken(username)
            if sweetwords is None:
                sweetwords = generate_honeywords(password, self.honeyword_params, self.rng)
            elif sweetwords.password != password:
                raise InvalidArgument("sweetword set does not contain the password")
            credential = hash_record(
                username, sweetwords, self.hash_algorithm, self.hash_cost, self.rng
            )
            m_index = assign_correct_index(self.rng, self.n)
            try:
                self.hc.set(Domain.PWD, username, sweetwords.correct_index)
                self.hc.set(Domain.TOK, username, m_index)
            except _HC_FAILURES as exc:
                raise HoneycheckerUnavailable(
                    f"registration aborted, honeychecker did not acknowledge: {exc}"
                ) from exc
            self.users.put(
                UserRecord(
                    credential=credential,
                    channel=channel,
                    recipient=recipient or username,
                )
            )
            return RegistrationReceipt(username=username, m_index=m_index, n=self.n)

    # -- phase 1 ----------------------------------------------------------------

    def login_phase1(self, username: str, password: str) -> ChallengeIssued | Denied:
        with self._lock:
            user = self.users.get(username)
            if user is None:
                return Denied(DenialReason.BAD_CREDENTIALS)
            if user.credential.account_state is AccountState.SUSPENDED:
                return Denied(DenialReason.SUSPENDED)
            j = verify_password(password, user.credential)
            if j is None:
                # local mismatch: not a sweetword, no honeychecker call
                return Denied(DenialReason.BAD_CREDENTIALS)
            try:
                genuine = self.hc.check(Domain.PWD, username, j)
            except _HC_FAILURES:
                return Denied(DenialReason.UNAVAILABLE)
            if not genuine:
                # a sweetword that is not the password: the credential file
                # has leaked somewhere
                self._suspend(user, SuspensionReason.HONEYWORD_HIT)
                return Denied(DenialReason.SUSPENDED)
            try:
                return self._issue_challenge(user)
            except _HC_FAILURES:
                return Denied(DenialReason.UNAVAILABLE)

    def _issue_challenge(self, user: UserRecord) -> ChallengeIssued:
        username = user.credential.username
        otps = generate_otp_set(
            self.rng,
            self.n,
            length=self.otp_length,
            alphabet=self.otp_alphabet,
            min_distance=self.min_distance,
        )
        if self.rotate_token_index:
            # optional hardening: fresh token position per challenge
            self.hc.set(Domain.TOK, username, assign_correct_index(self.rng, self.n))
        challenge_id = self.rng.token_urlsafe(16)
        salt = self.rng.token_bytes(16)
        hashes = tuple(
            compute_hash(self.hash_algorithm, self.hash_cost, salt, code)
            for code in otps.codes
        )
        challenge = PendingChallenge(
            challenge_id=challenge_id,
            username=username,
            otp_salt=salt,
            otp_hashes=hashes,
            issued_at=self.clock(),
            ttl_seconds=self.ttl_seconds,
        )
        previous = self._active_challenge.get(username)
        if previous is not None and previous in self._challenges:
            # a fresh login supersedes the outstanding challenge
            self._challenges[previous].consumed = True
        self._challenges[challenge_id] = challenge
        self._active_challenge[username] = challenge_id

        payloads = make_qr_payloads(list(otps.codes))
        body = render_sms(list(otps.codes))
        sink = self.sinks[user.channel]
        sink.deliver(SmsMessage(recipient=user.recipient, body=body))
        if self.qr_image_dir is not None:
            render_qr_pngs(payloads, self.qr_image_dir, challenge_id)
        return ChallengeIssued(challenge_id=challenge_id, qr_payloads=payloads)

    # -- phase 2 ----------------------------------------------------------------

    def login_phase2(self, challenge_id: str, submitted_otp: str) -> Session | Denied:
        with self._lock:
            challenge = self._challenges.get(challenge_id)
            if challenge is None:
                return Denied(DenialReason.UNKNOWN_CHALLENGE)
            user = self.users.get(challenge.username)
            if user is None:
                return Denied(DenialReason.UNKNOWN_CHALLENGE)
            if user.credential.account_state is AccountState.SUSPENDED:
                return Denied(DenialReason.SUSPENDED)
            if challenge.consumed or self._expired(challenge):
                return Denied(DenialReason.CHALLENGE_GONE)

            j = self._match_otp(challenge, submitted_otp)
            if j is None:
                challenge.failure_count += 1
                if challenge.failure_count >= self.max_failures:
                    challenge.consumed = True
                    self._suspend(user, SuspensionReason.TOO_MANY_FAILURES)
                    return Denied(DenialReason.SUSPENDED)
                return Denied(DenialReason.BAD_OTP)

            try:
                genuine = self.hc.check(Domain.TOK, challenge.username, j)
            except _HC_FAILURES:
                # fail closed; challenge stays live for a retry once the
                # honeychecker is back
                return Denied(DenialReason.UNAVAILABLE)
            if not genuine:
                # a delivered decoy came back: someone saw the token channel
                challenge.consumed = True
                self._suspend(user, SuspensionReason.HONEYTOKEN_HIT)
                return Denied(DenialReason.SUSPENDED)

            challenge.consumed = True
            now = self.clock()
            session = Session(
                session_id=self.rng.token_urlsafe(16),
                username=challenge.username,
                created_at=now,
                expires_at=now + self.session_ttl_seconds,
            )
            self._sessions[session.session_id] = session
            return session

    def _expired(self, challenge: PendingChallenge) -> bool:
        return self.clock() > challenge.issued_at + challenge.ttl_seconds

    def _match_otp(self, challenge: PendingChallenge, submitted: str) -> int | None:
        digest = compute_hash(
            self.hash_algorithm, self.hash_cost, challenge.otp_salt, submitted
        )
        matched = None
        for j, stored in enumerate(challenge.otp_hashes):
            if hmac.compare_digest(digest, stored) and matched is None:
                matched = j
        return matched

    def _suspend(self, user: UserRecord, reason: SuspensionReason) -> None:
        suspended = UserRecord(
            credential=CredentialRecord(
                username=user.credential.username,
                salt=user.credential.salt,
                hash_algorithm_id=user.credential.hash_algorithm_id,
                cost_params=user.credential.cost_params,
                sweetword_hashes=user.credential.sweetword_hashes,
                account_state=AccountState.SUSPENDED,
            ),
            channel=user.channel,
            recipient=user.recipient,
            suspended_reason=reason,
        )
        self.users.put(suspended)

    # -- misc -------------------------------------------------------------------

    def get_session(self, session_id: str) -> Session | None:
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None or self.clock() > session.expires_at:
                return None
            return session

    def health(self) -> dict:
        """Probe the honeychecker without raising an alarm (set-then-check)."""
        try:
            self.hc.set(Domain.TOK, PROBE_USER, 0)
            hc_ok = self.hc.check(Domain.TOK, PROBE_USER, 0)
        except _HC_FAILURES:
            hc_ok = False
        return {"ls": "ok", "hc": "ok" if hc_ok else "down"}
