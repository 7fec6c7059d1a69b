"""Two-factor honeytoken authentication.

Password storage mixes the real password with decoy sweetwords; the second
factor delivers n one-time codes of which only one - at a secret position
told to the user once - is real. A separated honeychecker stores both
secret positions and raises an alarm whenever a decoy is used, turning a
stolen password file or an intercepted token channel into a detection
event instead of a breach.
"""

from .attacksim import AttackStats, expected_detection, simulate_password_crack, simulate_token_theft
from .core import (
    AccountState,
    CredentialRecord,
    HoneywordGenParams,
    OtpSet,
    SweetwordSet,
    TweakDigits,
    TweakTail,
    assign_correct_index,
    generate_honeywords,
    generate_otp_set,
    hash_record,
    levenshtein,
    verify_password,
)
from .delivery import ChannelKind, QrPayload, SmsMessage, make_qr_payloads, parse_sms, render_sms
from .errors import (
    ConstraintUnsatisfiable,
    HarnessFailure,
    HoneycheckerUnavailable,
    InvalidArgument,
    ProtocolError,
    RenderFailure,
    SinkUnavailable,
    StorageFailure,
    TwoFhaError,
    UnsupportedAlgorithm,
    UsernameTaken,
)
from .honeychecker import AlarmEvent, Domain, HoneycheckerService
from .loginserver import (
    ChallengeIssued,
    Denied,
    DenialReason,
    LoginService,
    RegistrationReceipt,
    Session,
    SuspensionReason,
)
from .rng import RngHandle

__version__ = "0.1.0"

__all__ = [
    "AccountState",
    "AlarmEvent",
    "AttackStats",
    "ChallengeIssued",
    "ChannelKind",
    "ConstraintUnsatisfiable",
    "CredentialRecord",
    "Denied",
    "DenialReason",
    "Domain",
    "HarnessFailure",
    "HoneycheckerService",
    "HoneycheckerUnavailable",
    "HoneywordGenParams",
    "InvalidArgument",
    "LoginService",
    "OtpSet",
    "ProtocolError",
    "QrPayload",
    "RegistrationReceipt",
    "RenderFailure",
    "RngHandle",
    "Session",
    "SinkUnavailable",
    "SmsMessage",
    "StorageFailure",
    "SuspensionReason",
    "SweetwordSet",
    "TwoFhaError",
    "TweakDigits",
    "TweakTail",
    "UnsupportedAlgorithm",
    "UsernameTaken",
    "assign_correct_index",
    "expected_detection",
    "generate_honeywords",
    "generate_otp_set",
    "hash_record",
    "levenshtein",
    "make_qr_payloads",
    "parse_sms",
    "render_sms",
    "simulate_password_crack",
    "simulate_token_theft",
    "verify_password",
]
