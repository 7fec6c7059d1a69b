"""Pure domain logic: sweetword generation, credential hashing, OTP sets.

No I/O happens here. Everything that needs randomness takes an
:class:`~twofha.rng.RngHandle`, so callers decide between reproducible
seeded runs and system entropy.
"""

from __future__ import annotations

import hashlib
import hmac
import string
from dataclasses import dataclass, field
from enum import Enum

from .errors import ConstraintUnsatisfiable, InvalidArgument, UnsupportedAlgorithm
from .rng import RngHandle

# Rejection-sampling budget: candidate draws per slot before a parameter
# combination is declared infeasible.
ATTEMPT_BUDGET = 10_000

DEFAULT_OTP_LENGTH = 6
DEFAULT_OTP_ALPHABET = string.digits
# A single typo cannot turn the real code into a decoy (or vice versa)
# when every pair of codes differs by at least 3 edits.
DEFAULT_MIN_DISTANCE = 3
DEFAULT_SWEETWORD_COUNT = 4


def levenshtein(a: str, b: str) -> int:
    """Edit distance with unit-cost insert/delete/substitute."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


class AccountState(str, Enum):
    ACTIVE = "active"
    SUSPENDED = "suspended"


@dataclass(frozen=True)
class SweetwordSet:
    """A user's shuffled sweetwords: the real password plus its decoys."""

    words: tuple[str, ...]
    correct_index: int

    def __post_init__(self):
        if not self.words:
            raise InvalidArgument("sweetword set must contain at least one word")
        if len(set(self.words)) != len(self.words):
            raise InvalidArgument("sweetwords must be distinct")
        if not 0 <= self.correct_index < len(self.words):
            raise InvalidArgument(
                f"correct_index {self.correct_index} out of range for {len(self.words)} words"
            )

    @property
    def password(self) -> str:
        return self.words[self.correct_index]


@dataclass(frozen=True)
class OtpSet:
    """Pairwise-dissimilar one-time passwords for a single challenge."""

    codes: tuple[str, ...]
    length: int
    alphabet: str
    min_distance: int

    def __post_init__(self):
        if len(set(self.codes)) != len(self.codes):
            raise InvalidArgument("OTP codes must be distinct")
        allowed = set(self.alphabet)
        for code in self.codes:
            if len(code) != self.length:
                raise InvalidArgument(f"code {code!r} does not have length {self.length}")
            if not set(code) <= allowed:
                raise InvalidArgument(f"code {code!r} uses characters outside the alphabet")
        for i, a in enumerate(self.codes):
            for b in self.codes[i + 1:]:
                if levenshtein(a, b) < self.min_distance:
                    raise InvalidArgument(
                        f"codes {a!r} and {b!r} are closer than min_distance={self.min_distance}"
                    )


@dataclass(frozen=True)
class TweakDigits:
    """Decoy strategy: re-randomize the last ``t`` digit positions."""

    t: int = 4

    def __post_init__(self):
        if self.t < 1:
            raise InvalidArgument("t must be >= 1")


@dataclass(frozen=True)
class TweakTail:
    """Decoy strategy: re-randomize the last ``t`` characters within their
    character classes (digit stays digit, lowercase stays lowercase, ...)."""

    t: int = 3

    def __post_init__(self):
        if self.t < 1:
            raise InvalidArgument("t must be >= 1")


@dataclass(frozen=True)
class HoneywordGenParams:
    k: int = DEFAULT_SWEETWORD_COUNT
    strategy: TweakDigits | TweakTail = field(default_factory=TweakDigits)

    def __post_init__(self):
        if self.k < 1:
            raise InvalidArgument("k must be >= 1")


@dataclass(frozen=True)
class CredentialRecord:
    """One row of the login server's credential table.

    Holds only the salted hashes of the sweetwords, never plaintext.
    One salt is shared by the record's k hashes so verification costs a
    single hash computation.
    """

    username: str
    salt: bytes
    hash_algorithm_id: str
    cost_params: dict
    sweetword_hashes: tuple[bytes, ...]
    account_state: AccountState = AccountState.ACTIVE

    def __post_init__(self):
        if not self.sweetword_hashes:
            raise InvalidArgument("record must contain at least one sweetword hash")
        if len(set(self.sweetword_hashes)) != len(self.sweetword_hashes):
            raise InvalidArgument("sweetword hashes must be distinct")
        if len(self.salt) < 16:
            raise InvalidArgument("salt must be at least 16 bytes")

    @property
    def k(self) -> int:
        return len(self.sweetword_hashes)


def _pin_cost(cost_params: dict, defaults: dict) -> dict:
    merged = dict(defaults)
    merged.update(cost_params or {})
    return merged


def compute_hash(algorithm_id: str, cost_params: dict, salt: bytes, word: str) -> bytes:
    """Hash one word under the named algorithm. Raises UnsupportedAlgorithm."""
    data = word.encode("utf-8")
    if algorithm_id == "sha256":
        return hashlib.sha256(salt + data).digest()
    if algorithm_id == "pbkdf2-sha256":
        cost = _pin_cost(cost_params, {"iterations": 100_000})
        return hashlib.pbkdf2_hmac("sha256", data, salt, int(cost["iterations"]))
    if algorithm_id == "scrypt":
        cost = _pin_cost(cost_params, {"n": 2**14, "r": 8, "p": 1})
        return hashlib.scrypt(
            data, salt=salt, n=int(cost["n"]), r=int(cost["r"]), p=int(cost["p"])
        )
    raise UnsupportedAlgorithm(f"unknown hash algorithm id: {algorithm_id!r}")


def generate_otp_set(
    rng: RngHandle,
    n: int,
    length: int = DEFAULT_OTP_LENGTH,
    alphabet: str = DEFAULT_OTP_ALPHABET,
    min_distance: int = DEFAULT_MIN_DISTANCE,
) -> OtpSet:
    """Draw n distinct codes with pairwise edit distance >= min_distance.

    Rejection sampling, uniform conditioned on the constraint. Raises
    ConstraintUnsatisfiable once a slot exhausts the attempt budget, which
    signals that (n, length, min_distance) are jointly infeasible.
    """
    if n < 1:
        raise InvalidArgument("n must be >= 1")
    if length < 1:
        raise InvalidArgument("length must be >= 1")
    if len(set(alphabet)) < 2:
        raise InvalidArgument("alphabet needs at least 2 distinct characters")
    if min_distance > length:
        raise InvalidArgument("min_distance cannot exceed code length")

    codes: list[str] = []
    for _slot in range(n):
        for _ in range(ATTEMPT_BUDGET):
            candidate = "".join(rng.choice(alphabet) for _ in range(length))
            if all(levenshtein(candidate, c) >= min_distance for c in codes):
                codes.append(candidate)
                break
        else:
            raise ConstraintUnsatisfiable(
                f"could not draw {n} codes of length {length} with pairwise "
                f"distance >= {min_distance} (gave up after {ATTEMPT_BUDGET} "
                f"attempts on code {_slot + 1})"
            )
    return OtpSet(
        codes=tuple(codes), length=length, alphabet=alphabet, min_distance=min_distance
    )


def assign_correct_index(rng: RngHandle, n: int) -> int:
    """Pick the position of the real element among n, uniformly."""
    if n < 1:
        raise InvalidArgument("n must be >= 1")
    return rng.randbelow(n)


def _digit_positions(word: str) -> list[int]:
    return [i for i, ch in enumerate(word) if ch.isdigit()]


def _char_class(ch: str) -> str:
    if ch.isdigit():
        return string.digits
    if ch.islower():
        return string.ascii_lowercase
    if ch.isupper():
        return string.ascii_uppercase
    return string.punctuation


def _tweak_digits(password: str, t: int, rng: RngHandle) -> str:
    positions = _digit_positions(password)[-t:]
    chars = list(password)
    for i in positions:
        chars[i] = rng.choice(string.digits)
    return "".join(chars)


def _tweak_tail(password: str, t: int, rng: RngHandle) -> str:
    chars = list(password)
    for i in range(max(0, len(chars) - t), len(chars)):
        chars[i] = rng.choice(_char_class(chars[i]))
    return "".join(chars)


def generate_honeywords(
    password: str, params: HoneywordGenParams, rng: RngHandle
) -> SweetwordSet:
    """Produce k-1 decoys for a password and return the shuffled sweetword set.

    The returned ordering is a uniform permutation; ``correct_index`` points
    at the real password. Raises ConstraintUnsatisfiable when the strategy
    cannot yield k-1 distinct decoys (e.g. digit tweaking on a password
    without digits).
    """
    if not password:
        raise InvalidArgument("password must be non-empty")
    k = params.k
    if k == 1:
        return SweetwordSet(words=(password,), correct_index=0)

    strategy = params.strategy
    if isinstance(strategy, TweakDigits) and not _digit_positions(password):
        raise ConstraintUnsatisfiable(
            "digit-tweak strategy needs at least one digit in the password"
        )

    decoys: set[str] = set()
    while len(decoys) < k - 1:
        for _ in range(ATTEMPT_BUDGET):
            if isinstance(strategy, TweakDigits):
                candidate = _tweak_digits(password, strategy.t, rng)
            else:
                candidate = _tweak_tail(password, strategy.t, rng)
            if candidate != password and candidate not in decoys:
                decoys.add(candidate)
                break
        else:
            raise ConstraintUnsatisfiable(
                f"could not derive {k - 1} distinct decoys from the password "
                f"with {type(strategy).__name__}(t={strategy.t})"
            )

    words = list(decoys) + [password]
    # sort first so the permutation is a function of the rng alone, not of
    # set iteration order
    words.sort()
    rng.shuffle(words)
    return SweetwordSet(words=tuple(words), correct_index=words.index(password))


def hash_record(
    username: str,
    sweetwords: SweetwordSet,
    algorithm_id: str = "pbkdf2-sha256",
    cost_params: dict | None = None,
    rng: RngHandle | None = None,
) -> CredentialRecord:
    """Hash a sweetword set into a credential record with a fresh salt."""
    if not username:
        raise InvalidArgument("username must be non-empty")
    rng = rng or RngHandle.system()
    cost = dict(cost_params or {})
    salt = rng.token_bytes(16)
    hashes = tuple(
        compute_hash(algorithm_id, cost, salt, word) for word in sweetwords.words
    )
    return CredentialRecord(
        username=username,
        salt=salt,
        hash_algorithm_id=algorithm_id,
        cost_params=cost,
        sweetword_hashes=hashes,
    )


def verify_password(candidate: str, record: CredentialRecord) -> int | None:
    """Return the index of the sweetword hash matching the candidate, if any.

    Every stored hash is compared (constant-time per comparison, no early
    exit), so timing does not reveal the matched position.
    """
    digest = compute_hash(
        record.hash_algorithm_id, record.cost_params, record.salt, candidate
    )
    matched: int | None = None
    for j, stored in enumerate(record.sweetword_hashes):
        if hmac.compare_digest(digest, stored) and matched is None:
            matched = j
    return matched
