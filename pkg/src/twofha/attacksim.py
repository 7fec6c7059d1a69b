"""Adversary simulations and the analytic detection oracle.

Both scenarios drive the real login-server and honeychecker code paths in
process (no network, memory-backed stores): the attacker only gets what the
modeled compromise gives them - the full SMS for token theft, the full
plaintext sweetword list for a cracked password file - and never the
indices held by the honeychecker.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .core import HoneywordGenParams, generate_honeywords
from .delivery import ChannelKind, open_memory_sinks, parse_sms
from .errors import HarnessFailure, InvalidArgument
from .honeychecker import HoneycheckerService, MemoryAlarmSink, MemoryIndexStore
from .loginserver import ChallengeIssued, Denied, DenialReason, LoginService, MemoryUserStore, Session
from .rng import RngHandle

_VICTIM = "victim"


@dataclass(frozen=True)
class AttackStats:
    scenario: str
    params: dict
    trials: int
    successes: int
    detections: int
    lockouts: int
    seed: int | None

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials

    @property
    def detection_rate(self) -> float:
        return self.detections / self.trials

    @property
    def lockout_rate(self) -> float:
        return self.lockouts / self.trials

    def _ci95(self, rate: float) -> float:
        return 1.96 * math.sqrt(rate * (1.0 - rate) / self.trials)

    def to_json_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            **self.params,
            "trials": self.trials,
            "seed": self.seed,
            "counts": {
                "successes": self.successes,
                "detections": self.detections,
                "lockouts": self.lockouts,
            },
            "rates": {
                "success": self.success_rate,
                "detection": self.detection_rate,
                "lockout": self.lockout_rate,
            },
            "ci_95": {
                "success": self._ci95(self.success_rate),
                "detection": self._ci95(self.detection_rate),
            },
        }

    def summary_table(self) -> str:
        rows = [
            ("scenario", self.scenario),
            *((k, str(v)) for k, v in self.params.items()),
            ("trials", str(self.trials)),
            ("seed", str(self.seed)),
            ("success rate", f"{self.success_rate:.4f} +/- {self._ci95(self.success_rate):.4f}"),
            ("detection rate", f"{self.detection_rate:.4f} +/- {self._ci95(self.detection_rate):.4f}"),
            ("lockout rate", f"{self.lockout_rate:.4f}"),
        ]
        width = max(len(name) for name, _ in rows)
        return "\n".join(f"{name.ljust(width)}  {value}" for name, value in rows)


def expected_detection(n: int, attempts: int) -> Fraction:
    """Probability a uniform without-replacement guesser over n codes trips
    the alarm before obtaining a session.

    The account suspends on the first decoy submission, so only the very
    first guess matters: the guesser survives iff it hits the one real code,
    hence detection = (n-1)/n for any attempt budget >= 1.
    """
    if n < 1:
        raise InvalidArgument("n must be >= 1")
    if attempts < 1:
        raise InvalidArgument("attempts must be >= 1")
    return Fraction(n - 1, n)


def _build_stack(rng: RngHandle, *, n: int, k: int) -> tuple[LoginService, HoneycheckerService]:
    try:
        hc = HoneycheckerService(store=MemoryIndexStore(), alarm_sink=MemoryAlarmSink())
        ls = LoginService(
            hc,
            user_store=MemoryUserStore(),
            sinks=open_memory_sinks(),
            n=n,
            honeyword_params=HoneywordGenParams(k=k),
            hash_algorithm="sha256",  # fast profile; hashing strength is not under test
            rng=rng,
        )
    except Exception as exc:
        raise HarnessFailure(f"could not assemble in-process stack: {exc}") from exc
    return ls, hc


def simulate_token_theft(
    n: int,
    trials: int,
    rng: RngHandle | None = None,
    attempts_per_trial: int = 1,
    seed: int | None = None,
) -> AttackStats:
    """Token-channel interception: the attacker reads the whole SMS.

    Per trial a fresh user registers through the real stack, the attacker
    steals the delivered message from the sink, and guesses codes uniformly
    without replacement. Success = a session; detection = honeytoken
    suspension; lockout = attempts exhausted without either.
    """
    if n < 1 or trials < 1 or attempts_per_trial < 1:
        raise InvalidArgument("n, trials and attempts_per_trial must all be >= 1")
    if rng is None:
        rng = RngHandle(seed) if seed is not None else RngHandle.system()
    successes = detections = lockouts = 0
    for trial in range(trials):
        trial_rng = rng.spawn(trial)
        ls, hc = _build_stack(trial_rng, n=n, k=1)
        ls.register(_VICTIM, "correct-horse-battery", ChannelKind.SMS)
        issued = ls.login_phase1(_VICTIM, "correct-horse-battery")
        if not isinstance(issued, ChallengeIssued):
            raise HarnessFailure(f"phase 1 failed in harness: {issued}")
        body = ls.sinks[ChannelKind.SMS].records[-1]["body"]
        codes = parse_sms(body)
        if len(codes) != n:
            raise HarnessFailure(f"expected {n} codes in the stolen SMS, got {len(codes)}")
        guesses = list(codes)
        trial_rng.shuffle(guesses)

        for attempt in range(attempts_per_trial):
            outcome = ls.login_phase2(issued.challenge_id, guesses[attempt])
            if isinstance(outcome, Session):
                successes += 1
                break
            if outcome.reason is DenialReason.SUSPENDED:
                detections += 1
                if len(hc.alarms) < 1:
                    raise HarnessFailure("detection without a honeychecker alarm")
                break
        else:
            lockouts += 1
    return AttackStats(
        scenario="token-theft",
        params={"n": n, "attempts_per_trial": attempts_per_trial},
        trials=trials,
        successes=successes,
        detections=detections,
        lockouts=lockouts,
        seed=seed,
    )


def simulate_password_crack(
    k: int,
    trials: int,
    rng: RngHandle | None = None,
    seed: int | None = None,
) -> AttackStats:
    """Cracked password file: the attacker holds all k plaintext sweetwords.

    Per trial the harness generates the sweetword set (real generation
    path), registers it, and the attacker submits one uniform pick to
    phase 1. Success = phase-1 pass; detection = honeyword suspension.
    """
    if k < 1 or trials < 1:
        raise InvalidArgument("k and trials must be >= 1")
    if rng is None:
        rng = RngHandle(seed) if seed is not None else RngHandle.system()
    successes = detections = lockouts = 0
    for trial in range(trials):
        trial_rng = rng.spawn(trial)
        ls, hc = _build_stack(trial_rng, n=1, k=k)
        password = "hunter7319"
        sweetwords = generate_honeywords(password, HoneywordGenParams(k=k), trial_rng)
        ls.register(_VICTIM, password, ChannelKind.SMS, sweetwords=sweetwords)

        pick = sweetwords.words[trial_rng.randbelow(k)]
        outcome = ls.login_phase1(_VICTIM, pick)
        if isinstance(outcome, ChallengeIssued):
            successes += 1
        elif isinstance(outcome, Denied) and outcome.reason is DenialReason.SUSPENDED:
            detections += 1
            if len(hc.alarms) < 1:
                raise HarnessFailure("detection without a honeychecker alarm")
        else:
            raise HarnessFailure(f"unexpected phase-1 outcome in harness: {outcome}")
    return AttackStats(
        scenario="password-crack",
        params={"k": k},
        trials=trials,
        successes=successes,
        detections=detections,
        lockouts=lockouts,
        seed=seed,
    )
