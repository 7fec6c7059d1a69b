#!/usr/bin/env python3
"""Narrative walk-through of the whole scheme, in one process.

Run it:  python demos/end_to_end.py

It registers a user, performs both login phases, then plays the two
attackers the design exists to catch: one who cracked the password file,
one who intercepted the token SMS. Watch the honeychecker alarms fire.
"""

from twofha.core import HoneywordGenParams, generate_honeywords
from twofha.delivery import ChannelKind, open_memory_sinks, parse_sms
from twofha.honeychecker import HoneycheckerService
from twofha.loginserver import LoginService, MemoryUserStore, Session
from twofha.rng import RngHandle


def banner(text):
    print(f"\n=== {text} " + "=" * max(0, 60 - len(text)))


def main():
    rng = RngHandle.system()
    hc = HoneycheckerService()
    ls = LoginService(
        hc,
        user_store=MemoryUserStore(),
        sinks=open_memory_sinks(),
        n=3,
        honeyword_params=HoneywordGenParams(k=4),
        hash_algorithm="pbkdf2-sha256",
        hash_cost={"iterations": 20_000},
        rng=rng,
    )

    banner("registration")
    # keep our own copy of the sweetwords so we can play the attacker later
    password = "alice1234"
    sweetwords = generate_honeywords(password, ls.honeyword_params, rng)
    receipt = ls.register("alice", password, sweetwords=sweetwords)
    print(f"alice's credential row stores {len(sweetwords.words)} hashed sweetwords")
    print(f"receipt says: your code is always at position M={receipt.m_index}")
    print("(that number is shown once and lives only at the honeychecker)")

    banner("a normal login")
    issued = ls.login_phase1("alice", password)
    sms = ls.sinks[ChannelKind.SMS].records[-1]["body"]
    print(f"phase 1 ok, SMS delivered: {sms!r}")
    codes = parse_sms(sms)
    outcome = ls.login_phase2(issued.challenge_id, codes[receipt.m_index])
    assert isinstance(outcome, Session)
    print(f"typed the code at position {receipt.m_index} -> session {outcome.session_id[:12]}...")

    banner("attacker 1: cracked the password file")
    print(f"attacker holds all sweetwords: {sweetwords.words}")
    decoy_word = next(w for w in sweetwords.words if w != password)
    print(f"tries {decoy_word!r} (a honeyword)...")
    print(f"-> {ls.login_phase1('alice', decoy_word)}")
    print(f"honeychecker alarms so far: {len(hc.alarms)} "
          f"(domain={hc.alarms.events[-1].domain.value})")

    banner("attacker 2: intercepted the token SMS")
    ls2 = LoginService(
        HoneycheckerService(), user_store=MemoryUserStore(),
        sinks=open_memory_sinks(), n=3, hash_algorithm="sha256", rng=rng,
    )
    r2 = ls2.register("bob", "hunter2024")
    issued2 = ls2.login_phase1("bob", "hunter2024")
    stolen = parse_sms(ls2.sinks[ChannelKind.SMS].records[-1]["body"])
    print(f"attacker reads the whole SMS: {stolen}")
    print("...but not M, so they guess. Two of three guesses hit a honeytoken:")
    guess = stolen[(r2.m_index + 1) % 3]
    print(f"guessing {guess!r} -> {ls2.login_phase2(issued2.challenge_id, guess)}")
    print(f"bob's account: {ls2.users.get('bob').suspended_reason}")

    banner("the math")
    from twofha.attacksim import expected_detection, simulate_token_theft
    print(f"analytic detection probability at n=3: {expected_detection(3, 1)}")
    stats = simulate_token_theft(n=3, trials=2000, seed=1)
    print(f"simulated over 2000 trials: {stats.detection_rate:.3f}")


if __name__ == "__main__":
    main()
