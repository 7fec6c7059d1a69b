import pytest

from twofha.core import HoneywordGenParams
from twofha.delivery import open_memory_sinks
from twofha.honeychecker import HoneycheckerService, MemoryAlarmSink, MemoryIndexStore
from twofha.loginserver import LoginService, MemoryUserStore
from twofha.rng import RngHandle

FAST_HASH = "sha256"


@pytest.fixture
def rng():
    return RngHandle.seeded(0xC0FFEE)


@pytest.fixture
def make_stack():
    """Factory for an isolated in-process LS+HC stack (memory-backed, fast hash)."""

    def build(n=3, k=4, seed=1234, **overrides) -> tuple[LoginService, HoneycheckerService]:
        hc = HoneycheckerService(store=MemoryIndexStore(), alarm_sink=MemoryAlarmSink())
        kwargs = dict(
            user_store=MemoryUserStore(),
            sinks=open_memory_sinks(),
            n=n,
            honeyword_params=HoneywordGenParams(k=k),
            hash_algorithm=FAST_HASH,
            rng=RngHandle.seeded(seed) if seed is not None else RngHandle.system(),
        )
        kwargs.update(overrides)
        ls = LoginService(hc, **kwargs)
        return ls, hc

    return build
