import re
import string
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twofha.core import (
    HoneywordGenParams,
    SweetwordSet,
    TweakDigits,
    TweakTail,
    generate_honeywords,
)
from twofha.errors import ConstraintUnsatisfiable, InvalidArgument
from twofha.rng import RngHandle


def test_k_one_is_just_the_password(rng):
    sws = generate_honeywords("alice1234", HoneywordGenParams(k=1), rng)
    assert sws.words == ("alice1234",)
    assert sws.correct_index == 0


def test_digit_tweak_shape(rng):
    params = HoneywordGenParams(k=4, strategy=TweakDigits(t=4))
    sws = generate_honeywords("alice1234", params, rng)
    assert len(sws.words) == 4
    assert len(set(sws.words)) == 4
    # every sweetword keeps the alphabetic stem, varies only the digits
    for word in sws.words:
        assert re.fullmatch(r"alice[0-9]{4}", word), word
    assert sws.words.count("alice1234") == 1
    assert sws.words[sws.correct_index] == "alice1234"


def test_digitless_password_cannot_be_digit_tweaked(rng):
    with pytest.raises(ConstraintUnsatisfiable):
        generate_honeywords("pw", HoneywordGenParams(k=5, strategy=TweakDigits(t=2)), rng)


def test_decoy_space_too_small_raises(rng):
    # one tweakable digit -> at most 9 distinct decoys
    with pytest.raises(ConstraintUnsatisfiable):
        generate_honeywords("a1", HoneywordGenParams(k=11, strategy=TweakDigits(t=1)), rng)


def test_tail_tweak_preserves_character_classes(rng):
    params = HoneywordGenParams(k=6, strategy=TweakTail(t=3))
    sws = generate_honeywords("Secret-42a", params, rng)
    for word in sws.words:
        assert len(word) == len("Secret-42a")
        assert word.startswith("Secret-")  # untouched prefix
        assert word[7].isdigit() and word[8].isdigit() and word[9].islower()
    assert sws.words.count("Secret-42a") == 1


def test_empty_password_rejected(rng):
    with pytest.raises(InvalidArgument):
        generate_honeywords("", HoneywordGenParams(k=2), rng)


def test_deterministic_under_seed():
    params = HoneywordGenParams(k=4)
    a = generate_honeywords("alice1234", params, RngHandle.seeded(31337))
    b = generate_honeywords("alice1234", params, RngHandle.seeded(31337))
    assert a == b


def test_every_position_reachable():
    params = HoneywordGenParams(k=4)
    positions = Counter(
        generate_honeywords("alice1234", params, RngHandle.seeded(seed)).correct_index
        for seed in range(400)
    )
    assert set(positions) == {0, 1, 2, 3}


@given(
    stem=st.text(alphabet=string.ascii_lowercase, min_size=1, max_size=8),
    digits=st.text(alphabet=string.digits, min_size=2, max_size=6),
    k=st.integers(min_value=1, max_value=8),
    seed=st.integers(min_value=0, max_value=2**32),
)
@settings(max_examples=80, deadline=None)
def test_sweetword_set_invariants(stem, digits, k, seed):
    password = stem + digits
    sws = generate_honeywords(password, HoneywordGenParams(k=k), RngHandle.seeded(seed))
    assert len(sws.words) == k
    assert len(set(sws.words)) == k
    assert sws.words[sws.correct_index] == password
    assert sum(1 for w in sws.words if w == password) == 1


def test_sweetword_set_validation():
    with pytest.raises(InvalidArgument):
        SweetwordSet(words=("a", "a"), correct_index=0)
    with pytest.raises(InvalidArgument):
        SweetwordSet(words=("a", "b"), correct_index=2)
    with pytest.raises(InvalidArgument):
        SweetwordSet(words=(), correct_index=0)
