from hypothesis import given, settings
from hypothesis import strategies as st

from twofha.core import levenshtein

from oracles import lev_matrix

# expected values computed with the full-matrix oracle before the
# production implementation existed
KNOWN_DISTANCES = [
    ("abc", "abc", 0),
    ("", "abc", 3),
    ("abc", "", 3),
    ("", "", 0),
    ("kitten", "sitting", 3),
    ("saturday", "sunday", 3),
    ("gumbo", "gambol", 2),
    ("flaw", "lawn", 2),
    ("a", "b", 1),
    ("123456", "123456", 0),
    ("000000", "999999", 6),
]


def test_known_distances():
    for a, b, expected in KNOWN_DISTANCES:
        assert levenshtein(a, b) == expected, (a, b)
        assert lev_matrix(a, b) == expected, ("oracle disagrees", a, b)


@given(st.text(max_size=12), st.text(max_size=12))
@settings(max_examples=300)
def test_matches_matrix_oracle(a, b):
    assert levenshtein(a, b) == lev_matrix(a, b)


@given(st.text(max_size=12), st.text(max_size=12))
def test_symmetric(a, b):
    assert levenshtein(a, b) == levenshtein(b, a)


@given(st.text(max_size=12), st.text(max_size=12))
def test_zero_iff_equal(a, b):
    d = levenshtein(a, b)
    assert (d == 0) == (a == b)
    assert d >= 0


@given(st.text(max_size=10), st.text(max_size=10))
def test_bounds(a, b):
    d = levenshtein(a, b)
    assert abs(len(a) - len(b)) <= d <= max(len(a), len(b))


@given(st.text(max_size=8), st.text(max_size=8), st.text(max_size=8))
@settings(max_examples=150)
def test_triangle_inequality(a, b, c):
    assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)
