import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bell_by_stirling, partition_to_rgs, set_partitions
from pel.patterns import (
    EnumerationCapError,
    bell_number,
    enumerate_patterns,
    format_pattern,
    is_valid_pattern,
    occurrence_table,
    parse_pattern,
    pattern_of,
    pattern_table,
    patterns_of_rows,
    read_patterns,
    write_patterns,
)

seqs = st.lists(st.integers(-3, 5), max_size=30)


def test_example_sentence():
    # the full printed pattern, with the space counted as a symbol
    want = (1, 2, 3, 4, 5, 6, 7, 8, 5, 6, 8, 7, 9, 10, 11, 8, 12, 13, 8, 4, 1, 9, 10, 2)
    assert pattern_of("english is hard to learn") == want


def test_small_cases():
    assert pattern_of("aaaa") == (1, 1, 1, 1)
    assert pattern_of(range(6)) == (1, 2, 3, 4, 5, 6)
    assert pattern_of([]) == ()
    assert pattern_of("abracadabra") == (1, 2, 3, 1, 4, 1, 5, 1, 2, 3, 1)


@pytest.mark.parametrize(
    "p, ok",
    [([1, 2, 1, 3], True), ([2, 1], False), ([1, 3, 2], False), ([], True), ([1, 0], False), ([1, True], False), ([1, 1.0], False)],
)
def test_is_valid_pattern(p, ok):
    assert is_valid_pattern(p) is ok


@given(seqs)
def test_pattern_properties(seq):
    p = pattern_of(seq)
    assert is_valid_pattern(p)
    assert pattern_of(p) == p  # idempotent
    assert pattern_of([("tag", 7 * x + 1) for x in seq]) == p  # injective relabel


@given(seqs)
def test_occurrence_table(seq):
    t = occurrence_table(seq)
    d = t.distinct_per_prefix
    assert all(b - a in (0, 1) for a, b in zip(d, d[1:]))
    assert len(t.first_index) == (d[-1] if d else 0)
    for x, i in t.first_index.items():
        assert seq[i - 1] == x and x not in seq[: i - 1]


def test_occurrence_examples():
    t = occurrence_table("aba")
    assert t.first_index == {"a": 1, "b": 2} and t.distinct_per_prefix == (1, 2, 2)
    assert occurrence_table("zzzz").distinct_per_prefix == (1, 1, 1, 1)


def test_enumeration_small():
    assert list(enumerate_patterns(1)) == [(1,)]
    assert list(enumerate_patterns(3)) == [(1, 1, 1), (1, 1, 2), (1, 2, 1), (1, 2, 2), (1, 2, 3)]
    assert sum(1 for _ in enumerate_patterns(5)) == 52
    assert list(enumerate_patterns(0)) == [()]


@pytest.mark.parametrize("n", range(0, 9))
def test_enumeration_matches_set_partitions(n):
    want = {partition_to_rgs(part, n) for part in set_partitions(list(range(n)))}
    got = list(enumerate_patterns(n))
    assert len(got) == len(set(got)) == len(want) == bell_by_stirling(n)
    assert set(got) == want
    assert got == sorted(got)


@pytest.mark.parametrize("n", range(0, 16))
def test_bell_numbers(n):
    assert bell_number(n) == bell_by_stirling(n)


def test_cap():
    with pytest.raises(EnumerationCapError):
        next(enumerate_patterns(13))
    with pytest.raises(EnumerationCapError):
        pattern_table(13)
    with pytest.raises(EnumerationCapError):
        next(enumerate_patterns(6, cap=5))
    assert sum(1 for _ in enumerate_patterns(6, cap=6)) == 203


@pytest.mark.parametrize("n", [1, 4, 7, 9])
def test_table_order(n):
    assert [tuple(r) for r in pattern_table(n).tolist()] == list(enumerate_patterns(n))


@given(st.lists(st.lists(st.integers(0, 4), min_size=6, max_size=6), min_size=1, max_size=20))
@settings(max_examples=50)
def test_rows(rows):
    arr = np.array(rows)
    got = patterns_of_rows(arr)
    assert [tuple(r) for r in got.tolist()] == [pattern_of(r) for r in rows]


def test_text_roundtrip():
    pats = [(1, 2, 1), (1,), (1, 1, 2, 3)]
    buf = io.StringIO()
    write_patterns(buf, pats)
    assert buf.getvalue() == "1,2,1\n1\n1,1,2,3\n"
    assert read_patterns(io.StringIO(buf.getvalue())) == pats
    assert format_pattern(np.array([1, 2])) == "1,2"
    with pytest.raises(ValueError):
        parse_pattern("1,3")
    with pytest.raises(ValueError):
        parse_pattern("1,x")
