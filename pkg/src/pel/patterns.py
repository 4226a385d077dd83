"""Patterns of sequences: conversion, validation, enumeration and text I/O.

A pattern relabels a sequence by order of first appearance, so
``"abracadabra"`` becomes ``1,2,3,1,4,1,5,1,2,3,1``.  Patterns are plain
tuples of positive ints.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Iterator, Mapping, Sequence, TextIO

import numpy as np

from . import kernels

Pattern = tuple[int, ...]

DEFAULT_CAP = 12


class EnumerationCapError(ValueError):
    """Raised when an exhaustive enumeration would exceed its configured cap."""


def pattern_of(seq: Iterable[Hashable]) -> Pattern:
    """Relabel ``seq`` by order of first appearance, starting at 1."""
    labels: dict = {}
    out = []
    for x in seq:
        lab = labels.get(x)
        if lab is None:
            lab = labels[x] = len(labels) + 1
        out.append(lab)
    return tuple(out)


def is_valid_pattern(p: Sequence[int]) -> bool:
    """True iff ``p`` is a restricted growth string starting at 1."""
    top = 0
    for v in p:
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
            return False
        if v < 1 or v > top + 1:
            return False
        top = max(top, v)
    return True


def bell_number(n: int) -> int:
    """Number of set partitions of an ``n``-element set (Bell triangle)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def _check_cap(n: int, cap: int) -> None:
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > cap:
        raise EnumerationCapError(
            f"n={n} exceeds enumeration cap {cap} (Bell({n}) = {bell_number(n)} patterns)"
        )


def enumerate_patterns(n: int, cap: int = DEFAULT_CAP) -> Iterator[Pattern]:
    """Yield every valid pattern of length ``n`` once, in lexicographic order."""
    _check_cap(n, cap)
    if n == 0:
        yield ()
        return
    a = [1] * n
    pmax = [1] * n
    while True:
        yield tuple(a)
        i = n - 1
        while i > 0 and a[i] > pmax[i - 1]:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        pmax[i] = max(pmax[i - 1], a[i])
        for j in range(i + 1, n):
            a[j] = 1
            pmax[j] = pmax[i]


def pattern_table(n: int, cap: int = DEFAULT_CAP) -> np.ndarray:
    """All length-``n`` patterns as an int8 array of shape ``(Bell(n), n)``.

    Same order as :func:`enumerate_patterns`; built by the compiled kernel.
    """
    _check_cap(n, cap)
    return kernels.rgs_table(n)


def patterns_of_rows(codes: np.ndarray) -> np.ndarray:
    """Row-wise patterns of an integer array (one trajectory per row)."""
    codes = np.asarray(codes)
    if codes.ndim != 2:
        raise ValueError("codes must be 2-D")
    return kernels.patterns_of_rows(codes)


@dataclass(frozen=True)
class OccurrenceTable:
    """Distinct-element counts per prefix and 1-based first-appearance indices."""

    distinct_per_prefix: tuple[int, ...]
    first_index: Mapping[Hashable, int]


def occurrence_table(seq: Iterable[Hashable]) -> OccurrenceTable:
    first: dict = {}
    distinct = []
    for i, x in enumerate(seq, start=1):
        if x not in first:
            first[x] = i
        distinct.append(len(first))
    return OccurrenceTable(tuple(distinct), first)


# text format: comma-separated labels, one pattern per line


def format_pattern(p: Sequence[int]) -> str:
    return ",".join(str(int(v)) for v in p)


def parse_pattern(line: str) -> Pattern:
    line = line.strip()
    if not line:
        return ()
    try:
        p = tuple(int(tok) for tok in line.split(","))
    except ValueError as exc:
        raise ValueError(f"not a pattern line: {line!r}") from exc
    if not is_valid_pattern(p):
        raise ValueError(f"not a restricted growth string: {line!r}")
    return p


def write_patterns(fp: TextIO, patterns: Iterable[Sequence[int]]) -> None:
    for p in patterns:
        fp.write(format_pattern(p) + "\n")


def read_patterns(fp: TextIO) -> list[Pattern]:
    return [parse_pattern(line) for line in fp if line.strip()]
