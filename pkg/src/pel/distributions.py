"""Single-symbol laws: mixed atom/continuum distributions and their discrete proxies.

Probabilities are kept as :class:`fractions.Fraction`.  The continuous
part of a :class:`MixedDistribution` is represented only by its total
mass; a draw from it is a :class:`ContinuumToken` that never equals any
other symbol.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Hashable, Iterable, Mapping, Sequence

import numpy as np

Symbol = Hashable

PROB_TOL = 1e-12


@dataclass(frozen=True)
class ContinuumToken:
    """A draw from the density part of a distribution.

    The 128-bit ``uid`` comes from the caller's generator, so replays with
    the same seed reproduce the same tokens while independent draws
    collide with probability 2**-128.
    """

    uid: int

    def __repr__(self) -> str:
        return f"~{self.uid:032x}"


@dataclass(frozen=True)
class Outside:
    """A reserved symbol that lies outside every atom set it is used with."""

    name: str = "x_o"

    def __repr__(self) -> str:
        return self.name


X_O = Outside()


def fresh_token(rng: np.random.Generator) -> ContinuumToken:
    hi, lo = rng.integers(0, 2**63, size=2, dtype=np.int64)
    return ContinuumToken((int(hi) << 64) | int(lo))


def as_prob(x: Any) -> Fraction:
    """Coerce ``x`` to an exact probability.

    Accepts Fractions, ints, rational strings like ``"3/4"`` and floats
    (read through their shortest decimal repr, so 0.1 becomes 1/10).
    """
    if isinstance(x, bool):
        raise TypeError("booleans are not probabilities")
    if isinstance(x, float):
        x = Fraction(repr(x))
    p = Fraction(x)
    if p < 0 or p > 1:
        raise ValueError(f"probability out of range: {x}")
    return p


def _check_sum(total: Fraction, what: str) -> None:
    if abs(total - 1) > PROB_TOL:
        raise ValueError(f"{what} sums to {float(total)!r}, not 1")


@dataclass(frozen=True)
class DiscreteDistribution:
    entries: tuple[tuple[Symbol, Fraction], ...]

    def __post_init__(self):
        entries = tuple((lab, as_prob(p)) for lab, p in self.entries)
        labels = [lab for lab, _ in entries]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate labels")
        _check_sum(sum((p for _, p in entries), Fraction(0)), "distribution")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_dict(cls, probs: Mapping[Symbol, Any]) -> "DiscreteDistribution":
        return cls(tuple(probs.items()))

    @property
    def labels(self) -> tuple:
        return tuple(lab for lab, _ in self.entries)

    @property
    def probs(self) -> tuple[Fraction, ...]:
        return tuple(p for _, p in self.entries)

    def prob(self, label: Symbol) -> Fraction:
        for lab, p in self.entries:
            if lab == label:
                return p
        return Fraction(0)

    def as_dict(self) -> dict:
        return dict(self.entries)


@dataclass(frozen=True)
class MixedDistribution:
    """Atoms ``(label, prob)`` plus a continuous mass.

    Atoms are stored by nonincreasing probability (ties keep input
    order).  ``clump_label`` is the reserved symbol that collects all
    non-atom mass when the distribution is clumped.
    """

    atoms: tuple[tuple[Symbol, Fraction], ...] = ()
    continuous_mass: Fraction = Fraction(0)
    clump_label: Symbol = X_O

    def __post_init__(self):
        atoms = tuple((lab, as_prob(p)) for lab, p in self.atoms)
        if any(p == 0 for _, p in atoms):
            raise ValueError("atom probabilities must be strictly positive")
        labels = [lab for lab, _ in atoms]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate atom labels")
        if self.clump_label in set(labels):
            raise ValueError("clump label collides with an atom label")
        c = as_prob(self.continuous_mass)
        _check_sum(sum((p for _, p in atoms), c), "mixed distribution")
        atoms = tuple(sorted(atoms, key=lambda a: -a[1]))
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "continuous_mass", c)

    @property
    def labels(self) -> tuple:
        return tuple(lab for lab, _ in self.atoms)

    @property
    def probs(self) -> tuple[Fraction, ...]:
        return tuple(p for _, p in self.atoms)

    @property
    def support(self) -> frozenset:
        return frozenset(self.labels)

    def prob(self, label: Symbol) -> Fraction:
        for lab, p in self.atoms:
            if lab == label:
                return p
        return Fraction(0)

    @classmethod
    def discrete(cls, probs: Mapping[Symbol, Any]) -> "MixedDistribution":
        return cls(tuple(probs.items()), Fraction(0), _outside_for(probs))


def _outside_for(labels: Iterable[Symbol]) -> Outside:
    taken = set(labels)
    name = "x_o"
    while Outside(name) in taken:
        name += "'"
    return Outside(name)


def clump(dist: MixedDistribution, B: Iterable[Symbol]) -> DiscreteDistribution:
    """Keep ``dist`` on ``B`` and move all remaining mass to ``dist.clump_label``."""
    B = set(B)
    unknown = B - dist.support
    if unknown:
        raise ValueError(f"not atoms of the distribution: {sorted(map(repr, unknown))}")
    kept = tuple((lab, p) for lab, p in dist.atoms if lab in B)
    rest = 1 - sum((p for _, p in kept), Fraction(0))
    if rest > 0:
        kept += ((dist.clump_label, rest),)
    return DiscreteDistribution(kept)


def tilde_of(dist: MixedDistribution) -> DiscreteDistribution:
    """Law of the atom-clumped symbol: atoms kept, everything else on one new point."""
    return clump(dist, dist.labels)


def _plogp_bits(p: Fraction) -> float:
    if p == 0:
        return 0.0
    # log of numerator/denominator separately keeps precision for big rationals
    return float(p) * (math.log2(p.denominator) - math.log2(p.numerator))


def entropy(dist: DiscreteDistribution | MixedDistribution | Iterable[Any]) -> float:
    """Shannon entropy in bits, with 0 log 0 = 0.

    A :class:`MixedDistribution` is measured through :func:`tilde_of`.
    """
    if isinstance(dist, MixedDistribution):
        dist = tilde_of(dist)
    probs = dist.probs if isinstance(dist, DiscreteDistribution) else dist
    terms = []
    for p in probs:
        if isinstance(p, Fraction):
            terms.append(_plogp_bits(p))
        else:
            p = float(p)
            terms.append(-p * math.log2(p) if p > 0 else 0.0)
    return max(0.0, math.fsum(terms))


def binary_entropy(p: float) -> float:
    p = float(p)
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def category_cdf(dist: MixedDistribution) -> np.ndarray:
    """Cumulative float probabilities over atoms followed by the continuum."""
    cdf = np.cumsum([float(p) for p in dist.probs] + [float(dist.continuous_mass)])
    if cdf.size:
        cdf[-1] = 1.0
    return cdf


def sample_codes(dist: MixedDistribution, size, rng: np.random.Generator) -> np.ndarray:
    """Draw atom indices; ``-1`` marks a draw from the continuous part."""
    u = rng.random(size)
    idx = np.searchsorted(category_cdf(dist), u, side="right")
    return np.where(idx >= len(dist.atoms), -1, idx).astype(np.int64)


def sample(dist: MixedDistribution, rng: np.random.Generator) -> Symbol:
    code = int(sample_codes(dist, 1, rng)[0])
    if code < 0:
        return fresh_token(rng)
    return dist.atoms[code][0]


# --------------------------------------------------------------------------
# JSON

_RATIONAL = re.compile(r"^-?\d+(/\d+)?$")


def label_from_json(v: Any) -> Symbol:
    """Numbers and rational strings become Fractions; other strings stay strings."""
    if isinstance(v, bool):
        raise TypeError("boolean labels are not supported")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        return Fraction(repr(v))
    if isinstance(v, str):
        if v == "x_o":
            return X_O
        if _RATIONAL.match(v.strip()):
            return Fraction(v.strip())
        return v
    raise TypeError(f"unsupported label {v!r}")


def label_to_json(label: Symbol) -> Any:
    if isinstance(label, Fraction):
        return str(label)
    if isinstance(label, Outside):
        return label.name
    if isinstance(label, str):
        return label
    if isinstance(label, int):
        return str(label)
    raise TypeError(f"label {label!r} has no JSON form")


def prob_to_json(p: Fraction) -> str:
    return str(Fraction(p))


def mixed_to_json(dist: MixedDistribution) -> dict:
    return {
        "atoms": [{"label": label_to_json(lab), "prob": prob_to_json(p)} for lab, p in dist.atoms],
        "continuous_mass": prob_to_json(dist.continuous_mass),
    }


def mixed_from_json(obj: Mapping[str, Any]) -> MixedDistribution:
    if not isinstance(obj, Mapping) or "atoms" not in obj:
        raise ValueError("mixed distribution needs an 'atoms' list")
    atoms = tuple((label_from_json(a["label"]), as_prob(a["prob"])) for a in obj["atoms"])
    c = as_prob(obj.get("continuous_mass", "0"))
    return MixedDistribution(atoms, c, _outside_for(lab for lab, _ in atoms))


def rationals(values: Sequence[Any]) -> tuple[Fraction, ...]:
    return tuple(as_prob(v) for v in values)
