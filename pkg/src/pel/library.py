"""Named specs for the worked examples."""

from __future__ import annotations

from fractions import Fraction as F

from .distributions import MixedDistribution, X_O
from .processes import IID, AdditiveNoiseSpec, MarkovModel, MixedMarkovModel, ProcessSpec, StickySpec

# transition matrix of the hidden chain in ex6; any ergodic choice fits the example
EX6_MATRIX = ((F(2, 3), F(1, 3)), (F(1, 4), F(3, 4)))


def ex2_finite_iid() -> IID:
    return IID(MixedDistribution.discrete({"a": F(1, 2), "b": F(1, 4), "c": F(1, 4)}))


def ex3_uniform() -> IID:
    return IID(MixedDistribution((), F(1)))


def ex4_mixed_iid() -> IID:
    return IID(MixedDistribution(((F(0), F(1, 3)), (F(1), F(1, 3))), F(1, 3)))


def ex5_mixed_markov() -> MixedMarkovModel:
    zero, one = F(0), F(1)
    rows = {
        (zero,): MixedDistribution(((zero, F(3, 4)), (one, F(1, 4))), F(0)),
        (one,): MixedDistribution(((zero, F(1, 4)), (one, F(1, 2))), F(1, 4)),
        # interior contexts: the density part has mass 3/8 + 1/8 whichever half x is in
        (X_O,): MixedDistribution(((zero, F(1, 4)), (one, F(1, 4))), F(1, 2)),
    }
    return MixedMarkovModel((zero, one), rows)


def ex6_base(matrix=EX6_MATRIX) -> MarkovModel:
    return MarkovModel.from_matrix((F(1), F(2)), matrix)


def ex6_noise() -> MixedDistribution:
    return MixedDistribution(((F(0), F(1, 2)),), F(1, 2))


def ex6_noisy_markov(matrix=EX6_MATRIX) -> AdditiveNoiseSpec:
    return AdditiveNoiseSpec(ex6_base(matrix), ex6_noise())


def ex7_sticky() -> StickySpec:
    return StickySpec(F(1, 2))


_BUILDERS = {
    "ex2-finite-iid": ex2_finite_iid,
    "ex3-uniform": ex3_uniform,
    "ex4-mixed-iid": ex4_mixed_iid,
    "ex5-mixed-markov": ex5_mixed_markov,
    "ex6-noisy-markov": ex6_noisy_markov,
    "ex7-sticky": ex7_sticky,
}


def builtin_specs() -> dict[str, ProcessSpec]:
    """Fresh copies of every named example spec."""
    return {name: build() for name, build in _BUILDERS.items()}


def builtin_spec(name: str) -> ProcessSpec:
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise KeyError(f"unknown builtin spec {name!r}; choose from {sorted(_BUILDERS)}") from None
