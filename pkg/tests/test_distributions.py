import json
import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pel.distributions import (
    X_O,
    ContinuumToken,
    DiscreteDistribution,
    MixedDistribution,
    Outside,
    as_prob,
    binary_entropy,
    clump,
    entropy,
    mixed_from_json,
    mixed_to_json,
    sample,
    sample_codes,
    tilde_of,
)

EX4 = MixedDistribution(((F(0), F(1, 3)), (F(1), F(1, 3))), F(1, 3))


def test_validation():
    with pytest.raises(ValueError):
        MixedDistribution((("a", F(1, 2)),), F(1, 4))
    with pytest.raises(ValueError):
        MixedDistribution((("a", F(1, 2)), ("a", F(1, 2))))
    with pytest.raises(ValueError):
        MixedDistribution((("a", F(0)),), F(1))
    with pytest.raises(ValueError):
        MixedDistribution((("a", F(3, 2)),))
    with pytest.raises(TypeError):
        as_prob(True)
    assert as_prob(0.1) == F(1, 10)
    assert as_prob("3/4") == F(3, 4)


def test_atoms_sorted():
    d = MixedDistribution((("a", F(1, 8)), ("b", F(1, 2)), ("c", F(1, 8))), F(1, 4))
    assert d.labels == ("b", "a", "c")


def test_clump_and_tilde():
    t = tilde_of(EX4)
    assert t.as_dict() == {F(0): F(1, 3), F(1): F(1, 3), X_O: F(1, 3)}
    assert entropy(t) == pytest.approx(math.log2(3), abs=1e-15)
    assert clump(EX4, [F(0)]).as_dict() == {F(0): F(1, 3), X_O: F(2, 3)}
    with pytest.raises(ValueError):
        clump(EX4, ["zz"])


def test_tilde_edge_cases():
    pure = MixedDistribution.discrete({"a": F(1, 2), "b": F(1, 2)})
    assert tilde_of(pure).as_dict() == {"a": F(1, 2), "b": F(1, 2)}
    dens = MixedDistribution((), F(1))
    assert entropy(tilde_of(dens)) == 0.0
    assert entropy(MixedDistribution.discrete({"x": 1})) == 0.0


def test_outside_label_avoids_atoms():
    d = MixedDistribution.discrete({X_O: F(1, 2), "b": F(1, 2)})
    assert d.clump_label == Outside("x_o'")


def test_entropy_values():
    assert entropy(DiscreteDistribution.from_dict({1: F(3, 4), 2: F(1, 4)})) == pytest.approx(2 - 0.75 * math.log2(3), abs=1e-15)
    assert entropy([0.5, 0.5, 0.0]) == 1.0
    assert binary_entropy(0) == 0.0 and binary_entropy(1) == 0.0


@given(st.lists(st.integers(1, 50), min_size=1, max_size=8))
def test_entropy_bounds(ws):
    total = sum(ws)
    d = DiscreteDistribution(tuple((i, F(w, total)) for i, w in enumerate(ws)))
    h = entropy(d)
    assert -1e-12 <= h <= math.log2(len(ws)) + 1e-12


def test_sampling_frequencies():
    rng = np.random.default_rng(0)
    codes = sample_codes(EX4, 60_000, rng)
    freqs = [(codes == 0).mean(), (codes == 1).mean(), (codes == -1).mean()]
    assert np.allclose(freqs, [1 / 3] * 3, atol=0.01)


def test_sample_tokens_distinct():
    rng = np.random.default_rng(1)
    draws = [sample(MixedDistribution((), F(1)), rng) for _ in range(200)]
    assert all(isinstance(d, ContinuumToken) for d in draws)
    assert len(set(draws)) == 200
    rng_a, rng_b = np.random.default_rng(5), np.random.default_rng(5)
    assert [sample(EX4, rng_a) for _ in range(20)] == [sample(EX4, rng_b) for _ in range(20)]


def test_json_roundtrip():
    obj = mixed_to_json(EX4)
    assert json.loads(json.dumps(obj)) == obj
    back = mixed_from_json(obj)
    assert back.atoms == EX4.atoms and back.continuous_mass == EX4.continuous_mass
    named = mixed_from_json({"atoms": [{"label": "cat", "prob": "1/2"}, {"label": 0.25, "prob": 0.5}]})
    assert named.prob("cat") == F(1, 2) and named.prob(F(1, 4)) == F(1, 2)
