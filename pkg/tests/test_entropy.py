import json
import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from oracles import H, markov_sequence_law, mixed_iid_law, pattern_law_from
from pel import entropy as ent
from pel.distributions import MixedDistribution
from pel.library import ex2_finite_iid, ex4_mixed_iid, ex5_mixed_markov, ex6_noisy_markov, ex7_sticky
from pel.patterns import EnumerationCapError, is_valid_pattern, patterns_of_rows
from pel.processes import IID, AdditiveNoiseSpec, MarkovModel, StickySpec, markov_entropy_rate, simulate_codes, tilde_process

LOG2_3 = math.log2(3)
BERN = IID(MixedDistribution.discrete({0: F(1, 2), 1: F(1, 2)}))


def test_bernoulli_n3():
    law = ent.exact_pattern_law(BERN, 3)
    assert law.probs == {(1, 1, 1): F(1, 4), (1, 1, 2): F(1, 4), (1, 2, 1): F(1, 4), (1, 2, 2): F(1, 4)}
    assert law[(1, 2, 3)] == 0
    assert ent.block_entropy(law) == 2.0


def test_half_atom_n2():
    law = ent.exact_pattern_law(IID(MixedDistribution(((0, F(1, 2)),), F(1, 2))), 2)
    assert law.probs == {(1, 1): F(1, 4), (1, 2): F(3, 4)}


@pytest.mark.parametrize("n", [1, 3, 6])
def test_pure_density(n):
    law = ent.exact_pattern_law(IID(MixedDistribution((), F(1))), n)
    assert law.probs == {tuple(range(1, n + 1)): F(1)}


@pytest.mark.parametrize("n", range(1, 6))
def test_ex4_law_matches_bruteforce(n):
    law = ent.exact_pattern_law(ex4_mixed_iid(), n)
    assert law.probs == mixed_iid_law([F(1, 3), F(1, 3)], F(1, 3), n)
    assert law.total() == 1


@given(st.lists(st.integers(1, 6), min_size=2, max_size=4), st.integers(1, 4))
@settings(max_examples=25, deadline=None)
def test_mixed_iid_random(ws, n):
    total = sum(ws)
    probs = [F(w, total) for w in ws]
    dist = MixedDistribution(tuple((i, p) for i, p in enumerate(probs[:-1])), probs[-1])
    law = ent.exact_pattern_law(IID(dist), n)
    assert law.probs == mixed_iid_law(probs[:-1], probs[-1], n)
    assert all(is_valid_pattern(p) and len(p) == n for p in law.probs)


def test_markov_law_matches_bruteforce():
    P = [[F(2, 3), F(1, 3)], [F(1, 4), F(3, 4)]]
    chain = MarkovModel.from_matrix("ab", P)
    mu = oracles.stationary_2x2(P)
    for n in range(1, 7):
        want = markov_sequence_law("ab", P, mu, n)
        assert ent.sequence_law(chain, n) == want
        assert ent.exact_pattern_law(chain, n).probs == pattern_law_from(want)


@pytest.mark.parametrize("n", range(1, 13))
def test_sticky_and_bernoulli_profiles(n):
    assert ent.block_entropy(ent.exact_pattern_law(ex7_sticky(), n)) == n - 1
    assert ent.block_entropy(ent.exact_pattern_law(BERN, n)) == n - 1


def test_sticky_general_rho():
    rho = F(1, 3)
    law = ent.exact_pattern_law(StickySpec(rho), 6)
    assert law.total() == 1 and len(law.probs) == 32
    assert ent.block_entropy(law) == pytest.approx(5 * oracles.H([rho, 1 - rho]), abs=1e-12)


@pytest.mark.parametrize("n", range(1, 8))
def test_profile_route_agrees(n):
    d = ex4_mixed_iid().dist
    assert ent.iid_block_entropy(d, n) == pytest.approx(ent.block_entropy(ent.exact_pattern_law(IID(d), n)), abs=1e-12)


def test_corollary6_trend():
    d = ex4_mixed_iid().dist
    h = [ent.iid_block_entropy(d, n) for n in range(0, 41)]
    cond = [b - a for a, b in zip(h, h[1:])]
    assert all(c >= LOG2_3 - 0.01 for c in cond[30:])
    assert all(b >= a - 1e-12 for a, b in zip(h, h[1:]))


def test_conditional_requires_matching_laws():
    a = ent.exact_pattern_law(BERN, 3)
    b = ent.exact_pattern_law(ex4_mixed_iid(), 4)
    with pytest.raises(ValueError):
        ent.conditional_entropy(a, b)
    with pytest.raises(ValueError):
        ent.conditional_entropy(a, ent.exact_pattern_law(BERN, 5))
    assert ent.conditional_entropy(a, ent.exact_pattern_law(BERN, 4)) == 1.0


def test_errors():
    with pytest.raises(EnumerationCapError):
        ent.exact_pattern_law(BERN, 13)
    with pytest.raises(ValueError):
        ent.exact_pattern_law(ex5_mixed_markov(), 3)
    with pytest.raises(ValueError):
        ent.mc_pattern_entropy(BERN, 4, 50, 1)
    with pytest.raises(ValueError):
        ent.mc_pattern_entropy(BERN, 4, 500, 1, estimator="magic")
    with pytest.raises(ValueError):
        ent.mc_pattern_entropy(ex5_mixed_markov(), 4, 500, 1, estimator="loglik")


def test_noisy_discrete_uses_hmm_law():
    noise = MixedDistribution(((F(0), F(1, 2)), (F(1), F(1, 2))))
    spec = AdditiveNoiseSpec(ex6_noisy_markov().base, noise)
    law = ent.exact_pattern_law(spec, 5)
    assert law.total() == 1
    hmm_law = ent.exact_pattern_law(tilde_process(ex6_noisy_markov()), 5)
    assert hmm_law.total() == 1


def test_data_processing_examples():
    for spec in (ex2_finite_iid(), tilde_process(ex5_mixed_markov())):
        for n in range(1, 7):
            assert ent.block_entropy(ent.exact_pattern_law(spec, n)) <= ent.sequence_block_entropy(spec, n) + 1e-12


# --------------------------------------------------------------------------
# Monte Carlo


def test_mc_trivial_processes():
    point = IID(MixedDistribution.discrete({"z": 1}))
    dens = IID(MixedDistribution((), F(1)))
    for spec in (point, dens):
        for est in ("plugin", "miller_madow"):
            rep = ent.mc_pattern_entropy(spec, 6, 300, 1, est, bootstrap=20)
            assert all(r.block == 0.0 and r.cond == 0.0 for r in rep.rows)
    rep = ent.mc_pattern_entropy(dens, 6, 300, 1, "loglik", bootstrap=20)
    assert all(r.block == 0.0 for r in rep.rows)


def test_step_probs_multiply_to_law():
    spec = ex4_mixed_iid()
    pats = patterns_of_rows(simulate_codes(spec, 5, 200, seed=2).codes)
    step = ent.pattern_step_probs(spec, pats)
    law = ent.exact_pattern_law(spec, 5)
    got = np.prod(step, axis=1)
    want = np.array([float(law[tuple(r)]) for r in pats.tolist()])
    assert np.allclose(got, want, rtol=1e-12, atol=0)


def test_sticky_step_probs():
    pats = np.array([[1, 1, 2, 2, 3]])
    assert ent.pattern_step_probs(ex7_sticky(), pats).tolist() == [[1.0, 0.5, 0.5, 0.5, 0.5]]


@pytest.mark.parametrize("spec,est", [(ex2_finite_iid(), "plugin"), (ex2_finite_iid(), "miller_madow"), (ex4_mixed_iid(), "loglik")])
def test_mc_consistency(spec, est):
    n = 4
    exact = ent.block_entropy(ent.exact_pattern_law(spec, n))
    hits = 0
    for seed in range(20):
        row = ent.mc_pattern_entropy(spec, n, 3000, seed, est, lengths=[n], bootstrap=60).row(n)
        hits += abs(row.block - exact) <= 4 * row.block_stderr
    assert hits >= 19


def test_mc_ex4_loglik_converges():
    row = ent.mc_pattern_entropy(ex4_mixed_iid(), 40, 5000, 3, "loglik", lengths=[40], bootstrap=50).row(40)
    assert abs(row.cond - LOG2_3) < 0.05


def test_mc_determinism_and_workers():
    a = ent.mc_pattern_entropy(ex4_mixed_iid(), 8, 2000, 5, bootstrap=30)
    b = ent.mc_pattern_entropy(ex4_mixed_iid(), 8, 2000, 5, bootstrap=30)
    assert a.to_csv() == b.to_csv()
    c = ent.mc_pattern_entropy(ex4_mixed_iid(), 8, 2000, 5, bootstrap=30, workers=2)
    d = ent.mc_pattern_entropy(ex4_mixed_iid(), 8, 2000, 5, bootstrap=30, workers=2)
    assert c.to_json() == d.to_json()


def test_report_format():
    rep = ent.exact_profile(BERN, 4)
    lines = rep.to_csv().splitlines()
    assert lines[0].startswith("#")
    assert lines[1] == "n,H_block_bits,H_cond_bits,method,stderr,samples,spec_id"
    assert lines[2].split(",")[:4] == ["1", "0.0", "0.0", "exact"]
    payload = json.loads(rep.to_json())
    assert [r["n"] for r in payload["rows"]] == [1, 2, 3, 4]
    assert rep.row(1).block == 0.0
    blocks = [r.block for r in rep.rows]
    assert blocks == sorted(blocks) and all(r.cond >= 0 for r in rep.rows)


# --------------------------------------------------------------------------
# rates and brackets


def test_rates():
    assert ent.theoretical_rate(ex4_mixed_iid()).value == pytest.approx(LOG2_3, abs=1e-12)
    assert ent.theoretical_rate(ex5_mixed_markov()).value == pytest.approx(oracles.EX5_RATE, abs=1e-12)
    r7 = ent.theoretical_rate(ex7_sticky())
    assert (r7.value, r7.tilde_rate) == (1.0, 0.0) and r7.warnings
    r6 = ent.theoretical_rate(ex6_noisy_markov())
    assert r6.value is None and r6.lower <= r6.upper


def test_bracket_monotone():
    prof = ent.hmm_bracket_profile(tilde_process(ex6_noisy_markov()), 16)
    lo = [p[1] for p in prof]
    hi = [p[2] for p in prof]
    assert all(a <= b + 1e-12 for a, b in zip(lo, hi))
    assert all(b <= a + 1e-12 for a, b in zip(hi, hi[1:]))
    assert all(b >= a - 1e-12 for a, b in zip(lo, lo[1:]))
    with pytest.raises(EnumerationCapError):
        ent.hmm_entropy_bracket(tilde_process(ex6_noisy_markov()), 17)


def test_bracket_matches_enumeration():
    hmm = tilde_process(ex6_noisy_markov())
    h = [0.0] + [H(ent.sequence_law(hmm, n).values()) for n in range(1, 8)]
    for k, _, hi in ent.hmm_bracket_profile(hmm, 7):
        assert hi == pytest.approx(h[k] - h[k - 1], abs=1e-10)


def test_zero_noise_bracket():
    base = ex6_noisy_markov().base
    spec = AdditiveNoiseSpec(base, MixedDistribution(((F(0), F(1)),)))
    rate = markov_entropy_rate(base)
    for k, lo, hi in ent.hmm_bracket_profile(tilde_process(spec), 10):
        if k >= 2:
            assert lo == pytest.approx(rate, abs=1e-12) and hi == pytest.approx(rate, abs=1e-12)


def test_iid_bracket_collapse():
    row = (F(1, 5), F(4, 5))
    spec = ex6_noisy_markov((row, row))
    target = 1 + 0.5 * oracles.H(row)
    for k, lo, hi in ent.hmm_bracket_profile(tilde_process(spec), 12):
        assert hi == pytest.approx(target, abs=1e-9)
        if k >= 2:
            assert lo == pytest.approx(target, abs=1e-9)
