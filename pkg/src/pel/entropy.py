"""Pattern block entropies: exact laws, Monte Carlo estimates and theoretical rates."""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterator, Mapping, Sequence

import numpy as np

from . import kernels
from .distributions import MixedDistribution, _plogp_bits, binary_entropy, entropy, tilde_of
from .patterns import DEFAULT_CAP, EnumerationCapError, Pattern, pattern_of, pattern_table, patterns_of_rows
from .processes import (
    IID,
    AdditiveNoiseSpec,
    HiddenMarkovModel,
    MarkovModel,
    MixedMarkovModel,
    ProcessSpec,
    StickySpec,
    hypothesis_warnings,
    lift,
    markov_entropy_rate,
    simulate_codes,
    spec_id as make_spec_id,
    tilde_process,
)

MAX_SEQUENCES = 1 << 22
ESTIMATORS = ("plugin", "miller_madow", "loglik")
CSV_COLUMNS = ("n", "H_block_bits", "H_cond_bits", "method", "stderr", "samples", "spec_id")
REPORT_VERSION = "pel-entropy-report/1"


@dataclass(frozen=True)
class PatternLaw:
    """Exact law of the length-``n`` pattern; patterns of probability zero are omitted."""

    n: int
    probs: Mapping[Pattern, Fraction]
    spec_id: str = ""

    def total(self) -> Fraction:
        return sum(self.probs.values(), Fraction(0))

    def __getitem__(self, pattern: Sequence[int]) -> Fraction:
        return self.probs.get(tuple(pattern), Fraction(0))


# --------------------------------------------------------------------------
# exact engines


def _check_n(n: int, cap: int) -> None:
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > cap:
        raise EnumerationCapError(f"n={n} exceeds the exact-engine cap {cap}")


def _markov_items(chain: MarkovModel, n: int) -> Iterator[tuple[tuple, Fraction]]:
    lifted = lift(chain)
    states = chain.states
    rows = chain.rows

    def walk(seq, ctx, p):
        if len(seq) == n:
            yield seq, p
            return
        for s, q in zip(states, rows[ctx]):
            if q:
                yield from walk(seq + (s,), ctx[1:] + (s,), p * q)

    for ctx, mu in zip(lifted.contexts, lifted.mu):
        if mu == 0:
            continue
        if n <= chain.order:
            yield ctx[:n], mu
        else:
            yield from walk(ctx, ctx, mu)


def _hmm_items(hmm: HiddenMarkovModel, n: int) -> Iterator[tuple[tuple, Fraction]]:
    lifted = lift(hmm.chain)
    k = len(lifted.contexts)
    em = [hmm.emissions[ctx[-1]] for ctx in lifted.contexts]
    P = lifted.P
    if n == 0:
        yield (), Fraction(1)
        return

    def walk(seq, alpha):
        if len(seq) == n:
            yield seq, sum(alpha, Fraction(0))
            return
        pred = [sum((alpha[i] * P[i][j] for i in range(k)), Fraction(0)) for j in range(k)]
        for o, sym in enumerate(hmm.symbols):
            nxt = [pred[j] * em[j][o] for j in range(k)]
            if any(nxt):
                yield from walk(seq + (sym,), nxt)

    for o, sym in enumerate(hmm.symbols):
        alpha = [lifted.mu[j] * em[j][o] for j in range(k)]
        if any(alpha):
            yield from walk((sym,), alpha)


def _alphabet_size(spec: ProcessSpec) -> int:
    if isinstance(spec, IID):
        return len(spec.dist.atoms)
    if isinstance(spec, MarkovModel):
        return len(spec.states)
    if isinstance(spec, HiddenMarkovModel):
        return len(spec.symbols)
    raise TypeError


def _discrete_view(spec: ProcessSpec) -> ProcessSpec | None:
    """A finite-alphabet process with the same law, or None if the process has a continuous part."""
    if isinstance(spec, IID):
        if spec.dist.continuous_mass:
            return None
        return MarkovModel.iid(dict(spec.dist.atoms))
    if isinstance(spec, (MarkovModel, HiddenMarkovModel)):
        return spec
    if isinstance(spec, (MixedMarkovModel, AdditiveNoiseSpec)):
        from .processes import is_discrete

        return tilde_process(spec) if is_discrete(spec) else None
    return None


def sequence_items(spec: ProcessSpec, n: int, max_sequences: int = MAX_SEQUENCES):
    """Every length-``n`` sequence with positive probability, with its exact probability."""
    view = _discrete_view(spec)
    if view is None:
        raise ValueError(f"{spec.kind} spec has no finite sequence law")
    if _alphabet_size(view) ** n > max_sequences:
        raise EnumerationCapError(f"{_alphabet_size(view)}**{n} sequences exceed {max_sequences}")
    if isinstance(view, HiddenMarkovModel):
        return _hmm_items(view, n)
    return _markov_items(view, n)


def sequence_law(spec: ProcessSpec, n: int, max_sequences: int = MAX_SEQUENCES) -> dict[tuple, Fraction]:
    law: dict[tuple, Fraction] = defaultdict(Fraction)
    for seq, p in sequence_items(spec, n, max_sequences):
        law[seq] += p
    return dict(law)


def sequence_block_entropy(spec: ProcessSpec, n: int, max_sequences: int = MAX_SEQUENCES) -> float:
    """H(X^n) in bits for a finite-alphabet spec."""
    return _entropy_of(sequence_law(spec, n, max_sequences).values())


@lru_cache(maxsize=1 << 18)
def _assign(mults: tuple[int, ...], mask: int, probs: tuple[Fraction, ...], c: Fraction) -> Fraction:
    if not mults:
        return Fraction(1)
    free = len(probs) - bin(mask).count("1")
    if sum(1 for m in mults if m > 1) > free:
        return Fraction(0)  # repeated labels must each take a distinct atom
    m, rest = mults[0], mults[1:]
    total = c * _assign(rest, mask, probs, c) if (m == 1 and c) else Fraction(0)
    for j in range(len(probs)):
        if not (mask >> j) & 1:
            total += probs[j] ** m * _assign(rest, mask | (1 << j), probs, c)
    return total


def _iid_profile_prob(mults: tuple[int, ...], probs: tuple[Fraction, ...], c: Fraction) -> Fraction:
    """Probability of one pattern with label multiplicities ``mults`` under a mixed i.i.d. law.

    Labels are assigned to atoms one cell at a time; an atom serves at
    most one label, and only a label seen once may come from the
    continuous part.  The memo is keyed on the remaining multiplicities,
    so profiles sorted in decreasing order share most of their work.
    """
    return _assign(tuple(sorted(mults, reverse=True)), 0, tuple(probs), Fraction(c))


def _mixed_iid_law(dist: MixedDistribution, n: int, cap: int) -> dict[Pattern, Fraction]:
    if n == 0:
        return {(): Fraction(1)}
    table = pattern_table(n, cap)
    counts = (table[:, :, None] == np.arange(1, n + 1, dtype=table.dtype)).sum(axis=1)
    profiles = -np.sort(-counts, axis=1)
    uniq, inv = np.unique(profiles, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    probs = [_iid_profile_prob(tuple(int(v) for v in row if v), dist.probs, dist.continuous_mass) for row in uniq]
    law = {}
    for row, i in zip(table.tolist(), inv.tolist()):
        if probs[i]:
            law[tuple(row)] = probs[i]
    return law


def _sticky_law(rho: Fraction, n: int) -> dict[Pattern, Fraction]:
    if n == 0:
        return {(): Fraction(1)}
    law = {}
    for steps in product((True, False), repeat=n - 1):
        labels = [1]
        p = Fraction(1)
        for repeat in steps:
            if repeat:
                labels.append(labels[-1])
                p *= rho
            else:
                labels.append(max(labels) + 1)
                p *= 1 - rho
        if p:
            law[tuple(labels)] = p
    return law


def exact_pattern_law(
    spec: ProcessSpec, n: int, cap: int = DEFAULT_CAP, max_sequences: int = MAX_SEQUENCES
) -> PatternLaw:
    """Exact law of Z^n.

    Finite-alphabet specs are enumerated sequence by sequence; mixed
    i.i.d. specs are summed pattern by pattern over atom assignments; the
    sticky chain has a closed form.
    """
    _check_n(n, cap)
    sid = make_spec_id(spec)
    if isinstance(spec, StickySpec):
        return PatternLaw(n, _sticky_law(spec.repeat_prob, n), sid)
    if isinstance(spec, IID) and spec.dist.continuous_mass:
        return PatternLaw(n, _mixed_iid_law(spec.dist, n, cap), sid)
    if isinstance(spec, IID) and len(spec.dist.atoms) ** n > max_sequences:
        return PatternLaw(n, _mixed_iid_law(spec.dist, n, cap), sid)
    if _discrete_view(spec) is None:
        raise ValueError(f"no exact pattern law for {spec.kind} specs with a continuous part")
    law: dict[Pattern, Fraction] = defaultdict(Fraction)
    for seq, p in sequence_items(spec, n, max_sequences):
        law[pattern_of(seq)] += p
    return PatternLaw(n, dict(law), sid)


def _entropy_of(probs) -> float:
    return max(0.0, math.fsum(_plogp_bits(p) if isinstance(p, Fraction) else -p * math.log2(p) for p in probs if p))


def block_entropy(law: PatternLaw) -> float:
    """H(Z^n) in bits."""
    return _entropy_of(law.probs.values())


def conditional_entropy(prev: PatternLaw, law: PatternLaw) -> float:
    """H(Z_n | Z^{n-1}) as the difference of consecutive block entropies."""
    if prev.spec_id != law.spec_id:
        raise ValueError("laws come from different specs")
    if law.n != prev.n + 1:
        raise ValueError("block lengths must differ by one")
    return max(0.0, block_entropy(law) - block_entropy(prev))


conditional_profile = conditional_entropy


def _integer_partitions(n: int, largest: int | None = None) -> Iterator[tuple[int, ...]]:
    largest = n if largest is None else largest
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in _integer_partitions(n - first, first):
            yield (first,) + rest


def _set_partitions_of_type(parts: tuple[int, ...]) -> int:
    n = sum(parts)
    denom = 1
    for v in parts:
        denom *= math.factorial(v)
    for k in Counter(parts).values():
        denom *= math.factorial(k)
    return math.factorial(n) // denom


def iid_block_entropy(dist: MixedDistribution, n: int) -> float:
    """H(Z^n) for a mixed i.i.d. source, summed over block-size profiles.

    Patterns sharing a multiset of label multiplicities are equiprobable,
    so this needs one probability per integer partition of ``n`` and
    scales far beyond the enumeration cap.
    """
    terms = []
    for parts in _integer_partitions(n):
        p = _iid_profile_prob(parts, dist.probs, dist.continuous_mass)
        if p:
            terms.append(_set_partitions_of_type(parts) * _plogp_bits(p))
    return max(0.0, math.fsum(terms))


# --------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class EntropyRow:
    n: int
    block: float
    cond: float
    method: str
    block_stderr: float | None = None
    cond_stderr: float | None = None
    samples: int | None = None
    plugin_block: float | None = None
    plugin_cond: float | None = None


@dataclass
class EntropyReport:
    spec_id: str
    rows: list[EntropyRow] = field(default_factory=list)
    estimator: str | None = None

    def row(self, n: int) -> EntropyRow:
        for r in self.rows:
            if r.n == n:
                return r
        raise KeyError(n)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# {REPORT_VERSION} estimator={self.estimator or 'exact'}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow(
                [
                    r.n,
                    repr(r.block),
                    repr(r.cond),
                    r.method,
                    "" if r.cond_stderr is None else repr(r.cond_stderr),
                    "" if r.samples is None else r.samples,
                    self.spec_id,
                ]
            )
        return buf.getvalue()

    def to_json(self) -> str:
        payload = {
            "version": REPORT_VERSION,
            "spec_id": self.spec_id,
            "estimator": self.estimator,
            "rows": [asdict(r) for r in self.rows],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def exact_profile(spec: ProcessSpec, n_max: int, cap: int = DEFAULT_CAP, spec_id: str | None = None) -> EntropyReport:
    """Exact H(Z^n) and H(Z_n | Z^{n-1}) for n = 1..n_max."""
    report = EntropyReport(spec_id or make_spec_id(spec))
    prev = 0.0
    for n in range(1, n_max + 1):
        h = block_entropy(exact_pattern_law(spec, n, cap))
        report.rows.append(EntropyRow(n, h, max(0.0, h - prev), "exact"))
        prev = h
    return report


# --------------------------------------------------------------------------
# Monte Carlo


def _plugin(counts: np.ndarray, total: float, miller_madow: bool) -> float:
    c = counts[counts > 0]
    h = math.log2(total) - float(np.sum(c * np.log2(c))) / total
    if miller_madow:
        h += (c.size - 1) / (2 * total * math.log(2))
    return max(0.0, h)


def pattern_step_probs(spec: ProcessSpec, pats: np.ndarray) -> np.ndarray:
    """P(Z_i = z_i | Z^{i-1} = z^{i-1}) for every row and step of ``pats``.

    Available for i.i.d. specs with at most 16 atoms and for the sticky chain.
    """
    pats = np.asarray(pats, dtype=np.int64)
    if isinstance(spec, IID):
        if len(spec.dist.atoms) > 16:
            raise ValueError("too many atoms for the step-probability kernel")
        probs = np.array([float(p) for p in spec.dist.probs])
        return kernels.iid_step_probs(pats, probs, float(spec.dist.continuous_mass))
    if isinstance(spec, StickySpec):
        rho = float(spec.repeat_prob)
        out = np.ones(pats.shape)
        if pats.shape[1] > 1:
            top = np.maximum.accumulate(pats, axis=1)
            rep = pats[:, 1:] == pats[:, :-1]
            new = pats[:, 1:] == top[:, :-1] + 1
            out[:, 1:] = np.where(rep, rho, np.where(new, 1 - rho, 0.0))
        return out
    raise ValueError(f"loglik estimator is not available for {spec.kind} specs")


def _prefix_ids(pats: np.ndarray, upto: int) -> list[np.ndarray]:
    """ids[k] labels each row by its length-k prefix (equal ids iff equal prefixes)."""
    m = pats.shape[0]
    ids = [np.zeros(m, dtype=np.int64)]
    width = int(pats.max(initial=0)) + 1
    for k in range(1, upto + 1):
        key = ids[-1] * width + pats[:, k - 1]
        _, inv = np.unique(key, return_inverse=True)
        ids.append(inv.reshape(-1).astype(np.int64))
    return ids


def mc_pattern_entropy(
    spec: ProcessSpec,
    n: int,
    samples: int,
    seed: int,
    estimator: str = "plugin",
    lengths: Sequence[int] | None = None,
    bootstrap: int = 200,
    workers: int = 1,
    spec_id: str | None = None,
) -> EntropyReport:
    """Monte Carlo pattern entropies from ``samples`` simulated trajectories.

    ``plugin`` and ``miller_madow`` use empirical pattern frequencies, and
    conditional values are differences of block estimates.  ``loglik``
    averages exact per-sample pattern log-probabilities, which stays
    accurate when nearly every sampled pattern is distinct.  Standard
    errors come from a nonparametric bootstrap over trajectories.
    """
    if estimator not in ESTIMATORS:
        raise ValueError(f"estimator must be one of {ESTIMATORS}")
    if samples < 100:
        raise ValueError("need at least 100 samples")
    if n < 1:
        raise ValueError("n must be positive")
    lengths = sorted(set(lengths)) if lengths is not None else list(range(1, n + 1))
    if not lengths or lengths[0] < 1 or lengths[-1] > n:
        raise ValueError("lengths must lie in 1..n")

    codes = simulate_codes(spec, n, samples, seed, workers).codes
    pats = patterns_of_rows(codes)
    boot_rng = np.random.default_rng(np.random.SeedSequence([seed, 0xB007]))
    report = EntropyReport(spec_id or make_spec_id(spec), estimator=estimator)
    m = samples

    ids = _prefix_ids(pats, lengths[-1])
    need = sorted(set(lengths) | {k - 1 for k in lengths})
    raw = {k: _plugin(np.bincount(ids[k]), m, False) if k else 0.0 for k in need}

    if estimator == "loglik":
        step = pattern_step_probs(spec, pats)
        with np.errstate(divide="ignore"):
            info = -np.log2(step)
        if not np.all(np.isfinite(info)):
            raise FloatingPointError("a sampled pattern has probability zero under the model")
        block_samples = np.cumsum(info, axis=1)
        cols = np.array(lengths) - 1
        block = block_samples[:, cols].mean(axis=0)
        cond = info[:, cols].mean(axis=0)
        bb = np.empty((bootstrap, cols.size))
        bc = np.empty((bootstrap, cols.size))
        for b in range(bootstrap):
            w = np.bincount(boot_rng.integers(0, m, m), minlength=m).astype(float)
            bb[b] = w @ block_samples[:, cols] / m
            bc[b] = w @ info[:, cols] / m
    else:
        mm = estimator == "miller_madow"
        h = {k: _plugin(np.bincount(ids[k]), m, mm) if k else 0.0 for k in need}
        block = np.array([h[k] for k in lengths])
        cond = np.array([h[k] - h[k - 1] for k in lengths])
        bb = np.empty((bootstrap, len(lengths)))
        bc = np.empty((bootstrap, len(lengths)))
        for b in range(bootstrap):
            w = np.bincount(boot_rng.integers(0, m, m), minlength=m).astype(float)
            hb = {k: _plugin(np.bincount(ids[k], weights=w), m, mm) if k else 0.0 for k in need}
            bb[b] = [hb[k] for k in lengths]
            bc[b] = [hb[k] - hb[k - 1] for k in lengths]

    se_b = bb.std(axis=0, ddof=1) if bootstrap > 1 else np.full(len(lengths), np.nan)
    se_c = bc.std(axis=0, ddof=1) if bootstrap > 1 else np.full(len(lengths), np.nan)
    for i, k in enumerate(lengths):
        report.rows.append(
            EntropyRow(
                k,
                float(block[i]),
                float(max(cond[i], 0.0)) if estimator != "loglik" else float(cond[i]),
                "monte_carlo",
                float(se_b[i]),
                float(se_c[i]),
                m,
                raw[k],
                max(0.0, raw[k] - raw[k - 1]),
            )
        )
    return report


# --------------------------------------------------------------------------
# hidden-Markov brackets


def _belief_steps(init_w, init_b, T, E, n, decimals=13):
    """Yield H(Y_k | Y^{k-1}, init) for k = 1..n by propagating merged beliefs."""
    w, beliefs = np.asarray(init_w, float), np.asarray(init_b, float)
    for _ in range(n):
        q = beliefs @ E  # (B, O)
        with np.errstate(divide="ignore", invalid="ignore"):
            hq = -np.where(q > 0, q * np.log2(q), 0.0).sum(axis=1)
        yield float(np.dot(w, hq))
        post = beliefs[:, None, :] * E.T[None, :, :]  # (B, O, K)
        with np.errstate(divide="ignore", invalid="ignore"):
            post = post / q[:, :, None]
        keep = (q > 0).reshape(-1)
        pred = (post.reshape(-1, beliefs.shape[1]) @ T)[keep]
        wn = (w[:, None] * q).reshape(-1)[keep]
        key = np.round(pred, decimals)
        _, first, inv = np.unique(key, axis=0, return_index=True, return_inverse=True)
        inv = inv.reshape(-1)
        w = np.bincount(inv, weights=wn)
        beliefs = pred[first]


def hmm_bracket_profile(hmm: HiddenMarkovModel, n: int, cap: int = 16) -> list[tuple[int, float, float]]:
    """``(k, lower_k, upper_k)`` for k = 1..n.

    upper_k = H(Y_k | Y^{k-1}) and lower_k = H(Y_k | Y^{k-1}, X_1), computed
    by forward recursion over observation prefixes with prefixes that
    share a belief state merged.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if n > cap:
        raise EnumerationCapError(f"n={n} exceeds the forward-recursion cap {cap}")
    lifted = lift(hmm.chain)
    T = np.array([[float(p) for p in row] for row in lifted.P])
    E = np.array([[float(p) for p in hmm.emissions[ctx[-1]]] for ctx in lifted.contexts])
    mu = np.array([float(p) for p in lifted.mu])
    upper = list(_belief_steps([1.0], mu[None, :], T, E, n))
    lower = list(_belief_steps(mu, np.eye(len(mu)), T, E, n))
    return [(k + 1, lower[k], upper[k]) for k in range(n)]


def hmm_entropy_bracket(hmm: HiddenMarkovModel, n: int, cap: int = 16) -> tuple[float, float]:
    """``(lower_n, upper_n)`` sandwiching the entropy rate of the observations."""
    _, lo, hi = hmm_bracket_profile(hmm, n, cap)[-1]
    return lo, hi


# --------------------------------------------------------------------------
# theoretical rates


@dataclass(frozen=True)
class RateResult:
    """Pattern entropy rate in bits per symbol.

    ``value`` is None when only a bracket ``[lower, upper]`` is available.
    ``tilde_rate`` is the rate of the atom-clumped process.
    """

    value: float | None
    tilde_rate: float | None
    basis: str
    lower: float | None = None
    upper: float | None = None
    warnings: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return asdict(self)


def theoretical_rate(spec: ProcessSpec, bracket_n: int = 12) -> RateResult:
    warnings = tuple(hypothesis_warnings(spec))
    if isinstance(spec, IID):
        h = entropy(tilde_of(spec.dist))
        return RateResult(h, h, "iid: entropy of the clumped marginal", warnings=warnings)
    if isinstance(spec, MarkovModel):
        h = markov_entropy_rate(spec)
        return RateResult(h, h, "markov: stationary entropy rate", warnings=warnings)
    if isinstance(spec, MixedMarkovModel):
        h = markov_entropy_rate(spec.tilde_chain())
        return RateResult(h, h, "mixed markov: rate of the clumped chain", warnings=warnings)
    if isinstance(spec, StickySpec):
        return RateResult(
            binary_entropy(spec.repeat_prob),
            0.0,
            "sticky: each step repeats or opens a new label",
            warnings=warnings,
        )
    if isinstance(spec, (AdditiveNoiseSpec, HiddenMarkovModel)):
        hmm = tilde_process(spec)
        lo, hi = hmm_entropy_bracket(hmm, bracket_n)
        return RateResult(
            None, None, f"hidden markov: conditional-entropy bracket at n={bracket_n}", lo, hi, warnings
        )
    raise TypeError(f"unsupported spec {type(spec).__name__}")
