"""Generative processes, stationary analysis, tilde processes and simulation.

Process specs are small frozen dataclasses.  Transition probabilities are
exact Fractions; stationary laws are solved exactly.  Simulation works on
integer *codes*: a nonnegative code indexes an atom label, a negative code
is a continuum draw that is unique within the batch (a repeat of the same
negative code means the process copied an earlier value, as in the sticky
chain).
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Hashable, Mapping, Sequence, Union

import numpy as np

from .distributions import (
    X_O,
    DiscreteDistribution,
    MixedDistribution,
    Outside,
    _outside_for,
    as_prob,
    category_cdf,
    entropy,
    fresh_token,
    label_from_json,
    label_to_json,
    mixed_from_json,
    mixed_to_json,
    prob_to_json,
    sample_codes,
    tilde_of,
)

Symbol = Hashable


class NonErgodicError(ValueError):
    """The chain's positive-probability transition graph is not strongly connected."""


# --------------------------------------------------------------------------
# specs


@dataclass(frozen=True)
class IID:
    dist: MixedDistribution
    kind = "iid"


@dataclass(frozen=True)
class MarkovModel:
    """Finite-alphabet chain of order ``order``.

    ``rows`` maps each context (a tuple of ``order`` state labels) to the
    next-state probabilities, aligned with ``states``.
    """

    states: tuple
    rows: Mapping[tuple, tuple[Fraction, ...]]
    order: int = 1
    kind = "markov"

    def __post_init__(self):
        states = tuple(self.states)
        if len(set(states)) != len(states) or not states:
            raise ValueError("states must be distinct and nonempty")
        if self.order < 1:
            raise ValueError("order must be positive")
        known = set(states)
        rows = {}
        for ctx, probs in self.rows.items():
            ctx = tuple(ctx)
            if len(ctx) != self.order or not set(ctx) <= known:
                raise ValueError(f"bad context {ctx!r}")
            probs = tuple(as_prob(p) for p in probs)
            if len(probs) != len(states):
                raise ValueError(f"row {ctx!r} has {len(probs)} entries, expected {len(states)}")
            if sum(probs) != 1:
                raise ValueError(f"row {ctx!r} does not sum to 1")
            rows[ctx] = probs
        for ctx, probs in rows.items():
            for s, p in zip(states, probs):
                if p > 0 and ctx[1:] + (s,) not in rows:
                    raise ValueError(f"context {ctx[1:] + (s,)!r} is reachable but has no row")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_matrix(cls, states: Sequence[Symbol], matrix: Sequence[Sequence[Any]]) -> "MarkovModel":
        states = tuple(states)
        return cls(states, {(s,): tuple(row) for s, row in zip(states, matrix)})

    @classmethod
    def iid(cls, dist: Mapping[Symbol, Any]) -> "MarkovModel":
        states = tuple(dist)
        row = tuple(dist[s] for s in states)
        return cls(states, {(s,): row for s in states})

    @property
    def matrix(self) -> list[list[Fraction]]:
        if self.order != 1:
            raise ValueError("matrix is defined for first-order chains only")
        return [list(self.rows[(s,)]) for s in self.states]

    def row(self, ctx: Sequence[Symbol]) -> DiscreteDistribution:
        return DiscreteDistribution(tuple(zip(self.states, self.rows[tuple(ctx)])))


@dataclass(frozen=True)
class MixedMarkovModel:
    """Chain on a mixed alphabet whose kernels only depend on which slots hold atoms.

    ``rows`` is keyed by contexts over ``atoms`` plus ``clump_label``; a
    context containing the clump label stands for every context with a
    non-atom value in that slot.  Each row puts its atoms inside ``atoms``.
    """

    atoms: tuple
    rows: Mapping[tuple, MixedDistribution]
    order: int = 1
    clump_label: Symbol = X_O
    kind = "mixed_markov"

    def __post_init__(self):
        atoms = tuple(self.atoms)
        if self.clump_label in atoms:
            raise ValueError("clump label collides with an atom")
        support = frozenset(atoms)
        alphabet = support | {self.clump_label}
        rows = {}
        for ctx, dist in self.rows.items():
            ctx = tuple(ctx)
            if len(ctx) != self.order or not set(ctx) <= alphabet:
                raise ValueError(f"bad context {ctx!r}")
            if not dist.support <= support:
                raise ValueError(f"row {ctx!r} has atoms outside {set(atoms)!r}")
            rows[ctx] = dist
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "rows", rows)
        self.tilde_chain()  # validates context coverage

    def tilde_chain(self) -> MarkovModel:
        states = self.atoms + (self.clump_label,)
        rows = {}
        for ctx, dist in self.rows.items():
            rows[ctx] = tuple(dist.prob(s) for s in self.atoms) + (dist.continuous_mass,)
        return MarkovModel(states, rows, self.order)


@dataclass(frozen=True)
class AdditiveNoiseSpec:
    """Finite Markov source over exact numbers plus i.i.d. additive noise."""

    base: MarkovModel
    noise: MixedDistribution
    kind = "noisy"

    def __post_init__(self):
        for s in self.base.states:
            if not isinstance(s, Fraction):
                raise ValueError("base states must be exact rationals")
        for lab in self.noise.labels:
            if not isinstance(lab, Fraction):
                raise ValueError("noise atoms must be exact rationals")

    @property
    def output_atoms(self) -> tuple[Fraction, ...]:
        return tuple(sorted({x + n for x in self.base.states for n in self.noise.labels}))


@dataclass(frozen=True)
class StickySpec:
    """Repeat the previous value with probability ``repeat_prob``, else draw a fresh continuum value."""

    repeat_prob: Fraction = Fraction(1, 2)
    kind = "sticky"

    def __post_init__(self):
        rho = as_prob(self.repeat_prob)
        if rho >= 1:
            raise ValueError("repeat probability must be < 1")
        object.__setattr__(self, "repeat_prob", rho)


@dataclass(frozen=True)
class HiddenMarkovModel:
    """Discrete observations emitted from the current state of a finite chain."""

    chain: MarkovModel
    symbols: tuple
    emissions: Mapping[Symbol, tuple[Fraction, ...]]
    kind = "hidden_markov"

    def __post_init__(self):
        symbols = tuple(self.symbols)
        em = {}
        for s in self.chain.states:
            probs = tuple(as_prob(p) for p in self.emissions[s])
            if len(probs) != len(symbols) or sum(probs) != 1:
                raise ValueError(f"bad emission row for state {s!r}")
            em[s] = probs
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "emissions", em)


ProcessSpec = Union[IID, MarkovModel, MixedMarkovModel, AdditiveNoiseSpec, StickySpec, HiddenMarkovModel]


# --------------------------------------------------------------------------
# stationary analysis


def _strongly_connected(adj: list[list[int]]) -> bool:
    k = len(adj)
    if k == 0:
        return False
    radj: list[list[int]] = [[] for _ in range(k)]
    for i, nbrs in enumerate(adj):
        for j in nbrs:
            radj[j].append(i)
    for graph in (adj, radj):
        seen = {0}
        stack = [0]
        while stack:
            for j in graph[stack.pop()]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        if len(seen) != k:
            return False
    return True


def _solve_stationary(P: list[list[Fraction]]) -> list[Fraction]:
    """Exact solve of mu P = mu with the last balance equation replaced by sum(mu) = 1."""
    k = len(P)
    adj = [[j for j in range(k) if P[i][j] > 0] for i in range(k)]
    if not _strongly_connected(adj):
        raise NonErgodicError("chain is not irreducible")
    A = [[P[j][i] - (1 if i == j else 0) for j in range(k)] + [Fraction(0)] for i in range(k)]
    A[-1] = [Fraction(1)] * k + [Fraction(1)]
    for col in range(k):
        piv = next((r for r in range(col, k) if A[r][col] != 0), None)
        if piv is None:
            raise NonErgodicError("singular balance equations")
        A[col], A[piv] = A[piv], A[col]
        inv = 1 / A[col][col]
        A[col] = [v * inv for v in A[col]]
        for r in range(k):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [a - f * b for a, b in zip(A[r], A[col])]
    return [A[i][k] for i in range(k)]


@dataclass(frozen=True)
class _Lifted:
    contexts: tuple
    P: list  # Fraction matrix over contexts
    mu: list  # Fraction stationary law over contexts
    next_ctx: np.ndarray  # (contexts, states) -> context index, -1 if impossible


def lift(chain: MarkovModel) -> _Lifted:
    """First-order chain on contexts, with its exact stationary law."""
    contexts = tuple(chain.rows)
    index = {c: i for i, c in enumerate(contexts)}
    k = len(contexts)
    P = [[Fraction(0)] * k for _ in range(k)]
    nxt = np.full((k, len(chain.states)), -1, dtype=np.int64)
    for i, ctx in enumerate(contexts):
        for s_idx, (s, p) in enumerate(zip(chain.states, chain.rows[ctx])):
            j = index.get(ctx[1:] + (s,))
            if j is not None:
                nxt[i, s_idx] = j
                P[i][j] += p
    return _Lifted(contexts, P, _solve_stationary(P), nxt)


def stationary_distribution(chain: MarkovModel) -> DiscreteDistribution:
    """Stationary law of a first-order chain (exact)."""
    if chain.order != 1:
        raise ValueError("use context_distribution for higher-order chains")
    lifted = lift(chain)
    return DiscreteDistribution(tuple((ctx[0], p) for ctx, p in zip(lifted.contexts, lifted.mu)))


def context_distribution(chain: MarkovModel) -> dict[tuple, Fraction]:
    lifted = lift(chain)
    return dict(zip(lifted.contexts, lifted.mu))


def markov_entropy_rate(chain: MarkovModel) -> float:
    """Sum over contexts of stationary weight times row entropy, in bits."""
    lifted = lift(chain)
    return sum(float(mu) * entropy(chain.rows[ctx]) for ctx, mu in zip(lifted.contexts, lifted.mu))


# --------------------------------------------------------------------------
# tilde processes


def _noisy_tilde(spec: AdditiveNoiseSpec) -> HiddenMarkovModel:
    outs = spec.output_atoms
    c = spec.noise.continuous_mass
    n_o = _outside_for(outs)
    symbols = outs + ((n_o,) if c > 0 else ())
    em = {}
    for x in spec.base.states:
        row = [Fraction(0)] * len(outs)
        for lab, p in spec.noise.atoms:
            row[outs.index(x + lab)] += p
        em[x] = tuple(row) + ((c,) if c > 0 else ())
    return HiddenMarkovModel(spec.base, symbols, em)


def tilde_process(spec: ProcessSpec) -> ProcessSpec:
    """Replace every non-atom value by one reserved symbol; the result is discrete."""
    if isinstance(spec, IID):
        return IID(MixedDistribution.discrete(tilde_of(spec.dist).as_dict()))
    if isinstance(spec, MixedMarkovModel):
        return spec.tilde_chain()
    if isinstance(spec, AdditiveNoiseSpec):
        return _noisy_tilde(spec)
    if isinstance(spec, StickySpec):
        return IID(MixedDistribution.discrete({X_O: 1}))
    if isinstance(spec, (MarkovModel, HiddenMarkovModel)):
        return spec
    raise TypeError(f"unsupported spec {type(spec).__name__}")


def is_discrete(spec: ProcessSpec) -> bool:
    if isinstance(spec, IID):
        return spec.dist.continuous_mass == 0
    if isinstance(spec, AdditiveNoiseSpec):
        return spec.noise.continuous_mass == 0
    if isinstance(spec, MixedMarkovModel):
        return all(d.continuous_mass == 0 for d in spec.rows.values())
    if isinstance(spec, StickySpec):
        return False
    return True


# --------------------------------------------------------------------------
# simulation


@dataclass
class CodedSample:
    """Trajectories as codes; ``labels[code]`` for code >= 0, fresh draw for code < 0."""

    codes: np.ndarray
    labels: tuple = field(default_factory=tuple)


def _row_cdfs(matrix: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(matrix, axis=1)
    cdf[:, -1] = 1.0
    return cdf


def _pick(cdf_rows: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    # first index with cdf > u, for u in [0, 1)
    u = rng.random(cdf_rows.shape[0])
    return (cdf_rows <= u[:, None]).sum(axis=1)


def _chain_codes(chain: MarkovModel, n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    lifted = lift(chain)
    state_idx = {s: i for i, s in enumerate(chain.states)}
    ctx_states = np.array([[state_idx[s] for s in ctx] for ctx in lifted.contexts], dtype=np.int64)
    rows = np.array([[float(p) for p in chain.rows[ctx]] for ctx in lifted.contexts])
    cdf = _row_cdfs(rows)
    mu_cdf = np.cumsum([float(p) for p in lifted.mu])
    mu_cdf[-1] = 1.0
    ctx = np.searchsorted(mu_cdf, rng.random(m), side="right")
    out = np.empty((m, n), dtype=np.int64)
    head = min(chain.order, n)
    out[:, :head] = ctx_states[ctx, :head]
    for j in range(chain.order, n):
        s = _pick(cdf[ctx], rng)
        out[:, j] = s
        ctx = lifted.next_ctx[ctx, s]
    return out


def _fresh(m: int, n: int, offset: int) -> np.ndarray:
    return -(1 + offset + np.arange(m * n, dtype=np.int64).reshape(m, n))


def _chunk(spec: ProcessSpec, n: int, m: int, rng: np.random.Generator, offset: int):
    if isinstance(spec, IID):
        idx = sample_codes(spec.dist, (m, n), rng)
        return np.where(idx < 0, _fresh(m, n, offset), idx), spec.dist.labels
    if isinstance(spec, MarkovModel):
        return _chain_codes(spec, n, m, rng), spec.states
    if isinstance(spec, MixedMarkovModel):
        states = _chain_codes(spec.tilde_chain(), n, m, rng)
        clump = len(spec.atoms)
        return np.where(states == clump, _fresh(m, n, offset), states), spec.atoms
    if isinstance(spec, AdditiveNoiseSpec):
        outs = spec.output_atoms
        x = _chain_codes(spec.base, n, m, rng)
        noise = sample_codes(spec.noise, (m, n), rng)
        table = np.array(
            [[outs.index(s + lab) for lab in spec.noise.labels] for s in spec.base.states],
            dtype=np.int64,
        ).reshape(len(spec.base.states), len(spec.noise.labels))
        y = np.where(noise >= 0, table[x, np.maximum(noise, 0)] if table.size else 0, 0)
        return np.where(noise < 0, _fresh(m, n, offset), y), outs
    if isinstance(spec, HiddenMarkovModel):
        x = _chain_codes(spec.chain, n, m, rng)
        em = np.array([[float(p) for p in spec.emissions[s]] for s in spec.chain.states])
        cdf = _row_cdfs(em)
        out = np.empty((m, n), dtype=np.int64)
        for j in range(n):
            out[:, j] = _pick(cdf[x[:, j]], rng)
        return out, spec.symbols
    if isinstance(spec, StickySpec):
        fresh = _fresh(m, n, offset)
        repeat = rng.random((m, n)) < float(spec.repeat_prob)
        out = fresh.copy()
        for j in range(1, n):
            out[:, j] = np.where(repeat[:, j], out[:, j - 1], fresh[:, j])
        return out, ()
    raise TypeError(f"unsupported spec {type(spec).__name__}")


def _split(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


def simulate_codes(
    spec: ProcessSpec, n: int, samples: int, seed: int, workers: int = 1
) -> CodedSample:
    """Simulate ``samples`` independent stationary trajectories of length ``n``.

    Each worker draws from its own child of ``SeedSequence(seed)``; chunks
    are concatenated in worker order, so the result depends only on
    ``(seed, workers)``.
    """
    if n < 0 or samples < 0:
        raise ValueError("n and samples must be nonnegative")
    workers = max(1, int(workers))
    sizes = _split(samples, workers)
    streams = np.random.SeedSequence(seed).spawn(workers)
    offsets = np.cumsum([0] + sizes[:-1]) * n

    def run(i):
        return _chunk(spec, n, sizes[i], np.random.default_rng(streams[i]), int(offsets[i]))

    if workers == 1:
        parts = [run(0)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(workers)))
    codes = np.concatenate([p[0] for p in parts], axis=0) if parts else np.empty((0, n), np.int64)
    return CodedSample(codes.astype(np.int64, copy=False), tuple(parts[0][1]))


def decode(sample: CodedSample, row: int, rng: np.random.Generator) -> tuple:
    tokens: dict[int, Any] = {}
    out = []
    for code in sample.codes[row]:
        code = int(code)
        if code >= 0:
            out.append(sample.labels[code])
        else:
            if code not in tokens:
                tokens[code] = fresh_token(rng)
            out.append(tokens[code])
    return tuple(out)


def simulate(spec: ProcessSpec, n: int, seed: int) -> tuple:
    """One stationary trajectory of length ``n`` as a tuple of symbols."""
    sample = simulate_codes(spec, n, 1, seed)
    token_rng = np.random.default_rng(np.random.SeedSequence([seed, 0x70CE]))
    return decode(sample, 0, token_rng)


def repeat_mass_estimate(spec: ProcessSpec, n: int, samples: int, seed: int) -> float:
    """Monte Carlo estimate of P(X_1 is not an atom and recurs among X_2..X_n)."""
    if n < 2 or samples < 1:
        raise ValueError("need n >= 2 and samples >= 1")
    codes = simulate_codes(spec, n, samples, seed).codes
    first = codes[:, 0]
    recur = (codes[:, 1:] == first[:, None]).any(axis=1)
    return float(np.mean((first < 0) & recur))


def first_appearance_times(codes: np.ndarray, code: int) -> np.ndarray:
    """1-based index of the first occurrence of ``code`` per row; 0 if absent."""
    hit = codes == code
    return np.where(hit.any(axis=1), hit.argmax(axis=1) + 1, 0)


# --------------------------------------------------------------------------
# hypothesis checks (advisory)


def beta_tail_advisory(probs: Sequence[float], beta: float = 2.0) -> bool:
    """Heuristic check that a nonincreasing atom list decays faster than i**-beta.

    Fits log p_i against log i over the upper half of the list.  Lists
    shorter than 8 atoms are treated as finite and pass.
    """
    p = np.asarray([float(v) for v in probs if float(v) > 0])
    if p.size < 8:
        return True
    i = np.arange(1, p.size + 1)
    tail = slice(p.size // 2, None)
    slope = np.polyfit(np.log(i[tail]), np.log(p[tail]), 1)[0]
    return bool(slope < -beta)


def hypothesis_warnings(spec: ProcessSpec) -> list[str]:
    """Reasons the atom-clumped rate may differ from the pattern rate."""
    if isinstance(spec, StickySpec) and spec.repeat_prob > 0:
        return [
            "non-atom values recur with positive probability "
            f"(P = {spec.repeat_prob}); the clumped process does not carry the pattern rate"
        ]
    if isinstance(spec, IID) and not beta_tail_advisory(spec.dist.probs):
        return ["atom probabilities decay slowly; tail condition is doubtful"]
    return []


# --------------------------------------------------------------------------
# JSON


def _ctx_key(ctx: tuple) -> str:
    return ",".join(str(label_to_json(s)) for s in ctx)


def _ctx_from_key(key: str, clump: Symbol = X_O) -> tuple:
    out = []
    for tok in key.split(","):
        lab = label_from_json(tok.strip())
        out.append(clump if lab == X_O else lab)
    return tuple(out)


def _markov_to_json(chain: MarkovModel) -> dict:
    return {
        "kind": "markov",
        "order": chain.order,
        "states": [label_to_json(s) for s in chain.states],
        "rows": {_ctx_key(ctx): [prob_to_json(p) for p in row] for ctx, row in chain.rows.items()},
    }


def _markov_from_json(obj: Mapping[str, Any]) -> MarkovModel:
    states = tuple(label_from_json(s) for s in obj["states"])
    rows = {_ctx_from_key(k): tuple(v) for k, v in obj["rows"].items()}
    return MarkovModel(states, rows, int(obj.get("order", 1)))


def spec_to_json(spec: ProcessSpec) -> dict:
    if isinstance(spec, IID):
        return {"kind": "iid", "dist": mixed_to_json(spec.dist)}
    if isinstance(spec, MarkovModel):
        return _markov_to_json(spec)
    if isinstance(spec, MixedMarkovModel):
        return {
            "kind": "mixed_markov",
            "order": spec.order,
            "atoms": [label_to_json(a) for a in spec.atoms],
            "rows": {_ctx_key(ctx): mixed_to_json(d) for ctx, d in spec.rows.items()},
        }
    if isinstance(spec, AdditiveNoiseSpec):
        return {"kind": "noisy", "base": _markov_to_json(spec.base), "noise": mixed_to_json(spec.noise)}
    if isinstance(spec, StickySpec):
        return {"kind": "sticky", "repeat_prob": prob_to_json(spec.repeat_prob)}
    if isinstance(spec, HiddenMarkovModel):
        return {
            "kind": "hidden_markov",
            "chain": _markov_to_json(spec.chain),
            "symbols": [label_to_json(s) for s in spec.symbols],
            "emissions": {
                str(label_to_json(s)): [prob_to_json(p) for p in row] for s, row in spec.emissions.items()
            },
        }
    raise TypeError(f"unsupported spec {type(spec).__name__}")


def spec_from_json(obj: Mapping[str, Any]) -> ProcessSpec:
    if not isinstance(obj, Mapping) or "kind" not in obj:
        raise ValueError("process spec needs a 'kind' field")
    kind = obj["kind"]
    try:
        if kind == "iid":
            return IID(mixed_from_json(obj["dist"]))
        if kind == "markov":
            return _markov_from_json(obj)
        if kind == "mixed_markov":
            atoms = tuple(label_from_json(a) for a in obj["atoms"])
            rows = {}
            for k, v in obj["rows"].items():
                d = mixed_from_json(v)
                rows[_ctx_from_key(k)] = MixedDistribution(d.atoms, d.continuous_mass, X_O)
            return MixedMarkovModel(atoms, rows, int(obj.get("order", 1)))
        if kind == "noisy":
            return AdditiveNoiseSpec(_markov_from_json(obj["base"]), mixed_from_json(obj["noise"]))
        if kind == "sticky":
            return StickySpec(as_prob(obj.get("repeat_prob", "1/2")))
        if kind == "hidden_markov":
            chain = _markov_from_json(obj["chain"])
            symbols = tuple(label_from_json(s) for s in obj["symbols"])
            em = {label_from_json(k): tuple(v) for k, v in obj["emissions"].items()}
            return HiddenMarkovModel(chain, symbols, em)
    except KeyError as exc:
        raise ValueError(f"{kind} spec is missing field {exc}") from exc
    raise ValueError(f"unknown process kind {kind!r}")


def spec_id(spec: ProcessSpec) -> str:
    blob = json.dumps(spec_to_json(spec), sort_keys=True, separators=(",", ":"))
    return f"{spec.kind}-{hashlib.sha1(blob.encode()).hexdigest()[:10]}"
