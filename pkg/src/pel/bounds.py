"""Finite-n lower bounds on pattern entropy and the slowly-growing counterexample.

Internal arithmetic is in nats; values cross the module boundary in bits.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .distributions import MixedDistribution, Symbol, as_prob, clump, entropy
from .processes import MixedMarkovModel

LN2 = math.log(2.0)
EPS = np.finfo(float).eps
FULL_SCAN_LIMIT = 2_000_000
CURVE_VERSION = "pel-bound-curve/1"


# --------------------------------------------------------------------------
# clumped-entropy bound


@dataclass(frozen=True)
class ClumpedBound:
    bits: float
    bracket: float
    vacuous: bool


def clumped_bracket(dist: MixedDistribution, B: Iterable[Symbol], n: int) -> ClumpedBound:
    """H(clump(dist, B)) * (1 - |B| exp(-n min_B p)), with the raw bracket kept.

    ``vacuous`` marks a nonpositive bracket, where the bound says nothing.
    """
    B = set(B)
    if not B:
        raise ValueError("B must be nonempty")
    if n < 1:
        raise ValueError("n must be >= 1")
    h = entropy(clump(dist, B))  # rejects labels that are not atoms
    pmin = min(float(dist.prob(b)) for b in B)
    bracket = 1.0 - len(B) * math.exp(-n * pmin)
    return ClumpedBound(h * max(0.0, bracket), bracket, bracket <= 0)


def prop4_lower_bound(dist: MixedDistribution, B: Iterable[Symbol], n: int) -> float:
    return clumped_bracket(dist, B, n).bits


# --------------------------------------------------------------------------
# waiting-time entropy


def waiting_time_entropy_bound(d_min, d_max) -> float:
    """Upper bound in bits on H(I_x) when every step hits x with probability in [d_min, d_max]."""
    lo, hi = float(as_prob(d_min)), float(as_prob(d_max))
    if not 0 < lo <= hi <= 1:
        raise ValueError("need 0 < d_min <= d_max <= 1")
    if hi == 1.0:
        return 1.0
    return -(hi * math.log2(lo)) / lo - hi * (1 - lo) * math.log2(1 - hi) / lo**2


def waiting_time_extremes(model: MixedMarkovModel, x: Symbol) -> tuple[Fraction, Fraction]:
    """Smallest and largest one-step probability of reaching atom ``x`` over all contexts."""
    if x not in model.atoms:
        raise ValueError(f"{x!r} is not an atom")
    probs = [dist.prob(x) for dist in model.rows.values()]
    return min(probs), max(probs)


# --------------------------------------------------------------------------
# the slowly-growing distribution p_i = c / (i (ln i)^(1+eps))


def _f(i: np.ndarray, eps: float) -> np.ndarray:
    return 1.0 / (i * np.log(i) ** (1.0 + eps))


def _tail_integral(a: float, eps: float) -> float:
    # integral of 1/(x (ln x)^(1+eps)) from a to infinity
    return math.log(a) ** (-eps) / eps


def _sum_enclosure(eps: float, N: int) -> tuple[float, float]:
    """Rigorous enclosure of sum_{i>=2} 1/(i (ln i)^(1+eps)) truncated at N.

    The summand is convex and decreasing, so the tail past N lies between
    the trapezoid bound and the midpoint bound.
    """
    i = np.arange(2, N + 1, dtype=float)
    head = math.fsum(_f(i, eps))
    fN = float(_f(np.array([float(N)]), eps)[0])
    tail_lo = _tail_integral(N, eps) - fN / 2
    tail_hi = _tail_integral(N + 0.5, eps)
    pad = 8 * EPS * (head + tail_hi)
    return head + tail_lo - pad, head + tail_hi + pad


@dataclass(frozen=True)
class GrowthParams:
    eps: float
    delta: float
    c: float
    c_lo: float
    c_hi: float
    truncation: int
    sum_lo: float
    sum_hi: float

    @property
    def width(self) -> float:
        return self.c_hi - self.c_lo

    def p(self, i) -> np.ndarray:
        """p_i for an int or array of indices (p_1 = 0)."""
        i = np.asarray(i, dtype=float)
        out = np.zeros(i.shape)
        big = i >= 2
        out[big] = self.c * _f(i[big], self.eps)
        return out


def growth_distribution(eps: float, delta: float | None = None, precision: float = 1e-10, max_truncation: int = 1 << 26) -> GrowthParams:
    """Normalise p_i = c/(i (ln i)^(1+eps)) for i >= 2 with c enclosed to ``precision``."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if delta is None:
        delta = min(1.0, 1.5 * eps)
    if delta <= 0:
        raise ValueError("delta must be positive")
    if eps >= min(delta, 1.0):
        raise ValueError("need eps < min(delta, 1)")
    N = 1024
    while True:
        s_lo, s_hi = _sum_enclosure(eps, N)
        c_lo = np.nextafter(1.0 / s_hi, 0.0)
        c_hi = np.nextafter(1.0 / s_lo, 2.0)
        if c_hi - c_lo <= precision:
            break
        if N >= max_truncation:
            raise ValueError(f"precision {precision} not reached by truncation {N}")
        N *= 2
    c = 0.5 * (c_lo + c_hi)
    return GrowthParams(eps, float(delta), float(c), float(c_lo), float(c_hi), N, float(s_lo), float(s_hi))


def D_cumulative(params: GrowthParams, l_max: int) -> np.ndarray:
    """``D[l]`` = sum_{i<=l} p_i log2(1/p_i) for l = 0..l_max."""
    if l_max < 0:
        raise ValueError("l_max must be nonnegative")
    out = np.zeros(l_max + 1)
    if l_max >= 2:
        p = params.p(np.arange(2, l_max + 1))
        out[2:] = np.cumsum(-p * np.log(p)) / LN2
    return out


def D_partial(params: GrowthParams, l: int) -> float:
    if l < 1:
        raise ValueError("l must be >= 1")
    if l == 1:
        return 0.0
    p = params.p(np.arange(2, l + 1))
    return math.fsum(-p * np.log(p)) / LN2


def envelope_floor(params: GrowthParams, l) -> np.ndarray:
    """c/(4 ln 2) (ln(l+1))^(1-eps), the eventual lower envelope of D_l."""
    l = np.asarray(l, dtype=float)
    return params.c / (4 * LN2) * np.log(l + 1) ** (1 - params.eps)


def proof_index(params: GrowthParams, n: int) -> int:
    """l_n = floor(n^((1-eps)/(1+eps)))."""
    return int(math.floor(n ** ((1 - params.eps) / (1 + params.eps))))


@dataclass
class BoundCurve:
    params: GrowthParams
    points: list[tuple[int, float, int]] = field(default_factory=list)

    @property
    def n(self) -> list[int]:
        return [p[0] for p in self.points]

    @property
    def bits(self) -> list[float]:
        return [p[1] for p in self.points]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# {CURVE_VERSION} eps={self.params.eps!r} delta={self.params.delta!r} c={self.params.c!r}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("n", "bound_bits", "argmax_l"))
        for n, b, l in self.points:
            w.writerow((n, repr(b), l))
        return buf.getvalue()


def _candidates(params: GrowthParams, n: int) -> np.ndarray:
    if n <= FULL_SCAN_LIMIT:
        return np.arange(2, max(n, 2) + 1)
    grid = {2, proof_index(params, n)}
    k = 1
    while 2**k <= n:
        grid.add(2**k)
        k += 1
    # refine around powers of two with a finer geometric step
    grid.update(int(v) for v in np.unique(np.geomspace(2, n, 4000).astype(np.int64)))
    return np.array(sorted(v for v in grid if 2 <= v <= n))


def theorem5_curve(params: GrowthParams, n_grid: Sequence[int]) -> BoundCurve:
    """max_l D_l (1 - l exp(-n p_l)) for each n, clipped at 0.

    For n up to two million every l in 2..n is scanned; beyond that a dense
    geometric grid plus l_n is used.
    """
    n_grid = [int(n) for n in n_grid]
    if not n_grid:
        raise ValueError("n_grid must be nonempty")
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValueError("n_grid must be strictly increasing")
    if n_grid[0] < 1:
        raise ValueError("n must be positive")
    cands = [_candidates(params, n) for n in n_grid]
    D = D_cumulative(params, int(max(c.max() for c in cands)))
    curve = BoundCurve(params)
    for n, ls in zip(n_grid, cands):
        pl = params.p(ls)
        with np.errstate(over="ignore"):
            brackets = D[ls] * (1.0 - ls * np.exp(-n * pl))
        k = int(np.argmax(brackets))
        best = float(brackets[k])
        curve.points.append((n, max(0.0, best), int(ls[k]) if best > 0 else 0))
    return curve
