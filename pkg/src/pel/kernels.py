"""Hot numeric kernels.

Every kernel exists twice: a loop implementation compiled by numba and a
fallback that needs only numpy.  The public names at the bottom of the
module point at one or the other depending on ``pel._accel.USE_NUMBA``
(the ``PEL_PURE_NUMPY`` environment flag).
Both variants are importable (``*_numba`` / ``*_numpy``) so tests and the
benchmark can compare them directly.
"""

import numpy as np

from ._accel import HAVE_NUMBA, USE_NUMBA, njit

# --------------------------------------------------------------------------
# patterns of coded trajectories


def _patterns_loop(codes):
    m, n = codes.shape
    out = np.empty((m, n), dtype=np.int64)
    seen = np.empty(n, dtype=np.int64)
    for r in range(m):
        d = 0
        for j in range(n):
            x = codes[r, j]
            lab = 0
            for k in range(d):
                if seen[k] == x:
                    lab = k + 1
                    break
            if lab == 0:
                seen[d] = x
                d += 1
                lab = d
            out[r, j] = lab
    return out


def _patterns_numpy(codes):
    codes = np.asarray(codes)
    m, n = codes.shape
    if n == 0:
        return np.empty((m, 0), dtype=np.int64)
    first = np.empty((m, n), dtype=np.int64)
    for j in range(n):
        # argmax returns the first True; position j always matches itself
        first[:, j] = np.argmax(codes[:, : j + 1] == codes[:, j : j + 1], axis=1)
    is_new = first == np.arange(n)
    opened = np.cumsum(is_new, axis=1)
    return np.take_along_axis(opened, first, axis=1).astype(np.int64)


# --------------------------------------------------------------------------
# restricted growth strings in lexicographic order


def _bell_int(n):
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def _rgs_fill(out):
    total, n = out.shape
    a = np.ones(n, dtype=np.int8)
    pmax = np.ones(n, dtype=np.int8)  # pmax[i] = max(a[0..i])
    for r in range(total):
        for j in range(n):
            out[r, j] = a[j]
        # rightmost position that can still grow
        i = n - 1
        while i > 0 and a[i] > pmax[i - 1]:
            i -= 1
        if i == 0:
            break
        a[i] += 1
        pmax[i] = max(pmax[i - 1], a[i])
        for j in range(i + 1, n):
            a[j] = 1
            pmax[j] = pmax[i]
    return out


def _rgs_numpy(n):
    if n == 0:
        return np.empty((1, 0), dtype=np.int8)
    rows = np.ones((1, 1), dtype=np.int8)
    for _ in range(1, n):
        top = rows.max(axis=1).astype(np.int64)
        fan = top + 1
        parents = np.repeat(rows, fan, axis=0)
        starts = np.repeat(np.cumsum(fan) - fan, fan)
        values = np.arange(parents.shape[0]) - starts + 1
        rows = np.concatenate([parents, values[:, None].astype(np.int8)], axis=1)
    return rows


def _rgs_table_numba(n):
    if n == 0:
        return np.empty((1, 0), dtype=np.int8)
    out = np.empty((_bell_int(n), n), dtype=np.int8)
    return _rgs_fill_jit(out)


# --------------------------------------------------------------------------
# step probabilities P(z_i | z^{i-1}) for a mixed i.i.d. source


def _iid_prefix_prob(counts, d, probs, c, mult, dp, nxt, esym):
    a = probs.shape[0]
    nmult = 0
    s = 0
    for lab in range(1, d + 1):
        k = counts[lab]
        if k >= 2:
            mult[nmult] = k
            nmult += 1
        elif k == 1:
            s += 1
    if nmult > a:
        return 0.0
    size = 1 << a
    for mask in range(size):
        dp[mask] = 0.0
    dp[0] = 1.0
    for t in range(nmult):
        for mask in range(size):
            nxt[mask] = 0.0
        for mask in range(size):
            w = dp[mask]
            if w == 0.0:
                continue
            for j in range(a):
                if (mask >> j) & 1 == 0:
                    nxt[mask | (1 << j)] += w * probs[j] ** mult[t]
        for mask in range(size):
            dp[mask] = nxt[mask]
    total = 0.0
    for mask in range(size):
        w = dp[mask]
        if w == 0.0:
            continue
        # elementary symmetric sums over the atoms still free
        esym[0] = 1.0
        top = 0
        for j in range(a):
            if (mask >> j) & 1 == 0:
                top += 1
                esym[top] = 0.0
                for q in range(top, 0, -1):
                    esym[q] += esym[q - 1] * probs[j]
        acc = 0.0
        ff = 1.0
        for q in range(min(top, s) + 1):
            if q > 0:
                ff *= s - q + 1
            acc += ff * esym[q] * c ** (s - q)
        total += w * acc
    return total


def _iid_step_probs_loop(pats, probs, c):
    m, n = pats.shape
    a = probs.shape[0]
    out = np.empty((m, n), dtype=np.float64)
    counts = np.zeros(n + 2, dtype=np.int64)
    mult = np.empty(n + 1, dtype=np.int64)
    dp = np.empty(1 << a, dtype=np.float64)
    nxt = np.empty(1 << a, dtype=np.float64)
    esym = np.empty(a + 1, dtype=np.float64)
    for r in range(m):
        for j in range(n + 2):
            counts[j] = 0
        prev = 1.0
        d = 0
        for i in range(n):
            lab = pats[r, i]
            counts[lab] += 1
            if lab > d:
                d = lab
            cur = _prefix(counts, d, probs, c, mult, dp, nxt, esym)
            out[r, i] = cur / prev if prev > 0.0 else 0.0
            prev = cur
    return out


# compiled lazily on first call, so importing with the flag set costs nothing
if HAVE_NUMBA:
    _patterns_jit = njit(_patterns_loop)
    _rgs_fill_jit = njit(_rgs_fill)
    _prefix = njit(_iid_prefix_prob)
    _iid_step_probs_jit = njit(_iid_step_probs_loop)
else:
    _patterns_jit = _patterns_loop
    _rgs_fill_jit = _rgs_fill
    _prefix = _iid_prefix_prob
    _iid_step_probs_jit = _iid_step_probs_loop


def patterns_numba(codes):
    return _patterns_jit(np.ascontiguousarray(codes, dtype=np.int64))


def patterns_numpy(codes):
    return _patterns_numpy(np.asarray(codes, dtype=np.int64))


def rgs_numba(n):
    return _rgs_table_numba(n)


def rgs_numpy(n):
    return _rgs_numpy(n)


def iid_step_probs_numba(pats, probs, c):
    return _iid_step_probs_jit(
        np.ascontiguousarray(pats, dtype=np.int64),
        np.ascontiguousarray(probs, dtype=np.float64),
        float(c),
    )


def _free_esym(probs):
    # esym[mask, q]: q-th elementary symmetric sum of the atoms outside mask
    a = probs.shape[0]
    out = np.zeros((1 << a, a + 1))
    for mask in range(1 << a):
        e = np.zeros(a + 1)
        e[0] = 1.0
        for j in range(a):
            if not (mask >> j) & 1:
                e[1:] = e[1:] + e[:-1] * probs[j]
        out[mask] = e
    return out


def _prefix_probs_rows(counts, probs, c, esym):
    """Prefix probabilities for every row of a label-count matrix at once."""
    m = counts.shape[0]
    a = probs.shape[0]
    s = (counts == 1).sum(axis=1)
    nmult = (counts >= 2).sum(axis=1)
    dp = np.zeros((m, 1 << a))
    dp[:, 0] = 1.0
    if a:
        # only labels seen twice or more must sit on atoms; at most a of them count
        top = -np.sort(-counts, axis=1)[:, :a]
        for t in range(a):
            k = top[:, t]
            live = k >= 2
            if not live.any():
                break
            nxt = np.zeros_like(dp)
            for mask in range(1 << a):
                w = dp[:, mask]
                for j in range(a):
                    if not (mask >> j) & 1:
                        nxt[:, mask | (1 << j)] += w * probs[j] ** k
            dp = np.where(live[:, None], nxt, dp)
    total = np.zeros(m)
    ff = np.ones(m)
    with np.errstate(divide="ignore", invalid="ignore"):
        for q in range(a + 1):
            if q > 0:
                ff = ff * (s - q + 1)
            ok = q <= s
            term = np.where(ok, ff * c ** np.where(ok, s - q, 0), 0.0)
            total += term * (dp @ esym[:, q])
    total[nmult > a] = 0.0
    return total


def iid_step_probs_numpy(pats, probs, c):
    # vectorised over rows, one pass per position
    pats = np.asarray(pats, dtype=np.int64)
    probs = np.asarray(probs, dtype=np.float64)
    m, n = pats.shape
    out = np.empty((m, n))
    counts = np.zeros((m, n + 1), dtype=np.int64)
    esym = _free_esym(probs)
    rows = np.arange(m)
    prev = np.ones(m)
    for i in range(n):
        counts[rows, pats[:, i]] += 1
        cur = _prefix_probs_rows(counts, probs, float(c), esym)
        with np.errstate(divide="ignore", invalid="ignore"):
            out[:, i] = np.where(prev > 0.0, cur / np.where(prev > 0.0, prev, 1.0), 0.0)
        prev = cur
    return out


if USE_NUMBA:
    patterns_of_rows = patterns_numba
    rgs_table = rgs_numba
    iid_step_probs = iid_step_probs_numba
else:
    patterns_of_rows = patterns_numpy
    rgs_table = rgs_numpy
    iid_step_probs = iid_step_probs_numpy
