"""JIT-compiled inner loops: percolation exploration, SW steps, chain drivers.

Every function draws randomness exclusively through the numpy Generator it is
handed, so streams stay reproducible and interoperable with numpy-level draws
(numba produces the identical value sequence for the supported methods).
``nogil=True`` lets replica farms scale on threads.
"""

import math

import numpy as np
from numba import njit

_JIT = dict(cache=True, nogil=True)


@njit(**_JIT)
def explore_component_sizes(gen, k, p, sizes):
    """Component sizes of G(k, p), exploration order, written into ``sizes``.

    Breadth-first generation process: with g newly active vertices and u still
    unexplored, the next generation is Binomial(u, 1-(1-p)^g). One binomial
    draw per BFS generation, O(k) expected work per class.

    Returns the number of components.
    """
    if k <= 0:
        return 0
    if p <= 0.0:
        for i in range(k):
            sizes[i] = 1
        return k
    if p >= 1.0:
        sizes[0] = k
        return 1
    u = k
    nc = 0
    log_q = math.log1p(-p)
    while u > 0:
        u -= 1
        size = 1
        active = 1
        while active > 0 and u > 0:
            reveal = gen.binomial(u, -math.expm1(active * log_q))
            u -= reveal
            size += reveal
            active = reveal
        sizes[nc] = size
        nc += 1
    return nc


@njit(**_JIT)
def multinomial_uniform(gen, m, q, out):
    """Multinomial(m, uniform over q cells) via conditional binomials."""
    rem = m
    for j in range(q - 1):
        x = gen.binomial(rem, 1.0 / (q - j)) if rem > 0 else 0
        out[j] = x
        rem -= x
    out[q - 1] = rem


@njit(**_JIT)
def draw_split_from_urn(gen, urn, urn_total, s, out):
    """Sample s balls without replacement from ``urn`` (decremented in place).

    Per-ball exact integer draws; ``out`` receives the per-cell counts.
    Returns the remaining urn total.
    """
    q = urn.shape[0]
    for j in range(q):
        out[j] = 0
    rem = urn_total
    for _ in range(s):
        r = gen.integers(0, rem)
        acc = 0
        for j in range(q):
            acc += urn[j]
            if r < acc:
                urn[j] -= 1
                out[j] += 1
                break
        rem -= 1
    return rem


@njit(**_JIT)
def sw_step_counts(gen, counts, p, sizes, hist, out):
    """One SW step of the q-dimensional spin-counts chain.

    Per color class: exploration-process percolation, then uniform recoloring
    with components grouped by size (one multinomial per size group).
    ``sizes`` must hold n entries, ``hist`` n+1 zeroed entries (restored to
    zero on return), ``out`` receives the new counts.
    """
    q = counts.shape[0]
    scratch = np.empty(q, dtype=np.int64)
    for j in range(q):
        out[j] = 0
    for c in range(q):
        k = counts[c]
        if k == 0:
            continue
        nc = explore_component_sizes(gen, k, p, sizes)
        max_s = 0
        for i in range(nc):
            s = sizes[i]
            if s > max_s:
                max_s = s
            hist[s] += 1
        for s in range(1, max_s + 1):
            m = hist[s]
            if m == 0:
                continue
            hist[s] = 0
            multinomial_uniform(gen, m, q, scratch)
            for j in range(q):
                out[j] += s * scratch[j]


@njit(**_JIT)
def run_counts_chain(gen, counts0, p, t_max):
    """Advance the counts chain t_max steps, recording every state.

    Returns an (t_max+1, q) int64 array with row 0 = counts0.
    """
    q = counts0.shape[0]
    n = 0
    for j in range(q):
        n += counts0[j]
    record = np.empty((t_max + 1, q), dtype=np.int64)
    sizes = np.empty(n, dtype=np.int64)
    hist = np.zeros(n + 1, dtype=np.int64)
    cur = counts0.copy()
    nxt = np.empty(q, dtype=np.int64)
    for j in range(q):
        record[0, j] = cur[j]
    for t in range(1, t_max + 1):
        sw_step_counts(gen, cur, p, sizes, hist, nxt)
        for j in range(q):
            record[t, j] = nxt[j]
        cur, nxt = nxt, cur
    return record


@njit(**_JIT)
def advance_counts(gen, counts0, p, steps):
    """Advance the counts chain ``steps`` steps; returns the final counts."""
    q = counts0.shape[0]
    n = 0
    for j in range(q):
        n += counts0[j]
    sizes = np.empty(n, dtype=np.int64)
    hist = np.zeros(n + 1, dtype=np.int64)
    cur = counts0.copy()
    nxt = np.empty(q, dtype=np.int64)
    for _ in range(steps):
        sw_step_counts(gen, cur, p, sizes, hist, nxt)
        cur, nxt = nxt, cur
    return cur


@njit(**_JIT)
def batch_final_counts(gen, counts0, p, steps, reps):
    """Run ``reps`` independent chains of ``steps`` steps from one start.

    One stream feeds all replicas; returns a (reps, q) array of final counts.
    """
    q = counts0.shape[0]
    n = 0
    for j in range(q):
        n += counts0[j]
    out = np.empty((reps, q), dtype=np.int64)
    sizes = np.empty(n, dtype=np.int64)
    hist = np.zeros(n + 1, dtype=np.int64)
    cur = np.empty(q, dtype=np.int64)
    nxt = np.empty(q, dtype=np.int64)
    for r in range(reps):
        for j in range(q):
            cur[j] = counts0[j]
        for _ in range(steps):
            sw_step_counts(gen, cur, p, sizes, hist, nxt)
            cur, nxt = nxt, cur
        for j in range(q):
            out[r, j] = cur[j]
    return out


@njit(**_JIT)
def collect_occupation(gen, counts0, p, burnin, collect):
    """Burn in, then record the next ``collect`` states (occupation sample)."""
    q = counts0.shape[0]
    n = 0
    for j in range(q):
        n += counts0[j]
    out = np.empty((collect, q), dtype=np.int64)
    sizes = np.empty(n, dtype=np.int64)
    hist = np.zeros(n + 1, dtype=np.int64)
    cur = counts0.copy()
    nxt = np.empty(q, dtype=np.int64)
    for _ in range(burnin):
        sw_step_counts(gen, cur, p, sizes, hist, nxt)
        cur, nxt = nxt, cur
    for t in range(collect):
        sw_step_counts(gen, cur, p, sizes, hist, nxt)
        cur, nxt = nxt, cur
        for j in range(q):
            out[t, j] = cur[j]
    return out


@njit(**_JIT)
def sw_step_projection(gen, a, p):
    """One SW step of the q x q partition-projection chain.

    ``a[i, j]`` = vertices of cell i holding spin j. Components of size >= 2
    are split over cells by sequential without-replacement draws; the urn
    remainder is exactly the per-cell isolated-vertex counts, recolored with
    one uniform multinomial per cell.
    """
    q = a.shape[0]
    n = 0
    for i in range(q):
        for j in range(q):
            n += a[i, j]
    out = np.zeros((q, q), dtype=np.int64)
    sizes = np.empty(n, dtype=np.int64)
    urn = np.empty(q, dtype=np.int64)
    tmp = np.empty(q, dtype=np.int64)
    for c in range(q):
        k = 0
        for i in range(q):
            urn[i] = a[i, c]
            k += a[i, c]
        if k == 0:
            continue
        nc = explore_component_sizes(gen, k, p, sizes)
        rem = k
        for idx in range(nc):
            s = sizes[idx]
            if s < 2:
                continue
            rem = draw_split_from_urn(gen, urn, rem, s, tmp)
            color = gen.integers(0, q)
            for i in range(q):
                out[i, color] += tmp[i]
        for i in range(q):
            if urn[i] > 0:
                multinomial_uniform(gen, urn[i], q, tmp)
                for j in range(q):
                    out[i, j] += tmp[j]
    return out


@njit(**_JIT)
def project_class(gen, col, p):
    """Percolation of one color class resolved over partition cells.

    ``col`` holds the class's per-cell counts. Returns (sizes, splits, iso):
    sizes in exploration order, splits[i, :] the cell split of component i
    (zero rows for isolated vertices), iso the per-cell isolated counts.
    """
    q = col.shape[0]
    k = 0
    for i in range(q):
        k += col[i]
    urn = col.copy()
    sizes = np.empty(max(k, 1), dtype=np.int64)
    nc = explore_component_sizes(gen, k, p, sizes)
    sizes = sizes[:nc]
    splits = np.zeros((nc, q), dtype=np.int64)
    tmp = np.empty(q, dtype=np.int64)
    rem = k
    for idx in range(nc):
        s = sizes[idx]
        if s < 2:
            continue
        rem = draw_split_from_urn(gen, urn, rem, s, tmp)
        for i in range(q):
            splits[idx, i] = tmp[i]
    return sizes, splits, urn


@njit(**_JIT)
def run_projection_chain(gen, a0, p, steps):
    """Advance the projection chain ``steps`` steps; returns the final matrix."""
    cur = a0.copy()
    for _ in range(steps):
        cur = sw_step_projection(gen, cur, p)
    return cur
