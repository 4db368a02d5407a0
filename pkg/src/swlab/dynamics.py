"""The SW chain at three fidelities: spin counts, partition projection, exact matrix.

Mean-field exchangeability makes per-spin counts (and per-cell counts for the
projection chain) lossless projections of the vertex-level dynamics, so states
are q-vectors and q x q matrices rather than labelled configurations.
"""

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .analysis import ModelParams

EXACT_STATE_GUARD = 10**6


@dataclass(frozen=True)
class SpinCounts:
    """Class sizes of one configuration; the 1 x q projection state."""

    counts: np.ndarray
    n: int

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", c)
        if (c < 0).any() or int(c.sum()) != self.n:
            raise ValueError(f"counts {c.tolist()} do not sum to n={self.n}")

    @property
    def q(self):
        return self.counts.shape[0]

    @property
    def alpha(self):
        return self.counts / self.n

    @property
    def dominant(self):
        """Index of the largest class, lowest index on ties."""
        return int(np.argmax(self.counts))

    @classmethod
    def monochromatic(cls, params):
        c = np.zeros(params.q, dtype=np.int64)
        c[0] = params.n
        return cls(counts=c, n=params.n)

    @classmethod
    def uniform_random(cls, params, rng):
        c = rng.multinomial(params.n, np.full(params.q, 1.0 / params.q))
        return cls(counts=c.astype(np.int64), n=params.n)


@dataclass(frozen=True)
class ProjectionMatrix:
    """Per-cell spin counts: a[i, j] = vertices of cell V_i holding spin j."""

    a: np.ndarray
    cell_sizes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=np.int64)
        cs = np.asarray(self.cell_sizes, dtype=np.int64)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "cell_sizes", cs)
        if a.shape[0] != a.shape[1] or a.shape[0] != cs.shape[0]:
            raise ValueError("projection matrix must be q x q with q cell sizes")
        if (a < 0).any() or not np.array_equal(a.sum(axis=1), cs):
            raise ValueError("row i must sum to cell_sizes[i]")

    @property
    def q(self):
        return self.a.shape[0]

    @property
    def n(self):
        return int(self.cell_sizes.sum())

    def column_counts(self):
        return SpinCounts(counts=self.a.sum(axis=0), n=self.n)

    @property
    def alpha(self):
        return self.a.sum(axis=0) / self.n

    @classmethod
    def from_aligned_counts(cls, counts):
        """Cells = spin classes of the current configuration (a is diagonal)."""
        c = np.asarray(counts.counts, dtype=np.int64)
        return cls(a=np.diag(c), cell_sizes=c.copy())


def sw_step_counts(state, params, rng):
    """One SW step of the counts chain.

    Percolation per class by the exploration process, uniform recoloring with
    one multinomial per component-size group (isolated vertices are the
    size-1 group). Marginally identical to the vertex-level dynamics.
    """
    q = state.q
    sizes = np.empty(state.n, dtype=np.int64)
    hist = np.zeros(state.n + 1, dtype=np.int64)
    out = np.empty(q, dtype=np.int64)
    _kernels.sw_step_counts(rng, state.counts, params.p, sizes, hist, out)
    assert int(out.sum()) == state.n
    return SpinCounts(counts=out, n=state.n)


def sw_step_projection(state, params, rng):
    """One SW step of the q x q projection chain.

    Components of size >= 2 are split over cells by sampling without
    replacement; per-cell isolated vertices are the urn remainder, recolored
    with one multinomial per cell. Column sums evolve as sw_step_counts.
    """
    out = _kernels.sw_step_projection(rng, state.a, params.p)
    nxt = ProjectionMatrix(a=out, cell_sizes=state.cell_sizes.copy())
    assert nxt.n == state.n
    return nxt


def run_trajectory(start, t_max, params, rng):
    """Advance t_max steps recording every state; deterministic given the stream."""
    if t_max < 0:
        raise ValueError(f"t_max must be >= 0, got {t_max}")
    record = _kernels.run_counts_chain(rng, start.counts, params.p, t_max)
    return [SpinCounts(counts=record[t], n=start.n) for t in range(t_max + 1)]


def batch_final_counts(start, steps, replicas, params, rng):
    """Final counts of ``replicas`` independent chains from one start (one stream)."""
    return _kernels.batch_final_counts(rng, start.counts, params.p, steps, replicas)


@dataclass(frozen=True)
class ExactChain:
    """Exact stationary vector and transition matrix over all q^n configurations."""

    n: int
    q: int
    beta: float
    stationary: np.ndarray
    transition: np.ndarray


def _config_spins(n, q):
    """(q^n, n) int8 matrix: row s = base-q digits of s (vertex spins)."""
    idx = np.arange(q**n, dtype=np.int64)
    powers = q ** np.arange(n, dtype=np.int64)
    return ((idx[:, None] // powers[None, :]) % q).astype(np.int8)


def config_counts(n, q):
    """(q^n, q) spin-count matrix across all configurations."""
    spins = _config_spins(n, q)
    out = np.zeros((q**n, q), dtype=np.int64)
    for s in range(q):
        out[:, s] = (spins == s).sum(axis=1)
    return out


def sorted_count_keys(n, q):
    """Per-configuration key: spin counts sorted descending (lumping classes)."""
    counts = config_counts(n, q)
    ordered = -np.sort(-counts, axis=1)
    return [tuple(row) for row in ordered]


def exact_stationary(n, q, beta):
    """mu(sigma) proportional to exp((beta/n) * #monochromatic edges)."""
    if q**n > EXACT_STATE_GUARD:
        raise ValueError(f"q^n = {q**n} exceeds enumeration guard {EXACT_STATE_GUARD}")
    counts = config_counts(n, q)
    mono = (counts * (counts - 1) // 2).sum(axis=1)
    w = np.exp(beta / n * mono.astype(np.float64))
    return w / w.sum()


@lru_cache(maxsize=None)
def _partition_distribution(k, p):
    """Distribution of the G(k, p) component partition on k labelled vertices.

    Enumerates all 2^{C(k,2)} edge subsets once per (k, p); partitions are
    canonical tuples of sorted vertex tuples.
    """
    if k == 0:
        return ((), 1.0),
    edges = list(itertools.combinations(range(k), 2))
    dist = {}
    for mask in range(1 << len(edges)):
        parent = list(range(k))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        bits = 0
        for e, (u, v) in enumerate(edges):
            if mask >> e & 1:
                bits += 1
                ru, rv = find(u), find(v)
                if ru != rv:
                    parent[rv] = ru
        blocks = {}
        for v in range(k):
            blocks.setdefault(find(v), []).append(v)
        key = tuple(sorted(tuple(b) for b in blocks.values()))
        prob = p**bits * (1 - p) ** (len(edges) - bits)
        dist[key] = dist.get(key, 0.0) + prob
    return tuple(dist.items())


def exact_transition_matrix(n, q, beta):
    """SW transition matrix by exact enumeration.

    P[s, s'] sums, over all monochromatic-edge subsets of s grouped into
    component partitions and over all component colorings, the percolation
    weight times q^{-#components}.
    """
    if n > 6 or q > 3:
        raise ValueError(f"exact transition guarded to n <= 6, q <= 3, got n={n}, q={q}")
    params = ModelParams(q=q, beta=beta, n=n)
    p = params.p
    spins = _config_spins(n, q)
    nstates = q**n
    powers = q ** np.arange(n, dtype=np.int64)
    P = np.zeros((nstates, nstates))
    for s in range(nstates):
        classes = [np.flatnonzero(spins[s] == c) for c in range(q)]
        per_class = [
            [
                (tuple(tuple(int(cls[v]) for v in blk) for blk in part), prob)
                for part, prob in _partition_distribution(len(cls), p)
            ]
            for cls in classes
            if len(cls) > 0
        ]
        for combo in itertools.product(*per_class):
            blocks = [blk for part, _ in combo for blk in part]
            prob = 1.0
            for _, pr in combo:
                prob *= pr
            weights = np.array([sum(powers[v] for v in blk) for blk in blocks])
            coloring_weight = prob * q ** (-len(blocks))
            for colors in itertools.product(range(q), repeat=len(blocks)):
                t = int(np.dot(colors, weights))
                P[s, t] += coloring_weight
    return P


def build_exact_chain(n, q, beta):
    return ExactChain(
        n=n, q=q, beta=beta,
        stationary=exact_stationary(n, q, beta),
        transition=exact_transition_matrix(n, q, beta),
    )


def law_to_sorted_counts(law, n, q):
    """Push a probability vector over configurations to sorted spin counts."""
    keys = sorted_count_keys(n, q)
    out = {}
    for prob, key in zip(law, keys):
        out[key] = out.get(key, 0.0) + prob
    return out
