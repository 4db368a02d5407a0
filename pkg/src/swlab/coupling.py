"""Multi-phase coupling: burn-in, contraction, partition coalescence, projection coupling.

Phase 1 and 2 run both copies independently to an O(1/sqrt(n)) neighborhood of
the majority vector while the per-cell dominant fractions coalesce; the third
phase couples the q x q projections in one shot (largest components share a
color, isolated-vertex multinomials are maximally coupled to cancel the
accumulated discrepancy), boosted over a constant number of attempts.
"""

import enum
import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy import stats

from . import _kernels
from .analysis import cutoff_constant, drift_profile, majority_vector
from .dynamics import ProjectionMatrix, SpinCounts, sw_step_projection


class CouplingPreconditionError(ValueError):
    """Raised when the projection-coupling proximity preconditions fail."""


class Phase(enum.Enum):
    BURNIN = "burnin"
    CONTRACT = "contract"
    PROJECTION_COUPLING = "projection_coupling"
    COUPLED = "coupled"


@dataclass(frozen=True)
class PhaseThresholds:
    """Tunable constants the analysis only asserts to exist."""

    eps_ball: float = 0.02
    sqrtn_C: float = 4.0
    coalesce_C: float = 4.0
    boost_rounds: int = 24
    proximity_r: float = 8.0
    t2_gamma: float = 6.0
    burnin_budget: int = 1000

    def __post_init__(self):
        if min(self.eps_ball, self.sqrtn_C, self.coalesce_C, self.proximity_r) <= 0:
            raise ValueError("thresholds must be positive")
        if self.boost_rounds < 1:
            raise ValueError("boost_rounds must be >= 1")


@dataclass(frozen=True)
class CouplingState:
    x: ProjectionMatrix
    y: ProjectionMatrix
    t: int = 0
    phase: Phase = Phase.BURNIN
    coupled_at: int | None = None

    def __post_init__(self):
        if not np.array_equal(self.x.cell_sizes, self.y.cell_sizes):
            raise ValueError("both copies must share the partition")


@dataclass(frozen=True)
class BurninResult:
    state: ProjectionMatrix
    steps_used: int
    hit: bool


@dataclass(frozen=True)
class MultiphaseRecord:
    t1_burnin: int
    t2_contract: int
    coalesce_hit_t: int | None
    attempts: int
    coupled_at: int | None
    censored: bool
    proximity_checks: int = 0
    proximity_holds: int = 0


def _sorted_alpha(counts, n):
    return np.sort(counts)[::-1] / n


def _ball_distance(counts, n, m):
    return float(np.abs(_sorted_alpha(counts, n) - m).max())


def coalescence_distance(state):
    """max over cells of |alpha_1 - alpha_{1,k}|, the partition-coalescence gap."""
    cols = state.a.sum(axis=0)
    dom = int(np.argmax(cols))
    a1 = cols[dom] / state.n
    gaps = [
        abs(a1 - state.a[k, dom] / state.cell_sizes[k])
        for k in range(state.q)
        if state.cell_sizes[k] > 0
    ]
    return float(max(gaps))


def burnin_until_ball(chain, eps, params, rng, budget=None):
    """Advance until the sorted proportions are within eps of m (sup norm).

    A budget exhaustion is a censored observation, not an error: ``hit`` is
    False and the state is returned as-is.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    budget = 1000 if budget is None else budget
    m = majority_vector(params)
    state = chain
    steps = 0
    while True:
        if _ball_distance(state.a.sum(axis=0), state.n, m) <= eps:
            return BurninResult(state=state, steps_used=steps, hit=True)
        if steps >= budget:
            return BurninResult(state=state, steps_used=steps, hit=False)
        state = sw_step_projection(state, params, rng)
        steps += 1


def _weighted_choice(values, weights, rng):
    c = np.cumsum(weights)
    return int(values[np.searchsorted(c, rng.random() * c[-1], side="right")])


@lru_cache(maxsize=16384)
def _binom_pmf_window(n, pr, halfwidth=10.0):
    """(first value, pmf array) of Bin(n, pr) on mean +- halfwidth sigma."""
    mean = n * pr
    sd = math.sqrt(max(n * pr * (1.0 - pr), 1.0))
    lo = max(0, int(math.floor(mean - halfwidth * sd)))
    hi = min(n, int(math.ceil(mean + halfwidth * sd)))
    xs = np.arange(lo, hi + 1)
    pmf = stats.binom.pmf(xs, n, pr)
    pmf.setflags(write=False)
    return lo, pmf


def _maximal_shifted_binomial(n1, n2, pr, d, rng):
    """(X, Y) with X ~ Bin(n1, pr), Y ~ Bin(n2, pr), maximizing P(X - Y = d).

    Explicit maximal coupling of the law of X and the law of Y + d: the
    overlap mass is sampled first; on a miss both sides draw from their
    residuals independently (supports are disjoint, so the miss is final).
    """
    lo1, pmf1 = _binom_pmf_window(n1, pr)
    lo2, pmf2 = _binom_pmf_window(n2, pr)
    lo = min(lo1, lo2 + d)
    hi = max(lo1 + pmf1.size, lo2 + d + pmf2.size)
    grid = np.arange(lo, hi)
    f1 = np.zeros(grid.size)
    f1[lo1 - lo : lo1 - lo + pmf1.size] = pmf1
    f2 = np.zeros(grid.size)
    f2[lo2 + d - lo : lo2 + d - lo + pmf2.size] = pmf2
    overlap = np.minimum(f1, f2)
    w = overlap.sum()
    if rng.random() < w:
        x = _weighted_choice(grid, overlap, rng)
        return x, x - d, True
    x = _weighted_choice(grid, f1 - overlap, rng)
    yd = _weighted_choice(grid, f2 - overlap, rng)
    return x, yd - d, False


def shifted_multinomial_coupling(m1, m2, q, target_d, rng):
    """Couple X ~ Mult(m1, uniform q) and Y ~ Mult(m2, uniform q) toward X - Y = target_d.

    Stick-breaking into conditional binomials, each coordinate coupled by an
    explicit maximal coupling shifted by its target discrepancy. Marginals are
    exact whether or not the coupling succeeds.
    """
    d = np.asarray(target_d, dtype=np.int64)
    if d.shape[0] != q:
        raise ValueError(f"target_d must have length q={q}")
    if int(d.sum()) != m1 - m2:
        raise ValueError(
            f"infeasible target: sum(target_d)={int(d.sum())} != m1-m2={m1 - m2}"
        )
    if np.abs(d).max() > 10.0 * math.sqrt(max(m1, m2, 1)):
        raise ValueError("infeasible target: discrepancy beyond the 10*sqrt(m) guard")
    x = np.zeros(q, dtype=np.int64)
    y = np.zeros(q, dtype=np.int64)
    rem1, rem2 = m1, m2
    success = True
    for j in range(q - 1):
        pr = 1.0 / (q - j)
        xj, yj, hit = _maximal_shifted_binomial(rem1, rem2, pr, int(d[j]), rng)
        x[j], y[j] = xj, yj
        success = success and hit
        rem1 -= xj
        rem2 -= yj
    x[q - 1], y[q - 1] = rem1, rem2
    success = success and (rem1 - rem2 == d[q - 1])
    return x, y, success


def _check_proximity(state, params, m, c_hat):
    """A1/A2: both copies near m, per-cell dominant fractions close across copies."""
    n = state.x.n
    sq = math.sqrt(n)
    for copy in (state.x, state.y):
        if _ball_distance(copy.a.sum(axis=0), n, m) > c_hat / sq:
            return False
    dx = int(np.argmax(state.x.a.sum(axis=0)))
    dy = int(np.argmax(state.y.a.sum(axis=0)))
    for i in range(state.x.q):
        size = state.x.cell_sizes[i]
        if size == 0:
            continue
        gap = abs(state.x.a[i, dx] - state.y.a[i, dy]) / size
        if gap > c_hat / math.sqrt(size):
            return False
    return True


def couple_projection_step(state, params, thresholds, rng):
    """One coupled SW step of both projections; sets phase=COUPLED on success.

    Percolation is independent in the two copies; the largest components share
    one color; all other components of size >= 2 and per-cell excess isolated
    vertices are colored independently; the remaining isolated vertices are
    colored by per-cell shifted multinomial couplings that cancel the
    accumulated per-cell discrepancy.
    """
    if state.phase is Phase.COUPLED or np.array_equal(state.x.a, state.y.a):
        nxt = sw_step_projection(state.x, params, rng)
        return CouplingState(
            x=nxt, y=nxt, t=state.t + 1, phase=Phase.COUPLED,
            coupled_at=state.coupled_at if state.coupled_at is not None else state.t,
        )
    m = majority_vector(params)
    if not _check_proximity(state, params, m, thresholds.sqrtn_C):
        raise CouplingPreconditionError("A1/A2 proximity does not hold")

    q = state.x.q
    percolated = []
    for copy in (state.x, state.y):
        classes = []
        largest = (-1, -1, -1)  # size, class, index
        for c in range(q):
            sizes, splits, iso = _kernels.project_class(rng, copy.a[:, c].copy(), params.p)
            classes.append((sizes, splits, iso))
            if sizes.size:
                k_idx = int(np.argmax(sizes))
                if int(sizes[k_idx]) > largest[0]:
                    largest = (int(sizes[k_idx]), c, k_idx)
        percolated.append((classes, largest))

    shared_color = int(rng.integers(0, q))
    new = [np.zeros((q, q), dtype=np.int64), np.zeros((q, q), dtype=np.int64)]
    iso_totals = [np.zeros(q, dtype=np.int64), np.zeros(q, dtype=np.int64)]
    for side, (classes, largest) in enumerate(percolated):
        for c, (sizes, splits, iso) in enumerate(classes):
            iso_totals[side] += iso
            big = np.flatnonzero(sizes >= 2)
            if big.size == 0:
                continue
            colors = rng.integers(0, q, size=big.size)
            if largest[1] == c:
                where = np.flatnonzero(big == largest[2])
                if where.size:
                    colors[where[0]] = shared_color
            for idx, col in zip(big, colors):
                new[side][:, col] += splits[idx]

    # per-cell excess isolated vertices colored independently
    for i in range(q):
        ex = int(iso_totals[0][i] - iso_totals[1][i])
        if ex > 0:
            new[0][i] += rng.multinomial(ex, np.full(q, 1.0 / q))
        elif ex < 0:
            new[1][i] += rng.multinomial(-ex, np.full(q, 1.0 / q))

    # remaining isolated vertices: couple to cancel the discrepancy per cell
    success = True
    for i in range(q):
        pool = int(min(iso_totals[0][i], iso_totals[1][i]))
        target = new[1][i] - new[0][i]
        try:
            xi, yi, hit = shifted_multinomial_coupling(pool, pool, q, target, rng)
        except ValueError:
            # discrepancy beyond the feasibility guard: color independently
            xi = rng.multinomial(pool, np.full(q, 1.0 / q)).astype(np.int64)
            yi = rng.multinomial(pool, np.full(q, 1.0 / q)).astype(np.int64)
            hit = bool(np.array_equal(new[0][i] + xi, new[1][i] + yi))
        new[0][i] += xi
        new[1][i] += yi
        success = success and hit

    cells = state.x.cell_sizes.copy()
    nx = ProjectionMatrix(a=new[0], cell_sizes=cells)
    ny = ProjectionMatrix(a=new[1], cell_sizes=cells.copy())
    if success:
        assert np.array_equal(nx.a, ny.a)
        return CouplingState(
            x=nx, y=ny, t=state.t + 1, phase=Phase.COUPLED, coupled_at=state.t + 1
        )
    return CouplingState(
        x=nx, y=ny, t=state.t + 1, phase=Phase.PROJECTION_COUPLING, coupled_at=None
    )


def _overlap_projection(cell_sizes, y_counts, rng):
    """Lift Y's counts onto X's partition: exchangeable overlap table sampling."""
    q = cell_sizes.shape[0]
    capacity = cell_sizes.copy()
    total = int(capacity.sum())
    a = np.zeros((q, q), dtype=np.int64)
    col = np.empty(q, dtype=np.int64)
    for j in range(q):
        total = _kernels.draw_split_from_urn(rng, capacity, total, int(y_counts[j]), col)
        a[:, j] = col
    return ProjectionMatrix(a=a, cell_sizes=cell_sizes.copy())


def run_multiphase(params, thresholds, rng, start=None):
    """Full coupling experiment from one replica's stream.

    X starts from ``start`` (monochromatic by default); Y from an
    approximate-stationary start (an independent run of 10*c*log n steps,
    which the cutoff theorem itself puts within o(1) TV of stationarity).
    Returns (record, final CouplingState).
    """
    n, q = params.n, params.q
    prof = drift_profile(params)
    m = prof.m
    x_counts = (start or SpinCounts.monochromatic(params)).counts.copy()
    y_counts = SpinCounts.uniform_random(params, rng).counts
    y_counts = _kernels.advance_counts(
        rng, y_counts, params.p, int(math.ceil(10.0 * prof.cutoff_c * math.log(n)))
    )

    # phase 1: independent burn-in at counts fidelity until both are in the ball
    t1 = 0
    hit_ball = True
    while (
        _ball_distance(x_counts, n, m) > thresholds.eps_ball
        or _ball_distance(y_counts, n, m) > thresholds.eps_ball
    ):
        if t1 >= thresholds.burnin_budget:
            hit_ball = False
            break
        x_counts = _kernels.advance_counts(rng, x_counts, params.p, 1)
        y_counts = _kernels.advance_counts(rng, y_counts, params.p, 1)
        t1 += 1
    if not hit_ball:
        return (
            MultiphaseRecord(
                t1_burnin=t1, t2_contract=0, coalesce_hit_t=None,
                attempts=0, coupled_at=None, censored=True,
            ),
            None,
        )

    # the lambda-partition is X's spin classes at the end of phase 1
    cell_sizes = x_counts.copy()
    state = CouplingState(
        x=ProjectionMatrix(a=np.diag(x_counts), cell_sizes=cell_sizes),
        y=_overlap_projection(cell_sizes, y_counts, rng),
        t=t1,
        phase=Phase.CONTRACT,
    )

    # phase 2: independent contraction; monitor partition coalescence
    t2 = int(math.ceil(prof.cutoff_c * math.log(n) + thresholds.t2_gamma))
    coalesce_bound = thresholds.coalesce_C / math.sqrt(n)
    coalesce_hit_t = None
    for _ in range(t2):
        state = CouplingState(
            x=sw_step_projection(state.x, params, rng),
            y=sw_step_projection(state.y, params, rng),
            t=state.t + 1,
            phase=Phase.CONTRACT,
        )
        if (
            coalesce_hit_t is None
            and coalescence_distance(state.x) <= coalesce_bound
            and coalescence_distance(state.y) <= coalesce_bound
        ):
            coalesce_hit_t = state.t

    # phase 3: boosted one-shot coupling attempts
    attempts = 0
    prox_checks = 0
    prox_holds = 0
    rball = thresholds.proximity_r
    for _ in range(thresholds.boost_rounds):
        if state.phase is Phase.COUPLED:
            break
        attempts += 1
        prox_checks += 1
        sq = math.sqrt(n)
        p_t = (
            _ball_distance(state.x.a.sum(axis=0), n, m) <= rball / sq
            and _ball_distance(state.y.a.sum(axis=0), n, m) <= rball / sq
            and coalescence_distance(state.x) <= rball / sq
            and coalescence_distance(state.y) <= rball / sq
        )
        prox_holds += int(p_t)
        try:
            state = couple_projection_step(
                replace(state, phase=Phase.PROJECTION_COUPLING), params, thresholds, rng
            )
        except CouplingPreconditionError:
            state = CouplingState(
                x=sw_step_projection(state.x, params, rng),
                y=sw_step_projection(state.y, params, rng),
                t=state.t + 1,
                phase=Phase.PROJECTION_COUPLING,
            )

    coupled = state.phase is Phase.COUPLED
    record = MultiphaseRecord(
        t1_burnin=t1,
        t2_contract=t2,
        coalesce_hit_t=coalesce_hit_t,
        attempts=attempts,
        coupled_at=state.coupled_at if coupled else None,
        censored=not coupled,
        proximity_checks=prox_checks,
        proximity_holds=prox_holds,
    )
    return record, state


def interpolated_median(values):
    """Median of integer-valued data by linear interpolation of the empirical CDF.

    Removes the discretization that makes plain medians of step-count data
    jump by whole units.
    """
    vals = np.sort(np.asarray(values, dtype=np.float64))
    n = vals.size
    if n == 0:
        raise ValueError("empty sample")
    uniq, counts = np.unique(vals, return_counts=True)
    cdf = np.cumsum(counts) / n
    if cdf[0] >= 0.5:
        return float(uniq[0])
    idx = int(np.searchsorted(cdf, 0.5))
    f_lo = cdf[idx - 1]
    f_hi = cdf[idx]
    return float(uniq[idx - 1] + (uniq[idx] - uniq[idx - 1]) * (0.5 - f_lo) / (f_hi - f_lo))
