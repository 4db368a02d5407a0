"""Component-size sampling for the SW percolation step on complete-graph classes.

The fast path samples G(k, p) component sizes in O(k) expected time via the
exploration process, never materializing edges; the brute-force oracle flips
all C(k,2) edges and runs union-find, and stays independent of the fast path.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .analysis import solve_theta


@dataclass(frozen=True)
class ComponentSample:
    """Component sizes of one percolation draw, largest first."""

    sizes: np.ndarray
    k: int
    p: float

    def __post_init__(self):
        assert int(self.sizes.sum()) == self.k


@dataclass(frozen=True)
class SusceptibilityStats:
    """Per-n Monte Carlo summaries of the non-giant squared component sizes."""

    n_values: list
    mean_R: list
    var_R: list
    isolated_mean: list
    l1_mean: list


def sample_components(k, p, rng):
    """Exact G(k, p) component sizes via the exploration process."""
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    sizes = np.empty(max(k, 1), dtype=np.int64)
    nc = _kernels.explore_component_sizes(rng, k, p, sizes)
    out = np.sort(sizes[:nc])[::-1].copy()
    return ComponentSample(sizes=out, k=k, p=p)


def sample_components_bruteforce(k, p, rng):
    """Edge-enumeration oracle: flip each of the C(k,2) edges, union-find."""
    if k > 2000:
        raise ValueError(f"brute force guarded to k <= 2000, got {k}")
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    if k == 0:
        return ComponentSample(sizes=np.empty(0, dtype=np.int64), k=0, p=p)
    iu, ju = np.triu_indices(k, 1)
    present = rng.random(iu.shape[0]) < p
    parent = list(range(k))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in zip(iu[present], ju[present]):
        ra, rb = find(int(a)), find(int(b))
        if ra != rb:
            parent[rb] = ra
    counts = {}
    for v in range(k):
        r = find(v)
        counts[r] = counts.get(r, 0) + 1
    out = np.array(sorted(counts.values(), reverse=True), dtype=np.int64)
    return ComponentSample(sizes=out, k=k, p=p)


def split_component_over_cells(component_size, cell_counts, rng):
    """Intersection of one component with partition cells.

    Components are exchangeable within a color class, so the split is
    multivariate hypergeometric: ``component_size`` draws without replacement
    from an urn with ``cell_counts`` balls per cell.
    """
    cells = np.asarray(cell_counts, dtype=np.int64)
    if (cells < 0).any():
        raise ValueError("cell counts must be nonnegative")
    total = int(cells.sum())
    if component_size < 0 or component_size > total:
        raise ValueError(f"component_size {component_size} not in [0, {total}]")
    urn = cells.copy()
    out = np.empty(cells.shape[0], dtype=np.int64)
    _kernels.draw_split_from_urn(rng, urn, total, component_size, out)
    return out


def susceptibility_experiment(lam, n_grid, replicas, rng):
    """Monte Carlo estimates of E[R] and Var[R], R the off-giant susceptibility.

    R sums squared component sizes over j >= 2 when lam > 1 and over all
    components when lam < 1 (no giant to exclude).
    """
    if lam == 1:
        raise ValueError("susceptibility experiment is off-critical only (lambda != 1)")
    n_values, mean_R, var_R, iso_mean, l1_mean = [], [], [], [], []
    for n in n_grid:
        p = lam / n
        sizes = np.empty(n, dtype=np.int64)
        r_vals = np.empty(replicas)
        iso_vals = np.empty(replicas)
        l1_vals = np.empty(replicas)
        for r in range(replicas):
            nc = _kernels.explore_component_sizes(rng, n, p, sizes)
            s = sizes[:nc]
            sq = s.astype(np.float64) ** 2
            if lam > 1:
                r_vals[r] = sq.sum() - sq.max()
                l1_vals[r] = s.max()
            else:
                r_vals[r] = sq.sum()
                l1_vals[r] = s.max()
            iso_vals[r] = (s == 1).sum()
        n_values.append(n)
        mean_R.append(float(r_vals.mean()))
        var_R.append(float(r_vals.var(ddof=1)))
        iso_mean.append(float(iso_vals.mean()))
        l1_mean.append(float(l1_vals.mean()))
    return SusceptibilityStats(
        n_values=n_values, mean_R=mean_R, var_R=var_R,
        isolated_mean=iso_mean, l1_mean=l1_mean,
    )


def giant_density(lam):
    """theta(lambda), re-exported next to the samplers that verify it."""
    return solve_theta(lam)
