"""Closed-form layer: giant-component density, drift map, fixed point, cutoff constant.

All functions are pure; roots are located by bracketing bisection followed by a
few Newton polish steps, which converges unconditionally on these monotone
residuals.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

_RESIDUAL_TOL = 1e-12
_BISECT_ITERS = 200
_NEWTON_STEPS = 3


@dataclass(frozen=True)
class ModelParams:
    """Mean-field q-state Potts parameters with per-edge probability p = 1 - e^{-beta/n}."""

    q: int
    beta: float
    n: int
    p: float = field(init=False)

    def __post_init__(self):
        if self.q < 2:
            raise ValueError(f"q must be >= 2, got {self.q}")
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        object.__setattr__(self, "p", -math.expm1(-self.beta / self.n))


@dataclass(frozen=True)
class DriftProfile:
    """Fixed-point summary of the drift map for one (q, beta)."""

    a: float
    theta_at_a: float
    f_prime_at_a: float
    cutoff_c: float
    m: np.ndarray


def solve_theta(lam):
    """Giant-component density of G(n, lam/n): the root of e^{-lam*x} = 1 - x.

    Returns 0 for lam <= 1 (the positive root vanishes at criticality).
    """
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if lam <= 1.0:
        return 0.0

    def residual(x):
        return math.exp(-lam * x) - (1.0 - x)

    lo, hi = 1e-9, 1.0
    if residual(lo) >= 0.0:
        # root below the bracket floor: indistinguishable from 0 at this scale
        return 0.0
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if residual(mid) > 0.0:
            hi = mid
        else:
            lo = mid
        if abs(residual(mid)) <= _RESIDUAL_TOL:
            break
    x = 0.5 * (lo + hi)
    for _ in range(_NEWTON_STEPS):
        d = 1.0 - lam * math.exp(-lam * x)
        if d == 0.0:
            break
        x -= residual(x) / d
        x = min(max(x, lo), hi)
    return x


def drift_F(x, params):
    """Expected dominant-class fraction after one SW step from fraction x."""
    q = params.q
    if not (1.0 / q - 1e-12 <= x <= 1.0 + 1e-12):
        raise ValueError(f"x={x} outside [1/q, 1]")
    lam = params.beta * x
    th = solve_theta(lam) if lam > 0 else 0.0
    return 1.0 / q + (1.0 - 1.0 / q) * th * x


def drift_F_prime(x, params):
    """F'(x) on the supercritical branch, via the theta-only closed form."""
    q = params.q
    lam = params.beta * x
    if lam <= 1.0:
        raise ValueError(f"beta*x = {lam} <= 1: F is locally constant there")
    th = solve_theta(lam)
    # (1-θ)log(1-θ) -> 0 as θ -> 1; guard the 0*(-inf) at double rounding
    tail = (1.0 - th) * math.log1p(-th) if th < 1.0 else 0.0
    return (q - 1) / q * th * th / (th + tail)


def drift_F_prime_direct(x, params):
    """F'(x) via the direct-derivative form (q-1)θ / (q(1 - xβ e^{-xβθ}))."""
    q = params.q
    lam = params.beta * x
    if lam <= 1.0:
        raise ValueError(f"beta*x = {lam} <= 1: F is locally constant there")
    th = solve_theta(lam)
    return (q - 1) * th / (q * (1.0 - lam * math.exp(-lam * th)))


def drift_F_second(x, params):
    """F''(x) on the supercritical branch; negative on (1/beta, 1]."""
    q = params.q
    lam = params.beta * x
    if lam <= 1.0:
        raise ValueError(f"beta*x = {lam} <= 1: F is locally constant there")
    th = solve_theta(lam)
    e = math.exp(-lam * th)
    num = (q - 1) * params.beta * th * e * (lam * (th + 2.0 * e) - 2.0)
    den = q * (1.0 - lam * e) ** 3
    return -num / den


def fixed_point_a(params):
    """Unique fixed point of F in (1/q, 1] for beta > q."""
    q, beta = params.q, params.beta
    if beta <= q:
        raise ValueError(f"fixed point requires beta > q, got beta={beta}, q={q}")

    def residual(x):
        return drift_F(x, params) - x

    lo, hi = 1.0 / q + 1e-9, 1.0
    if residual(hi) >= 0.0:
        return 1.0
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if residual(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if abs(residual(mid)) <= _RESIDUAL_TOL:
            break
    a = 0.5 * (lo + hi)
    for _ in range(_NEWTON_STEPS):
        d = drift_F_prime(a, params) - 1.0
        if d == 0.0:
            break
        a -= residual(a) / d
        a = min(max(a, lo), hi)
    return a


def cutoff_constant(params):
    """c(beta, q) = (2 log(1/F'(a)))^{-1}, the mixing-time slope in log n."""
    a = fixed_point_a(params)
    return 1.0 / (2.0 * math.log(1.0 / drift_F_prime(a, params)))


def cutoff_constant_theta_form(params):
    """c(beta, q) evaluated from the second printed form, in theta(a*beta) only."""
    q = params.q
    a = fixed_point_a(params)
    th = solve_theta(params.beta * a)
    tail = (1.0 - th) * math.log1p(-th) if th < 1.0 else 0.0
    ratio = q / (q - 1) * (th + tail) / (th * th)
    return 1.0 / (2.0 * math.log(ratio))


def beta_critical(q):
    """Order-disorder critical temperature of the mean-field model."""
    if q < 2:
        raise ValueError(f"q must be >= 2, got {q}")
    if q == 2:
        return 2.0
    return 2.0 * (q - 1) / (q - 2) * math.log(q - 1)


def drift_G(x, y, params):
    """Cell-resolved drift G(x, y) = 1/q + θ(βx)·y·(1 - 1/q) (coalescence recursion)."""
    q = params.q
    for v, name in ((x, "x"), (y, "y")):
        if not (1.0 / q - 1e-12 <= v <= 1.0 + 1e-12):
            raise ValueError(f"{name}={v} outside [1/q, 1]")
    lam = params.beta * x
    th = solve_theta(lam) if lam > 0 else 0.0
    return 1.0 / q + th * y * (1.0 - 1.0 / q)


def iterate_drift(x0, t, params):
    """F^t(x0): the drift map applied t times."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    x = x0
    for _ in range(t):
        x = drift_F(x, params)
    return x


def majority_vector(params):
    """m = (a, (1-a)/(q-1), ..., (1-a)/(q-1)), the stationary proportions."""
    a = fixed_point_a(params)
    m = np.full(params.q, (1.0 - a) / (params.q - 1))
    m[0] = a
    return m


def drift_profile(params):
    """Bundle a, theta(a*beta), F'(a), c(beta,q), and m for one (q, beta)."""
    a = fixed_point_a(params)
    th = solve_theta(params.beta * a)
    fp = drift_F_prime(a, params)
    c = 1.0 / (2.0 * math.log(1.0 / fp))
    m = np.full(params.q, (1.0 - a) / (params.q - 1))
    m[0] = a
    return DriftProfile(a=a, theta_at_a=th, f_prime_at_a=fp, cutoff_c=c, m=m)
