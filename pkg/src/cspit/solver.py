"""Characteristic-time solvers for a CS-PIT router.

Three policies are supported:

``zdd-lru``
    classical LRU with instantaneous downloads (the ``D = 0`` baseline);
``lru``
    LRU content store fed after a constant download delay ``D``, with
    requests arriving during the download aggregated in the PIT;
``2lru``
    the same store preceded by an LRU name filter of size ``M``; a download
    is inserted only if one of the requests it served hit the filter.

Each solver finds the global characteristic time ``T_C`` such that the
expected number of stored contents equals the capacity, then evaluates the
per-content CS hit, PIT hit and forwarding probabilities.

For very large catalogues the contents beyond ``exact_limit`` are grouped
into geometric buckets, each represented by its middle content.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import optimize

from .renewal import NumericError, residual_lst_batch, residual_moments_batch
from .traffic import TrafficKind, ZipfCatalog

__all__ = [
    "SystemConfig",
    "SolveResult",
    "ContentGrid",
    "content_grid",
    "solve",
    "solve_zdd_lru",
    "solve_nonzdd_lru",
    "solve_filter",
    "solve_nonzdd_2lru",
    "insertion_probability",
    "aggregate",
]

POLICIES = ("zdd-lru", "lru", "2lru")
EXACT_LIMIT = 10**6
BUCKETS_PER_DECADE = 32


@dataclass(frozen=True)
class SystemConfig:
    """Router and workload parameters with the default operating point."""

    catalog: ZipfCatalog = field(default_factory=lambda: ZipfCatalog(10**6, 0.8, 1e5))
    traffic: TrafficKind = field(default_factory=TrafficKind)
    capacity: int = 1000
    filter_size: Optional[int] = None
    delay: float = 0.1
    policy: str = "lru"

    def __post_init__(self):
        policy = {"twolru": "2lru", "2-lru": "2lru", "zdd": "zdd-lru"}.get(
            self.policy.lower(), self.policy.lower())
        if policy not in POLICIES:
            raise ValueError(f"unknown policy {self.policy!r}")
        object.__setattr__(self, "policy", policy)
        # C = K is a legal (trivial) router; only the analytical solvers need C < K
        if self.capacity < 1 or self.capacity > self.catalog.K:
            raise ValueError(f"capacity must satisfy 1 <= C <= K, got C={self.capacity}")
        if self.filter_size is not None and self.filter_size < 1:
            raise ValueError("filter size must be at least 1")
        if self.delay < 0:
            raise ValueError("download delay must be non-negative")

    @property
    def M(self) -> float:
        return self.capacity if self.filter_size is None else self.filter_size


@dataclass(frozen=True)
class ContentGrid:
    """Contents (or bucket representatives) over which sums are taken.

    ``k`` are representative content indices, ``count`` how many contents
    each stands for and ``mass`` their total popularity.
    """

    k: np.ndarray
    count: np.ndarray
    mass: np.ndarray

    @property
    def exact(self) -> bool:
        return bool(np.all(self.count == 1))


def content_grid(catalog: ZipfCatalog, exact_limit: int = EXACT_LIMIT,
                 buckets_per_decade: int = BUCKETS_PER_DECADE) -> ContentGrid:
    K = catalog.K
    n_exact = min(K, exact_limit)
    k = np.arange(1, n_exact + 1, dtype=np.float64)
    count = np.ones(n_exact)
    mass = catalog.popularities(n_exact)
    if K <= n_exact:
        return ContentGrid(k, count, mass)
    decades = math.log10(K / n_exact)
    n_b = max(1, int(math.ceil(decades * buckets_per_decade)))
    edges = np.unique(np.round(n_exact * (K / n_exact) ** (np.arange(n_b + 1) / n_b)))
    edges[-1] = K
    lo = edges[:-1].astype(np.int64) + 1
    hi = edges[1:].astype(np.int64)
    bk = 0.5 * (lo + hi)
    bc = (hi - lo + 1).astype(np.float64)
    bm = np.array([catalog.mass(a, b) for a, b in zip(lo, hi)])
    return ContentGrid(np.concatenate([k, bk]), np.concatenate([count, bc]),
                       np.concatenate([mass, bm]))


@dataclass
class SolveResult:
    """Characteristic times with per-content and aggregate probabilities.

    Per-content arrays are indexed like ``grid.k``. Aggregates are
    popularity-weighted means.
    """

    config: SystemConfig
    grid: ContentGrid
    t_c: float
    p_in: np.ndarray
    p_hit_cs: np.ndarray
    p_hit_pit: np.ndarray
    p_fwd: np.ndarray
    t_m: Optional[float] = None
    q: Optional[np.ndarray] = None
    p_hit_flt: Optional[np.ndarray] = None
    m_d: Optional[np.ndarray] = None
    monotone: bool = True

    @property
    def occupancy(self) -> float:
        return float(np.dot(self.grid.count, self.p_in))

    @property
    def residual(self) -> float:
        """Relative error of the fixed point ``sum p_in = C``."""
        return abs(self.occupancy - self.config.capacity) / self.config.capacity

    @property
    def aggregate(self):
        return aggregate(self, self.grid)

    @property
    def hit_cs(self) -> float:
        return self.aggregate[0]

    @property
    def hit_pit(self) -> float:
        return self.aggregate[1]

    @property
    def fwd(self) -> float:
        return self.aggregate[2]


def aggregate(per_content, grid: ContentGrid):
    """Popularity-weighted ``(p_hit_cs, p_hit_pit, p_fwd)``.

    ``per_content`` is a :class:`SolveResult` or any object with the three
    per-content arrays as attributes.
    """
    w = grid.mass / grid.mass.sum()
    return (float(np.dot(w, per_content.p_hit_cs)),
            float(np.dot(w, per_content.p_hit_pit)),
            float(np.dot(w, per_content.p_fwd)))


# --------------------------------------------------------------------------
# characteristic-time root finding
# --------------------------------------------------------------------------

def _find_ct(objective: Callable[[float], float], target: float, t0: float,
             rtol: float = 1e-12):
    """Solve ``objective(T) = target`` on ``T > 0`` for a non-decreasing objective.

    Returns ``(T, monotone)``. The root is bracketed by stepping ``log T``
    by decades from ``t0`` and refined with Brent's method in ``log T``;
    a short probe of the objective around the root flags non-monotonicity.
    """
    if objective(1e-12) - target > 0:
        raise NumericError("objective already exceeds the target at T=1e-12")
    # brentq's wrapper forms a reference cycle with ``g``; routing the objective
    # through a holder that is emptied afterwards lets the big arrays go at once
    holder = [objective]
    g = lambda u: holder[0](math.exp(u)) - target  # noqa: E731
    lo = hi = math.log(max(t0, 2e-12))
    g_hi = g(hi)
    if g_hi < 0:
        while g_hi < 0:
            lo, hi = hi, hi + math.log(10.0)
            if hi > 690:
                raise NumericError("could not bracket the characteristic time")
            g_hi = g(hi)
    else:
        while g(lo) >= 0:
            hi, lo = lo, max(lo - math.log(10.0), math.log(1e-12))
    try:
        u = optimize.brentq(g, lo, hi, xtol=1e-14,
                            rtol=max(rtol, 4 * np.finfo(float).eps), maxiter=500)
    finally:
        holder.clear()
    t = math.exp(u)
    probe = t * np.logspace(-2, 2, 9)
    vals = np.array([objective(x) for x in probe])
    monotone = bool(np.all(np.diff(vals) >= -1e-9 * max(target, 1.0)))
    return t, monotone


def _mixtures(config: SystemConfig, grid: ContentGrid):
    lam = config.catalog.lambda_total * grid.mass / grid.count
    w, mu = config.traffic.mixture(lam)
    return lam, w, mu


def _cdf(w, mu, t):
    return np.sum(w * -np.expm1(-mu * t), axis=1)


def _age_cdf(lam, w, mu, t):
    return lam * np.sum(w / mu * -np.expm1(-mu * t), axis=1)


def _zdd_time(config, grid, lam, w, mu, size):
    def occ(t):
        return float(np.dot(grid.count, _age_cdf(lam, w, mu, t)))
    return _find_ct(occ, size, 1.0 / config.catalog.lambda_total)


def _grid_for(config, grid):
    if config.capacity >= config.catalog.K:
        raise ValueError("analytical solvers need capacity C < K")
    if config.policy == "2lru" and config.M >= config.catalog.K:
        raise ValueError("analytical solvers need filter size M < K")
    return content_grid(config.catalog) if grid is None else grid


def solve_zdd_lru(config: SystemConfig, grid: Optional[ContentGrid] = None) -> SolveResult:
    """Classical LRU with zero download delay (Che/Fagin characteristic time)."""
    grid = _grid_for(config, grid)
    lam, w, mu = _mixtures(config, grid)
    t_c, mono = _zdd_time(config, grid, lam, w, mu, config.capacity)
    hit = _cdf(w, mu, t_c)
    p_in = _age_cdf(lam, w, mu, t_c)
    return SolveResult(config, grid, t_c, p_in, hit, np.zeros_like(hit), 1.0 - hit,
                       m_d=np.zeros_like(hit), monotone=mono)


class _NonZdd:
    """Per-content quantities that do not depend on ``T_C``."""

    CHUNK = 1 << 19

    def __init__(self, config, grid):
        self.lam, self.w, self.mu = _mixtures(config, grid)
        n = self.lam.shape[0]
        self.m_d = np.empty(n)
        self.w_mu = self.w / self.mu
        self.w_lst = np.empty_like(self.w)
        for a in range(0, n, self.CHUNK):
            s = slice(a, min(a + self.CHUNK, n))
            self.m_d[s], m1, m2 = residual_moments_batch(self.w[s], self.mu[s], config.delay)
            # E[exp(-mu_i R)] for each phase
            self.w_lst[s] = self.w[s] * residual_lst_batch(m1, m2, self.mu[s])
        self.wmu_lst = self.w_lst / self.mu

    def at(self, t):
        """``(F, F_hat, rho, rho')`` at ``T = t``, evaluated in row chunks."""
        n = self.lam.shape[0]
        out = np.empty((4, n))
        for a in range(0, n, self.CHUNK):
            s = slice(a, min(a + self.CHUNK, n))
            one_minus = -np.expm1(-self.mu[s] * t)
            out[0, s] = np.einsum("ij,ij->i", self.w[s], one_minus)
            out[1, s] = self.lam[s] * np.einsum("ij,ij->i", self.w_mu[s], one_minus)
            out[2, s] = np.einsum("ij,ij->i", self.w_lst[s], one_minus)
            out[3, s] = self.lam[s] * np.einsum("ij,ij->i", self.wmu_lst[s], one_minus)
        return out[0], out[1], out[2], out[3]


def _finish(config, grid, t_c, hit, p_in, m_d, mono, **extra):
    fwd = (1.0 - hit) / (1.0 + m_d)
    pit = 1.0 - hit - fwd
    return SolveResult(config, grid, t_c, p_in, hit, pit, fwd, m_d=m_d, monotone=mono,
                       **extra)


def solve_nonzdd_lru(config: SystemConfig, grid: Optional[ContentGrid] = None,
                     ) -> SolveResult:
    """LRU content store with constant download delay and PIT aggregation."""
    grid = _grid_for(config, grid)
    nz = _NonZdd(config, grid)

    def p_in(t):
        F, Fh, rho, rho_p = nz.at(t)
        return (rho * Fh + rho_p * (1.0 - F)) / (1.0 - F + rho)

    t_c, mono = _find_ct(lambda t: float(np.dot(grid.count, p_in(t))),
                         config.capacity, 1.0 / config.catalog.lambda_total)
    F, Fh, rho, rho_p = nz.at(t_c)
    hit = rho / (1.0 - F + rho)
    return _finish(config, grid, t_c, hit, p_in(t_c), nz.m_d, mono)


def solve_filter(config: SystemConfig, grid: Optional[ContentGrid] = None):
    """Characteristic time ``T_M`` of the LRU name filter and its hit probabilities.

    The filter is refreshed on every request, so it is a zero-delay LRU of
    size ``M``. Returns ``(t_m, p_hit_flt)``.
    """
    grid = _grid_for(config, grid)
    lam, w, mu = _mixtures(config, grid)
    t_m, _ = _zdd_time(config, grid, lam, w, mu, config.M)
    return t_m, _cdf(w, mu, t_m)


def insertion_probability(p_hit_flt, m_d):
    """CS admission probability ``1 - (1 - p_flt) ** (m(D) + 1)``.

    The request that triggered the download and the ``m(D)`` requests
    expected during it each get a chance to hit the filter.
    """
    p = np.asarray(p_hit_flt, dtype=np.float64)
    e = np.asarray(m_d, dtype=np.float64) + 1.0
    with np.errstate(divide="ignore"):
        out = -np.expm1(e * np.log1p(-np.minimum(p, 1.0)))
    out = np.where(p >= 1.0, 1.0, out)
    return float(out) if np.ndim(out) == 0 else out


def solve_nonzdd_2lru(config: SystemConfig, grid: Optional[ContentGrid] = None,
                      q_override=None) -> SolveResult:
    """LRU content store behind an LRU filter, constant download delay.

    ``q_override`` replaces the computed admission probabilities (used to
    check the degenerate always-admit case).
    """
    grid = _grid_for(config, grid)
    nz = _NonZdd(config, grid)
    t_m, _ = _zdd_time(config, grid, nz.lam, nz.w, nz.mu, config.M)
    p_flt = _cdf(nz.w, nz.mu, t_m)
    q = insertion_probability(p_flt, nz.m_d)
    if q_override is not None:
        q = np.broadcast_to(np.asarray(q_override, dtype=np.float64), q.shape).copy()

    def p_in(t):
        F, Fh, rho, rho_p = nz.at(t)
        return q * (rho * Fh + rho_p * (1.0 - F)) / (1.0 - F + rho * q)

    t_c, mono = _find_ct(lambda t: float(np.dot(grid.count, p_in(t))),
                         config.capacity, 1.0 / config.catalog.lambda_total)
    F, Fh, rho, rho_p = nz.at(t_c)
    hit = rho * q / (1.0 - F + rho * q)
    return _finish(config, grid, t_c, hit, p_in(t_c), nz.m_d, mono,
                   t_m=t_m, q=q, p_hit_flt=p_flt)


def solve(config: SystemConfig, grid: Optional[ContentGrid] = None) -> SolveResult:
    """Dispatch on ``config.policy``."""
    if config.policy == "zdd-lru":
        return solve_zdd_lru(config, grid)
    if config.policy == "lru":
        return solve_nonzdd_lru(config, grid)
    return solve_nonzdd_2lru(config, grid)
