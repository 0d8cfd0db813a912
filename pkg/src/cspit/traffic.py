"""Content catalogue and per-content renewal request processes.

Every supported inter-request law (Poisson, two-phase hyper-exponential,
the hyper-z family and the interrupted Poisson process) is a finite mixture
of exponentials, so CDFs, age CDFs and densities are all evaluated in closed
form from a ``(weights, rates)`` pair.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

__all__ = [
    "ZipfCatalog",
    "RenewalSpec",
    "TrafficKind",
    "zipf_popularity",
    "zipf_partial_sum",
    "cdf",
    "age_cdf",
    "sample_interarrival",
    "stationary_first_arrival",
    "ipp_to_hyper2",
    "ipp_interarrival_moments",
]

#: Largest catalogue prefix whose popularity normalisation is summed term by term.
EXACT_PREFIX = 10**7

ArrayLike = Union[float, np.ndarray]


# --------------------------------------------------------------------------
# Zipf catalogue
# --------------------------------------------------------------------------

def _power_integral(alpha: float, a: float, b: float) -> float:
    """Integral of x**-alpha over [a, b], stable for alpha close to 1."""
    s = 1.0 - alpha
    lr = math.log(b / a)
    if s == 0.0:
        return lr
    return a**s * math.expm1(s * lr) / s


def _em_sum(alpha: float, a: int, b: int) -> float:
    # Euler-Maclaurin with two Bernoulli corrections; remainder ~ a**(-alpha-5)
    fa, fb = a**-alpha, b**-alpha
    d1a, d1b = -alpha * a ** (-alpha - 1), -alpha * b ** (-alpha - 1)
    c3 = -alpha * (alpha + 1) * (alpha + 2)
    d3a, d3b = c3 * a ** (-alpha - 3), c3 * b ** (-alpha - 3)
    return (_power_integral(alpha, a, b) + 0.5 * (fa + fb)
            + (d1b - d1a) / 12.0 - (d3b - d3a) / 720.0)


def _exact_sum(alpha: float, a: int, b: int, chunk: int = 2_000_000) -> float:
    total = 0.0
    for lo in range(a, b + 1, chunk):
        hi = min(b, lo + chunk - 1)
        k = np.arange(lo, hi + 1, dtype=np.float64)
        total += float(np.sum(k**-alpha))
    return total


def zipf_partial_sum(alpha: float, a: int, b: int) -> float:
    """Return ``sum(k**-alpha for k in range(a, b + 1))``.

    Short ranges and ranges starting below 1000 are summed exactly; the rest
    uses an Euler-Maclaurin expansion whose truncation error is far below
    double precision for ``a >= 1000``.
    """
    a, b = int(a), int(b)
    if b < a:
        return 0.0
    if b - a < 100_000:
        return _exact_sum(alpha, a, b)
    if a < 1000:
        return _exact_sum(alpha, a, 999) + _em_sum(alpha, 1000, b)
    return _em_sum(alpha, a, b)


@dataclass(frozen=True)
class ZipfCatalog:
    """A catalogue of ``K`` contents with Zipf(alpha) popularity.

    Popularities are computed on demand from the closed form and never
    materialised beyond what the caller asks for, so ``K`` may reach 1e9.
    """

    K: int
    alpha: float = 0.8
    lambda_total: float = 1e5
    normalization: float = field(init=False, repr=False)

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise ValueError(f"K must be a positive integer, got {self.K}")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if not self.lambda_total > 0:
            raise ValueError("lambda_total must be positive")
        object.__setattr__(self, "K", int(self.K))
        K = self.K
        if K <= EXACT_PREFIX:
            norm = _exact_sum(self.alpha, 1, K)
        else:
            norm = _exact_sum(self.alpha, 1, EXACT_PREFIX) + _em_sum(
                self.alpha, EXACT_PREFIX + 1, K)
        object.__setattr__(self, "normalization", norm)

    def popularity(self, k: ArrayLike) -> ArrayLike:
        """Request probability ``p_k`` of content(s) ``k`` (1-based)."""
        karr = np.asarray(k)
        if np.any(karr < 1) or np.any(karr > self.K):
            raise IndexError(f"content index out of range 1..{self.K}")
        p = karr.astype(np.float64) ** -self.alpha / self.normalization
        return float(p) if np.ndim(p) == 0 else p

    def rate(self, k: ArrayLike) -> ArrayLike:
        """Per-content request rate ``lambda_k = lambda_total * p_k``."""
        return self.lambda_total * self.popularity(k)

    def popularities(self, limit: Optional[int] = None) -> np.ndarray:
        """Array of ``p_1..p_n`` with ``n = min(K, limit)``."""
        n = self.K if limit is None else min(self.K, int(limit))
        return np.arange(1, n + 1, dtype=np.float64) ** -self.alpha / self.normalization

    def mass(self, a: int, b: int) -> float:
        """Total popularity of contents ``a..b`` inclusive."""
        return zipf_partial_sum(self.alpha, a, b) / self.normalization


def zipf_popularity(catalog: ZipfCatalog, k: int) -> float:
    return catalog.popularity(k)


# --------------------------------------------------------------------------
# Renewal processes
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RenewalSpec:
    """Inter-request law of one content's stationary renewal process.

    Internally the law is the exponential mixture ``weights``/``rates``.
    ``variant`` and ``params`` record how it was built: ``"poisson"``
    ``(rate,)``, ``"hyper2"`` ``(p1, mu1, mu2)``, ``"hyperz"`` ``(rate, z)``
    or ``"ipp"`` ``(nu, t_on, t_off)``. Use the classmethod constructors.
    """

    variant: str
    params: tuple
    weights: tuple
    rates: tuple
    mean_rate: float = field(init=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        mu = np.asarray(self.rates, dtype=float)
        if w.shape != mu.shape or w.ndim != 1 or len(w) == 0:
            raise ValueError("weights and rates must be equal-length 1-D sequences")
        if np.any(w < 0) or np.any(mu <= 0) or abs(w.sum() - 1.0) > 1e-10:
            raise ValueError("weights must be a probability vector and rates positive")
        lam = 1.0 / float(np.sum(w / mu))
        object.__setattr__(self, "mean_rate", lam)

    # constructors ---------------------------------------------------------
    @classmethod
    def poisson(cls, rate: float) -> "RenewalSpec":
        if not rate > 0:
            raise ValueError("rate must be positive")
        return cls("poisson", (rate,), (1.0,), (float(rate),))

    @classmethod
    def hyper2(cls, p1: float, mu1: float, mu2: float) -> "RenewalSpec":
        if not 0.0 <= p1 <= 1.0:
            raise ValueError("branch probability must lie in [0, 1]")
        if mu1 < mu2:
            p1, mu1, mu2 = 1.0 - p1, mu2, mu1
        return cls("hyper2", (p1, mu1, mu2), (p1, 1.0 - p1), (float(mu1), float(mu2)))

    @classmethod
    def hyperz(cls, rate: float, z: float = 10.0) -> "RenewalSpec":
        """Hyper-exponential with rate ``z*rate`` w.p. z/(z+1), else ``rate/z``."""
        if not rate > 0 or not z > 0:
            raise ValueError("rate and z must be positive")
        w1 = z / (z + 1.0)
        return cls("hyperz", (rate, z), (w1, 1.0 - w1), (z * rate, rate / z))

    @classmethod
    def ipp(cls, nu: float, t_on: float, t_off: float) -> "RenewalSpec":
        """Interrupted Poisson process, stored as its equivalent two-phase law."""
        p1, p2, r1, r2 = _ipp_h2_params(nu, t_on, t_off)
        return cls("ipp", (nu, t_on, t_off), (p1, p2), (r1, r2))

    # distribution functions -------------------------------------------------
    @property
    def _w(self) -> np.ndarray:
        return np.asarray(self.weights)

    @property
    def _mu(self) -> np.ndarray:
        return np.asarray(self.rates)

    def sf(self, t: ArrayLike) -> ArrayLike:
        """Survival function ``1 - F(t)``."""
        t = _check_time(t)
        out = np.sum(self._w * np.exp(-np.multiply.outer(t, self._mu)), axis=-1)
        return _scalar(out)

    def cdf(self, t: ArrayLike) -> ArrayLike:
        t = _check_time(t)
        out = np.sum(self._w * -np.expm1(-np.multiply.outer(t, self._mu)), axis=-1)
        return _scalar(out)

    def pdf(self, t: ArrayLike) -> ArrayLike:
        t = _check_time(t)
        out = np.sum(self._w * self._mu * np.exp(-np.multiply.outer(t, self._mu)), axis=-1)
        return _scalar(out)

    def age_cdf(self, a: ArrayLike) -> ArrayLike:
        """Stationary age (and residual life) CDF ``lambda * int_0^a (1 - F)``."""
        a = _check_time(a)
        terms = self._w / self._mu * -np.expm1(-np.multiply.outer(a, self._mu))
        return _scalar(self.mean_rate * np.sum(terms, axis=-1))

    def age_pdf(self, a: ArrayLike) -> ArrayLike:
        return _scalar(self.mean_rate * np.asarray(self.sf(a)))

    def moment(self, n: int) -> float:
        """``E[X**n]`` of the inter-request interval."""
        return float(math.factorial(n) * np.sum(self._w / self._mu**n))

    @property
    def age_weights(self) -> np.ndarray:
        # the equilibrium law is again an exponential mixture with these weights
        return self.mean_rate * self._w / self._mu


def _check_time(t):
    arr = np.asarray(t, dtype=np.float64)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError("time argument must be non-negative")
    return arr


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def cdf(spec: RenewalSpec, t: ArrayLike) -> ArrayLike:
    return spec.cdf(t)


def age_cdf(spec: RenewalSpec, a: ArrayLike) -> ArrayLike:
    return spec.age_cdf(a)


def _draw_mixture(weights, rates, rng: np.random.Generator, size):
    weights = np.asarray(weights)
    rates = np.asarray(rates)
    if len(rates) == 1:
        return rng.exponential(1.0 / rates[0], size=size)
    branch = rng.choice(len(rates), p=weights / weights.sum(), size=size)
    return rng.standard_exponential(size=size) / rates[branch]


def sample_interarrival(spec: RenewalSpec, rng: np.random.Generator, size=None):
    """Draw inter-request interval(s): pick the phase, then the exponential."""
    return _draw_mixture(spec.weights, spec.rates, rng, size)


def stationary_first_arrival(spec: RenewalSpec, rng: np.random.Generator, size=None):
    """Draw from the equilibrium residual-life law, making the stream stationary at 0."""
    return _draw_mixture(spec.age_weights, spec.rates, rng, size)


# --------------------------------------------------------------------------
# IPP <-> H2
# --------------------------------------------------------------------------

def _ipp_h2_params(nu, t_on, t_off):
    nu = np.asarray(nu, dtype=np.float64)
    if np.any(nu <= 0) or not t_on > 0 or not t_off > 0:
        raise ValueError("IPP parameters must be positive")
    a, b = 1.0 / t_on, 1.0 / t_off  # on->off and off->on switching rates
    s = nu + a + b
    disc = (nu - b) ** 2 + a * a + 2.0 * a * (nu + b)
    r1 = 0.5 * (s + np.sqrt(disc))
    r2 = nu * b / r1
    # r2 < nu < r1; both weights are formed without subtracting from 1
    p1 = (nu - r2) / (r1 - r2)
    p2 = (a + b - r2) / (r1 - r2)
    if np.ndim(p1) == 0:
        return float(p1), float(p2), float(r1), float(r2)
    return p1, p2, r1, r2


def ipp_to_hyper2(nu: float, t_on: float, t_off: float) -> RenewalSpec:
    """Two-phase hyper-exponential law with the IPP's inter-request distribution.

    The rates are the roots of ``s**2 - (nu + 1/t_on + 1/t_off) s + nu/t_off``
    and the branch probability follows from matching the transform numerator.
    """
    p1, p2, r1, r2 = _ipp_h2_params(nu, t_on, t_off)
    return RenewalSpec("hyper2", (p1, r1, r2), (p1, p2), (r1, r2))


def ipp_interarrival_moments(nu: float, t_on: float, t_off: float):
    """First two moments of the IPP inter-request time from the Markov chain.

    Solved directly on the two-state chain (start ON just after an arrival),
    without going through the hyper-exponential representation.
    """
    a, b = 1.0 / t_on, 1.0 / t_off
    # expected time to absorption T_on, T_off: (nu + a) T_on = 1 + a T_off, b T_off = 1 + b T_on
    m_on = (1.0 + a / b) / nu
    m_off = 1.0 / b + m_on
    # second moments: (nu + a) S_on = 2 T_on + a S_off ; b S_off = 2 T_off + b S_on
    s_on = (2.0 * m_on + a * (2.0 * m_off / b)) / nu
    return m_on, s_on


# --------------------------------------------------------------------------
# Traffic families applied to a whole catalogue
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TrafficKind:
    """Family of per-content renewal processes parameterised by ``lambda_k``.

    ``name`` is ``"poisson"`` (IRM), ``"hyperz"`` (uses ``z``) or ``"ipp"``
    (uses ``t_on`` seconds and ``off_ratio = T_off / T_on``). For the IPP the
    on-rate is ``nu_k = lambda_k (T_on + T_off) / T_on``.
    """

    name: str = "poisson"
    z: float = 10.0
    t_on: Optional[float] = None
    off_ratio: float = 9.0

    def __post_init__(self):
        aliases = {"irm": "poisson", "hyper": "hyperz", "hyper10": "hyperz"}
        name = aliases.get(self.name.lower(), self.name.lower())
        if name not in ("poisson", "hyperz", "ipp"):
            raise ValueError(f"unknown traffic kind {self.name!r}")
        object.__setattr__(self, "name", name)
        if name == "hyperz" and not self.z > 0:
            raise ValueError("z must be positive")
        if name == "ipp" and not (self.t_on and self.t_on > 0 and self.off_ratio > 0):
            raise ValueError("ipp traffic needs positive t_on and off_ratio")

    @property
    def label(self) -> str:
        if self.name == "poisson":
            return "irm"
        if self.name == "hyperz":
            return f"hyper{self.z:g}"
        return f"ipp_ton{self.t_on:g}s"

    @property
    def t_off(self) -> Optional[float]:
        return None if self.t_on is None else self.off_ratio * self.t_on

    def spec(self, rate: float) -> RenewalSpec:
        if self.name == "poisson":
            return RenewalSpec.poisson(rate)
        if self.name == "hyperz":
            return RenewalSpec.hyperz(rate, self.z)
        nu = rate * (1.0 + self.off_ratio)
        return RenewalSpec.ipp(nu, self.t_on, self.t_off)

    def mixture(self, rates: np.ndarray):
        """Vectorised ``(weights, rates)`` arrays of shape ``(n, 2)``.

        Poisson is padded to two phases with zero weight on a duplicate rate.
        """
        lam = np.asarray(rates, dtype=np.float64)
        n = lam.shape[0]
        w = np.empty((n, 2))
        mu = np.empty((n, 2))
        if self.name == "poisson":
            w[:, 0], w[:, 1] = 1.0, 0.0
            mu[:, 0] = mu[:, 1] = lam
        elif self.name == "hyperz":
            z = self.z
            w[:, 0], w[:, 1] = z / (z + 1.0), 1.0 / (z + 1.0)
            mu[:, 0], mu[:, 1] = z * lam, lam / z
        else:
            p1, p2, r1, r2 = _ipp_h2_params(lam * (1.0 + self.off_ratio), self.t_on, self.t_off)
            w[:, 0], w[:, 1] = p1, p2
            mu[:, 0], mu[:, 1] = r1, r2
        return w, mu
