"""Event-driven simulator of a single router's content store and PIT.

Each content has its own renewal request stream started in equilibrium, so
the workload is stationary from time zero. A request is a CS hit if the
content is stored, a PIT hit if a download for it is already pending, and is
forwarded otherwise; a forwarded request completes after the constant delay
``D``. Under 2-LRU the download is stored only if at least one of the
requests it served found the content's name in the filter, membership being
tested before the request refreshes the filter.

Random streams
--------------
Replication ``i`` of a run with seed ``s`` draws from
``PCG64(SeedSequence(s, spawn_key=(i,)))``; :func:`run` is replication 0.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy import stats

from . import _kernel as kern
from .solver import SystemConfig, solve

__all__ = ["SimConfig", "SimReport", "run", "replicate", "summarize", "write_per_content_csv"]

N_BATCHES = 10
BUFFER = 1 << 20


@dataclass(frozen=True)
class SimConfig:
    """Simulation run parameters.

    ``total_requests`` counts requests after the warmup. Warmup ends once
    both ``warmup_requests`` requests were seen and the clock passed
    ``warmup_time``; ``None`` selects the defaults (10% of
    ``total_requests`` and five analytic characteristic times).
    """

    system: SystemConfig
    total_requests: int = 10**6
    warmup_requests: Optional[int] = None
    warmup_time: Optional[float] = None
    seed: int = 0
    per_content_stats: bool = False
    prefill_filter: bool = False

    def __post_init__(self):
        if self.total_requests < N_BATCHES:
            raise ValueError(f"total_requests must be at least {N_BATCHES}")
        if self.warmup_requests is not None and self.warmup_requests < 0:
            raise ValueError("warmup_requests must be non-negative")
        if self.warmup_time is not None and self.warmup_time < 0:
            raise ValueError("warmup_time must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass
class SimReport:
    """Measured ratios and raw counts of one simulation run."""

    p_hit_cs: float
    p_hit_pit: float
    p_fwd: float
    requests: int
    cs_hits: int
    pit_hits: int
    forwards: int
    half_width: dict
    forwards_total: int
    completed_total: int
    in_flight: int
    sim_time: float
    seed: int
    replication: int = 0
    per_content: Optional[dict] = field(default=None, repr=False)

    def as_tuple(self):
        return (self.p_hit_cs, self.p_hit_pit, self.p_fwd)


def _default_warmup_time(system: SystemConfig) -> float:
    try:
        res = solve(system)
    except Exception:
        return 0.0
    return 5.0 * max(res.t_c, res.t_m or 0.0)


def _run_one(config: SimConfig, replication: int, warmup_time: float) -> SimReport:
    sysc = config.system
    cat = sysc.catalog
    K = cat.K
    if sysc.capacity > K:
        raise ValueError("capacity exceeds the catalogue")
    ss = np.random.SeedSequence(config.seed, spawn_key=(replication,))
    rng = np.random.Generator(np.random.PCG64(ss))

    lam = cat.rate(np.arange(1, K + 1))
    lam = np.atleast_1d(lam)
    w, mu = sysc.traffic.mixture(lam)
    w1 = np.ascontiguousarray(w[:, 0])
    mu1 = np.ascontiguousarray(mu[:, 0])
    mu2 = np.ascontiguousarray(mu[:, 1])

    # equilibrium first arrivals: phase i with probability lam * w_i / mu_i
    aw1 = lam * w1 / mu1
    u0 = rng.random(K)
    e0 = rng.standard_exponential(K)
    first = np.where(u0 < aw1, e0 / mu1, e0 / mu2)
    order = np.argsort(first, kind="stable")
    ht = first[order].copy()  # a sorted array is a valid binary heap
    hk = order.astype(np.int64)

    two = sysc.policy == "2lru"
    M = int(sysc.M) if two else 1
    sc = np.zeros(kern.N_SCALARS)
    for idx in (kern.CS_HEAD, kern.CS_TAIL, kern.FL_HEAD, kern.FL_TAIL):
        sc[idx] = -1
    cs_in = np.zeros(K, dtype=np.bool_)
    cs_prev = np.full(K, -1, dtype=np.int64)
    cs_next = np.full(K, -1, dtype=np.int64)
    fl_in = np.zeros(K, dtype=np.bool_)
    fl_prev = np.full(K, -1, dtype=np.int64)
    fl_next = np.full(K, -1, dtype=np.int64)
    if two and config.prefill_filter:
        n = min(M, K)
        fl_in[:n] = True
        fl_prev[1:n] = np.arange(n - 1)
        fl_next[: n - 1] = np.arange(1, n)
        sc[kern.FL_HEAD], sc[kern.FL_TAIL], sc[kern.FL_SIZE] = 0, n - 1, n
    pit_pending = np.zeros(K, dtype=np.bool_)
    pit_flag = np.zeros(K, dtype=np.bool_)
    cq_k = np.zeros(K, dtype=np.int64)
    cq_t = np.zeros(K)
    c_req = np.zeros(K, dtype=np.int64)
    c_cs = np.zeros(K, dtype=np.int64)
    c_pit = np.zeros(K, dtype=np.int64)
    c_fwd = np.zeros(K, dtype=np.int64)
    batch = np.zeros((N_BATCHES, 3), dtype=np.int64)

    total = int(config.total_requests)
    warm_n = (int(math.ceil(0.1 * total)) if config.warmup_requests is None
              else int(config.warmup_requests))
    status = kern.STATUS_REFILL
    while status == kern.STATUS_REFILL:
        ubuf = rng.random(BUFFER)
        ebuf = rng.standard_exponential(BUFFER)
        sc[kern.POS] = 0
        status = kern.run_events(
            sc, ht, hk, w1, mu1, mu2, ubuf, ebuf,
            cs_in, cs_prev, cs_next, int(sysc.capacity),
            fl_in, fl_prev, fl_next, M, two,
            pit_pending, pit_flag, cq_k, cq_t, float(sysc.delay),
            c_req, c_cs, c_pit, c_fwd, batch, N_BATCHES,
            warm_n, float(warmup_time), total)

    cs, pit, fwd = int(c_cs.sum()), int(c_pit.sum()), int(c_fwd.sum())
    n = cs + pit + fwd
    fractions = batch / batch.sum(axis=1, keepdims=True)
    tq = stats.t.ppf(0.975, N_BATCHES - 1)
    hw = tq * fractions.std(axis=0, ddof=1) / math.sqrt(N_BATCHES)
    per = None
    if config.per_content_stats:
        per = {"requests": c_req, "cs_hits": c_cs, "pit_hits": c_pit, "forwards": c_fwd}
    return SimReport(
        p_hit_cs=cs / n, p_hit_pit=pit / n, p_fwd=fwd / n,
        requests=n, cs_hits=cs, pit_hits=pit, forwards=fwd,
        half_width={"p_hit_cs": float(hw[0]), "p_hit_pit": float(hw[1]),
                    "p_fwd": float(hw[2])},
        forwards_total=int(sc[kern.FWD_ALL]), completed_total=int(sc[kern.DONE_ALL]),
        in_flight=int(sc[kern.CQ_LEN]), sim_time=float(sc[kern.CLOCK]),
        seed=config.seed, replication=replication, per_content=per)


def replicate(config: SimConfig, n: int) -> List[SimReport]:
    """Run ``n`` independent replications (see the module note on streams)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    wt = (config.warmup_time if config.warmup_time is not None
          else _default_warmup_time(config.system))
    return [_run_one(config, i, wt) for i in range(n)]


def run(config: SimConfig) -> SimReport:
    """Simulate one replication and return its measured statistics."""
    return replicate(config, 1)[0]


def summarize(reports: List[SimReport]):
    """Mean and 95% half-width across replications, per metric.

    A single report falls back to its own batch-means half-widths.
    """
    names = ("p_hit_cs", "p_hit_pit", "p_fwd")
    vals = np.array([r.as_tuple() for r in reports])
    mean = dict(zip(names, vals.mean(axis=0)))
    if len(reports) == 1:
        return mean, dict(reports[0].half_width)
    tq = stats.t.ppf(0.975, len(reports) - 1)
    hw = tq * vals.std(axis=0, ddof=1) / math.sqrt(len(reports))
    return mean, dict(zip(names, hw))


def write_per_content_csv(report: SimReport, path) -> None:
    """Dump per-content counters (needs ``per_content_stats=True``)."""
    if report.per_content is None:
        raise ValueError("report has no per-content counters")
    pc = report.per_content
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["content", "requests", "cs_hits", "pit_hits", "forwards"])
        for i in range(len(pc["requests"])):
            wr.writerow([i + 1, pc["requests"][i], pc["cs_hits"][i],
                         pc["pit_hits"][i], pc["forwards"][i]])
