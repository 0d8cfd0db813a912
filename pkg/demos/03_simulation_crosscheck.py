# %% [markdown]
# # Checking the analysis against simulation
#
# The event-driven simulator implements the router literally: LRU lists for
# the CS and the filter, a PIT entry per pending download and a constant
# download delay. Here both agree to about a percent on a desk-sized system.

# %%
from cspit import SimConfig, SystemConfig, TrafficKind, ZipfCatalog, replicate, solve
from cspit.sim import summarize

cat = ZipfCatalog(10**4, 0.8, 1e3)
for traffic in (TrafficKind("irm"), TrafficKind("hyper10")):
    for policy in ("lru", "2lru"):
        system = SystemConfig(cat, traffic, 10, None, 0.1, policy)
        ana = solve(system).aggregate
        mean, hw = summarize(replicate(SimConfig(system, total_requests=10**6, seed=1), 3))
        print(f"{traffic.label:8} {policy:5} analysis cs/pit/fwd = "
              + " ".join(f"{x:.4f}" for x in ana)
              + "   simulation = "
              + " ".join(f"{mean[k]:.4f}±{hw[k]:.4f}" for k in ("p_hit_cs", "p_hit_pit", "p_fwd")))
