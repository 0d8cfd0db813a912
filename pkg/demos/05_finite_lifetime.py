# %% [markdown]
# # Contents with finite lifetimes
#
# Each content is popular for an on-period ``T_on`` and silent for
# ``T_off = 9 T_on``, with ``gamma`` new contents per day so that the
# catalogue holds ``K = 10 gamma T_on`` contents. Request density
# ``rho = lambda / gamma`` is the mean number of requests in a content's life.
# At low density 2-LRU's filter rarely sees a content twice before it dies,
# so it admits too little and falls behind plain LRU.

# %%
from cspit import experiments as ex
from cspit import solve

s = ex.preset("fig7")
day = s.traffic[0]
print(f"{'rho':>8} {'LRU':>8} {'2-LRU':>8}")
for rho in (0.1, 1.0, 10.0, 1e3, 1e5, 1e7):
    lru = solve(ex.cell_system(s, day, "lru", rho)).hit_cs
    two = solve(ex.cell_system(s, day, "2lru", rho)).hit_cs
    print(f"{rho:8g} {lru:8.4f} {two:8.4f}")

# %% [markdown]
# Simulating these scenarios is refused: lifetimes of days against 0.1 s
# downloads would need an impractical number of events.

# %%
try:
    ex.scenario_from_dict({"preset": "fig7", "mode": "simulation"})
except ex.ConfigError as exc:
    print(exc)
