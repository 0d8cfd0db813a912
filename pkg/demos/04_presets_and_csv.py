# %% [markdown]
# # Figure presets, sweeps and CSV output
#
# The same workflow is available from the shell as
# ``cspit sweep --preset fig3 --out fig3.csv``.

# %%
import tempfile
from pathlib import Path

from cspit import experiments as ex

s = ex.preset("fig3")
print(s.swept_parameter, s.sweep_values)
rows = ex.run_scenario(s)
out = Path(tempfile.mkdtemp()) / "fig3.csv"
ex.emit_csv(rows, out)
print(out.read_text().splitlines()[:4])

# %% [markdown]
# Two-column files for gnuplot, one per curve and metric:

# %%
files = ex.emit_curves(rows, out.parent / "curves")
print(len(files), "curve files, e.g.", files[0].name)
print(files[0].read_text())

# %% [markdown]
# ## Custom configurations
# Config files are JSON; unset fields take the default operating point and times
# accept ``ms``, ``s`` and ``day`` suffixes.

# %%
cfg = ex.scenario_from_dict({
    "name": "small-both",
    "catalogue_size": 10000, "cache_ratio": 0.001, "request_rate": 1000,
    "traffic": ["irm"], "policies": ["lru"], "mode": "both",
    "sweep": {"parameter": "download_delay", "values": ["10ms", "100ms"]},
    "simulation": {"requests": 1000000, "seed": 3},
})
for r in ex.run_scenario(cfg):
    print(r.source, r.param_value, r.p_hit_cs, r.p_hit_pit, r.p_fwd, r.half_width)
