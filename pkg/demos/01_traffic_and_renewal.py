# %% [markdown]
# # Request streams and the renewal function
#
# Every content is requested by its own renewal process. The three families
# used throughout are Poisson (IRM), the two-phase hyper-exponential
# "hyper-z" law and the interrupted Poisson process (IPP), which is itself a
# two-phase hyper-exponential in disguise.

# %%
import numpy as np

from cspit.renewal import fit_residual, renewal_function, residual_moments
from cspit.traffic import RenewalSpec, ipp_interarrival_moments, ipp_to_hyper2

lam = 2.0
for spec in (RenewalSpec.poisson(lam), RenewalSpec.hyperz(lam, 10)):
    print(spec.variant, "weights", np.round(spec.weights, 4), "rates", spec.rates,
          "scv", round(spec.moment(2) * lam**2 - 1, 3))

# %% [markdown]
# Burstier traffic means more requests right after a request: the renewal
# function of hyper10 rises faster than the Poisson line at short lags.

# %%
for t in (0.01, 0.1, 1.0, 10.0):
    print(f"t={t:5}: poisson m={renewal_function(RenewalSpec.poisson(lam), t):7.3f}  "
          f"hyper10 m={renewal_function(RenewalSpec.hyperz(lam, 10), t):7.3f}")

# %% [markdown]
# ## IPP as H2
# Intervals between requests of an on/off modulated Poisson source are H2.
# The moments below come from the two-state chain, independently of the H2 map.

# %%
nu, t_on, t_off = 10.0, 1.0, 9.0
h2 = ipp_to_hyper2(nu, t_on, t_off)
print("H2 moments", h2.moment(1), h2.moment(2))
print("chain     ", *ipp_interarrival_moments(nu, t_on, t_off))

# %% [markdown]
# ## Residual download time
# ``R`` is the time a request waits for the download it triggered or joined.
# Its first two moments feed a phase-type fit.

# %%
d = 0.1
for spec in (RenewalSpec.poisson(20.0), RenewalSpec.hyperz(20.0, 10)):
    m1, m2 = residual_moments(spec, d, 1), residual_moments(spec, d, 2)
    fit = fit_residual(m1, m2)
    print(spec.variant, f"E[R]={m1:.4f}  scv={fit.scv:.3f}  fitted family={fit.family}")
