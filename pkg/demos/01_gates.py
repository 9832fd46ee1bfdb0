# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # Gate evaluators against Monte Carlo
#
# Every gate works on hourly failure curves `P(t)`, `t = 1..24`.  Here we
# evaluate the closed forms for a few inputs and hold each one against a
# brute-force sampler of exponential failure times.

# %%
import numpy as np

from cascadenet.gates import (
    FailureCurve,
    eval_and,
    eval_or,
    eval_pand_numeric,
    eval_voting,
    eval_wsp,
    eval_wsp_fold,
    pand_analytic,
    wsp_spare_cdf,
)
from cascadenet.oracle import mc_gate, mc_spare_marginal, mc_wsp_multi

a, b = FailureCurve.exponential(0.003), FailureCurve.exponential(0.007)

# %% [markdown]
# ## AND, OR, PAND
#
# A generator (0.003/h) behind a line (0.007/h).

# %%
for name, closed in [("and", eval_and(a, b).final), ("or", eval_or(a, b).final),
                     ("pand", eval_pand_numeric(0.003, 0.007).final)]:
    est = mc_gate(name, [0.003, 0.007], n=10**6, seed=1)
    print(f"{name:4s} closed={closed:.6f}  mc={est.probability:.6f} +/- {est.std_error:.1e}")
print("pand analytic", pand_analytic(0.003, 0.007, 24.0))

# %% [markdown]
# ## Warm spare
#
# The gate output multiplies the primary and spare marginals.  The spare
# marginal is exact; the product ignores the dependence between the two, so
# the joint Monte Carlo value sits higher.

# %%
fb = float(wsp_spare_cdf(0.005, 0.008, 0.5, 24.0))
print("spare marginal", fb, mc_spare_marginal(0.005, 0.008, 0.5, n=10**6, seed=2).probability)
print("gate output   ", eval_wsp(0.005, 0.008, 0.5).final,
      mc_gate("wsp", [0.005, 0.008], alpha=0.5, n=10**6, seed=3).probability)

# %% [markdown]
# On the singular locus `rate_primary == (1 - alpha) * rate_spare` the
# general expression divides by zero.  The limit is used there, and the
# values just off the locus agree with it.

# %%
for off in (-1e-7, 0.0, 1e-7):
    print(off, float(wsp_spare_cdf(0.005 + off, 0.01, 0.5, 24.0)))

# %% [markdown]
# Several spares are folded pairwise through effective rates.  Against
# sequential activation the absolute error stays well under 0.02, though
# the relative error is large at these small probabilities.

# %%
curves = [FailureCurve.exponential(r) for r in (0.005, 0.008, 0.008)]
print("fold", eval_wsp_fold(curves, 0.5).final,
      "mc", mc_wsp_multi(0.005, [0.008, 0.008], 0.5, n=10**6, seed=4).probability)

# %% [markdown]
# ## Voting
#
# Two of three failed, each with probability one half.

# %%
print(eval_voting([0.5, 0.5, 0.5], 2))
print(np.round([eval_voting([0.1, 0.2, 0.3], k) for k in (1, 2, 3)], 4))
