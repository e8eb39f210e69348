"""Bouquet of two loops and its covering tree: a strict spectral gap."""

# %%
import math

from covspec.amenability import amenability_verdict
from covspec.covering import CoveringGraph, FreeGroupAction
from covspec.graph import bouquet
from covspec.renormalize import ground_state, tree_cheeger_lower_bound, tree_supersolution_bound
from covspec.spectral import lambda0_exhaustion

base = bouquet(2)
cover = CoveringGraph(base, FreeGroupAction(), ["a", "b"])
print("universal cover:", cover.is_universal)

# %% the base is a single vertex, so its bottom of spectrum is 0
gs = ground_state(base)
print("lambda0(base) =", gs.lam)

# %% Dirichlet balls of the 4-regular tree give upper bounds
est = lambda0_exhaustion(cover.total, [5, 10, 20, 40, 80])
for r, v in est.history:
    print(f"r = {r:3d}   lambda0(B_r) = {v:.6f}")
print("limit 4 - 2 sqrt(3) =", 4 - 2 * math.sqrt(3))

# %% two certified lower bounds
print("Cheeger route      :", tree_cheeger_lower_bound(cover, gs))
print("supersolution route:", tree_supersolution_bound(cover))

# %% the monodromy action is the regular action of F2: no Folner sets, rho well below 1
v = amenability_verdict(FreeGroupAction(), eps=0.2, budget={"max_radius": 8})
print(v.status, "rho >=", round(v.rho_lower, 4), "best Folner ratio", v.search_log[-1])
