"""Closed-form constants, Poincare series and the surface S_alpha."""

# %%
import numpy as np

from covspec.hyperbolic import (
    MoebiusGenerator,
    RevolutionSurface,
    critical_exponent_estimate,
    free_product_example,
    gefin_predict,
    poincare_series,
    salpha_solver,
    space_constants,
    sullivan_lambda0,
)

for fam, n in [("R", 2), ("R", 3), ("C", 2), ("H", 1), ("O", 2)]:
    print(space_constants(fam, n).to_json())

# %% Sullivan's formula for real hyperbolic 3-manifolds
for delta in (0.0, 0.5, 1.0, 1.5, 2.0):
    print(f"delta = {delta}: lambda0 = {sullivan_lambda0(delta, 3)}")

# %% z -> 4z: the orbit sum at s = 1 is a geometric series with limit 5/3
ps = poincare_series([MoebiusGenerator(np.diag([2.0, 0.5]))], 1.0, max_word_len=40)
print("partial sum", ps.partial_sum, "first layers", ps.layer_sums[:4])

# %% free products of two hyperbolic elements: delta shrinks as translation length grows
for ell in (4, 6, 8):
    print(ell, critical_exponent_estimate(free_product_example(ell), max_word_len=10))

# %%
print(gefin_predict(0.84, space_constants("R", 3), "EvidenceNonamenable"))

# %% finite volume, lambda0 = 0 and a bottom of the essential spectrum at 0
out = salpha_solver(RevolutionSurface(alpha=0.5))
print("volume", out["volume"], "lambda0", out["lambda0"])
print("tail", out["tail"])
print("refinement", out["refinement"])
