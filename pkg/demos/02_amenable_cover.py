"""Amenable coverings keep the bottom of the spectrum."""

# %%
import numpy as np

from covspec.amenability import amenability_verdict
from covspec.covering import CoveringGraph, ZdAction, brooks_cutoff, cyclic_action, lift_function
from covspec.graph import build_graph, cycle_graph, rayleigh_quotient
from covspec.renormalize import ground_state, lifted_phi_cheeger_trend
from covspec.spectral import lambda0_finite

# %% finite cyclic covers of a triangle with a random potential
rng = np.random.default_rng(0)
base = cycle_graph(3, potential=rng.uniform(-1, 1, 3))
lam = lambda0_finite(base).value
for k in (1, 2, 5, 10):
    cov = CoveringGraph(base, cyclic_action(k), {2: "a"})
    print(f"C_{3 * k:<2d} -> C_3   difference {lambda0_finite(cov.total).value - lam:+.2e}")

# %% a loop with a potential well, unfolded to the integer line
loop = build_graph({"vertices": 1, "edges": [[0, 0, 1.0]], "potential": [-1.0]})
line = CoveringGraph(loop, ZdAction(), ["a"])
verdict = amenability_verdict(ZdAction(), eps=0.005)
F = verdict.certificate.subset
print(verdict.status, "Folner interval of length", len(F), "ratio", verdict.certificate.ratio)

# %% Brooks cutoff times the lifted ground state is an explicit test function
gs = ground_state(loop)
for rho in (2, 5, 20):
    chi = brooks_cutoff(line, [(0, y) for y in F], rho)
    phi = lift_function(line, gs.phi, window=[v[1] for v in chi])
    f = {v: chi[v] * phi[v] for v in chi}
    print(f"rho = {rho:2d}   Rayleigh {rayleigh_quotient(line.total, f):.6f}   lambda0(base) {gs.lam:.6f}")

# %% the phi-modified Cheeger ratios of balls decay
print(lifted_phi_cheeger_trend(line, gs, [5, 10, 20, 40]))
