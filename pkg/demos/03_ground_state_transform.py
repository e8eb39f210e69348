"""Ground-state transform of a finite weighted graph."""

# %%
import numpy as np

from covspec.graph import VertexMeasureGraph
from covspec.isoperimetry import cheeger_constant
from covspec.renormalize import doob_transform, ground_state, modified_cheeger_check, ratio_identity_check, verify_intertwining
from covspec.spectral import generalized_spectrum

rng = np.random.default_rng(3)
n = 10
edges = [(i, int(rng.integers(i))) for i in range(1, n)] + [(0, 5), (2, 7), (3, 9)]
G = VertexMeasureGraph(n, np.array(edges), rng.uniform(0.5, 2, len(edges)), rng.uniform(0.5, 2, n), rng.uniform(-1, 1, n))

# %%
gs = ground_state(G)
T = doob_transform(G, gs)
print("lambda0 =", gs.lam, "residual", gs.residual)
print("spectrum of G minus lambda0:", np.round(generalized_spectrum(G) - gs.lam, 6))
print("spectrum of transform      :", np.round(generalized_spectrum(T), 6))

# %% intertwining and the modified Cheeger constant
print({k: v for k, v in verify_intertwining(G, gs).items()})
print("ratio identity, worst subset gap:", ratio_identity_check(G, gs))
print("h_phi =", cheeger_constant(G, gs.phi).ratio)
rep = modified_cheeger_check(G, gs)
print(f"lambda1 - lambda0 = {rep['lhs']:.4f} >= h^2/2D = {rep['rhs']:.4f}: {rep['pass']}")
