"""Chain of complete graphs with shrinking necks: lambda_ess = lambda0 = 0."""

# %%
from pathlib import Path

from covspec.graph import ChainOfBlobs
from covspec.isoperimetry import asymptotic_cheeger
from covspec.scenarios import gallery, run_scenario
from covspec.spectral import lambda0_exhaustion, lambda_ess_estimate

chain = ChainOfBlobs(blob_size=4, neck_power=1.0)
print(lambda0_exhaustion(chain, [10, 100, 1000]).history)
print(lambda_ess_estimate(chain, [2, 5, 10]).history)
print(asymptotic_cheeger(chain, [2, 5])["history"])

# %% the gallery entry checks the headline numbers
print(gallery("exa00-chain").to_json()["claims"])

# %% a non-amenable cover of the chain: the harness refuses a verdict
rep = run_scenario(Path(__file__).resolve().parents[1] / "scenarios" / "chain_name.json")
print(rep.outcome, rep.notes)
