"""One dataset, every method, on a bike-stall placement instance.

Stalls must be placed inside three boxes; a user near point k walks to the
farthest stall, so that distance is the cost of outcome k. Demand is drawn
from a hidden distribution p_star. Each method returns a decision and a
certified cost estimate; since we know p_star here, we can also report the
true expected cost of each decision.
"""
import numpy as np

from cadro import FacilityModel, Method, PipelineConfig, generate_instance, sample_dataset
from cadro.core import RngStream, expected_cost
from cadro.pipeline import run_method, tau, train_direction
from cadro.solver import minimize_expected

inst = generate_instance(seed=7, n=50, n_x=3)
model = FacilityModel(inst)
_, v_star = minimize_expected(model, inst.p_star)
print(f"{inst.n} points, {inst.n_x} stalls; best achievable cost with p_star known: {v_star:.4f}\n")

m = 100
data = sample_dataset(inst.p_star, m, RngStream(0, m).generator())
cfg = PipelineConfig(beta=0.01)
print(f"sample size m={m}: first {tau(m)} samples train a decision, the rest certify it\n")

tr = train_direction(data, model, cfg)
print(f"training decision x_bar = {np.round(tr.x_bar, 2)}")
print(f"calibrated bound alpha along L(x_bar): {tr.alpha:.4f}\n")

print(f"{'method':8s} {'estimate':>9s} {'true cost':>10s}")
for meth in Method:
    res = run_method(data, model, PipelineConfig(beta=0.01, method=meth), cost=inst.transport_costs())
    print(f"{meth.value:8s} {res.v_hat:9.4f} {expected_cost(res.x_hat, inst.p_star, model):10.4f}")
print("\nEvery estimate is meant to upper-bound its true cost with probability >= 0.99.")
