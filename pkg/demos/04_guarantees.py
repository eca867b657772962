"""Checking the two promises empirically: coverage and consistency.

Coverage: over many datasets, the certified estimate should fall below the
true cost of the returned decision at most a beta fraction of the time.
Consistency: as m grows, the estimate should approach the best achievable
cost under the true distribution.
"""
import numpy as np

from cadro import FacilityModel, PipelineConfig, cadro_run, generate_instance, sample_dataset
from cadro.core import RngStream
from cadro.harness import coverage_audit
from cadro.solver import minimize_expected

small = generate_instance(seed=7, n=10, n_x=2)
report = coverage_audit(small, m=50, reps=200, cfg=PipelineConfig(beta=0.1))
print("coverage audit (beta=0.1, m=50, 200 datasets)")
for key in ("violation_fraction", "membership_fraction", "implication_failures", "sandwich_failures", "threshold"):
    print(f"  {key:22s} {report[key]}")

inst = generate_instance(seed=7, n=50, n_x=3)
model = FacilityModel(inst)
_, v_star = minimize_expected(model, inst.p_star)
print(f"\nconsistency (V* = {v_star:.4f})")
for m in (100, 1000, 10000):
    est = [cadro_run(sample_dataset(inst.p_star, m, RngStream(s, m).generator()), model, PipelineConfig()).v_hat
           for s in range(10)]
    print(f"  m={m:6d}: median estimate {np.median(est):.4f}, median gap {np.median(np.abs(np.array(est) - v_star)):.4f}")
