"""A small experiment sweep and its summary table.

This is the same code path as ``cadro experiment``: one dataset per
(m, replication) shared by all methods, rows sorted deterministically, and a
summary of mean, 5%/95% quantiles, min and max per (method, m).
"""
from cadro import PipelineConfig, generate_instance
from cadro.harness import ExperimentSpec, run_experiment, summarize

inst = generate_instance(seed=7, n=50, n_x=3)
spec = ExperimentSpec(methods=("cadro", "saa", "tv", "kl", "w", "robust"), m_grid=(25, 100, 400), reps=20)
rows = run_experiment(inst, spec, PipelineConfig(beta=0.01))

print(f"{'method':7s} {'m':>5s} {'mean v_hat':>11s} {'q05':>8s} {'q95':>8s} {'mean v_oos':>11s}")
for s in summarize(rows):
    print(f"{s['method']:7s} {s['m']:5d} {s['v_hat_mean']:11.4f} {s['v_hat_q05']:8.4f} {s['v_hat_q95']:8.4f}"
          f" {s['v_oos_mean']:11.4f}")
