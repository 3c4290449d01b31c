# %% [markdown]
# # Decorrelation curves
#
# Overlap of the top eigenvector before and after a perturbation, against
# the rescaled control variable.  Curves for different n should collapse.

# %%
from eigenchaos.dynamics import pdbou_time_cap
from eigenchaos.experiments import ExperimentConfig, run_experiment

cfg = ExperimentConfig(kind="ou_decorrelation", n_list=[32, 64], alpha_spec=[1], trials=100,
                       master_seed=5, params={"u_list": [0.0, 0.5, 1.0, 2.0, 3.0]})
res = run_experiment(cfg)
for n in cfg.n_list:
    curve = res.curve(n, 1, "u")
    print(n, " ".join(f"{u:g}:{e.mean:.3f}" for u, e in sorted(curve.items())))
print("skipped:", res.metadata["skipped"])

# %%
# resampling k of the m blocks, with the independent-pair baseline
cfg = ExperimentConfig(kind="resampling_decorrelation", n_list=[32], alpha_spec=[1], trials=100,
                       master_seed=5, params={"k_list": [0, 50, 200, 528]})
res = run_experiment(cfg)
print(res.to_csv())

# %%
# the Poisson-clocked process has a time cap
for tau in (0.05, 1.0, 10.0):
    print(f"tau={tau:5}: eta t <= {pdbou_time_cap(1.0, tau):.4f}")
