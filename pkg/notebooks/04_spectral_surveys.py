# %% [markdown]
# # Spectral surveys
#
# Eigenvalue variance, gap sizes, rigidity and eigenvector sup-norms at
# moderate n.

# %%
from eigenchaos.experiments import ExperimentConfig, run_experiment


def run(kind, **kw):
    return run_experiment(ExperimentConfig(kind=kind, master_seed=9, **kw))


res = run("eigenvalue_variance", n_list=[32, 64, 128], alpha_spec=[1], trials=300)
for row in res.rows:
    print(f"n={row.n}: Var(lam_1) n^(1/3) = {row.estimate.mean:.3f}")

# %%
res = run("spacing_survey", n_list=[64, 128], alpha_spec=[1], trials=300)
for row in res.select(control_name="quantile"):
    print(f"n={row.n} q={row.control_value}: {row.estimate.mean:.3f}")

# %%
res = run("rigidity_survey", n_list=[128], alpha_spec=[1, 0.5], trials=100)
for row in res.rows:
    print(row.alpha, row.control_name, row.control_value, round(row.estimate.mean, 4))

# %%
# sup-norm of eigenvectors times sqrt(n): grows like sqrt(log n)
res = run("delocalization_survey", n_list=[64, 128], alpha_spec=[1], trials=30, params={"q": 9})
for row in res.select(alpha=0):
    print(row.n, row.control_name, row.control_value, round(row.estimate.mean, 3))
