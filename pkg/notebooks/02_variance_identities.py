# %% [markdown]
# # Variance identities by Monte Carlo
#
# Each check estimates both sides of an identity from the same draws and
# reports a paired z-score.  Trial counts here are small so the script runs
# in seconds; the acceptance suite uses a million.

# %%
from eigenchaos.identities import (
    ou_variance_identity_check,
    pdbou_diff_cov,
    pdbou_diff_cov_mc,
    pdbr_analysis,
)
from eigenchaos.partitions import entries_partition
from eigenchaos.seeding import SeedStream

rep = ou_variance_identity_check(2, 1, tau=1.0, trials=50_000, rng=SeedStream(1))
print(f"OU: Var={rep.lhs.mean:.4f}  integral={rep.rhs.mean:.4f}  z={rep.z_score:.2f}")

# %%
# block resampling: the variance against the average of T_k over k
an = pdbr_analysis(3, entries_partition(3), 1, trials=50_000, rng=SeedStream(2))
r = an.identity_report()
print(f"resampling: Var={r.lhs.mean:.4f}  sum T_k/2m={r.rhs.mean:.4f}  z={r.z_score:.2f}")
lad = an.ladder()
for k, e in enumerate(lad.T):
    print(f"T_{k} = {e.mean:.4f} +- {e.std_error:.4f}")
print("ladder violations:", lad.violations())

# %%
# block-difference covariances change sign once the block has rung
p = entries_partition(3)
B = p.index_of(1, 2)
for kb in (0, 1, 2):
    K = [0] * p.m
    K[B] = kb
    mc = pdbou_diff_cov_mc(3, p, 1.0, K, B, 100_000, SeedStream(3, kb))
    print(f"K_B={kb}: mc={mc.lhs.mean:+.4f}  exact={pdbou_diff_cov(1.0, kb):+.4f}")
