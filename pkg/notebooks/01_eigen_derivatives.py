# %% [markdown]
# # Eigenvalue derivatives and overlaps
#
# The gradient of a simple eigenvalue is the rank one projector v v^T and
# the Hessian involves the reduced resolvent.  Both are compared with
# finite differences here, and the overlap between two matrices is computed.

# %%
import numpy as np

from eigenchaos.matrix_core import eigh, eigvals_desc, sample_goe
from eigenchaos.spectral import eig_grad, eig_hess_tensor, overlap_sq, spacing_stats

X = sample_goe(6, 1)
spec = eigh(X)
spec.eigenvalues

# %%
# derivative of lam_2 along the symmetric direction e_1 e_3^T + e_3 e_1^T
E = np.zeros((6, 6))
E[0, 2] = E[2, 0] = 1.0
h = 1e-6
fd = (eigvals_desc(X + h * E)[1] - eigvals_desc(X - h * E)[1]) / (2 * h)
g = eig_grad(spec, 2)
print(f"finite difference {fd:.10f}  exact {g[0, 2] + g[2, 0]:.10f}")

# %%
# second derivative along a random direction
D = sample_goe(6, 2)
h = 1e-4
fd2 = (eigvals_desc(X + h * D)[1] - 2 * spec.value(2) + eigvals_desc(X - h * D)[1]) / h ** 2
exact2 = np.einsum("ij,ab,ijab->", D, D, eig_hess_tensor(spec, 2))
print(f"second difference {fd2:.6f}  exact {exact2:.6f}")

# %%
# overlaps: 1 for identical matrices, about 1/n for independent ones
Y = sample_goe(6, 3)
print(overlap_sq(X, X.copy(), 1), overlap_sq(X, Y, 1))
st = spacing_stats(spec, 1)
print(f"gap {st.Delta_alpha:.4f}  inverse spacing sum {st.S_alpha:.4f}  max entry {st.M:.4f}")

# %%
# the bundled oracle gate
from eigenchaos.oracles import oracle_suite

print(oracle_suite(seed=0, draws=20).summary())
