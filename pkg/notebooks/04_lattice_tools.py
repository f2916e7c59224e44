# %% [markdown]
# # Exact lattice tools
#
# Integer normal forms, kernels and volumes are computed with Python integers
# and fractions, never floats.

# %%
from khovanskii_homotopy import lattice

M = [[2, 4, 4], [-6, 6, 12], [10, -4, -16]]
H, U = lattice.hnf(M)
D, P, Q = lattice.snf(M)
print("HNF", H)
print("SNF diagonal", [D[i][i] for i in range(3)])

# %% [markdown]
# The kernel of a grading row, reduced by LLL, and the finite group of a
# non-saturated lattice.

# %%
print(lattice.kernel_basis([[1, 1, 2, 3]]))
K = [[2, 0, 0], [0, 3, 0]]
print("index", lattice.lattice_index(K), "group size", len(lattice.component_group(K, 3)))

# %% [markdown]
# A regular subdivision from a random lifting, and the normalized volume it
# certifies.

# %%
import numpy as np

pts = [(0, 0), (1, 0), (0, 1), (2, 1), (1, 2)]
sub = lattice.regular_subdivision(pts, lattice.random_lifting(len(pts), np.random.default_rng(0)))
print(sub.cells, lattice.normalized_volume(pts))
