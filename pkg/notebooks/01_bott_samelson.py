# %% [markdown]
# # A Bott-Samelson threefold through its toric degeneration
#
# The eight generators `1, x, y, z, xz, yz, x(xz+y), y(xz+y)` form a
# Khovanskii basis for the valuation given by the 4 x 8 matrix below. The
# weight `w = (1, 1, 1, -2)` degenerates the Groebner basis onto the toric
# ideal of that matrix, so the degree of the threefold is the normalized
# volume of its Newton-Okounkov body.

# %%
import numpy as np

from khovanskii_homotopy import io, lattice
from khovanskii_homotopy.cli import khovanskii_input, tracker_options
from khovanskii_homotopy.homotopies import khovanskii_family, khovanskii_solve

pf = io.load_problem(io.fixture_path("bott_samelson.json"))
A = pf.A
print(np.array(A.rows))

# %% [markdown]
# The columns of `A` without the grading row are the lattice points of the
# body. Their normalized volume predicts the number of solutions.

# %%
pts = [tuple(c[:-1]) for c in np.array(A.rows).T.tolist()]
print("normalized volume:", lattice.normalized_volume(pts))

# %% [markdown]
# Deforming by `w A` gives a family whose fiber at `t = 0` is cut out by
# binomials.

# %%
inp = khovanskii_input(pf, section=io.load_section(io.fixture_path("ex27_section.json")))
family, binomials = khovanskii_family(inp)
for b in binomials[:4]:
    print(b)

# %% [markdown]
# Solve: a polyhedral homotopy on the torus of the special fiber, then a
# coefficient homotopy in `t` up to the threefold.

# %%
res = khovanskii_solve(inp, seed=1, options=tracker_options(pf))
print(res.counts, "complete:", res.complete)
for x, r in zip(res.points, res.residuals):
    print(np.round(x.coords / x.coords[0], 6), f"residual {r:.1e}")
