"""Derive the Groebner basis of the cubics-through-four-points example.

Dev-time helper (needs sympy); writes the fixture consumed at runtime.
The kernel of x_i -> b_i s^{a_i} is found degree by degree with exact
linear algebra, then reduced to a Groebner basis under the weight order
induced by -wA, ties broken by grevlex.
"""
import itertools
import json
import sys
from pathlib import Path

import flint
import sympy as sp
from sympy.polys.orderings import MonomialOrder, grevlex

x, y = sp.symbols("x y")
B = [
    x*y - y**2 + x - y,
    x**2 - y**2 + 4*x - 4*y,
    y**3 - 6*y**2 + 5*y + 12,
    x*y**2 - 6*y**2 - x + 6*y + 12,
    x**2*y - 6*y**2 - 4*x + 9*y + 12,
    x**3 - 6*y**2 - 13*x + 18*y + 12,
    x*y**3 - y**4 + 10*x**2*y - 26*x*y**2 + 16*y**3 + 10*x**2 - 15*x*y + 5*y**2 + 12*x - 12*y,
    10*x**4*y - 49*x**3*y**2 + 89*x**2*y**3 - 71*x*y**4 + 21*y**5 + 10*x**4 - 18*x**3*y
    - 18*x**2*y**2 + 50*x*y**3 - 24*y**4 + 31*x**3 - 83*x**2*y + 73*x*y**2 - 21*y**3
    + 24*x**2 - 48*x*y + 24*y**2,
]
A = [[1, 2, 0, 1, 2, 3, 1, 4], [1, 0, 3, 2, 1, 0, 3, 1], [1, 1, 1, 1, 1, 1, 2, 3]]
GRADING = A[-1]
W = (-6, -5, 0)
WA = [sum(W[r] * A[r][j] for r in range(3)) for j in range(8)]
X = sp.symbols("x0:8")
MAXDEG = int(sys.argv[1]) if len(sys.argv) > 1 else 6


def monomials(deg):
    out = []
    for e in itertools.product(*(range(deg // a + 1) for a in GRADING)):
        if sum(a * k for a, k in zip(GRADING, e)) == deg:
            out.append(e)
    return out


bpolys = [sp.Poly(b, x, y) for b in B]


def image(e):
    p = sp.Poly(1, x, y)
    for b, k in zip(bpolys, e):
        if k:
            p = p * b**k
    return p


def _pivots(R, nrows, ncols):
    piv = []
    for i in range(nrows):
        j = next((j for j in range(ncols) if R[i, j] != 0), None)
        if j is None:
            break
        piv.append(j)
    return piv


gens = []
for deg in range(2, MAXDEG + 1):
    mons = monomials(deg)
    imgs = [image(e).as_dict() for e in mons]
    keys = sorted({k for d in imgs for k in d})
    M = flint.fmpz_mat([[int(imgs[j].get(k, 0)) for j in range(len(mons))] for k in keys])
    X_, nullity = M.nullspace()
    ker = [[X_[i, c] for i in range(len(mons))] for c in range(nullity)]
    # span of the ideal generated by lower-degree generators, in this degree
    idx = {e: i for i, e in enumerate(mons)}
    old = []
    for g in gens:
        gd = sum(a * k for a, k in zip(GRADING, next(iter(g))))
        for e in monomials(deg - gd) if deg > gd else []:
            v = [0] * len(mons)
            for m, c in g.items():
                v[idx[tuple(a + b for a, b in zip(m, e))]] += c
            old.append(v)
    cols = old + ker
    C = flint.fmpq_mat(len(mons), len(cols), [int(cols[j][i]) for i in range(len(mons)) for j in range(len(cols))])
    R, rk = C.rref()
    new = 0
    for j in _pivots(R, rk, len(cols)):
        if j >= len(old):
            k = ker[j - len(old)]
            gens.append({mons[i]: sp.Integer(int(k[i])) for i in range(len(mons)) if k[i] != 0})
            new += 1
    print(f"degree {deg}: kernel dim {nullity}, new generators {new}", file=sys.stderr)


class WeightOrder(MonomialOrder):
    alias = "wA"
    is_global = True

    def __call__(self, m):
        return (-sum(w * k for w, k in zip(WA, m)), grevlex(m))


polys = [sum(c * sp.prod([v**k for v, k in zip(X, m)]) for m, c in g.items()) for g in gens]
G = sp.groebner(polys, *X, order=WeightOrder(), domain=sp.QQ)
print(f"groebner basis size {len(G.exprs)}", file=sys.stderr)


def terms(expr, gens):
    p = sp.Poly(expr, *gens)
    return [{"coeff": [float(c), 0.0], "exponent": [int(v) for v in m]} for m, c in p.terms()]


def graph_relation(j):
    """A form h_j of degree a_j in b_0..b_5 with b_j = h_j(b_0, ..., b_5)."""
    deg = GRADING[j]
    mons = [e for e in itertools.product(range(deg + 1), repeat=6) if sum(e) == deg]
    imgs = [image(tuple(e) + (0, 0)).as_dict() for e in mons]
    target = bpolys[j].as_dict()
    keys = sorted({k for d in imgs for k in d} | set(target))
    M = sp.Matrix(len(keys), len(mons), lambda r, c: imgs[c].get(keys[r], 0))
    rhs = sp.Matrix([target.get(k, 0) for k in keys])
    sol, params = M.gauss_jordan_solve(rhs)
    sol = sol.subs({t: 0 for t in params})
    Y = sp.symbols("x0:6")
    return sum(sol[i] * sp.prod([v**k for v, k in zip(Y, mons[i])]) for i in range(len(mons))), Y


relations = []
for j in (6, 7):
    h, Y = graph_relation(j)
    relations.append({"index": j, "polynomial": terms(h, Y)})

fixture = {
    "format_version": 1,
    "name": "cubics through four points",
    "mode": "weighted",
    "variables": [f"x{i}" for i in range(8)],
    "grading": GRADING,
    "valuation_matrix": A,
    "weight": list(W),
    "groebner_basis": [terms(g, X) for g in G.exprs],
    "graph_relations": relations,
    "section": "random",
    "seed": 20240611,
    "notes": {
        "space": "cubics in x, y vanishing at (4,4), (-3,-1), (-1,-1), (3,3)",
        **{f"b{i}": str(b.expand()) for i, b in enumerate(B)},
        "groebner_order": "weight -wA refined by grevlex, wA = " + str(WA),
    },
}
Path(sys.argv[2]).write_text(json.dumps(fixture, indent=1) + "\n")
