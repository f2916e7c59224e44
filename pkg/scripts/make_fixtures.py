"""Write the small bundled problem files and the failure-path test inputs.

Dev-time helper (needs sympy for parsing). The cubics-through-four-points
fixture has its own script, derive_quartic_points_fixture.py.
"""
import json
from pathlib import Path

import sympy as sp

ROOT = Path(__file__).resolve().parents[1]
FIX = ROOT / "src" / "khovanskii_homotopy" / "fixtures"
DATA = ROOT / "tests" / "data"

X8 = sp.symbols("x0:8")

# Groebner basis of the Bott-Samelson variety at t = 1
BOTT_SAMELSON = [
    "x1*x3 - x0*x4",
    "x2*x3 - x0*x5",
    "x1*x2 - x0*x6 + x1*x4",
    "x2**2 - x0*x7 + x3*x6 - x4**2",
    "x2*x6 - x1*x7",
    "x2*x5 - x3*x7 + x4*x5",
    "x1*x5 - x3*x6 + x4**2",
    "x2*x4 - x1*x5",
    "x5*x6 - x4*x7",
    "x0*x6**2 - x1**2*x7 - x1*x4*x6",
    "x0*x5**2 - x3**2*x7 + x3*x4*x5",
    "x0*x4*x5 - x3**2*x6 + x3*x4**2",
    "x3*x6**2 - x1*x4*x7 - x4**2*x6",
]
BS_A = [
    [0, 1, 0, 0, 1, 0, 1, 0],
    [0, 0, 1, 0, 0, 1, 1, 2],
    [0, 0, 0, 1, 1, 1, 0, 0],
    [1, 1, 1, 1, 1, 1, 1, 1],
]
EX27_C = [
    [1, 1, 1, 1, 1, 1, 1, 1],
    [1, -2, 3, -4, 5, -6, 7, -8],
    [2, 3, 5, 7, 11, 13, 17, 19],
]


def terms(expr, gens):
    p = sp.Poly(sp.sympify(expr, locals={str(g): g for g in gens}), *gens)
    return [{"coeff": [float(c), 0.0], "exponent": [int(v) for v in m]} for m, c in p.terms()]


def family_terms(expr, gens, t):
    p = sp.Poly(sp.expand(expr), *gens, t)
    return [
        {"coeff": [float(c), 0.0], "exponent": [int(v) for v in m[:-1]], "t_power": int(m[-1])}
        for m, c in p.terms()
    ]


def write(path, obj):
    path.write_text(json.dumps(obj, indent=1) + "\n")


def bott_samelson(gens=BOTT_SAMELSON, weight=(1, 1, 1, -2), name="Bott-Samelson threefold"):
    return {
        "format_version": 1,
        "name": name,
        "mode": "khovanskii",
        "variables": ["1", "x", "y", "z", "xz", "yz", "x(xz+y)", "y(xz+y)"],
        "grading": [1] * 8,
        "valuation_matrix": BS_A,
        "weight": list(weight),
        "groebner_basis": [terms(g, X8) for g in gens],
        "section": [[[float(v), 0.0] for v in row] for row in EX27_C],
        "seed": 20240607,
    }


def quasi_symmetry():
    names = ["p12", "p23", "p31", "p21", "p32", "p13"]
    p12, p23, p31, p21, p32, p13 = P = sp.symbols(names)
    t = sp.Symbol("t")
    expr = (1 + t + t**2) * (p12 * p23 * p31 - p21 * p32 * p13) + t * (
        p12 * p23 * p13 + p12 * p32 * p31 + p21 * p23 * p31 - p12 * p32 * p13 - p21 * p23 * p13 - p21 * p32 * p31
    )
    return {
        "format_version": 1,
        "name": "quasi-symmetry cubic of the 3-cycle",
        "mode": "toric_family",
        "variables": names,
        "family": [family_terms(expr, P, t)],
        "section": "random",
        "seed": 20240609,
    }


def simplex():
    return {
        "format_version": 1,
        "name": "projective plane",
        "mode": "khovanskii",
        "variables": ["x0", "x1", "x2"],
        "grading": [1, 1, 1],
        "valuation_matrix": [[0, 1, 0], [0, 0, 1], [1, 1, 1]],
        "weight": [0, 0, 0],
        "groebner_basis": [],
        "section": "random",
        "seed": 1,
    }


def main():
    bs = bott_samelson()
    random_bs = dict(bs, section="random")
    write(FIX / "bott_samelson.json", random_bs)
    write(FIX / "ex27_section.json", {"format_version": 1, "section": bs["section"]})
    write(FIX / "quasi_symmetry.json", quasi_symmetry())
    write(FIX / "simplex.json", simplex())

    write(DATA / "wrong_weight.json", bott_samelson(weight=(0, 0, 0, 1), name="wrong weight"))
    write(DATA / "rank_deficient.json", bott_samelson(gens=BOTT_SAMELSON[:2] + BOTT_SAMELSON[7:8], name="rank deficient"))
    x = sp.symbols("x0:4")
    write(
        DATA / "non_binomial.json",
        {
            "format_version": 1,
            "name": "trinomial special fiber",
            "mode": "toric_family",
            "variables": ["x0", "x1", "x2", "x3"],
            "family": [[{**tm, "t_power": 0} for tm in terms("x0*x3 - x1*x2 + x1*x3", x)]],
            "section": "random",
            "seed": 3,
        },
    )


if __name__ == "__main__":
    main()
