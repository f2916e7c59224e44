"""Acceptance criteria 1-6, one group of tests per criterion.

Run with ``pytest tests/test_acceptance.py``; the terminal summary prints one
PASS/FAIL line per criterion.
"""
import time
from pathlib import Path

import flint
import numpy as np
import pytest
import sympy as sp

from conftest import BS_FINAL, BS_SPARSE, set_distance
from oracles import line_cubic_points, solve_plane_pair
from khovanskii_homotopy import io, lattice
from khovanskii_homotopy.cli import khovanskii_input, main, run_problem, tracker_options
from khovanskii_homotopy.homotopies import (
    WitnessSet,
    khovanskii_solve,
    polyhedral_solve,
    random_section,
    witness_move,
)
from khovanskii_homotopy.poly import evaluate
from khovanskii_homotopy.toric import ProjectivePoint, solve_binomial_torus

DATA = Path(__file__).parent / "data"
BS = str(io.fixture_path("bott_samelson.json"))
C_SECTION = str(io.fixture_path("ex27_section.json"))
QP = str(io.fixture_path("quartic_points.json"))
QS = str(io.fixture_path("quasi_symmetry.json"))
BASE_POINTS = [(4, 4), (-3, -1), (-1, -1), (3, 3)]

C1 = "Bott-Samelson regression"
C2 = "weighted regression"
C3 = "volume/root-count consistency"
C4 = "quasi-symmetry family"
C5 = "property suites"
C6 = "failure-path contracts"


def single_thread(pf):
    return tracker_options(pf, threads=1)


# shared runs --------------------------------------------------------------

@pytest.fixture(scope="module")
def bs_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("bs") / "solutions.json"
    t0 = time.perf_counter()
    code = main(["solve", BS, "--section", C_SECTION, "--threads", "1", "-o", str(out)])
    elapsed = time.perf_counter() - t0
    pf = io.load_problem(BS)
    result = run_problem(pf, seed=pf.seed, section=io.load_section(C_SECTION), options=single_thread(pf))
    return code, io.read_solutions(out), result, elapsed


@pytest.fixture(scope="module")
def qp_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("qp") / "solutions.json"
    t0 = time.perf_counter()
    code = main(["solve", QP, "--threads", "1", "-o", str(out)])
    elapsed = time.perf_counter() - t0
    return code, io.read_solutions(out), elapsed


# 1 ------------------------------------------------------------------------

@pytest.mark.criterion(1, C1)
def test_bott_samelson_count_and_runtime(bs_run):
    code, sol, _, elapsed = bs_run
    assert code == 0
    assert len(sol.solutions) == 6
    assert elapsed < 10.0


@pytest.mark.criterion(1, C1)
def test_bott_samelson_sparse_start(bs_run):
    _, _, result, _ = bs_run
    starts = [z for comp in result.sparse_starts for z in comp]
    assert len(starts) == 6
    assert min(np.abs(z - BS_SPARSE).max() for z in starts) <= 1e-3


@pytest.mark.criterion(1, C1)
def test_bott_samelson_final_point(bs_run):
    _, sol, _, _ = bs_run
    pts = [x / x[0] for x in sol.points()]
    assert min(np.abs(x - BS_FINAL).max() for x in pts) <= 1e-3


# 2 ------------------------------------------------------------------------

def lift(pf, v):
    n = len(v)
    return np.concatenate([v, [evaluate(pf.graph_relations[j], v) for j in range(n, pf.A.ncols)]])


def relative_residual(f, x):
    terms = f.coefficients() * np.prod(x[None, :] ** f.exponents(), axis=1)
    return abs(terms.sum()) / max(np.abs(terms).sum(), 1e-300)


def quartic_oracle(L):
    """Intersect the two cubics l_i(b(x, y)) = 0 and drop the base points."""
    x, y = sp.symbols("x y")
    pf = io.load_problem(QP)
    B = [sp.sympify(pf.raw["notes"][f"b{j}"]) for j in range(6)]
    polys = []
    for row in np.asarray(L):
        acc = {}
        for c, b in zip(row, B):
            for (i, j), v in sp.Poly(b, x, y).terms():
                acc[(i, j)] = acc.get((i, j), 0) + complex(c) * int(v)
        polys.append(acc)
    sols = solve_plane_pair(polys[0], polys[1], torus=False)
    keep = [s for s in sols if min(abs(s[0] - a) + abs(s[1] - b) for a, b in BASE_POINTS) > 1e-6]
    fns = [sp.lambdify((x, y), b, "numpy") for b in B]
    return [ProjectivePoint([f(*s) for f in fns]) for s in keep]


@pytest.mark.criterion(2, C2)
def test_weighted_counts_and_runtime(qp_run):
    code, sol, elapsed = qp_run
    assert code == 0
    assert sol.metadata["counts"]["pre_projection"] == 30
    assert len(sol.solutions) == 5
    assert all(len(x) == 6 for x in sol.points())
    assert elapsed < 60.0


@pytest.mark.criterion(2, C2)
def test_weighted_residuals_through_graph_relations(qp_run):
    _, sol, _ = qp_run
    pf = io.load_problem(QP)
    L = io._complex_array(sol.metadata["section"])
    for v in sol.points():
        full = lift(pf, v)
        assert max(relative_residual(g, full) for g in pf.groebner) <= 1e-9
        assert np.abs(L @ v).max() / (np.abs(L) @ np.abs(v)).max() <= 1e-9


@pytest.mark.criterion(2, C2)
def test_weighted_multiplicity_accounting(qp_run):
    _, sol, _ = qp_run
    meta = sol.metadata
    assert meta["cover_degree"] == 6
    assert meta["counts"]["pre_projection"] * meta["component_count"] == 30 == meta["multiplicity"] * len(sol.solutions)


@pytest.mark.criterion(2, C2)
def test_weighted_matches_plane_cubic_oracle(qp_run):
    _, sol, _ = qp_run
    oracle = quartic_oracle(io._complex_array(sol.metadata["section"]))
    assert len(oracle) == 5
    assert set_distance([ProjectivePoint(v) for v in sol.points()], oracle) <= 1e-7


# 3 ------------------------------------------------------------------------

@pytest.mark.criterion(3, C3)
@pytest.mark.parametrize("which", ["bs", "qp"])
def test_volume_matches_solution_counts(which, capsys, request):
    if which == "bs":
        path, expected, count = BS, 6, len(request.getfixturevalue("bs_run")[1].solutions)
    else:
        path, expected, count = QP, 5, len(request.getfixturevalue("qp_run")[1].solutions)
    capsys.readouterr()
    assert main(["volume", path]) == 0
    out = capsys.readouterr().out
    assert f"normalized volume: {expected}\n" in out
    assert count == expected


# 4 ------------------------------------------------------------------------

@pytest.mark.criterion(4, C4)
def test_quasi_symmetry_family(tmp_path):
    out = tmp_path / "qs.json"
    assert main(["solve", QS, "-o", str(out)]) == 0
    sol = io.read_solutions(out)
    pf = io.load_problem(QS)
    P1 = pf.family[0].target()
    pts = sol.points()
    assert len(pts) == 3
    assert max(relative_residual(P1, x) for x in pts) <= 1e-9
    L = io._complex_array(sol.metadata["section"])
    assert L.shape == (4, 6)
    oracle = line_cubic_points(lambda x: evaluate(P1, x), L)
    assert set_distance([ProjectivePoint(x) for x in pts], [ProjectivePoint(x) for x in oracle]) <= 1e-7


# 5 ------------------------------------------------------------------------

@pytest.mark.criterion(5, C5)
def test_5a_normal_forms_on_random_matrices():
    rng = np.random.default_rng(20240601)
    for _ in range(1000):
        m, n = (int(v) for v in rng.integers(1, 7, 2))
        M = rng.integers(-50, 51, (m, n)).tolist()
        H, U = lattice.hnf(M)
        assert lattice.matmul(U, M) == H
        assert abs(flint.fmpz_mat(U).det()) == 1
        lead = [next((j for j, v in enumerate(r) if v), None) for r in H]
        nz = [j for j in lead if j is not None]
        assert nz == sorted(set(nz)) and lead[: len(nz)] == nz
        S, U, V = lattice.snf(M)
        assert lattice.matmul(lattice.matmul(U, M), V) == S
        assert abs(flint.fmpz_mat(U).det()) == 1 and abs(flint.fmpz_mat(V).det()) == 1
        diag = [S[i][i] for i in range(min(m, n))]
        assert all(S[i][j] == 0 for i in range(m) for j in range(n) if i != j)
        for a, b in zip(diag, diag[1:]):
            assert a >= 0 and (b == 0 if a == 0 else b % a == 0)


@pytest.mark.criterion(5, C5)
def test_5b_polyhedral_counts_against_elimination():
    rng = np.random.default_rng(20240602)
    done = 0
    while done < 50:
        k = int(rng.integers(3, 8))
        pts = sorted({tuple(int(v) for v in rng.integers(0, 4, 2)) for _ in range(k)})
        if len(pts) < 3 or lattice._affine_rank(pts) < 2:
            continue
        vol = lattice.normalized_volume(pts)
        if vol > 12:
            continue
        C = rng.normal(size=(2, len(pts))) + 1j * rng.normal(size=(2, len(pts)))
        res = polyhedral_solve(np.array(pts).T.tolist(), C, seed=done)
        assert len(res.solutions) == vol
        oracle = solve_plane_pair(dict(zip(pts, C[0])), dict(zip(pts, C[1])))
        assert len(oracle) == vol
        for z in res.solutions:
            assert min(np.abs(z - o).max() / max(1.0, np.abs(o).max()) for o in oracle) <= 1e-7
        done += 1


@pytest.mark.criterion(5, C5)
def test_5c_binomial_counts():
    rng = np.random.default_rng(20240603)
    done = 0
    while done < 100:
        k = int(rng.integers(1, 5))
        M = rng.integers(-4, 5, (k, k)).tolist()
        det = int(flint.fmpz_mat(M).det())
        if det == 0:
            continue
        c = np.exp(2j * np.pi * rng.random(k))
        sols = solve_binomial_torus(list(zip(M, c)), k)
        S = flint.fmpz_mat(M).snf()
        assert len(sols) == abs(det) == abs(int(np.prod([int(S[i, i]) for i in range(k)], dtype=object)))
        for p in sols:
            assert max(abs(np.prod(p ** np.array(m)) - ci) for m, ci in zip(M, c)) <= 1e-10
        done += 1


@pytest.mark.criterion(5, C5)
@pytest.mark.parametrize("path", [BS, QP, QS], ids=["bott_samelson", "quartic_points", "quasi_symmetry"])
def test_5d_seed_independence(path):
    pf = io.load_problem(path)
    opts = single_thread(pf)
    a = run_problem(pf, seed=1, options=opts)
    b = run_problem(pf, seed=2, options=opts)
    assert a.complete and b.complete
    assert a.metadata.get("gammas") != b.metadata.get("gammas")
    assert set_distance(a.points, b.points) <= 1e-8


@pytest.mark.criterion(5, C5)
def test_5e_witness_round_trip():
    pf = io.load_problem(BS)
    base = khovanskii_solve(khovanskii_input(pf), seed=5)
    W = WitnessSet(pf.groebner, base.section, base.points)
    L2 = random_section(3, 8, np.random.default_rng(7))
    there, p1 = witness_move(W, L2, seed=8)
    back, p2 = witness_move(there, base.section, seed=9)
    assert all(r.success for r in p1 + p2)
    assert len(back.points) == 6
    assert set_distance(back.points, base.points) <= 1e-8


# 6 ------------------------------------------------------------------------

@pytest.mark.criterion(6, C6)
@pytest.mark.parametrize(
    "fixture, message",
    [
        ("non_binomial.json", "non-binomial special fiber generator"),
        ("wrong_weight.json", "weight not compatible"),
        ("rank_deficient.json", "no square toric subsystem"),
    ],
)
def test_failure_fixtures(capsys, fixture, message):
    assert main(["solve", str(DATA / fixture)]) == 1
    assert message in capsys.readouterr().err
