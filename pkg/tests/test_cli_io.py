import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import solve_plane_pair
from khovanskii_homotopy import io
from khovanskii_homotopy.cli import main, tracker_options

DATA = Path(__file__).parent / "data"
FIX = {name: str(io.fixture_path(f"{name}.json")) for name in ("bott_samelson", "quartic_points", "quasi_symmetry", "simplex")}
SECTION = str(io.fixture_path("ex27_section.json"))


def sparse_problem(tmp_path, seed=9):
    pts = [(0, 0), (1, 0), (0, 1), (1, 1), (2, 1)]
    rng = np.random.default_rng(seed)
    C = rng.normal(size=(2, len(pts))) + 1j * rng.normal(size=(2, len(pts)))
    doc = {
        "format_version": 1,
        "name": "two plane curves",
        "mode": "sparse",
        "support": np.array(pts).T.tolist(),
        "coefficients": [[[c.real, c.imag] for c in row] for row in C],
        "seed": 4,
    }
    path = tmp_path / "sparse.json"
    path.write_text(json.dumps(doc))
    return path, pts, C


# problem files ------------------------------------------------------------

def test_bott_samelson_fixture_loads(bott_samelson):
    assert bott_samelson.A.ncols == 8 and bott_samelson.A.d == 3
    assert len(bott_samelson.groebner) == 13
    assert bott_samelson.weight == [1, 1, 1, -2]


def test_problem_round_trip(tmp_path, quartic_points):
    out = tmp_path / "copy.json"
    io.write_problem(out, quartic_points)
    again = io.load_problem(out)
    assert again == quartic_points
    assert again.groebner == quartic_points.groebner
    assert again.graph_relations == quartic_points.graph_relations


def test_non_homogeneous_generator_is_named(bott_samelson):
    doc = io.problem_to_dict(bott_samelson)
    doc["groebner_basis"][5].append({"coeff": [1, 0], "exponent": [1, 0, 0, 0, 0, 0, 0, 0]})
    with pytest.raises(io.ProblemError, match="/groebner_basis/5: generator #5 is not homogeneous"):
        io.problem_from_dict(doc)


def test_schema_errors_carry_pointers(bott_samelson):
    doc = io.problem_to_dict(bott_samelson)
    doc["valuation_matrix"][1][2] = "two"
    with pytest.raises(io.ProblemError, match="/valuation_matrix/1/2"):
        io.problem_from_dict(doc)
    doc = io.problem_to_dict(bott_samelson)
    doc["extra"] = 1
    with pytest.raises(io.ProblemError, match="extra"):
        io.problem_from_dict(doc)


def test_solution_round_trip(tmp_path):
    recs = [
        io.SolutionRecord(np.array([1, 0.1 + 1 / 3 * 1j, -2e-300]), 1.5e-16, 0, "success"),
        io.SolutionRecord(np.array([np.pi, 1j, 1]), float("inf"), 3, "diverged"),
    ]
    sol = io.SolutionFile(recs, {"seed": 7, "gammas": [np.exp(1j)], "counts": {"final_points": 2}})
    path = tmp_path / "s.json"
    text = io.write_solutions(path, sol)
    assert path.read_text() == text
    again = io.read_solutions(path)
    assert again == sol
    assert io.write_solutions(None, again) == text


@given(st.lists(st.complex_numbers(allow_nan=False, allow_infinity=False), min_size=1, max_size=6))
def test_float_formatting_is_exact(values):
    text = io.dumps({"v": values})
    back = [complex(a, b) for a, b in json.loads(text)["v"]]
    assert back == [complex(v) for v in values]


def test_tracker_option_layers(bott_samelson):
    opts = tracker_options(bott_samelson, tol=1e-11, overrides=["max_step=0.05", "max_steps=500"], threads=3)
    assert (opts.end_tol, opts.max_step, opts.max_steps, opts.workers) == (1e-11, 0.05, 500, 3)
    with pytest.raises(ValueError, match="unknown tracker option"):
        tracker_options(None, overrides=["speed=3"])


def test_thread_count_from_environment(monkeypatch):
    monkeypatch.setenv("KHOVANSKII_HOMOTOPY_THREADS", "4")
    assert tracker_options().workers == 4


# commands -----------------------------------------------------------------

def test_solve_printed_section_and_verify(tmp_path, capsys):
    out = tmp_path / "bs.json"
    assert main(["solve", FIX["bott_samelson"], "--section", SECTION, "--output", str(out)]) == 0
    sol = io.read_solutions(out)
    assert len(sol.solutions) == 6
    assert sol.metadata["counts"]["sparse_starts"] == 6
    assert main(["verify", str(out), FIX["bott_samelson"]]) == 0
    assert "verified 6 of 6" in capsys.readouterr().out

    doc = json.loads(out.read_text())
    doc["solutions"][4]["coords"][2][0] += 1e-3
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert main(["verify", str(bad), FIX["bott_samelson"]]) == 2
    assert "solution 4:" in capsys.readouterr().err


def test_solve_is_byte_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["solve", FIX["quasi_symmetry"], "--seed", "3", "-o", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert main(["solve", FIX["quasi_symmetry"], "--seed", "3", "--threads", "3", "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_solve_to_stdout_and_timings(capsys):
    assert main(["solve", FIX["simplex"], "--timings"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["solutions"]) == 1
    assert "timings" in doc["metadata"]


def test_sparse_mode_matches_elimination(tmp_path):
    path, pts, C = sparse_problem(tmp_path)
    out = tmp_path / "sol.json"
    assert main(["solve", str(path), "-o", str(out)]) == 0
    sol = io.read_solutions(out)
    oracle = solve_plane_pair(dict(zip(pts, C[0])), dict(zip(pts, C[1])))
    assert len(sol.solutions) == len(oracle) == 3
    for z in sol.points():
        assert min(np.abs(z - o).max() for o in oracle) < 1e-8
    assert main(["verify", str(out), str(path)]) == 0


@pytest.mark.parametrize(
    "name, count, vertices",
    [
        ("bott_samelson", 6, []),
        ("quartic_points", 5, ["1/2 3/2", "4/3 1/3"]),
        ("simplex", 1, []),
    ],
)
def test_volume(capsys, name, count, vertices):
    assert main(["volume", FIX[name]]) == 0
    out = capsys.readouterr().out
    assert f"normalized volume: {count}\n" in out
    for v in vertices:
        assert f"vertex: {v}\n" in out


def test_track_command(tmp_path, capsys):
    eq = [
        {"coeff": [1, 0], "exponent": [2], "t_power": 0},
        {"coeff": [-1, 0], "exponent": [0], "t_power": 0},
        {"coeff": [-3, 0], "exponent": [0], "t_power": 1},
    ]
    doc = {"format_version": 1, "equations": [eq], "affine": True, "gamma": [0.6, 0.8], "starts": [[[1, 0]], [[-1, 0]]]}
    path = tmp_path / "h.json"
    path.write_text(json.dumps(doc))
    assert main(["track", str(path), "--seed", "1"]) == 0
    sol = json.loads(capsys.readouterr().out)
    ends = sorted(complex(*s["coords"][0]).real for s in sol["solutions"])
    assert ends == pytest.approx([-2, 2], abs=1e-12)


@pytest.mark.parametrize(
    "fixture, message",
    [
        ("wrong_weight.json", "weight not compatible"),
        ("rank_deficient.json", "no square toric subsystem"),
        ("non_binomial.json", "non-binomial special fiber generator"),
    ],
)
def test_failure_fixtures_exit_one(capsys, fixture, message):
    assert main(["solve", str(DATA / fixture)]) == 1
    assert message in capsys.readouterr().err


def test_missing_file_exits_one(capsys):
    assert main(["solve", "/nonexistent/problem.json"]) == 1
    assert "error:" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "khovanskii_homotopy", "volume", FIX["simplex"]],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert "normalized volume: 1" in proc.stdout
