"""Command line interface: ``solve``, ``volume``, ``verify`` and ``track``.

Exit codes: 0 on full success, 1 on input errors, 2 on partial success
(flagged paths, failed accounting, or residuals above tolerance).
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
import time
from typing import Sequence

import jsonschema
import numpy as np

from . import io, lattice
from .homotopies import (
    AccountingError,
    KhovanskiiInput,
    SolveResult,
    khovanskii_solve,
    point_residual,
    polyhedral_solve,
    predicted_root_count,
    section_residual,
    toric_components,
    toric_family_solve,
    weighted_khovanskii_solve,
)
from .poly import HomotopyPolynomial, PolySystem
from .toric import ProjectivePoint, ValuationMatrix, extract_binomials
from .tracker import AffineHomotopy, SquareHomotopy, TrackerOptions, track

ENV_THREADS = "KHOVANSKII_HOMOTOPY_THREADS"
DEFAULT_VERIFY_TOL = 1e-9

log = logging.getLogger("khovanskii_homotopy")


# --------------------------------------------------------------------------
# orchestration


def tracker_options(
    problem: io.ProblemFile | None = None,
    tol: float | None = None,
    overrides: Sequence[str] = (),
    threads: int | None = None,
) -> TrackerOptions:
    """Defaults, then the problem's ``tolerances``, then ``--tol``/``--option``."""
    opts = TrackerOptions()
    if problem is not None and problem.tolerances:
        opts = dataclasses.replace(opts, **problem.tolerances)
    if tol is not None:
        opts = dataclasses.replace(opts, end_tol=tol)
    fields = {f.name: f.type for f in dataclasses.fields(TrackerOptions)}
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep or key not in fields:
            raise ValueError(f"unknown tracker option {item!r}; choose from {sorted(fields)}")
        cast = int if isinstance(getattr(opts, key), int) else float
        opts = dataclasses.replace(opts, **{key: cast(value)})
    if threads is None:
        threads = int(os.environ.get(ENV_THREADS, opts.workers))
    return dataclasses.replace(opts, workers=max(1, threads))


def khovanskii_input(pf: io.ProblemFile, section=None) -> KhovanskiiInput:
    return KhovanskiiInput(
        pf.A,
        tuple(pf.weight),
        pf.groebner,
        labels=tuple(pf.variables) if len(pf.variables) == pf.A.ncols else (),
        section=pf.section if section is None else section,
        seed=pf.seed,
        graph_relations=pf.graph_relations,
        name=pf.name,
    )


def run_problem(
    pf: io.ProblemFile,
    seed=None,
    section=None,
    components: str = "one",
    options: TrackerOptions | None = None,
) -> SolveResult:
    """Dispatch a problem to its pipeline.

    ``seed`` drives the run (arcs, liftings, patches, auxiliary sections);
    a random target section is drawn from the problem's own seed so that
    different run seeds solve the same instance.
    """
    opts = options or tracker_options(pf)
    if pf.mode in ("khovanskii", "weighted"):
        inp = khovanskii_input(pf, section)
        if all(a == 1 for a in inp.grading):
            return khovanskii_solve(inp, seed=seed, options=opts)
        return weighted_khovanskii_solve(inp, seed=seed, options=opts, components=components)
    if pf.mode == "toric_family":
        return toric_family_solve(
            pf.family,
            section=pf.section if section is None else section,
            fiber_dim=pf.fiber_dim,
            components=pf.components,
            seed=seed,
            section_seed=pf.seed,
            options=opts,
        )
    t0 = time.perf_counter()
    res = polyhedral_solve(pf.support, pf.coefficients, seed=seed, options=opts)
    n = len(res.solutions)
    return SolveResult(
        list(res.solutions),
        list(res.residuals),
        ["success"] * n,
        list(range(n)),
        {"sparse_starts": res.volume, "final_points": n},
        np.zeros((0, len(pf.support[0])), dtype=complex),
        sparse_starts=[list(res.solutions)],
        metadata={"liftings": [res.lifting], "volumes": [res.volume], "predicted": res.volume},
        timings={"polyhedral": time.perf_counter() - t0},
        complete=n == res.volume,
    )


def _jsonable(v):
    if isinstance(v, ProjectivePoint):
        return v.coords
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def solution_file(
    result: SolveResult,
    pf: io.ProblemFile,
    seed,
    options: TrackerOptions,
    include_timings: bool = False,
) -> io.SolutionFile:
    recs = [
        io.SolutionRecord(np.asarray(getattr(p, "coords", p), dtype=complex), float(r), int(i), s)
        for p, r, i, s in zip(result.points, result.residuals, result.path_ids, result.statuses)
    ]
    meta = {
        "problem": pf.name,
        "mode": pf.mode,
        "seed": seed,
        "problem_seed": pf.seed,
        "complete": bool(result.complete),
        "counts": dict(result.counts),
        "section": result.section,
        "tolerances": dataclasses.asdict(dataclasses.replace(options, workers=1)),
    }
    for key in ("gammas", "liftings", "predicted", "component_count", "cover_degree", "multiplicity", "Lambda"):
        if key in result.metadata:
            meta[key] = _jsonable(result.metadata[key])
    flagged = {
        stage: [i for i, r in enumerate(paths) if not r.success or r.crossed]
        for stage, paths in result.paths.items()
    }
    meta["flagged_paths"] = {k: v for k, v in flagged.items() if v}
    if include_timings:
        meta["timings"] = dict(result.timings)
    return io.SolutionFile(recs, meta)


def recompute_residuals(pf: io.ProblemFile, sol: io.SolutionFile) -> list[float]:
    """Residual of every stored solution against the ``t = 1`` system and section."""
    coords = sol.points()
    if pf.mode == "sparse":
        mono_rows = np.asarray(pf.support, dtype=np.int64).T
        out = []
        for z in coords:
            terms = pf.coefficients * np.prod(z[None, :] ** mono_rows, axis=1)[None, :]
            out.append(float(np.max(np.abs(terms.sum(1)) / np.maximum(np.abs(terms).sum(1), 1e-300))))
        return out
    L = io._complex_array(sol.metadata["section"]) if sol.metadata.get("section") else None
    if pf.mode in ("khovanskii", "weighted"):
        inp = khovanskii_input(pf)
        L = inp.resolved_section() if L is None else L
        return [point_residual(inp, ProjectivePoint(x), L) for x in coords]
    system = PolySystem([g.target() for g in pf.family])
    return [max(system.relative_residual(ProjectivePoint(x).coords), section_residual(L, x)) for x in coords]


# --------------------------------------------------------------------------
# track (raw homotopy files)

TRACK_SCHEMA = {
    "type": "object",
    "properties": {
        "format_version": {"const": 1},
        "equations": {"type": "array", "items": {"type": "array", "items": io._family_term}},
        "nvars": {"type": "integer", "minimum": 1},
        "start_section": io._complex_matrix,
        "end_section": io._complex_matrix,
        "patch": {"type": "array", "items": io._complex},
        "gamma": io._complex,
        "affine": {"type": "boolean"},
        "starts": {"type": "array", "items": {"type": "array", "items": io._complex}, "minItems": 1},
    },
    "required": ["format_version", "equations", "starts"],
    "additionalProperties": False,
}


def load_homotopy(path):
    doc = io._read_json(path)
    io._validate(doc, TRACK_SCHEMA, str(path))
    starts = [np.array([io._as_complex(v) for v in s]) for s in doc["starts"]]
    n = doc.get("nvars", len(starts[0]))
    eqs = [HomotopyPolynomial(n, [(t["exponent"], t["t_power"], io._as_complex(t["coeff"])) for t in e]) for e in doc["equations"]]
    gamma = io._as_complex(doc["gamma"]) if "gamma" in doc else 1.0
    if doc.get("affine", False):
        return AffineHomotopy(eqs, gamma=gamma), starts
    L0 = io._complex_array(doc["start_section"]) if "start_section" in doc else None
    L1 = io._complex_array(doc["end_section"]) if "end_section" in doc else None
    patch = np.array([io._as_complex(v) for v in doc["patch"]]) if "patch" in doc else None
    return SquareHomotopy(eqs, start_section=L0, end_section=L1, patch=patch, gamma=gamma, seed=0), starts


# --------------------------------------------------------------------------
# commands


def cmd_solve(args) -> int:
    pf = io.load_problem(args.problem)
    opts = tracker_options(pf, args.tol, args.option, args.threads)
    section = None
    if args.section and args.section != "random":
        section = io.load_section(args.section)
    seed = args.seed if args.seed is not None else pf.seed
    t0 = time.perf_counter()
    try:
        result = run_problem(pf, seed=seed, section=section, components=args.components, options=opts)
    except AccountingError as exc:
        log.error("%s", exc)
        return 2
    log.info("[solve] %d solutions in %.2fs; counts %s", len(result.points), time.perf_counter() - t0, result.counts)
    if args.timings:
        for stage, secs in result.timings.items():
            log.info("[timing] %s %.3fs", stage, secs)
    sol = solution_file(result, pf, seed, opts, include_timings=args.timings)
    text = io.write_solutions(None if args.output in (None, "-") else args.output, sol)
    if args.output in (None, "-"):
        sys.stdout.write(text)
    return 0 if result.complete else 2


def cmd_volume(args) -> int:
    pf = io.load_problem(args.problem)
    if pf.mode in ("khovanskii", "weighted"):
        count = predicted_root_count(pf.A)
        verts = lattice.no_body_slice(pf.A.rows)
    elif pf.mode == "toric_family":
        maps = pf.components or toric_components(extract_binomials([g.front() for g in pf.family]), pf.nvars)
        rows = [list(r) for r in maps[0].exponents] + [[1] * pf.nvars]
        count = predicted_root_count(ValuationMatrix(rows)) * len(maps)
        verts = lattice.no_body_slice(rows)
    else:
        verts = sorted(set(map(tuple, np.asarray(pf.support).T.tolist())))
        count = int(lattice.normalized_volume(verts))
        verts = lattice._hull_vertices([tuple(map(lattice.Fraction, v)) for v in verts])
    print(f"normalized volume: {count}")
    for v in verts:
        print("vertex: " + " ".join(str(c) for c in v))
    return 0


def cmd_verify(args) -> int:
    pf = io.load_problem(args.problem)
    sol = io.read_solutions(args.solutions)
    res = recompute_residuals(pf, sol)
    bad = [(i, r) for i, r in enumerate(res) if not r <= args.tol]
    for i, r in bad:
        print(f"solution {i}: residual {r:.3e} exceeds {args.tol:.1e}", file=sys.stderr)
    print(f"verified {len(res) - len(bad)} of {len(res)} solutions (max residual {max(res, default=0.0):.3e})")
    return 2 if bad else 0


def cmd_track(args) -> int:
    H, starts = load_homotopy(args.homotopy)
    opts = tracker_options(None, args.tol, args.option, args.threads)
    results = track(H, starts, opts, seed=args.seed)
    recs = [
        io.SolutionRecord(
            np.asarray(getattr(r.end, "coords", r.end) if r.end is not None else r.raw, dtype=complex),
            float(r.residual),
            i,
            r.status + ("+crossed" if r.crossed else ""),
        )
        for i, r in enumerate(results)
    ]
    meta = {
        "seed": args.seed,
        "steps": [r.steps for r in results],
        "condition": [r.condition for r in results],
        "tolerances": dataclasses.asdict(dataclasses.replace(opts, workers=1)),
    }
    text = io.write_solutions(None if args.output in (None, "-") else args.output, io.SolutionFile(recs, meta))
    if args.output in (None, "-"):
        sys.stdout.write(text)
    return 0 if all(r.success and not r.crossed for r in results) else 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="khovanskii-homotopy", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="count", default=0, help="more log output on stderr")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS, help="more log output on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def tracking_flags(sp):
        sp.add_argument("--seed", type=int, default=None, help="run seed (default: the problem seed)")
        sp.add_argument("--tol", type=float, default=None, help="endpoint residual tolerance")
        sp.add_argument("--option", action="append", default=[], metavar="KEY=VALUE", help="override a tracker option")
        sp.add_argument("--threads", type=int, default=None, help=f"worker threads (default ${ENV_THREADS} or 1)")
        sp.add_argument("--output", "-o", default=None, help="solution file (default: stdout)")

    s = sub.add_parser("solve", parents=[common], help="solve a problem file")
    s.add_argument("problem")
    s.add_argument("--section", default=None, help="section file, or 'random'")
    s.add_argument("--components", choices=["one", "all"], default="one")
    s.add_argument("--timings", action="store_true", help="record per-stage wall-clock times")
    tracking_flags(s)
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("volume", parents=[common], help="predicted root count and Newton-Okounkov body vertices")
    v.add_argument("problem")
    v.set_defaults(func=cmd_volume)

    f = sub.add_parser("verify", parents=[common], help="recompute residuals of a solution file")
    f.add_argument("solutions")
    f.add_argument("problem")
    f.add_argument("--tol", type=float, default=DEFAULT_VERIFY_TOL)
    f.set_defaults(func=cmd_verify)

    t = sub.add_parser("track", parents=[common], help="track a raw square homotopy file")
    t.add_argument("homotopy")
    tracking_flags(t)
    t.set_defaults(func=cmd_track)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(message)s", stream=sys.stderr, force=True)
    try:
        return args.func(args)
    except (ValueError, jsonschema.ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
