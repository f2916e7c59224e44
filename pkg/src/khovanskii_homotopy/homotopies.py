"""Solving pipelines: polyhedral start systems, linear-section and witness-set
homotopies, the toric two-step method and the Khovanskii homotopies.

Every pipeline returns a :class:`SolveResult`, which carries the final points
together with the intermediate point sets and the per-stage bookkeeping that
the accounting checks (and the solution files) rely on.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import lattice
from .poly import (
    HomotopyPolynomial,
    PolySystem,
    SparsePolynomial,
    deform,
    initial_form,
    is_weighted_homogeneous,
    pullback_power_map,
)
from .toric import (
    BinomialEquation,
    MonomialMap,
    ProjectivePoint,
    ValuationMatrix,
    component_kodaira_maps,
    extract_binomials,
    kodaira_map_from_point,
    projective_distance,
    solve_binomial_torus,
    sparse_section_system,
    toric_fiber_point,
)
from .tracker import GammaArc, PathResult, SquareHomotopy, TrackerOptions, close_pairs, random_gamma, track

__all__ = [
    "FlatFamily",
    "WitnessSet",
    "KhovanskiiInput",
    "SolveResult",
    "PolyhedralResult",
    "CellHomotopy",
    "random_section",
    "square_subsystem",
    "polyhedral_solve",
    "linear_section_homotopy",
    "witness_move",
    "toric_components",
    "toric_two_step",
    "toric_family_solve",
    "khovanskii_family",
    "khovanskii_solve",
    "weighted_khovanskii_solve",
    "predicted_root_count",
    "section_residual",
    "dedup_points",
    "point_residual",
    "AccountingError",
]

log = logging.getLogger(__name__)


class AccountingError(ValueError):
    """Point counts of a finished run violate the expected accounting."""


# --------------------------------------------------------------------------
# data


@dataclass(frozen=True)
class FlatFamily:
    """Generators of a flat family ``X_t`` in ``P^{N-1}``.

    ``exponents`` optionally holds an integer matrix whose rows annihilate the
    exponent differences of the ``t = 0`` binomials (the valuation matrix, or
    the component exponent matrix in the weighted case); it is used to vet
    square-subsystem candidates.
    """

    generators: tuple[HomotopyPolynomial, ...]
    ambient: int
    fiber_dim: int
    grading: tuple[int, ...] | None = None
    exponents: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        if any(g.nvars != self.ambient for g in gens):
            raise ValueError("generator variable count differs from the ambient dimension")
        grading = tuple(self.grading) if self.grading is not None else (1,) * self.ambient
        object.__setattr__(self, "grading", grading)
        for i, g in enumerate(gens):
            ok, _ = is_weighted_homogeneous(g, grading)
            if not ok:
                raise ValueError(f"generator #{i} is not homogeneous for the grading {list(grading)}")
        if self.exponents is not None:
            object.__setattr__(self, "exponents", tuple(tuple(int(v) for v in r) for r in self.exponents))

    def fronts(self) -> list[SparsePolynomial]:
        return [g.front() for g in self.generators]

    def targets(self) -> list[SparsePolynomial]:
        return [g.target() for g in self.generators]


@dataclass
class WitnessSet:
    """``(system, section, points)``; ``square`` is the subsystem used for tracking."""

    system: list[SparsePolynomial]
    section: np.ndarray
    points: list[ProjectivePoint]
    square: list[SparsePolynomial] | None = None

    @property
    def ambient(self) -> int:
        return self.system[0].nvars if self.system else np.atleast_2d(self.section).shape[1]


@dataclass
class KhovanskiiInput:
    """Inputs of the Khovanskii homotopy.

    Args:
        A: valuation matrix, last row the grading.
        weight: ``w``; the variables are deformed with the composite ``w A``.
        groebner: Groebner basis of the ideal of the Khovanskii basis, whose
            ``w A``-initial forms generate the toric ideal.
        section: ``d x n`` matrix of linear forms on ``P(V*)`` or None for a
            random section drawn from ``seed``.
        graph_relations: optional ``{j: h_j}`` with ``x_j = h_j(x_0..x_n)`` on
            the variety, used to check projected points against the full basis.
    """

    A: ValuationMatrix
    weight: tuple[int, ...]
    groebner: list[SparsePolynomial]
    labels: tuple[str, ...] = ()
    section: np.ndarray | None = None
    seed: int | None = None
    graph_relations: dict[int, SparsePolynomial] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        N = self.A.ncols
        if len(self.weight) != len(self.A.rows):
            raise ValueError(f"weight has length {len(self.weight)}, expected {len(self.A.rows)}")
        if not self.labels:
            self.labels = tuple(f"x{i}" for i in range(N))
        if len(self.labels) != N:
            raise ValueError(f"{len(self.labels)} labels for {N} generators")
        for i, g in enumerate(self.groebner):
            if g.nvars != N:
                raise ValueError(f"generator #{i} has {g.nvars} variables, expected {N}")
            if not is_weighted_homogeneous(g, self.grading)[0]:
                raise ValueError(f"generator #{i} is not homogeneous for the grading {self.grading}")

    @property
    def grading(self) -> list[int]:
        return self.A.grading

    @property
    def d(self) -> int:
        return self.A.d

    @property
    def linear_block(self) -> int:
        """Number of leading degree-one coordinates (the span of ``V``)."""
        n = 0
        for a in self.grading:
            if a != 1:
                break
            n += 1
        return n

    def resolved_section(self) -> np.ndarray:
        n = self.linear_block
        if self.section is not None:
            L = np.atleast_2d(np.asarray(self.section, dtype=complex))
            if L.shape != (self.d, n):
                raise ValueError(f"section must be {self.d} x {n}, got {L.shape[0]} x {L.shape[1]}")
            return L
        return random_section(self.d, n, np.random.default_rng(self.seed))


@dataclass
class SolveResult:
    """Final points of a pipeline run with stage data for accounting."""

    points: list[ProjectivePoint]
    residuals: list[float]
    statuses: list[str]
    path_ids: list[int]
    counts: dict[str, int]
    section: np.ndarray
    sparse_starts: list[list[np.ndarray]] = field(default_factory=list)
    start_points: list[ProjectivePoint] = field(default_factory=list)
    pre_projection: list[ProjectivePoint] = field(default_factory=list)
    paths: dict[str, list[PathResult]] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)
    complete: bool = True

    def __len__(self) -> int:
        return len(self.points)


@dataclass
class PolyhedralResult:
    solutions: list[np.ndarray]
    residuals: list[float]
    lifting: list[int]
    cells: list[tuple[int, ...]]
    volume: int
    paths: list[PathResult]


# --------------------------------------------------------------------------
# helpers


def random_section(k: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """``k x n`` complex Gaussian matrix."""
    return (rng.standard_normal((k, n)) + 1j * rng.standard_normal((k, n))) / math.sqrt(2)


def section_residual(L, x) -> float:
    """Largest ``|l(x)| / sum_j |l_j x_j|`` over the rows of ``L``."""
    L = np.atleast_2d(np.asarray(L, dtype=complex))
    if L.shape[0] == 0:
        return 0.0
    x = np.asarray(getattr(x, "coords", x), dtype=complex)
    num = np.abs(L @ x)
    den = np.abs(L) @ np.abs(x)
    return float(np.max(num / np.maximum(den, np.finfo(float).tiny)))


def _system_residual(polys, x) -> float:
    if not polys:
        return 0.0
    x = np.asarray(getattr(x, "coords", x), dtype=complex)
    return PolySystem(polys).relative_residual(x)


def dedup_points(points: Sequence[ProjectivePoint], tol: float = 1e-6, guard: float = 1e-8):
    """Cluster points closer than ``tol``; returns (representatives, clusters, ambiguous pairs).

    Pairs at distance in ``[guard, tol)`` are reported as ambiguous since
    genuine duplicates should agree to roughly working precision.
    """
    reps: list[ProjectivePoint] = []
    clusters: list[list[int]] = []
    ambiguous = []
    for i, p in enumerate(points):
        for k, r in enumerate(reps):
            dist = projective_distance(p, r)
            if dist < tol:
                clusters[k].append(i)
                if dist >= guard:
                    ambiguous.append((clusters[k][0], i, dist))
                break
        else:
            reps.append(p)
            clusters.append([i])
    return reps, clusters, ambiguous


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _child_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2**63 - 1))


# --------------------------------------------------------------------------
# square subsystem


def _binomial_difference(f: SparsePolynomial) -> list[int] | None:
    if len(f) != 2:
        return None
    (e1, _), (e2, _) = f.items()
    return [a - b for a, b in zip(e1, e2)]


def square_subsystem(family: FlatFamily, A=None) -> list[HomotopyPolynomial]:
    """Pick ``N - 1 - d`` generators whose ``t = 0`` binomials have independent differences.

    Selection is greedy in input order with exact rank updates. ``A`` (a
    :class:`ValuationMatrix` or integer rows) defaults to ``family.exponents``;
    when present, candidates must have their difference in its kernel.
    """
    N, d = family.ambient, family.fiber_dim
    target = N - 1 - d
    rows = A.rows if isinstance(A, ValuationMatrix) else (A if A is not None else family.exponents)
    chosen: list[HomotopyPolynomial] = []
    diffs: list[list[int]] = []
    for g in family.generators:
        if len(diffs) == target:
            break
        dv = _binomial_difference(g.front())
        if dv is None:
            continue
        if rows is not None and any(sum(r[j] * dv[j] for j in range(N)) for r in rows):
            continue
        if lattice.rank(diffs + [dv]) > len(diffs):
            diffs.append(dv)
            chosen.append(g)
    if len(diffs) < target:
        raise ValueError(f"no square toric subsystem: achieved rank {len(diffs)} of {target}")
    return chosen


# --------------------------------------------------------------------------
# polyhedral homotopy


class CellHomotopy:
    """``sum_j C_ij y^{alpha_j} s^{e_j}`` for one cell of a regular subdivision.

    Substituting ``z = y s^{-c}`` into the lifted system and dividing by the
    cell's minimal power of ``s`` leaves exponents ``e_j >= 0`` that vanish
    exactly on the cell, so ``s = 0`` is the binomial cell system and
    ``s = 1`` the target system.
    """

    def __init__(self, support: np.ndarray, coeffs: np.ndarray, powers: np.ndarray):
        self.cols = np.asarray(support, dtype=np.int64)  # N x d
        self.C = np.asarray(coeffs, dtype=complex)  # d x N
        self.e = np.asarray(powers, dtype=float)
        self.nvars = self.nequations = self.C.shape[0]

    def evaluate(self, y, s):
        y = np.asarray(y, dtype=complex)
        mono = np.prod(y[None, :] ** self.cols, axis=1)
        sp = np.power(s, self.e) if s > 0 else (self.e == 0).astype(float)
        with np.errstate(divide="ignore", invalid="ignore"):
            ds = np.where(self.e > 0, self.e * np.power(s, np.maximum(self.e - 1, 0)), 0.0)
        w = sp * mono
        H = self.C @ w
        Hy = (self.C * w[None, :]) @ (self.cols / y[None, :])
        Hs = self.C @ (ds * mono)
        return H, Hy, Hs

    def residual(self, y, s=1.0) -> float:
        y = np.asarray(y, dtype=complex)
        mono = np.prod(y[None, :] ** self.cols, axis=1)
        sp = np.power(s, self.e) if s > 0 else (self.e == 0).astype(float)
        terms = self.C * (sp * mono)[None, :]
        num = np.abs(terms.sum(axis=1))
        den = np.abs(terms).sum(axis=1)
        return float(np.max(num / np.maximum(den, np.finfo(float).tiny)))

    def start_point(self, y):
        return np.asarray(y, dtype=complex)

    def endpoint(self, y):
        return np.array(y, dtype=complex)


def _merge_support(support, coeffs):
    """Columns of the support as points; repeated columns have coefficients summed."""
    S = np.asarray(support, dtype=np.int64)
    if S.ndim == 1:
        S = S.reshape(1, -1)
    C = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    if C.shape[1] != S.shape[1]:
        raise ValueError(f"support has {S.shape[1]} columns, coefficients {C.shape[1]}")
    index: dict[tuple[int, ...], int] = {}
    pts: list[tuple[int, ...]] = []
    cols = []
    for j in range(S.shape[1]):
        key = tuple(int(v) for v in S[:, j])
        if key not in index:
            index[key] = len(pts)
            pts.append(key)
            cols.append(C[:, j].copy())
        else:
            cols[index[key]] += C[:, j]
    return pts, np.array(cols).T


def _cell_starts(pts, C, cell) -> list[np.ndarray]:
    """Torus solutions of the cell system ``sum_{j in cell} C_ij y^{alpha_j} = 0``."""
    Cs = C[:, list(cell)]
    _, sv, Vh = np.linalg.svd(Cs)
    if sv[-1] < 1e-12 * sv[0]:
        raise ValueError("degenerate section, re-randomize")
    m = Vh[-1].conj()
    if np.min(np.abs(m)) < 1e-12 * np.max(np.abs(m)):
        raise ValueError("degenerate section, re-randomize")
    j0 = cell[0]
    rel = [
        ([a - b for a, b in zip(pts[j], pts[j0])], m[k] / m[0])
        for k, j in enumerate(cell)
        if k > 0
    ]
    return solve_binomial_torus(rel, len(pts[0]))


class CoefficientHomotopy:
    """``((1 - t) Q + t P) m(z)`` on the torus for a fixed monomial support ``m``."""

    def __init__(self, support: np.ndarray, start: np.ndarray, target: np.ndarray, gamma: complex):
        self.cols = np.asarray(support, dtype=np.int64)
        self.Q = np.asarray(start, dtype=complex)
        self.P = np.asarray(target, dtype=complex)
        self.arc = GammaArc(gamma)
        self.nvars = self.nequations = self.P.shape[0]

    def _coeffs(self, s):
        t = self.arc.t(s)
        return (1 - t) * self.Q + t * self.P

    def evaluate(self, z, s):
        z = np.asarray(z, dtype=complex)
        mono = np.prod(z[None, :] ** self.cols, axis=1)
        C = self._coeffs(s)
        H = C @ mono
        Hz = (C * mono[None, :]) @ (self.cols / z[None, :])
        Hs = ((self.P - self.Q) @ mono) * self.arc.dt(s)
        return H, Hz, Hs

    def residual(self, z, s=1.0) -> float:
        mono = np.prod(np.asarray(z, dtype=complex)[None, :] ** self.cols, axis=1)
        terms = self._coeffs(s) * mono[None, :]
        num = np.abs(terms.sum(axis=1))
        den = np.abs(terms).sum(axis=1)
        return float(np.max(num / np.maximum(den, np.finfo(float).tiny)))

    def start_point(self, z):
        return np.asarray(z, dtype=complex)

    def endpoint(self, z):
        return np.array(z, dtype=complex)


def _lifted_solve(pts, C, rng, opts, max_attempts):
    """Cell-by-cell polyhedral homotopy for generic coefficients ``C``."""
    cols = np.array(pts, dtype=np.int64)
    high = max(8, 2 * len(pts))
    last_error = "no attempt made"
    for attempt in range(max_attempts):
        for _ in range(50):
            lift = lattice.random_lifting(len(pts), rng, high=high)
            try:
                cx = lattice.regular_subdivision(pts, lift)
                break
            except lattice.NonGenericLifting:
                high *= 2
        else:
            raise RuntimeError("could not find a generic lifting")
        vols = cx.cell_volumes()
        total = int(sum(vols))
        sols, paths = [], []
        for cell, (c, c0), vol in zip(cx.cells, cx.normals, vols):
            starts = _cell_starts(pts, C, cell)
            if len(starts) != vol:
                raise RuntimeError(f"cell {cell} gave {len(starts)} starts, volume {vol}")
            gaps = [Fraction(lift[j]) - sum(ci * Fraction(v) for ci, v in zip(c, pts[j])) - c0 for j in range(len(pts))]
            positive = [g for g in gaps if g > 0]
            scale = min(positive) if positive else Fraction(1)
            H = CellHomotopy(cols, C, np.array([float(g / scale) for g in gaps]))
            paths.extend(track(H, starts, opts, seed=_child_seed(rng), check_distinct=False))
        sols = [r.end for r in paths if r.success]
        distinct = not close_pairs(sols, opts.separation_tol)
        log.info("[polyhedral] attempt %d: %d cells, volume %d, %d solutions", attempt + 1, len(cx.cells), total, len(sols))
        if distinct and len(sols) == total:
            return sols, list(lift), list(cx.cells), total, paths
        last_error = f"{len(sols)} of {total} solutions (distinct: {distinct})"
        log.warning("[polyhedral] attempt %d incomplete: %s; re-lifting", attempt + 1, last_error)
    raise RuntimeError(f"polyhedral homotopy failed: {last_error}")


def polyhedral_solve(
    support,
    coeffs,
    seed=None,
    options: TrackerOptions | None = None,
    max_attempts: int = 4,
) -> PolyhedralResult:
    """All torus solutions of an unmixed sparse system.

    The lifted cell homotopies run on seeded random complex coefficients, so
    no cell system is singular and no two paths meet on the real parameter
    segment; a coefficient homotopy along a gamma arc then carries those
    solutions to the requested coefficients.

    Args:
        support: ``d x N`` integer matrix; column ``j`` is the exponent of
            monomial ``j`` (shared by every equation).
        coeffs: ``d x N`` complex coefficients.
        seed: seeds the lifting, the start coefficients and the arc.

    Returns:
        A :class:`PolyhedralResult` with exactly ``normalized_volume`` solutions.

    Raises:
        ValueError: "degenerate section, re-randomize" when the coefficients
            have fewer than ``normalized_volume`` regular torus solutions.
    """
    opts = options or TrackerOptions()
    rng = _rng(seed)
    pts, P = _merge_support(support, coeffs)
    d = len(pts[0])
    if P.shape[0] != d:
        raise ValueError(f"{P.shape[0]} equations for a {d}-dimensional torus")
    if d == 0:
        return PolyhedralResult([np.zeros(0, dtype=complex)], [0.0], [], [], 1, [])
    if lattice._affine_rank(pts) != d:
        raise ValueError("support is not full-dimensional")
    for _ in range(max_attempts):
        Q = random_section(d, len(pts), rng)
        try:
            starts, lift, cells, total, _ = _lifted_solve(pts, Q, rng, opts, max_attempts)
            break
        except ValueError:
            continue
    else:
        raise RuntimeError("no generic start coefficients found")
    cols = np.array(pts, dtype=np.int64)
    results = []
    for _ in range(3):
        H = CoefficientHomotopy(cols, Q, P, random_gamma(rng))
        results = track(H, starts, opts, seed=_child_seed(rng))
        if all(r.success and not r.crossed for r in results):
            break
    sols = [r.end for r in results if r.success and not r.crossed]
    if len(sols) != total:
        raise ValueError(
            f"degenerate section, re-randomize ({len(sols)} of {total} regular torus solutions)"
        )
    return PolyhedralResult(sols, [r.residual for r in results], lift, cells, total, results)


# --------------------------------------------------------------------------
# homotopies between linear sections


def _track_with_retries(make, starts, opts, rng, retries=2):
    """Track, re-running failed paths on fresh gamma arcs."""
    gamma = random_gamma(rng)
    H = make(gamma, _child_seed(rng))
    results = track(H, starts, opts, seed=_child_seed(rng))
    gammas = [gamma]
    for _ in range(retries):
        bad = [i for i, r in enumerate(results) if not r.success or r.crossed]
        if not bad:
            break
        gamma = random_gamma(rng)
        gammas.append(gamma)
        log.warning("re-tracking %d paths on a new gamma arc", len(bad))
        H = make(gamma, _child_seed(rng))
        redo = track(H, [starts[i] for i in bad], opts, seed=_child_seed(rng), check_distinct=False)
        for i, r in zip(bad, redo):
            results[i] = r
        ends = [r.end if r.success else None for r in results]
        for r in results:
            r.crossed = False
        for i, j in close_pairs(ends, opts.separation_tol):
            results[i].crossed = results[j].crossed = True
    return results, gammas


def linear_section_homotopy(
    family: FlatFamily,
    L,
    starts: Sequence[ProjectivePoint],
    seed=None,
    options: TrackerOptions | None = None,
    square: Sequence[HomotopyPolynomial] | None = None,
) -> tuple[list[PathResult], list[complex]]:
    """Track ``X_0 cap L`` to ``X_1 cap L`` along the family.

    Returns the path results (in start order) and the gamma values used.
    """
    opts = options or TrackerOptions()
    rng = _rng(seed)
    sq = list(square) if square is not None else square_subsystem(family)
    L = np.atleast_2d(np.asarray(L, dtype=complex))

    def make(gamma, s):
        return SquareHomotopy(sq, start_section=L, gamma=gamma, seed=s)

    return _track_with_retries(make, list(starts), opts, rng)


def _witness_square(W: WitnessSet, rng) -> list[SparsePolynomial]:
    N = W.ambient
    k = N - 1 - np.atleast_2d(W.section).shape[0]
    if W.square is not None:
        return list(W.square)
    if len(W.system) == k:
        return list(W.system)
    # random combinations keep the variety as a component near its points;
    # lower-degree generators are first lifted to the top degree by powers of
    # random linear forms so every combination stays homogeneous
    degs = []
    for i, f in enumerate(W.system):
        ok, deg = is_weighted_homogeneous(f, [1] * N)
        if not ok:
            raise ValueError(f"witness system generator #{i} is not homogeneous")
        degs.append(deg)
    top = max(degs)
    lifted = []
    for f, deg in zip(W.system, degs):
        g = f
        for _ in range(top - deg):
            ell = random_section(1, N, rng)[0]
            g = _multiply_linear(g, ell)
        lifted.append(g)
    R = random_section(k, len(lifted), rng)
    out = []
    for i in range(k):
        acc: dict = {}
        for c, f in zip(R[i], lifted):
            for e, v in f.items():
                acc[e] = acc.get(e, 0j) + c * v
        out.append(SparsePolynomial(N, acc))
    return out


def _multiply_linear(f: SparsePolynomial, ell) -> SparsePolynomial:
    N = f.nvars
    terms = []
    for e, c in f.items():
        for j in range(N):
            terms.append((tuple(v + (k == j) for k, v in enumerate(e)), c * ell[j]))
    return SparsePolynomial(N, terms)


def witness_move(
    W: WitnessSet, L_new, seed=None, options: TrackerOptions | None = None
) -> tuple[WitnessSet, list[PathResult]]:
    """Move the section of a witness set along ``(1 - t) L + t L'``."""
    opts = options or TrackerOptions()
    rng = _rng(seed)
    sq = _witness_square(W, rng)
    L0 = np.atleast_2d(np.asarray(W.section, dtype=complex))
    L1 = np.atleast_2d(np.asarray(L_new, dtype=complex))
    if L0.shape != L1.shape:
        raise ValueError("sections have different shapes")

    def make(gamma, s):
        return SquareHomotopy(sq, start_section=L0, end_section=L1, gamma=gamma, seed=s)

    results, _ = _track_with_retries(make, list(W.points), opts, rng)
    pts = [r.end for r in results if r.success]
    if len(pts) < len(results):
        log.warning("[witness] %d of %d paths failed", len(results) - len(pts), len(results))
    return WitnessSet(list(W.system), L1, pts, square=sq), results


# --------------------------------------------------------------------------
# toric fibers


def toric_components(binomials: Sequence[BinomialEquation], N: int, seed=None) -> list[MonomialMap]:
    """Monomial maps onto the translated tori cut out by ``binomials`` in ``P^{N-1}``.

    The exponent differences span a lattice ``K``; the maps share the exponent
    matrix of ``K``'s annihilator and their base points run over the
    ``|sat(K)/K|`` translates.
    """
    diffs: list[list[int]] = []
    for b in binomials:
        dv = b.difference
        if sum(dv) != 0:
            raise ValueError(f"binomial {b} is not homogeneous")
        if lattice.rank(diffs + [dv]) > len(diffs):
            diffs.append(dv)
    rows = lattice.annihilator_basis(diffs, N)
    A = ValuationMatrix(rows)
    p = toric_fiber_point(binomials, A, seed)
    if not diffs:
        return [kodaira_map_from_point(p, A)]
    return [MonomialMap(p * zeta, tuple(map(tuple, A.exponents))) for zeta in lattice.component_group(diffs, N)]


def toric_two_step(
    family: FlatFamily,
    components: Sequence[MonomialMap],
    L,
    seed=None,
    options: TrackerOptions | None = None,
    square: Sequence[HomotopyPolynomial] | None = None,
) -> SolveResult:
    """Solve the sparse section system on each toric component, then track to ``t = 1``."""
    opts = options or TrackerOptions()
    rng = _rng(seed)
    L = np.atleast_2d(np.asarray(L, dtype=complex))
    timings = {}
    t0 = time.perf_counter()
    sparse, starts, liftings, volumes = [], [], [], []
    for k, phi in enumerate(components):
        support, coeffs = sparse_section_system(L, phi)
        poly = polyhedral_solve(support, coeffs, seed=_child_seed(rng), options=opts)
        sparse.append(poly.solutions)
        liftings.append(poly.lifting)
        volumes.append(poly.volume)
        starts.extend(phi(z) for z in poly.solutions)
        log.info("[two-step] component %d: %d sparse solutions", k, len(poly.solutions))
    timings["polyhedral"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    sq = list(square) if square is not None else square_subsystem(family)
    if all(g.max_t_power == 0 for g in sq):
        # constant family: the start fiber is the target
        results = [_static_result(sq, L, p) for p in starts]
        gammas = []
    else:
        results, gammas = linear_section_homotopy(family, L, starts, seed=rng, options=opts, square=sq)
    timings["linear_section"] = time.perf_counter() - t0
    targets = family.targets()
    pts, res, stat, ids = [], [], [], []
    for i, r in enumerate(results):
        if r.success:
            pts.append(r.end)
            res.append(max(_system_residual(targets, r.end), section_residual(L, r.end)))
            stat.append(r.status)
            ids.append(i)
    counts = {
        "sparse_starts": sum(len(s) for s in sparse),
        "t0_points": len(starts),
        "t1_points": len(pts),
        "final_points": len(pts),
    }
    complete = len(pts) == len(starts) == sum(volumes) and not any(r.crossed for r in results)
    meta = {"gammas": gammas, "liftings": liftings, "components": len(components), "volumes": volumes}
    return SolveResult(
        pts, res, stat, ids, counts, L,
        sparse_starts=sparse, start_points=starts,
        paths={"linear_section": results}, metadata=meta, timings=timings, complete=complete,
    )


def toric_family_solve(
    generators: Sequence[HomotopyPolynomial],
    section=None,
    fiber_dim: int | None = None,
    components: Sequence[MonomialMap] | None = None,
    seed=None,
    section_seed=None,
    options: TrackerOptions | None = None,
) -> SolveResult:
    """Toric two-step for a family given by explicit generators.

    Without explicit ``components`` the special fiber must be cut out by the
    binomial fronts of the generators; its translated tori are read off them
    with :func:`toric_components`.
    """
    rng = _rng(seed)
    gens = list(generators)
    N = gens[0].nvars
    exps = None
    if components is None:
        binomials = extract_binomials([g.front() for g in gens])
        components = toric_components(binomials, N, seed=_child_seed(rng))
    components = list(components)
    exps = [list(r) for r in components[0].exponents] + [[1] * N]
    d = components[0].dim if fiber_dim is None else int(fiber_dim)
    if d != components[0].dim:
        raise ValueError(f"fiber dimension {d} does not match the component maps ({components[0].dim})")
    family = FlatFamily(tuple(gens), N, d, None, tuple(map(tuple, exps)))
    L = random_section(d, N, np.random.default_rng(section_seed)) if section is None else section
    L = np.atleast_2d(np.asarray(L, dtype=complex))
    if L.shape != (d, N):
        raise ValueError(f"section must be {d} x {N}, got {L.shape[0]} x {L.shape[1]}")
    out = toric_two_step(family, components, L, seed=rng, options=options)
    out.metadata["predicted"] = sum(out.metadata["volumes"])
    return out


def _static_result(square, L, p: ProjectivePoint) -> PathResult:
    res = max(_system_residual([g.target() for g in square], p), section_residual(L, p))
    return PathResult(p.coords, p, "success", 0, res, 1.0)


# --------------------------------------------------------------------------
# Khovanskii homotopies


def _a_degree(A: ValuationMatrix, e) -> tuple[int, ...]:
    return tuple(sum(r[j] * e[j] for j in range(len(e))) for r in A.rows)


def khovanskii_family(inp: KhovanskiiInput) -> tuple[list[HomotopyPolynomial], list[BinomialEquation]]:
    """The weight degeneration ``G_t`` and the binomials of its special fiber.

    Raises:
        ValueError: "weight not compatible with valuation" if some initial
            form is not homogeneous for the valuation matrix, and
            "non-binomial special fiber generator" if it is but has other
            than two terms.
    """
    wA = inp.A.weight(inp.weight)
    fam, fronts = [], []
    for i, g in enumerate(inp.groebner):
        f0 = initial_form(g, wA)
        if len({_a_degree(inp.A, e) for e, _ in f0.items()}) != 1:
            raise ValueError(f"weight not compatible with valuation: generator #{i} has initial form {f0!r}")
        fam.append(deform(g, wA))
        fronts.append(f0)
    return fam, extract_binomials(fronts)


def point_residual(inp: KhovanskiiInput, x: ProjectivePoint, L) -> float:
    """Residual of a final point against the section and the Groebner basis.

    In the weighted case the higher-degree coordinates are recovered from the
    graph relations when they are available; otherwise only the section is
    checked.
    """
    res = section_residual(L, x)
    n = inp.linear_block
    if n == inp.A.ncols:
        return max(res, _system_residual(inp.groebner, x))
    if inp.graph_relations and set(inp.graph_relations) == set(range(n, inp.A.ncols)):
        v = np.asarray(x.coords, dtype=complex)
        full = np.concatenate([v, [inp.graph_relations[j](v) for j in range(n, inp.A.ncols)]])
        res = max(res, _system_residual(inp.groebner, full))
    return res


def khovanskii_solve(
    inp: KhovanskiiInput, seed=None, options: TrackerOptions | None = None
) -> SolveResult:
    """Algorithm for a Khovanskii basis of degree-one elements (grading all ones)."""
    if any(a != 1 for a in inp.grading):
        raise ValueError("grading is not all ones; use weighted_khovanskii_solve")
    rng = _rng(seed)
    t0 = time.perf_counter()
    G, binomials = khovanskii_family(inp)
    family = FlatFamily(tuple(G), inp.A.ncols, inp.d, tuple(inp.grading), tuple(map(tuple, inp.A.rows)))
    sq = square_subsystem(family, inp.A)
    p = toric_fiber_point(binomials, inp.A, seed=_child_seed(rng))
    phi = kodaira_map_from_point(p, inp.A)
    L = inp.resolved_section()
    setup = time.perf_counter() - t0
    out = toric_two_step(family, [phi], L, seed=rng, options=options, square=sq)
    out.timings = {"setup": setup, **out.timings}
    out.residuals = [point_residual(inp, x, L) for x in out.points]
    out.metadata.update(base_point=p, weight_vector=inp.A.weight(inp.weight))
    predicted = predicted_root_count(inp.A)
    out.metadata["predicted"] = predicted
    out.complete = out.complete and len(out.points) == predicted
    return out


def weighted_khovanskii_solve(
    inp: KhovanskiiInput,
    seed=None,
    options: TrackerOptions | None = None,
    components: str = "one",
) -> SolveResult:
    """Khovanskii homotopy through the cover ``y_j -> y_j^{a_j}`` of weighted projective space.

    Args:
        components: "one" tracks a single component of the lifted toric fiber
            and accounts for the others by symmetry; "all" tracks every one.

    Raises:
        ValueError: "cover multiplicity mismatch" when every path succeeded
            but the number of lifted points is not the number of projected
            points times the cover degree.
    """
    if components not in ("one", "all"):
        raise ValueError("components must be 'one' or 'all'")
    a = list(inp.grading)
    if all(v == 1 for v in a):
        return khovanskii_solve(inp, seed=seed, options=options)
    n = inp.linear_block
    if n == 0 or any(v == 1 for v in a[n:]):
        raise ValueError("degree-one generators must come first")
    opts = options or TrackerOptions()
    rng = _rng(seed)
    N, d = inp.A.ncols, inp.d
    t0 = time.perf_counter()
    G, binomials = khovanskii_family(inp)
    F = [pullback_power_map(g, a) for g in G]
    p = toric_fiber_point(binomials, inp.A, seed=_child_seed(rng))
    maps = component_kodaira_maps(p, inp.A, a)
    C = [list(r) for r in maps[0].exponents]
    family = FlatFamily(tuple(F), N, d, None, tuple(map(tuple, C + [[1] * N])))
    sq = square_subsystem(family)
    L = inp.resolved_section()
    Lam = random_section(d, N, rng)
    setup = time.perf_counter() - t0
    used = maps if components == "all" else maps[:1]
    stage = toric_two_step(family, used, Lam, seed=rng, options=opts, square=sq)
    t0 = time.perf_counter()
    L_lift = np.hstack([L, np.zeros((d, N - n), dtype=complex)])
    W = WitnessSet([f.target() for f in F], Lam, stage.points, square=[g.target() for g in sq])
    moved, move_paths = witness_move(W, L_lift, seed=rng, options=opts)
    t_move = time.perf_counter() - t0
    lifted = moved.points
    projected = [ProjectivePoint(y.coords[:n]) for y in lifted]
    reps, clusters, ambiguous = dedup_points(projected)
    if ambiguous:
        log.warning("[weighted] %d ambiguous duplicate pairs; refining", len(ambiguous))
        reps, clusters, ambiguous = dedup_points(projected, tol=1e-6, guard=1e-6)
    cover = math.prod(a)
    total_lifted = len(lifted) * (len(maps) if components == "one" else 1)
    paths_ok = stage.complete and all(r.success and not r.crossed for r in move_paths)
    if paths_ok and total_lifted != cover * len(reps):
        raise AccountingError(
            f"cover multiplicity mismatch: {total_lifted} lifted points, {len(reps)} projected, cover degree {cover}"
        )
    predicted = predicted_root_count(inp.A)
    counts = dict(stage.counts)
    counts.update(pre_projection=len(lifted), final_points=len(reps))
    meta = dict(stage.metadata)
    meta.update(
        base_point=p,
        weight_vector=inp.A.weight(inp.weight),
        component_count=len(maps),
        components_tracked=len(used),
        cover_degree=cover,
        multiplicity=cover // len(maps) if maps else cover,
        predicted=predicted,
        Lambda=Lam,
    )
    return SolveResult(
        reps,
        [point_residual(inp, x, L) for x in reps],
        ["success"] * len(reps),
        [c[0] for c in clusters],
        counts,
        L,
        sparse_starts=stage.sparse_starts,
        start_points=stage.start_points,
        pre_projection=lifted,
        paths={**stage.paths, "witness_move": move_paths},
        metadata=meta,
        timings={"setup": setup, **stage.timings, "witness_move": t_move},
        complete=paths_ok and len(reps) == predicted,
    )


def predicted_root_count(A) -> int:
    """Normalized volume of the Newton-Okounkov body slice of ``A``."""
    rows = A.rows if isinstance(A, ValuationMatrix) else [list(r) for r in A]
    verts = lattice.no_body_slice(rows)
    if len(rows) == 1:
        return 1
    vol = lattice.normalized_volume(verts)
    if isinstance(vol, Fraction):
        raise ValueError(f"inconsistent valuation data: normalized volume {vol} is not an integer")
    return int(vol)
