"""Predictor-corrector path tracking for square homotopies.

A homotopy is any object with

* ``nvars`` and ``nequations``,
* ``evaluate(x, s) -> (H, dH/dx, dH/ds)`` for ``s`` in ``[0, 1]``,
* ``residual(x, s) -> float`` (relative, scale free),
* ``endpoint(x)`` converting the final iterate into the reported point,

and optionally ``repatch(x, rng) -> (homotopy, x)`` for homotopies living in
an affine patch of projective space.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .poly import HomotopyPolynomial, PolySystem, SparsePolynomial
from .toric import ProjectivePoint, projective_distance

__all__ = [
    "TrackerOptions",
    "GammaArc",
    "PathResult",
    "SquareHomotopy",
    "AffineHomotopy",
    "track",
    "refine",
    "affine_patch",
    "random_gamma",
    "random_patch",
]

log = logging.getLogger(__name__)

SUCCESS = "success"
DIVERGED = "diverged"
MAX_STEPS = "max_steps"
CORRECTOR_FAILURE = "corrector_failure"


@dataclass(frozen=True)
class TrackerOptions:
    initial_step: float = 0.05
    max_step: float = 0.1
    min_step: float = 1e-7
    corrector_tol: float = 1e-10
    max_corrector_iterations: int = 3
    step_growth: float = 1.5
    step_shrink: float = 0.5
    successes_before_growth: int = 5
    max_steps: int = 10_000
    divergence_threshold: float = 1e8
    start_tol: float = 1e-8
    end_tol: float = 1e-10
    refine_tol: float = 1e-12
    max_refine_iterations: int = 8
    separation_tol: float = 1e-6
    workers: int = 1


@dataclass(frozen=True)
class GammaArc:
    """``t(s) = gamma s / (gamma s + 1 - s)``, a complex arc from 0 to 1."""

    gamma: complex = 1.0

    def t(self, s: float) -> complex:
        return self.gamma * s / (self.gamma * s + (1 - s))

    def dt(self, s: float) -> complex:
        return self.gamma / (self.gamma * s + (1 - s)) ** 2


def random_gamma(rng: np.random.Generator) -> complex:
    """A random unit complex number with ``0.1 <= |arg| <= pi/2``.

    Keeping ``Re gamma >= 0`` bounds ``|t(s)|`` by ``sqrt(2)`` along the arc,
    which matters for families with high powers of ``t``.
    """
    theta = rng.uniform(0.1, math.pi / 2) * rng.choice([-1, 1])
    return complex(np.exp(1j * theta))


def random_patch(n: int, rng: np.random.Generator) -> np.ndarray:
    return np.exp(2j * np.pi * rng.random(n))


@dataclass
class PathResult:
    start: np.ndarray
    end: object
    status: str
    steps: int
    residual: float
    condition: float
    refine_iterations: int = 0
    crossed: bool = False
    raw: np.ndarray | None = None

    @property
    def success(self) -> bool:
        return self.status == SUCCESS


class SquareHomotopy:
    """Polynomial equations, moving linear sections and a patch, tracked along a gamma arc.

    The unknowns are homogeneous coordinates ``x`` in ``C^N``. The equations
    are ``F(x; t)``, the section ``(1 - t) L0 x + t L1 x`` and the patch
    ``r . x - 1``, with ``t = t(s)`` on a :class:`GammaArc`.
    """

    def __init__(
        self,
        equations: Sequence[HomotopyPolynomial | SparsePolynomial],
        start_section=None,
        end_section=None,
        patch=None,
        gamma: complex = 1.0,
        seed=None,
    ):
        self.equations = list(equations)
        self.system = PolySystem(self.equations) if self.equations else None
        n = self.equations[0].nvars if self.equations else np.atleast_2d(start_section).shape[1]
        self.nvars = n
        if start_section is None:
            start_section = np.zeros((0, n), dtype=complex)
        L0 = np.atleast_2d(np.asarray(start_section, dtype=complex)).reshape(-1, n)
        L1 = L0 if end_section is None else np.atleast_2d(np.asarray(end_section, dtype=complex)).reshape(-1, n)
        if L0.shape != L1.shape:
            raise ValueError("start and end sections have different shapes")
        self.L0, self.L1 = L0, L1
        rng = np.random.default_rng(seed)
        self.patch = random_patch(n, rng) if patch is None else np.asarray(patch, dtype=complex)
        self.arc = GammaArc(complex(gamma))
        self.seed = seed
        self.nequations = len(self.equations) + L0.shape[0] + 1
        if self.nequations != n:
            raise ValueError(f"homotopy is not square: {self.nequations} equations in {n} unknowns")

    def section(self, s: float) -> np.ndarray:
        t = self.arc.t(s)
        return (1 - t) * self.L0 + t * self.L1

    def evaluate(self, x, s):
        t = self.arc.t(s)
        dt = self.arc.dt(s)
        n = self.nvars
        parts_H, parts_J, parts_s = [], [], []
        if self.system is not None:
            F, J, Ft = self.system.values_and_jacobian(x, t)
            parts_H.append(F)
            parts_J.append(J)
            parts_s.append(Ft * dt)
        L = (1 - t) * self.L0 + t * self.L1
        parts_H.append(L @ x)
        parts_J.append(L)
        parts_s.append(((self.L1 - self.L0) @ x) * dt)
        parts_H.append(np.array([self.patch @ x - 1]))
        parts_J.append(self.patch.reshape(1, n))
        parts_s.append(np.zeros(1, dtype=complex))
        return np.concatenate(parts_H), np.vstack(parts_J), np.concatenate(parts_s)

    def residual(self, x, s=1.0) -> float:
        """Largest relative residual of the equations and section rows.

        Each row is scaled by the sum of the moduli of its terms at the
        max-modulus-normalized representative, so the value is scale free.
        """
        x = np.asarray(x, dtype=complex)
        x = x / x[np.argmax(np.abs(x))]
        t = self.arc.t(s)
        res = 0.0
        if self.system is not None:
            res = self.system.relative_residual(x, t)
        L = self.section(s)
        if L.shape[0]:
            num = np.abs(L @ x)
            den = np.abs(L) @ np.abs(x)
            res = max(res, float(np.max(num / np.maximum(den, np.finfo(float).tiny))))
        return res

    def repatch(self, x, rng):
        new = SquareHomotopy.__new__(SquareHomotopy)
        new.__dict__.update(self.__dict__)
        new.patch = random_patch(self.nvars, rng)
        return new, x / (new.patch @ x)

    def endpoint(self, x) -> ProjectivePoint:
        return ProjectivePoint(x)

    def start_point(self, x) -> np.ndarray:
        """Scale homogeneous coordinates onto the patch."""
        x = np.asarray(getattr(x, "coords", x), dtype=complex)
        return x / (self.patch @ x)


class AffineHomotopy:
    """``H(x, t(s))`` for a square system of homotopy polynomials, no patch."""

    def __init__(self, equations: Sequence[HomotopyPolynomial], gamma: complex = 1.0):
        self.system = PolySystem(equations)
        self.nvars = self.system.nvars
        self.nequations = len(self.system)
        if self.nequations != self.nvars:
            raise ValueError(f"homotopy is not square: {self.nequations} equations in {self.nvars} unknowns")
        self.arc = GammaArc(complex(gamma))

    def evaluate(self, x, s):
        F, J, Ft = self.system.values_and_jacobian(x, self.arc.t(s))
        return F, J, Ft * self.arc.dt(s)

    def residual(self, x, s=1.0) -> float:
        return self.system.relative_residual(x, self.arc.t(s))

    def endpoint(self, x) -> np.ndarray:
        return np.array(x, dtype=complex)

    def start_point(self, x) -> np.ndarray:
        return np.asarray(x, dtype=complex)


def affine_patch(equations: Sequence, seed=None, gamma: complex = 1.0) -> SquareHomotopy:
    """Close ``N - 1`` homogeneous equations in ``N`` coordinates with a random patch."""
    return SquareHomotopy(equations, patch=None, gamma=gamma, seed=seed)


# --------------------------------------------------------------------------


def _newton(H, x, s, tol, maxit):
    """Up to ``maxit`` Newton steps at fixed ``s``; returns (x, converged, iterations)."""
    for it in range(1, maxit + 1):
        F, J, _ = H.evaluate(x, s)
        try:
            dx = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            return x, False, it
        x = x + dx
        if not np.all(np.isfinite(x)):
            return x, False, it
        if np.linalg.norm(dx) <= tol * (1 + np.linalg.norm(x)):
            return x, True, it
    return x, False, maxit


def _tangent(H, x, s):
    _, J, Hs = H.evaluate(x, s)
    return np.linalg.solve(J, -Hs)


def _rk4(H, x, s, h):
    k1 = _tangent(H, x, s)
    k2 = _tangent(H, x + 0.5 * h * k1, s + 0.5 * h)
    k3 = _tangent(H, x + 0.5 * h * k2, s + 0.5 * h)
    k4 = _tangent(H, x + h * k3, s + h)
    return x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _track_one(H, start, opts: TrackerOptions, rng) -> PathResult:
    x = H.start_point(start)
    x0 = x.copy()
    x, ok, _ = _newton(H, x, 0.0, opts.corrector_tol, opts.max_corrector_iterations)
    if not ok and H.residual(x, 0.0) > opts.start_tol:
        return PathResult(x0, None, CORRECTOR_FAILURE, 0, H.residual(x, 0.0), math.inf, raw=x)
    s, h = 0.0, opts.initial_step
    steps = successes = 0
    repatched = False
    while s < 1.0:
        if steps >= opts.max_steps:
            return PathResult(x0, None, MAX_STEPS, steps, H.residual(x, s), math.inf, raw=x)
        steps += 1
        h = min(h, 1.0 - s)
        s_new = 1.0 if 1.0 - (s + h) < 1e-14 else s + h
        try:
            pred = _rk4(H, x, s, s_new - s)
            xn, ok, _ = _newton(H, pred, s_new, opts.corrector_tol, opts.max_corrector_iterations)
        except (np.linalg.LinAlgError, FloatingPointError, ValueError, ZeroDivisionError):
            ok = False
        if ok:
            x, s = xn, s_new
            successes += 1
            if successes >= opts.successes_before_growth:
                h = min(h * opts.step_growth, opts.max_step)
                successes = 0
        else:
            successes = 0
            h *= opts.step_shrink
            if h < opts.min_step:
                return PathResult(x0, None, CORRECTOR_FAILURE, steps, H.residual(x, s), math.inf, raw=x)
        if np.max(np.abs(x)) > opts.divergence_threshold:
            if hasattr(H, "repatch") and not repatched:
                H, x = H.repatch(x, rng)
                repatched = True
            else:
                return PathResult(x0, None, DIVERGED, steps, math.inf, math.inf, raw=x)
    # endpoint refinement at s = 1
    iters = 0
    for iters in range(1, opts.max_refine_iterations + 1):
        F, J, _ = H.evaluate(x, 1.0)
        try:
            dx = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            break
        x = x + dx
        if np.linalg.norm(dx) <= opts.refine_tol * (1 + np.linalg.norm(x)):
            break
    _, J, _ = H.evaluate(x, 1.0)
    cond = float(np.linalg.cond(J))
    res = H.residual(x, 1.0)
    status = SUCCESS if res <= opts.end_tol else CORRECTOR_FAILURE
    end = H.endpoint(x) if np.all(np.isfinite(x)) else None
    return PathResult(x0, end, status, steps, res, cond, refine_iterations=iters, raw=x)


def _point_distance(a, b) -> float:
    if isinstance(a, ProjectivePoint):
        return projective_distance(a, b)
    a = np.asarray(a)
    b = np.asarray(b)
    return float(np.linalg.norm(a - b) / (1 + max(np.linalg.norm(a), np.linalg.norm(b))))


def close_pairs(points: Sequence, tol: float) -> list[tuple[int, int]]:
    pairs = []
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            if points[i] is not None and points[j] is not None and _point_distance(points[i], points[j]) < tol:
                pairs.append((i, j))
    return pairs


def track(H, starts: Sequence, opts: TrackerOptions | None = None, seed=None, check_distinct: bool = True) -> list[PathResult]:
    """Track every start point from ``s = 0`` to ``s = 1``.

    Results are in start order. With ``check_distinct`` (the homotopy is
    expected to be optimal) endpoints closer than ``opts.separation_tol`` are
    re-tracked with half the step cap and a tighter corrector; pairs that
    stay close are flagged ``crossed``.
    """
    opts = opts or TrackerOptions()
    if getattr(H, "nequations", H.nvars) != H.nvars:
        raise ValueError("homotopy is not square")
    seeds = np.random.SeedSequence(seed).spawn(len(starts))

    def run(args, o=opts):
        i, st = args
        return _track_one(H, st, o, np.random.default_rng(seeds[i]))

    items = list(enumerate(starts))
    if opts.workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=opts.workers) as pool:
            results = list(pool.map(run, items))
    else:
        results = [run(it) for it in items]
    if check_distinct:
        ends = [r.end if r.success else None for r in results]
        pairs = close_pairs(ends, opts.separation_tol)
        if pairs:
            tighter = replace(opts, max_step=opts.max_step / 2, corrector_tol=opts.corrector_tol / 10)
            redo = sorted({i for p in pairs for i in p})
            log.warning("re-tracking %d paths with close endpoints", len(redo))
            for i in redo:
                results[i] = run((i, starts[i]), tighter)
            ends = [r.end if r.success else None for r in results]
            for i, j in close_pairs(ends, opts.separation_tol):
                results[i].crossed = results[j].crossed = True
    return results


def refine(system, point, target_tol: float = 1e-12, max_iterations: int = 20) -> np.ndarray:
    """Newton's method on a square polynomial system until ``|F| <= target_tol``.

    ``system`` is a :class:`PolySystem` or a sequence of sparse polynomials.
    Raises ``RuntimeError("refinement failed")`` if the residual does not
    reach the target.
    """
    sysm = system if isinstance(system, PolySystem) else PolySystem(system)
    if len(sysm) != sysm.nvars:
        raise ValueError("refine needs a square system")
    x = np.array(point, dtype=complex)
    F = sysm.values(x)
    for _ in range(max_iterations):
        if np.max(np.abs(F)) <= target_tol:
            return x
        _, J, _ = sysm.values_and_jacobian(x)
        try:
            x = x + np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            break
        F = sysm.values(x)
        if not np.all(np.isfinite(F)):
            break
    if np.max(np.abs(F)) <= target_tol:
        return x
    raise RuntimeError("refinement failed")
