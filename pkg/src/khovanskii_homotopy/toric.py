"""Translated toric varieties: base points, monomial maps and binomial systems."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import lattice
from .poly import SparsePolynomial, grevlex_key

__all__ = [
    "ValuationMatrix",
    "ProjectivePoint",
    "BinomialEquation",
    "MonomialMap",
    "extract_binomials",
    "solve_binomial_torus",
    "toric_fiber_point",
    "normalize_base_point",
    "kodaira_map_from_point",
    "evaluate_map",
    "sparse_section_system",
    "component_kodaira_maps",
    "projective_distance",
]


class ValuationMatrix:
    """Integer matrix of valuations; the last row is the (positive) grading.

    Args:
        rows: ``(d+1) x N`` integer matrix.
        check_generation: also require the columns to generate ``Z^{d+1}``.
    """

    def __init__(self, rows: Sequence[Sequence[int]], check_generation: bool = True):
        rows = [[int(v) for v in r] for r in rows]
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("valuation matrix must be a nonempty rectangular matrix")
        self.rows = rows
        if any(g <= 0 for g in self.grading):
            raise ValueError("grading row entries must be positive")
        if math.gcd(*self.grading) != 1:
            raise ValueError("grading entries must be coprime")
        r = lattice.rank(rows)
        if r != len(rows):
            raise ValueError(f"valuation matrix has rank {r}, expected {len(rows)}")
        if check_generation:
            S, _, _ = lattice.snf(rows)
            factors = [S[i][i] for i in range(len(rows))]
            if any(f != 1 for f in factors):
                raise ValueError(f"columns do not generate the lattice (invariant factors {factors})")

    @property
    def grading(self) -> list[int]:
        return self.rows[-1]

    @property
    def d(self) -> int:
        return len(self.rows) - 1

    @property
    def ncols(self) -> int:
        return len(self.rows[0])

    @property
    def exponents(self) -> list[list[int]]:
        """The matrix without its grading row."""
        return [list(r) for r in self.rows[:-1]]

    def columns(self) -> list[tuple[int, ...]]:
        return list(zip(*self.rows))

    def weight(self, w: Sequence[int]) -> list[int]:
        """The composite weight ``w A`` on the ambient variables."""
        if len(w) != len(self.rows):
            raise ValueError(f"weight has length {len(w)}, expected {len(self.rows)}")
        return [sum(int(w[i]) * self.rows[i][j] for i in range(len(w))) for j in range(self.ncols)]

    def kernel(self) -> list[list[int]]:
        return lattice.kernel_basis(self.rows)

    def __repr__(self) -> str:
        return f"ValuationMatrix({self.rows})"


def projective_distance(p, q) -> float:
    """Sine of the angle between the lines through ``p`` and ``q``.

    Computed as the norm of the part of ``p`` orthogonal to ``q`` (unit
    representatives), which stays accurate for nearby points where
    ``sqrt(1 - |<p, q>|^2)`` bottoms out at ``sqrt(eps)``.
    """
    p = np.asarray(getattr(p, "coords", p), dtype=complex)
    q = np.asarray(getattr(q, "coords", q), dtype=complex)
    p = p / np.linalg.norm(p)
    q = q / np.linalg.norm(q)
    return float(min(1.0, np.linalg.norm(p - q * np.vdot(q, p))))


class ProjectivePoint:
    """A point of projective space, stored with its max-modulus coordinate 1."""

    __slots__ = ("coords",)

    def __init__(self, coords):
        x = np.array(coords, dtype=complex).ravel()
        mags = np.abs(x)
        if not np.all(np.isfinite(x)) or mags.max(initial=0.0) == 0:
            raise ValueError("projective point needs finite, not all zero coordinates")
        # first index within rounding of the maximum keeps the choice stable
        i = int(np.flatnonzero(mags >= mags.max() * (1 - 1e-12))[0])
        x = x / x[i]
        x.setflags(write=False)
        self.coords = x

    def __len__(self) -> int:
        return len(self.coords)

    def __repr__(self) -> str:
        return "ProjectivePoint([" + ", ".join(f"{c:.6g}" for c in self.coords) + "])"

    def dehomogenize(self, index: int = 0) -> np.ndarray:
        if self.coords[index] == 0:
            raise ZeroDivisionError(f"coordinate {index} vanishes")
        return self.coords / self.coords[index]

    def distance(self, other) -> float:
        return projective_distance(self, other)


@dataclass(frozen=True)
class BinomialEquation:
    """``x^u - c x^v``."""

    u: tuple[int, ...]
    v: tuple[int, ...]
    c: complex

    def __post_init__(self):
        if tuple(self.u) == tuple(self.v):
            raise ValueError("binomial with u == v")
        if self.c == 0:
            raise ValueError("binomial constant must be nonzero")

    @property
    def difference(self) -> list[int]:
        return [a - b for a, b in zip(self.u, self.v)]

    def __call__(self, x) -> complex:
        x = np.asarray(x, dtype=complex)
        return complex(np.prod(x ** np.array(self.u)) - self.c * np.prod(x ** np.array(self.v)))

    def relative_residual(self, x) -> float:
        x = np.asarray(x, dtype=complex)
        a = np.prod(x ** np.array(self.u))
        b = self.c * np.prod(x ** np.array(self.v))
        return float(abs(a - b) / max(abs(a) + abs(b), np.finfo(float).tiny))


def extract_binomials(G0: Sequence[SparsePolynomial]) -> list[BinomialEquation]:
    """Read ``x^u - c x^v`` off two-term polynomials.

    ``x^u`` is the grevlex-larger term (``x0 > x1 > ...``) and is made monic.
    """
    out = []
    for i, g in enumerate(G0):
        if len(g) != 2:
            raise ValueError(f"non-binomial special fiber generator #{i} ({len(g)} terms): {g!r}")
        (e1, c1), (e2, c2) = sorted(g.items(), key=lambda t: grevlex_key(t[0]), reverse=True)
        out.append(BinomialEquation(tuple(e1), tuple(e2), -c2 / c1))
    return out


def solve_binomial_torus(relations: Sequence[tuple[Sequence[int], complex]], k: int) -> list[np.ndarray]:
    """All ``p`` in ``(C^*)^k`` with ``p^{m_i} = c_i``.

    The relation matrix is brought to Smith form ``U M V = S``; in the new
    coordinates the system is diagonal and solved by ``s_i``-th roots. The
    number of solutions is the product of the invariant factors.
    """
    if not relations:
        if k == 0:
            return [np.zeros(0, dtype=complex)]
        raise ValueError("infinitely many solutions")
    M = [[int(v) for v in m] for m, _ in relations]
    if any(len(r) != k for r in M):
        raise ValueError(f"relation vectors must have length {k}")
    cs = np.array([complex(c) for _, c in relations])
    if np.any(cs == 0):
        raise ValueError("binomial constants must be nonzero")
    S, U, V = lattice.snf(M)
    r = len(M)
    diag = [S[i][i] if i < k else 0 for i in range(min(r, k))]
    if len(diag) < k or any(s == 0 for s in diag):
        raise ValueError("infinitely many solutions")
    logc = np.log(cs)
    Uf = np.array(U, dtype=float)
    newlog = Uf @ logc
    # extra rows of S are zero: the transformed constants there must be 1
    for i in range(k, r):
        if abs(np.exp(newlog[i]) - 1) > 1e-8:
            return []
    Vf = np.array(V, dtype=float)
    sols = []
    for ks in itertools.product(*(range(s) for s in diag)):
        ell = np.array([(newlog[i] + 2j * math.pi * ks[i]) / diag[i] for i in range(k)])
        sols.append(np.exp(Vf @ ell))
    return sols


def normalize_base_point(p, A: ValuationMatrix) -> np.ndarray:
    """Move ``p`` along its torus orbit so it is 1 on the first spanning columns.

    The orbit of ``p`` under ``(z, lam) -> p_j z^{alpha_j} lam^{a_j}`` is the
    toric fiber itself, so this only picks a canonical representative.
    """
    p = np.asarray(p, dtype=complex)
    cols = A.columns()
    chosen: list[int] = []
    for j in range(len(cols)):
        if lattice.rank([cols[i] for i in chosen + [j]]) > len(chosen):
            chosen.append(j)
        if len(chosen) == len(A.rows):
            break
    rel = [(cols[j], 1 / p[j]) for j in chosen]
    w = solve_binomial_torus(rel, len(A.rows))[0]
    scale = np.array([np.prod(w ** np.array(c)) for c in cols])
    return p * scale


def toric_fiber_point(
    binomials: Sequence[BinomialEquation], A: ValuationMatrix, seed=None
) -> np.ndarray:
    """A point of the toric fiber with all coordinates nonzero.

    Binomials whose exponent differences give a rational basis of ``ker A``
    are completed by vectors of ``ker(grading)`` carrying random unit
    constants; one solution of the resulting square binomial system is
    returned, normalized with :func:`normalize_base_point`.
    """
    rng = np.random.default_rng(seed)
    N = A.ncols
    target = N - len(A.rows)
    diffs: list[list[int]] = []
    consts: list[complex] = []
    for b in binomials:
        dv = b.difference
        if any(sum(r[j] * dv[j] for j in range(N)) for r in A.rows):
            raise ValueError(f"binomial {b} is not homogeneous for the valuation matrix")
        if lattice.rank(diffs + [dv]) > len(diffs):
            diffs.append(dv)
            consts.append(b.c)
        if len(diffs) == target:
            break
    if len(diffs) < target:
        raise ValueError(f"special fiber underdetermined: rank {len(diffs)} < {target}")
    for v in lattice.kernel_basis([A.grading]):
        if len(diffs) == N - 1:
            break
        if lattice.rank(diffs + [v]) > len(diffs):
            diffs.append(v)
            consts.append(np.exp(2j * math.pi * rng.random()))
    # p_0 = 1 fixes the weighted scaling
    rel = [(m[1:], c) for m, c in zip(diffs, consts)]
    p = np.concatenate([[1.0 + 0j], solve_binomial_torus(rel, N - 1)[0]])
    return normalize_base_point(p, A)


@dataclass(frozen=True, eq=False)
class MonomialMap:
    """``z -> [base_j z^{alpha_j}]`` with ``alpha_j`` the columns of ``exponents``."""

    base: np.ndarray
    exponents: tuple[tuple[int, ...], ...]
    _cols: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        base = np.array(self.base, dtype=complex)
        if np.any(base == 0):
            raise ValueError("base point must lie in the torus")
        base.setflags(write=False)
        object.__setattr__(self, "base", base)
        exps = tuple(tuple(int(v) for v in row) for row in self.exponents)
        object.__setattr__(self, "exponents", exps)
        cols = np.array(exps, dtype=np.int64).reshape(len(exps), len(base)).T
        object.__setattr__(self, "_cols", cols)

    @property
    def dim(self) -> int:
        return len(self.exponents)

    @property
    def ambient(self) -> int:
        return len(self.base)

    def affine(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if z.shape != (self.dim,):
            raise ValueError(f"torus point must have {self.dim} coordinates")
        if np.any(z == 0):
            raise ValueError("not in torus")
        return self.base * np.prod(z[None, :] ** self._cols, axis=1)

    def __call__(self, z) -> ProjectivePoint:
        return ProjectivePoint(self.affine(z))

    def __eq__(self, other) -> bool:
        if not isinstance(other, MonomialMap):
            return NotImplemented
        return self.exponents == other.exponents and np.array_equal(self.base, other.base)

    __hash__ = None


def kodaira_map_from_point(p, A: ValuationMatrix | Sequence[Sequence[int]]) -> MonomialMap:
    exps = A.exponents if isinstance(A, ValuationMatrix) else [list(r) for r in A]
    return MonomialMap(np.asarray(p, dtype=complex), tuple(map(tuple, exps)))


def evaluate_map(phi: MonomialMap, z) -> ProjectivePoint:
    return phi(z)


def sparse_section_system(L, phi: MonomialMap) -> tuple[list[list[int]], np.ndarray]:
    """Pull the linear forms ``L`` back along ``phi``.

    Equation ``i`` is ``sum_j (L_ij base_j) z^{alpha_j}``; all equations share
    the support ``phi.exponents``.
    """
    L = np.atleast_2d(np.asarray(L, dtype=complex))
    if L.shape[1] != phi.ambient:
        raise ValueError(f"section has {L.shape[1]} columns, map has {phi.ambient} coordinates")
    return [list(r) for r in phi.exponents], L * phi.base[None, :]


def component_kodaira_maps(p, A: ValuationMatrix, a: Sequence[int]) -> list[MonomialMap]:
    """Monomial maps onto the components of the pullback of a toric fiber.

    ``p`` is a torus point of the (weighted) toric fiber with valuation matrix
    ``A``, and the cover is ``y_j -> y_j^{a_j}``. One map per element of
    ``Hom(sat(K)/K, C^*)``, where ``K`` is spanned by the kernel vectors of
    ``A`` with coordinate ``j`` scaled by ``a_j``. The identity component
    comes first.
    """
    a = [int(v) for v in a]
    p = np.asarray(p, dtype=complex)
    if all(v == 1 for v in a):
        return [kodaira_map_from_point(p, A)]
    N = A.ncols
    K = [[aj * uj for aj, uj in zip(a, u)] for u in A.kernel()]
    C = lattice.annihilator_basis(K, N)[:-1]
    q = p ** (1.0 / np.array(a, dtype=float))
    return [MonomialMap(q * zeta, tuple(map(tuple, C))) for zeta in lattice.component_group(K, N)]
