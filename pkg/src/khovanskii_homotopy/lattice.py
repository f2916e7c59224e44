"""Exact integer lattices and lattice polytopes.

Everything here works over Python integers and :class:`fractions.Fraction`;
there is no floating point except in :func:`component_group`, which returns
roots of unity as complex numbers.

Matrices are plain lists of rows.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

__all__ = [
    "NonGenericLifting",
    "PolytopeCellComplex",
    "hnf",
    "snf",
    "determinant",
    "rank",
    "kernel_basis",
    "lll_reduce",
    "saturate",
    "lattice_index",
    "component_group",
    "annihilator_basis",
    "complete_to_unimodular",
    "normalized_volume",
    "no_body_slice",
    "regular_subdivision",
    "random_lifting",
    "identity",
    "matmul",
    "transpose",
]


class NonGenericLifting(ValueError):
    """The lifting produced a lower face that is not a simplex."""


def identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def transpose(M: Sequence[Sequence]) -> list[list]:
    return [list(r) for r in zip(*M)]


def matmul(A: Sequence[Sequence], B: Sequence[Sequence]) -> list[list]:
    Bt = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def _copy(M) -> list[list[int]]:
    return [[int(v) for v in row] for row in M]


def _shape(M) -> tuple[int, int]:
    m = len(M)
    n = len(M[0]) if m else 0
    if any(len(r) != n for r in M):
        raise ValueError("matrix is not rectangular")
    return m, n


def hnf(M: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]]]:
    """Row-style Hermite normal form.

    Returns ``(H, U)`` with ``U`` unimodular and ``U @ M == H``. ``H`` is in
    row echelon form, pivots are positive and the entries above each pivot lie
    in ``[0, pivot)``.
    """
    H = _copy(M)
    m, n = _shape(H)
    U = identity(m)
    r = 0
    for col in range(n):
        if r == m:
            break
        found = False
        while True:
            nz = [i for i in range(r, m) if H[i][col] != 0]
            if not nz:
                break
            found = True
            piv = min(nz, key=lambda i: abs(H[i][col]))
            H[r], H[piv] = H[piv], H[r]
            U[r], U[piv] = U[piv], U[r]
            clean = True
            for i in range(r + 1, m):
                if H[i][col]:
                    q = H[i][col] // H[r][col]
                    H[i] = [a - q * b for a, b in zip(H[i], H[r])]
                    U[i] = [a - q * b for a, b in zip(U[i], U[r])]
                    clean = clean and H[i][col] == 0
            if clean:
                break
        if not found:
            continue
        if H[r][col] < 0:
            H[r] = [-a for a in H[r]]
            U[r] = [-a for a in U[r]]
        for i in range(r):
            q = H[i][col] // H[r][col]
            if q:
                H[i] = [a - q * b for a, b in zip(H[i], H[r])]
                U[i] = [a - q * b for a, b in zip(U[i], U[r])]
        r += 1
    return H, U


def snf(M: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """Smith normal form ``(S, U, V)`` with ``U @ M @ V == S``.

    ``S`` is diagonal with nonnegative entries ``s_1 | s_2 | ...``.
    """
    S = _copy(M)
    m, n = _shape(S)
    U = identity(m)
    V = identity(n)

    def swap_rows(i, j):
        S[i], S[j] = S[j], S[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in S:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):  # row_dst -= q * row_src
        S[dst] = [a - q * b for a, b in zip(S[dst], S[src])]
        U[dst] = [a - q * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, q):  # col_dst -= q * col_src
        for row in S:
            row[dst] -= q * row[src]
        for row in V:
            row[dst] -= q * row[src]

    for k in range(min(m, n)):
        while True:
            entries = [(abs(S[i][j]), i, j) for i in range(k, m) for j in range(k, n) if S[i][j]]
            if not entries:
                return S, U, V
            _, i, j = min(entries)
            swap_rows(k, i)
            swap_cols(k, j)
            p = S[k][k]
            for i in range(k + 1, m):
                if S[i][k]:
                    add_row(i, k, S[i][k] // p)
            for j in range(k + 1, n):
                if S[k][j]:
                    add_col(j, k, S[k][j] // p)
            if any(S[i][k] for i in range(k + 1, m)) or any(S[k][j] for j in range(k + 1, n)):
                continue
            bad = next(
                (i for i in range(k + 1, m) for j in range(k + 1, n) if S[i][j] % p), None
            )
            if bad is not None:
                S[k] = [a + b for a, b in zip(S[k], S[bad])]
                U[k] = [a + b for a, b in zip(U[k], U[bad])]
                continue
            break
        if S[k][k] < 0:
            S[k] = [-a for a in S[k]]
            U[k] = [-a for a in U[k]]
    return S, U, V


def determinant(M: Sequence[Sequence]) -> int | Fraction:
    """Exact determinant (Bareiss for integers, Gaussian elimination otherwise)."""
    m, n = _shape(M)
    if m != n:
        raise ValueError("determinant of a non-square matrix")
    if m == 0:
        return 1
    if all(isinstance(v, int) for row in M for v in row):
        A = _copy(M)
        sign, prev = 1, 1
        for k in range(n - 1):
            if A[k][k] == 0:
                sw = next((i for i in range(k + 1, n) if A[i][k]), None)
                if sw is None:
                    return 0
                A[k], A[sw] = A[sw], A[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
            prev = A[k][k]
        return sign * A[n - 1][n - 1]
    A = [[Fraction(v) for v in row] for row in M]
    det = Fraction(1)
    for k in range(n):
        piv = next((i for i in range(k, n) if A[i][k]), None)
        if piv is None:
            return Fraction(0)
        if piv != k:
            A[k], A[piv] = A[piv], A[k]
            det = -det
        det *= A[k][k]
        for i in range(k + 1, n):
            f = A[i][k] / A[k][k]
            if f:
                A[i] = [a - f * b for a, b in zip(A[i], A[k])]
    return det


def _row_reduce(M) -> list[list[Fraction]]:
    A = [[Fraction(v) for v in row] for row in M]
    m = len(A)
    n = len(A[0]) if m else 0
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, m) if A[i][c]), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        for i in range(r + 1, m):
            f = A[i][c] / A[r][c]
            if f:
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        r += 1
        if r == m:
            break
    return A[:r]


def rank(M: Sequence[Sequence]) -> int:
    """Exact rank over the rationals."""
    if not M:
        return 0
    return len(_row_reduce(M))


def _solve_square(A: Sequence[Sequence], b: Sequence) -> list[Fraction] | None:
    n = len(A)
    aug = [[Fraction(v) for v in row] + [Fraction(bi)] for row, bi in zip(A, b)]
    for k in range(n):
        piv = next((i for i in range(k, n) if aug[i][k]), None)
        if piv is None:
            return None
        aug[k], aug[piv] = aug[piv], aug[k]
        for i in range(n):
            if i != k and aug[i][k]:
                f = aug[i][k] / aug[k][k]
                aug[i] = [a - f * c for a, c in zip(aug[i], aug[k])]
    return [aug[i][n] / aug[i][i] for i in range(n)]


def lll_reduce(basis: Sequence[Sequence[int]], delta: Fraction = Fraction(3, 4)) -> list[list[int]]:
    """LLL-reduce linearly independent integer vectors (exact arithmetic)."""
    B = _copy(basis)
    k = len(B)
    if k <= 1:
        return B

    def dot(u, v):
        return sum(a * b for a, b in zip(u, v))

    def gram_schmidt():
        Bs, mu = [], [[Fraction(0)] * k for _ in range(k)]
        norms = []
        for i in range(k):
            v = [Fraction(a) for a in B[i]]
            for j in range(i):
                mu[i][j] = Fraction(dot(B[i], Bs[j])) / norms[j] if norms[j] else Fraction(0)
                v = [a - mu[i][j] * b for a, b in zip(v, Bs[j])]
            Bs.append(v)
            norms.append(dot(v, v))
        return Bs, mu, norms

    Bs, mu, norms = gram_schmidt()
    i = 1
    while i < k:
        for j in range(i - 1, -1, -1):
            q = round(mu[i][j])
            if q:
                B[i] = [a - q * b for a, b in zip(B[i], B[j])]
                for l in range(j + 1):
                    mu[i][l] -= q * (mu[j][l] if l < j else 1)
        if norms[i] >= (delta - mu[i][i - 1] ** 2) * norms[i - 1]:
            i += 1
        else:
            B[i], B[i - 1] = B[i - 1], B[i]
            Bs, mu, norms = gram_schmidt()
            i = max(i - 1, 1)
    return B


def kernel_basis(M: Sequence[Sequence[int]], ncols: int | None = None, reduce: bool = True) -> list[list[int]]:
    """A basis of the integer lattice ``{v : M v = 0}``, LLL-reduced.

    The basis is saturated by construction. ``ncols`` is needed only when
    ``M`` has no rows.
    """
    if not M:
        if ncols is None:
            raise ValueError("ncols required for an empty matrix")
        return identity(ncols)
    m, n = _shape(M)
    H, U = hnf(transpose(M))
    zero_rows = [i for i in range(n) if not any(H[i])]
    basis = [U[i] for i in zero_rows]
    return lll_reduce(basis) if reduce and basis else basis


def saturate(K: Sequence[Sequence[int]]) -> list[list[int]]:
    """Basis of ``sat(K) = {w : r w in K for some r != 0}``."""
    if not K:
        return []
    n = len(K[0])
    perp = kernel_basis(K)
    if not perp:
        return identity(n)
    return kernel_basis(perp)


def _coordinates(sub: Sequence[Sequence[int]], basis: Sequence[Sequence[int]]) -> list[list[int]]:
    """Integer coordinates of the rows of ``sub`` in the lattice basis ``basis``."""
    r = len(basis)
    n = len(basis[0])
    # pick r independent columns of the basis to solve on
    cols: list[int] = []
    for j in range(n):
        if rank([[row[c] for c in cols + [j]] for row in basis]) > len(cols):
            cols.append(j)
        if len(cols) == r:
            break
    A = [[basis[i][c] for i in range(r)] for c in cols]  # r x r, column i = basis_i
    out = []
    for v in sub:
        x = _solve_square(A, [v[c] for c in cols])
        if x is None or any(xi.denominator != 1 for xi in x):
            raise ValueError("vector is not in the lattice")
        xi = [int(a) for a in x]
        if [sum(xi[i] * basis[i][j] for i in range(r)) for j in range(n)] != list(v):
            raise ValueError("vector is not in the lattice span")
        out.append(xi)
    return out


def lattice_index(K: Sequence[Sequence[int]]) -> int:
    """``|sat(K) / K|`` for independent vectors ``K``."""
    if not K:
        return 1
    S = saturate(K)
    T = _coordinates(K, S)
    return abs(determinant(T))


def component_group(K: Sequence[Sequence[int]], ambient: int | None = None) -> list[np.ndarray]:
    """The characters ``Hom(sat(K)/K, C^*)`` realized as torus points.

    Each element is a vector ``zeta`` of roots of unity in ``(C^*)^n`` such
    that ``zeta^k = 1`` for ``k`` in ``K`` and ``zeta^w`` runs through the
    character values on ``sat(K)``. The identity comes first.
    """
    if not K:
        if ambient is None:
            raise ValueError("ambient dimension required for an empty lattice")
        return [np.ones(ambient, dtype=complex)]
    n = len(K[0])
    S = saturate(K)
    T = _coordinates(K, S)  # K = T S
    D, U, V = snf(T)
    r = len(S)
    # basis S' = V^{-1} S of sat(K), with K spanned by d_i s'_i
    Vinv = _unimodular_inverse(V)
    Sp = matmul(Vinv, S)
    full = Sp + _complement_rows(Sp)
    orders = [D[i][i] for i in range(r)]
    # zeta = exp(full^{-1} logs); full is unimodular
    inv = np.array(_unimodular_inverse(full), dtype=float)
    group = []
    for ks in itertools.product(*(range(d) for d in orders)):
        logs = [2j * math.pi * k / d for k, d in zip(ks, orders)] + [0j] * (n - r)
        ell = inv @ np.array(logs, dtype=complex)
        group.append(np.exp(ell))
    return group


def _unimodular_inverse(M: Sequence[Sequence[int]]) -> list[list[int]]:
    n = len(M)
    inv = []
    for j in range(n):
        e = [int(i == j) for i in range(n)]
        x = _solve_square(M, e)
        if x is None or any(v.denominator != 1 for v in x):
            raise ValueError("matrix is not unimodular")
        inv.append([int(v) for v in x])
    return transpose(inv)


def _complement_rows(B: Sequence[Sequence[int]]) -> list[list[int]]:
    """Rows completing a saturated lattice basis ``B`` to a basis of ``Z^n``."""
    n = len(B[0])
    S, U, V = snf(B)
    if any(S[i][i] != 1 for i in range(len(B))):
        raise ValueError("lattice is not saturated")
    Vinv = _unimodular_inverse(V)
    return [Vinv[i] for i in range(len(B), n)]


def complete_to_unimodular(B: Sequence[Sequence[int]]) -> list[list[int]]:
    """Rows of ``B`` followed by rows completing it to a unimodular matrix."""
    return [list(r) for r in B] + _complement_rows(B)


def annihilator_basis(K: Sequence[Sequence[int]], ambient: int) -> list[list[int]]:
    """Rows ``gamma_1, ..., gamma_d, 1`` spanning ``{w : w . v = 0 for v in K}``.

    The ``gamma`` rows are LLL-reduced and shifted by multiples of the all-ones
    row so each has minimum entry 0.
    """
    ones = [1] * ambient
    for v in K:
        if sum(v) != 0:
            raise ValueError("lattice not degree-compatible")
    if K:
        ann = kernel_basis(K)
    else:
        ann = identity(ambient)
    coords = _coordinates([ones], ann)[0]
    if math.gcd(*coords) != 1:
        raise ValueError("all-ones vector is not primitive in the annihilator")
    W = complete_to_unimodular([coords])  # first row = coords
    rows = matmul(W, ann)
    gammas = rows[1:]
    if gammas:
        gammas = lll_reduce(gammas)
    gammas = [[g - min(row) for g in row] for row in gammas]
    # the ones row spans with gammas the same lattice; shifts keep that true
    return gammas + [ones]


# --------------------------------------------------------------------------
# polytopes


@dataclass(frozen=True)
class PolytopeCellComplex:
    """A regular subdivision: maximal cells as index tuples into ``points``.

    ``normals[i] = (c, c0)`` is the affine function ``c . x + c0`` that
    interpolates the lifting on cell ``i`` and lies strictly below it
    elsewhere.
    """

    points: tuple[tuple, ...]
    cells: tuple[tuple[int, ...], ...]
    lifting: tuple
    normals: tuple[tuple[tuple[Fraction, ...], Fraction], ...]

    def cell_volumes(self) -> list[int | Fraction]:
        return [_simplex_nvol([self.points[i] for i in c]) for c in self.cells]


def _affine_rank(points: Sequence[Sequence]) -> int:
    p0 = points[0]
    return rank([[Fraction(a) - Fraction(b) for a, b in zip(p, p0)] for p in points[1:]]) if len(points) > 1 else 0


def _simplex_nvol(simplex: Sequence[Sequence]):
    p0 = simplex[0]
    M = [[Fraction(a) - Fraction(b) for a, b in zip(p, p0)] for p in simplex[1:]]
    v = abs(determinant(M))
    return int(v) if isinstance(v, Fraction) and v.denominator == 1 else v


def random_lifting(npoints: int, rng: np.random.Generator, high: int = 2**20) -> list[int]:
    return [int(v) for v in rng.integers(0, high, size=npoints)]


def regular_subdivision(points: Sequence[Sequence], lifting: Sequence) -> PolytopeCellComplex:
    """Project the lower hull of the lifted point configuration.

    Every ``(d+1)``-subset is tested as a candidate lower facet, which is fine
    for the small configurations met here. Raises :class:`NonGenericLifting`
    if a lower face contains more than ``d + 1`` points.
    """
    pts = [tuple(Fraction(v) for v in p) for p in points]
    if len(lifting) != len(pts):
        raise ValueError("lifting and point counts differ")
    if len(set(pts)) != len(pts):
        raise ValueError("repeated points")
    d = len(pts[0])
    if _affine_rank(pts) != d:
        raise ValueError("not full-dimensional")
    w = [Fraction(v) for v in lifting]
    cells, normals = [], []
    for S in itertools.combinations(range(len(pts)), d + 1):
        A = [list(pts[j]) + [Fraction(1)] for j in S]
        sol = _solve_square(A, [w[j] for j in S])
        if sol is None:
            continue
        c, c0 = sol[:d], sol[d]
        lower, touching = True, False
        for k in range(len(pts)):
            if k in S:
                continue
            gap = w[k] - (sum(ci * xi for ci, xi in zip(c, pts[k])) + c0)
            if gap < 0:
                lower = False
                break
            if gap == 0:
                touching = True
        if not lower:
            continue
        if touching:
            raise NonGenericLifting(f"lower face through {S} is not a simplex")
        cells.append(S)
        normals.append((tuple(c), c0))
    return PolytopeCellComplex(tuple(tuple(p) for p in points), tuple(cells), tuple(lifting), tuple(normals))


def _triangulate(points, seed: int = 0, max_tries: int = 50) -> PolytopeCellComplex:
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        try:
            return regular_subdivision(points, random_lifting(len(points), rng))
        except NonGenericLifting:
            continue
    raise RuntimeError("could not find a generic lifting")


def normalized_volume(points: Sequence[Sequence]) -> int | Fraction:
    """``d!`` times the Euclidean volume of the convex hull of ``points``."""
    pts = list(dict.fromkeys(tuple(Fraction(v) for v in p) for p in points))
    if not pts:
        raise ValueError("not full-dimensional")
    d = len(pts[0])
    if d == 0 or _affine_rank(pts) != d:
        raise ValueError("not full-dimensional")
    cx = _triangulate(pts)
    total = sum(Fraction(v) for v in cx.cell_volumes())
    return int(total) if total.denominator == 1 else total


def _in_simplex(p, simplex) -> bool:
    d = len(p)
    A = [[Fraction(simplex[j][i]) for j in range(d + 1)] for i in range(d)] + [[Fraction(1)] * (d + 1)]
    lam = _solve_square(A, list(p) + [Fraction(1)])
    return lam is not None and all(l >= 0 for l in lam)


def _hull_vertices(pts: list[tuple[Fraction, ...]]) -> list[tuple[Fraction, ...]]:
    d = len(pts[0])
    verts = []
    for i, p in enumerate(pts):
        others = pts[:i] + pts[i + 1:]
        if len(others) < d + 1 or _affine_rank(others) < d:
            verts.append(p)
            continue
        cx = _triangulate(others, seed=i)
        if not any(_in_simplex(p, [others[j] for j in c]) for c in cx.cells):
            verts.append(p)
    return sorted(verts)


def no_body_slice(A: Sequence[Sequence[int]]) -> list[tuple[Fraction, ...]]:
    """Vertices of the degree-one slice of the cone over the columns of ``A``.

    The last row of ``A`` is the grading; column ``j`` contributes the point
    ``A[:-1, j] / A[-1, j]``.
    """
    grading = A[-1]
    if any(g <= 0 for g in grading):
        raise ValueError("grading entries must be positive")
    cols = list(zip(*A[:-1])) if len(A) > 1 else [() for _ in grading]
    pts = list(dict.fromkeys(tuple(Fraction(v, g) for v in col) for col, g in zip(cols, grading)))
    return _hull_vertices(pts)
