"""Sparse complex polynomials, weight deformations and evaluation.

Two immutable containers live here:

* :class:`SparsePolynomial` -- ``sum c_a x^a`` with complex coefficients,
  stored as an exponent-keyed map in graded-lexicographic order.
* :class:`HomotopyPolynomial` -- the same with an extra integer power of the
  deformation parameter ``t`` on every term.

Weight degenerations ``f -> (t.f) t^{-w(f)}`` are produced by :func:`deform`;
:func:`pullback_power_map` implements ``x_j -> y_j^{a_j}``.
"""
from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from numbers import Integral

import numpy as np

__all__ = [
    "PoleError",
    "SparsePolynomial",
    "HomotopyPolynomial",
    "PolySystem",
    "weight_value",
    "initial_form",
    "deform",
    "specialize_t",
    "pullback_power_map",
    "is_weighted_homogeneous",
    "evaluate",
    "jacobian",
    "grevlex_key",
]


class PoleError(ValueError):
    """A negative exponent was evaluated at a zero coordinate."""


def _grlex_key(exp: tuple[int, ...]) -> tuple:
    return (sum(exp), exp)


def grevlex_key(exp: Sequence[int]) -> tuple:
    """Sort key under which larger means larger in grevlex with x0 > x1 > ...."""
    return (sum(exp), tuple(-e for e in reversed(exp)))


def _as_exponent(exp, nvars: int) -> tuple[int, ...]:
    out = []
    for e in exp:
        if isinstance(e, (float, np.floating)):
            if not float(e).is_integer():
                raise ValueError(f"non-integer exponent {e!r}")
            e = int(e)
        elif not isinstance(e, Integral):
            raise TypeError(f"exponent entries must be integers, got {type(e).__name__}")
        out.append(int(e))
    if len(out) != nvars:
        raise ValueError(f"exponent {tuple(out)} has length {len(out)}, expected {nvars}")
    return tuple(out)


class SparsePolynomial:
    """A complex polynomial (or Laurent polynomial) in ``nvars`` variables.

    Args:
        nvars: number of variables.
        terms: mapping ``exponent -> coefficient`` or an iterable of
            ``(exponent, coefficient)`` pairs. Repeated exponents are summed;
            coefficients that are exactly ``0`` are dropped.
    """

    __slots__ = ("_nvars", "_terms", "_compiled")

    def __init__(self, nvars: int, terms: Mapping | Iterable = ()):
        self._nvars = int(nvars)
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[tuple[int, ...], complex] = {}
        for exp, coeff in items:
            key = _as_exponent(exp, self._nvars)
            acc[key] = acc.get(key, 0j) + complex(coeff)
        self._terms = {k: acc[k] for k in sorted(acc, key=_grlex_key) if acc[k] != 0}
        self._compiled = None

    @classmethod
    def monomial(cls, exp: Sequence[int], coeff: complex = 1.0) -> "SparsePolynomial":
        return cls(len(exp), [(exp, coeff)])

    @classmethod
    def constant(cls, nvars: int, value: complex) -> "SparsePolynomial":
        return cls(nvars, [((0,) * nvars, value)])

    @property
    def nvars(self) -> int:
        return self._nvars

    @property
    def terms(self) -> dict[tuple[int, ...], complex]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparsePolynomial):
            return NotImplemented
        return self._nvars == other._nvars and list(self._terms.items()) == list(other._terms.items())

    def __hash__(self):
        return hash((self._nvars, tuple(self._terms.items())))

    def __repr__(self) -> str:
        if not self._terms:
            return f"SparsePolynomial({self._nvars}, 0)"
        parts = [f"({c:.6g})*x^{list(e)}" for e, c in self._terms.items()]
        return f"SparsePolynomial({self._nvars}, " + " + ".join(parts) + ")"

    def __add__(self, other: "SparsePolynomial") -> "SparsePolynomial":
        if self._nvars != other._nvars:
            raise ValueError("variable counts differ")
        return SparsePolynomial(self._nvars, list(self._terms.items()) + list(other._terms.items()))

    def __neg__(self) -> "SparsePolynomial":
        return SparsePolynomial(self._nvars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other: "SparsePolynomial") -> "SparsePolynomial":
        return self + (-other)

    def scale(self, factor: complex) -> "SparsePolynomial":
        return SparsePolynomial(self._nvars, {e: factor * c for e, c in self._terms.items()})

    def exponents(self) -> np.ndarray:
        return _compile(self)[0]

    def coefficients(self) -> np.ndarray:
        return _compile(self)[1]

    def __call__(self, point) -> complex:
        return evaluate(self, point)


class HomotopyPolynomial:
    """A polynomial in ``x`` whose terms carry nonnegative integer powers of ``t``.

    The smallest ``t`` power present must be 0 so that the ``t = 0`` fiber is a
    nonzero polynomial. Terms with the same ``(exponent, t_power)`` are merged.
    """

    __slots__ = ("_nvars", "_terms", "_compiled")

    def __init__(self, nvars: int, terms: Iterable[tuple[Sequence[int], int, complex]]):
        self._nvars = int(nvars)
        acc: dict[tuple[tuple[int, ...], int], complex] = {}
        for exp, tpow, coeff in terms:
            key = _as_exponent(exp, self._nvars)
            if isinstance(tpow, (float, np.floating)):
                if not float(tpow).is_integer():
                    raise ValueError(f"t-power must be an integer, got {tpow!r}")
            elif not isinstance(tpow, Integral):
                raise TypeError(f"t-power must be an integer, got {type(tpow).__name__}")
            tpow = int(tpow)
            if tpow < 0:
                raise ValueError(f"negative t-power {tpow}")
            acc[(key, tpow)] = acc.get((key, tpow), 0j) + complex(coeff)
        order = sorted(acc, key=lambda k: (k[1], _grlex_key(k[0])))
        self._terms = [(k[0], k[1], acc[k]) for k in order if acc[k] != 0]
        if self._terms and min(tp for _, tp, _ in self._terms) != 0:
            raise ValueError("minimum t-power must be 0")
        self._compiled = None

    @classmethod
    def constant_in_t(cls, f: SparsePolynomial) -> "HomotopyPolynomial":
        return cls(f.nvars, [(e, 0, c) for e, c in f.items()])

    @property
    def nvars(self) -> int:
        return self._nvars

    @property
    def terms(self) -> list[tuple[tuple[int, ...], int, complex]]:
        return list(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    @property
    def max_t_power(self) -> int:
        return max((tp for _, tp, _ in self._terms), default=0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HomotopyPolynomial):
            return NotImplemented
        return self._nvars == other._nvars and self._terms == other._terms

    def __hash__(self):
        return hash((self._nvars, tuple(self._terms)))

    def __repr__(self) -> str:
        parts = [f"({c:.6g})*t^{tp}*x^{list(e)}" for e, tp, c in self._terms]
        return f"HomotopyPolynomial({self._nvars}, " + " + ".join(parts) + ")"

    def front(self) -> SparsePolynomial:
        """The ``t = 0`` fiber."""
        return specialize_t(self, 0.0)

    def target(self) -> SparsePolynomial:
        """The ``t = 1`` fiber."""
        return specialize_t(self, 1.0)


def _check_nonzero(f) -> None:
    if len(f) == 0:
        raise ValueError("weight of zero undefined")


def _dot(w: Sequence[int], e: Sequence[int]) -> int:
    if len(w) != len(e):
        raise ValueError(f"weight has length {len(w)}, polynomial has {len(e)} variables")
    return sum(int(a) * int(b) for a, b in zip(w, e))


def weight_value(f: SparsePolynomial, w: Sequence[int]) -> int:
    """Minimum of ``w . a`` over the exponents ``a`` of ``f``."""
    _check_nonzero(f)
    return min(_dot(w, e) for e, _ in f.items())


def initial_form(f: SparsePolynomial, w: Sequence[int]) -> SparsePolynomial:
    """Sum of the terms of ``f`` attaining the minimal ``w``-weight."""
    m = weight_value(f, w)
    return SparsePolynomial(f.nvars, [(e, c) for e, c in f.items() if _dot(w, e) == m])


def deform(f: SparsePolynomial, w: Sequence[int]) -> HomotopyPolynomial:
    """The weight degeneration ``sum c_a x^a t^{w.a - w(f)}``."""
    m = weight_value(f, w)
    return HomotopyPolynomial(f.nvars, [(e, _dot(w, e) - m, c) for e, c in f.items()])


def specialize_t(F: HomotopyPolynomial, t0: complex) -> SparsePolynomial:
    """Substitute ``t = t0``. ``0**0`` is taken to be 1."""
    t0 = complex(t0)
    out = []
    for e, tp, c in F.terms:
        if tp == 0:
            out.append((e, c))
        elif t0 != 0:
            out.append((e, c * t0**tp))
    return SparsePolynomial(F.nvars, out)


def pullback_power_map(f, a: Sequence[int]):
    """Substitute ``x_j -> y_j^{a_j}`` in a sparse or homotopy polynomial."""
    a = [int(v) for v in a]
    if len(a) != f.nvars:
        raise ValueError(f"grading has length {len(a)}, polynomial has {f.nvars} variables")
    if isinstance(f, HomotopyPolynomial):
        return HomotopyPolynomial(
            f.nvars, [(tuple(k * e for k, e in zip(a, exp)), tp, c) for exp, tp, c in f.terms]
        )
    return SparsePolynomial(f.nvars, [(tuple(k * e for k, e in zip(a, exp)), c) for exp, c in f.items()])


def is_weighted_homogeneous(f, a: Sequence[int]) -> tuple[bool, int | None]:
    """Return ``(True, degree)`` if ``a . exponent`` is constant over the terms.

    Works for homotopy polynomials too (``t`` carries no grading). The zero
    polynomial is homogeneous of degree 0 by convention.
    """
    if isinstance(f, HomotopyPolynomial):
        exps = [e for e, _, _ in f.terms]
    else:
        exps = [e for e, _ in f.items()]
    if not exps:
        return True, 0
    degs = {_dot(a, e) for e in exps}
    if len(degs) == 1:
        return True, degs.pop()
    return False, None


# --------------------------------------------------------------------------
# numerical evaluation


def _compile(f):
    if f._compiled is None:
        if isinstance(f, HomotopyPolynomial):
            E = np.array([e for e, _, _ in f.terms], dtype=np.int64).reshape(len(f), f.nvars)
            c = np.array([c for _, _, c in f.terms], dtype=complex)
            tp = np.array([tp for _, tp, _ in f.terms], dtype=np.int64)
            f._compiled = (E, c, tp)
        else:
            E = np.array(list(f._terms), dtype=np.int64).reshape(len(f), f.nvars)
            c = np.array(list(f._terms.values()), dtype=complex)
            f._compiled = (E, c, np.zeros(len(f), dtype=np.int64))
    return f._compiled


def _monomials(E: np.ndarray, x: np.ndarray) -> np.ndarray:
    if E.size == 0:
        return np.ones(E.shape[0], dtype=complex)
    zero = x == 0
    if zero.any() and (E[:, zero] < 0).any():
        raise PoleError("pole: negative exponent at a zero coordinate")
    return np.prod(x[None, :] ** E, axis=1)


def evaluate(f, point, t: complex | None = None) -> complex:
    """Evaluate a sparse polynomial, or a homotopy polynomial at ``(x, t)``."""
    x = np.asarray(point, dtype=complex)
    if x.shape != (f.nvars,):
        raise ValueError(f"point has shape {x.shape}, expected ({f.nvars},)")
    E, c, tp = _compile(f)
    if len(c) == 0:
        return 0j
    mono = _monomials(E, x)
    if isinstance(f, HomotopyPolynomial):
        if t is None:
            raise ValueError("homotopy polynomial needs a value of t")
        c = c * complex(t) ** tp
    return complex(c @ mono)


class PolySystem:
    """A list of sparse or homotopy polynomials compiled for repeated evaluation.

    ``values_and_jacobian(x, t)`` returns ``(F, dF/dx, dF/dt)``; for plain
    sparse polynomials ``t`` is ignored and ``dF/dt`` is zero.
    """

    def __init__(self, polys: Sequence):
        polys = list(polys)
        if not polys:
            raise ValueError("empty system")
        n = polys[0].nvars
        if any(p.nvars != n for p in polys):
            raise ValueError("polynomials have different variable counts")
        self.polys = polys
        self.nvars = n
        Es, cs, tps, rows = [], [], [], []
        for i, p in enumerate(polys):
            E, c, tp = _compile(p)
            Es.append(E)
            cs.append(c)
            tps.append(tp)
            rows.append(np.full(len(c), i))
        self._E = np.vstack(Es) if Es else np.zeros((0, n), dtype=np.int64)
        self._c = np.concatenate(cs)
        self._tp = np.concatenate(tps)
        self._row = np.concatenate(rows)
        self._has_t = bool(self._tp.any())
        # row-aggregation matrix: F = R @ (per-term values)
        self._R = np.zeros((len(polys), len(self._c)))
        self._R[self._row, np.arange(len(self._c))] = 1.0
        self._Ef = self._E.astype(float)
        # derivative exponents, one block per variable (used at zero coordinates)
        self._dE = []
        for k in range(n):
            mask = self._E[:, k] != 0
            dE = self._E[mask].copy()
            dE[:, k] -= 1
            self._dE.append((mask, dE, self._E[mask, k].astype(complex)))

    def __len__(self) -> int:
        return len(self.polys)

    def _coeffs(self, t):
        if not self._has_t or t is None:
            return self._c, np.zeros_like(self._c)
        t = complex(t)
        tc = t ** self._tp
        dtc = np.where(self._tp > 0, self._tp * t ** np.maximum(self._tp - 1, 0), 0)
        return self._c * tc, self._c * dtc

    def values(self, x, t=None) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        c, _ = self._coeffs(t)
        return self._R @ (c * _monomials(self._E, x))

    def values_and_jacobian(self, x, t=None):
        x = np.asarray(x, dtype=complex)
        c, dc = self._coeffs(t)
        mono = _monomials(self._E, x)
        w = c * mono
        F = self._R @ w
        Ft = self._R @ (dc * mono) if self._has_t else np.zeros(len(self), dtype=complex)
        if np.all(x != 0):
            J = self._R @ (w[:, None] * self._Ef / x[None, :])
        else:
            J = np.zeros((len(self), self.nvars), dtype=complex)
            for k, (mask, dE, mult) in enumerate(self._dE):
                if mult.size:
                    J[:, k] = self._R[:, mask] @ (c[mask] * mult * _monomials(dE, x))
        return F, J, Ft

    def term_magnitudes(self, x, t=None) -> np.ndarray:
        """Per-equation sum of ``|c_a x^a|``; the scale for relative residuals."""
        x = np.asarray(x, dtype=complex)
        c, _ = self._coeffs(t)
        return self._R @ np.abs(c * _monomials(self._E, x))

    def relative_residual(self, x, t=None) -> float:
        F = self.values(x, t)
        scale = self.term_magnitudes(x, t)
        return float(np.max(np.abs(F) / np.maximum(scale, np.finfo(float).tiny)))


def jacobian(system: Sequence, point) -> np.ndarray:
    """Jacobian matrix of a list of sparse polynomials at ``point``."""
    return PolySystem(system).values_and_jacobian(point)[1]
