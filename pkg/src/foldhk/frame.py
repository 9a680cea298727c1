"""Exterior calculus on the flat Heisenberg model and its thickening [0, eps) x X.

The coframe is ordered ``(dx, theta1, theta2, theta3)`` (indices 0..3) with
structure equations ``d theta1 = theta2 ^ theta3`` and ``d theta2 = d theta3 = 0``.
Coefficients depend on the fold coordinate ``x`` (optional grid axis) and on the
middle Darboux coordinate ``s`` of the Heisenberg group only (``theta2 = ds``), so
that ``X2`` acts as ``d/ds`` while ``X1`` and ``X3`` annihilate them.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable

import numpy as np

from . import spectral
from .spectral import SField

DIM = 4
COFRAME_LABELS = ("dx", "theta1", "theta2", "theta3")

MONOMIALS = {k: list(combinations(range(DIM), k)) for k in range(DIM + 1)}
MONOMIAL_INDEX = {k: {m: i for i, m in enumerate(MONOMIALS[k])} for k in range(DIM + 1)}


def monomial_label(mono: tuple[int, ...]) -> str:
    if not mono:
        return "1"
    return "^".join(COFRAME_LABELS[i] for i in mono)


def _merge_sign(i: tuple[int, ...], j: tuple[int, ...]) -> int:
    seq = i + j
    inversions = sum(1 for a in range(len(seq)) for b in range(a + 1, len(seq)) if seq[a] > seq[b])
    return -1 if inversions % 2 else 1


class FrameAlgebra:
    """Structure constants of the Heisenberg frame (X1, X2, X3).

    ``c[i, j, k]`` (0-based) gives ``[X_i, X_j] = sum_k c[i, j, k] X_k``; the only
    nonzero bracket is ``[X2, X3] = -X1``.
    """

    def __init__(self):
        c = np.zeros((3, 3, 3))
        c[1, 2, 0] = -1.0
        c[2, 1, 0] = 1.0
        c.setflags(write=False)
        self.structure_constants = c

    def bracket(self, i: int, j: int) -> np.ndarray:
        """Coefficients of ``[X_i, X_j]`` for 1-based labels."""
        return self.structure_constants[i - 1, j - 1]

    def d_coframe(self) -> np.ndarray:
        """``dtheta^k(X_i, X_j) = -theta^k([X_i, X_j])``, indexed ``[k, i, j]``."""
        return -np.transpose(self.structure_constants, (2, 0, 1))

    @staticmethod
    def pairing() -> np.ndarray:
        return np.eye(3)


HEISENBERG = FrameAlgebra()


# ---------------------------------------------------------------------------
# forms


@dataclass(frozen=True)
class FormField:
    """A k-form ``sum_I c_I(x, s) e^I`` in the coframe (dx, theta1, theta2, theta3).

    ``coeffs`` has shape ``(C(4, k), N)`` for a form on X (no x-dependence) or
    ``(C(4, k), nx, N)`` when ``x`` holds a uniform grid.
    """

    degree: int
    coeffs: np.ndarray
    x: np.ndarray | None = None

    def __post_init__(self):
        if not 0 <= self.degree <= DIM:
            raise ValueError(f"degree {self.degree} outside 0..{DIM}")
        c = np.asarray(self.coeffs, dtype=complex)
        ncomp = len(MONOMIALS[self.degree])
        want_ndim = 2 if self.x is None else 3
        if c.ndim != want_ndim or c.shape[0] != ncomp:
            raise ValueError(
                f"degree-{self.degree} form needs coefficient shape ({ncomp}, "
                f"{'' if self.x is None else 'nx, '}N), got {c.shape}"
            )
        if self.x is not None:
            x = np.asarray(self.x, dtype=float)
            if c.shape[1] != x.size:
                raise ValueError("x grid and coefficient array disagree")
            object.__setattr__(self, "x", x)
        object.__setattr__(self, "coeffs", c)

    @property
    def n(self) -> int:
        return self.coeffs.shape[-1]

    @property
    def monomials(self) -> list[tuple[int, ...]]:
        return MONOMIALS[self.degree]

    @classmethod
    def zeros(cls, degree: int, n: int = 64, x: np.ndarray | None = None) -> "FormField":
        shape = (len(MONOMIALS[degree]),) + (() if x is None else (len(x),)) + (n,)
        return cls(degree, np.zeros(shape, dtype=complex), x)

    @classmethod
    def monomial(cls, mono: tuple[int, ...], coeff=1.0, n: int = 64,
                 x: np.ndarray | None = None) -> "FormField":
        """The form ``coeff * e^mono``; ``coeff`` may be a scalar, SField or array."""
        mono = tuple(mono)
        sign = 1
        if tuple(sorted(mono)) != mono:
            sign = _merge_sign(mono, ())
            mono = tuple(sorted(mono))
        if len(set(mono)) != len(mono):
            return cls.zeros(len(mono), n, x)
        out = cls.zeros(len(mono), n, x)
        c = out.coeffs.copy()
        c[MONOMIAL_INDEX[len(mono)][mono]] = sign * _as_coeff(coeff, n, x)
        return cls(len(mono), c, x)

    def component(self, mono: tuple[int, ...]) -> np.ndarray:
        return self.coeffs[MONOMIAL_INDEX[self.degree][tuple(mono)]]

    def values(self, m: int | None = None) -> np.ndarray:
        return spectral.to_values(self.coeffs, m)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values(2 * self.n)))) if self.coeffs.size else 0.0

    def _check(self, other: "FormField"):
        if other.n != self.n:
            raise ValueError("mismatched s-discretizations")
        if (self.x is None) != (other.x is None):
            raise ValueError("mismatched x-grids (one form has no x-axis)")
        if self.x is not None and not np.array_equal(self.x, other.x):
            raise ValueError("mismatched x-grids")

    def __add__(self, other: "FormField") -> "FormField":
        self._check(other)
        if other.degree != self.degree:
            raise ValueError("cannot add forms of different degree")
        return FormField(self.degree, self.coeffs + other.coeffs, self.x)

    def __sub__(self, other: "FormField") -> "FormField":
        return self + (-1.0) * other

    def __neg__(self):
        return FormField(self.degree, -self.coeffs, self.x)

    def __mul__(self, scalar) -> "FormField":
        if isinstance(scalar, SField):
            return FormField(self.degree, spectral.product(self.coeffs, _bcast(scalar.coeffs, self)), self.x)
        return FormField(self.degree, self.coeffs * scalar, self.x)

    __rmul__ = __mul__

    def __xor__(self, other: "FormField") -> "FormField":
        return wedge(self, other)


def _as_coeff(coeff, n, x):
    if isinstance(coeff, SField):
        c = coeff.coeffs
    else:
        c = np.asarray(coeff, dtype=complex)
        if c.ndim == 0:
            c = SField.constant(complex(c), n).coeffs
    if x is not None and c.ndim == 1:
        c = np.broadcast_to(c, (len(x), n))
    return c


def _bcast(c: np.ndarray, form: FormField) -> np.ndarray:
    return np.broadcast_to(c, form.coeffs.shape)


def wedge(a: FormField, b: FormField) -> FormField:
    """Graded-commutative product; coefficient products are de-aliased collocation."""
    a._check(b)
    k = a.degree + b.degree
    if k > DIM:
        raise ValueError(f"degree overflow: {a.degree} + {b.degree} > {DIM}")
    n = a.n
    m = 2 * n
    va = spectral.to_values(a.coeffs, m)
    vb = spectral.to_values(b.coeffs, m)
    out = np.zeros((len(MONOMIALS[k]),) + va.shape[1:], dtype=complex)
    for i, mi in enumerate(a.monomials):
        for j, mj in enumerate(b.monomials):
            if set(mi) & set(mj):
                continue
            target = MONOMIAL_INDEX[k][tuple(sorted(mi + mj))]
            out[target] += _merge_sign(mi, mj) * va[i] * vb[j]
    return FormField(k, spectral.from_values(out, n), a.x)


def x_derivative(c: np.ndarray, x: np.ndarray, axis: int) -> np.ndarray:
    """Centered second-order differences; third-order one-sided 4-point stencils at the ends."""
    x = np.asarray(x, dtype=float)
    if x.size < 4:
        raise ValueError("x-derivative needs at least 4 grid points")
    h = np.diff(x)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0):
        raise ValueError("x-grid must be uniform")
    h = h[0]
    c = np.moveaxis(c, axis, 0)
    d = np.empty_like(c)
    d[1:-1] = (c[2:] - c[:-2]) / (2 * h)
    d[0] = (-11 * c[0] + 18 * c[1] - 9 * c[2] + 2 * c[3]) / (6 * h)
    d[-1] = (11 * c[-1] - 18 * c[-2] + 9 * c[-3] - 2 * c[-4]) / (6 * h)
    return np.moveaxis(d, 0, axis)


def exterior_derivative(a: FormField, in_x: bool | None = None) -> FormField:
    """d of a form, using ``dtheta1 = theta2 ^ theta3`` and ``X2 = d/ds`` on coefficients.

    ``in_x`` defaults to whether ``a`` carries an x-grid; asking for it on a form
    without one is an error.
    """
    if in_x is None:
        in_x = a.x is not None
    if in_x and a.x is None:
        raise ValueError("x-derivative requested on a form without an x-axis")
    k = a.degree
    if k == DIM:
        raise ValueError("d of a top-degree form has no representation (it vanishes)")
    out = np.zeros((len(MONOMIALS[k + 1]),) + a.coeffs.shape[1:], dtype=complex)
    ds = spectral.derivative(a.coeffs)
    dx = x_derivative(a.coeffs, a.x, axis=1) if in_x else None
    idx = MONOMIAL_INDEX[k + 1]
    for i, mono in enumerate(a.monomials):
        # dc ^ e^I with dc = (d_x c) dx + (d_s c) theta2
        if 2 not in mono:
            out[idx[tuple(sorted((2,) + mono))]] += _merge_sign((2,), mono) * ds[i]
        if in_x and 0 not in mono:
            out[idx[(0,) + mono]] += dx[i]
        # c d(e^I): only theta1 has a nonzero differential
        if 1 in mono:
            p = mono.index(1)
            rest = mono[:p] + (2, 3) + mono[p + 1:]
            if len(set(rest)) == len(rest):
                sign = (-1) ** p * _merge_sign(rest, ())
                out[idx[tuple(sorted(rest))]] += sign * a.coeffs[i]
    return FormField(k + 1, out, a.x)


def to_e_basis(a: FormField) -> FormField:
    """Re-express in ``(e0, e1, e2, e3) = (dx, theta1/x, theta2, theta3)``.

    The coefficient of every monomial containing ``theta1`` picks up a factor ``x``.
    """
    if a.x is None:
        raise ValueError("e-basis needs an x-grid")
    if np.any(a.x == 0):
        raise ValueError("e-basis is singular on the fold x = 0")
    c = a.coeffs.copy()
    for i, mono in enumerate(a.monomials):
        if 1 in mono:
            c[i] = c[i] * a.x[:, None]
    return FormField(a.degree, c, a.x)


def top_coefficient(a: FormField) -> np.ndarray:
    if a.degree != DIM:
        raise ValueError("not a top-degree form")
    return a.coeffs[0]


# ---------------------------------------------------------------------------
# vector fields


@dataclass(frozen=True)
class InvariantVectorField:
    """``V = f(s) X1 + g(s) X2 + h(s) X3``; coefficients stacked as a (3, N) array."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 2 or c.shape[0] != 3:
            raise ValueError("vector field coefficients must have shape (3, N)")
        c = c * spectral.band_mask(c.shape[-1])
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_components(cls, f=0.0, g=0.0, h=0.0, n: int = 64) -> "InvariantVectorField":
        return cls(np.stack([_as_coeff(c, n, None) for c in (f, g, h)]))

    @classmethod
    def basis(cls, i: int, n: int = 64) -> "InvariantVectorField":
        c = np.zeros((3, n), dtype=complex)
        c[i - 1, 0] = 1.0
        return cls(c)

    @classmethod
    def zeros(cls, n: int = 64) -> "InvariantVectorField":
        return cls(np.zeros((3, n), dtype=complex))

    @property
    def n(self) -> int:
        return self.coeffs.shape[-1]

    @property
    def f(self) -> SField:
        return SField(self.coeffs[0])

    @property
    def g(self) -> SField:
        return SField(self.coeffs[1])

    @property
    def h(self) -> SField:
        return SField(self.coeffs[2])

    def divergence(self) -> SField:
        """Divergence against theta1^theta2^theta3: only ``g'`` survives."""
        return self.g.derivative()

    def is_volume_preserving(self) -> bool:
        return spectral.is_constant(self.coeffs[1])

    def __add__(self, other):
        return InvariantVectorField(self.coeffs + other.coeffs)

    def __sub__(self, other):
        return InvariantVectorField(self.coeffs - other.coeffs)

    def __neg__(self):
        return InvariantVectorField(-self.coeffs)

    def __mul__(self, scalar):
        return InvariantVectorField(self.coeffs * scalar)

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return float(np.max(np.abs(spectral.to_values(self.coeffs, 2 * self.n))))


def bracket_coeffs(v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Lie bracket on stacked coefficient arrays of shape (..., 3, N)."""
    n = v.shape[-1]
    m = 2 * n
    vv = spectral.to_values(v, m)
    wv = spectral.to_values(w, m)
    dv = spectral.to_values(spectral.derivative(v), m)
    dw = spectral.to_values(spectral.derivative(w), m)
    vf, vg, vh = vv[..., 0, :], vv[..., 1, :], vv[..., 2, :]
    wf, wg, wh = wv[..., 0, :], wv[..., 1, :], wv[..., 2, :]
    out = np.stack([
        vg * dw[..., 0, :] - wg * dv[..., 0, :] - (vg * wh - vh * wg),
        vg * dw[..., 1, :] - wg * dv[..., 1, :],
        vg * dw[..., 2, :] - wg * dv[..., 2, :],
    ], axis=-2)
    return spectral.from_values(out, n)


def lie_bracket(v: InvariantVectorField, w: InvariantVectorField) -> InvariantVectorField:
    if v.n != w.n:
        raise ValueError("mismatched s-discretizations")
    return InvariantVectorField(bracket_coeffs(v.coeffs, w.coeffs))


# ---------------------------------------------------------------------------
# model metric and dilations

DILATION_WEIGHTS = np.array([1, 2, 1, 1])


def model_metric_g0(x: float) -> np.ndarray:
    """Components of ``x(dx^2 + theta2^2 + theta3^2) + theta1^2 / x`` in the coframe."""
    x = float(x)
    if x == 0.0:
        raise ValueError("the model metric degenerates on the fold x = 0")
    return np.diag([x, 1.0 / x, x, x])


def dilation_weights(t: float) -> np.ndarray:
    """Scale factors of (dx, theta1, theta2, theta3) under ``h_t``."""
    if t <= 0:
        raise ValueError("dilation parameter must be positive")
    return float(t) ** DILATION_WEIGHTS


def _weight_tensor(t: float, rank: int) -> np.ndarray:
    w = dilation_weights(t)
    out = np.ones(())
    for _ in range(rank):
        out = np.multiply.outer(out, w)
    return out


def dilation_pullback(t: float, tensor: np.ndarray | Callable) -> np.ndarray | Callable:
    """Pull back a covariant tensor by ``h_t(x, x1, x2, x3) = (tx, t^2 x1, t x2, t x3)``.

    ``tensor`` is either a component array (rank inferred from its ndim, every
    axis of length 4) whose base point the caller has already moved, or a
    callable ``(x, s) -> components``; in the latter case the result is again a
    callable, evaluating the original at ``(t x, t s)``.
    """
    if t <= 0:
        raise ValueError("dilation parameter must be positive")
    if callable(tensor):
        def pulled(x, s=0.0):
            comps = np.asarray(tensor(t * x, t * s))
            return _weight_tensor(t, comps.ndim) * comps
        return pulled
    comps = np.asarray(tensor)
    if any(d != DIM for d in comps.shape):
        raise ValueError("tensor components must have every axis of length 4")
    return _weight_tensor(t, comps.ndim) * comps
