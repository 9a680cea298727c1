"""Periodic profiles in one variable, stored as truncated Fourier series.

Every coefficient of a field or form on the Heisenberg model lives in this
representation: ``f(s) = sum_k c_k exp(2 pi i k s)`` for ``s`` in ``[0, 1)``,
with ``|k| < N/2`` retained and the Nyquist slot kept at zero.  Arrays carry
the modes on their last axis in numpy FFT order, so any leading batch shape
(grid points, components, fields) is allowed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


def wavenumbers(n: int) -> np.ndarray:
    """Integer wavenumbers in FFT order, Nyquist slot set to 0."""
    k = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        k[n // 2] = 0.0
    return k


def band_mask(n: int) -> np.ndarray:
    mask = np.ones(n, dtype=bool)
    if n % 2 == 0:
        mask[n // 2] = False
    return mask


def pad(c: np.ndarray, m: int) -> np.ndarray:
    """Zero-pad an N-mode coefficient array to M >= N modes."""
    n = c.shape[-1]
    if m < n:
        raise ValueError(f"cannot pad {n} modes down to {m}")
    half = (n - 1) // 2  # retained |k| <= half
    out = np.zeros(c.shape[:-1] + (m,), dtype=complex)
    out[..., : half + 1] = c[..., : half + 1]
    if half > 0:
        out[..., m - half:] = c[..., n - half:]
    return out


def truncate(c: np.ndarray, n: int) -> np.ndarray:
    """Keep the modes |k| < n/2 of an M-mode array (inverse of :func:`pad`)."""
    m = c.shape[-1]
    half = (n - 1) // 2
    out = np.zeros(c.shape[:-1] + (n,), dtype=complex)
    out[..., : half + 1] = c[..., : half + 1]
    if half > 0:
        out[..., n - half:] = c[..., m - half:]
    return out


def to_values(c: np.ndarray, m: int | None = None) -> np.ndarray:
    """Collocation values at ``s_j = j/m`` (default m = N)."""
    m = c.shape[-1] if m is None else m
    return np.fft.ifft(pad(c, m), axis=-1) * m


def from_values(v: np.ndarray, n: int | None = None) -> np.ndarray:
    """Fourier coefficients of collocation values, truncated to ``n`` modes."""
    m = v.shape[-1]
    n = m if n is None else n
    c = np.fft.fft(v, axis=-1) / m
    return truncate(c, n)


def grid(m: int) -> np.ndarray:
    return np.arange(m) / m


def product(*factors: np.ndarray) -> np.ndarray:
    """Pointwise product, de-aliased on a 2N collocation grid."""
    n = factors[0].shape[-1]
    vals = to_values(factors[0], 2 * n)
    for f in factors[1:]:
        if f.shape[-1] != n:
            raise ValueError("mismatched mode counts in product")
        vals = vals * to_values(f, 2 * n)
    return from_values(vals, n)


def derivative(c: np.ndarray, order: int = 1) -> np.ndarray:
    k = wavenumbers(c.shape[-1])
    return c * (1j * TWO_PI * k) ** order


def is_constant(c: np.ndarray) -> bool:
    return bool(np.all(c[..., 1:] == 0))


def krasny_filter(c: np.ndarray, tol: float) -> np.ndarray:
    """Zero every coefficient with modulus below ``tol``.

    Round-off in unresolved modes would otherwise be amplified by the
    exponential mode growth of the Nahm flow in the s-class.
    """
    if tol <= 0:
        return c
    out = c.copy()
    out[np.abs(out) < tol] = 0.0
    return out


def is_hermitian(c: np.ndarray, atol: float = 1e-14) -> bool:
    """True when the coefficients describe a real profile."""
    n = c.shape[-1]
    idx = (-np.arange(n)) % n
    return bool(np.allclose(c, np.conj(c[..., idx]), rtol=0, atol=atol))


@dataclass(frozen=True)
class SField:
    """A periodic scalar profile on s in [0, 1)."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1:
            raise ValueError("SField coefficients must be one-dimensional")
        c = c * band_mask(c.shape[-1])
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def constant(cls, value: complex, n: int = 64) -> "SField":
        c = np.zeros(n, dtype=complex)
        c[0] = value
        return cls(c)

    @classmethod
    def zeros(cls, n: int = 64) -> "SField":
        return cls(np.zeros(n, dtype=complex))

    @classmethod
    def from_function(cls, fn, n: int = 64) -> "SField":
        """Sample ``fn`` on an oversampled grid and keep N modes."""
        s = grid(4 * n)
        return cls(from_values(np.asarray(fn(s), dtype=complex), n))

    @classmethod
    def fourier_mode(cls, k: int, amplitude: complex = 1.0, n: int = 64) -> "SField":
        if not abs(k) < n / 2:
            raise ValueError(f"mode {k} outside the retained band of {n} modes")
        c = np.zeros(n, dtype=complex)
        c[k % n] = amplitude
        return cls(c)

    @property
    def n(self) -> int:
        return self.coeffs.shape[-1]

    def values(self, m: int | None = None) -> np.ndarray:
        return to_values(self.coeffs, m)

    def __call__(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        k = wavenumbers(self.n)
        return np.exp(1j * TWO_PI * np.multiply.outer(s, k)) @ self.coeffs

    def derivative(self, order: int = 1) -> "SField":
        return SField(derivative(self.coeffs, order))

    def is_real(self, atol: float = 1e-14) -> bool:
        return is_hermitian(self.coeffs, atol)

    def is_constant(self) -> bool:
        return is_constant(self.coeffs)

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, SField):
            if other.n != self.n:
                raise ValueError("mismatched mode counts")
            return other.coeffs
        return SField.constant(other, self.n).coeffs

    def __add__(self, other):
        return SField(self.coeffs + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return SField(self.coeffs - self._coerce(other))

    def __rsub__(self, other):
        return SField(self._coerce(other) - self.coeffs)

    def __neg__(self):
        return SField(-self.coeffs)

    def __mul__(self, other):
        if isinstance(other, SField):
            return SField(product(self.coeffs, self._coerce(other)))
        return SField(self.coeffs * other)

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values(2 * self.n))))
