"""Fiberwise model of the fold on the unit disc bundle of a hyperbolic surface.

Everything is pinned to the fiber over one base point, with fiber coordinate
``w = r e^{i phi}`` and connection form ``eta = d phi`` there.  The Kähler form is

    omega_1 = sqrt(1 - r^2) p^* omega_Sigma + r / sqrt(1 - r^2) dr ^ eta,

and a holomorphic differential of degree m (value ``amplitude`` at the base
point) deforms it through

    dbar g~ = phi_m(r) g (dr/r - i eta),   phi_m = Phi r^m / sqrt(1 - r^2),
    xi      = 2 i Phi g r^m / wbar  d/dw,    dbar g~ = -i_xi omega_1.

Fiber 2-forms are stored through their ``dr ^ dphi`` coefficient with the
boundary weight ``1/sqrt(1 - r^2)`` factored out, which is the weight of the
Gauss-Jacobi radial rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.special import beta as beta_fn
from scipy.special import roots_jacobi, roots_legendre

# fiber integrals are reported in units of 2 pi i, the period of dw/w
FIBER_NORMALIZATION = 1.0 / (2j * math.pi)


def _check_open(r, allow_zero: bool = False) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if np.any(r >= 1.0):
        raise ValueError("r must stay below 1 (the fold sits at r = 1)")
    if np.any(r < 0.0) or (not allow_zero and np.any(r == 0.0)):
        raise ValueError("r must be positive")
    return r


def omega1(r):
    """Coefficients ``(A, B)`` of ``omega_1 = A p^*omega_Sigma + B dr ^ eta``."""
    r = _check_open(r)
    s = np.sqrt(1.0 - r * r)
    return s, r / s


def harmonic_phi(m: int) -> float:
    """Constant making the extension ``a(r) g`` of g reach ``a(1) = 1``.

    From ``phi = (r a' + m a) / 2`` one gets ``a(1) = Phi B(m, 1/2)``.
    """
    if m < 0:
        raise ValueError("frequency m must be non-negative")
    if m == 0:
        return 0.0
    return float(1.0 / beta_fn(m, 0.5))


@dataclass(frozen=True)
class Deformation:
    m: int
    amplitude: complex = 1.0
    Phi: float | None = None

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 0:
            raise ValueError(f"frequency m = {self.m} must be a non-negative integer")
        object.__setattr__(self, "m", int(self.m))
        if not np.isfinite(self.amplitude):
            raise ValueError("amplitude must be finite")
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        if self.Phi is None:
            object.__setattr__(self, "Phi", harmonic_phi(self.m))
        object.__setattr__(self, "Phi", float(self.Phi))

    @property
    def trivial(self) -> bool:
        """m = 0 gives no variation and m = 1 preserves the complex symplectic form."""
        return self.m in (0, 1)

    def scaled(self, c: complex) -> "Deformation":
        return Deformation(self.m, c * self.amplitude, self.Phi)

    def g(self, phi) -> np.ndarray:
        """The degree-m differential on the fiber: ``amplitude e^{-i m phi}``."""
        return self.amplitude * np.exp(-1j * self.m * np.asarray(phi, dtype=float))


def phi_profile(d: Deformation, r) -> np.ndarray:
    r = _check_open(r)
    return d.Phi * r ** d.m / np.sqrt(1.0 - r * r)


def dbar_extension(d: Deformation, r, phi) -> tuple[np.ndarray, np.ndarray]:
    """``dbar g~`` in the co-basis ``(dr/r, eta)``."""
    c = phi_profile(d, r) * d.g(phi)
    return c, -1j * c


def xi_field(d: Deformation, r, phi) -> np.ndarray:
    """Coefficient of ``d/dw`` of the deformation field.

    ``r^m e^{-i m phi} / wbar = wbar^{m-1}``, so the field is regular at the
    centre for m >= 1.
    """
    r = _check_open(r, allow_zero=True)
    phi = np.asarray(phi, dtype=float)
    if d.m == 0:
        if np.any(r == 0.0):
            raise ValueError("the m = 0 field is singular at the centre of the fiber")
        wbar = r * np.exp(-1j * phi)
        return 2j * d.Phi * d.amplitude / wbar
    wbar = r * np.exp(-1j * phi)
    return 2j * d.Phi * d.amplitude * wbar ** (d.m - 1)


def contract_vertical(c: np.ndarray, r, phi, B) -> tuple[np.ndarray, np.ndarray]:
    """``i_{c d/dw} (B dr ^ eta)`` in the co-basis ``(dr/r, eta)``.

    Uses ``dr(d/dw) = e^{-i phi}/2`` and ``dphi(d/dw) = -i e^{-i phi}/(2 r)``.
    """
    r = np.asarray(r, dtype=float)
    e = np.exp(-1j * np.asarray(phi, dtype=float))
    dr_xi = 0.5 * c * e
    dphi_xi = -0.5j * c * e / r
    return -B * dphi_xi * r, B * dr_xi


def eta1(d: Deformation, r, phi) -> tuple[np.ndarray, np.ndarray]:
    """``eta_1 = -i_xi omega_1`` as coefficients of ``(dr, dphi)``."""
    _, B = omega1(r)
    a, b = contract_vertical(xi_field(d, r, phi), r, phi, B)
    return -a / np.asarray(r), -b


# ---------------------------------------------------------------------------
# quadrature


def _jacobi_unit(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights on [0, 1] for the weight ``(1 - u)^a u^b``."""
    t, w = roots_jacobi(n, a, b)
    return 0.5 * (t + 1.0), w * 2.0 ** -(a + b + 1.0)


@dataclass(frozen=True)
class FiberChart:
    """Quadrature grid on the fiber disc: Gauss-Jacobi in ``u = r^2``, uniform in phi.

    ``int_0^1 F(r) dr / sqrt(1 - r^2) = 1/2 int_0^1 F(sqrt u)/sqrt u (1 - u)^{-1/2} du``,
    which the radial rule integrates exactly when ``F(r) = r P(r^2)`` with
    ``deg P < 2 n_r``.
    """

    n_r: int = 64
    n_phi: int = 64
    # stored sign of d eta = -omega_Sigma at the base point
    curvature_sign: int = -1

    def __post_init__(self):
        if self.n_r < 2 or self.n_phi < 4:
            raise ValueError("fiber grid too small")

    @cached_property
    def _rule(self):
        return _jacobi_unit(self.n_r, -0.5, 0.0)

    @property
    def u(self) -> np.ndarray:
        return self._rule[0]

    @property
    def r(self) -> np.ndarray:
        return np.sqrt(self._rule[0])

    @property
    def radial_weights(self) -> np.ndarray:
        """Weights ``W`` with ``int F dr/sqrt(1-r^2) ~ sum W F(r_j)`` (exact for odd F)."""
        return 0.5 * self._rule[1] / self.r

    @property
    def phi(self) -> np.ndarray:
        return 2.0 * math.pi * np.arange(self.n_phi) / self.n_phi

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.r, self.phi, indexing="ij")

    def radial_moment(self, k: int) -> float:
        """``int_0^1 r^k / sqrt(1 - r^2) dr``, exact for every k below the rule degree."""
        if k < 0:
            raise ValueError("moment order must be non-negative")
        if k % 2 == 1:
            u, w = self._rule
            return float(0.5 * np.sum(w * u ** ((k - 1) // 2)))
        b = 0.5 if k >= 2 else -0.5
        u, w = _jacobi_unit(self.n_r, -0.5, b)
        p = (k - 2) // 2 if k >= 2 else 0
        return float(0.5 * np.sum(w * u ** p))

    def integrate(self, coeff: np.ndarray) -> complex:
        """``int int coeff(r, phi) dr dphi / sqrt(1 - r^2)`` for values on :meth:`mesh`."""
        ang = 2.0 * math.pi * np.mean(coeff, axis=1)
        return complex(np.sum(self.radial_weights * ang))


def substitution_moment(k: int) -> float:
    """Independent value of ``int_0^1 r^k / sqrt(1 - r^2) dr`` via ``r = sin t``."""
    from scipy.integrate import quad

    val, _ = quad(lambda t: math.sin(t) ** k, 0.0, 0.5 * math.pi, epsabs=0.0, epsrel=1e-13, limit=200)
    return val


# ---------------------------------------------------------------------------
# fiber forms and invariants


@dataclass(frozen=True)
class FiberForm:
    """A fiber 2-form ``reg(r, phi) / sqrt(1 - r^2) dr ^ dphi``."""

    reg: Callable[[np.ndarray, np.ndarray], np.ndarray]

    def __add__(self, other: "FiberForm") -> "FiberForm":
        return FiberForm(lambda r, p: self.reg(r, p) + other.reg(r, p))

    def __mul__(self, c) -> "FiberForm":
        return FiberForm(lambda r, p: c * self.reg(r, p))

    __rmul__ = __mul__

    def coefficient(self, r, phi) -> np.ndarray:
        r = _check_open(r)
        return self.reg(r, phi) / np.sqrt(1.0 - r * r)


def standard_fiber_form() -> FiberForm:
    """Fiber part of ``omega_1``: ``B dr ^ eta = r / sqrt(1 - r^2) dr ^ dphi``."""
    return FiberForm(lambda r, p: r + 0.0 * p)


def radial_fiber_form(profile: Callable[[np.ndarray], np.ndarray]) -> FiberForm:
    """An angularly symmetric fiber form ``profile(r)/sqrt(1 - r^2) dr ^ dphi``."""
    return FiberForm(lambda r, p: profile(r) + 0.0 * p)


def variation_form(d: Deformation) -> FiberForm:
    """``-(dw/w) ^ eta_1``, the density whose moments are the first variations.

    With ``eta_1 = a dr + b dphi``: ``dw ^ eta_1 = e^{i phi}(b - i r a) dr ^ dphi``.
    """
    def reg(r, p):
        a, b = eta1(d, r, p)
        return -(b - 1j * r * a) / r * np.sqrt(1.0 - r * r)

    return FiberForm(reg)


def invariant_polynomial(form: FiberForm, n: int, chart: FiberChart | None = None) -> complex:
    """``int w^n form`` over the fiber disc, in units of ``2 pi i``."""
    if int(n) != n or n <= 0:
        raise ValueError("invariant polynomials are indexed by n >= 1")
    chart = chart or FiberChart()
    R, P = chart.mesh()
    vals = R ** n * np.exp(1j * n * P) * form.reg(R, P)
    return FIBER_NORMALIZATION * chart.integrate(vals)


def variation_of_invariants(d: Deformation | list[Deformation], nmax: int,
                            chart: FiberChart | None = None) -> np.ndarray:
    """``pdot_n = -int w^{n-1} dw ^ eta_1`` for n = 1..nmax (units of 2 pi i).

    A list of deformations is superposed (``eta_1`` is linear in the field).
    """
    ds = d if isinstance(d, (list, tuple)) else [d]
    for di in ds:
        if di.m > nmax:
            raise ValueError(f"frequency m = {di.m} exceeds nmax = {nmax}")
    chart = chart or FiberChart()
    R, P = chart.mesh()
    reg = sum(variation_form(di).reg(R, P) for di in ds)
    out = np.empty(nmax, dtype=complex)
    for n in range(1, nmax + 1):
        vals = R ** n * np.exp(1j * n * P) * reg
        out[n - 1] = FIBER_NORMALIZATION * chart.integrate(vals)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("radial quadrature did not converge")
    return out


def variation_closed_form(d: Deformation, nmax: int) -> np.ndarray:
    """``pdot_n = delta_{nm} amplitude Phi B(m, 1/2)`` (units of 2 pi i)."""
    out = np.zeros(nmax, dtype=complex)
    if 1 <= d.m <= nmax:
        out[d.m - 1] = d.amplitude * d.Phi * beta_fn(d.m, 0.5)
    return out


def normalization_ratio(d: Deformation, chart: FiberChart | None = None) -> complex:
    """``kappa = pdot_m(d) / amplitude``."""
    if d.m < 1 or d.amplitude == 0:
        raise ValueError("ratio needs m >= 1 and a nonzero amplitude")
    return variation_of_invariants(d, d.m, chart)[d.m - 1] / d.amplitude


def truncated_stokes(d: Deformation, n: int, R: float = 0.9, nodes: int = 64) -> dict:
    """Both sides of Stokes on the disc ``r < R`` for the density ``w^n eta_1``.

    ``bulk - boundary = int w^n d eta_1 - oint w^n eta_1 = -n int w^{n-1} dw ^ eta_1``.
    Plain Gauss-Legendre in r suffices since ``R < 1``.  Values in units of 2 pi i.
    """
    if not 0 < R < 1:
        raise ValueError("truncation radius must lie in (0, 1)")
    t, wt = roots_legendre(nodes)
    r = 0.5 * R * (t + 1.0)
    wr = 0.5 * R * wt
    nphi = 64
    phi = 2.0 * math.pi * np.arange(nphi) / nphi
    Rg, Pg = np.meshgrid(r, phi, indexing="ij")
    k = np.fft.fftfreq(nphi, 1.0 / nphi)

    a, b = eta1(d, Rg, Pg)
    # d eta_1 = (d_r b - d_phi a) dr ^ dphi
    step = 1e-5
    _, bp = eta1(d, Rg + step, Pg)
    _, bm = eta1(d, Rg - step, Pg)
    db_dr = (bp - bm) / (2 * step)
    da_dphi = np.fft.ifft(1j * k * np.fft.fft(a, axis=1), axis=1)
    wn = Rg ** n * np.exp(1j * n * Pg)

    def disc(vals):
        return np.sum(wr * 2.0 * math.pi * np.mean(vals, axis=1))

    bulk = disc(wn * (db_dr - da_dphi))
    _, bR = eta1(d, np.full(nphi, R), phi)
    boundary = 2.0 * math.pi * np.mean(R ** n * np.exp(1j * n * phi) * bR)
    # -w^{n-1} dw ^ eta_1 = -r^{n-1} e^{i n phi} (b - i r a) dr ^ dphi
    rewritten = disc(-Rg ** (n - 1) * np.exp(1j * n * Pg) * (b - 1j * Rg * a))
    c = FIBER_NORMALIZATION
    return {"bulk": c * bulk, "boundary": c * boundary, "stokes": c * (bulk - boundary),
            "rewritten": c * rewritten}


# ---------------------------------------------------------------------------
# identities


def deformation_identity_residual(d: Deformation, chart: FiberChart | None = None,
                                  Phi_xi: float | None = None) -> float:
    """Max over the fiber grid of ``|dbar g~ + i_xi omega_1|`` in the ``(dr/r, eta)`` co-basis.

    ``Phi_xi`` overrides the constant used on the field side (negative controls).
    """
    chart = chart or FiberChart()
    R, P = chart.mesh()
    lhs = dbar_extension(d, R, P)
    dx = d if Phi_xi is None else Deformation(d.m, d.amplitude, Phi_xi)
    _, B = omega1(R)
    rhs = contract_vertical(xi_field(dx, R, P), R, P, B)
    return float(max(np.max(np.abs(lhs[0] + rhs[0])), np.max(np.abs(lhs[1] + rhs[1]))))


def complex_symplectic_defect(d: Deformation, chart: FiberChart | None = None, step: float = 1e-6) -> float:
    """Max of ``|d xi^w / d wbar|`` on the fiber grid.

    The fiber part of the complex symplectic form is preserved exactly when the
    ``d/dw`` coefficient is holomorphic; here it is ``wbar^{m-1}``, so only m = 1
    (and the zero field) passes.
    """
    chart = chart or FiberChart(n_r=16, n_phi=16)
    R, P = chart.mesh()
    w = R * np.exp(1j * P)

    def c(z):
        return xi_field(d, np.abs(z), np.angle(z))

    ddx = (c(w + step) - c(w - step)) / (2 * step)
    ddy = (c(w + 1j * step) - c(w - 1j * step)) / (2 * step)
    return float(np.max(np.abs(0.5 * (ddx + 1j * ddy))))
