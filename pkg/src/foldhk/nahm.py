"""Nahm flow of volume-preserving fields and the folded hyperkähler triple it generates.

A state is three fields ``V_a = f_a X1 + g_a X2 + h_a X3`` with s-dependent
coefficients, evolved in the fold coordinate ``x`` by

    dV1/dx = -[V2, V3],  dV2/dx = -[V3, V1],  dV3/dx = -[V1, V2]

from ``V1(0) = 0``.  The metric is ``mu * sum (v^i)^2`` in the coframe dual to
``(d/dx, V1, V2, V3)`` with ``mu = vol(V1, V2, V3)``, and the Kähler forms are
``omega_a = mu (v^0 ^ v^a + v^b ^ v^c)`` for cyclic ``(a, b, c)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import spectral
from .frame import (
    FormField,
    InvariantVectorField,
    MONOMIALS,
    bracket_coeffs,
    exterior_derivative,
    lie_bracket,
    wedge,
)

LEVI_CIVITA = np.zeros((3, 3, 3))
for _a, _b, _c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    LEVI_CIVITA[_a, _b, _c] = 1.0
    LEVI_CIVITA[_a, _c, _b] = -1.0


class FlowBlowUp(RuntimeError):
    """The integrated fields left the configured bound."""

    def __init__(self, x_last: float, trajectory: "Trajectory"):
        super().__init__(f"Nahm flow exceeded its bound after x = {x_last:g}")
        self.x_last = x_last
        self.trajectory = trajectory


@dataclass(frozen=True)
class NahmState:
    x: float
    V1: InvariantVectorField
    V2: InvariantVectorField
    V3: InvariantVectorField

    @property
    def fields(self) -> tuple[InvariantVectorField, ...]:
        return (self.V1, self.V2, self.V3)

    @property
    def coeffs(self) -> np.ndarray:
        return np.stack([v.coeffs for v in self.fields])

    @property
    def n(self) -> int:
        return self.V1.n

    @classmethod
    def from_coeffs(cls, x: float, c: np.ndarray) -> "NahmState":
        return cls(float(x), *(InvariantVectorField(c[a]) for a in range(3)))


@dataclass(frozen=True)
class FlowConfig:
    h: float = 1.0 / 100
    x_max: float = 0.5
    n_modes: int = 64
    symmetric: bool = True
    blowup_bound: float = 1e6
    # coefficients below this modulus are zeroed after every step (X1/X3 parts only)
    filter_tol: float = 1e-13

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("step h must be positive")
        if not self.x_max > 0:
            raise ValueError("x_max must be positive")
        ratio = self.x_max / self.h
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ValueError(f"h = {self.h} does not divide x_max = {self.x_max}")
        n = self.n_modes
        if n < 2 or n & (n - 1):
            raise ValueError(f"n_modes = {n} is not a power of two")

    @property
    def steps(self) -> int:
        return int(round(self.x_max / self.h))


@dataclass(frozen=True)
class Trajectory(Sequence):
    """States on an ascending x-grid; ``coeffs[i, a]`` is the (3, N) array of V_{a+1}."""

    x: np.ndarray
    coeffs: np.ndarray

    def __len__(self):
        return len(self.x)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        return NahmState.from_coeffs(self.x[i], self.coeffs[i])

    @property
    def n(self) -> int:
        return self.coeffs.shape[-1]

    @property
    def h(self) -> float:
        return float(self.x[1] - self.x[0])

    def index_of(self, x: float) -> int:
        i = int(np.argmin(np.abs(self.x - x)))
        if abs(self.x[i] - x) > 1e-9 * max(1.0, abs(x)):
            raise KeyError(f"x = {x} not on the trajectory grid")
        return i

    def initial(self) -> NahmState:
        return self[self.index_of(0.0)]


def _rhs(c: np.ndarray) -> np.ndarray:
    """Right-hand side on a stacked (..., 3, 3, N) array."""
    v1, v2, v3 = c[..., 0, :, :], c[..., 1, :, :], c[..., 2, :, :]
    return -np.stack([bracket_coeffs(v2, v3), bracket_coeffs(v3, v1), bracket_coeffs(v1, v2)], axis=-3)


def nahm_rhs(state: NahmState) -> tuple[InvariantVectorField, InvariantVectorField, InvariantVectorField]:
    V1, V2, V3 = state.fields
    return (-lie_bracket(V2, V3), -lie_bracket(V3, V1), -lie_bracket(V1, V2))


def _rk4_step(c: np.ndarray, h: float) -> np.ndarray:
    k1 = _rhs(c)
    k2 = _rhs(c + 0.5 * h * k1)
    k3 = _rhs(c + 0.5 * h * k2)
    k4 = _rhs(c + h * k3)
    return c + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _filter(c: np.ndarray, tol: float) -> np.ndarray:
    if tol <= 0:
        return c
    out = c.copy()
    for comp in (0, 2):
        out[:, comp] = spectral.krasny_filter(out[:, comp], tol)
    return out


def check_initial(init: NahmState, atol: float = 0.0) -> None:
    if init.x != 0.0:
        raise ValueError("initial data must sit on the fold x = 0")
    if np.max(np.abs(init.V1.coeffs)) > atol:
        raise ValueError("V1(0) must vanish")
    for name, v in (("V2", init.V2), ("V3", init.V3)):
        if not v.is_volume_preserving():
            raise ValueError(f"{name}(0) is not volume preserving (X2 component varies in s)")


def integrate(init: NahmState, cfg: FlowConfig) -> Trajectory:
    """Classical fixed-step RK4 from ``x = 0`` out to ``x_max`` (and to ``-x_max`` if symmetric)."""
    check_initial(init)
    if init.n != cfg.n_modes:
        raise ValueError(f"initial data has {init.n} modes, config asks for {cfg.n_modes}")
    c0 = init.coeffs

    def march(sign: float) -> list[np.ndarray]:
        out = [c0]
        c = c0
        for k in range(1, cfg.steps + 1):
            c = _filter(_rk4_step(c, sign * cfg.h), cfg.filter_tol)
            if not np.all(np.isfinite(c)) or np.max(np.abs(c)) > cfg.blowup_bound:
                xs = sign * cfg.h * np.arange(len(out))
                partial = _assemble(xs, out, sign)
                raise FlowBlowUp(float(xs[-1]), partial)
            out.append(c)
        return out

    fwd = march(+1.0)
    xs_f = cfg.h * np.arange(cfg.steps + 1)
    if not cfg.symmetric:
        return Trajectory(xs_f, np.stack(fwd))
    bwd = march(-1.0)
    xs = np.concatenate([-xs_f[:0:-1], xs_f])
    return Trajectory(xs, np.stack(bwd[:0:-1] + fwd))


def _assemble(xs, states, sign) -> Trajectory:
    if sign > 0:
        return Trajectory(np.asarray(xs), np.stack(states))
    return Trajectory(np.asarray(xs)[::-1], np.stack(states[::-1]))


def _sup(c: np.ndarray) -> np.ndarray:
    """Sup over s of |profile|, reduced over every axis but the first."""
    v = np.abs(spectral.to_values(c, 2 * c.shape[-1]))
    return v.reshape(v.shape[0], -1).max(axis=1)


def parity_check(traj: Trajectory) -> tuple[float, float, float]:
    """Max over x of |V1(x) + V1(-x)|, |V2(x) - V2(-x)|, |V3(x) - V3(-x)|."""
    x = traj.x
    if not np.allclose(x, -x[::-1], rtol=0, atol=1e-12):
        raise ValueError("parity check needs an x-range symmetric about the fold")
    c = traj.coeffs
    r = c[::-1]
    return (
        float(np.max(_sup(c[:, 0] + r[:, 0]))),
        float(np.max(_sup(c[:, 1] - r[:, 1]))),
        float(np.max(_sup(c[:, 2] - r[:, 2]))),
    )


def nahm_residual(traj: Trajectory) -> np.ndarray:
    """Per-step defect of the trajectory against the integral form of the Nahm system.

    Each step is checked with Simpson's rule, the midpoint state taken from the
    cubic Hermite interpolant built from the states and their slopes.  The defect
    ``|V(x+h) - V(x) - integral of F| / h`` is O(h^4) for an RK4 trajectory.
    """
    c = traj.coeffs
    h = np.diff(traj.x)
    f = _rhs(c)
    hb = h[:, None, None, None]
    mid = 0.5 * (c[:-1] + c[1:]) + hb / 8.0 * (f[:-1] - f[1:])
    fm = _rhs(mid)
    defect = (c[1:] - c[:-1]) / hb - (f[:-1] + 4 * fm + f[1:]) / 6.0
    return _sup(defect)


# ---------------------------------------------------------------------------
# reconstruction


@dataclass(frozen=True)
class HKTriple:
    """Conformal factor, Kähler forms and metric on the (x, s) grid.

    ``metric`` holds coefficient arrays indexed ``[ix, i, j, mode]`` in the coframe
    ``(dx, theta1, theta2, theta3)``; rows with ``|x| < h`` are NaN.
    """

    x: np.ndarray
    mu: np.ndarray
    omega: tuple[FormField, FormField, FormField]
    metric: np.ndarray
    cof: np.ndarray = field(repr=False)
    trajectory: Trajectory | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.mu.shape[-1]


def _cofactors(cv: np.ndarray) -> np.ndarray:
    """Cofactor matrix over axes (-3, -2) of pointwise values ``cv[..., a, i, s]``."""
    m = np.moveaxis(cv, -1, -3)  # (..., s, a, i)
    cof = np.empty_like(m)
    for a in range(3):
        for i in range(3):
            rows = [r for r in range(3) if r != a]
            cols = [q for q in range(3) if q != i]
            minor = (m[..., rows[0], cols[0]] * m[..., rows[1], cols[1]]
                     - m[..., rows[0], cols[1]] * m[..., rows[1], cols[0]])
            cof[..., a, i] = (-1) ** (a + i) * minor
    return np.moveaxis(cof, -3, -1)


def frame_algebra(cv: np.ndarray):
    """Pointwise ``mu``, cofactors and 2-form components from field values ``cv[..., a, i, s]``.

    The 2-form components are ordered as ``MONOMIALS[2]`` and follow from
    ``omega_a = dx ^ (mu v^a) + i_{V_a} vol``, which needs no division by ``mu``.
    """
    cof = _cofactors(cv)
    mu = np.einsum("...ias,...ias->...s", cv[..., :1, :, :], cof[..., :1, :, :])
    forms = []
    for a in range(3):
        f, g, h = cv[..., a, 0, :], cv[..., a, 1, :], cv[..., a, 2, :]
        comps = [cof[..., a, 0, :], cof[..., a, 1, :], cof[..., a, 2, :], h, -g, f]
        forms.append(np.stack(comps))
    return mu, cof, forms


def reconstruct(traj: Trajectory, mu_floor: float = 1e-12) -> HKTriple:
    """Build ``mu``, the metric and the Kähler triple from a Nahm trajectory."""
    n = traj.n
    m = 2 * n
    cv = spectral.to_values(traj.coeffs, m)  # (nx, a, i, s)
    mu, cof, forms = frame_algebra(cv)
    x = traj.x
    h = abs(traj.h)
    away = np.abs(x) >= h * (1 - 1e-9)
    bad = away[:, None] & (np.abs(mu) <= mu_floor)
    if np.any(bad):
        ix = np.where(bad.any(axis=1))[0][0]
        raise ValueError(f"singular coefficient matrix away from the fold at x = {x[ix]:g}")
    omega = tuple(FormField(2, spectral.from_values(fv, n), x) for fv in forms)

    g = np.full((len(x), 4, 4, m), np.nan, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_mu = np.where(away[:, None], 1.0 / mu, np.nan)
        g[:, 0, 0] = mu
        g[:, 1:, 1:] = np.einsum("xais,xajs->xijs", cof, cof) * inv_mu[:, None, None, :]
        g[:, 0, 1:] = 0.0
        g[:, 1:, 0] = 0.0
    g[~away] = np.nan
    metric = np.where(away[:, None, None, None], spectral.from_values(np.nan_to_num(g), n), np.nan)
    return HKTriple(x, spectral.from_values(mu, n), omega, metric, spectral.from_values(cof, n), traj)


def wedge_identity_residual(hk: HKTriple) -> float:
    """Max over (a, b) and the grid of |omega_a ^ omega_b - delta_ab omega_1 ^ omega_1|."""
    vol = wedge(hk.omega[0], hk.omega[0])
    worst = 0.0
    for a in range(3):
        for b in range(a, 3):
            diff = wedge(hk.omega[a], hk.omega[b])
            if a == b:
                diff = diff - vol
            worst = max(worst, diff.max_abs())
    return worst


def closedness_residual(hk: HKTriple) -> tuple[float, float, float]:
    """Sup norms of ``d omega_a`` (x-derivatives by finite differences)."""
    if len(hk.x) < 5:
        raise ValueError("closedness check needs at least 5 x-grid points")
    return tuple(exterior_derivative(w).max_abs() for w in hk.omega)


# ---------------------------------------------------------------------------
# Bryant normalization


@dataclass(frozen=True)
class BryantFrame:
    """Normalized coframe and its dual frame, as pointwise matrices on the s-grid.

    ``coframe[i, j, s]``: component of theta~^(i+1) along theta^(j+1);
    ``frame[i, j, s]``: component of X~_(i+1) along X_(j+1).
    """

    coframe: np.ndarray
    frame: np.ndarray
    scale: np.ndarray
    n: int

    def forms(self) -> tuple[FormField, FormField, FormField]:
        out = []
        for i in range(3):
            c = np.zeros((4, self.n), dtype=complex)
            c[1:] = spectral.from_values(self.coframe[i], self.n)
            out.append(FormField(1, c))
        return tuple(out)


def _hodge_vector(beta: FormField, m: int) -> np.ndarray:
    """Vector K with ``i_K (theta1^theta2^theta3) = beta`` (spans ker beta)."""
    if beta.degree != 2 or beta.x is not None:
        raise ValueError("expected a 2-form on X")
    for mono in ((0, 1), (0, 2), (0, 3)):
        if np.any(beta.component(mono) != 0):
            raise ValueError("2-form on X must not contain dx")
    b12 = spectral.to_values(beta.component((1, 2)), m)
    b13 = spectral.to_values(beta.component((1, 3)), m)
    b23 = spectral.to_values(beta.component((2, 3)), m)
    return np.stack([b23, -b13, b12])


def bryant_frame(beta2: FormField, beta3: FormField, contact_tol: float = 1e-8) -> BryantFrame:
    """Coframe with ``beta2 = -t1^t3``, ``beta3 = t1^t2``, ``dt1 = t2^t3`` (pointwise in s)."""
    n = beta2.n
    m = 2 * n
    k2 = _hodge_vector(beta2, m)
    k3 = _hodge_vector(beta3, m)
    span = np.linalg.norm(np.cross(k2, k3, axis=0), axis=0)
    scale = max(np.max(np.abs(k2)), np.max(np.abs(k3)), 1e-300)
    if np.min(span) <= contact_tol * scale ** 2:
        raise ValueError("degenerate kernels: ker beta2 and ker beta3 are not transverse")
    # alpha0 = vol(K2, K3, .) annihilates both kernels
    alpha0 = np.cross(k2, k3, axis=0)
    a_form = FormField(1, np.concatenate([np.zeros((1, n)), spectral.from_values(alpha0, n)]))
    da = exterior_derivative(a_form, in_x=False)
    dv = {mono: spectral.to_values(da.component(mono), m) for mono in ((1, 2), (1, 3), (2, 3))}

    def pair(v, w):
        return sum(dv[(i, j)] * (v[i - 1] * w[j - 1] - v[j - 1] * w[i - 1]) for (i, j) in dv)

    lam3 = pair(k2, k3)
    if np.max(np.abs(lam3.imag)) > 1e-10 * max(1.0, np.max(np.abs(lam3))):
        raise ValueError("complex data: the normalization needs real forms")
    lam3 = lam3.real
    if np.min(np.abs(lam3)) <= contact_tol * scale ** 4:
        raise ValueError("non-contact data: kernels do not span a contact distribution")
    lam = np.cbrt(lam3)
    t1 = alpha0.real / lam
    x2 = k2.real / lam
    x3 = k3.real / lam
    # Reeb field of t1: kernel of dt1, normalized by t1(X1~) = 1
    t1_form = FormField(1, np.concatenate([np.zeros((1, n)), spectral.from_values(t1, n)]))
    dt1 = exterior_derivative(t1_form, in_x=False)
    reeb = np.stack([
        spectral.to_values(dt1.component((2, 3)), m),
        -spectral.to_values(dt1.component((1, 3)), m),
        spectral.to_values(dt1.component((1, 2)), m),
    ]).real
    x1 = reeb / np.einsum("is,is->s", t1, reeb)
    frame = np.stack([x1, x2, x3])  # (i, j, s)
    fr = np.moveaxis(frame, -1, 0)
    cof = np.linalg.inv(fr).transpose(0, 2, 1)  # rows: coframe components
    coframe = np.moveaxis(cof, 0, -1)
    return BryantFrame(coframe, frame, lam, n)


def bryant_normalize(beta2: FormField, beta3: FormField) -> tuple[FormField, FormField, FormField]:
    """The unique coframe (theta~1, theta~2, theta~3) adapted to the restricted forms."""
    return bryant_frame(beta2, beta3).forms()


# ---------------------------------------------------------------------------
# fold asymptotics


def fit_exponent(x: np.ndarray, r: np.ndarray, floor: float = 1e-13) -> float:
    """Least-squares slope of log r against log x; NaN when r sits at round-off."""
    x = np.asarray(x, dtype=float)
    r = np.asarray(r, dtype=float)
    keep = r > floor
    if keep.sum() < 3:
        return float("nan")
    p = np.polyfit(np.log(x[keep]), np.log(r[keep]), 1)
    return float(p[0])


def restriction(form: FormField, i0: int) -> FormField:
    """Pull a 2-form on the (x, s) grid back to X at grid index ``i0``."""
    c = form.coeffs[:, i0, :].copy()
    for k, mono in enumerate(MONOMIALS[2]):
        if 0 in mono:
            c[k] = 0.0
    return FormField(2, c)


def _change_coframe(a: np.ndarray, t: np.ndarray, sym: bool) -> np.ndarray:
    """Components of a 2-tensor in a new coframe.

    ``a[..., i, j, s]`` in the old coframe with ``e_old^i = sum_k t[i, k] e_new^k``.
    """
    return np.einsum("iks,...ijs,jls->...kls", t, a, t)


def _antisym(vals: np.ndarray) -> np.ndarray:
    """(6, ..., s) 2-form components -> (..., 4, 4, s) antisymmetric matrices."""
    shape = vals.shape[1:-1]
    out = np.zeros(shape + (4, 4, vals.shape[-1]), dtype=vals.dtype)
    for k, (i, j) in enumerate(MONOMIALS[2]):
        out[..., i, j, :] = vals[k]
        out[..., j, i, :] = -vals[k]
    return out


@dataclass
class FoldReport:
    mu_c1: np.ndarray
    mu_c3: np.ndarray
    mu_fit_residual: float
    x: np.ndarray
    v1_remainder: np.ndarray
    v1_exponent: float
    omega_remainder: np.ndarray
    omega_exponent: float
    metric_remainder: np.ndarray
    metric_exponent: float
    quaternion_remainder: np.ndarray
    quaternion_exponent: float
    normalized: bool

    def summary(self) -> dict:
        return {
            "mu_c1_mean": float(np.real(self.mu_c1[0])),
            "mu_c3_max": float(np.max(np.abs(self.mu_c3))),
            "mu_fit_residual": self.mu_fit_residual,
            "v1_exponent": self.v1_exponent,
            "v1_remainder_max": float(np.max(self.v1_remainder)),
            "omega_exponent": self.omega_exponent,
            "omega_remainder_max": float(np.max(self.omega_remainder)),
            "metric_exponent": self.metric_exponent,
            "quaternion_exponent": self.quaternion_exponent,
            "quaternion_remainder_max": float(np.max(self.quaternion_remainder)),
            "normalized": self.normalized,
        }


def fold_asymptotics(hk: HKTriple, x_fit: float = 0.1, min_points: int = 4) -> FoldReport:
    """Expansion of the structure near the fold, on the side x > 0.

    * ``mu ~ c1 x + c3 x^3`` by least squares (per Fourier mode);
    * ``|V1(x) - x X1~|`` with ``X1~ = -[V2(0), V3(0)]`` and its power law;
    * the Kähler forms and metric against the model expressions written in the
      coframe normalized from ``omega_2, omega_3`` on X, in the rescaled basis
      ``(dx, theta~1/x, theta~2, theta~3)``;
    * ``J_a e0 - e^a`` and ``J_a e^b - eps_abc e^c`` in that basis.
    """
    traj = hk.trajectory
    if traj is None:
        raise ValueError("fold asymptotics needs the trajectory behind the triple")
    h = abs(traj.h)
    x = hk.x
    sel = np.where((x >= h * (1 - 1e-9)) & (x <= x_fit * (1 + 1e-12)))[0]
    if len(sel) < min_points:
        raise ValueError("insufficient near-fold resolution: refine h or widen x_fit")
    xs = x[sel]
    n = hk.n
    m = 2 * n
    i0 = traj.index_of(0.0)

    # mu ~ c1 x + c3 x^3
    design = np.stack([xs, xs ** 3], axis=1)
    sol, *_ = np.linalg.lstsq(design, hk.mu[sel], rcond=None)
    mu_fit_res = float(np.max(np.abs(design @ sol - hk.mu[sel])))

    # V1 against its leading term
    c0 = traj.coeffs[i0]
    x1t = -bracket_coeffs(c0[1], c0[2])
    v1_rem = _sup(traj.coeffs[sel, 0] - xs[:, None, None] * x1t[None])
    v1_exp = fit_exponent(xs, v1_rem)

    # adapted coframe on X from the restricted forms
    bf = bryant_frame(restriction(hk.omega[1], i0), restriction(hk.omega[2], i0))
    p = bf.coframe  # theta~ = p theta
    q = np.moveaxis(np.linalg.inv(np.moveaxis(p, -1, 0)), 0, -1)  # theta = q theta~
    t = np.zeros((4, 4, m))
    t[0, 0] = 1.0
    t[1:, 1:] = q
    scale = np.ones((len(sel), 4))
    scale[:, 1] = xs  # theta~1 = x e1

    def to_e(a):  # (nsel, 4, 4, s) in theta basis -> e basis
        b = _change_coframe(a, t, sym=False)
        return b * scale[:, :, None, None] * scale[:, None, :, None]

    model = np.zeros((3, len(sel), 4, 4))
    for a, (b, c) in enumerate(((2, 3), (3, 1), (1, 2))):
        model[a, :, 0, a + 1] = xs
        model[a, :, a + 1, 0] = -xs
        model[a, :, b, c] = xs
        model[a, :, c, b] = -xs
    om_e = []
    om_rem = np.zeros(len(sel))
    for a in range(3):
        vals = spectral.to_values(hk.omega[a].coeffs[:, sel], m)
        e = to_e(_antisym(vals))
        om_e.append(e)
        om_rem = np.maximum(om_rem, np.max(np.abs(e - model[a][..., None]), axis=(1, 2, 3)))
    om_exp = fit_exponent(xs, om_rem)

    g_vals = spectral.to_values(hk.metric[sel], m)
    g_e = to_e(g_vals)
    g_rem = np.max(np.abs(g_e - xs[:, None, None, None] * np.eye(4)[None, :, :, None]), axis=(1, 2, 3))
    g_exp = fit_exponent(xs, g_rem)

    # complex structures acting on 1-forms: J alpha = -Omega G^{-1} alpha
    gm = np.moveaxis(g_e, -1, 1)  # (nsel, s, 4, 4)
    ginv = np.linalg.inv(gm)
    q_rem = np.zeros(len(sel))
    for a in range(3):
        om = np.moveaxis(om_e[a], -1, 1)
        jmat = -om @ ginv
        target = np.zeros((4, 4))
        target[a + 1, 0] = 1.0  # J_a e0 = e^a
        target[0, a + 1] = -1.0
        for b in range(3):
            for c in range(3):
                if LEVI_CIVITA[a, b, c]:
                    target[c + 1, b + 1] = LEVI_CIVITA[a, b, c]
        q_rem = np.maximum(q_rem, np.max(np.abs(jmat.real - target), axis=(1, 2, 3)))
    q_exp = fit_exponent(xs, q_rem)

    normalized = bool(np.max(np.abs(bf.scale - 1.0)) < 1e-8)
    return FoldReport(sol[0], sol[1], mu_fit_res, xs, v1_rem, v1_exp, om_rem, om_exp,
                      g_rem, g_exp, q_rem, q_exp, normalized)


# ---------------------------------------------------------------------------
# initial data


def model_initial_state(n: int = 64) -> NahmState:
    """``(0, X2, X3)``: the flat Heisenberg model."""
    return NahmState(0.0, InvariantVectorField.zeros(n), InvariantVectorField.basis(2, n),
                     InvariantVectorField.basis(3, n))


def perturbed_initial_state(eps: float = 0.1, n: int = 64) -> NahmState:
    """``V2(0) = X2 + eps sin(2 pi s) X3``, ``V3(0) = X3 + eps sin(2 pi s)/(2 pi) X1``.

    The X3-part of V2 drops out of every bracket in this class; the X1-part of V3
    drives a flow with ``mu = x - eps cos(2 pi s) sinh(2 pi x) / (2 pi)``.
    """
    sin = spectral.SField.fourier_mode(1, -0.5j, n) + spectral.SField.fourier_mode(-1, 0.5j, n)
    V2 = InvariantVectorField.from_components(0.0, 1.0, eps * sin, n)
    V3 = InvariantVectorField.from_components(eps / (2 * math.pi) * sin, 0.0, 1.0, n)
    return NahmState(0.0, InvariantVectorField.zeros(n), V2, V3)


def normalized_initial_state(delta: float = 0.02, n: int = 64) -> NahmState:
    """Initial fields already in normal form for the restricted forms.

    ``V2(0) = X2`` and ``V3(0) = rho c X1 + c X3`` with ``rho = delta sin(2 pi s)/(2 pi)``
    and ``c = (1 - rho')^(-1/2)``, so ``vol(X1~, V2, V3) = 1`` and
    ``[X1~, V_j]`` has no X1~-component.
    """
    def c(s):
        return (1.0 - delta * np.cos(2 * np.pi * s)) ** -0.5

    def a(s):
        return delta * np.sin(2 * np.pi * s) / (2 * np.pi) * c(s)

    V3 = InvariantVectorField(np.stack([
        spectral.SField.from_function(a, n).coeffs,
        np.zeros(n),
        spectral.SField.from_function(c, n).coeffs,
    ]))
    return NahmState(0.0, InvariantVectorField.zeros(n), InvariantVectorField.basis(2, n), V3)
