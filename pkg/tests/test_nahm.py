import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from foldhk import nahm, spectral
from foldhk.frame import FormField, InvariantVectorField, exterior_derivative, wedge
from foldhk.spectral import SField

N = 64
EPS = 0.1


def flow(h=1 / 100, x_max=0.5, **kw):
    return nahm.FlowConfig(h=h, x_max=x_max, n_modes=N, **kw)


@pytest.fixture(scope="module")
def model_traj():
    return nahm.integrate(nahm.model_initial_state(N), flow())


@pytest.fixture(scope="module")
def perturbed():
    out = {}
    for h in (1 / 50, 1 / 100, 1 / 200):
        tr = nahm.integrate(nahm.perturbed_initial_state(EPS, N), flow(h))
        out[h] = (tr, nahm.reconstruct(tr))
    return out


@pytest.fixture(scope="module")
def normalized():
    tr = nahm.integrate(nahm.normalized_initial_state(0.02, N), flow(1 / 200, 0.25))
    return tr, nahm.reconstruct(tr)


# -- right-hand side -------------------------------------------------------


def test_rhs_model():
    d1, d2, d3 = nahm.nahm_rhs(nahm.model_initial_state(N))
    assert np.allclose(d1.coeffs, InvariantVectorField.basis(1, N).coeffs)
    assert d2.max_abs() == 0 and d3.max_abs() == 0


def test_rhs_zero():
    z = InvariantVectorField.zeros(N)
    assert all(v.max_abs() == 0 for v in nahm.nahm_rhs(nahm.NahmState(0.0, z, z, z)))


def test_rhs_sin_datum():
    # [X2 + eps sin X3, X3] = -X1: the X3 part of V2 never differentiates
    sin = SField.from_function(lambda s: np.sin(2 * np.pi * s), N)
    V2 = InvariantVectorField.from_components(0.0, 1.0, EPS * sin, N)
    st0 = nahm.NahmState(0.0, InvariantVectorField.zeros(N), V2, InvariantVectorField.basis(3, N))
    d1, d2, d3 = nahm.nahm_rhs(st0)
    assert np.allclose(d1.coeffs, InvariantVectorField.basis(1, N).coeffs, atol=1e-16)
    assert d2.max_abs() == 0 and d3.max_abs() == 0


# -- integration -----------------------------------------------------------


def test_config_validation():
    with pytest.raises(ValueError):
        nahm.FlowConfig(h=0.03, x_max=0.5)
    with pytest.raises(ValueError):
        nahm.FlowConfig(n_modes=48)
    with pytest.raises(ValueError):
        nahm.FlowConfig(h=-0.1)
    assert nahm.FlowConfig(h=0.1, x_max=0.5).steps == 5


def test_initial_data_checked():
    bad = InvariantVectorField.from_components(0.0, SField.fourier_mode(1, 0.1, N), 1.0, N)
    X2, X3 = InvariantVectorField.basis(2, N), InvariantVectorField.basis(3, N)
    with pytest.raises(ValueError):
        nahm.integrate(nahm.NahmState(0.0, InvariantVectorField.zeros(N), bad, X3), flow())
    with pytest.raises(ValueError):
        nahm.integrate(nahm.NahmState(0.0, X2, X2, X3), flow())
    with pytest.raises(ValueError):
        nahm.integrate(nahm.NahmState(0.1, InvariantVectorField.zeros(N), X2, X3), flow())
    with pytest.raises(ValueError):
        nahm.integrate(nahm.model_initial_state(32), flow())


def test_model_exact(model_traj):
    assert model_traj.x[0] == -0.5 and model_traj.x[-1] == 0.5
    for state in model_traj:
        assert np.allclose(state.V1.coeffs, state.x * InvariantVectorField.basis(1, N).coeffs, rtol=0, atol=1e-12)
        assert np.array_equal(state.V2.coeffs, InvariantVectorField.basis(2, N).coeffs)
        assert np.array_equal(state.V3.coeffs, InvariantVectorField.basis(3, N).coeffs)


@pytest.mark.parametrize("h", [1 / 10, 1 / 20, 1 / 64])
def test_model_exact_any_step(h):
    tr = nahm.integrate(nahm.model_initial_state(N), flow(h, 1.0))
    assert np.max(np.abs(tr.coeffs[:, 0, 0, 0] - tr.x)) <= 1e-12


def test_zero_trajectory():
    z = InvariantVectorField.zeros(N)
    tr = nahm.integrate(nahm.NahmState(0.0, z, z, z), flow())
    assert not np.any(tr.coeffs)


def test_sin_datum_is_static():
    sin = SField.from_function(lambda s: np.sin(2 * np.pi * s), N)
    V2 = InvariantVectorField.from_components(0.0, 1.0, EPS * sin, N)
    st0 = nahm.NahmState(0.0, InvariantVectorField.zeros(N), V2, InvariantVectorField.basis(3, N))
    tr = nahm.integrate(st0, flow())
    assert np.allclose(tr.coeffs[:, 0, 0, 0], tr.x, atol=1e-13)
    assert np.max(np.abs(tr.coeffs[:, 1] - V2.coeffs)) < 1e-16


def test_matches_closed_form(perturbed):
    tr, _ = perturbed[1 / 200]
    m = 2 * N
    s = spectral.grid(m)
    u, w = oracles.perturbed_flow(tr.x, s, EPS)
    assert np.max(np.abs(spectral.to_values(tr.coeffs[:, 0, 0], m) - u)) < 1e-8
    assert np.max(np.abs(spectral.to_values(tr.coeffs[:, 2, 0], m) - w)) < 1e-8
    assert np.max(np.abs(tr.coeffs[:, 0, 1:])) == 0  # V1 has only an X1 part


def test_rk4_error_fourth_order(perturbed):
    m = 2 * N
    s = spectral.grid(m)
    errs = []
    for h in (1 / 50, 1 / 100, 1 / 200):
        tr, _ = perturbed[h]
        u, _ = oracles.perturbed_flow(tr.x, s, EPS)
        errs.append(np.max(np.abs(spectral.to_values(tr.coeffs[:, 0, 0], m) - u)))
    rates = np.log2(np.array(errs[:-1]) / errs[1:])
    assert np.all((rates > 3.7) & (rates < 4.3))


def test_x2_components_bitwise_constant(perturbed):
    tr, _ = perturbed[1 / 100]
    init = tr.initial()
    for a in (1, 2):
        assert np.all(tr.coeffs[:, a, 1] == init.coeffs[a, 1])


def test_residual_ratio_sixteen(perturbed):
    r1 = nahm.nahm_residual(perturbed[1 / 100][0]).max()
    r2 = nahm.nahm_residual(perturbed[1 / 200][0]).max()
    assert 13 < r1 / r2 < 19


def test_residual_detects_wrong_trajectory(perturbed):
    tr, _ = perturbed[1 / 100]
    bad = nahm.Trajectory(tr.x, tr.coeffs * (1 + 1e-3))
    assert nahm.nahm_residual(bad).max() > 1e3 * nahm.nahm_residual(tr).max()


def test_blowup_reports_last_x():
    V3 = InvariantVectorField.from_components(SField.fourier_mode(1, 1.0, N) + SField.fourier_mode(-1, 1.0, N),
                                              0.0, 1.0, N)
    st0 = nahm.NahmState(0.0, InvariantVectorField.zeros(N), InvariantVectorField.basis(2, N), V3)
    with pytest.raises(nahm.FlowBlowUp) as exc:
        nahm.integrate(st0, flow(1 / 100, 5.0, blowup_bound=1e3))
    assert 0 < exc.value.x_last < 5.0
    assert len(exc.value.trajectory) >= 2
    assert np.max(np.abs(exc.value.trajectory.coeffs)) <= 1e3


def test_trajectory_sequence(model_traj):
    assert len(model_traj) == 101
    assert isinstance(model_traj[3], nahm.NahmState)
    assert len(model_traj[1:4]) == 3
    assert model_traj.index_of(0.0) == 50
    with pytest.raises(KeyError):
        model_traj.index_of(0.005)


# -- parity ------------------------------------------------------------------


def test_parity_model(model_traj):
    assert nahm.parity_check(model_traj) == (0.0, 0.0, 0.0)


def test_parity_perturbed(perturbed):
    assert max(nahm.parity_check(perturbed[1 / 200][0])) <= 1e-10


def test_parity_needs_symmetric_range():
    tr = nahm.integrate(nahm.model_initial_state(N), flow(symmetric=False))
    with pytest.raises(ValueError):
        nahm.parity_check(tr)


# -- reconstruction ------------------------------------------------------------


def test_reconstruct_model(model_traj):
    hk = nahm.reconstruct(model_traj)
    x = hk.x
    assert np.allclose(hk.mu[:, 0], x, atol=1e-15)
    model = [
        FormField.monomial((0, 1), 1.0, N, x) + FormField.monomial((2, 3), x[:, None] * np.eye(1, N, 0)[0], N, x),
        FormField.monomial((0, 2), x[:, None] * np.eye(1, N, 0)[0], N, x) - FormField.monomial((1, 3), 1.0, N, x),
        FormField.monomial((0, 3), x[:, None] * np.eye(1, N, 0)[0], N, x) + FormField.monomial((1, 2), 1.0, N, x),
    ]
    for w, ref in zip(hk.omega, model):
        assert (w - ref).max_abs() < 1e-14
    for i, xi in enumerate(x):
        if abs(xi) < 0.01 - 1e-12:
            assert np.all(np.isnan(hk.metric[i]))
        else:
            assert np.allclose(hk.metric[i, :, :, 0], np.diag([xi, 1 / xi, xi, xi]), atol=1e-12)
            assert np.max(np.abs(hk.metric[i, :, :, 1:])) < 1e-14


def test_mu_odd(perturbed):
    _, hk = perturbed[1 / 100]
    assert np.max(np.abs(hk.mu + hk.mu[::-1])) < 1e-12
    assert np.max(np.abs(hk.mu[hk.x == 0])) == 0


def test_reconstruct_dilation(model_traj):
    # h_t^* g0 = t^3 g0: weights (t, t^2, t, t) applied to g(t x) give t^3 g(x)
    hk = nahm.reconstruct(model_traj)
    t = 2.0
    w = np.array([t, t * t, t, t])
    for xi in (0.1, 0.2, 0.25):
        g_x = hk.metric[model_traj.index_of(xi), :, :, 0].real
        g_tx = hk.metric[model_traj.index_of(t * xi), :, :, 0].real
        assert np.allclose(np.outer(w, w) * g_tx, t ** 3 * g_x, rtol=1e-13)
        assert hk.mu[model_traj.index_of(t * xi), 0].real == pytest.approx(t * hk.mu[model_traj.index_of(xi), 0].real)


def test_reconstruct_singular():
    x = np.linspace(-0.1, 0.1, 5)
    c = np.zeros((5, 3, 3, N))
    c[:, 1, 1, 0] = 1.0
    c[:, 2, 1, 0] = 1.0  # V2 = V3 everywhere
    with pytest.raises(ValueError):
        nahm.reconstruct(nahm.Trajectory(x, c))


def test_wedge_identity(perturbed):
    for h in perturbed:
        assert nahm.wedge_identity_residual(perturbed[h][1]) <= 1e-12


def test_wedge_identity_independent_of_solution(rng):
    # the identity is algebraic: any invertible frame satisfies it
    x = np.linspace(0.1, 0.5, 5)
    c = np.zeros((5, 3, 3, N), dtype=complex)
    c[..., 0] = rng.standard_normal((5, 3, 3)) + 3 * np.eye(3)
    c[..., 1] = rng.standard_normal((5, 3, 3)) * 0.1
    c[..., -1] = c[..., 1]
    hk = nahm.reconstruct(nahm.Trajectory(x, c))
    assert nahm.wedge_identity_residual(hk) < 1e-12


def test_omega_squares_to_twice_mu_volume(perturbed):
    # omega_1^2 = 2 mu^2 v0^v1^v2^v3 and v1^v2^v3 = theta1^theta2^theta3 / mu
    _, hk = perturbed[1 / 100]
    top = wedge(hk.omega[0], hk.omega[0]).coeffs[0]
    assert np.max(np.abs(top - 2 * hk.mu)) < 1e-12


def test_closed_model(model_traj):
    assert max(nahm.closedness_residual(nahm.reconstruct(model_traj))) <= 1e-12


def test_closedness_order(perturbed):
    r = [max(nahm.closedness_residual(perturbed[h][1])) for h in (1 / 50, 1 / 100, 1 / 200)]
    assert r[0] / r[1] > 3.4 and r[1] / r[2] > 3.4


def test_closedness_negative_control():
    # frozen frame (X1, X2, X3) for every x is not a Nahm solution
    x = np.linspace(0.1, 0.5, 9)
    c = np.zeros((9, 3, 3, N))
    for a in range(3):
        c[:, a, a, 0] = 1.0
    hk = nahm.reconstruct(nahm.Trajectory(x, c))
    assert max(nahm.closedness_residual(hk)) > 0.5


def test_closedness_needs_points():
    x = np.linspace(0.1, 0.4, 4)
    c = np.zeros((4, 3, 3, N))
    for a in range(3):
        c[:, a, a, 0] = 1.0
    with pytest.raises(ValueError):
        nahm.closedness_residual(nahm.reconstruct(nahm.Trajectory(x, c)))


# -- fold asymptotics ---------------------------------------------------------


def test_fold_model_exact(model_traj):
    rep = nahm.fold_asymptotics(nahm.reconstruct(model_traj))
    assert rep.mu_c1[0] == pytest.approx(1.0, abs=1e-14)
    assert np.max(np.abs(rep.mu_c3)) < 1e-12
    assert np.max(rep.v1_remainder) < 1e-14
    assert np.max(rep.omega_remainder) < 1e-14
    assert np.max(rep.quaternion_remainder) < 1e-14
    assert rep.normalized


def test_fold_perturbed_v1(perturbed):
    rep = nahm.fold_asymptotics(perturbed[1 / 200][1])
    assert 2.7 <= rep.v1_exponent <= 3.3
    # mu = x - eps cos(2 pi s) sinh(2 pi x)/(2 pi): c1 = 1 - eps cos, c3 = -eps (2 pi)^2 cos / 6
    c1 = rep.mu_c1
    assert c1[0] == pytest.approx(1.0, abs=1e-6)
    assert c1[1] == pytest.approx(-EPS / 2, rel=1e-3)  # x^5 term biases the cubic fit
    assert rep.mu_c3[1] == pytest.approx(-EPS * (2 * math.pi) ** 2 / 12, rel=0.05)


def test_fold_normalized_data(normalized):
    _, hk = normalized
    rep = nahm.fold_asymptotics(hk)
    assert rep.normalized
    assert rep.omega_exponent >= 2.7
    assert rep.metric_exponent >= 2.7
    assert rep.quaternion_exponent >= 1.8
    assert 2.7 <= rep.v1_exponent <= 3.3


def test_fold_needs_resolution(perturbed):
    with pytest.raises(ValueError):
        nahm.fold_asymptotics(perturbed[1 / 50][1], x_fit=0.05)


def test_fit_exponent():
    x = np.linspace(0.01, 0.1, 10)
    assert nahm.fit_exponent(x, 3 * x ** 3) == pytest.approx(3.0)
    assert math.isnan(nahm.fit_exponent(x, 0 * x))


# -- normalization of the restricted forms ------------------------------------


def _forms(c2, c3):
    return (FormField.monomial((1, 3), -c2, N), FormField.monomial((1, 2), c3, N))


def _check_coframe(t, b2, b3, atol):
    t1, t2, t3 = t
    assert ((-(t1 ^ t3)) - b2).max_abs() < atol
    assert ((t1 ^ t2) - b3).max_abs() < atol
    assert (exterior_derivative(t1) - (t2 ^ t3)).max_abs() < atol


def test_bryant_identity_datum():
    b2, b3 = _forms(1.0, 1.0)
    t = nahm.bryant_normalize(b2, b3)
    for i, ti in enumerate(t):
        assert (ti - FormField.monomial((i + 1,), 1.0, N)).max_abs() < 1e-14


@pytest.mark.parametrize("c", [0.5, 1.3, 2.0])
def test_bryant_constant_scale(c):
    b2, b3 = _forms(c * c, c * c)
    t = nahm.bryant_normalize(b2, b3)
    _check_coframe(t, b2, b3, 1e-13)
    # worked by hand: theta~1 = c^(4/3) theta1, theta~2,3 = c^(2/3) theta2,3
    assert t[0].component((1,))[0] == pytest.approx(c ** (4 / 3))
    assert t[1].component((2,))[0] == pytest.approx(c ** (2 / 3))


def test_bryant_s_dependent(normalized):
    tr, hk = normalized
    i0 = tr.index_of(0.0)
    b2 = nahm.restriction(hk.omega[1], i0)
    b3 = nahm.restriction(hk.omega[2], i0)
    t = nahm.bryant_normalize(b2, b3)
    _check_coframe(t, b2, b3, 1e-10)


@given(st.floats(0.01, 0.2), st.floats(0.0, 0.2))
def test_bryant_a_posteriori(d, e):
    s = lambda s: 1.0 + d * np.cos(2 * np.pi * s) + e * np.sin(4 * np.pi * s)
    b2 = FormField.monomial((1, 3), -SField.from_function(s, N).coeffs, N) \
        + FormField.monomial((2, 3), SField.from_function(lambda v: d * np.sin(2 * np.pi * v), N).coeffs, N)
    b3 = FormField.monomial((1, 2), 1.0, N)
    t = nahm.bryant_normalize(b2, b3)
    _check_coframe(t, b2, b3, 1e-9)


def test_bryant_degenerate():
    b2, _ = _forms(1.0, 1.0)
    with pytest.raises(ValueError):
        nahm.bryant_normalize(b2, b2)


def test_bryant_non_contact():
    # kernels X1 and X3 span a distribution containing the Reeb direction: d alpha0 = 0 on it
    b2 = FormField.monomial((2, 3), 1.0, N)
    b3 = FormField.monomial((1, 2), 1.0, N)
    with pytest.raises(ValueError, match="non-contact"):
        nahm.bryant_normalize(b2, b3)


def test_bryant_rejects_dx():
    with pytest.raises(ValueError):
        nahm.bryant_normalize(FormField.monomial((0, 1), 1.0, N), FormField.monomial((1, 2), 1.0, N))
