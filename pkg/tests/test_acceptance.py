"""Acceptance criteria, one test each; every test records a PASS/FAIL line.

The lines are printed in the pytest terminal summary, and directly when this
file is run as a script (``python tests/test_acceptance.py``).
"""
import filecmp
import time

import numpy as np
import pytest

import oracles
from foldhk import cli, spectral
from foldhk import cotangent as cot
from foldhk import laplacian as lap
from foldhk import nahm
from foldhk.frame import dilation_pullback, model_metric_g0
from foldhk.suites import fitted_order, random_mode, random_profile

LINES = []


def record(tag, checks, elapsed, limit):
    """``checks`` maps a description to (value, passed)."""
    ok = all(p for _, p in checks.values()) and elapsed < limit
    parts = ", ".join(f"{k}={v:.4g}" for k, (v, _) in checks.items())
    LINES.append(f"[{'PASS' if ok else 'FAIL'}] {tag}: {parts}; runtime {elapsed:.2f}s (< {limit:g}s)")
    bad = [k for k, (_, p) in checks.items() if not p]
    assert not bad, f"{tag}: failed {bad}"
    assert elapsed < limit, f"{tag}: runtime {elapsed:.2f}s"


def test_criterion_1_exact_model():
    t0 = time.perf_counter()
    n = 64
    tr = nahm.integrate(nahm.model_initial_state(n), nahm.FlowConfig(h=1 / 100, x_max=0.5, n_modes=n))
    want = np.zeros_like(tr.coeffs)
    want[:, 0, 0, 0] = tr.x
    want[:, 1, 1, 0] = 1.0
    want[:, 2, 2, 0] = 1.0
    state = float(np.max(np.abs(tr.coeffs - want)))
    hk = nahm.reconstruct(tr)
    metric = 0.0
    for i, x in enumerate(tr.x):
        if x == 0:
            continue
        metric = max(metric, float(np.max(np.abs(hk.metric[i, :, :, 0] - np.diag([x, 1 / x, x, x])))))
        metric = max(metric, float(np.max(np.abs(hk.metric[i, :, :, 1:]))))
    elapsed = time.perf_counter() - t0
    record("1 exact model", {"state": (state, state <= 1e-12), "metric": (metric, metric <= 1e-12)}, elapsed, 1.0)


def test_criterion_2_perturbed_flow():
    t0 = time.perf_counter()
    eps, n, hs = 0.1, 64, (1 / 50, 1 / 100, 1 / 200)
    res, clo, wedge, parity, exact = [], [], 0.0, 0.0, 0.0
    s = spectral.grid(2 * n)
    for h in hs:
        tr = nahm.integrate(nahm.perturbed_initial_state(eps, n), nahm.FlowConfig(h=h, x_max=0.5, n_modes=n))
        res.append(float(np.max(nahm.nahm_residual(tr))))
        hk = nahm.reconstruct(tr)
        clo.append(max(nahm.closedness_residual(hk)))
        wedge = max(wedge, nahm.wedge_identity_residual(hk))
        parity = max(parity, max(nahm.parity_check(tr)))
        u, w = oracles.perturbed_flow(tr.x, s, eps)
        v1 = spectral.to_values(tr.coeffs[:, 0, 0], 2 * n)
        exact = float(np.max(np.abs(v1 - u)))  # finest step is kept
    v1_exp = nahm.fold_asymptotics(hk, x_fit=0.1).v1_exponent
    o_res, o_clo = fitted_order(hs, res), fitted_order(hs, clo)
    elapsed = time.perf_counter() - t0
    record("2 perturbed flow", {
        "residual order": (o_res, 3.7 <= o_res <= 4.3),
        "closedness order": (o_clo, o_clo >= 1.8),
        "wedge": (wedge, wedge <= 1e-12),
        "parity": (parity, parity <= 1e-10),
        "V1 exponent": (v1_exp, 2.7 <= v1_exp <= 3.3),
        "closed-form error at h=1/200": (exact, exact <= 1e-7),
    }, elapsed, 30.0)


def test_criterion_3_dilation():
    t0 = time.perf_counter()
    err = 0.0
    for t in (0.5, 2.0):
        pulled = dilation_pullback(t, lambda x, s: model_metric_g0(x))
        for x in np.linspace(0.1, 1.0, 10):
            ref = t ** 3 * model_metric_g0(x)
            err = max(err, float(np.max(np.abs(pulled(x) - ref)) / np.max(np.abs(ref))))
    record("3 dilation", {"relative error": (err, err <= 1e-14)}, time.perf_counter() - t0, 1.0)


def test_criterion_4_mode_solver():
    t0 = time.perf_counter()
    M = 512
    rng = np.random.default_rng(4)
    orders = []
    for _ in range(5):
        lam, n = random_mode(rng)
        for bc in ("dirichlet", "neumann"):
            errs = []
            for Mi in (M // 2, M):
                p, f = lap.manufactured(lam, n, bc, Mi)
                errs.append(np.max(np.abs(lap.solve_mode(p, fit=False).f - f)))
            orders.append(float(lap.observed_order(errs, (M // 2, M))[0]))
    order_dev = max(abs(o - 2) for o in orders)

    passes = 0
    for _ in range(100):
        lam, n = random_mode(rng)
        bc = ("dirichlet", "neumann")[int(rng.integers(2))]
        p = lap.ModeProblem(lam, n, bc, random_profile(rng, M))
        passes += lap.energy_check(p, lap.solve_mode(p, fit=False))[2]

    law = 0.0
    x = np.linspace(0, 1, M + 1)
    g = 1 + 0.5 * np.cos(x)
    for mode in ((2.0, 1), (3.0, 2), (1.0, 1), (2.0, 3)):
        for bc in ("dirichlet", "neumann"):
            s = lap.solve_folded(*mode, bc, g)
            e = s.expansion
            lam2 = mode[0] ** 2
            if bc == "neumann":
                law = max(law, abs(e.law_f2) / abs(0.5 * lam2 * e.f0))
            law = max(law, abs(e.law_f3) / abs((lam2 * e.f1 - g[0]) / 6))

    res = []
    for Mi in (128, 256, 512):
        p, _ = lap.manufactured(3.0, 2, "dirichlet", Mi)
        res.append(lap.commuted_identity_check(p, lap.solve_mode(p, fit=False))["residual"])
    id_order = float(np.min(lap.observed_order(res, (128, 256, 512))))

    gg = np.cos(x)
    sols = lap.dn_assemble(np.array([[2 * gg, gg, gg], [gg, -gg, gg], [gg, gg, -gg]]), (2.0, 1))
    want = [["D", "N", "N"], ["N", "D", "D"], ["N", "D", "D"]]
    pattern = sum((sols[i][j].problem.bc0 is (lap.BC.DIRICHLET if want[i][j] == "D" else lap.BC.NEUMANN))
                  and ((sols[i][j].f[0] == 0) == (want[i][j] == "D")) for i in range(3) for j in range(3))
    elapsed = time.perf_counter() - t0
    record("4 mode solver", {
        "max |order - 2|": (order_dev, order_dev <= 0.2),
        "energy passes": (passes, passes == 100),
        "max expansion law error": (law, law <= 0.01),
        "identity order": (id_order, abs(id_order - 2) <= 0.2),
        "entries with correct condition": (pattern, pattern == 9),
    }, elapsed, 10.0)


def test_criterion_5_cotangent():
    t0 = time.perf_counter()
    chart = cot.FiberChart(64, 64)
    r = np.concatenate([chart.r, 1 - np.logspace(-12, -1, 40), np.logspace(-8, -1, 20)])
    A, B = cot.omega1(r)
    prod = float(np.max(np.abs(A * B - r)))
    ident = max(cot.deformation_identity_residual(cot.Deformation(m, 0.9 + 0.4j), chart) for m in range(1, 7))
    std = cot.standard_fiber_form()
    p_std = max(abs(cot.invariant_polynomial(std, k, chart)) for k in range(1, 7))
    diag, lin, kappas, slope = 0.0, 0.0, [], 0.0
    for m in range(2, 7):
        a = 0.7 - 0.2j * m
        d = cot.Deformation(m, a)
        pd = cot.variation_of_invariants(d, 6, chart)
        diag = max(diag, float(np.max(np.abs(np.delete(pd, m - 1)))))
        lin = max(lin, float(np.max(np.abs(cot.variation_of_invariants(d.scaled(-1.5 + 2j), 6, chart)
                                           - (-1.5 + 2j) * pd))))
        kappas.append(pd[m - 1] / a)
        for eps in (1e-3, 1e-2):
            q = cot.invariant_polynomial(std + eps * cot.variation_form(d), m, chart)
            slope = max(slope, abs((q - cot.invariant_polynomial(std, m, chart)) / eps - pd[m - 1]))
    sup = cot.variation_of_invariants([cot.Deformation(2, 1.0), cot.Deformation(3, 1j)], 6, chart)
    parts = (cot.variation_of_invariants(cot.Deformation(2, 1.0), 6, chart)
             + cot.variation_of_invariants(cot.Deformation(3, 1j), 6, chart))
    lin = max(lin, float(np.max(np.abs(sup - parts))))
    spread = float(max(abs(k - kappas[0]) for k in kappas))
    elapsed = time.perf_counter() - t0
    record("5 cotangent model", {
        "A B - r": (prod, prod <= 1e-14),
        "fiber identity": (ident, ident <= 1e-12),
        "standard invariants": (p_std, p_std <= 1e-10),
        "off-diagonal": (diag, diag <= 1e-10),
        "linearity": (lin, lin <= 1e-10),
        "kappa spread": (spread, spread <= 1e-8),
        "finite-eps slope": (slope, slope <= 1e-6),
    }, elapsed, 10.0)


def test_criterion_6_cli(tmp_path):
    t0 = time.perf_counter()
    a, b = tmp_path / "a", tmp_path / "b"
    code_a = cli.main(["verify", "--out", str(a), "-q"])
    code_b = cli.main(["verify", "--out", str(b), "-q"])
    names = sorted(p.name for p in a.iterdir())
    match, mismatch, errors = filecmp.cmpfiles(a, b, names, shallow=False)
    bad = tmp_path / "bad.toml"
    bad.write_text("[laplacian]\nmodes = [[1.0, 2]]\n")
    code_bad = cli.main(["laplacian", "--config", str(bad), "--out", str(tmp_path / "c"), "-q"])
    elapsed = time.perf_counter() - t0
    record("6 command line", {
        "verify exit": (code_a, code_a == 0 and code_b == 0),
        "identical files": (len(match), len(match) == len(names) and not mismatch and not errors),
        "bad mode exit": (code_bad, code_bad == 2),
    }, elapsed, 120.0)


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
