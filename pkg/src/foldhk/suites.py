"""Verification suites behind the command line, and their table output."""
from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import cotangent as cot
from . import laplacian as lap
from . import nahm, spectral
from .config import RunConfig
from .frame import dilation_pullback, model_metric_g0
from .report import Check, VerificationReport


@dataclass
class SuiteResult:
    checks: list[Check] = field(default_factory=list)
    # file name -> (header, rows)
    tables: dict[str, tuple[list[str], list[list]]] = field(default_factory=dict)


class _Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def fitted_order(hs, errs) -> float:
    """Least-squares slope of log(err) against log(h)."""
    return float(np.polyfit(np.log(hs), np.log(errs), 1)[0])


def perturbed_exact(x, s, eps):
    """X1-components of V1 and V3 for the perturbed initial data."""
    x = np.asarray(x)[:, None]
    c = eps / (2 * np.pi)
    u = x - c * np.cos(2 * np.pi * s) * np.sinh(2 * np.pi * x)
    w = c * np.sin(2 * np.pi * s) * np.cosh(2 * np.pi * x)
    return u, w


# ---------------------------------------------------------------------------


def run_nahm(cfg: RunConfig) -> SuiteResult:
    p = cfg.nahm
    tol = cfg.tolerances
    out = SuiteResult()
    n = p.n_modes

    def flow(h, x_max=p.x_max):
        return nahm.FlowConfig(h=h, x_max=x_max, n_modes=n, filter_tol=p.filter_tol)

    with _Timer() as t:
        tr = nahm.integrate(nahm.model_initial_state(n), flow(p.h_values[1]))
        want = np.zeros_like(tr.coeffs)
        want[:, 0, 0, 0] = tr.x
        want[:, 1, 1, 0] = 1.0
        want[:, 2, 2, 0] = 1.0
        state_err = float(np.max(np.abs(tr.coeffs - want)))
        hk = nahm.reconstruct(tr)
        away = np.abs(tr.x) >= abs(tr.h) * (1 - 1e-9)
        g_want = np.zeros_like(hk.metric[away])
        for i, x in enumerate(tr.x[away]):
            g_want[i, :, :, 0] = np.diag([x, 1 / x, x, x])
        metric_err = float(np.max(np.abs(hk.metric[away] - g_want)))
    out.checks.append(Check.at_most("nahm.model.states", state_err, tol["nahm_model"], t.elapsed))
    out.checks.append(Check.at_most("nahm.model.metric", metric_err, tol["nahm_model"], t.elapsed))

    res, clo, wedge_max, parity_max = [], [], 0.0, 0.0
    rows = []
    with _Timer() as t:
        for h in p.h_values:
            tr = nahm.integrate(nahm.perturbed_initial_state(p.eps, n), flow(h))
            defect = nahm.nahm_residual(tr)
            res.append(float(np.max(defect)))
            hk = nahm.reconstruct(tr)
            clo.append(max(nahm.closedness_residual(hk)))
            wedge_max = max(wedge_max, nahm.wedge_identity_residual(hk))
            parity_max = max(parity_max, max(nahm.parity_check(tr)))
            rows.extend([h, float(x), float(d)] for x, d in zip(tr.x[:-1], defect))
        finest_tr, finest_hk = tr, hk
    out.tables["nahm_residuals.csv"] = (["h", "x", "defect"], rows)
    out.checks.append(Check.within("nahm.perturbed.residual_order", fitted_order(p.h_values, res),
                                   tol["nahm_order_low"], tol["nahm_order_high"], t.elapsed))
    out.checks.append(Check.at_least("nahm.perturbed.closedness_order", fitted_order(p.h_values, clo),
                                     tol["closedness_order"]))
    out.checks.append(Check.at_most("nahm.perturbed.wedge", wedge_max, tol["wedge"]))
    out.checks.append(Check.at_most("nahm.perturbed.parity", parity_max, tol["parity"]))
    fold = nahm.fold_asymptotics(finest_hk, x_fit=p.fold_x_fit)
    out.checks.append(Check.within("nahm.perturbed.v1_exponent", fold.v1_exponent,
                                   tol["v1_exponent_low"], tol["v1_exponent_high"]))
    m = 2 * n
    s = spectral.grid(m)
    u, w = perturbed_exact(finest_tr.x, s, p.eps)
    v1 = spectral.to_values(finest_tr.coeffs[:, 0, 0], m)
    v3 = spectral.to_values(finest_tr.coeffs[:, 2, 0], m)
    exact_err = float(max(np.max(np.abs(v1 - u)), np.max(np.abs(v3 - w))))
    out.checks.append(Check.at_most("nahm.perturbed.closed_form", exact_err, tol["exact_solution"]))

    traj_rows = []
    c = finest_tr.coeffs
    k = spectral.wavenumbers(n).astype(int)
    for ix, a, i, j in zip(*np.nonzero(c)):
        z = c[ix, a, i, j]
        traj_rows.append([float(finest_tr.x[ix]), int(a) + 1, int(i) + 1, int(k[j]), z.real, z.imag])
    out.tables["nahm_trajectory.csv"] = (["x", "field", "component", "mode", "re", "im"], traj_rows)

    with _Timer() as t:
        tr = nahm.integrate(nahm.normalized_initial_state(p.fold_delta, n), flow(p.fold_h, p.fold_x_max))
        rep = nahm.fold_asymptotics(nahm.reconstruct(tr), x_fit=p.fold_x_fit)
    out.checks.append(Check.at_least("nahm.fold.omega_exponent", rep.omega_exponent, tol["fold_exponent"], t.elapsed))
    out.checks.append(Check.at_least("nahm.fold.metric_exponent", rep.metric_exponent, tol["fold_exponent"]))
    out.checks.append(Check.at_least("nahm.fold.quaternion_exponent", rep.quaternion_exponent,
                                     tol["quaternion_exponent"]))

    xs = np.linspace(0.1, 1.0, 10)
    dil = 0.0
    for tt in p.dilation_t:
        pulled = dilation_pullback(tt, lambda x, s: model_metric_g0(x))
        for x in xs:
            ref = tt ** 3 * model_metric_g0(x)
            dil = max(dil, float(np.max(np.abs(pulled(x) - ref) / np.abs(ref).max())))
    out.checks.append(Check.at_most("nahm.dilation", dil, tol["dilation"]))
    return out


# ---------------------------------------------------------------------------


def random_mode(rng: np.random.Generator) -> tuple[float, int]:
    lam = float(rng.uniform(0.5, 4.0))
    nmax = min(int(math.floor(lam * lam)), 8)
    return lam, int(rng.integers(-nmax, nmax + 1))


def random_profile(rng: np.random.Generator, M: int, kmax: int = 8) -> np.ndarray:
    x = np.linspace(0.0, 1.0, M + 1)
    a = rng.standard_normal(kmax)
    b = rng.standard_normal(kmax)
    k = np.arange(kmax)[:, None]
    return a @ np.cos(k * np.pi * x) + b @ np.sin(k * np.pi * x)


def run_laplacian(cfg: RunConfig, rng: np.random.Generator) -> SuiteResult:
    lp = cfg.laplacian
    tol = cfg.tolerances
    out = SuiteResult()
    M = lp.M
    x = np.linspace(0.0, 1.0, M + 1)
    ones = np.ones(M + 1)

    for lam, n in lp.modes:
        sols = {bc: lap.solve_folded(lam, n, bc, ones) for bc in ("dirichlet", "neumann")}
        ok = all(all(lap.expansion_laws_hold(s.expansion, s.problem, 1.0, tol["expansion_rtol"]).values())
                 for s in sols.values())
        out.checks.append(Check.flag(f"laplacian.expansion[{lam:g},{n}]", ok))
        rows = [[xi, 1.0, fd, fn] for xi, fd, fn in zip(x, sols["dirichlet"].f, sols["neumann"].f)]
        out.tables[f"laplacian_mode_{lam:g}_{n}.csv"] = (
            ["x", "g", "f_dirichlet", "f_neumann"], rows)

    order_min, order_max = np.inf, -np.inf
    for _ in range(lp.random_pairs):
        lam, n = random_mode(rng)
        for bc in ("dirichlet", "neumann"):
            errs = []
            for Mi in (M // 2, M):
                p, fs = lap.manufactured(lam, n, bc, Mi)
                errs.append(float(np.max(np.abs(lap.solve_mode(p, fit=False).f - fs))))
            o = float(lap.observed_order(errs, (M // 2, M))[0])
            order_min, order_max = min(order_min, o), max(order_max, o)
    out.checks.append(Check.within("laplacian.manufactured_order_min", order_min,
                                   2 - tol["mode_order"], 2 + tol["mode_order"]))
    out.checks.append(Check.within("laplacian.manufactured_order_max", order_max,
                                   2 - tol["mode_order"], 2 + tol["mode_order"]))

    passes, sym = 0, 0.0
    for _ in range(lp.energy_trials):
        lam, n = random_mode(rng)
        bc = "dirichlet" if rng.integers(2) == 0 else "neumann"
        p = lap.ModeProblem(lam, n, bc, random_profile(rng, M))
        s = lap.solve_mode(p, fit=False)
        passes += lap.energy_check(p, s)[2]
        sym = max(sym, lap.backward_error(p, s.f))
    out.checks.append(Check.at_least("laplacian.energy_passes", passes, lp.energy_trials))
    out.checks.append(Check.at_most("laplacian.backward_error", sym, tol["symmetry"]))

    res = []
    for Mi in (M // 2, M):
        p, _ = lap.manufactured(3.0, 2, "dirichlet", Mi)
        res.append(lap.commuted_identity_check(p, lap.solve_mode(p, fit=False))["residual"])
    o = float(lap.observed_order(res, (M // 2, M))[0])
    out.checks.append(Check.within("laplacian.identity_order", o, 2 - tol["identity_order"], 2 + tol["identity_order"]))
    p = lap.ModeProblem(3.0, 3, "neumann", random_profile(rng, M))
    r = lap.commuted_identity_check(p, lap.solve_mode(p, fit=False))
    out.checks.append(Check.at_most("laplacian.identity_bound", r["residual"] / r["bound"], tol["identity_bound_factor"]))

    g = np.sin(np.pi * x)
    v = np.array([[2 * g, g, g], [g, -g, g], [g, g, -g]])
    sols = lap.dn_assemble(v, (2.0, 1))
    pattern = lap.bc_pattern()
    ok = all(sols[i][j].problem.bc0 is pattern[i][j] for i in range(3) for j in range(3))
    ok &= all((sols[i][j].f[0] == 0.0) == (pattern[i][j] is lap.BC.DIRICHLET) for i in range(3) for j in range(3))
    out.checks.append(Check.flag("laplacian.dn_pattern", ok))
    return out


# ---------------------------------------------------------------------------


def run_cotangent(cfg: RunConfig) -> SuiteResult:
    cp = cfg.cotangent
    tol = cfg.tolerances
    out = SuiteResult()
    chart = cot.FiberChart(cp.n_r, cp.n_phi)
    defs = [cot.Deformation(d.m, d.amplitude, d.Phi) for d in cp.deformations]

    A, B = cot.omega1(chart.r)
    out.checks.append(Check.at_most("cotangent.product_AB", float(np.max(np.abs(A * B - chart.r))), tol["product"]))
    ident = max(cot.deformation_identity_residual(cot.Deformation(m, 0.7 - 0.3j), chart) for m in range(1, 7))
    out.checks.append(Check.at_most("cotangent.fiber_identity", ident, tol["fiber_identity"]))
    std = cot.standard_fiber_form()
    p_std = max(abs(cot.invariant_polynomial(std, k, chart)) for k in range(1, cp.nmax + 1))
    out.checks.append(Check.at_most("cotangent.invariants_standard", p_std, tol["invariant"]))

    rows, offdiag, lin, kappas = [], 0.0, 0.0, []
    for d in defs:
        pd = cot.variation_of_invariants(d, cp.nmax, chart)
        for k, z in enumerate(pd, start=1):
            rows.append([d.m, k, z.real, z.imag])
        mask = np.arange(1, cp.nmax + 1) != d.m
        offdiag = max(offdiag, float(np.max(np.abs(pd[mask]))))
        scaled = cot.variation_of_invariants(d.scaled(2.5 - 1j), cp.nmax, chart)
        lin = max(lin, float(np.max(np.abs(scaled - (2.5 - 1j) * pd))))
        if d.amplitude != 0:
            kappas.append(pd[d.m - 1] / d.amplitude)
    out.tables["cotangent_variation.csv"] = (["m", "n", "re", "im"], rows)
    out.checks.append(Check.at_most("cotangent.frequency_diagonal", offdiag, tol["variation"]))
    out.checks.append(Check.at_most("cotangent.amplitude_linear", lin, tol["variation"]))
    if len(defs) >= 2:
        sup = cot.variation_of_invariants(defs[:2], cp.nmax, chart)
        parts = sum(cot.variation_of_invariants(d, cp.nmax, chart) for d in defs[:2])
        out.checks.append(Check.at_most("cotangent.superposition", float(np.max(np.abs(sup - parts))), tol["variation"]))
    spread = float(max(abs(k - kappas[0]) for k in kappas)) if kappas else 0.0
    out.checks.append(Check.at_most("cotangent.kappa_spread", spread, tol["kappa"]))

    slope = 0.0
    for d in defs:
        base = cot.invariant_polynomial(std, d.m, chart)
        want = cot.variation_of_invariants(d, d.m, chart)[-1]
        for eps in cp.eps_values:
            pert = cot.invariant_polynomial(std + eps * cot.variation_form(d), d.m, chart)
            slope = max(slope, abs((pert - base) / eps - want))
    out.checks.append(Check.at_most("cotangent.finite_eps_slope", slope, tol["slope"]))

    quad = max(abs(chart.radial_moment(k) - cot.substitution_moment(k)) for k in range(0, 13))
    out.checks.append(Check.at_most("cotangent.radial_quadrature", quad, tol["quadrature"]))

    rr = np.linspace(0.02, 0.98, 49)
    A, B = cot.omega1(rr)
    prof = [cot.phi_profile(d, rr) for d in defs]
    header = ["r", "A", "B"] + [f"phi_{d.m}" for d in defs]
    out.tables["cotangent_profiles.csv"] = (header, [[r, a, b] + [float(pf[i]) for pf in prof]
                                                     for i, (r, a, b) in enumerate(zip(rr, A, B))])
    return out


# ---------------------------------------------------------------------------


def run_suite(cfg: RunConfig) -> tuple[VerificationReport, dict]:
    """Run the selected suites in a fixed order; returns the report and all tables."""
    rng = np.random.default_rng(cfg.seed)
    report = VerificationReport(provenance={
        "config_sha256": cfg.digest(),
        "version": __version__,
        "seed": cfg.seed,
        "suites": list(cfg.suites),
        "tolerances": dict(sorted(cfg.tolerances.items())),
    })
    tables = {}
    for name in cfg.suites:
        if name == "nahm":
            res = run_nahm(cfg)
        elif name == "laplacian":
            res = run_laplacian(cfg, rng)
        else:
            res = run_cotangent(cfg)
        report.extend(res.checks)
        tables.update(res.tables)
    return report, tables


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def table_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def emit_tables(report: VerificationReport, tables: dict, out: str | Path) -> list[Path]:
    """Write every table plus ``summary.json`` into ``out``; returns the written paths."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in sorted(tables):
        path = out / name
        path.write_text(table_text(*tables[name]), newline="")
        written.append(path)
    path = out / "summary.json"
    path.write_text(report.to_json())
    written.append(path)
    return written
