"""Run configuration: a TOML file with one table per suite plus tolerances."""
from __future__ import annotations

import dataclasses
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib

SUITES = ("nahm", "laplacian", "cotangent")

DEFAULT_TOLERANCES = {
    "nahm_model": 1e-12,
    "nahm_order_low": 3.7,
    "nahm_order_high": 4.3,
    "closedness_order": 1.8,
    "wedge": 1e-12,
    "parity": 1e-10,
    "v1_exponent_low": 2.7,
    "v1_exponent_high": 3.3,
    "fold_exponent": 2.7,
    "quaternion_exponent": 1.8,
    "exact_solution": 1e-7,
    "dilation": 1e-14,
    "mode_order": 0.2,
    "expansion_rtol": 0.01,
    "identity_order": 0.2,
    "identity_bound_factor": 10.0,
    "symmetry": 1e-12,
    "product": 1e-14,
    "fiber_identity": 1e-12,
    "invariant": 1e-10,
    "variation": 1e-10,
    "kappa": 1e-8,
    "slope": 1e-6,
    "quadrature": 1e-12,
}


class ConfigError(ValueError):
    """Invalid configuration (reported with exit status 2)."""


@dataclass(frozen=True)
class NahmParams:
    n_modes: int = 64
    eps: float = 0.1
    x_max: float = 0.5
    h_values: tuple[float, ...] = (1 / 50, 1 / 100, 1 / 200)
    filter_tol: float = 1e-13
    fold_delta: float = 0.02
    fold_h: float = 1 / 200
    fold_x_max: float = 0.25
    fold_x_fit: float = 0.1
    dilation_t: tuple[float, ...] = (0.5, 2.0)


@dataclass(frozen=True)
class LaplacianParams:
    M: int = 512
    modes: tuple[tuple[float, int], ...] = ((2.0, 1), (3.0, 2), (1.0, 1), (2.0, 3))
    random_pairs: int = 5
    energy_trials: int = 100


@dataclass(frozen=True)
class DeformationParams:
    m: int
    amplitude: complex = 1.0
    Phi: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "amplitude", complex(self.amplitude))


@dataclass(frozen=True)
class CotangentParams:
    n_r: int = 64
    n_phi: int = 64
    nmax: int = 6
    deformations: tuple[DeformationParams, ...] = tuple(
        DeformationParams(m, 1.0) for m in range(2, 7)
    )
    eps_values: tuple[float, ...] = (1e-3, 1e-2)


@dataclass(frozen=True)
class RunConfig:
    suite: str = "all"
    out: str = "results"
    seed: int = 20240517
    nahm: NahmParams = field(default_factory=NahmParams)
    laplacian: LaplacianParams = field(default_factory=LaplacianParams)
    cotangent: CotangentParams = field(default_factory=CotangentParams)
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    @property
    def suites(self) -> tuple[str, ...]:
        return SUITES if self.suite == "all" else (self.suite,)

    def to_dict(self) -> dict:
        def enc(o):
            if isinstance(o, complex):
                return [o.real, o.imag]
            if isinstance(o, (list, tuple)):
                return [enc(v) for v in o]
            if isinstance(o, dict):
                return {k: enc(v) for k, v in o.items()}
            return o

        return enc(dataclasses.asdict(self))

    def digest(self) -> str:
        """sha256 of the resolved configuration (output location excluded)."""
        d = self.to_dict()
        d.pop("out")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _positive(name, v, integer=False):
    if integer and (isinstance(v, bool) or int(v) != v):
        raise ConfigError(f"{name} must be an integer, got {v!r}")
    if not v > 0:
        raise ConfigError(f"{name} must be positive, got {v!r}")


def _complex(v):
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ConfigError("complex amplitudes are written as [re, im]")
        return complex(float(v[0]), float(v[1]))
    return complex(v)


def _build(cls, table: dict, name: str, convert: dict | None = None):
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(table) - known
    if unknown:
        raise ConfigError(f"unknown key(s) in [{name}]: {', '.join(sorted(unknown))}")
    kw = {}
    for k, v in table.items():
        if convert and k in convert:
            v = convert[k](v)
        elif isinstance(v, list):
            v = tuple(v)
        kw[k] = v
    return cls(**kw)


def validate(cfg: RunConfig) -> RunConfig:
    if cfg.suite not in SUITES + ("all",):
        raise ConfigError(f"suite must be one of {SUITES + ('all',)}, got {cfg.suite!r}")
    if not 0 <= cfg.seed < 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    for k, v in cfg.tolerances.items():
        if k not in DEFAULT_TOLERANCES:
            raise ConfigError(f"unknown tolerance {k!r}")
        _positive(f"tolerance {k}", v)
    p = cfg.nahm
    _positive("nahm.n_modes", p.n_modes, integer=True)
    if p.n_modes & (p.n_modes - 1):
        raise ConfigError("nahm.n_modes must be a power of two")
    for key in ("x_max", "fold_h", "fold_x_max", "fold_x_fit", "filter_tol"):
        _positive(f"nahm.{key}", getattr(p, key))
    if len(p.h_values) < 3:
        raise ConfigError("nahm.h_values needs at least three step sizes for an order estimate")
    for h in p.h_values:
        _positive("nahm.h_values entry", h)
        r = p.x_max / h
        if abs(r - round(r)) > 1e-9 * r:
            raise ConfigError(f"step {h} does not divide x_max = {p.x_max}")
    for t in p.dilation_t:
        _positive("nahm.dilation_t entry", t)
    lp = cfg.laplacian
    _positive("laplacian.M", lp.M, integer=True)
    if lp.M < 16:
        raise ConfigError("laplacian.M must be at least 16")
    if "laplacian" in cfg.suites and not lp.modes:
        raise ConfigError("laplacian.modes is empty")
    for mode in lp.modes:
        if len(mode) != 2:
            raise ConfigError(f"mode {mode!r} must be a (lambda, n) pair")
        lam, n = mode
        if lam < 0 or int(n) != n:
            raise ConfigError(f"mode {mode!r}: lambda must be >= 0 and n an integer")
        if (lam, n) != (0, 0) and abs(n) > lam ** 2:
            raise ConfigError(f"mode (lambda={lam}, n={n}) violates the constraint |n| <= lambda^2")
    _positive("laplacian.random_pairs", lp.random_pairs, integer=True)
    _positive("laplacian.energy_trials", lp.energy_trials, integer=True)
    cp = cfg.cotangent
    for key in ("n_r", "n_phi", "nmax"):
        _positive(f"cotangent.{key}", getattr(cp, key), integer=True)
    for d in cp.deformations:
        if int(d.m) != d.m or d.m < 1:
            raise ConfigError(f"deformation frequency m = {d.m} must be a positive integer")
        if d.m > cp.nmax:
            raise ConfigError(f"deformation frequency m = {d.m} exceeds nmax = {cp.nmax}")
    for e in cp.eps_values:
        _positive("cotangent.eps_values entry", e)
    return cfg


def from_mapping(data: dict) -> RunConfig:
    data = dict(data)
    run = dict(data.pop("run", {}))
    known = {"nahm", "laplacian", "cotangent", "tolerances"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown table(s): {', '.join(sorted(unknown))}")
    bad = set(run) - {"suite", "out", "seed"}
    if bad:
        raise ConfigError(f"unknown key(s) in [run]: {', '.join(sorted(bad))}")
    try:
        nahm = _build(NahmParams, data.get("nahm", {}), "nahm")
        lap = _build(LaplacianParams, data.get("laplacian", {}), "laplacian",
                     {"modes": lambda v: tuple((float(a), int(b)) if int(b) == b else (a, b) for a, b in v)})

        def defs(v):
            return tuple(DeformationParams(int(d["m"]), _complex(d.get("amplitude", 1.0)), d.get("Phi"))
                         for d in v)

        cot = _build(CotangentParams, data.get("cotangent", {}), "cotangent", {"deformations": defs})
        tol = dict(DEFAULT_TOLERANCES)
        tol.update(data.get("tolerances", {}))
        cfg = RunConfig(nahm=nahm, laplacian=lap, cotangent=cot, tolerances=tol, **run)
    except (TypeError, KeyError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed configuration: {exc}") from exc
    return validate(cfg)


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return validate(RunConfig())
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config {path} is not valid TOML: {exc}") from exc
    return from_mapping(data)
