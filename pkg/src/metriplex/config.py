"""JSON run configuration: parsing and construction of systems and field setups."""

import copy
import json
from pathlib import Path

import numpy as np

from .brackets import ScalarField, StructureConstants
from .field_demo import KINDS_1D, KINDS_2D, FieldParams, Grid1D, Grid2D, kdv_soliton
from .systems import (KidaParams, RigidBodyParams, kida, kida_placeholder_hamiltonian,
                      lie_poisson_system, rigid_body)

SCHEMA_VERSION = 1
ODE_KINDS = ("rigid_body", "kida", "lie_poisson")
FIELD_KINDS = ("field1d", "euler2d")


class ConfigError(ValueError):
    pass


def load_config(path):
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        cfg = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return check_config(cfg)


def check_config(cfg):
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    if cfg.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}, got {cfg.get('schema_version')!r}")
    system = cfg.get("system")
    if not isinstance(system, dict) or system.get("kind") not in ODE_KINDS + FIELD_KINDS:
        raise ConfigError(f"system.kind must be one of {ODE_KINDS + FIELD_KINDS}")
    sim = cfg.get("simulate", {})
    for key in ("dt", "t_end"):
        if key in sim and not (isinstance(sim[key], (int, float)) and sim[key] > 0):
            raise ConfigError(f"simulate.{key} must be a positive number")
    return cfg


def merge(base, override):
    """Recursive dict merge used for sweep entries."""
    out = copy.deepcopy(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _require(spec, key, where):
    if key not in spec:
        raise ConfigError(f"{where}: missing '{key}'")
    return spec[key]


def scalar_field(spec, dim, where="scalar field"):
    if not isinstance(spec, dict):
        raise ConfigError(f"{where}: expected an object")
    kind = spec.get("type")
    try:
        if kind == "linear":
            coeffs = np.asarray(_require(spec, "coeffs", where), dtype=float)
            if coeffs.shape != (dim,):
                raise ConfigError(f"{where}: coeffs must have length {dim}")
            return ScalarField.linear(coeffs, spec.get("constant", 0.0), name=spec.get("name"))
        if kind == "quadratic":
            M = np.asarray(_require(spec, "matrix", where), dtype=float)
            if M.shape != (dim, dim):
                raise ConfigError(f"{where}: matrix must be {dim}x{dim}")
            b = spec.get("linear")
            if b is not None and len(b) != dim:
                raise ConfigError(f"{where}: linear must have length {dim}")
            return ScalarField.quadratic(M, b, spec.get("constant", 0.0), name=spec.get("name"))
        if kind == "polynomial":
            terms = _require(spec, "terms", where)
            if any(len(t[1]) != dim for t in terms):
                raise ConfigError(f"{where}: exponent lists must have length {dim}")
            return ScalarField.polynomial(terms, name=spec.get("name"))
    except (TypeError, ValueError, IndexError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}: type must be linear, quadratic or polynomial")


def build_system(spec, validate=True):
    """MetriplecticSystem for an ODE kind."""
    kind = spec["kind"]
    try:
        if kind == "rigid_body":
            I = spec.get("inertia", [1.0, 2.0, 3.0])
            if len(I) != 3:
                raise ConfigError("rigid_body.inertia must have three entries")
            return rigid_body(RigidBodyParams(*map(float, I), lam=float(spec.get("lambda", 0.1))))
        if kind == "kida":
            H = spec.get("hamiltonian")
            H = kida_placeholder_hamiltonian() if H is None else scalar_field(H, 3, "kida.hamiltonian")
            return kida(KidaParams(H, float(spec.get("lambda", 0.1))))
        if kind == "lie_poisson":
            dim = int(_require(spec, "dim", "lie_poisson"))
            c = StructureConstants.from_entries(dim, _require(spec, "structure_constants", "lie_poisson"))
            g4 = np.asarray(spec.get("metric", np.eye(dim).tolist()), dtype=float)
            if g4.shape != (dim, dim):
                raise ConfigError(f"lie_poisson.metric must be {dim}x{dim}")
            H = scalar_field(_require(spec, "hamiltonian", "lie_poisson"), dim, "lie_poisson.hamiltonian")
            S = scalar_field(_require(spec, "entropy", "lie_poisson"), dim, "lie_poisson.entropy")
            cas = [scalar_field(s, dim, "lie_poisson.casimirs") for s in spec.get("casimirs", [])]
            return lie_poisson_system(c, g4, H, S, casimirs=cas or None, validate=validate)
    except ConfigError:
        raise
    except (TypeError, ValueError, IndexError, KeyError) as exc:
        raise ConfigError(f"{kind}: {exc}") from exc
    raise ConfigError(f"not an ODE system kind: {kind!r}")


def build_field1d(spec):
    variant = spec.get("variant", "viscous")
    if variant not in KINDS_1D:
        raise ConfigError(f"field1d.variant must be one of {KINDS_1D}")
    try:
        grid = Grid1D(spec.get("n", 256), spec.get("length", 2 * np.pi))
    except ValueError as exc:
        raise ConfigError(f"field1d: {exc}") from exc
    p = spec.get("params", {})
    params = FieldParams(nu=float(p.get("nu", 1.0)), W=float(p.get("W", 1.0)), c=float(p.get("c", 0.0)))
    init = spec.get("initial", {"type": "cosine"})
    kind = init.get("type")
    if kind == "soliton":
        u0, c = kdv_soliton(grid, float(_require(init, "alpha", "field1d.initial")), init.get("x0"))
        if "c" not in p:
            params = FieldParams(nu=params.nu, W=params.W, c=c)
    elif kind == "cosine":
        m = init.get("wavenumber", 1)
        u0 = init.get("mean", 1.0) + init.get("amplitude", 0.3) * np.cos(2 * np.pi * m * grid.x / grid.length)
    elif kind == "modes":
        u0 = np.full(grid.n, float(init.get("mean", 0.0)))
        for amp, m, phase in init.get("modes", []):
            u0 = u0 + amp * np.cos(2 * np.pi * m * grid.x / grid.length + phase)
    elif kind == "values":
        u0 = np.asarray(init.get("u"), dtype=float)
        if u0.shape != (grid.n,):
            raise ConfigError(f"field1d.initial.u must have {grid.n} values")
    else:
        raise ConfigError("field1d.initial.type must be soliton, cosine, modes or values")
    return variant, grid, params, u0


def build_euler2d(spec, seed=0):
    variant = spec.get("variant", "metriplectic")
    if variant not in KINDS_2D:
        raise ConfigError(f"euler2d.variant must be one of {KINDS_2D}")
    try:
        grid = Grid2D(spec.get("n", 32))
    except ValueError as exc:
        raise ConfigError(f"euler2d: {exc}") from exc
    X, Y = grid.mesh()
    init = spec.get("initial", {"type": "random"})
    if init.get("type") == "modes":
        w0 = np.zeros_like(X)
        for amp, mx, my, phase in init.get("modes", []):
            w0 = w0 + amp * np.cos(mx * X + my * Y + phase)
    elif init.get("type") == "random":
        rng = np.random.default_rng(init.get("seed", seed))
        kmax = init.get("kmax", 3)
        w0 = np.zeros_like(X)
        for mx in range(-kmax, kmax + 1):
            for my in range(0, kmax + 1):
                if (mx, my) != (0, 0) and mx * mx + my * my <= kmax * kmax:
                    a, ph = rng.standard_normal(), rng.uniform(0, 2 * np.pi)
                    w0 = w0 + a * np.cos(mx * X + my * Y + ph)
        w0 *= init.get("amplitude", 1.0) / max(1e-300, float(np.max(np.abs(w0))))
    else:
        raise ConfigError("euler2d.initial.type must be modes or random")
    w0 = w0 - w0.mean()
    return variant, grid, float(spec.get("lambda", 0.05)), grid.project(w0)
