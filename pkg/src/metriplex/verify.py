"""Sampled property checks that certify a (J, R, H, S) bundle before integration."""

import json
from dataclasses import dataclass, field

import numpy as np

from .brackets import g_metric_from_gradient
from .tensor_core import as_rank4, symmetry_defects

DEFAULT_SAMPLES = 100
DEFAULT_PAIRS = 1000


@dataclass(frozen=True)
class Check:
    name: str
    max_defect: float
    tolerance: float
    passed: bool
    sample_count: int


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)
    # values reported for information only; they never affect the verdict
    info: dict = field(default_factory=dict)

    @property
    def verdict(self):
        return all(c.passed for c in self.checks)

    def add(self, name, max_defect, tolerance, sample_count):
        max_defect = float(max_defect)
        passed = bool(np.isfinite(max_defect) and max_defect <= tolerance)
        self.checks.append(Check(name, max_defect, float(tolerance), passed, int(sample_count)))
        return self

    def failed(self):
        return [c.name for c in self.checks if not c.passed]

    def merge(self, other):
        return VerificationReport(self.checks + other.checks, {**self.info, **other.info})

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "checks": [
                {"name": c.name, "max_defect": c.max_defect, "tolerance": c.tolerance,
                 "pass": c.passed, "sample_count": c.sample_count}
                for c in self.checks
            ],
            "info": self.info,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def render(self):
        lines = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            lines.append(f"{status}  {c.name:<36} max_defect={c.max_defect:.3e} "
                         f"tol={c.tolerance:.1e} samples={c.sample_count}")
        for key, val in sorted(self.info.items()):
            lines.append(f"INFO  {key:<36} {val:.3e}" if isinstance(val, float) else f"INFO  {key}: {val}")
        lines.append(f"verdict: {'PASS' if self.verdict else 'FAIL'}")
        return "\n".join(lines)


def sample_states(dim, count=DEFAULT_SAMPLES, box=(-1.0, 1.0), seed=0):
    """Uniform states in a box; ``box`` is (lo, hi) scalars or per-coordinate arrays."""
    rng = np.random.default_rng(seed)
    lo, hi = (np.broadcast_to(np.asarray(b, dtype=float), (dim,)) for b in box)
    return list(rng.uniform(lo, hi, size=(count, dim)))


def jacobiator(J, z):
    """J^{il} d_l J^{jk} + J^{jl} d_l J^{ki} + J^{kl} d_l J^{ij}."""
    Jz = J(z)
    dJ = J.derivative(z)
    t = np.einsum("il,jkl->ijk", Jz, dJ)
    return t + t.transpose(1, 2, 0) + t.transpose(2, 0, 1)


def verify_jacobi(J, samples, tol=1e-8):
    worst = max(float(np.max(np.abs(jacobiator(J, np.asarray(z))))) for z in samples)
    return VerificationReport().add("jacobi", worst, tol, len(samples))


def verify_minimal_metriplectic(R, samples, covector_pairs=DEFAULT_PAIRS, atol=1e-10, seed=0):
    """Pair symmetries and sampled sectional-curvature positivity; the cyclic
    identity is a pass/fail check only for tensors flagged algebraic.
    """
    rng = np.random.default_rng(seed)
    worst = {"d12": 0.0, "d34": 0.0, "dpair": 0.0, "dcyclic": 0.0}
    min_sectional = np.inf
    scale = 1.0
    for z in samples:
        Rz = as_rank4(R.raw(np.asarray(z, dtype=float)) if hasattr(R, "raw") else R)
        scale = max(scale, float(np.max(np.abs(Rz))))
        for key, val in symmetry_defects(Rz).items():
            worst[key] = max(worst[key], val)
        a = rng.standard_normal((covector_pairs, Rz.shape[0]))
        b = rng.standard_normal((covector_pairs, Rz.shape[0]))
        k = np.einsum("ijkl,pi,pj,pk,pl->p", Rz, a, b, a, b)
        min_sectional = min(min_sectional, float(np.min(k)))
    tol = atol * scale
    n = len(samples)
    report = VerificationReport()
    report.add("antisymmetry_first_pair", worst["d12"], tol, n)
    report.add("antisymmetry_second_pair", worst["d34"], tol, n)
    report.add("pair_interchange", worst["dpair"], tol, n)
    report.add("sectional_curvature_nonnegative", max(0.0, -min_sectional), tol, n * covector_pairs)
    if getattr(R, "algebraic", False):
        report.add("cyclic_identity", worst["dcyclic"], 1e-8 * scale, n)
    else:
        report.info["cyclic_defect"] = worst["dcyclic"]
    report.info["min_sectional_curvature"] = min_sectional
    return report


def verify_degeneracy(system, samples, tol=1e-8):
    """max |J dS| and max |G dH| with G the G-metric of R and H."""
    js = 0.0
    gh = 0.0
    for z in samples:
        z = np.asarray(z, dtype=float)
        dH, dS = system.H.grad(z), system.S.grad(z)
        js = max(js, float(np.max(np.abs(system.J(z) @ dS))))
        G = g_metric_from_gradient(system.R(z), dH)
        gh = max(gh, float(np.max(np.abs(G @ dH))))
    report = VerificationReport()
    report.add("degeneracy_J_dS", js, tol, len(samples))
    report.add("degeneracy_G_dH", gh, tol, len(samples))
    return report


def verify_gradient(f, samples, tol=1e-5):
    if not f.has_analytic_gradient:
        raise ValueError(f"{f!r} has no analytic gradient to verify")
    worst = 0.0
    for z in samples:
        g = f.grad(z)
        fd = f.fd_grad(z)
        denom = max(float(np.max(np.abs(g))), 1.0)
        worst = max(worst, float(np.max(np.abs(g - fd))) / denom)
    return VerificationReport().add(f"gradient_{f.name}", worst, tol, len(samples))


def verify_system(system, samples=None, seed=0, box=(-1.0, 1.0)):
    """All suites applicable to a MetriplecticSystem, merged into one report."""
    if samples is None:
        samples = sample_states(system.dim, seed=seed, box=box)
    report = verify_jacobi(system.J, samples)
    report = report.merge(verify_minimal_metriplectic(system.R, samples, seed=seed))
    report = report.merge(verify_degeneracy(system, samples))
    fields = []
    for f in (system.H, system.S, *system.casimirs):
        if not any(f is g for g in fields):
            fields.append(f)
    for f in fields:
        if f.has_analytic_gradient:
            report = report.merge(verify_gradient(f, samples))
    return report
