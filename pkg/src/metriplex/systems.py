"""Factories for the rigid body, the Kida vortex and user-defined Lie-Poisson systems."""

from dataclasses import dataclass

import numpy as np

from .brackets import FourBracketField, PoissonField, ScalarField, StructureConstants
from .constructors import lie_algebra_4tensor, space_form, torsion_removal
from .dynamics import MetriplecticSystem
from .verify import sample_states, verify_degeneracy


@dataclass(frozen=True)
class RigidBodyParams:
    I1: float = 1.0
    I2: float = 2.0
    I3: float = 3.0
    lam: float = 0.1

    def __post_init__(self):
        if min(self.I1, self.I2, self.I3) <= 0:
            raise ValueError("moments of inertia must be positive")

    @property
    def inertia(self):
        return np.array([self.I1, self.I2, self.I3], dtype=float)


@dataclass(frozen=True)
class KidaParams:
    hamiltonian: ScalarField
    lam: float = 0.1


def rigid_body_hamiltonian(inertia):
    inv = 1.0 / np.asarray(inertia, dtype=float)
    return ScalarField(lambda L: 0.5 * float(np.sum(inv * L * L)), lambda L: inv * L, name="H")


def angular_momentum_squared():
    return ScalarField(lambda L: float(L @ L), lambda L: 2.0 * L, name="S")


def rigid_body(params=None, **kwargs):
    """Free rigid body with the space-form 4-bracket lam (d^ik d^jl - d^il d^jk)."""
    p = params if params is not None else RigidBodyParams(**kwargs)
    S = angular_momentum_squared()
    R = FourBracketField.from_tensor(space_form(np.eye(3), p.lam), algebraic=True,
                                     psd=p.lam >= 0, name="rigid body")
    return MetriplecticSystem(PoissonField.lie_poisson(StructureConstants.so3(), name="so(3)"), R,
                              rigid_body_hamiltonian(p.inertia), S, casimirs=[S],
                              db_metric=np.eye(3), dim=3, name="rigid_body")


def rigid_body_relaxed_state(params, z0):
    """Maximize |L|^2 at fixed H by direct comparison of the principal-axis candidates.

    The candidate on axis a is L = +/- sqrt(2 H I_a) e_a; the positive one is
    returned since the sign reached depends on the rotation phase.
    """
    I = params.inertia
    z0 = np.asarray(z0, dtype=float)
    energy = 0.5 * float(np.sum(z0 * z0 / I))
    best = int(np.argmax(2.0 * energy * I))
    out = np.zeros(3)
    out[best] = np.sqrt(2.0 * energy * I[best])
    return out


def kida_structure_constants():
    """sl(2,1) constants with J(z) = [[0, z3, -z2], [-z3, 0, -z1], [z2, z1, 0]]."""
    return StructureConstants.from_entries(3, [(0, 1, 2, 1.0), (0, 2, 1, -1.0), (1, 2, 0, -1.0)])


def kida_casimir():
    sig = np.array([1.0, -1.0, -1.0])
    return ScalarField(lambda z: float(np.sum(sig * z * z)), lambda z: 2.0 * sig * z, name="C")


def kida_placeholder_hamiltonian():
    """Illustrative H = (z1^2 + z3^2)/2, independent of z2. Not the physical Kida Hamiltonian."""
    w = np.array([1.0, 0.0, 1.0])
    return ScalarField(lambda z: 0.5 * float(np.sum(w * z * z)), lambda z: w * z, name="H")


def kida(params=None, **kwargs):
    p = params if params is not None else KidaParams(**kwargs)
    C = kida_casimir()
    R = FourBracketField.from_tensor(space_form(np.eye(3), p.lam), algebraic=True,
                                     psd=p.lam >= 0, name="kida")
    return MetriplecticSystem(PoissonField.lie_poisson(kida_structure_constants(), name="sl(2,1)"),
                              R, p.hamiltonian, C, casimirs=[C], db_metric=np.eye(3), dim=3,
                              name="kida")


class NotACasimirError(ValueError):
    pass


def lie_poisson_system(c, g4, H, S, casimirs=None, validate=True, tol=1e-8, seed=0,
                       name="lie_poisson"):
    """Lie-metriplectic system with R = torsion_removal(lie_algebra_4tensor(c, g4))."""
    c = c if isinstance(c, StructureConstants) else StructureConstants(c)
    g4 = np.asarray(g4, dtype=float)
    R = torsion_removal(lie_algebra_4tensor(c, g4))
    psd = bool(np.all(np.linalg.eigvalsh(0.5 * (g4 + g4.T)) >= -1e-12))
    system = MetriplecticSystem(
        PoissonField.lie_poisson(c),
        FourBracketField.from_tensor(R, algebraic=True, psd=psd, name="lie-metriplectic"),
        H, S, casimirs=[S] if casimirs is None else casimirs, db_metric=np.eye(c.dim),
        dim=c.dim, name=name)
    if validate:
        report = verify_degeneracy(system, sample_states(c.dim, seed=seed), tol=tol)
        if not report.verdict:
            raise NotACasimirError(f"entropy is not a Casimir of J: {report.render()}")
    return system
