"""
Bracket species on scalar fields over a finite-dimensional phase space:
Poisson and Lie-Poisson brackets, the metriplectic 4-bracket, its 2-bracket
reduction (G-metric), the KM bracket, double brackets and the (unnormalized)
contravariant sectional curvature.
"""

import numpy as np

from . import _numdiff
from .tensor_core import (ATOL, DimensionError, SymmetryError, as_rank2, as_rank4,
                          as_state, contract4, require_minimal, symmetry_defects)


class ScalarField:
    """Smooth real function of the state with a gradient oracle.

    If ``gradient`` is omitted the gradient is taken by central differences.
    """

    def __init__(self, value, gradient=None, name=None):
        self._value = value
        self._gradient = gradient
        self.name = name or getattr(value, "__name__", "f")

    @property
    def has_analytic_gradient(self):
        return self._gradient is not None

    def __call__(self, z):
        return float(self._value(np.asarray(z, dtype=float)))

    def grad(self, z):
        z = np.asarray(z, dtype=float)
        if self._gradient is not None:
            return np.asarray(self._gradient(z), dtype=float)
        return _numdiff.gradient(self._value, z)

    def fd_grad(self, z):
        return _numdiff.gradient(self._value, np.asarray(z, dtype=float))

    def __repr__(self):
        return f"ScalarField({self.name})"

    @classmethod
    def linear(cls, coeffs, constant=0.0, name=None):
        b = np.array(coeffs, dtype=float)
        return cls(lambda z: b @ z + constant, lambda z: b.copy(), name=name or "linear")

    @classmethod
    def quadratic(cls, matrix, linear=None, constant=0.0, name=None):
        """f(z) = 1/2 z.M.z + b.z + c with M symmetrized."""
        M = np.asarray(matrix, dtype=float)
        M = 0.5 * (M + M.T)
        b = np.zeros(M.shape[0]) if linear is None else np.asarray(linear, dtype=float)
        return cls(lambda z: 0.5 * z @ M @ z + b @ z + constant,
                   lambda z: M @ z + b, name=name or "quadratic")

    @classmethod
    def polynomial(cls, terms, name=None):
        """Sum of monomials given as (coefficient, exponents) pairs."""
        coefs = np.array([t[0] for t in terms], dtype=float)
        powers = np.array([t[1] for t in terms], dtype=int)
        if powers.ndim != 2:
            raise DimensionError("polynomial exponents must be equal-length lists")

        def value(z):
            return float(np.sum(coefs * np.prod(z ** powers, axis=1)))

        def grad(z):
            g = np.zeros(powers.shape[1])
            for s in range(powers.shape[1]):
                p = powers.copy()
                lead = p[:, s].astype(float)
                p[:, s] = np.maximum(p[:, s] - 1, 0)
                g[s] = np.sum(coefs * lead * np.prod(z ** p, axis=1))
            return g

        return cls(value, grad, name=name or "polynomial")


class StructureConstants:
    """Lie algebra structure constants c^{ij}_k stored as c[i, j, k]."""

    def __init__(self, c, atol=1e-12):
        c = np.array(c, dtype=float)
        if c.ndim != 3 or len(set(c.shape)) != 1:
            raise DimensionError(f"structure constants must be N x N x N, got {c.shape}")
        if np.any(c + c.transpose(1, 0, 2) != 0.0):
            raise SymmetryError("structure constants are not antisymmetric in the upper pair")
        defect = self.jacobi_defect_of(c)
        if defect > atol:
            raise ValueError(f"structure constants violate the Jacobi identity (defect {defect:.3e})")
        c.setflags(write=False)
        self.c = c

    @property
    def dim(self):
        return self.c.shape[0]

    @staticmethod
    def jacobi_defect_of(c):
        # sum_r c^{ij}_r c^{rk}_s + c^{jk}_r c^{ri}_s + c^{ki}_r c^{rj}_s
        t = np.einsum("ijr,rks->ijks", c, c)
        jac = t + t.transpose(1, 2, 0, 3) + t.transpose(2, 0, 1, 3)
        return float(np.max(np.abs(jac), initial=0.0))

    def jacobi_defect(self):
        return self.jacobi_defect_of(self.c)

    @classmethod
    def from_entries(cls, dim, entries):
        """Build from (i, j, k, value) tuples; the (j, i, k, -value) partner is implied."""
        c = np.zeros((dim, dim, dim))
        seen = {}
        for i, j, k, v in entries:
            i, j, k, v = int(i), int(j), int(k), float(v)
            if i == j and v != 0.0:
                raise SymmetryError(f"diagonal entry c[{i},{j},{k}] must vanish")
            for key, val in (((i, j, k), v), ((j, i, k), -v)):
                if key in seen and seen[key] != val:
                    raise ValueError(f"conflicting values for c{list(key)}")
                seen[key] = val
                c[key] = val
        return cls(c)

    @classmethod
    def so3(cls):
        """so(3) with c^{ij}_k = -epsilon_{ijk}."""
        from .tensor_core import levi_civita_symbol
        return cls(-levi_civita_symbol(3))

    @classmethod
    def abelian(cls, dim):
        return cls(np.zeros((dim, dim, dim)))


class PoissonField:
    """Poisson tensor J^{ij}(z) with an optional analytic derivative dJ[i, j, s]."""

    def __init__(self, evaluate, derivative=None, jacobi_verified=False, atol=ATOL, name="J"):
        self._eval = evaluate
        self._derivative = derivative
        self.jacobi_verified = jacobi_verified
        self.atol = atol
        self.name = name

    def __call__(self, z):
        J = as_rank2(self._eval(np.asarray(z, dtype=float)), "antisymmetric", self.atol)
        return J

    def raw(self, z):
        """Unchecked evaluation for inner loops."""
        return self._eval(z)

    def derivative(self, z, scale=_numdiff.STEP_SCALE):
        z = np.asarray(z, dtype=float)
        if self._derivative is not None:
            return np.asarray(self._derivative(z), dtype=float)
        return _numdiff.derivative(self._eval, z, scale)

    @classmethod
    def constant(cls, J, name="J"):
        J = as_rank2(J, "antisymmetric").copy()
        zero = np.zeros(J.shape + (J.shape[0],))
        return cls(lambda z: J, lambda z: zero, jacobi_verified=True, name=name)

    @classmethod
    def canonical(cls, m):
        """Symplectic J_c = [[0, I], [-I, 0]] in 2m dimensions."""
        I = np.eye(m)
        O = np.zeros((m, m))
        return cls.constant(np.block([[O, I], [-I, O]]), name="canonical")

    @classmethod
    def lie_poisson(cls, c, name="lie-poisson"):
        c = c if isinstance(c, StructureConstants) else StructureConstants(c)
        cc = np.array(c.c)
        return cls(lambda z: cc @ z, lambda z: cc, jacobi_verified=True, name=name)


class FourBracketField:
    """R^{ijkl}(z) housing a metriplectic 4-bracket.

    ``constant`` marks a Lie-metriplectic (state-independent) tensor; such a
    tensor is validated once here, others on every evaluation.
    """

    def __init__(self, evaluate, constant=False, algebraic=False, psd=False,
                 atol=ATOL, validate=True, name="R"):
        self.constant = constant
        self.algebraic = algebraic
        self.psd = psd
        self.atol = atol
        self.name = name
        self._validate = validate
        if constant:
            R = as_rank4(evaluate if not callable(evaluate) else evaluate(None)).copy()
            if validate:
                self._check(R)
            R.setflags(write=False)
            self._R = R
            self._eval = lambda z: R
        else:
            self._eval = evaluate

    def _check(self, R):
        scale = max(1.0, float(np.max(np.abs(R), initial=0.0)))
        defects = require_minimal(R, atol=self.atol * scale)
        if self.algebraic and defects["dcyclic"] > self.atol * scale:
            raise SymmetryError(f"cyclic identity violated (dcyclic={defects['dcyclic']:.3e})")

    def __call__(self, z):
        R = as_rank4(self._eval(np.asarray(z, dtype=float) if z is not None else None))
        if not self.constant and self._validate:
            self._check(R)
        return R

    def raw(self, z):
        """Unchecked evaluation for inner loops."""
        return self._eval(z)

    @classmethod
    def from_tensor(cls, R, algebraic=None, psd=False, atol=ATOL, name="R"):
        R = as_rank4(R)
        if algebraic is None:
            scale = max(1.0, float(np.max(np.abs(R), initial=0.0)))
            algebraic = symmetry_defects(R)["dcyclic"] <= atol * scale
        return cls(R, constant=True, algebraic=algebraic, psd=psd, atol=atol, name=name)


def _tensor_at(obj, z):
    return obj(z) if callable(obj) else np.asarray(obj, dtype=float)


def _grad(f, z):
    if isinstance(f, ScalarField):
        return f.grad(z)
    return np.asarray(f, dtype=float)


def _check_dim(n, *vecs):
    for v in vecs:
        if v.shape != (n,):
            raise DimensionError(f"gradient of shape {v.shape} does not match N={n}")


def poisson_bracket(J, f, g, z):
    """{f, g} = df . J . dg at z."""
    z = as_state(z)
    Jz = _tensor_at(J, z)
    df, dg = _grad(f, z), _grad(g, z)
    _check_dim(Jz.shape[0], z, df, dg)
    return float(df @ Jz @ dg)


def lie_poisson_tensor(c, z):
    """J^{ij}(z) = c^{ij}_k z^k."""
    c = c if isinstance(c, StructureConstants) else StructureConstants(c)
    z = as_state(z)
    _check_dim(c.dim, z)
    return c.c @ z


def four_bracket(R, f, k, g, n, z):
    """(f, k; g, n) = R^{ijkl} f_i k_j g_k n_l at z."""
    z = as_state(z)
    return contract4(_tensor_at(R, z), _grad(f, z), _grad(k, z), _grad(g, z), _grad(n, z))


def g_metric_from_gradient(Rz, dH):
    return np.einsum("ijkl,j,l->ik", Rz, dH, dH)


def g_metric(R, H, z):
    """G-metric G^{ik} = R^{ijkl} dH_j dH_l, symmetric and annihilating dH."""
    z = as_state(z)
    Rz = _tensor_at(R, z)
    dH = _grad(H, z)
    _check_dim(Rz.shape[0], z, dH)
    G = g_metric_from_gradient(Rz, dH)
    return 0.5 * (G + G.T)


def two_bracket(R, H, f, g, z):
    """(f, g)_H = (f, H; g, H)."""
    z = as_state(z)
    return float(_grad(f, z) @ g_metric(R, H, z) @ _grad(g, z))


def km_tensor(R, S, H, z):
    """KM bivector J_KM^{ij} = R^{ijkl} dS_k dH_l; [f, g]_S = df . J_KM . dg."""
    z = as_state(z)
    Rz = _tensor_at(R, z)
    dS, dH = _grad(S, z), _grad(H, z)
    _check_dim(Rz.shape[0], z, dS, dH)
    K = np.einsum("ijkl,k,l->ij", Rz, dS, dH)
    return 0.5 * (K - K.T)


def km_bracket(R, S, H, f, g, z):
    """[f, g]_S = (f, g; S, H), summed over the wedge f_i g_j - f_j g_i so that
    antisymmetry holds exactly in floating point.
    """
    z = as_state(z)
    K = km_tensor(R, S, H, z)
    df, dg = _grad(f, z), _grad(g, z)
    _check_dim(K.shape[0], df, dg)
    iu = np.triu_indices(K.shape[0], 1)
    wedge = np.outer(df, dg)
    wedge = wedge - wedge.T
    return float(np.sum(K[iu] * wedge[iu]))


def double_bracket_tensor(J, g, z):
    """D^{ij} = J^{ik} g_{kl} J^{jl}; ((f, g)) = df . D . dg."""
    z = as_state(z)
    Jz = _tensor_at(J, z)
    gz = as_rank2(_tensor_at(g, z), "symmetric")
    if gz.shape != Jz.shape:
        raise DimensionError("metric and Poisson tensor dimensions differ")
    D = Jz @ gz @ Jz.T
    return 0.5 * (D + D.T)


def sectional_curvature(R, a, b, z):
    """Unnormalized K(a, b) = R(a, b, a, b)."""
    z = as_state(z)
    return contract4(_tensor_at(R, z), a, b, a, b)
