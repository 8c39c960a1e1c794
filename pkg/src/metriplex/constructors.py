"""
Recipes for minimal-metriplectic and algebraic-curvature 4-tensors.

Covariant Christoffel arrays are stored as ``Gam[l, j, k] = Gamma^l_{jk}``;
contravariant ones as ``Gam[i, j, l] = Gamma^{ij}_l``. State derivatives are
appended as the last axis.
"""

import numpy as np

from . import _numdiff
from .brackets import PoissonField, StructureConstants
from .tensor_core import (ATOL, DimensionError, SymmetryError, as_rank2, as_rank4,
                          as_state, cyclic_part, require_minimal)


class SingularMetricError(ValueError):
    pass


class MetricField:
    """Symmetric metric field.

    ``covariant=True`` means ``evaluate`` returns g_{ij}; otherwise it returns
    g^{ij}. Both index positions and their state derivatives are available.
    ``second_derivative`` (covariant metrics only) returns d2[a, b, s, m] =
    d^2 g_{ab} / dz^s dz^m and lets levi_civita supply an exact dGamma.
    """

    def __init__(self, evaluate, covariant=False, definiteness="positive_definite",
                 derivative=None, second_derivative=None, atol=ATOL, name="g"):
        if definiteness not in ("positive_definite", "positive_semidefinite", "indefinite"):
            raise ValueError(f"unknown definiteness {definiteness!r}")
        self._eval = evaluate
        self._derivative = derivative
        self._second = second_derivative
        if second_derivative is not None and (not covariant or derivative is None):
            raise ValueError("second_derivative needs a covariant metric with an analytic derivative")
        self.covariant = covariant
        self.definiteness = definiteness
        self.atol = atol
        self.name = name

    def raw(self, z):
        return as_rank2(self._eval(np.asarray(z, dtype=float)), "symmetric", self.atol)

    def raw_derivative(self, z):
        if self._derivative is not None:
            return np.asarray(self._derivative(np.asarray(z, dtype=float)), dtype=float)
        return _numdiff.derivative(self._eval, z)

    def _inverse(self, m):
        try:
            inv = np.linalg.inv(m)
        except np.linalg.LinAlgError as exc:
            raise SingularMetricError("metric is not invertible") from exc
        if not np.all(np.isfinite(inv)) or np.linalg.cond(m) > 1e14:
            raise SingularMetricError("metric is not invertible")
        return 0.5 * (inv + inv.T)

    def upper(self, z):
        m = self.raw(z)
        return self._inverse(m) if self.covariant else m

    def lower(self, z):
        m = self.raw(z)
        return m if self.covariant else self._inverse(m)

    def d_upper(self, z):
        """out[a, b, s] = d g^{ab} / dz^s."""
        if not self.covariant:
            return self.raw_derivative(z)
        inv = self.upper(z)
        return -np.einsum("ar,rts,tb->abs", inv, self.raw_derivative(z), inv)

    def d_lower(self, z):
        """out[a, b, s] = d g_{ab} / dz^s."""
        if self.covariant:
            return self.raw_derivative(z)
        low = self.lower(z)
        return -np.einsum("ar,rts,tb->abs", low, self.raw_derivative(z), low)

    @property
    def has_second_derivative(self):
        return self._second is not None

    def d2_lower(self, z):
        return np.asarray(self._second(np.asarray(z, dtype=float)), dtype=float)

    def check_definite(self, z):
        if self.definiteness != "positive_definite":
            return
        try:
            np.linalg.cholesky(self.raw(z))
        except np.linalg.LinAlgError as exc:
            raise SingularMetricError("metric flagged positive definite is not") from exc

    @classmethod
    def constant(cls, g, covariant=False, definiteness=None, name="g"):
        g = as_rank2(g, "symmetric").copy()
        if definiteness is None:
            w = np.linalg.eigvalsh(g)
            if np.all(w > 0):
                definiteness = "positive_definite"
            elif np.all(w >= -ATOL):
                definiteness = "positive_semidefinite"
            else:
                definiteness = "indefinite"
        zero = np.zeros(g.shape + (g.shape[0],))
        return cls(lambda z: g, covariant=covariant, definiteness=definiteness,
                   derivative=lambda z: zero, name=name)


class ChristoffelField:
    """Connection coefficients as a function of state, tagged covariant or contravariant."""

    def __init__(self, evaluate, kind, derivative=None):
        if kind not in ("covariant", "contravariant"):
            raise ValueError(f"unknown Christoffel kind {kind!r}")
        self._eval = evaluate
        self._derivative = derivative
        self.kind = kind

    def __call__(self, z):
        return np.asarray(self._eval(np.asarray(z, dtype=float)), dtype=float)

    def derivative(self, z):
        if self._derivative is not None:
            return np.asarray(self._derivative(np.asarray(z, dtype=float)), dtype=float)
        return _numdiff.nested_derivative(self._eval, z)

    @classmethod
    def levi_civita(cls, g):
        deriv = (lambda z: levi_civita_derivative(g, z)) if g.has_second_derivative else None
        return cls(lambda z: levi_civita(g, z), "covariant", deriv)

    @classmethod
    def contravariant(cls, J, g):
        return cls(lambda z: contravariant_christoffel(J, g, z), "contravariant")


# -- algebraic constructions -------------------------------------------------

def kn_product(sigma, mu):
    """Kulkarni-Nomizu product on the dual space:
    R^{ijkl} = s^{ik} m^{jl} - s^{il} m^{jk} + m^{ik} s^{jl} - m^{il} s^{jk}.
    """
    s = as_rank2(sigma, "symmetric")
    m = as_rank2(mu, "symmetric")
    if s.shape != m.shape:
        raise DimensionError("K-N factors have different dimensions")
    return (np.einsum("ik,jl->ijkl", s, m) - np.einsum("il,jk->ijkl", s, m)
            + np.einsum("ik,jl->ijkl", m, s) - np.einsum("il,jk->ijkl", m, s))


def space_form(g, K):
    """Constant-curvature tensor K (g^{ik} g^{jl} - g^{il} g^{jk})."""
    g = as_rank2(g, "symmetric")
    return K * (np.einsum("ik,jl->ijkl", g, g) - np.einsum("il,jk->ijkl", g, g))


def _constants(c):
    return c.c if isinstance(c, StructureConstants) else StructureConstants(c).c


def lie_algebra_4tensor(c, g):
    """A^{ijkl} = c^{ij}_r c^{kl}_s g^{rs}; minimal metriplectic, generally with torsion."""
    cc = _constants(c)
    g = as_rank2(g, "symmetric")
    if g.shape[0] != cc.shape[0]:
        raise DimensionError("metric and structure constants have different dimensions")
    return np.einsum("ijr,kls,rs->ijkl", cc, cc, g)


def torsion_removal(A, atol=ATOL):
    """Algebraic-curvature representative R = A - T of a minimal metriplectic tensor."""
    A = as_rank4(A)
    return A - cyclic_part(A, atol=atol)


def b_tensor(c, g):
    """Closed-form torsion-free partner of lie_algebra_4tensor(c, g):
    (g^{rs}/3)(2 c^{ij}_r c^{kl}_s + c^{ik}_r c^{jl}_s - c^{il}_r c^{jk}_s).
    """
    cc = _constants(c)
    g = as_rank2(g, "symmetric")
    return (2.0 * np.einsum("ijr,kls,rs->ijkl", cc, cc, g)
            + np.einsum("ikr,jls,rs->ijkl", cc, cc, g)
            - np.einsum("ilr,jks,rs->ijkl", cc, cc, g)) / 3.0


def cartan_killing(c, lam=-0.5):
    """g_CK^{rs} = lam * c^{rm}_n c^{sn}_m."""
    cc = _constants(c)
    g = lam * np.einsum("rmn,snm->rs", cc, cc)
    return 0.5 * (g + g.T)


def ck_4tensor(c, lam=-0.5):
    """Torsion-free 4-tensor of the Cartan-Killing metric.

    Evaluates g_CK^{rs}(2 c^{ij}_r c^{kl}_s - c^{ik}_r c^{lj}_s - c^{il}_r c^{jk}_s) / 3,
    which for a semisimple algebra equals g_CK^{rs} c^{ij}_r c^{kl}_s.
    """
    cc = _constants(c)
    g = cartan_killing(c, 1.0)
    scale = max(1.0, float(np.max(np.abs(g))))
    if abs(np.linalg.det(g / scale)) < 1e-12:
        raise SingularMetricError("Killing form is singular (algebra not semisimple)")
    g = lam * g
    return (2.0 * np.einsum("ijr,kls,rs->ijkl", cc, cc, g)
            - np.einsum("ikr,ljs,rs->ijkl", cc, cc, g)
            - np.einsum("ilr,jks,rs->ijkl", cc, cc, g)) / 3.0


def recover_algebraic_curvature(g_metric_of, n):
    """Rebuild an algebraic curvature tensor from its G-metrics on the probes
    dH = e_r and dH = e_r + e_s.

    ``g_metric_of(h)`` must return R^{ijkl} h_j h_l. The symmetrized tensor
    S^{ijkl} = (R^{ijkl} + R^{ilkj}) / 2 is read off by polarization and the
    cyclic identity gives R^{ijkl} = 2/3 (S^{ijkl} - S^{jikl}).
    """
    eye = np.eye(n)
    single = [np.asarray(g_metric_of(eye[r]), dtype=float) for r in range(n)]
    S = np.zeros((n, n, n, n))
    for r in range(n):
        S[:, r, :, r] = single[r]
        for s in range(r + 1, n):
            pair = np.asarray(g_metric_of(eye[r] + eye[s]), dtype=float)
            polar = 0.5 * (pair - single[r] - single[s])
            S[:, r, :, s] = polar
            S[:, s, :, r] = polar
    return 2.0 / 3.0 * (S - S.transpose(1, 0, 2, 3))


# -- connections and curvature ------------------------------------------------

def levi_civita(g, z):
    """Gamma^l_{jk} = 1/2 g^{lr} (d_j g_{rk} + d_k g_{rj} - d_r g_{jk})."""
    z = as_state(z)
    g.check_definite(z)
    up = g.upper(z)
    dg = g.d_lower(z)
    inner = (np.einsum("rkj->rjk", dg) + dg - np.einsum("jkr->rjk", dg))
    Gam = 0.5 * np.einsum("lr,rjk->ljk", up, inner)
    return 0.5 * (Gam + Gam.transpose(0, 2, 1))


def levi_civita_derivative(g, z):
    """out[l, j, k, m] = d_m Gamma^l_{jk} from analytic first and second metric derivatives."""
    z = as_state(z)
    up, dg, d2 = g.upper(z), g.d_lower(z), g.d2_lower(z)
    inner = (np.einsum("rkj->rjk", dg) + dg - np.einsum("jkr->rjk", dg))
    d_inner = (np.einsum("rkjm->rjkm", d2) + d2 - np.einsum("jkrm->rjkm", d2))
    d_up = -np.einsum("la,abm,br->lrm", up, dg, up)
    out = 0.5 * (np.einsum("lrm,rjk->ljkm", d_up, inner) + np.einsum("lr,rjkm->ljkm", up, d_inner))
    return 0.5 * (out + out.transpose(0, 2, 1, 3))


def riemann_from_affine(Gamma, g, z):
    """Riemann-Christoffel tensor of a covariant connection, fully raised with g.

    R^i_{jkl} = G^i_{rk} G^r_{jl} - G^i_{rl} G^r_{jk} + d_k G^i_{jl} - d_l G^i_{jk},
    R^{ijkl} = g^{jr} g^{ks} g^{lt} R^i_{rst}.
    """
    z = as_state(z)
    if getattr(Gamma, "kind", "covariant") != "covariant":
        raise ValueError("riemann_from_affine needs a covariant connection")
    if isinstance(Gamma, ChristoffelField):
        Gam, dGam = Gamma(z), Gamma.derivative(z)
    else:
        Gam = np.asarray(Gamma(z), dtype=float)
        dGam = _numdiff.nested_derivative(Gamma, z)
    # dGam[i, j, l, k] = d_k Gamma^i_{jl}
    Rm = (np.einsum("irk,rjl->ijkl", Gam, Gam) - np.einsum("irl,rjk->ijkl", Gam, Gam)
          + dGam.transpose(0, 1, 3, 2) - dGam)
    up = g.upper(z)
    return np.einsum("jr,ks,lt,irst->ijkl", up, up, up, Rm)


def _poisson_parts(J, z, scale=_numdiff.STEP_SCALE):
    if isinstance(J, PoissonField):
        return J(z), J.derivative(z, scale)
    Jz = as_rank2(J(z), "antisymmetric")
    return Jz, _numdiff.derivative(J, z, scale)


def contravariant_christoffel(J, g, z):
    """Contravariant Levi-Civita symbols Gamma^{ij}_l of a Poisson tensor and metric."""
    z = as_state(z)
    Jz, dJ = _poisson_parts(J, z)
    up, low, dup = g.upper(z), g.lower(z), g.d_upper(z)
    X = (np.einsum("is,jks->ijk", Jz, dup) - np.einsum("ks,ijs->ijk", Jz, dup)
         + np.einsum("js,iks->ijk", Jz, dup)
         + np.einsum("ks,ijs->ijk", up, dJ) - np.einsum("si,jks->ijk", up, dJ)
         - np.einsum("sj,iks->ijk", up, dJ))
    return 0.5 * np.einsum("kl,ijk->ijl", low, X)


def contravariant_curvature(J, g, z):
    """Fully contravariant curvature of the contravariant Levi-Civita connection.

    The raw components R^{ijk}_l = (R(dz^i, dz^j) dz^k)_l are raised on l and
    placed in bracket order as B^{lkij}, the labelling under which the
    sectional curvature R(a, b, a, b) of so(3) with the flat metric is +1/4.
    """
    z = as_state(z)
    Jz, dJ = _poisson_parts(J, z)
    Gam = contravariant_christoffel(J, g, z)
    dGam = _numdiff.nested_derivative(lambda x: contravariant_christoffel(J, g, x), z)
    raw = (np.einsum("jks,isl->ijkl", Gam, Gam) - np.einsum("iks,jsl->ijkl", Gam, Gam)
           - np.einsum("ijs,skl->ijkl", dJ, Gam)
           + np.einsum("is,jkls->ijkl", Jz, dGam) - np.einsum("js,ikls->ijkl", Jz, dGam))
    raised = np.einsum("ijks,sl->ijkl", raw, g.upper(z))
    return raised.transpose(3, 2, 0, 1)


def torsion_identity_defect(J, g, z):
    """max |Gamma^{ij}_k - Gamma^{ji}_k - dJ^{ij}/dz^k|."""
    Gam = contravariant_christoffel(J, g, z)
    _, dJ = _poisson_parts(J, as_state(z))
    return float(np.max(np.abs(Gam - Gam.transpose(1, 0, 2) - dJ)))


def metric_compatibility_defect(J, g, z):
    """max |J^{is} d_s g^{jk} - g^{ks} Gamma^{ij}_s - g^{js} Gamma^{ik}_s|."""
    z = as_state(z)
    Jz, _ = _poisson_parts(J, z)
    Gam = contravariant_christoffel(J, g, z)
    up, dup = g.upper(z), g.d_upper(z)
    lhs = np.einsum("is,jks->ijk", Jz, dup)
    rhs = np.einsum("ks,ijs->ijk", up, Gam) + np.einsum("js,iks->ijk", up, Gam)
    return float(np.max(np.abs(lhs - rhs)))


# -- GENERIC conversion -------------------------------------------------------

class VanishingGradientError(ValueError):
    pass


def _entropy_gradient(S, z):
    dS = S.grad(z) if hasattr(S, "grad") else np.asarray(S, dtype=float)
    norm2 = float(dS @ dS)
    if not np.isfinite(norm2) or norm2 <= (np.finfo(float).tiny / np.finfo(float).eps):
        raise VanishingGradientError("entropy gradient vanishes at this state")
    return dS, norm2


def generic_linearize(Y, S, z):
    """G_hat^{ij} = Y^i dS_j / |dS|^2, so that G_hat . dS = Y."""
    z = as_state(z)
    dS, norm2 = _entropy_gradient(S, z)
    y = np.asarray(Y(z) if callable(Y) else Y, dtype=float)
    if y.shape != dS.shape:
        raise DimensionError("dissipative vector and entropy gradient differ in size")
    return np.outer(y, dS) / norm2


def _householder(n_unit):
    """Symmetric orthogonal Q whose first column is +/- n_unit."""
    n = n_unit.size
    v = n_unit.copy()
    v[0] += np.copysign(1.0, n_unit[0]) if n_unit[0] != 0 else 1.0
    return np.eye(n) - 2.0 * np.outer(v, v) / (v @ v)


def generic_symmetrize(Ghat, S, z):
    """Symmetric G with G . dS = G_hat . dS, built in an orthonormal frame
    whose first axis is dS/|dS| by mirroring the lower triangle of G_hat.
    """
    z = as_state(z)
    dS, norm2 = _entropy_gradient(S, z)
    Ghat = as_rank2(Ghat)
    Q = _householder(dS / np.sqrt(norm2))
    Gf = Q.T @ Ghat @ Q
    low = np.tril(Gf)
    Gs = low + np.tril(Gf, -1).T
    G = Q @ Gs @ Q.T
    return 0.5 * (G + G.T)
