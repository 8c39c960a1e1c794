"""
Dense small-dimension tensor values and the index-symmetry algebra.

Rank-2 and rank-4 values are plain numpy arrays. Index order of a rank-4
array is (i, j; k, l), matching the slot order (f, k; g, n) of the 4-bracket.
"""

from itertools import permutations

import numpy as np

ATOL = 1e-10


class DimensionError(ValueError):
    pass


class SymmetryError(ValueError):
    pass


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def as_state(z):
    """Validate a phase-space point and return it as a read-only float vector."""
    z = np.asarray(z, dtype=float)
    if z.ndim == 0:
        z = z.reshape(1)
    if z.ndim != 1 or z.size < 1:
        raise DimensionError(f"state must be a non-empty vector, got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise ValueError("state has non-finite entries")
    return _frozen(z)


def as_rank2(m, symmetry=None, atol=ATOL):
    """Return ``m`` as a square matrix, checking the requested symmetry tag.

    ``symmetry`` is one of None/"none", "symmetric", "antisymmetric".
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"rank-2 value must be square, got shape {m.shape}")
    if symmetry in (None, "none"):
        return m
    if symmetry == "symmetric":
        defect = np.max(np.abs(m - m.T)) if m.size else 0.0
    elif symmetry == "antisymmetric":
        defect = np.max(np.abs(m + m.T)) if m.size else 0.0
    else:
        raise ValueError(f"unknown symmetry tag {symmetry!r}")
    if defect > atol:
        raise SymmetryError(f"matrix is not {symmetry}: defect {defect:.3e} > {atol:.1e}")
    return m


def as_rank4(r):
    r = np.asarray(r, dtype=float)
    if r.ndim != 4 or len(set(r.shape)) != 1:
        raise DimensionError(f"rank-4 value must be N x N x N x N, got shape {r.shape}")
    if not np.all(np.isfinite(r)):
        raise ValueError("rank-4 value has non-finite entries")
    return r


def contract4(R, a, b, c, d):
    """Full contraction sum R^{ijkl} a_i b_j c_k d_l."""
    R = as_rank4(R)
    n = R.shape[0]
    vecs = [np.asarray(v, dtype=float) for v in (a, b, c, d)]
    for v in vecs:
        if v.shape != (n,):
            raise DimensionError(f"covector of shape {v.shape} does not match N={n}")
    return float(np.einsum("ijkl,i,j,k,l->", R, *vecs))


def symmetry_defects(R):
    """Max absolute violation of each of the four curvature identities.

    d12:     R^{ijkl} + R^{jikl}
    d34:     R^{ijkl} + R^{ijlk}
    dpair:   R^{ijkl} - R^{klij}
    dcyclic: R^{ijkl} + R^{iklj} + R^{iljk}
    """
    R = as_rank4(R)
    return {
        "d12": float(np.max(np.abs(R + R.transpose(1, 0, 2, 3)))),
        "d34": float(np.max(np.abs(R + R.transpose(0, 1, 3, 2)))),
        "dpair": float(np.max(np.abs(R - R.transpose(2, 3, 0, 1)))),
        "dcyclic": float(np.max(np.abs(_cyclic_sum(R)))),
    }


def _cyclic_sum(A):
    # A^{ijkl} + A^{iklj} + A^{iljk}; out[i,j,k,l] = A[i,k,l,j] is transpose (0,3,1,2)
    return A + A.transpose(0, 3, 1, 2) + A.transpose(0, 2, 3, 1)


def require_minimal(R, atol=ATOL):
    """Raise SymmetryError naming the first of the pair symmetries that fails."""
    defects = symmetry_defects(R)
    names = {"d12": "antisymmetry in the first pair",
             "d34": "antisymmetry in the second pair",
             "dpair": "pair-interchange symmetry"}
    for key, label in names.items():
        if defects[key] > atol:
            raise SymmetryError(f"{label} violated ({key}={defects[key]:.3e} > {atol:.1e})")
    return defects


def cyclic_part(A, atol=ATOL):
    """Totally antisymmetric cyclic part T = (A^{ijkl} + A^{iklj} + A^{iljk}) / 3."""
    A = as_rank4(A)
    require_minimal(A, atol=max(atol, atol * np.max(np.abs(A), initial=0.0)))
    return _cyclic_sum(A) / 3.0


def antisymmetry_defect(T):
    """Max violation of total antisymmetry over all transpositions of a rank-4 array."""
    T = as_rank4(T)
    worst = 0.0
    for p in [(1, 0, 2, 3), (0, 2, 1, 3), (0, 1, 3, 2), (3, 1, 2, 0), (2, 1, 0, 3), (0, 3, 2, 1)]:
        worst = max(worst, float(np.max(np.abs(T + T.transpose(p)))))
    return worst


def levi_civita_symbol(n=3):
    eps = np.zeros((n,) * n)
    for perm in permutations(range(n)):
        eps[perm] = _perm_sign(perm)
    return eps


def _perm_sign(perm):
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def delta_antisym(n):
    """delta^{ik} delta^{jl} - delta^{il} delta^{jk}."""
    d = np.eye(n)
    return np.einsum("ik,jl->ijkl", d, d) - np.einsum("il,jk->ijkl", d, d)
