"""Independent brute-force references: explicit index loops, no einsum, own finite differences."""

import itertools

import numpy as np


def eps3(i, j, k):
    return (i - j) * (j - k) * (k - i) / 2.0


def so3_constants():
    c = np.zeros((3, 3, 3))
    for i, j, k in itertools.product(range(3), repeat=3):
        c[i, j, k] = -eps3(i, j, k)
    return c


def kida_constants():
    # read off J(z) = [[0, z3, -z2], [-z3, 0, -z1], [z2, z1, 0]] column by column
    c = np.zeros((3, 3, 3))
    J = lambda z: np.array([[0, z[2], -z[1]], [-z[2], 0, -z[0]], [z[1], z[0], 0]])
    for k in range(3):
        c[:, :, k] = J(np.eye(3)[k])
    return c


def aff2_constants():
    """aff(1) + aff(1): [e1, e2] = e1, [e3, e4] = e3. Smallest setting with torsion."""
    c = np.zeros((4, 4, 4))
    c[0, 1, 0], c[1, 0, 0] = 1.0, -1.0
    c[2, 3, 2], c[3, 2, 2] = 1.0, -1.0
    return c


def loops(n, r=4):
    return itertools.product(range(n), repeat=r)


def contract4(R, a, b, c, d):
    n = R.shape[0]
    return sum(R[i, j, k, l] * a[i] * b[j] * c[k] * d[l] for i, j, k, l in loops(n))


def defects(R):
    n = R.shape[0]
    out = {"d12": 0.0, "d34": 0.0, "dpair": 0.0, "dcyclic": 0.0}
    for i, j, k, l in loops(n):
        out["d12"] = max(out["d12"], abs(R[i, j, k, l] + R[j, i, k, l]))
        out["d34"] = max(out["d34"], abs(R[i, j, k, l] + R[i, j, l, k]))
        out["dpair"] = max(out["dpair"], abs(R[i, j, k, l] - R[k, l, i, j]))
        out["dcyclic"] = max(out["dcyclic"], abs(R[i, j, k, l] + R[i, k, l, j] + R[i, l, j, k]))
    return out


def kn(s, m):
    n = s.shape[0]
    R = np.zeros((n,) * 4)
    for i, j, k, l in loops(n):
        R[i, j, k, l] = (s[i, k] * m[j, l] - s[i, l] * m[j, k]
                         + m[i, k] * s[j, l] - m[i, l] * s[j, k])
    return R


def lie_A(c, g):
    n = c.shape[0]
    A = np.zeros((n,) * 4)
    for i, j, k, l in loops(n):
        A[i, j, k, l] = sum(c[i, j, r] * c[k, l, s] * g[r, s] for r in range(n) for s in range(n))
    return A


def cyclic(A):
    n = A.shape[0]
    T = np.zeros_like(A)
    for i, j, k, l in loops(n):
        T[i, j, k, l] = (A[i, j, k, l] + A[i, k, l, j] + A[i, l, j, k]) / 3.0
    return T


def killing(c, lam):
    n = c.shape[0]
    g = np.zeros((n, n))
    for r, s in itertools.product(range(n), repeat=2):
        g[r, s] = lam * sum(c[r, m, q] * c[s, q, m] for m in range(n) for q in range(n))
    return g


def ckr(c, g):
    """1/4 c^{jk}_a c^{ial} - 1/4 c^{ik}_a c^{jal} + 1/2 c^{ij}_a c^{kal}, c^{ial} = c^{ia}_m g^{ml}."""
    n = c.shape[0]
    up = np.zeros((n, n, n))
    for i, a, l in loops(n, 3):
        up[i, a, l] = sum(c[i, a, m] * g[m, l] for m in range(n))
    R = np.zeros((n,) * 4)
    for i, j, k, l in loops(n):
        R[i, j, k, l] = sum(0.25 * c[j, k, a] * up[i, a, l] - 0.25 * c[i, k, a] * up[j, a, l]
                            + 0.5 * c[i, j, a] * up[k, a, l] for a in range(n))
    return R


def fd(F, z, h=1e-5):
    z = np.asarray(z, dtype=float)
    out = []
    for s in range(z.size):
        e = np.zeros_like(z)
        e[s] = h
        out.append((np.asarray(F(z + e)) - np.asarray(F(z - e))) / (2 * h))
    return np.stack(out, axis=-1)


def christoffel_lower(gfun, z, h=1e-5):
    """Gamma^l_{jk} = 1/2 g^{lr}(d_j g_rk + d_k g_rj - d_r g_jk) with explicit loops."""
    g = np.asarray(gfun(z))
    inv = np.linalg.inv(g)
    dg = fd(gfun, z, h)
    n = g.shape[0]
    G = np.zeros((n, n, n))
    for l, j, k in loops(n, 3):
        G[l, j, k] = 0.5 * sum(inv[l, r] * (dg[r, k, j] + dg[r, j, k] - dg[j, k, r]) for r in range(n))
    return G


def contravariant_christoffel_const(c, g):
    """Gamma^{ij}_l for J = c.z and constant contravariant g (no state dependence)."""
    n = c.shape[0]
    low = np.linalg.inv(g)
    G = np.zeros((n, n, n))
    for i, j, l in loops(n, 3):
        acc = 0.0
        for k in range(n):
            x = 0.0
            for s in range(n):
                x += g[k, s] * c[i, j, s] - g[s, i] * c[j, k, s] - g[s, j] * c[i, k, s]
            acc += low[k, l] * x
        G[i, j, l] = 0.5 * acc
    return G


def rigid_body_rhs(L, I, lam):
    """Euler equations plus the space-form dissipation, written out componentwise."""
    dH = L / np.asarray(I, dtype=float)
    dS = 2 * L
    J = np.array([[0.0, -L[2], L[1]], [L[2], 0.0, -L[0]], [-L[1], L[0], 0.0]])
    ham = J @ dH
    G = np.zeros((3, 3))
    for i, k in itertools.product(range(3), repeat=2):
        for j, l in itertools.product(range(3), repeat=2):
            R = lam * ((i == k) * (j == l) - (i == l) * (j == k))
            G[i, k] += R * dH[j] * dH[l]
    return ham + G @ dS
