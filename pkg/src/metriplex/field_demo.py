"""
Periodic pseudo-spectral realizations of the 1+1 K-N dissipation examples
(viscous, KdV-conserving, Ott-Sudan) and the 2+1 Euler vorticity brackets.

Odd-order derivatives drop the Nyquist mode so that they are exactly
skew-adjoint on the grid; discrete pairings of H-gradients with the
dissipative fields then vanish to roundoff.
"""

from dataclasses import dataclass

import numpy as np

from .dynamics import Trajectory, march

KINDS_1D = ("viscous", "kdv_conserving", "ott_sudan")
KINDS_2D = ("hamiltonian", "double_bracket", "metriplectic")


class Grid1D:
    """Periodic grid of n points (a power of two, at least 8) on [0, length)."""

    def __init__(self, n, length=2 * np.pi):
        n = int(n)
        if n < 8 or n & (n - 1):
            raise ValueError(f"grid size must be a power of two >= 8, got {n}")
        if not length > 0:
            raise ValueError("domain length must be positive")
        self.n = n
        self.length = float(length)
        self.dx = self.length / n
        self.x = np.arange(n) * self.dx
        self.k = 2 * np.pi * np.fft.rfftfreq(n, d=self.dx)
        self._odd = 1j * self.k
        self._odd[-1] = 0.0

    def integrate(self, f):
        return float(np.sum(f) * self.dx)

    def inner(self, f, g):
        return float(np.sum(f * g) * self.dx)

    def _check(self, u):
        u = np.asarray(u, dtype=float)
        if u.shape != (self.n,):
            raise ValueError(f"field of shape {u.shape} on a grid of {self.n} points")
        return u


def spectral_derivative(u, grid, order=1):
    """Fourier-collocation derivative; even orders keep the Nyquist mode as (-k^2)^(order/2)."""
    u = grid._check(u)
    if order < 0:
        raise ValueError("derivative order must be non-negative")
    if order == 0:
        return u.copy()
    if order % 2:
        mult = grid._odd ** order
    else:
        mult = (-grid.k ** 2) ** (order // 2)
    return np.fft.irfft(mult * np.fft.rfft(u), n=grid.n)


def hilbert_transform(u, grid):
    """Multiplier -i sgn(k); the zero and Nyquist modes map to 0."""
    u = grid._check(u)
    mult = -1j * np.sign(grid.k)
    mult[-1] = 0.0
    return np.fft.irfft(mult * np.fft.rfft(u), n=grid.n)


@dataclass(frozen=True)
class FieldParams:
    nu: float = 1.0
    W: float = 1.0
    c: float = 0.0


def _d(u, grid):
    return spectral_derivative(u, grid, 1)


def kdv_variational_derivative(u, grid, c):
    """H_u = c u + u^2/2 + d(du), with d the skew first-derivative matrix."""
    return c * u + 0.5 * u * u + _d(_d(u, grid), grid)


def dissipative_rhs_1d(kind, u, grid, params=FieldParams()):
    """(u, S)_H of the 1+1 K-N 4-bracket for the chosen Sigma, M and H."""
    u = grid._check(u)
    if kind == "viscous":
        return params.nu * spectral_derivative(u, grid, 2)
    if kind == "ott_sudan":
        return -2.0 * params.W * hilbert_transform(_d(u, grid), grid)
    if kind == "kdv_conserving":
        hu = kdv_variational_derivative(u, grid, params.c)
        dhu = _d(hu, grid)
        return -_d(params.W * hu * dhu, grid) - params.W * dhu * dhu
    raise ValueError(f"unknown 1+1 kind {kind!r}; expected one of {KINDS_1D}")


def hamiltonian_rhs_1d(kind, u, grid, params=FieldParams()):
    """Ideal part: u_t = d(u^-2) for the viscous/Ott-Sudan bundles (u > 0 only),
    Gardner flow u_t = -d(dH/du) for the KdV bundle."""
    u = grid._check(u)
    if kind in ("viscous", "ott_sudan"):
        if np.any(u <= 0):
            raise ValueError("the h(u) = 1/u^2 bracket needs strictly positive u")
        return _d(u ** -2.0, grid)
    if kind == "kdv_conserving":
        return -_d(0.5 * kdv_variational_derivative(u, grid, params.c), grid)
    raise ValueError(f"unknown 1+1 kind {kind!r}; expected one of {KINDS_1D}")


def hamiltonian_1d(kind, u, grid, params=FieldParams()):
    u = grid._check(u)
    if kind == "kdv_conserving":
        du = _d(u, grid)
        return 0.5 * grid.integrate(u ** 3 / 6.0 - 0.5 * du * du + 0.5 * params.c * u * u)
    if kind in KINDS_1D:
        return grid.integrate(u)
    raise ValueError(f"unknown 1+1 kind {kind!r}")


def entropy_1d(kind, u, grid):
    u = grid._check(u)
    if kind == "kdv_conserving":
        return grid.integrate(u)
    if kind in KINDS_1D:
        return 0.5 * grid.inner(u, u)
    raise ValueError(f"unknown 1+1 kind {kind!r}")


def hamiltonian_gradient_1d(kind, u, grid, params=FieldParams()):
    if kind == "kdv_conserving":
        return 0.5 * kdv_variational_derivative(u, grid, params.c)
    return np.ones_like(grid._check(u))


def entropy_gradient_1d(kind, u, grid):
    if kind == "kdv_conserving":
        return np.ones_like(grid._check(u))
    return grid._check(u).copy()


def entropy_production_1d(kind, u, grid, params=FieldParams()):
    """Discrete S-dot: pairing of the S-gradient with the dissipative field."""
    return grid.inner(entropy_gradient_1d(kind, u, grid), dissipative_rhs_1d(kind, u, grid, params))


def kdv_soliton(grid, alpha, x0=None):
    """a sech^2(alpha (x - x0)) with a = 12 alpha^2; stationary for c = -4 alpha^2."""
    x0 = grid.length / 2 if x0 is None else x0
    return 12.0 * alpha ** 2 / np.cosh(alpha * (grid.x - x0)) ** 2, -4.0 * alpha ** 2


def rhs_1d(kind, grid, params=FieldParams(), mode="dissipative"):
    if mode == "dissipative":
        return lambda u: dissipative_rhs_1d(kind, u, grid, params)
    if mode == "hamiltonian":
        return lambda u: hamiltonian_rhs_1d(kind, u, grid, params)
    if mode == "full":
        return lambda u: hamiltonian_rhs_1d(kind, u, grid, params) + dissipative_rhs_1d(kind, u, grid, params)
    raise ValueError(f"unknown mode {mode!r}")


def _norm_columns(grid_integrate, f):
    return [np.sqrt(grid_integrate(f * f)), float(np.max(np.abs(f)))]


def integrate_1d(kind, u0, grid, t_end, dt, params=FieldParams(), mode="dissipative",
                 method="rk4", record_every=1):
    """March a 1+1 field; the trajectory's state columns are norm diagnostics."""
    u0 = grid._check(u0)

    def observe(u):
        return [hamiltonian_1d(kind, u, grid, params), entropy_1d(kind, u, grid),
                grid.integrate(u)]

    times, fields, obs, speeds, _ = march(rhs_1d(kind, grid, params, mode), u0, t_end, dt,
                                          method, observe, record_every=record_every)
    obs = np.array(obs)
    norms = [_norm_columns(grid.integrate, u) for u in fields]
    traj = Trajectory(times, norms, {"H": obs[:, 0], "S": obs[:, 1], "mass": obs[:, 2]},
                      ["l2_norm", "max_abs"], mode, speed=speeds * np.sqrt(grid.dx),
                      h_drift=_rel_drift(obs[:, 0]))
    return traj, fields[-1]


def _rel_drift(series):
    return float(np.max(np.abs(series - series[0]))) / max(1.0, abs(float(series[0])))


# -- 2+1 Euler -------------------------------------------------------------

class MeanVorticityError(ValueError):
    pass


class Grid2D:
    """Periodic nx x ny grid with a 2/3-rule dealiasing mask."""

    def __init__(self, nx, ny=None, lx=2 * np.pi, ly=None):
        ny = nx if ny is None else ny
        ly = lx if ly is None else ly
        for n in (nx, ny):
            if n < 8 or n & (n - 1):
                raise ValueError(f"grid size must be a power of two >= 8, got {n}")
        self.nx, self.ny, self.lx, self.ly = int(nx), int(ny), float(lx), float(ly)
        self.dx, self.dy = self.lx / nx, self.ly / ny
        self.x = np.arange(nx) * self.dx
        self.y = np.arange(ny) * self.dy
        kx = 2 * np.pi * np.fft.fftfreq(nx, d=self.dx)
        ky = 2 * np.pi * np.fft.rfftfreq(ny, d=self.dy)
        self.kx, self.ky = np.meshgrid(kx, ky, indexing="ij")
        self.k2 = self.kx ** 2 + self.ky ** 2
        self.inv_k2 = np.zeros_like(self.k2)
        self.inv_k2[self.k2 > 0] = 1.0 / self.k2[self.k2 > 0]
        ix = np.abs(np.fft.fftfreq(nx, d=1.0 / nx))
        iy = np.fft.rfftfreq(ny, d=1.0 / ny)
        self.mask = ((ix[:, None] < nx / 3.0) & (iy[None, :] < ny / 3.0)).astype(float)

    @property
    def cell(self):
        return self.dx * self.dy

    def mesh(self):
        return np.meshgrid(self.x, self.y, indexing="ij")

    def integrate(self, f):
        return float(np.sum(f) * self.cell)

    def fft(self, f):
        return np.fft.rfft2(f)

    def ifft(self, fh):
        return np.fft.irfft2(fh, s=(self.nx, self.ny))

    def project(self, f):
        """Drop the modes removed by dealiasing."""
        return self.ifft(self.mask * self.fft(self._check(f)))

    def _check(self, f):
        f = np.asarray(f, dtype=float)
        if f.shape != (self.nx, self.ny):
            raise ValueError(f"field of shape {f.shape} on a {self.nx}x{self.ny} grid")
        return f


def streamfunction(omega, grid):
    """psi with lap(psi) = omega; omega must have zero mean."""
    omega = grid._check(omega)
    scale = max(1.0, float(np.max(np.abs(omega))))
    if abs(float(np.mean(omega))) > 1e-12 * scale:
        raise MeanVorticityError("vorticity must have zero mean for a periodic Poisson solve")
    return grid.ifft(-grid.inv_k2 * grid.fft(omega))


def jacobian(f, g, grid):
    """Dealiased [f, g] = f_x g_y - f_y g_x."""
    fh = grid.mask * grid.fft(f)
    gh = grid.mask * grid.fft(g)
    fx, fy = grid.ifft(1j * grid.kx * fh), grid.ifft(1j * grid.ky * fh)
    gx, gy = grid.ifft(1j * grid.kx * gh), grid.ifft(1j * grid.ky * gh)
    return grid.ifft(grid.mask * grid.fft(fx * gy - fy * gx))


def euler2d_rhs(kind, omega, grid, lam=0.0):
    psi = streamfunction(omega, grid)
    if kind == "hamiltonian":
        return -jacobian(omega, psi, grid)
    if kind == "double_bracket":
        return -lam * jacobian(omega, jacobian(omega, psi, grid), grid)
    if kind == "metriplectic":
        return lam * jacobian(psi, jacobian(omega, psi, grid), grid)
    raise ValueError(f"unknown 2+1 kind {kind!r}; expected one of {KINDS_2D}")


def euler2d_diagnostics(omega, grid):
    """H = 1/2 int omega psi, kinetic energy E = -H, enstrophy, circulation."""
    psi = streamfunction(omega, grid)
    H = 0.5 * grid.integrate(omega * psi)
    return {"H": H, "E": -H, "S": 0.5 * grid.integrate(omega * omega),
            "circulation": grid.integrate(omega)}


def integrate_2d(kind, omega0, grid, t_end, dt, lam=0.0, method="rk4", record_every=1):
    omega0 = grid.project(omega0)
    names = ("H", "E", "S", "circulation")

    def observe(w):
        d = euler2d_diagnostics(w, grid)
        return [d[k] for k in names]

    times, fields, obs, speeds, _ = march(lambda w: euler2d_rhs(kind, w, grid, lam), omega0,
                                          t_end, dt, method, observe, record_every=record_every)
    obs = np.array(obs)
    norms = [_norm_columns(grid.integrate, w) for w in fields]
    traj = Trajectory(times, norms, {k: obs[:, i] for i, k in enumerate(names)},
                      ["l2_norm", "max_abs"], kind, speed=speeds * np.sqrt(grid.cell),
                      h_drift=_rel_drift(obs[:, 0]))
    return traj, fields[-1]


def write_snapshot_1d(path, grid, u):
    with open(path, "w", newline="\n", encoding="ascii") as fh:
        fh.write("x,u\n")
        for x, v in zip(grid.x, u):
            fh.write(f"{x:.17g},{v:.17g}\n")


def write_snapshot_2d(path, grid, omega):
    X, Y = grid.mesh()
    with open(path, "w", newline="\n", encoding="ascii") as fh:
        fh.write("x,y,omega\n")
        for x, y, w in zip(X.ravel(), Y.ravel(), np.asarray(omega).ravel()):
            fh.write(f"{x:.17g},{y:.17g},{w:.17g}\n")
