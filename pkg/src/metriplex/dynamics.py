"""
Fixed-step integration of z' = J dH + G dS and its restricted modes, with
First/Second Law monitors and CSV export.
"""

import io
import math
import warnings

import numpy as np

from .tensor_core import DimensionError, as_rank2, as_state

MODES = ("full", "hamiltonian", "dissipative", "km", "double_bracket")
METHODS = ("rk4", "euler")


class IntegrationError(RuntimeError):
    """Raised when a step produces non-finite values; carries the partial run."""

    def __init__(self, message, last_state, trajectory=None):
        super().__init__(message)
        self.last_state = last_state
        self.trajectory = trajectory


class ConvergenceWarning(UserWarning):
    pass


class MetriplecticSystem:
    """A Poisson tensor J, 4-bracket tensor R, Hamiltonian H and entropy S.

    ``db_metric`` is the metric g_{ij} used by the double-bracket mode.
    """

    def __init__(self, J, R, H, S, casimirs=(), db_metric=None, tol_H=1e-8, tol_S=1e-12,
                 dim=None, name="system"):
        self.J, self.R, self.H, self.S = J, R, H, S
        self.casimirs = list(casimirs)
        self.db_metric = None if db_metric is None else as_rank2(db_metric, "symmetric")
        self.tol_H = tol_H
        self.tol_S = tol_S
        self.name = name
        if dim is None:
            dim = J(np.zeros(_probe_dim(J, R))).shape[0]
        self.dim = dim

    def rhs(self, mode="full"):
        """Unchecked vector field z -> z' for the inner loop of the integrator."""
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
        J, R, H, S = self.J, self.R, self.H, self.S

        def hamiltonian(z):
            return J.raw(z) @ H.grad(z)

        def dissipative(z):
            dH = H.grad(z)
            # G^{ik} dS_k = R^{ijkl} dH_j dS_k dH_l
            return ((R.raw(z) @ dH) @ S.grad(z)) @ dH

        if mode == "hamiltonian":
            return hamiltonian
        if mode == "dissipative":
            return dissipative
        if mode == "full":
            return lambda z: hamiltonian(z) + dissipative(z)
        if mode == "km":
            def km(z):
                dH = H.grad(z)
                K = (R.raw(z) @ dH) @ S.grad(z)
                return 0.5 * (K - K.T) @ dH
            return km
        if self.db_metric is None:
            raise ValueError("double_bracket mode needs a db_metric")
        g = self.db_metric

        def double_bracket(z):
            Jz = J.raw(z)
            return Jz @ (g @ (Jz @ H.grad(z)))
        return double_bracket

    def observables(self, z):
        return [self.H(z), self.S(z)] + [c(z) for c in self.casimirs]

    def series_names(self):
        return ["H", "S"] + [f"C{k + 1}" for k in range(len(self.casimirs))]


def _probe_dim(J, R):
    Rz = R.raw(None) if getattr(R, "constant", False) else None
    if Rz is None:
        raise DimensionError("dim must be given for a state-dependent R")
    return np.asarray(Rz).shape[0]


def vector_field(system, z, mode="full"):
    z = as_state(z)
    if z.shape != (system.dim,):
        raise DimensionError(f"state of size {z.size} for a {system.dim}-dimensional system")
    return np.asarray(system.rhs(mode)(np.array(z)), dtype=float)


class Trajectory:
    """Recorded run: times, state columns, scalar series and monitor flags."""

    def __init__(self, times, states, series, state_labels, mode, *, speed,
                 h_drift=None, s_violation=None, s_violation_count=0,
                 converged=None, flags=()):
        self.times = _frozen(times)
        self.states = _frozen(states)
        self.series = {k: _frozen(v) for k, v in series.items()}
        self.speed = _frozen(speed)
        self.state_labels = list(state_labels)
        self.mode = mode
        self.h_drift = h_drift
        self.s_violation = s_violation
        self.s_violation_count = s_violation_count
        self.converged = converged
        self.flags = tuple(flags)
        if len(self.times) != len(self.states):
            raise ValueError("times and states differ in length")

    @property
    def final_state(self):
        return np.array(self.states[-1])

    @property
    def H(self):
        return self.series.get("H")

    @property
    def S(self):
        return self.series.get("S")

    def casimir(self, k):
        return self.series[f"C{k + 1}"]

    def columns(self):
        return ["t", *self.state_labels, *self.series, "speed"]

    def write_csv(self, fh):
        fh.write(",".join(self.columns()) + "\n")
        series = list(self.series.values())
        for n in range(len(self.times)):
            row = [self.times[n], *self.states[n], *(s[n] for s in series), self.speed[n]]
            fh.write(",".join(format(float(v), ".17g") for v in row) + "\n")

    def to_csv(self, path=None):
        if path is None:
            buf = io.StringIO()
            self.write_csv(buf)
            return buf.getvalue()
        with open(path, "w", newline="\n", encoding="ascii") as fh:
            self.write_csv(fh)
        return path

    def summary(self):
        return {
            "mode": self.mode,
            "records": len(self.times),
            "t_final": float(self.times[-1]),
            "h_drift": self.h_drift,
            "s_violation": self.s_violation,
            "s_violation_count": self.s_violation_count,
            "final_speed": float(self.speed[-1]),
            "converged": self.converged,
            "flags": list(self.flags),
            "final_state": [float(v) for v in self.states[-1]],
        }


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _rk4_step(f, z, dt, k1):
    k2 = f(z + 0.5 * dt * k1)
    k3 = f(z + 0.5 * dt * k2)
    k4 = f(z + dt * k3)
    return z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _euler_step(f, z, dt, k1):
    return z + dt * k1


def march(f, z0, t_end, dt, method="rk4", observe=None, stop_speed=None, record_every=1):
    """Fixed-step marcher shared by ODE systems and field demos.

    Returns (times, states, observations, speeds, stopped). ``observe`` maps a
    state to a list of floats recorded alongside it; ``stop_speed`` ends the run
    once |f(z)| drops to that value. Non-finite values raise IntegrationError.
    """
    if not dt > 0 or not t_end > 0:
        raise ValueError("dt and t_end must be positive")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    step = _rk4_step if method == "rk4" else _euler_step
    observe = observe or (lambda z: [])
    nsteps = max(1, int(math.ceil(t_end / dt - 1e-9)))
    z = np.array(z0, dtype=float)
    times, states, obs, speeds = [], [], [], []
    stopped = False

    def record(n, z, k):
        times.append(n * dt)
        states.append(z.copy())
        obs.append(observe(z))
        speeds.append(float(np.linalg.norm(k)))

    def fail(message, n):
        partial = (np.array(times), np.array(states), obs, np.array(speeds), False)
        raise IntegrationError(f"{message} at t={n * dt:.6g}", states[-1].copy(), partial)

    k = f(z)
    n = 0
    while True:
        if not np.all(np.isfinite(k)):
            if not states:
                record(n, z, np.zeros_like(z))
            fail("non-finite vector field", n)
        slow = stop_speed is not None and np.linalg.norm(k) <= stop_speed
        if n % record_every == 0 or n == nsteps or slow:
            record(n, z, k)
        if slow:
            stopped = True
            break
        if n == nsteps:
            break
        z_new = step(f, z, dt, k)
        if not np.all(np.isfinite(z_new)):
            if times[-1] != n * dt:
                record(n, z, k)
            fail("non-finite state", n + 1)
        z = z_new
        k = f(z)
        n += 1
    return np.array(times), np.array(states), obs, np.array(speeds), stopped


def _monitors(system, mode, series):
    H = series["H"]
    S = series["S"]
    h_drift = float(np.max(np.abs(H - H[0]))) / max(1.0, abs(float(H[0])))
    dS = np.diff(S)
    worst = float(max(0.0, -np.min(dS))) if dS.size else 0.0
    count = int(np.sum(dS < -system.tol_S))
    flags = []
    if mode in ("full", "hamiltonian", "km") and h_drift > system.tol_H:
        flags.append("h_drift")
    if mode in ("full", "dissipative", "km") and count:
        flags.append("s_monotonicity")
    return h_drift, worst, count, flags


def _trajectory(system, mode, raw, converged=None):
    times, states, obs, speeds, _ = raw
    names = system.series_names()
    cols = np.array(obs, dtype=float).reshape(len(times), len(names))
    series = {name: cols[:, i] for i, name in enumerate(names)}
    h_drift, worst, count, flags = _monitors(system, mode, series)
    labels = [f"z{i + 1}" for i in range(system.dim)]
    return Trajectory(times, states, series, labels, mode, speed=speeds, h_drift=h_drift,
                      s_violation=worst, s_violation_count=count, converged=converged,
                      flags=flags)


def integrate(system, z0, t_end, dt, mode="full", method="rk4", record_every=1):
    z0 = as_state(z0)
    f = system.rhs(mode)
    try:
        raw = march(f, z0, t_end, dt, method, system.observables, record_every=record_every)
    except IntegrationError as exc:
        if exc.trajectory is not None and len(exc.trajectory[0]):
            exc.trajectory = _trajectory(system, mode, exc.trajectory)
        raise
    return _trajectory(system, mode, raw)


def relax_to_equilibrium(system, z0, mode="full", max_time=1000.0, stop_speed=1e-9,
                         dt=1e-3, method="rk4", record_every=1):
    """Integrate until |z'| <= stop_speed; warns and returns the partial run otherwise."""
    z0 = as_state(z0)
    f = system.rhs(mode)
    raw = march(f, z0, max_time, dt, method, system.observables, stop_speed=stop_speed,
                record_every=record_every)
    converged = raw[4]
    traj = _trajectory(system, mode, raw, converged=converged)
    if not converged:
        warnings.warn(f"no equilibrium within t={max_time} (|z'|={traj.speed[-1]:.3e})",
                      ConvergenceWarning, stacklevel=2)
    return traj.final_state, traj
