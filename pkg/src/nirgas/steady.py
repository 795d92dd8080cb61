"""Steady states of the nonlinear master equation.

Two independent routes:

* :func:`integrate_to_steady` marches ``d rho/dt`` forward in time with an
  adaptive embedded Radau IIA scheme until the rate of change vanishes.
* :func:`self_consistent_steady` exploits that the equations are linear once
  the local fields are frozen. It iterates on the two probe coherences
  (rho_43, rho_21) that source the Lorentz-Lorenz fields, solving the linear
  steady state exactly at every step.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import Radau

from . import atomsys
from .atomsys import NLEVELS, PROBE_SUPEROPS, liouvillian_rhs
from .errors import InvalidInputError, NumericalFailureError

log = logging.getLogger(__name__)

INTEGRATE, SCF = "integrate", "scf"
_METHOD_ALIASES = {
    "integrate": INTEGRATE,
    "time-integration": INTEGRATE,
    "scf": SCF,
    "self-consistent": SCF,
}
_TRACE_IDX = np.arange(NLEVELS) * (NLEVELS + 1)


@dataclass(frozen=True)
class SolverSettings:
    """Tolerances and limits shared by both steady-state solvers.

    ``accelerate`` selects the fixed-point update of the self-consistent
    solver: ``"newton"`` (default) or ``"damped"`` (plain relaxation with
    ``damping``).
    """

    method: str = SCF
    atol: float = 1e-10
    residual_tol: float = 1e-12
    t_max: float = 1e6
    max_iter: int = 500
    damping: float = 0.5
    accelerate: str = "newton"
    rtol: float = 1e-9

    def __post_init__(self):
        try:
            object.__setattr__(self, "method", _METHOD_ALIASES[self.method])
        except KeyError:
            raise InvalidInputError(f"unknown solver method {self.method!r}") from None
        if not (self.atol > 0 and self.residual_tol > 0 and self.rtol > 0):
            raise InvalidInputError("tolerances must be positive")
        if not self.t_max > 0:
            raise InvalidInputError("t_max must be positive")
        if self.max_iter < 1:
            raise InvalidInputError("max_iter must be at least 1")
        if not 0 < self.damping <= 1:
            raise InvalidInputError("damping must lie in (0, 1]")
        if self.accelerate not in ("newton", "damped"):
            raise InvalidInputError("accelerate must be 'newton' or 'damped'")


@dataclass
class SteadyResult:
    rho: np.ndarray
    converged: bool
    residual: float
    iterations: int
    method: str
    info: dict = field(default_factory=dict)


def residual_norm(rho, cfg):
    """Frobenius norm of the master-equation right-hand side (units of gamma)."""
    return float(np.linalg.norm(liouvillian_rhs(rho, cfg)))


def hermitize(rho):
    rho = 0.5 * (rho + np.swapaxes(rho.conj(), -1, -2))
    tr = np.trace(rho, axis1=-2, axis2=-1).real
    return rho / tr[..., None, None]


# ---------------------------------------------------------------------------
# linear steady state


def _with_trace_row(sup):
    a = np.array(sup, dtype=complex, copy=True)
    a[..., 0, :] = 0.0
    a[..., 0, _TRACE_IDX] = 1.0
    return a


def linear_steady_state(sup):
    """Null vector of a (batch of) 25x25 Liouvillian(s), normalised to unit trace.

    The population equation of level 1 is replaced by the trace condition.
    """
    a = _with_trace_row(sup)
    b = np.zeros(a.shape[:-1], dtype=complex)
    b[..., 0] = 1.0
    try:
        x = np.linalg.solve(a, b[..., None])[..., 0]
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(
            "singular steady-state system (degenerate null space)",
            {"error": str(exc)},
        ) from exc
    if not np.all(np.isfinite(x)):
        raise NumericalFailureError("steady-state solve produced non-finite values")
    return x.reshape(a.shape[:-2] + (NLEVELS, NLEVELS))


# ---------------------------------------------------------------------------
# self-consistent (frozen local field) iteration


class _FrozenFieldProblem:
    """Batch of linear problems parameterised by the probe coherences.

    ``c[:, 0]`` is rho_43 and ``c[:, 1]`` is rho_21. The local probe Rabi
    frequencies are ``ext + g * c``.
    """

    def __init__(self, static_sups, ext, g):
        self.ext = np.asarray(ext, dtype=complex)
        self.static = np.broadcast_to(
            _with_trace_row(static_sups), (self.ext.shape[0],) + np.shape(static_sups)[-2:]
        )
        self.g = np.asarray(g, dtype=float)
        s = {k: v.copy() for k, v in PROBE_SUPEROPS.items()}
        for v in s.values():
            v[0, :] = 0.0
        self.s = s
        # real directions d(A)/d(Re c_e), d(Im c_e), d(Re c_b), d(Im c_b)
        self.dirs = [
            self.g[0] * (s["43"] + s["34"]),
            self.g[0] * 1j * (s["43"] - s["34"]),
            self.g[1] * (s["21"] + s["12"]),
            self.g[1] * 1j * (s["21"] - s["12"]),
        ]

    def matrices(self, c, idx):
        rabi = self.ext[idx] + self.g * c
        re, rb = rabi[:, 0, None, None], rabi[:, 1, None, None]
        return (
            self.static[idx]
            + re * self.s["43"]
            + np.conj(re) * self.s["34"]
            + rb * self.s["21"]
            + np.conj(rb) * self.s["12"]
        )

    def solve(self, c, idx, jacobian=False):
        a = self.matrices(c, idx)
        b = np.zeros(a.shape[:-1], dtype=complex)
        b[:, 0] = 1.0
        try:
            x = np.linalg.solve(a, b[..., None])[..., 0]
        except np.linalg.LinAlgError as exc:
            raise NumericalFailureError(
                "singular steady-state system (degenerate null space)", {"error": str(exc)}
            ) from exc
        if not np.all(np.isfinite(x)):
            raise NumericalFailureError("steady-state solve produced non-finite values")
        if not jacobian:
            return x, None
        rhs = np.stack([-(d @ x.T).T for d in self.dirs], axis=-1)
        dx = np.linalg.solve(a, rhs)
        return x, dx

    @staticmethod
    def coherences(x):
        return np.stack([x[..., 17], x[..., 5]], axis=-1)


def _newton_step(c, f, dx):
    # unknowns u = (Re c_e, Im c_e, Re c_b, Im c_b); residual G = coh(u) - c
    dcoh = np.stack([dx[:, 17, :], dx[:, 5, :]], axis=1)  # (B, 2, 4) complex
    jac = np.empty((c.shape[0], 4, 4))
    jac[:, 0::2, :] = dcoh.real
    jac[:, 1::2, :] = dcoh.imag
    jac -= np.eye(4)
    res = np.empty((c.shape[0], 4))
    res[:, 0::2] = f.real
    res[:, 1::2] = f.imag
    du = np.linalg.solve(jac, -res[..., None])[..., 0]
    return c + du[:, 0::2] + 1j * du[:, 1::2]


def scf_batch(static_sups, ext, g, c0, settings):
    """Solve a batch of self-consistent steady states.

    Parameters
    ----------
    static_sups : ndarray, shape (B, 25, 25)
        Liouvillians without probe couplings.
    ext : ndarray, shape (B, 2)
        External probe Rabi frequencies (electric, magnetic).
    g : sequence of 2 floats
        Lorentz-Lorenz couplings (g_E, g_B).
    c0 : ndarray, shape (B, 2)
        Initial coherences (rho_43, rho_21).

    Returns
    -------
    rho : ndarray (B, 5, 5)
    converged : bool ndarray (B,)
    iterations : int
    mismatch : ndarray (B,)
    """
    prob = _FrozenFieldProblem(static_sups, ext, g)
    c = np.array(c0, dtype=complex)
    nb = c.shape[0]
    done = np.zeros(nb, dtype=bool)
    mismatch = np.full(nb, np.inf)
    x_out = np.zeros((nb, NLEVELS * NLEVELS), dtype=complex)
    newton = settings.accelerate == "newton"
    # Newton lands quadratically close after the polish solve; plain
    # relaxation needs the mismatch small enough that g * mismatch meets eta
    tol = settings.atol if newton else min(settings.atol, settings.residual_tol / max(max(g), 1.0))
    it = 0
    for it in range(1, settings.max_iter + 1):
        act = ~done
        idx = np.flatnonzero(act)
        x, dx = prob.solve(c[act], act, jacobian=newton)
        f = np.where(prob.g > 0, _FrozenFieldProblem.coherences(x) - c[act], 0.0)
        mis = np.max(np.abs(f), axis=1)
        x_out[act] = x
        mismatch[act] = mis
        if newton:
            c[act] = _newton_step(c[act], f, dx)
        else:
            c[act] = c[act] + settings.damping * f
        if not np.all(np.isfinite(c)):
            raise NumericalFailureError("self-consistent iteration diverged", {"iteration": it})
        ok = mis < tol
        if ok.any():
            # polish: one more solve at the updated coherences
            pol = np.zeros(nb, dtype=bool)
            pol[idx[ok]] = True
            x_out[pol] = prob.solve(c[pol], pol)[0]
            done |= pol
        if done.all():
            break
    rho = hermitize(x_out.reshape(nb, NLEVELS, NLEVELS))
    return rho, done, it, mismatch


def batch_residuals(static_sups, ext, g, rho):
    """Frobenius norms of the nonlinear right-hand side for a batch of states."""
    vec = rho.reshape(rho.shape[0], -1)
    rabi = np.asarray(ext) + np.asarray(g) * np.stack([vec[:, 17], vec[:, 5]], axis=-1)
    re, rb = rabi[:, 0, None], rabi[:, 1, None]
    s = PROBE_SUPEROPS
    out = np.einsum("bij,bj->bi", np.broadcast_to(static_sups, (vec.shape[0],) + s["43"].shape), vec)
    out += re * (vec @ s["43"].T) + np.conj(re) * (vec @ s["34"].T)
    out += rb * (vec @ s["21"].T) + np.conj(rb) * (vec @ s["12"].T)
    return np.linalg.norm(out, axis=1)


def self_consistent_steady(rho0, cfg, settings=None):
    """Fixed point of (freeze local fields -> linear steady state -> new fields)."""
    settings = settings or SolverSettings(method=SCF)
    rho0 = atomsys.check_density_matrix(rho0)
    m = cfg.medium
    ext = np.array([[cfg.w_e, cfg.drive.polarization_factor * cfg.w_b]])
    c0 = np.array([[rho0[3, 2], rho0[1, 0]]])
    rho, conv, iters, mis = scf_batch(
        atomsys.static_superop(cfg)[None], ext, (m.g_e, m.g_b), c0, settings
    )
    rho = rho[0]
    res = residual_norm(rho, cfg)
    converged = bool(conv[0]) and res < settings.residual_tol
    return SteadyResult(
        rho=rho,
        converged=converged,
        residual=res,
        iterations=iters,
        method=SCF,
        info={"field_mismatch": float(mis[0])},
    )


# ---------------------------------------------------------------------------
# time integration


def _pack(rho):
    v = rho.ravel()
    return np.concatenate([v.real, v.imag])


def _unpack(y):
    n = NLEVELS * NLEVELS
    return (y[:n] + 1j * y[n:]).reshape(NLEVELS, NLEVELS)


def integrate_to_steady(rho0, cfg, settings=None):
    """Integrate the nonlinear master equation until ``||d rho/dt||_F < residual_tol``.

    Uses scipy's Radau IIA (order 5, embedded error estimate); the fast
    4-5 Rabi oscillation makes explicit schemes impractical over the slow
    metastable relaxation times.
    """
    settings = settings or SolverSettings(method=INTEGRATE)
    rho0 = atomsys.check_density_matrix(rho0)
    atomsys.static_hamiltonian(cfg)  # frame check

    def fun(t, y):
        return _pack(liouvillian_rhs(_unpack(y), cfg))

    def jac(t, y):
        # rhs is quadratic in y, so central differences with unit step are exact
        n = y.size
        cols = np.empty((n, n))
        for k in range(n):
            e = np.zeros(n)
            e[k] = 1.0
            cols[:, k] = 0.5 * (fun(t, y + e) - fun(t, y - e))
        return cols

    res = residual_norm(rho0, cfg)
    if res < settings.residual_tol:
        return SteadyResult(rho0.copy(), True, res, 0, INTEGRATE, {"t": 0.0})

    solver = Radau(
        fun,
        0.0,
        _pack(rho0),
        t_bound=settings.t_max,
        rtol=settings.rtol,
        atol=settings.atol,
        jac=jac,
        first_step=min(1e-3, 0.1 / max(cfg.omega54, 1.0)),
    )
    steps = 0
    rho = rho0
    while solver.status == "running":
        msg = solver.step()
        if solver.status == "failed":
            raise NumericalFailureError(f"integrator failed: {msg}", {"t": solver.t})
        steps += 1
        rho = _unpack(solver.y)
        drift = abs(np.trace(rho) - 1.0)
        if drift > 1e-8:
            raise NumericalFailureError(
                "trace drift during integration", {"t": solver.t, "drift": drift}
            )
        res = residual_norm(rho, cfg)
        if res < settings.residual_tol:
            break
    rho = hermitize(rho)
    res = residual_norm(rho, cfg)
    converged = res < settings.residual_tol
    if not converged:
        log.warning("integration reached t_max=%g without converging (residual %.3g)", settings.t_max, res)
    return SteadyResult(rho, converged, res, steps, INTEGRATE, {"t": float(solver.t)})


def steady_state(cfg, settings=None, rho0=None):
    """Dispatch to the solver named in ``settings.method``."""
    settings = settings or SolverSettings()
    rho0 = atomsys.ground_state() if rho0 is None else rho0
    if settings.method == INTEGRATE:
        return integrate_to_steady(rho0, cfg, settings)
    return self_consistent_steady(rho0, cfg, settings)


def uniqueness_gap(cfg, settings=None):
    """Max entrywise difference of steady states started from |1><1| and from
    the maximally mixed state. Large values signal multistability."""
    a = steady_state(cfg, settings, atomsys.ground_state())
    b = steady_state(cfg, settings, atomsys.maximally_mixed())
    return float(np.max(np.abs(a.rho - b.rho)))
