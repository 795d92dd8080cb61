"""Linear response coefficients from steady-state probe coherences.

For each electric amplitude on the probe grid the steady state is solved at
fixed magnetic amplitude. The polarization ``P = 2 N d34 rho_43`` and the
magnetization ``M = 2 N mu12 rho_21`` are affine in ``w_E``: the slopes give
the responses to the electric field and the intercepts the responses to the
fixed magnetic field.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import atomsys
from .errors import GridPointError, InvalidInputError
from .steady import INTEGRATE, SolverSettings, batch_residuals, integrate_to_steady, scf_batch

R2_LINEAR_MIN = 0.999


@dataclass(frozen=True)
class RegressionFit:
    slope: complex
    intercept: complex
    r2: float
    residual: float


@dataclass(frozen=True)
class ResponseCoefficients:
    """Susceptibilities and chirality coefficients at one operating point.

    ``eps`` and ``mu`` are always ``1 + 4 pi chi``.
    """

    chi_ee: complex
    chi_hh: complex
    xi_eh: complex
    xi_he: complex
    r2_e: float = 1.0
    r2_m: float = 1.0
    n_phases: int = 1
    converged: bool = True
    spread: dict = field(default_factory=dict, compare=False)

    @property
    def eps(self):
        return 1 + 4 * np.pi * self.chi_ee

    @property
    def mu(self):
        return 1 + 4 * np.pi * self.chi_hh

    @property
    def nonlinear(self):
        """True when a fit fails the linear-regime guard (power broadening)."""
        return min(self.r2_e, self.r2_m) < R2_LINEAR_MIN

    def as_array(self):
        return np.array([self.chi_ee, self.chi_hh, self.xi_eh, self.xi_he])


def _r2(y, yhat):
    ss_res = float(np.sum((y - yhat) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    # constant data: judge the fit against round-off of the data scale
    floor = 1e-24 * float(np.sum(y**2))
    if ss_tot <= floor:
        return 1.0 if ss_res <= floor else 0.0
    return max(0.0, 1.0 - ss_res / ss_tot)


def regress_linear(points):
    """Least-squares line ``y = m x + b`` through ``(x, y)`` pairs with complex y.

    Real and imaginary parts are fitted independently (the design matrix is
    real), so this is the exact complex least-squares solution. R^2 is the
    smaller of the two parts' values.
    """
    pts = list(points)
    if len(pts) < 3:
        raise InvalidInputError("linear regression needs at least 3 points")
    x = np.array([p[0] for p in pts], dtype=float)
    y = np.array([p[1] for p in pts], dtype=complex)
    if np.ptp(x) == 0:
        raise InvalidInputError("regression abscissae are all equal")
    design = np.column_stack([x, np.ones_like(x)])
    coef = np.linalg.lstsq(design, np.column_stack([y.real, y.imag]), rcond=None)[0]
    m = coef[0, 0] + 1j * coef[0, 1]
    b = coef[1, 0] + 1j * coef[1, 1]
    yhat = m * x + b
    r2 = min(_r2(y.real, yhat.real), _r2(y.imag, yhat.imag))
    return RegressionFit(complex(m), complex(b), r2, float(np.linalg.norm(y - yhat)))


def response_from_fits(fit_p, fit_m, medium, probe, polarization=atomsys.SIGMA_MINUS):
    """Invert the fitted P(w_E) and M(w_E) lines into response coefficients.

    P and M are in Gaussian units; ``polarization`` fixes ``B_b = +/- i E_b``.
    """
    if not probe.w_b > 0:
        raise InvalidInputError("w_b must be positive")
    hg = medium.hbar_gamma
    s = 1j if polarization == atomsys.SIGMA_MINUS else -1j
    d, mu = medium.d43, medium.mu21
    return ResponseCoefficients(
        chi_ee=complex(d * fit_p.slope / hg),
        chi_hh=complex(mu * fit_m.intercept / (hg * probe.w_b * s)),
        xi_eh=complex(4 * np.pi * mu * fit_p.intercept / (hg * probe.w_b * s)),
        xi_he=complex(4 * np.pi * d * fit_m.slope / hg),
        r2_e=fit_p.r2,
        r2_m=fit_m.r2,
    )


def polarization_and_magnetization(rho43, rho21, medium):
    """Complex amplitudes ``P = 2 N d34 rho_43`` and ``M = 2 N mu12 rho_21``."""
    n = medium.density
    return 2 * n * medium.d43 * np.asarray(rho43), 2 * n * medium.mu21 * np.asarray(rho21)


def _solve_grid(cfg, phases, settings):
    """Steady coherences on the (phase x w_E) grid.

    Returns ``rho43, rho21`` of shape (K, W) and a convergence mask.
    """
    w_e = np.asarray(cfg.probe.w_e)
    w_b = cfg.probe.w_b
    phases = np.asarray(phases, dtype=float)
    k, w = phases.size, w_e.size
    if settings.method == INTEGRATE:
        r43 = np.zeros((k, w), dtype=complex)
        r21 = np.zeros((k, w), dtype=complex)
        ok = np.zeros((k, w), dtype=bool)
        for i, phi in enumerate(phases):
            for j, we in enumerate(w_e):
                res = integrate_to_steady(
                    atomsys.ground_state(), cfg.replace(phase=phi, w_e=we, w_b=w_b), settings
                )
                r43[i, j], r21[i, j], ok[i, j] = res.rho[3, 2], res.rho[1, 0], res.converged
        return r43, r21, ok
    statics = np.stack([atomsys.static_superop(cfg.replace(phase=phi)) for phi in phases])
    statics = np.repeat(statics, w, axis=0)
    ext = np.column_stack(
        [np.tile(w_e, k), np.full(k * w, cfg.drive.polarization_factor * w_b)]
    )
    g = (cfg.medium.g_e, cfg.medium.g_b)
    rho, conv, _, _ = scf_batch(statics, ext, g, np.zeros((k * w, 2)), settings)
    conv &= batch_residuals(statics, ext, g, rho) < settings.residual_tol
    r43 = rho[:, 3, 2].reshape(k, w)
    r21 = rho[:, 1, 0].reshape(k, w)
    return r43, r21, conv.reshape(k, w)


def extract_coherences(cfg, phase=0.0, settings=None):
    """Steady coherences ``(w_E, rho_21, rho_43)`` over the probe grid at one loop phase."""
    settings = settings or SolverSettings()
    r43, r21, ok = _solve_grid(cfg, [phase], settings)
    w_e = cfg.probe.w_e
    if not ok.all():
        bad = w_e[int(np.flatnonzero(~ok[0])[0])]
        raise GridPointError(f"steady state did not converge at w_E={bad:g}", w_e=bad, phase=phase)
    return [(w, r21[0, j], r43[0, j]) for j, w in enumerate(w_e)]


def _coefficients_from_grid(w_e, r43, r21, cfg):
    p, m = polarization_and_magnetization(r43, r21, cfg.medium)
    fit_p = regress_linear(zip(w_e, p))
    fit_m = regress_linear(zip(w_e, m))
    return response_from_fits(fit_p, fit_m, cfg.medium, cfg.probe, cfg.drive.polarization)


def response_at_phase(cfg, phase=0.0, settings=None):
    """Response coefficients from a single extraction at loop phase ``phase``."""
    rows = extract_coherences(cfg, phase, settings)
    w_e = [r[0] for r in rows]
    return _coefficients_from_grid(w_e, [r[2] for r in rows], [r[1] for r in rows], cfg)


def phase_grid(k):
    return 2 * np.pi * np.arange(k) / k


def phase_averaged_response(cfg, k=16, settings=None, offset=0.0):
    """Average the response over ``k`` equally spaced loop phases.

    Each complex coefficient is averaged arithmetically; ``eps`` and ``mu``
    follow from the averaged susceptibilities. ``spread`` records, for each
    coefficient, the largest deviation of a single-phase value from the
    mean, plus the largest single-phase chirality magnitude.
    """
    if k < 1:
        raise InvalidInputError("phase-sample count must be at least 1")
    settings = settings or SolverSettings()
    phases = phase_grid(k) + offset
    w_e = np.asarray(cfg.probe.w_e)
    r43, r21, ok = _solve_grid(cfg, phases, settings)
    if not ok.all():
        i, j = np.argwhere(~ok)[0]
        raise GridPointError(
            f"steady state did not converge at w_E={w_e[j]:g}, phase={phases[i]:.6g}",
            w_e=float(w_e[j]),
            phase=float(phases[i]),
        )
    per_phase = [_coefficients_from_grid(w_e, r43[i], r21[i], cfg) for i in range(k)]
    arr = np.array([c.as_array() for c in per_phase])
    mean = arr.mean(axis=0)
    dev = np.abs(arr - mean).max(axis=0)
    eps_k = 1 + 4 * np.pi * arr[:, 0]
    spread = {
        "chi_ee": float(dev[0]),
        "chi_hh": float(dev[1]),
        "xi_eh": float(dev[2]),
        "xi_he": float(dev[3]),
        "eps_rel": float(np.max(np.abs(eps_k - eps_k.mean())) / max(abs(eps_k.mean()), 1e-300)),
        "xi_eh_max": float(np.abs(arr[:, 2]).max()),
        "xi_he_max": float(np.abs(arr[:, 3]).max()),
    }
    return ResponseCoefficients(
        chi_ee=complex(mean[0]),
        chi_hh=complex(mean[1]),
        xi_eh=complex(mean[2]),
        xi_he=complex(mean[3]),
        r2_e=min(c.r2_e for c in per_phase),
        r2_m=min(c.r2_m for c in per_phase),
        n_phases=k,
        converged=True,
        spread=spread,
    )
