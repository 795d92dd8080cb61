"""Five-level atom: configuration types and the nonlinear master equation.

Levels are labelled 1..5 in names and docstrings and indexed 0..4 in arrays.
Rates, detunings and Rabi frequencies are dimensionless, in units of the
decay scale ``gamma`` (angular). Only :func:`dipole_from_decay`,
:func:`local_fields` and the coupling constants of :class:`MediumConfig`
touch absolute Gaussian-CGS units.

The density matrix is a plain ``(5, 5)`` complex ndarray holding the slowly
varying (rotating-frame) elements.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from scipy import constants as _sc

from .errors import InvalidInputError, UnsupportedConfigurationError

HBAR = _sc.hbar * 1e7  # erg s
C_LIGHT = _sc.c * 1e2  # cm / s
ALPHA = 1.0 / 137.0

NLEVELS = 5
E1, M1, E2, NONE = "E1", "M1", "E2", "none"
SIGMA_MINUS, SIGMA_PLUS = "sigma-", "sigma+"

# (lower, upper, class, vacuum wavelength in um)
DEFAULT_TRANSITIONS = (
    (1, 2, M1, 5.4),
    (3, 4, E1, 5.4),
    (1, 3, E1, 0.704),
    (2, 4, E1, 0.352),
    (4, 5, E1, 1.05),
)

# decay channels (from, to) switched on by default; rates follow the class rule
DEFAULT_DECAY_CHANNELS = ((3, 1), (4, 2), (4, 3), (5, 4), (2, 1))

DEFAULT_GAP = 2 * np.pi * 1e4


def dipole_from_decay(gamma, omega):
    """Transition dipole (esu cm) from a spontaneous decay rate.

    Parameters
    ----------
    gamma : float
        Decay rate in rad/s.
    omega : float
        Transition angular frequency in rad/s.
    """
    if not omega > 0:
        raise InvalidInputError(f"transition frequency must be positive, got {omega!r}")
    if gamma < 0:
        raise InvalidInputError(f"decay rate must be non-negative, got {gamma!r}")
    return np.sqrt(3.0 * gamma * HBAR * C_LIGHT**3 / (4.0 * omega**3))


def angular_frequency(wavelength_um):
    return 2 * np.pi * C_LIGHT / (wavelength_um * 1e-4)


@dataclass(frozen=True)
class LevelScheme:
    """Transition graph and the M1/E1 probe gap ``gap`` (units of gamma)."""

    gap: float = DEFAULT_GAP
    transitions: Tuple[Tuple[int, int, str, float], ...] = DEFAULT_TRANSITIONS
    count: int = NLEVELS

    def __post_init__(self):
        if self.count != NLEVELS:
            raise InvalidInputError("only five-level schemes are supported")
        if not self.gap > 0:
            raise InvalidInputError("gap must be positive")
        required = {(1, 2): M1, (3, 4): E1, (1, 3): E1, (2, 4): E1, (4, 5): E1}
        got = {}
        for lo, hi, cls, lam in self.transitions:
            if cls not in (E1, M1, E2, NONE):
                raise InvalidInputError(f"unknown transition class {cls!r}")
            if not lam > 0:
                raise InvalidInputError(f"wavelength of {lo}-{hi} must be positive")
            got[tuple(sorted((lo, hi)))] = cls
        for pair, cls in required.items():
            if got.get(pair) != cls:
                raise InvalidInputError(f"transition {pair} must be class {cls}")

    def transition_class(self, i, j):
        key = tuple(sorted((i, j)))
        for lo, hi, cls, _ in self.transitions:
            if tuple(sorted((lo, hi))) == key:
                return cls
        return NONE


@dataclass(frozen=True)
class DriveConfig:
    """Coherent drives and detunings, all in units of gamma.

    ``effective_gap`` fixes the strong 4-5 drive through
    ``omega54 = 2 * (gap + effective_gap)``. ``phase`` is the loop phase put
    on ``omega31``. ``coupling_offset`` is ``omega_c - omega_a``; only zero
    is supported.
    """

    omega31: complex = 6.3e-3
    omega42: complex = 5.6
    effective_gap: float = 560.0
    delta31: float = -1e-2
    delta54: float = 0.0
    delta21: float = 0.0
    phase: float = 0.0
    polarization: str = SIGMA_MINUS
    coupling_offset: float = 0.0

    def __post_init__(self):
        if self.polarization not in (SIGMA_MINUS, SIGMA_PLUS):
            raise InvalidInputError(f"polarization must be {SIGMA_MINUS!r} or {SIGMA_PLUS!r}")

    @property
    def polarization_factor(self):
        """``B_b / |E_b|`` phase: +i for sigma-, -i for sigma+."""
        return 1j if self.polarization == SIGMA_MINUS else -1j


@dataclass(frozen=True)
class DecayNetwork:
    """Population decay rates ``rates[j-1][k-1]`` for j -> k, plus dephasing and pump.

    The pump ``pump`` is added to both the 3 -> 4 and 4 -> 3 channels.
    """

    rates: Tuple[Tuple[float, ...], ...]
    gamma_c: float = 1.0
    pump: float = 0.0

    def __post_init__(self):
        m = np.asarray(self.rates, dtype=float)
        if m.shape != (NLEVELS, NLEVELS):
            raise InvalidInputError("decay matrix must be 5x5")
        if np.any(m < 0) or not np.all(np.isfinite(m)):
            raise InvalidInputError("decay rates must be finite and non-negative")
        if np.any(np.diag(m) != 0):
            raise InvalidInputError("self-decay rates gamma_jj must be zero")
        if self.gamma_c < 0:
            raise InvalidInputError("gamma_c must be non-negative")
        if self.pump < 0:
            raise InvalidInputError("pump rate must be non-negative")
        object.__setattr__(self, "rates", tuple(tuple(float(v) for v in row) for row in m))

    @classmethod
    def from_levels(cls, levels=None, channels=DEFAULT_DECAY_CHANNELS, gamma_c=1.0, pump=0.0):
        """Build rates from the class rule: gamma for E1, alpha**2 gamma for M1/E2."""
        levels = levels or LevelScheme()
        m = np.zeros((NLEVELS, NLEVELS))
        for j, k in channels:
            kind = levels.transition_class(j, k)
            m[j - 1, k - 1] = 1.0 if kind == E1 else ALPHA**2
        return cls(rates=m, gamma_c=gamma_c, pump=pump)

    def matrix(self):
        """Effective j -> k rate matrix with the pump inserted."""
        m = np.array(self.rates, dtype=float)
        m[2, 3] += self.pump
        m[3, 2] += self.pump
        return m

    def dephasing(self):
        """Off-diagonal decoherence rates; the diagonal holds total outflow."""
        m = self.matrix()
        out = m.sum(axis=1)
        g = 0.5 * (out[:, None] + out[None, :]) + self.gamma_c
        np.fill_diagonal(g, out)
        return g


@dataclass(frozen=True)
class MediumConfig:
    """Atomic density (cm^-3), probe wavelength (um) and absolute rate scale (rad/s)."""

    density: float = 2.5e17
    wavelength_um: float = 5.0
    gamma_abs: float = 1e7

    def __post_init__(self):
        if not self.density >= 0:
            raise InvalidInputError("density N must be non-negative")
        if not self.wavelength_um > 0:
            raise InvalidInputError("probe wavelength must be positive")
        if not self.gamma_abs > 0:
            raise InvalidInputError("gamma_abs must be positive")

    @property
    def omega_probe(self):
        return angular_frequency(self.wavelength_um)

    @property
    def d43(self):
        return dipole_from_decay(self.gamma_abs, self.omega_probe)

    @property
    def mu21(self):
        return dipole_from_decay(ALPHA**2 * self.gamma_abs, self.omega_probe)

    @property
    def hbar_gamma(self):
        return HBAR * self.gamma_abs

    @property
    def g_e(self):
        return 8 * np.pi / 3 * self.density * self.d43**2 / self.hbar_gamma

    @property
    def g_b(self):
        return 8 * np.pi / 3 * self.density * self.mu21**2 / self.hbar_gamma


def _default_we_grid():
    return tuple(np.linspace(1e-4, 2e-3, 20).tolist())


@dataclass(frozen=True)
class ProbeConfig:
    """Electric expansion-parameter grid and the fixed magnetic parameter."""

    w_e: Tuple[float, ...] = field(default_factory=_default_we_grid)
    w_b: float = 1e-4

    def __post_init__(self):
        w = np.asarray(self.w_e, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise InvalidInputError("w_e grid must be a non-empty sequence")
        if np.any(w <= 0) or np.any(np.diff(w) <= 0):
            raise InvalidInputError("w_e grid must be positive and strictly increasing")
        if not self.w_b > 0:
            raise InvalidInputError("w_b must be positive")
        object.__setattr__(self, "w_e", tuple(float(v) for v in w))


@dataclass(frozen=True)
class SystemConfig:
    """Everything needed to write down the master equation at one operating point.

    ``w_e`` and ``w_b`` are the probe amplitudes applied in this particular
    solve; ``probe`` holds the grid used for response extraction.
    """

    levels: LevelScheme = field(default_factory=LevelScheme)
    drive: DriveConfig = field(default_factory=DriveConfig)
    decay: DecayNetwork = field(default_factory=DecayNetwork.from_levels)
    medium: MediumConfig = field(default_factory=MediumConfig)
    probe: ProbeConfig = field(default_factory=ProbeConfig)
    w_e: float = 0.0
    w_b: float = 0.0

    @property
    def omega54(self):
        return 2.0 * (self.levels.gap + self.drive.effective_gap)

    def replace(self, **changes):
        """Copy with top-level fields or drive/decay fields replaced.

        Drive fields (``delta21``, ``phase`` ...) and ``pump``/``gamma_c``
        may be passed directly.
        """
        drive_keys = {f.name for f in dataclasses.fields(DriveConfig)}
        decay_keys = {"pump", "gamma_c"}
        drive_kw = {k: changes.pop(k) for k in list(changes) if k in drive_keys}
        decay_kw = {k: changes.pop(k) for k in list(changes) if k in decay_keys}
        cfg = dataclasses.replace(self, **changes) if changes else self
        if drive_kw:
            cfg = dataclasses.replace(cfg, drive=dataclasses.replace(cfg.drive, **drive_kw))
        if decay_kw:
            cfg = dataclasses.replace(cfg, decay=dataclasses.replace(cfg.decay, **decay_kw))
        return cfg

    def probe_fields(self):
        """External probe amplitudes ``(E_b, B_b)`` in Gaussian units."""
        hg = self.medium.hbar_gamma
        e_b = self.w_e * hg / self.medium.d43
        b_b = self.drive.polarization_factor * self.w_b * hg / self.medium.mu21
        return e_b, b_b


# ---------------------------------------------------------------------------
# density matrices


def ground_state(level=1):
    rho = np.zeros((NLEVELS, NLEVELS), dtype=complex)
    rho[level - 1, level - 1] = 1.0
    return rho


def maximally_mixed():
    return np.eye(NLEVELS, dtype=complex) / NLEVELS


def check_density_matrix(rho, herm_tol=1e-12, trace_tol=1e-10, positivity_tol=None):
    """Raise InvalidInputError unless ``rho`` is a valid 5x5 density matrix."""
    rho = np.asarray(rho)
    if rho.shape != (NLEVELS, NLEVELS):
        raise InvalidInputError(f"density matrix must be 5x5, got {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise InvalidInputError("density matrix has non-finite entries")
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        raise InvalidInputError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > trace_tol:
        raise InvalidInputError("density matrix trace differs from 1")
    if positivity_tol is not None:
        if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -positivity_tol:
            raise InvalidInputError("density matrix has negative eigenvalues")
    return rho


# ---------------------------------------------------------------------------
# Hamiltonian and Liouvillian


def local_fields(rho, medium, probe):
    """Lorentz-Lorenz local fields from the external probe and the coherences.

    Parameters
    ----------
    rho : ndarray
        Rotating-frame density matrix.
    medium : MediumConfig
    probe : tuple of complex
        External amplitudes ``(E_b, B_b)`` in Gaussian units.

    Returns
    -------
    (E_L, B_L) : tuple of complex
    """
    e_b, b_b = probe
    n = medium.density
    pol = 2 * n * medium.d43 * rho[3, 2]
    mag = 2 * n * medium.mu21 * rho[1, 0]
    return e_b + 4 * np.pi / 3 * pol, b_b + 4 * np.pi / 3 * mag


def frame_diagonal(cfg):
    """Rotating-frame level energies (units of hbar gamma), level 1 at zero."""
    d = cfg.drive
    h4 = d.delta31 + d.delta21 + cfg.levels.gap
    return np.array([0.0, d.delta21, d.delta31, h4, h4 + d.delta54])


def _check_frame(cfg):
    if cfg.drive.coupling_offset != 0:
        raise UnsupportedConfigurationError(
            "only equal coupling frequencies omega_a == omega_c give a stationary frame"
        )


def static_hamiltonian(cfg):
    """Rotating-frame Hamiltonian without the probe couplings."""
    _check_frame(cfg)
    d = cfg.drive
    h = np.diag(frame_diagonal(cfg)).astype(complex)
    for (i, j), rabi in (
        ((2, 0), d.omega31 * np.exp(1j * d.phase)),
        ((3, 1), d.omega42),
        ((4, 3), cfg.omega54),
    ):
        h[i, j] -= 0.5 * rabi
        h[j, i] -= 0.5 * np.conj(rabi)
    return h


def local_rabi(rho, cfg):
    """Probe Rabi frequencies ``(d43 E_L, mu21 B_L) / (hbar gamma)``."""
    m = cfg.medium
    ext_e = cfg.w_e
    ext_b = cfg.drive.polarization_factor * cfg.w_b
    return ext_e + m.g_e * rho[3, 2], ext_b + m.g_b * rho[1, 0]


def probe_hamiltonian(rabi_e, rabi_b):
    h = np.zeros((NLEVELS, NLEVELS), dtype=complex)
    h[3, 2] = -0.5 * rabi_e
    h[2, 3] = -0.5 * np.conj(rabi_e)
    h[1, 0] = -0.5 * rabi_b
    h[0, 1] = -0.5 * np.conj(rabi_b)
    return h


def rotating_frame_generator(rho, cfg):
    """Stationary rotating-frame Hamiltonian (units of hbar gamma).

    The probe couplings use the local fields built from ``rho``, which makes
    the master equation nonlinear whenever the density is nonzero.
    """
    return static_hamiltonian(cfg) + probe_hamiltonian(*local_rabi(rho, cfg))


def dissipator(rho, decay):
    """Decay and dephasing part of the master equation."""
    g = decay.matrix()
    out = -decay.dephasing() * rho
    out[np.diag_indices(NLEVELS)] += g.T @ np.real(np.diag(rho))
    return out


def liouvillian_rhs(rho, cfg):
    """``d rho / dt`` in units of gamma for the nonlinear master equation."""
    h = rotating_frame_generator(rho, cfg)
    return -1j * (h @ rho - rho @ h) + dissipator(rho, cfg.decay)


# ---------------------------------------------------------------------------
# superoperators (row-major vec: vec(rho)[5 i + j] = rho[i, j])

_I5 = np.eye(NLEVELS)


def commutator_superop(h):
    """Matrix of ``rho -> -i [h, rho]`` acting on row-major vec(rho)."""
    return -1j * (np.kron(h, _I5) - np.kron(_I5, h.T))


def dissipator_superop(decay):
    g = decay.matrix()
    sup = np.diag(-decay.dephasing().ravel()).astype(complex)
    diag = np.arange(NLEVELS) * (NLEVELS + 1)
    sup[np.ix_(diag, diag)] += g.T
    return sup


def static_superop(cfg):
    """Liouvillian with the probe couplings removed."""
    return commutator_superop(static_hamiltonian(cfg)) + dissipator_superop(cfg.decay)


def _unit(i, j):
    m = np.zeros((NLEVELS, NLEVELS), dtype=complex)
    m[i, j] = 1.0
    return m


# L(rabi_e, rabi_b) = L_static + rabi_e S43 + conj(rabi_e) S34 + rabi_b S21 + conj(rabi_b) S12
PROBE_SUPEROPS = {
    "43": commutator_superop(-0.5 * _unit(3, 2)),
    "34": commutator_superop(-0.5 * _unit(2, 3)),
    "21": commutator_superop(-0.5 * _unit(1, 0)),
    "12": commutator_superop(-0.5 * _unit(0, 1)),
}


def default_config(**changes):
    """Default operating point; keyword arguments go through ``SystemConfig.replace``."""
    cfg = SystemConfig()
    return cfg.replace(**changes) if changes else cfg


__all__ = [
    "ALPHA",
    "HBAR",
    "C_LIGHT",
    "LevelScheme",
    "DriveConfig",
    "DecayNetwork",
    "MediumConfig",
    "ProbeConfig",
    "SystemConfig",
    "dipole_from_decay",
    "local_fields",
    "rotating_frame_generator",
    "liouvillian_rhs",
    "ground_state",
    "maximally_mixed",
    "check_density_matrix",
    "default_config",
]
