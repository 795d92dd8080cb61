import math

import numpy as np
import pytest
from conftest import random_density

from nirgas import atomsys as A
from nirgas.errors import InvalidInputError, UnsupportedConfigurationError

# CGS values evaluated by hand: hbar = h / 2pi with h = 6.62607015e-27 erg s,
# c = 2.99792458e10 cm/s, gamma = 1e7 s^-1, lambda = 5 um.
D43_5UM = 6.313263501701027e-17
G_E_DEFAULT = 791571.7472057639
G_B_DEFAULT = 42.17442310223048


def test_dipole_golden_value():
    w = 2 * math.pi * 2.99792458e10 / 5e-4
    assert A.dipole_from_decay(1e7, w) == pytest.approx(D43_5UM, rel=1e-12)


def test_dipole_scales_as_root_gamma():
    w = A.angular_frequency(5.0)
    assert A.dipole_from_decay(4e7, w) == 2 * A.dipole_from_decay(1e7, w)


def test_dipole_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        A.dipole_from_decay(1.0, 0.0)
    with pytest.raises(InvalidInputError):
        A.dipole_from_decay(-1.0, 1.0)


def test_medium_couplings():
    m = A.MediumConfig()
    assert m.d43 == pytest.approx(D43_5UM, rel=1e-12)
    assert m.mu21 == pytest.approx(D43_5UM / 137, rel=1e-12)
    assert m.g_e == pytest.approx(G_E_DEFAULT, rel=1e-12)
    assert m.g_b == pytest.approx(G_B_DEFAULT, rel=1e-12)


def test_chi_is_dimensionless():
    # d [esu cm] * E [statvolt/cm] / (hbar gamma) [erg]: esu statvolt = erg
    m = A.MediumConfig()
    e_field = 1e-3 * m.hbar_gamma / m.d43
    assert m.d43 * e_field / m.hbar_gamma == pytest.approx(1e-3)


def test_default_decay_network():
    g = np.array(A.DecayNetwork.from_levels().rates)
    expected = np.zeros((5, 5))
    expected[2, 0] = expected[3, 1] = expected[3, 2] = expected[4, 3] = 1.0
    expected[1, 0] = A.ALPHA**2
    np.testing.assert_array_equal(g, expected)


def test_pump_enters_both_directions():
    m = A.DecayNetwork.from_levels(pump=0.3).matrix()
    assert m[2, 3] == pytest.approx(0.3)
    assert m[3, 2] == pytest.approx(1.3)


@pytest.mark.parametrize(
    "kwargs",
    [dict(density=-1.0), dict(wavelength_um=0.0), dict(gamma_abs=-1.0)],
)
def test_medium_validation(kwargs):
    with pytest.raises(InvalidInputError):
        A.MediumConfig(**kwargs)


def test_probe_grid_validation():
    with pytest.raises(InvalidInputError):
        A.ProbeConfig(w_e=())
    with pytest.raises(InvalidInputError):
        A.ProbeConfig(w_e=(1e-3, 1e-4))
    with pytest.raises(InvalidInputError):
        A.ProbeConfig(w_b=0.0)


def test_level_scheme_requires_graph():
    bad = tuple(t for t in A.DEFAULT_TRANSITIONS if t[:2] != (2, 4))
    with pytest.raises(InvalidInputError):
        A.LevelScheme(transitions=bad)


def test_polarization_validation():
    with pytest.raises(InvalidInputError):
        A.DriveConfig(polarization="linear")


def test_local_fields_zero_density():
    m = A.MediumConfig(density=0.0)
    rho = random_density(np.random.default_rng(0))
    assert A.local_fields(rho, m, (2.0, 3j)) == (2.0, 3j)


def test_local_fields_lorentz_lorenz():
    m = A.MediumConfig()
    rho = np.zeros((5, 5), dtype=complex)
    rho[3, 2] = 1e-4 + 2e-4j
    rho[1, 0] = -3e-3j
    e, b = A.local_fields(rho, m, (0.0, 0.0))
    assert e == pytest.approx(4 * np.pi / 3 * 2 * m.density * m.d43 * rho[3, 2])
    assert b == pytest.approx(4 * np.pi / 3 * 2 * m.density * m.mu21 * rho[1, 0])


def test_local_rabi_matches_local_fields(base_cfg):
    cfg = base_cfg.replace(w_e=1e-3, w_b=1e-4)
    rho = random_density(np.random.default_rng(5))
    e, b = A.local_fields(rho, cfg.medium, cfg.probe_fields())
    re, rb = A.local_rabi(rho, cfg)
    hg = cfg.medium.hbar_gamma
    assert re == pytest.approx(cfg.medium.d43 * e / hg, rel=1e-12)
    assert rb == pytest.approx(cfg.medium.mu21 * b / hg, rel=1e-12)


def test_generator_entries(base_cfg):
    cfg = base_cfg.replace(w_e=1e-3, w_b=2e-4, delta21=3.0, phase=0.4)
    rho = np.zeros((5, 5), dtype=complex)
    rho[3, 2] = 1e-6j
    h = A.rotating_frame_generator(rho, cfg)
    np.testing.assert_allclose(h, h.conj().T, atol=0)
    d = cfg.drive
    assert h[2, 0] == pytest.approx(-0.5 * d.omega31 * np.exp(0.4j))
    assert h[3, 1] == pytest.approx(-0.5 * d.omega42)
    assert h[4, 3] == pytest.approx(-0.5 * cfg.omega54)
    assert h[3, 2] == pytest.approx(-0.5 * (1e-3 + cfg.medium.g_e * 1e-6j))
    assert h[1, 0] == pytest.approx(-0.5 * 1j * 2e-4)
    assert cfg.omega54 == pytest.approx(2 * (2 * np.pi * 1e4 + 560))
    assert h[1, 1] == 3.0
    assert h[3, 3] == pytest.approx(d.delta31 + 3.0 + cfg.levels.gap)


def test_sigma_plus_flips_magnetic_phase(base_cfg):
    cfg = base_cfg.replace(w_b=1e-4, polarization=A.SIGMA_PLUS)
    h = A.rotating_frame_generator(np.zeros((5, 5)), cfg)
    assert h[1, 0] == pytest.approx(-0.5 * -1j * 1e-4)


def test_generator_is_lab_frame_stationary():
    """Build the lab-frame Hamiltonian at two times, move to the frame and compare."""
    cfg = A.default_config(w_e=1e-3, w_b=1e-4, delta21=2.5, delta54=0.3, phase=1.1)
    cfg = cfg.replace(levels=A.LevelScheme(gap=7.0), effective_gap=1.5)
    d = cfg.drive
    nu_a, nu_p, nu54 = 11.0, 5.0, 13.0  # nu_31 = nu_42 = nu_a
    w = np.array([0.0, nu_p, nu_a, nu_a + nu_p, nu_a + nu_p + nu54])
    energies = A.frame_diagonal(cfg) + w
    rabi_e, rabi_b = A.local_rabi(np.zeros((5, 5)), cfg)

    def lab(t):
        h = np.diag(energies).astype(complex)
        for (i, j), om, nu in (
            ((2, 0), d.omega31 * np.exp(1j * d.phase), nu_a),
            ((3, 1), d.omega42, nu_a),
            ((4, 3), cfg.omega54, nu54),
            ((3, 2), rabi_e, nu_p),
            ((1, 0), rabi_b, nu_p),
        ):
            h[i, j] += -0.5 * om * np.exp(-1j * nu * t)
            h[j, i] += -0.5 * np.conj(om) * np.exp(1j * nu * t)
        return h

    def to_frame(h, t):
        u = np.diag(np.exp(1j * w * t))
        return u @ h @ u.conj().T - np.diag(w)

    target = A.rotating_frame_generator(np.zeros((5, 5)), cfg)
    for t in (0.37, 2.9):
        np.testing.assert_allclose(to_frame(lab(t), t), target, atol=1e-12)


def test_unequal_coupling_frequencies_unsupported(base_cfg):
    cfg = base_cfg.replace(coupling_offset=0.1)
    with pytest.raises(UnsupportedConfigurationError):
        A.rotating_frame_generator(A.ground_state(), cfg)


def test_rhs_trace_and_hermiticity(base_cfg, rng):
    for k in range(1000):
        cfg = base_cfg.replace(
            w_e=rng.uniform(0, 2e-3),
            w_b=rng.uniform(0, 1e-3),
            delta21=rng.uniform(-100, 100),
            pump=rng.uniform(0, 0.05),
            phase=rng.uniform(0, 2 * np.pi),
        )
        rhs = A.liouvillian_rhs(random_density(rng), cfg)
        scale = max(1.0, np.abs(rhs).max())
        assert abs(np.trace(rhs)) < 1e-13 * scale
        assert np.abs(rhs - rhs.conj().T).max() < 1e-13 * scale


def test_rhs_vanishes_without_drives_in_ground_state(base_cfg):
    cfg = base_cfg.replace(omega31=0, omega42=0, effective_gap=-base_cfg.levels.gap)
    np.testing.assert_array_equal(A.liouvillian_rhs(A.ground_state(), cfg), 0)


def test_excited_population_decays_at_unit_rate():
    rates = np.zeros((5, 5))
    rates[3, 1] = 1.0
    cfg = A.SystemConfig(decay=A.DecayNetwork(rates), medium=A.MediumConfig(density=0)).replace(
        omega31=0, omega42=0, effective_gap=-A.DEFAULT_GAP
    )
    rhs = A.liouvillian_rhs(A.ground_state(4), cfg)
    assert rhs[3, 3] == pytest.approx(-1.0)
    assert rhs[1, 1] == pytest.approx(1.0)


def test_coherence_21_decay_rate(base_cfg):
    cfg = base_cfg.replace(omega31=0, omega42=0, effective_gap=-base_cfg.levels.gap)
    rho = A.ground_state() * 0.5 + A.ground_state(2) * 0.5
    rho[1, 0] = rho[0, 1] = 0.1
    rhs = A.liouvillian_rhs(rho, cfg)
    # out of |2>: alpha^2 ; out of |1>: 0 ; plus gamma_C = 1 ; delta21 = 0
    expected = A.ALPHA**2 / 2 + 1.0
    assert rhs[1, 0] == pytest.approx(-expected * 0.1, rel=1e-14)


def test_zero_density_is_linear(base_cfg, rng):
    cfg = base_cfg.replace(medium=A.MediumConfig(density=0.0), w_e=1e-3, w_b=1e-4)
    r1, r2 = random_density(rng), random_density(rng)
    for a in (0.0, 0.3, 1.0):
        lhs = A.liouvillian_rhs(a * r1 + (1 - a) * r2, cfg)
        rhs = a * A.liouvillian_rhs(r1, cfg) + (1 - a) * A.liouvillian_rhs(r2, cfg)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_pump_symmetric_in_direction(base_cfg, rng):
    rho = random_density(rng)
    base = np.array(base_cfg.decay.rates)
    sym = base_cfg.replace(pump=0.01)
    both = base.copy()
    both[2, 3] += 0.01
    both[3, 2] += 0.01
    explicit = base_cfg.replace(decay=A.DecayNetwork(both))
    np.testing.assert_allclose(A.liouvillian_rhs(rho, sym), A.liouvillian_rhs(rho, explicit), atol=1e-15)
    # the pump adds the same rate both ways, so swapping r34 and r43 changes nothing
    m = sym.decay.matrix() - base
    assert m[2, 3] == pytest.approx(m[3, 2], abs=1e-15)


def test_superoperator_matches_rhs(base_cfg, rng):
    cfg = base_cfg.replace(medium=A.MediumConfig(density=0.0), w_e=1e-3, w_b=1e-4, phase=0.7)
    rho = random_density(rng)
    s = A.PROBE_SUPEROPS
    re, rb = cfg.w_e, 1j * cfg.w_b
    sup = A.static_superop(cfg) + re * s["43"] + np.conj(re) * s["34"] + rb * s["21"] + np.conj(rb) * s["12"]
    np.testing.assert_allclose(sup @ rho.ravel(), A.liouvillian_rhs(rho, cfg).ravel(), atol=1e-12)


def test_check_density_matrix():
    A.check_density_matrix(A.maximally_mixed(), positivity_tol=1e-12)
    with pytest.raises(InvalidInputError):
        A.check_density_matrix(2 * A.ground_state())
    with pytest.raises(InvalidInputError):
        A.check_density_matrix(np.eye(4) / 4)
    bad = A.ground_state()
    bad[0, 1] = 0.1
    with pytest.raises(InvalidInputError):
        A.check_density_matrix(bad)
