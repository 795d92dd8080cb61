import numpy as np
import pytest

from nirgas import atomsys as A


def funnel_network(target, extra=(), gamma_c=1.0):
    """Decay matrix that pumps every level other than ``target`` and its partner
    into ``target``; ``extra`` lists additional (from, to) unit channels."""
    rates = np.zeros((5, 5))
    for j, k in extra:
        rates[j - 1, k - 1] = 1.0
    skip = {target} | {j for j, _ in extra}
    for j in range(1, 6):
        if j not in skip:
            rates[j - 1, target - 1] = 1.0
    return A.DecayNetwork(rates, gamma_c=gamma_c)


def coupling_pair_config(omega, delta, gamma_c=1.0):
    """Isolated 4-5 pair driven by omega54 with gamma_54 = 1 and N = 0."""
    return A.SystemConfig(
        levels=A.LevelScheme(gap=1.0),
        decay=funnel_network(4, extra=[(5, 4)], gamma_c=gamma_c),
        medium=A.MediumConfig(density=0.0),
    ).replace(effective_gap=omega / 2 - 1.0, delta54=delta, omega31=0, omega42=0)


def probe_pair_config(w_e, delta21, gamma_c=1.0):
    """Isolated 3-4 pair probed by w_e, gamma_43 = 1, N = 0, no strong drives."""
    return A.SystemConfig(
        levels=A.LevelScheme(gap=1.0),
        decay=funnel_network(3, extra=[(4, 3)], gamma_c=gamma_c),
        medium=A.MediumConfig(density=0.0),
    ).replace(omega31=0, omega42=0, effective_gap=-1.0, delta21=delta21, w_e=w_e, w_b=0)


def bloch_steady(omega, delta, gamma, gamma2):
    """Closed-form two-level steady state: (rho_ee, rho_eg) with H_ee - H_gg = delta
    and coupling -omega/2."""
    a = omega**2 * gamma2 / (2 * gamma * (gamma2**2 + delta**2))
    ree = a / (1 + 2 * a)
    reg = 0.5j * omega * (1 - 2 * ree) / (gamma2 + 1j * delta)
    return ree, reg


def random_density(rng, n=5):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = z @ z.conj().T
    return rho / np.trace(rho).real


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def base_cfg():
    return A.default_config()
