import math

import numpy as np
import pytest

from uncertain_thermo.errors import BadParameter
from uncertain_thermo.gibbs import (
    GibbsOverflowWarning,
    battery_gibbs,
    battery_hamiltonian,
    battery_m_from_state,
    gibbs_from_hamiltonian,
    qubit_field_bloch,
    qubit_field_gibbs,
    qubit_field_hamiltonian,
)


@pytest.mark.parametrize("m", [1.5, 2.0, 3.0, 17.0])
@pytest.mark.parametrize("beta", [0.3, 1.0, 4.0])
def test_battery_hamiltonian_gives_battery_gibbs(m, beta):
    np.testing.assert_allclose(
        gibbs_from_hamiltonian(battery_hamiltonian(m, beta), beta).matrix, battery_gibbs(m).matrix, atol=1e-12
    )


@pytest.mark.parametrize("m, diag", [(2.0, [0.5, 0.5]), (4.0, [0.75, 0.25])])
def test_battery_gibbs_values(m, diag):
    np.testing.assert_allclose(battery_gibbs(m).matrix, np.diag(diag), atol=1e-15)


def test_battery_limit_and_inverse():
    np.testing.assert_allclose(battery_gibbs(math.inf).matrix, np.diag([1.0, 0.0]))
    assert battery_m_from_state(battery_gibbs(7.5)) == pytest.approx(7.5, rel=1e-12)
    with pytest.raises(BadParameter):
        battery_gibbs(1.0)


def test_zero_hamiltonian_is_maximally_mixed():
    np.testing.assert_allclose(gibbs_from_hamiltonian(np.zeros((3, 3)), 2.0).matrix, np.eye(3) / 3, atol=1e-15)


def test_qubit_field_bloch_vector():
    rho = gibbs_from_hamiltonian(qubit_field_hamiltonian([0, 0, 1]), 1.0).matrix
    bloch = [2 * rho[0, 1].real, -2 * rho[0, 1].imag, (rho[0, 0] - rho[1, 1]).real]
    np.testing.assert_allclose(bloch, [0, 0, math.tanh(1.0)], atol=1e-12)


@pytest.mark.parametrize("h", [[0.3, -0.2, 0.9], [1.0, 1.0, 0.0], [0.0, 0.0, -2.0]])
def test_qubit_field_closed_form_matches_exponential(h):
    beta = 0.7
    np.testing.assert_allclose(
        qubit_field_gibbs(h, beta).matrix, gibbs_from_hamiltonian(qubit_field_hamiltonian(h), beta).matrix, atol=1e-12
    )
    r = qubit_field_bloch(h, beta)
    assert np.linalg.norm(r) == pytest.approx(math.tanh(beta * np.linalg.norm(h)), abs=1e-12)


def test_zero_field_limit():
    np.testing.assert_allclose(qubit_field_gibbs([0, 0, 0], 3.0).matrix, np.eye(2) / 2)


def test_overflow_is_rescaled_with_warning():
    with pytest.warns(GibbsOverflowWarning):
        rho = gibbs_from_hamiltonian(np.diag([0.0, 1000.0]), 1.0)
    np.testing.assert_allclose(rho.matrix, np.diag([1.0, 0.0]), atol=1e-300)
