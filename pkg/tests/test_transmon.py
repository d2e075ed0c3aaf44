"""Charge-basis transmon levels against the quartic-transmon asymptotics."""

import numpy as np
import pytest

from triqec.core import NumericsError
from triqec.transmon import (
    TransmonParams,
    ej_for_frequency,
    ej_of_flux,
    flux_for_frequency,
    transmon_spectrum,
)


def make_params(ec=0.330, ejmax=35.0, levels=4):
    return TransmonParams(ec=ec, ejmax=ejmax, g=0.220, levels=levels)


class TestEjOfFlux:
    def test_zero_flux(self):
        assert ej_of_flux(35.0, 0.0) == 35.0

    def test_half_quantum_node(self):
        assert abs(ej_of_flux(35.0, 0.5)) < 1e-12

    def test_third_quantum(self):
        assert abs(ej_of_flux(35.0, 1 / 3) - 17.5) < 1e-9


class TestSpectrum:
    def test_f01_near_asymptotic(self):
        # sqrt(8 EJ EC) - EC = 6.99 GHz for EC=0.330, EJ=20.3
        p = make_params()
        omega, _ = transmon_spectrum(p, 20.3)
        asym = np.sqrt(8 * 20.3 * 0.330) - 0.330
        assert omega[0] == 0.0
        assert abs(omega[1] - asym) / asym < 0.02

    def test_levels_increasing(self):
        p = make_params()
        omega, _ = transmon_spectrum(p, 25.0)
        assert np.all(np.diff(omega) > 0)

    def test_anharmonicity_near_minus_ec(self):
        ec = 0.330
        p = make_params(ec=ec, ejmax=ec * 60)
        omega, _ = transmon_spectrum(p, ec * 60)
        anh = (omega[2] - omega[1]) - omega[1]
        assert abs(anh + ec) / ec < 0.15

    def test_n01_asymptotic(self):
        # n01 ~ (EJ / 8 EC)^(1/4) / sqrt(2)
        p = make_params()
        ej = 25.0
        _, n_mat = transmon_spectrum(p, ej)
        asym = (ej / (8 * 0.330)) ** 0.25 / np.sqrt(2)
        assert abs(n_mat[0, 1] - asym) / asym < 0.05

    def test_nearest_neighbour_elements_dominate(self):
        p = make_params()
        _, n_mat = transmon_spectrum(p, 25.0)
        for j in range(3):
            assert n_mat[j, j + 1] > 0
            # parity: |j-k| even elements vanish at zero offset charge
            if j + 2 < 4:
                assert abs(n_mat[j, j + 2]) < 1e-9
        assert abs(n_mat[0, 3]) < 0.1 * n_mat[0, 1]

    def test_truncation_failure_raises(self):
        # vanishing cutoff cannot hold the requested levels stable
        p = make_params()
        with pytest.raises(NumericsError):
            transmon_spectrum(p, 25.0, cutoff=2)


class TestFrequencyInversion:
    def test_round_trip(self):
        p = make_params(ejmax=33.0)
        for f in (6.0, 7.0):
            ej = ej_for_frequency(p, f)
            omega, _ = transmon_spectrum(p, ej)
            assert abs(omega[1] - f) < 1e-8

    def test_flux_branch(self):
        p = make_params(ejmax=26.0)
        phi = flux_for_frequency(p, 7.85)
        assert 0 <= phi < 0.5
        omega, _ = transmon_spectrum(p, ej_of_flux(26.0, phi))
        assert abs(omega[1] - 7.85) < 1e-8

    def test_unreachable_frequency(self):
        p = make_params(ejmax=26.0)
        with pytest.raises(ValueError):
            flux_for_frequency(p, 9.5)


class TestParamsValidation:
    def test_transmon_regime_guard(self):
        with pytest.raises(ValueError):
            TransmonParams(ec=1.0, ejmax=5.0, g=0.1)

    def test_min_levels(self):
        with pytest.raises(ValueError):
            TransmonParams(ec=0.3, ejmax=30.0, g=0.1, levels=2)
